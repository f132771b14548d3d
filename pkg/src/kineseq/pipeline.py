"""End-to-end engine: keypoint frames in, identified and scored movements out."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass, field
from itertools import chain
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence, TextIO

from .classifier import ClassifiedFrame, EvaluationDataset, classify, gate_null
from .errors import ConfigError, DegenerateTriangle, OutOfOrderFrame, StreamFormatError
from .geometry import AngleSpec, Keypoint, RawFrame, extract_features
from .matcher import MatchResult, MovementDictionary, expand, match_movement
from .scorer import score
from .sequencer import FrameBuffer, PoseSequence, format_tokens, segment

logger = logging.getLogger(__name__)

ENV_PREFIX = "KINESEQ_"


@dataclass(frozen=True)
class EngineConfig:
    frame_period_ms: float = 150.0
    buffer_capacity: int = 100
    null_threshold: float = 0.60
    separator_len: int = 7
    k: int = 5
    # None: take the value carried by the dictionary file
    edit_limit: int | None = None
    segment_len: int = 10
    # None: take the Position magnitude recorded from the evaluation CSV
    position_scale: float | None = None
    min_keypoint_score: float = 0.0

    def __post_init__(self):
        for name in ("frame_period_ms", "buffer_capacity", "separator_len", "k", "segment_len"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.null_threshold <= 1.0:
            raise ConfigError(f"null_threshold must lie in [0, 1], got {self.null_threshold}")
        if self.edit_limit is not None and self.edit_limit < 0:
            raise ConfigError("edit_limit must be >= 0")
        if self.position_scale is not None and not self.position_scale > 0:
            raise ConfigError("position_scale must be positive")
        if not 0.0 <= self.min_keypoint_score <= 1.0:
            raise ConfigError("min_keypoint_score must lie in [0, 1]")


_FIELD_TYPES = {
    "frame_period_ms": float,
    "buffer_capacity": int,
    "null_threshold": float,
    "separator_len": int,
    "k": int,
    "edit_limit": int,
    "segment_len": int,
    "position_scale": float,
    "min_keypoint_score": float,
}


def _coerce(key: str, value: Any, where: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"{where}: unknown config key {key!r}")
    if value is None:
        return None
    kind = _FIELD_TYPES[key]
    try:
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {key} must be {kind.__name__}, got {value!r}") from None
    return out


def load_config(
    path: str | os.PathLike | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> EngineConfig:
    """Defaults < JSON config file < ``KINESEQ_*`` environment < explicit overrides."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        values.update({k: _coerce(k, v, str(path)) for k, v in doc.items()})
    env = os.environ if env is None else env
    for key in _FIELD_TYPES:
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is not None and raw != "":
            values[key] = _coerce(key, raw, ENV_PREFIX + key.upper())
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _coerce(k, v, "override")
    return EngineConfig(**values)


# -- keypoint stream format ---------------------------------------------------


def frame_from_dict(obj: Mapping, where: str = "") -> RawFrame:
    try:
        kps = [Keypoint(k["name"], float(k["x"]), float(k["y"]), float(k.get("s", 1.0))) for k in obj["kp"]]
        t = float(obj["t"])
        if not math.isfinite(t):
            raise ValueError("non-finite timestamp")
        return RawFrame.from_keypoints(t, kps)
    except (KeyError, TypeError, ValueError) as exc:
        raise StreamFormatError(f"{where}bad frame: {exc}") from None


def frame_to_dict(frame: RawFrame) -> dict:
    return {
        "t": frame.timestamp,
        "kp": [{"name": k.name, "x": k.x, "y": k.y, "s": k.score} for k in frame.keypoints.values()],
    }


def read_stream(fh: TextIO) -> Iterator[RawFrame]:
    """Frames from a JSON array document or from JSON lines (one frame per line)."""
    first = ""
    lineno = 0
    for line in fh:
        lineno += 1
        if line.strip():
            first = line
            break
    if not first:
        return
    if first.lstrip().startswith("["):
        text = first + fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"invalid JSON stream: {exc}") from exc
        for i, obj in enumerate(doc):
            yield frame_from_dict(obj, f"frame {i}: ")
        return
    for ln, line in chain([(lineno, first)], enumerate(fh, lineno + 1)):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"line {ln}: invalid JSON: {exc}") from exc
        yield frame_from_dict(obj, f"line {ln}: ")


def write_stream(frames: Iterable[RawFrame], fh: TextIO, jsonl: bool = True) -> None:
    if jsonl:
        for f in frames:
            fh.write(json.dumps(frame_to_dict(f)) + "\n")
    else:
        json.dump([frame_to_dict(f) for f in frames], fh)
        fh.write("\n")


# -- report ---------------------------------------------------------------------


@dataclass
class Identification:
    movement: str
    variant: str
    distance: int
    span: tuple[int, int]
    sequence: str
    total_accuracy: float
    weighted_accuracy: float
    edit_positions: tuple[int, ...]
    worst_segment: tuple[int, int, float] | None
    start_ms: float
    end_ms: float


@dataclass
class Unmatched:
    span: tuple[int, int]
    sequence: str
    start_ms: float
    end_ms: float


@dataclass
class AnalysisReport:
    identified: list[Identification] = field(default_factory=list)
    unmatched: list[Unmatched] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def event_to_json(event: Identification | Unmatched) -> str:
    kind = "identified" if isinstance(event, Identification) else "unmatched"
    return json.dumps({"event": kind, **dataclasses.asdict(event)})


# -- engine -----------------------------------------------------------------------


class Engine:
    """Incremental analyser for one keypoint stream.

    Frames are quantised to ``frame_period_ms`` slots: several frames in one
    slot keep the latest, and empty slots become NULL frames. A slot is
    processed once a frame from a later slot arrives, or on :meth:`finish`.
    A candidate sequence is matched once a full NULL separator follows it,
    when it is about to fall out of a full buffer, or at end of stream.
    """

    def __init__(
        self,
        dataset: EvaluationDataset,
        dictionary: MovementDictionary,
        config: EngineConfig = EngineConfig(),
        specs: Sequence[AngleSpec] | None = None,
        on_event: Callable[[Identification | Unmatched], None] | None = None,
    ):
        self.config = config
        scale = dataset.position_scale if config.position_scale is None else config.position_scale
        if scale != dataset.position_scale or config.k != dataset.k:
            dataset = EvaluationDataset(dataset.samples, scale, config.k)
        self.dataset = dataset
        self.dictionary = dictionary
        self.edit_limit = dictionary.edit_limit if config.edit_limit is None else config.edit_limit
        self.specs = specs
        self.on_event = on_event
        self.buffer = FrameBuffer(config.buffer_capacity, config.frame_period_ms)
        self.report = AnalysisReport()
        self._t0: float | None = None
        self._last_t: float | None = None
        self._pending: tuple[int, RawFrame] | None = None

    # per-frame path

    def classify_frame(self, raw: RawFrame) -> ClassifiedFrame:
        if self.config.min_keypoint_score > 0 and raw.min_score() < self.config.min_keypoint_score:
            return ClassifiedFrame(None, None, raw.timestamp)
        try:
            fv = extract_features(raw, self.specs)
        except DegenerateTriangle:
            return ClassifiedFrame(None, None, raw.timestamp)
        label, acc = classify(fv, self.dataset)
        return gate_null(label, acc, self.config.null_threshold, raw.timestamp)

    def feed(self, raw: RawFrame) -> None:
        if self._last_t is not None and raw.timestamp <= self._last_t:
            raise OutOfOrderFrame(f"timestamp {raw.timestamp} does not increase past {self._last_t}")
        self._last_t = raw.timestamp
        if self._t0 is None:
            self._t0 = raw.timestamp
        slot = int((raw.timestamp - self._t0) // self.config.frame_period_ms)
        if self._pending is not None and slot != self._pending[0]:
            prev_slot, prev = self._pending
            self._step(self.classify_frame(prev))
            for missed in range(prev_slot + 1, slot):
                self._step(ClassifiedFrame(None, None, self._t0 + missed * self.config.frame_period_ms))
        self._pending = (slot, raw)

    def finish(self) -> AnalysisReport:
        if self._pending is not None:
            self._step(self.classify_frame(self._pending[1]))
            self._pending = None
        for cand in segment(self.buffer, self.config.separator_len):
            self._try_match(cand, final=True)
        return self.report

    def _step(self, frame: ClassifiedFrame) -> None:
        self.buffer.push(frame)
        for cand in segment(self.buffer, self.config.separator_len):
            if cand.closed:
                self._try_match(cand, final=True)
            elif self.buffer.full and cand.buffer_span[0] == 0:
                self._try_match(cand, final=False)

    def match(self, cand: PoseSequence) -> MatchResult | None:
        return match_movement(cand, self.dictionary, self.edit_limit)

    def _try_match(self, cand: PoseSequence, final: bool) -> None:
        result = self.match(cand)
        start, end = cand.buffer_span
        offset = self.buffer.evicted
        span = (offset + start, offset + end)
        t_start, t_end = self.buffer[start].timestamp, self.buffer[end - 1].timestamp
        if result is None:
            if not final:
                return
            event: Identification | Unmatched = Unmatched(span, str(cand), t_start, t_end)
            self.report.unmatched.append(event)
        else:
            entry = self.dictionary.entry(result.movement)
            _, acc = score(
                cand.labels,
                expand(result.variant),
                cand.frame_accuracies,
                adjacency=entry.adjacency,
                segment_len=self.config.segment_len,
            )
            event = Identification(
                movement=result.movement,
                variant=format_tokens(result.variant),
                distance=result.distance,
                span=span,
                sequence=str(cand),
                total_accuracy=acc.total_accuracy,
                weighted_accuracy=acc.weighted_accuracy,
                edit_positions=acc.edit_positions,
                worst_segment=acc.worst_segment,
                start_ms=t_start,
                end_ms=t_end,
            )
            self.report.identified.append(event)
            logger.info("identified %s at frames %s (distance %d)", result.movement, span, result.distance)
        # identified or definitively unmatched: never examine these frames again
        self.buffer.consume(cand.buffer_span)
        if self.on_event is not None:
            self.on_event(event)


def run_stream(
    source: Iterable[RawFrame],
    dataset: EvaluationDataset,
    dictionary: MovementDictionary,
    config: EngineConfig = EngineConfig(),
    specs: Sequence[AngleSpec] | None = None,
    on_event: Callable[[Identification | Unmatched], None] | None = None,
) -> AnalysisReport:
    engine = Engine(dataset, dictionary, config, specs, on_event)
    for raw in source:
        engine.feed(raw)
    return engine.finish()
