"""Deterministic synthetic skeletons, streams and evaluation datasets.

Used as ground truth for end-to-end runs without a camera or pose estimator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .classifier import DEFAULT_POSITION_SCALE, NULL_TOKEN, LabeledSample, dataset_to_csv
from .errors import DegenerateTriangle, ParseError, UnknownLabel
from .geometry import KEYPOINT_NAMES, AngleSpec, Keypoint, RawFrame, extract_features

CANVAS = (640.0, 480.0)
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class CanonicalPose:
    label: str
    keypoints: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        missing = set(KEYPOINT_NAMES).difference(self.keypoints)
        if missing:
            raise ValueError(f"pose {self.label!r} is missing keypoints {sorted(missing)}")
        # raises DegenerateTriangle for unusable geometry
        extract_features(self.frame())

    def frame(self, timestamp: float = 0.0) -> RawFrame:
        return RawFrame.from_keypoints(
            timestamp, (Keypoint(n, *self.keypoints[n]) for n in KEYPOINT_NAMES)
        )


@dataclass(frozen=True)
class SynthScript:
    """Segments of ``(label, frame count)``; ``None`` renders scrambled NULL frames."""

    segments: tuple[tuple[str | None, int], ...]
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple((lb, int(n)) for lb, n in self.segments))
        if any(n < 1 for _, n in self.segments):
            raise ValueError("segment counts must be >= 1")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")

    @classmethod
    def parse(cls, text: str, jitter: float = 0.0, seed: int = 0) -> "SynthScript":
        """``"A:6,B:6,N:7"`` -> script; ``N`` stands for NULL frames."""
        segs = []
        for part in text.replace(" ", "").split(","):
            if not part:
                continue
            try:
                label, count = part.split(":")
                segs.append((None if label == NULL_TOKEN else label, int(count)))
            except ValueError:
                raise ParseError(f"bad script segment {part!r}; expected LABEL:COUNT") from None
        return cls(tuple(segs), jitter, seed)

    def __len__(self):
        return sum(n for _, n in self.segments)


def load_poses(path=None) -> dict[str, CanonicalPose]:
    if path is None:
        doc = json.loads(resources.files("kineseq").joinpath("data/poses.json").read_text())
    else:
        with open(path) as fh:
            doc = json.load(fh)
    try:
        poses = {}
        for p in doc["poses"]:
            kps = {k["name"]: (float(k["x"]), float(k["y"])) for k in p["kp"]}
            poses[p["label"]] = CanonicalPose(p["label"], kps)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad pose file {path or '<bundled>'}: {exc}") from exc
    return poses


def _jittered(pose: CanonicalPose, rng: np.random.Generator, jitter: float, t: float) -> RawFrame:
    xy = np.array([pose.keypoints[n] for n in KEYPOINT_NAMES], dtype=float)
    if jitter > 0:
        xy = xy + rng.normal(0.0, jitter, size=xy.shape)
    return RawFrame.from_keypoints(t, (Keypoint(n, float(x), float(y)) for n, (x, y) in zip(KEYPOINT_NAMES, xy)))


def _scrambled(rng: np.random.Generator, t: float, canvas=CANVAS) -> RawFrame:
    xy = rng.uniform((0.0, 0.0), canvas, size=(len(KEYPOINT_NAMES), 2))
    pts = dict(zip(KEYPOINT_NAMES, map(tuple, xy)))
    # uniform noise alone can land close to one class and classify confidently;
    # a coincident shoulder/elbow pair makes the frame geometrically unusable,
    # so it always ends up NULL
    pts["left_elbow"] = pts["left_shoulder"]
    return RawFrame.from_keypoints(t, (Keypoint(n, float(x), float(y)) for n, (x, y) in pts.items()))


def render_stream(
    script: SynthScript,
    poses: Mapping[str, CanonicalPose],
    period: float = 150.0,
    start: float = 0.0,
) -> list[RawFrame]:
    for label, _ in script.segments:
        if label is not None and label not in poses:
            raise UnknownLabel(label)
    rng = np.random.default_rng(script.seed)
    frames = []
    i = 0
    for label, count in script.segments:
        for _ in range(count):
            t = start + i * period
            if label is None:
                frames.append(_scrambled(rng, t))
            else:
                frames.append(_jittered(poses[label], rng, script.jitter, t))
            i += 1
    return frames


def build_samples(
    poses: Mapping[str, CanonicalPose],
    per_pose: int,
    jitter: float = 0.0,
    seed: int = 0,
    specs: Sequence[AngleSpec] | None = None,
) -> list[LabeledSample]:
    if per_pose < 1:
        raise ValueError("per_pose must be >= 1")
    rng = np.random.default_rng(seed)
    samples = []
    for label in sorted(poses):
        for _ in range(per_pose):
            for _ in range(_MAX_REDRAWS):
                try:
                    fv = extract_features(_jittered(poses[label], rng, jitter, 0.0), specs)
                    break
                except DegenerateTriangle:
                    continue
            else:
                raise RuntimeError(f"could not draw a usable skeleton for {label!r}")
            samples.append(LabeledSample(fv, label))
    return samples


def build_dataset(
    poses: Mapping[str, CanonicalPose],
    per_pose: int,
    jitter: float = 0.0,
    seed: int = 0,
    specs: Sequence[AngleSpec] | None = None,
    scale: float = DEFAULT_POSITION_SCALE,
) -> str:
    """Evaluation CSV text with ``per_pose`` jittered rows per canonical pose."""
    return dataset_to_csv(build_samples(poses, per_pose, jitter, seed, specs), scale)
