"""Keypoint geometry: distances, triangle angles and the 14-value pose feature.

Joint angles are reported in degrees and the torso orientation ("angular") in
radians, mirroring the column units of the evaluation CSV.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateTriangle, ParseError

KEYPOINT_NAMES: tuple[str, ...] = (
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
)
_NAME_SET = frozenset(KEYPOINT_NAMES)

FEATURE_NAMES: tuple[str, ...] = (
    "Left Armpit",
    "Right Armpit",
    "Left Shoulder",
    "Right Shoulder",
    "Left Elbow",
    "Right Elbow",
    "Left Hip",
    "Right Hip",
    "Left Groin",
    "Right Groin",
    "Left Knee",
    "Right Knee",
)

HORIZONTAL = -1
VERTICAL = 1


@dataclass(frozen=True)
class Keypoint:
    name: str
    x: float
    y: float
    score: float = 1.0

    def __post_init__(self):
        if self.name not in _NAME_SET:
            raise ValueError(f"unknown keypoint name {self.name!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"keypoint score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class RawFrame:
    """One timestamped skeleton: exactly one keypoint per canonical name."""

    timestamp: float
    keypoints: Mapping[str, Keypoint]

    @classmethod
    def from_keypoints(cls, timestamp: float, keypoints: Iterable[Keypoint]) -> "RawFrame":
        kps: dict[str, Keypoint] = {}
        for kp in keypoints:
            if kp.name in kps:
                raise ValueError(f"duplicate keypoint {kp.name!r}")
            kps[kp.name] = kp
        missing = _NAME_SET.difference(kps)
        if missing:
            raise ValueError(f"missing keypoints: {sorted(missing)}")
        return cls(timestamp, kps)

    def xy(self, name: str) -> tuple[float, float]:
        kp = self.keypoints[name]
        return kp.x, kp.y

    def min_score(self) -> float:
        return min(kp.score for kp in self.keypoints.values())


@dataclass(frozen=True)
class AngleSpec:
    feature_name: str
    vertex: str
    end_a: str
    end_b: str

    def __post_init__(self):
        names = (self.vertex, self.end_a, self.end_b)
        for n in names:
            if n not in _NAME_SET:
                raise ValueError(f"unknown keypoint name {n!r} in {self.feature_name}")
        if len(set(names)) != 3:
            raise ValueError(f"{self.feature_name}: vertex and endpoints must be distinct")


@dataclass(frozen=True)
class FeatureVector:
    angles: tuple[float, ...]
    angular: float
    position: int

    def __post_init__(self):
        if len(self.angles) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} angles, got {len(self.angles)}")
        if self.position not in (HORIZONTAL, VERTICAL):
            raise ValueError(f"position must be -1 or +1, got {self.position}")


def euclidean_distance(p1: Sequence[float], p2: Sequence[float]) -> float:
    return math.sqrt((p1[0] - p2[0]) ** 2 + (p1[1] - p2[1]) ** 2)


def triangle_angle(d1: float, d2: float, d3: float) -> float:
    """Law-of-cosines angle (radians) opposite side ``d3``, between ``d1`` and ``d2``.

    The cosine is clamped to [-1, 1] so that nearly collinear points do not
    fall outside the domain of ``acos``.
    """
    if d1 == 0 or d2 == 0:
        raise DegenerateTriangle("vertex coincides with an endpoint")
    c = (d1 * d1 + d2 * d2 - d3 * d3) / (2.0 * d1 * d2)
    return math.acos(min(1.0, max(-1.0, c)))


def joint_angle(frame: RawFrame, spec: AngleSpec) -> float:
    v = frame.xy(spec.vertex)
    a = frame.xy(spec.end_a)
    b = frame.xy(spec.end_b)
    try:
        rad = triangle_angle(euclidean_distance(v, a), euclidean_distance(v, b), euclidean_distance(a, b))
    except DegenerateTriangle as exc:
        raise DegenerateTriangle(f"{spec.feature_name}: {exc}") from None
    return math.degrees(rad)


def _midpoint(frame: RawFrame, left: str, right: str) -> tuple[float, float]:
    (x1, y1), (x2, y2) = frame.xy(left), frame.xy(right)
    return (x1 + x2) / 2.0, (y1 + y2) / 2.0


def angular_metric(frame: RawFrame) -> float:
    """Acute angle between the torso axis and the image horizontal, in [0, pi/2]."""
    hx, hy = _midpoint(frame, "left_hip", "right_hip")
    sx, sy = _midpoint(frame, "left_shoulder", "right_shoulder")
    dx, dy = abs(sx - hx), abs(sy - hy)
    if dx == 0 and dy == 0:
        raise DegenerateTriangle("hip midpoint coincides with shoulder midpoint")
    return math.atan2(dy, dx)


def position_flag(angular: float) -> int:
    return HORIZONTAL if angular < math.pi / 4 else VERTICAL


def extract_features(frame: RawFrame, specs: Sequence[AngleSpec] | None = None) -> FeatureVector:
    if specs is None:
        specs = default_angle_specs()
    angles = tuple(joint_angle(frame, s) for s in specs)
    angular = angular_metric(frame)
    return FeatureVector(angles, angular, position_flag(angular))


def load_angle_specs(path=None) -> tuple[AngleSpec, ...]:
    """Read the 12 angle definitions from JSON; ``None`` loads the bundled table."""
    if path is None:
        text = resources.files("kineseq").joinpath("data/angles.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        records = json.loads(text)
        specs = tuple(
            AngleSpec(r["feature_name"], r["vertex"], r["end_a"], r["end_b"]) for r in records
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad angle spec file {path or '<bundled>'}: {exc}") from exc
    if len(specs) != len(FEATURE_NAMES):
        raise ParseError(f"expected {len(FEATURE_NAMES)} angle specs, got {len(specs)}")
    return specs


_DEFAULT_SPECS: tuple[AngleSpec, ...] | None = None


def default_angle_specs() -> tuple[AngleSpec, ...]:
    global _DEFAULT_SPECS
    if _DEFAULT_SPECS is None:
        _DEFAULT_SPECS = load_angle_specs()
    return _DEFAULT_SPECS
