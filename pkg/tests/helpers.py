"""Shared test utilities: skeleton builders and independent oracles."""

import math
from functools import lru_cache
from pathlib import Path

import numpy as np

from kineseq.geometry import KEYPOINT_NAMES, Keypoint, RawFrame

DATA = Path(__file__).parent / "data"

# upright, arms straight out, hips directly below shoulders
T_POSE = {
    "nose": (320.0, 60.0),
    "left_eye": (328.0, 52.0),
    "right_eye": (312.0, 52.0),
    "left_ear": (336.0, 56.0),
    "right_ear": (304.0, 56.0),
    "left_shoulder": (340.0, 100.0),
    "right_shoulder": (300.0, 100.0),
    "left_elbow": (400.0, 100.0),
    "right_elbow": (240.0, 100.0),
    "left_wrist": (460.0, 100.0),
    "right_wrist": (180.0, 100.0),
    "left_hip": (340.0, 220.0),
    "right_hip": (300.0, 220.0),
    "left_knee": (345.0, 320.0),
    "right_knee": (295.0, 320.0),
    "left_ankle": (340.0, 420.0),
    "right_ankle": (300.0, 420.0),
}


def make_frame(points, t=0.0):
    return RawFrame.from_keypoints(t, (Keypoint(n, *points[n]) for n in KEYPOINT_NAMES))


def random_points(rng, canvas=(640.0, 480.0)):
    xy = rng.uniform((0.0, 0.0), canvas, size=(len(KEYPOINT_NAMES), 2))
    return {n: (float(x), float(y)) for n, (x, y) in zip(KEYPOINT_NAMES, xy)}


def transform(points, scale=1.0, theta=0.0, shift=(0.0, 0.0), center=(0.0, 0.0)):
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = center
    out = {}
    for n, (x, y) in points.items():
        x0, y0 = x - cx, y - cy
        out[n] = (cx + scale * (c * x0 - s * y0) + shift[0], cy + scale * (s * x0 + c * y0) + shift[1])
    return out


def fold_orientation(phi):
    """Direction angle of an undirected axis folded onto [0, pi/2] against the horizontal."""
    psi = math.fmod(phi, math.pi)
    if psi < 0:
        psi += math.pi
    return psi if psi <= math.pi / 2 else math.pi - psi


def lev_recursive(a, b):
    """Edit distance straight from its recursive definition (memoised on suffix offsets)."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(rec(i + 1, j) + 1, rec(i, j + 1) + 1, rec(i + 1, j + 1) + (a[i] != b[j]))

    return rec(0, 0)


def knn_oracle(query, vectors, labels, k):
    """Exhaustive sort of all distances, then the documented vote and tie rules."""
    dists = [math.sqrt(sum((q - v) ** 2 for q, v in zip(query, vec))) for vec in vectors]
    order = sorted(range(len(vectors)), key=lambda i: (dists[i], i))[:k]
    counts, sums = {}, {}
    for i in order:
        counts[labels[i]] = counts.get(labels[i], 0) + 1
        sums[labels[i]] = sums.get(labels[i], 0.0) + dists[i]
    best = sorted(counts, key=lambda lb: (-counts[lb], sums[lb], lb))[0]
    return best, counts[best] / k


def apply_script(produced, ideal, ops):
    """Replay an edit script on ``produced``; the result must equal ``ideal``."""
    out = []
    ops_by_p = {}
    inserts = {}
    for op in ops:
        if op.kind == "insert":
            inserts.setdefault(op.produced, []).append(ideal[op.ideal])
        else:
            ops_by_p[op.produced] = op
    for i in range(len(produced) + 1):
        out.extend(inserts.get(i, []))
        if i == len(produced):
            break
        op = ops_by_p.get(i)
        if op is None:
            out.append(produced[i])
        elif op.kind == "substitute":
            out.append(ideal[op.ideal])
    return out


def random_labels(rng, n, alphabet="ABC"):
    return [alphabet[i] for i in rng.integers(0, len(alphabet), n)]


def rng(seed=0):
    return np.random.default_rng(seed)


ACCEPTANCE_LINES = []


def record(number, ok, detail):
    """Log one acceptance-criterion verdict; the summary hook prints them all."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
