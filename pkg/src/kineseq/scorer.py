"""Similarity scoring between a produced frame sequence and its matched ideal."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, NamedTuple, Sequence

INSERT = "insert"
DELETE = "delete"
SUBSTITUTE = "substitute"

ADJACENT_WEIGHT = 0.5
SEGMENT_LEN = 10


class EditOp(NamedTuple):
    """One edit turning ``produced`` into ``ideal``.

    For a deletion ``ideal`` is the gap position (number of ideal symbols
    before it); for an insertion ``produced`` is the gap position.
    """

    kind: str
    produced: int
    ideal: int


@dataclass(frozen=True)
class Alignment:
    produced: tuple
    ideal: tuple
    ops: tuple[EditOp, ...]
    kept: tuple[int, ...]

    @property
    def distance(self) -> int:
        return len(self.ops)


@dataclass(frozen=True)
class AccuracyReport:
    total_accuracy: float
    weighted_accuracy: float
    edit_positions: tuple[int, ...]
    worst_segment: tuple[int, int, float] | None


def align(produced: Sequence[Hashable], ideal: Sequence[Hashable]) -> Alignment:
    """One optimal edit script, recovered by backtracking the full DP table.

    At each step from the end, ties between equally cheap moves are broken in
    the order match, delete, insert, substitute.
    """
    p, q = tuple(produced), tuple(ideal)
    n, m = len(p), len(q)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        row, up = d[i], d[i - 1]
        pi = p[i - 1]
        for j in range(1, m + 1):
            row[j] = min(up[j] + 1, row[j - 1] + 1, up[j - 1] + (pi != q[j - 1]))

    ops: list[EditOp] = []
    kept: list[int] = []
    i, j = n, m
    while i or j:
        here = d[i][j]
        if i and j and p[i - 1] == q[j - 1] and d[i - 1][j - 1] == here:
            kept.append(i - 1)
            i, j = i - 1, j - 1
        elif i and d[i - 1][j] + 1 == here:
            ops.append(EditOp(DELETE, i - 1, j))
            i -= 1
        elif j and d[i][j - 1] + 1 == here:
            ops.append(EditOp(INSERT, i, j - 1))
            j -= 1
        else:
            ops.append(EditOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
    ops.reverse()
    kept.reverse()
    return Alignment(p, q, tuple(ops), tuple(kept))


def _ideal_len(alignment: Alignment, ideal_len: int | None) -> int:
    n = len(alignment.ideal) if ideal_len is None else ideal_len
    if n <= 0:
        raise ValueError("ideal sequence must be non-empty")
    return n


def total_accuracy(alignment: Alignment, frame_accuracies: Sequence[float], ideal_len: int | None = None) -> float:
    """Sum of the kept frames' accuracies over the ideal length."""
    n = _ideal_len(alignment, ideal_len)
    return sum(frame_accuracies[i] for i in alignment.kept) / n


def weighted_accuracy(
    alignment: Alignment,
    frame_accuracies: Sequence[float],
    ideal_len: int | None = None,
    adjacency=frozenset(),
) -> float:
    """Like :func:`total_accuracy`, but a substituted frame counts half when its
    produced and ideal labels are adjacent poses of the movement."""
    n = _ideal_len(alignment, ideal_len)
    total = sum(frame_accuracies[i] for i in alignment.kept)
    for op in alignment.ops:
        if op.kind == SUBSTITUTE:
            pair = frozenset((alignment.produced[op.produced], alignment.ideal[op.ideal]))
            if pair in adjacency:
                total += ADJACENT_WEIGHT * frame_accuracies[op.produced]
    return total / n


def edit_positions(alignment: Alignment) -> tuple[int, ...]:
    n = len(alignment.produced)
    pos: set[int] = set()
    for op in alignment.ops:
        if op.kind == INSERT:
            if n:
                # the frame just before the gap, or the first frame for a leading gap
                pos.add(max(0, min(op.produced - 1, n - 1)))
        else:
            pos.add(op.produced)
    return tuple(sorted(pos))


def worst_segment(frame_accuracies: Sequence[float], segment_len: int = SEGMENT_LEN) -> tuple[int, int, float] | None:
    """Lowest-mean window of ``segment_len`` frames (stride ``segment_len``, last one may be short)."""
    if segment_len < 1:
        raise ValueError("segment_len must be >= 1")
    worst = None
    for start in range(0, len(frame_accuracies), segment_len):
        window = frame_accuracies[start : start + segment_len]
        mean = sum(window) / len(window)
        if worst is None or mean < worst[2]:
            worst = (start, start + len(window), mean)
    return worst


def locate_inaccuracies(alignment: Alignment, frame_accuracies: Sequence[float], segment_len: int = SEGMENT_LEN):
    return edit_positions(alignment), worst_segment(frame_accuracies, segment_len)


def score(
    produced: Sequence[Hashable],
    ideal: Sequence[Hashable],
    frame_accuracies: Sequence[float],
    adjacency=frozenset(),
    segment_len: int = SEGMENT_LEN,
) -> tuple[Alignment, AccuracyReport]:
    if len(frame_accuracies) != len(produced):
        raise ValueError("frame_accuracies must align with the produced sequence")
    al = align(produced, ideal)
    positions, worst = locate_inaccuracies(al, frame_accuracies, segment_len)
    report = AccuracyReport(
        total_accuracy(al, frame_accuracies),
        weighted_accuracy(al, frame_accuracies, adjacency=adjacency),
        positions,
        worst,
    )
    return al, report
