"""Rolling frame buffer and run-length pose sequences.

Spans are half-open ``(start, end)`` index pairs into the buffer's current
contents.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from itertools import groupby
from typing import Hashable, Iterable, Iterator, Sequence

from .classifier import NULL_TOKEN, ClassifiedFrame
from .errors import OutOfOrderFrame, SpanOutOfRange

BUFFER_CAPACITY = 100
FRAME_PERIOD_MS = 150
SEPARATOR_LEN = 7


@dataclass(frozen=True)
class RleToken:
    label: Hashable | None
    run: int

    def __post_init__(self):
        if self.run < 1:
            raise ValueError(f"run must be >= 1, got {self.run}")

    def __str__(self):
        return f"{NULL_TOKEN if self.label is None else self.label}{self.run}"


def rle_encode(labels: Iterable[Hashable | None]) -> list[RleToken]:
    return [RleToken(label, sum(1 for _ in grp)) for label, grp in groupby(labels)]


def rle_expand(tokens: Iterable[RleToken]) -> list[Hashable | None]:
    out: list[Hashable | None] = []
    for t in tokens:
        out.extend([t.label] * t.run)
    return out


def format_tokens(tokens: Iterable[RleToken]) -> str:
    return " ".join(str(t) for t in tokens)


def smooth_nulls(tokens: Sequence[RleToken], separator_len: int = SEPARATOR_LEN) -> list[RleToken]:
    """Absorb NULL runs shorter than ``separator_len`` into neighbouring runs.

    Equal flanks are merged through the NULL run. With differing flanks the
    NULL frames join the preceding run, or the following one when the run is
    at the very start. NULL runs of ``separator_len`` or more are kept.
    """
    out: list[RleToken] = []
    carry = 0  # leading short-NULL frames waiting for a following run
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.label is None and tok.run < separator_len:
            prev = out[-1] if out and out[-1].label is not None else None
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            if prev is not None and nxt is not None and nxt.label == prev.label:
                out[-1] = RleToken(prev.label, prev.run + tok.run + nxt.run)
                i += 2
                continue
            if prev is not None:
                out[-1] = RleToken(prev.label, prev.run + tok.run)
            elif nxt is not None and nxt.label is not None:
                carry += tok.run
            else:
                out.append(tok)
            i += 1
            continue
        if carry:
            tok = RleToken(tok.label, tok.run + carry)
            carry = 0
        if out and out[-1].label == tok.label:
            out[-1] = RleToken(tok.label, out[-1].run + tok.run)
        else:
            out.append(tok)
        i += 1
    return out


@dataclass(frozen=True)
class PoseSequence:
    tokens: tuple[RleToken, ...]
    buffer_span: tuple[int, int]
    frame_accuracies: tuple[float, ...]
    # True once a full NULL separator follows the sequence
    closed: bool = False

    @property
    def labels(self) -> list:
        return rle_expand(self.tokens)

    def __str__(self):
        return format_tokens(self.tokens)


class FrameBuffer:
    """Bounded sliding window of classified frames; the oldest frame is evicted first.

    ``evicted`` counts frames dropped so far, so ``evicted + i`` is the
    stream-wide index of buffer slot ``i``.
    """

    def __init__(self, capacity: int = BUFFER_CAPACITY, frame_period: float = FRAME_PERIOD_MS):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.frame_period = frame_period
        self.frames: deque[ClassifiedFrame] = deque(maxlen=capacity)
        self.evicted = 0

    def __len__(self):
        return len(self.frames)

    def __iter__(self) -> Iterator[ClassifiedFrame]:
        return iter(self.frames)

    def __getitem__(self, i: int) -> ClassifiedFrame:
        return self.frames[i]

    @property
    def full(self) -> bool:
        return len(self.frames) == self.capacity

    def push(self, frame: ClassifiedFrame) -> "FrameBuffer":
        if self.frames and frame.timestamp < self.frames[-1].timestamp:
            raise OutOfOrderFrame(
                f"frame at {frame.timestamp} ms precedes last frame at {self.frames[-1].timestamp} ms"
            )
        if self.full:
            self.evicted += 1
        self.frames.append(frame)
        return self

    def consume(self, span: tuple[int, int]) -> "FrameBuffer":
        """Turn every frame in ``span`` into a NULL frame, keeping timestamps."""
        start, end = span
        if not 0 <= start <= end <= len(self.frames):
            raise SpanOutOfRange(f"span {span} outside buffer of length {len(self.frames)}")
        for i in range(start, end):
            f = self.frames[i]
            if f.label is not None:
                self.frames[i] = replace(f, label=None, accuracy=None)
        return self

    def copy(self) -> "FrameBuffer":
        other = FrameBuffer(self.capacity, self.frame_period)
        other.frames.extend(self.frames)
        other.evicted = self.evicted
        return other


def push_frame(buf: FrameBuffer, frame: ClassifiedFrame) -> FrameBuffer:
    return buf.push(frame)


def consume(buf: FrameBuffer, span: tuple[int, int]) -> FrameBuffer:
    return buf.consume(span)


def segment(frames: Iterable[ClassifiedFrame], separator_len: int = SEPARATOR_LEN) -> list[PoseSequence]:
    """Split the buffer into candidate pose sequences.

    NULL runs at either edge are dropped, short interior NULL runs are
    smoothed away, and the remaining NULL runs split the buffer. Frames that
    were NULL before smoothing contribute accuracy 0.
    """
    frames = list(frames)
    labels = [f.label for f in frames]
    n = len(labels)
    lo = 0
    while lo < n and labels[lo] is None:
        lo += 1
    hi = n
    while hi > lo and labels[hi - 1] is None:
        hi -= 1
    if lo == hi:
        return []
    trailing_nulls = n - hi

    smoothed = smooth_nulls(rle_encode(labels[lo:hi]), separator_len)
    out: list[PoseSequence] = []
    pos = lo
    current: list[RleToken] = []
    start = lo

    def close(end: int, closed: bool):
        accs = tuple(0.0 if f.accuracy is None else f.accuracy for f in frames[start:end])
        out.append(PoseSequence(tuple(current), (start, end), accs, closed))

    for tok in smoothed:
        if tok.label is None:
            close(pos, True)
            current = []
            start = pos + tok.run
        else:
            current.append(tok)
        pos += tok.run
    close(pos, trailing_nulls >= separator_len)
    return out
