"""Movement identification by minimum edit distance against a dictionary.

Distances are computed over expanded per-frame label strings, so ``A6 B6``
is compared as ``AAAAAABBBBBB``.
"""

from __future__ import annotations

import json
from importlib import resources
import math
import re
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .classifier import NULL_TOKEN
from .errors import ParseError
from .sequencer import PoseSequence, RleToken, format_tokens, rle_expand

EDIT_LIMIT = 10

_TOKEN_RE = re.compile(r"([A-Za-z]+)(\d+)")


def parse_tokens(text: str) -> tuple[RleToken, ...]:
    """Parse ``"A6 B6 C10"`` into tokens. Adjacent equal labels are merged."""
    tokens: list[RleToken] = []
    for part in text.split():
        m = _TOKEN_RE.fullmatch(part)
        if m is None:
            raise ParseError(f"bad token {part!r} in {text!r}")
        label, run = m.group(1), int(m.group(2))
        if label == NULL_TOKEN:
            raise ParseError(f"NULL token not allowed in a movement sequence: {text!r}")
        if run < 1:
            raise ParseError(f"run must be >= 1 in {part!r}")
        if tokens and tokens[-1].label == label:
            tokens[-1] = RleToken(label, tokens[-1].run + run)
        else:
            tokens.append(RleToken(label, run))
    return tuple(tokens)


def expand(tokens: Iterable[RleToken]) -> list:
    out = rle_expand(tokens)
    if any(lb is None for lb in out):
        raise ValueError("cannot expand a sequence containing NULL frames")
    return out


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unit-cost edit distance, two-row dynamic programme."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def levenshtein_many(query: Sequence[int], codes: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Edit distance from ``query`` to every row of a padded code matrix at once.

    ``codes`` holds one integer-coded string per row, padded with a value that
    never occurs in ``query``; ``lengths`` gives each row's true length. The
    DP advances one query symbol at a time across all rows. Insertions within
    a row are resolved with a running minimum: ``row[j] = j + min_{k<=j}(t[k] - k)``.
    """
    n, width = codes.shape
    # distances never exceed width + len(query)
    dtype = np.int16 if width + len(query) < np.iinfo(np.int16).max else np.int64
    cols = np.arange(width + 1, dtype=dtype)
    prev = np.broadcast_to(cols, (n, width + 1)).copy()
    t = np.empty_like(prev)
    mismatch = np.empty(codes.shape, dtype=dtype)
    for i, ch in enumerate(query, 1):
        np.not_equal(codes, ch, out=mismatch, casting="unsafe")
        t[:, 0] = i
        np.add(prev[:, :-1], mismatch, out=t[:, 1:])
        np.minimum(t[:, 1:], prev[:, 1:] + 1, out=t[:, 1:])
        t -= cols
        np.minimum.accumulate(t, axis=1, out=prev)
        prev += cols
    return prev[np.arange(n), lengths].astype(np.intp)


def adjacency_of(tokens: Sequence[RleToken]) -> frozenset[frozenset]:
    return frozenset(frozenset((a.label, b.label)) for a, b in zip(tokens, tokens[1:]) if a.label != b.label)


@dataclass(frozen=True)
class MovementEntry:
    name: str
    ideal: tuple[RleToken, ...]
    variants: tuple[tuple[RleToken, ...], ...]
    adjacency: frozenset = field(init=False)

    def __post_init__(self):
        variants = tuple(self.variants)
        if self.ideal not in variants:
            variants = (self.ideal,) + variants
        object.__setattr__(self, "variants", variants)
        if not self.ideal:
            raise ValueError(f"movement {self.name!r} has an empty ideal sequence")
        allowed = {t.label for t in self.ideal}
        for v in variants:
            if not v:
                raise ValueError(f"movement {self.name!r} has an empty variant")
            extra = {t.label for t in v} - allowed
            if extra:
                raise ValueError(f"movement {self.name!r}: variant {format_tokens(v)!r} uses labels {sorted(extra)} not in the ideal")
        object.__setattr__(self, "adjacency", adjacency_of(self.ideal))


@dataclass(frozen=True)
class MatchResult:
    movement: str
    variant: tuple[RleToken, ...]
    distance: int
    span: tuple[int, int]


class MovementDictionary:
    """Immutable set of movements with their variants pre-encoded for batch matching."""

    def __init__(self, entries: Iterable[MovementEntry], edit_limit: int = EDIT_LIMIT):
        self.entries = tuple(entries)
        if edit_limit < 0:
            raise ValueError("edit_limit must be >= 0")
        self.edit_limit = edit_limit
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("movement names must be unique")

        # flattened in dictionary order, then variant order: argmin gives the tie-break
        self._index = [(ei, vi) for ei, e in enumerate(self.entries) for vi in range(len(e.variants))]
        expanded = [expand(self.entries[ei].variants[vi]) for ei, vi in self._index]
        self._alphabet = {lb: i for i, lb in enumerate(sorted({lb for s in expanded for lb in s}))}
        width = max((len(s) for s in expanded), default=0)
        codes = np.full((len(expanded), width), -1, dtype=np.int16)
        for r, s in enumerate(expanded):
            codes[r, : len(s)] = [self._alphabet[lb] for lb in s]
        self._codes = codes
        self._lengths = np.array([len(s) for s in expanded], dtype=np.intp)

    def __len__(self):
        return len(self._index)

    def encode(self, labels: Sequence[Hashable]) -> list[int]:
        return [self._alphabet.get(lb, -2) for lb in labels]

    def distances(self, labels: Sequence[Hashable]) -> np.ndarray:
        """Edit distance from ``labels`` to every variant, in flattened order."""
        if not self._index:
            return np.zeros(0, dtype=int)
        return levenshtein_many(self.encode(labels), self._codes, self._lengths)

    def variant_at(self, flat: int) -> tuple[MovementEntry, tuple[RleToken, ...]]:
        ei, vi = self._index[flat]
        e = self.entries[ei]
        return e, e.variants[vi]

    def entry(self, name: str) -> MovementEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def match_movement(seq: PoseSequence, dictionary: MovementDictionary, edit_limit: int | None = None) -> MatchResult | None:
    """Brute-force nearest variant; ``None`` when the best distance exceeds the limit.

    Ties go to the earlier movement, then the earlier variant.
    """
    limit = dictionary.edit_limit if edit_limit is None else edit_limit
    if not len(dictionary):
        return None
    d = dictionary.distances(expand(seq.tokens))
    best = int(np.argmin(d))
    if d[best] > limit:
        return None
    entry, variant = dictionary.variant_at(best)
    return MatchResult(entry.name, variant, int(d[best]), seq.buffer_span)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def generate_variants(ideal: Sequence[RleToken], scales: Sequence[float]) -> list[tuple[RleToken, ...]]:
    """Tempo variants: every run scaled by ``s`` and rounded half away from zero, at least 1."""
    if not scales:
        raise ValueError("need at least one scale")
    ideal = tuple(ideal)
    out = [ideal]
    for s in scales:
        if not s > 0:
            raise ValueError(f"scale must be positive, got {s}")
        v = tuple(RleToken(t.label, max(1, _round_half_up(t.run * s))) for t in ideal)
        if v not in out:
            out.append(v)
    return out


def load_dictionary(source=None) -> MovementDictionary:
    """Read a dictionary from a JSON path or an already-decoded mapping.

    With no source, the bundled example dictionary is returned.
    """
    if source is None:
        source = resources.files("kineseq").joinpath("data/movements.json")
    if isinstance(source, dict):
        doc, where = source, "<dict>"
    else:
        where = str(source)
        with open(source) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: invalid JSON: {exc}") from exc
    try:
        entries = [
            MovementEntry(
                m["name"],
                parse_tokens(m["ideal"]),
                tuple(parse_tokens(v) for v in m.get("variants", [])),
            )
            for m in doc["movements"]
        ]
        return MovementDictionary(entries, int(doc.get("edit_limit", EDIT_LIMIT)))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bad dictionary: {exc}") from exc


def dictionary_to_json(dictionary: MovementDictionary) -> dict:
    return {
        "edit_limit": dictionary.edit_limit,
        "movements": [
            {
                "name": e.name,
                "ideal": format_tokens(e.ideal),
                "variants": [format_tokens(v) for v in e.variants],
            }
            for e in dictionary.entries
        ],
    }
