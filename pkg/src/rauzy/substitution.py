"""Substitutions on {1..n}: incidence matrices, classification predicates,
powers, occurrences, periodic points and the strong coincidence condition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .words import FreeGroupMorphism, abelianize, check_letters, format_word


class Occurrence(NamedTuple):
    """Position ``k`` (1-based) in the image of letter ``j``."""

    j: int
    k: int

    def __str__(self):
        return f"({self.j};{self.k})"


@dataclass(frozen=True)
class Substitution:
    """Non-erasing morphism of the free monoid, ``images[a-1]`` is the image of ``a``."""

    n: int
    images: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("alphabet must be nonempty")
        if len(self.images) != self.n:
            raise ValueError(f"expected {self.n} images, got {len(self.images)}")
        images = []
        for a, img in enumerate(self.images, start=1):
            img = check_letters(img, self.n)
            if not img:
                raise ValueError(f"image of {a} is empty (substitution must be non-erasing)")
            images.append(img)
        object.__setattr__(self, "images", tuple(images))

    @classmethod
    def from_dict(cls, rules: dict) -> Substitution:
        n = len(rules)
        return cls(n, tuple(tuple(rules[a]) for a in range(1, n + 1)))

    @classmethod
    def from_strings(cls, *images: str) -> Substitution:
        """Shorthand for single-digit alphabets: ``from_strings("21", "31", "1")``."""
        return cls(len(images), tuple(tuple(int(c) for c in img) for img in images))

    def image(self, a: int) -> tuple:
        return self.images[a - 1]

    def __call__(self, word: Sequence[int]) -> tuple:
        out: list[int] = []
        for a in word:
            out.extend(self.images[a - 1])
        return tuple(out)

    def lengths(self) -> np.ndarray:
        return np.array([len(img) for img in self.images], dtype=np.int64)

    def as_morphism(self) -> FreeGroupMorphism:
        return FreeGroupMorphism(self.n, self.images)

    def __str__(self):
        return "; ".join(
            f"{a}->{format_word(img, self.n)}" for a, img in enumerate(self.images, start=1)
        )


def expand(s: Substitution, word: np.ndarray) -> np.ndarray:
    """Vectorized ``s(word)`` for long words stored as int arrays."""
    word = np.asarray(word, dtype=np.int64)
    lengths = s.lengths()
    flat = np.concatenate([np.asarray(img, dtype=np.int64) for img in s.images])
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    seg = lengths[word - 1]
    total = int(seg.sum())
    # offset of each output letter inside its source image
    out_start = np.repeat(np.cumsum(seg) - seg, seg)
    inner = np.arange(total) - out_start
    return flat[np.repeat(starts[word - 1], seg) + inner]


def incidence_matrix(s: Substitution) -> np.ndarray:
    """Column ``j`` counts the letters of ``s(j)``."""
    return np.column_stack([abelianize(img, s.n) for img in s.images])


def is_primitive(s: Substitution) -> bool:
    m = incidence_matrix(s) > 0
    n = s.n
    p = m.copy()
    for _ in range(n * n - 2 * n + 2):  # Wielandt bound
        if p.all():
            return True
        p = (p.astype(np.int64) @ m.astype(np.int64)) > 0
    return bool(p.all())


def int_det(m) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = [[int(x) for x in row] for row in np.asarray(m)]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_unimodular(s: Substitution) -> bool:
    return abs(int_det(incidence_matrix(s))) == 1


def char_poly_of(m) -> list[int]:
    """Monic characteristic polynomial, highest degree first (Faddeev-LeVerrier).

    All arithmetic is on Python ints; the divisions by ``k`` are exact.
    """
    a = [[int(x) for x in row] for row in np.asarray(m)]
    n = len(a)
    coeffs = [1]
    mk = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        mk = [
            [sum(a[i][t] * mk[t][j] for t in range(n)) + (c if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
        amk_trace = sum(sum(a[i][t] * mk[t][i] for t in range(n)) for i in range(n))
        assert amk_trace % k == 0
        c = -amk_trace // k
        coeffs.append(c)
    return coeffs


def char_poly(s: Substitution) -> list[int]:
    return char_poly_of(incidence_matrix(s))


def power(s: Substitution, N: int) -> Substitution:
    if N < 1:
        raise ValueError("power must be >= 1")
    images = s.images
    for _ in range(N - 1):
        images = tuple(s(img) for img in images)
    return Substitution(s.n, images)


def compose(s: Substitution, t: Substitution) -> Substitution:
    """``s o t``."""
    return Substitution(s.n, tuple(s(img) for img in t.images))


def occurrences(s: Substitution, i: int) -> list[Occurrence]:
    if not 1 <= i <= s.n:
        raise ValueError(f"letter {i} outside alphabet 1..{s.n}")
    return [
        Occurrence(j, k)
        for j, img in enumerate(s.images, start=1)
        for k, x in enumerate(img, start=1)
        if x == i
    ]


def prefix_abelianization(s: Substitution, occ: Occurrence) -> np.ndarray:
    """Letter counts of ``s(j)_1 ... s(j)_{k-1}``."""
    return abelianize(s.image(occ.j)[: occ.k - 1], s.n)


class PeriodicSeed(NamedTuple):
    a: int
    period: int


def periodic_seed(s: Substitution) -> PeriodicSeed:
    """Letter ``a`` and minimal ``k`` with ``s^k(a)`` starting with ``a``.

    Follows the first-letter map until it cycles; among cycles of minimal
    length the smallest letter wins.  The seed must generate an infinite word.
    """
    first = [img[0] for img in s.images]
    cycles = {}
    for start in range(1, s.n + 1):
        seen = []
        a = start
        while a not in seen:
            seen.append(a)
            a = first[a - 1]
        cyc = seen[seen.index(a):]
        cycles[min(cyc)] = len(cyc)
    for a, k in sorted(cycles.items(), key=lambda item: (item[1], item[0])):
        sk = power(s, k)
        w = (a,)
        for _ in range(s.n + 1):
            w = sk(w)
            if len(w) > 1:
                return PeriodicSeed(a, k)
    raise ValueError(f"no growing periodic point for {s}; is it primitive?")


def prefix_stream(s: Substitution, seed: PeriodicSeed, m: int) -> np.ndarray:
    """First ``m`` letters of the periodic point grown from ``seed``."""
    sk = power(s, seed.period)
    if sk.image(seed.a)[0] != seed.a:
        raise ValueError(f"{seed} is not a periodic seed of {s}")
    w = np.array([seed.a], dtype=np.int64)
    while len(w) < m:
        nxt = expand(sk, w)
        if len(nxt) == len(w):
            raise ValueError("periodic point does not grow")
        w = nxt
    return w[:m]


@dataclass
class CoincidenceResult:
    """Outcome of the strong coincidence search.

    ``holds`` is False when no witness was found up to ``max_depth``; that is
    "inconclusive", not a proof that the condition fails.
    """

    holds: bool
    max_depth: int
    depth: int = 0
    witnesses: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)


def _coincidence_keys(word: np.ndarray, n: int, reverse: bool) -> set:
    if reverse:
        word = word[::-1]
    onehot = np.zeros((len(word), n), dtype=np.int64)
    onehot[np.arange(len(word)), word - 1] = 1
    before = np.cumsum(onehot, axis=0) - onehot
    keys = {}
    for pos, (x, row) in enumerate(zip(word.tolist(), map(tuple, before.tolist())), start=1):
        keys.setdefault((x, row), len(word) - pos + 1 if reverse else pos)
    return keys


def strong_coincidence(s: Substitution, max_depth: int = 8, max_length: int = 10**6) -> CoincidenceResult:
    """Search, for every pair of letters, a power ``k`` and letter ``i`` with
    ``s^k(j1) = p1 i s1``, ``s^k(j2) = p2 i s2`` and equal Abelianized
    prefixes (or suffixes).  Witnesses map ``(j1, j2)`` to
    ``(k, i, pos1, pos2, "prefix"|"suffix")``.
    """
    n = s.n
    pairs = [(j1, j2) for j1 in range(1, n + 1) for j2 in range(j1 + 1, n + 1)]
    witnesses: dict = {}
    words = [np.array([a], dtype=np.int64) for a in range(1, n + 1)]
    depth = 0
    for k in range(1, max_depth + 1):
        words = [expand(s, w) for w in words]
        if max(len(w) for w in words) > max_length:
            break
        open_pairs = [p for p in pairs if p not in witnesses]
        if not open_pairs:
            break
        pre = [_coincidence_keys(w, n, reverse=False) for w in words]
        suf = [_coincidence_keys(w, n, reverse=True) for w in words]
        for j1, j2 in open_pairs:
            for kind, table in (("prefix", pre), ("suffix", suf)):
                common = table[j1 - 1].keys() & table[j2 - 1].keys()
                if common:
                    key = min(common)
                    witnesses[(j1, j2)] = (k, key[0], table[j1 - 1][key], table[j2 - 1][key], kind)
                    depth = max(depth, k)
                    break
    missing = [p for p in pairs if p not in witnesses]
    return CoincidenceResult(not missing, max_depth, depth, witnesses, missing)
