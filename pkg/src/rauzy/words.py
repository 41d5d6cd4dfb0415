"""Words over {1..n}, signed words in the free group, and their morphisms.

A word is a tuple of positive ints. A signed word is a tuple of nonzero ints
where ``-a`` stands for the inverse letter ``a^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Word = tuple
SignedWord = tuple


def check_letters(word: Iterable[int], n: int, signed: bool = False) -> tuple:
    word = tuple(int(x) for x in word)
    for pos, x in enumerate(word, start=1):
        a = abs(x) if signed else x
        if not 1 <= a <= n:
            raise ValueError(f"letter {x} at position {pos} outside alphabet 1..{n}")
    return word


def concat(u: Sequence[int], v: Sequence[int]) -> tuple:
    return tuple(u) + tuple(v)


def reduce(w: Iterable[int]) -> tuple:
    """Free reduction: cancel adjacent ``a a^-1`` and ``a^-1 a`` pairs."""
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def invert(w: Sequence[int]) -> tuple:
    return tuple(-x for x in reversed(w))


def is_positive(w: Sequence[int]) -> bool:
    return all(x > 0 for x in w)


def abelianize(w: Iterable[int], n: int) -> np.ndarray:
    """Signed letter counts as an int vector of length ``n``."""
    counts = np.zeros(n, dtype=np.int64)
    for x in w:
        if x > 0:
            counts[x - 1] += 1
        else:
            counts[-x - 1] -= 1
    return counts


def format_word(w: Sequence[int], n: int | None = None) -> str:
    """Digits run together when every letter is < 10, otherwise comma-separated.

    Inverse letters are written ``a^-1``.
    """
    wide = n is not None and n > 9 or any(abs(x) > 9 for x in w)
    parts = [str(x) if x > 0 else f"{-x}^-1" for x in w]
    return ",".join(parts) if wide else "".join(parts)


@dataclass(frozen=True)
class FreeGroupMorphism:
    """Morphism of the free group on ``n`` letters, given by letter images."""

    n: int
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.n:
            raise ValueError(f"expected {self.n} images, got {len(self.images)}")
        images = []
        for a, img in enumerate(self.images, start=1):
            img = reduce(check_letters(img, self.n, signed=True))
            if not img:
                raise ValueError(f"image of {a} is empty (morphism must be non-erasing)")
            images.append(img)
        object.__setattr__(self, "images", tuple(images))

    @classmethod
    def identity(cls, n: int) -> FreeGroupMorphism:
        return cls(n, tuple((a,) for a in range(1, n + 1)))

    def __call__(self, w: Sequence[int]) -> tuple:
        return apply_morphism(self, w)

    def image(self, a: int) -> tuple:
        return self.images[a - 1]

    def matrix(self) -> np.ndarray:
        """Abelianized matrix; column ``a`` is the signed count vector of the image of ``a``."""
        return np.column_stack([abelianize(img, self.n) for img in self.images])

    def __str__(self):
        return "; ".join(
            f"{a}->{format_word(img, self.n)}" for a, img in enumerate(self.images, start=1)
        )


def apply_morphism(f: FreeGroupMorphism, w: Sequence[int]) -> tuple:
    out: list[int] = []
    for x in w:
        out.extend(f.images[x - 1] if x > 0 else invert(f.images[-x - 1]))
    return reduce(out)


def compose(f: FreeGroupMorphism, g: FreeGroupMorphism) -> FreeGroupMorphism:
    """``f o g``: apply ``g`` first, then ``f``."""
    if f.n != g.n:
        raise ValueError("morphisms act on different alphabets")
    return FreeGroupMorphism(f.n, tuple(apply_morphism(f, img) for img in g.images))
