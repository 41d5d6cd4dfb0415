"""Symbol splitting, conjugation by elementary automorphisms ``j -> ij``,
their effect on eigenvectors, and the hole-drilling pipeline built from both."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import fractal, verify
from .spectral import SpectralData, base_eigenvectors, derived, power_spectral
from .substitution import (
    Occurrence,
    Substitution,
    incidence_matrix,
    occurrences,
    power,
    prefix_abelianization,
)
from .words import FreeGroupMorphism, compose, format_word, is_positive

log = logging.getLogger(__name__)

DRILL_SCHEMA = "rauzy-drill/1"


class PreconditionError(ValueError):
    """Raised when a substitution cannot be conjugated; ``violations`` lists why."""

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


@dataclass(frozen=True)
class SplitSpec:
    """Move the occurrences ``I`` of letter ``a`` to the new letter ``n + 1``."""

    a: int
    I: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(sorted(Occurrence(*o) for o in self.I)))

    @property
    def b(self) -> int:
        return self.n + 1

    def validate(self, s: Substitution):
        if s.n != self.n:
            raise ValueError(f"split spec is for {self.n} letters, substitution has {s.n}")
        if not self.I:
            raise ValueError("split needs a nonempty occurrence set")
        valid = set(occurrences(s, self.a))
        bad = [o for o in self.I if o not in valid]
        if bad:
            raise ValueError(
                f"not occurrences of {self.a}: " + ", ".join(str(o) for o in bad)
            )


def split(s: Substitution, spec: SplitSpec) -> Substitution:
    spec.validate(s)
    moved = set(spec.I)
    images = [
        tuple(spec.b if Occurrence(j, k) in moved else x for k, x in enumerate(img, start=1))
        for j, img in enumerate(s.images, start=1)
    ]
    images.append(images[spec.a - 1])
    return Substitution(s.n + 1, tuple(images))


def merge_letter(t: Substitution, b: int, a: int) -> Substitution:
    """Erase ``b`` back into ``a``; undoes ``split`` when ``b`` is the last letter."""
    images = [tuple(a if x == b else x for x in img) for q, img in enumerate(t.images, start=1) if q != b]
    return Substitution(t.n - 1, tuple(images))


def split_eigenvector(v, a: int) -> np.ndarray:
    v = np.asarray(v)
    return np.append(v, v[a - 1])


def split_spectral(sd: SpectralData, tau: Substitution, a: int) -> SpectralData:
    return derived(sd, incidence_matrix(tau), lambda v: split_eigenvector(v, a), f"split(a={a},b={sd.n + 1})")


@dataclass(frozen=True)
class ElementaryAutomorphism:
    """``j -> i j`` (others fixed) and its inverse ``j -> i^-1 j``."""

    i: int
    j: int
    n: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("elementary automorphism needs i != j")
        for x in (self.i, self.j):
            if not 1 <= x <= self.n:
                raise ValueError(f"letter {x} outside alphabet 1..{self.n}")

    def _images(self, prefix: int) -> tuple:
        return tuple((prefix, k) if k == self.j else (k,) for k in range(1, self.n + 1))

    @property
    def forward(self) -> FreeGroupMorphism:
        return FreeGroupMorphism(self.n, self._images(self.i))

    @property
    def inverse(self) -> FreeGroupMorphism:
        return FreeGroupMorphism(self.n, self._images(-self.i))

    def matrix(self) -> np.ndarray:
        return self.forward.matrix()


def elementary(i: int, j: int, n: int) -> ElementaryAutomorphism:
    return ElementaryAutomorphism(i, j, n)


def preceding_letter(t: Substitution, b: int) -> int:
    """The unique letter standing right before every occurrence of ``b``."""
    occs = occurrences(t, b)
    if not occs:
        raise PreconditionError(f"{b} does not occur in any image", [])
    violations = []
    preds = {}
    for occ in occs:
        if occ.k == 1:
            violations.append(f"{occ}: {b} is the first letter of the image of {occ.j}")
        else:
            preds.setdefault(t.image(occ.j)[occ.k - 2], []).append(occ)
    if len(preds) > 1:
        for c, where in sorted(preds.items()):
            violations.append(f"preceded by {c} at " + ", ".join(str(o) for o in where))
    if violations:
        raise PreconditionError(
            f"no unique letter precedes every occurrence of {b}: " + "; ".join(violations), violations
        )
    c = next(iter(preds))
    if c == b:
        raise PreconditionError(f"{b} is preceded by itself", [f"{b}{b} factor"])
    return c


def conjugate(t: Substitution, rho: ElementaryAutomorphism) -> Substitution:
    """``rho^-1 o t o rho`` as a substitution; fails if an image is not positive."""
    if rho.n != t.n:
        raise ValueError("automorphism and substitution act on different alphabets")
    m = compose(rho.inverse, compose(t.as_morphism(), rho.forward))
    bad = [(a, img) for a, img in enumerate(m.images, start=1) if not is_positive(img)]
    if bad:
        raise PreconditionError(
            "conjugate is not a substitution: "
            + "; ".join(f"{a}->{format_word(img, t.n)}" for a, img in bad),
            [f"{a}->{format_word(img, t.n)}" for a, img in bad],
        )
    return Substitution(t.n, m.images)


def conjugate_eigenvector(w, rho: ElementaryAutomorphism) -> np.ndarray:
    w = np.asarray(w)
    return w @ rho.matrix().astype(w.dtype if np.iscomplexobj(w) else float)


def conjugate_spectral(sd: SpectralData, theta: Substitution, rho: ElementaryAutomorphism) -> SpectralData:
    return derived(
        sd, incidence_matrix(theta), lambda w: conjugate_eigenvector(w, rho), f"conjugate(c={rho.i},b={rho.j})"
    )


def find_anchor(s: Substitution, letters: tuple[int, int] | None = None, max_power: int = 4):
    """First ``(a, c, n0, j0, k0)`` with the factor ``c a`` at ``k0 - 1, k0`` in ``s^n0(j0)``."""
    pairs = [letters] if letters else [(a, c) for a in range(1, s.n + 1) for c in range(1, s.n + 1) if a != c]
    for a, c in pairs:
        for n0 in range(1, max_power + 1):
            sn = power(s, n0)
            for j0, img in enumerate(sn.images, start=1):
                for k0 in range(2, len(img) + 1):
                    if img[k0 - 1] == a and img[k0 - 2] == c:
                        return a, c, n0, j0, k0
    raise ValueError(f"no factor 'ca' in the first {max_power} powers of {s}")


def eligible_occurrences(sN: Substitution, a: int, c: int) -> list[Occurrence]:
    """Occurrences of ``a`` whose left neighbour is ``c``."""
    return [o for o in occurrences(sN, a) if o.k >= 2 and sN.image(o.j)[o.k - 2] == c]


@dataclass
class DrillParams:
    max_N: int = 8
    force_N: int | None = None
    force_I: tuple | None = None
    seed_anchor: tuple | None = None
    budget: int = 50_000
    anchor_resolution: int = 512
    erosion: int = 2
    separation: float = 2.0


@dataclass
class DrillRecord:
    sigma: Substitution
    K: int
    a: int
    c: int
    b: int
    N: int
    I: tuple
    tau: Substitution
    theta: Substitution
    sd_sigma: SpectralData
    sd_tau: SpectralData
    sd_theta: SpectralData
    n0: int | None = None
    anchor: Occurrence | None = None
    forced: bool = False
    candidates: int = 0
    search_log: list = field(default_factory=list)

    @property
    def rho(self) -> ElementaryAutomorphism:
        return elementary(self.c, self.b, self.tau.n)

    @property
    def sigma_N(self) -> Substitution:
        return power(self.sigma, self.N)

    @property
    def sd_sigma_N(self) -> SpectralData:
        return power_spectral(self.sd_sigma, self.N)

    def check(self):
        """Re-derive every symbolic invariant of the record; raise on mismatch."""
        sN = self.sigma_N
        if len(self.I) != self.K:
            raise AssertionError(f"|I| = {len(self.I)} but K = {self.K}")
        for o in self.I:
            if not (o.k >= 2 and sN.image(o.j)[o.k - 1] == self.a and sN.image(o.j)[o.k - 2] == self.c):
                raise AssertionError(f"{o} is not an occurrence of {self.a} preceded by {self.c}")
        if split(sN, SplitSpec(self.a, self.I, sN.n)) != self.tau:
            raise AssertionError("tau does not match the split")
        if preceding_letter(self.tau, self.b) != self.c:
            raise AssertionError("predecessor of b is not c")
        if conjugate(self.tau, self.rho) != self.theta:
            raise AssertionError("theta does not match the conjugation")
        for sd in (self.sd_tau, self.sd_theta):
            worst = max(sd.residuals())
            if worst >= 1e-9 * max(1.0, self.sd_sigma.beta ** self.N):
                raise AssertionError(f"eigen residual {worst:.3g} for {sd.tag}")

    def to_dict(self) -> dict:
        return {
            "schema": DRILL_SCHEMA,
            "sigma": str(self.sigma),
            "K": self.K,
            "a": self.a,
            "c": self.c,
            "b": self.b,
            "N": self.N,
            "n0": self.n0,
            "anchor": None if self.anchor is None else list(self.anchor),
            "forced": self.forced,
            "I": [list(o) for o in self.I],
            "candidates": self.candidates,
            "tau": str(self.tau),
            "theta": str(self.theta),
            "rho": {"i": self.c, "j": self.b},
            "eigenvectors": {
                "sigma": self.sd_sigma.to_dict(),
                "tau": self.sd_tau.to_dict(),
                "theta": self.sd_theta.to_dict(),
            },
            "convention_chain": list(self.sd_theta.convention),
            "search_log": self.search_log,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _pipeline(sigma, sd, K, a, c, N, I, **extra) -> DrillRecord:
    sN = power(sigma, N)
    sdN = power_spectral(sd, N)
    spec = SplitSpec(a, I, sN.n)
    tau = split(sN, spec)
    sd_tau = split_spectral(sdN, tau, a)
    b = spec.b
    found = preceding_letter(tau, b)
    if found != c:
        raise PreconditionError(f"occurrences of {b} are preceded by {found}, expected {c}")
    rho = elementary(c, b, tau.n)
    theta = conjugate(tau, rho)
    sd_theta = conjugate_spectral(sd_tau, theta, rho)
    return DrillRecord(sigma, K, a, c, b, N, spec.I, tau, theta, sd, sd_tau, sd_theta, **extra)


def _select(cands, K: int, separation: float):
    """Greedy pick of ``K`` candidates, preferring one source letter's image."""
    if not cands:
        return None
    diam = max(c["diameter"] for c in cands)

    def greedy(pool):
        chosen = []
        for cand in pool:
            if all(np.linalg.norm(cand["centroid"] - o["centroid"]) >= separation * diam for o in chosen):
                chosen.append(cand)
                if len(chosen) == K:
                    return chosen
        return None

    for j in sorted({c["occ"].j for c in cands}):
        got = greedy([c for c in cands if c["occ"].j == j])
        if got:
            return got
    return greedy(cands)


def drill(s: Substitution, K: int, params: DrillParams | None = None, sd: SpectralData | None = None) -> DrillRecord:
    """Split ``K`` interior, well separated subsubtiles of ``s^N`` off to a new
    letter ``b`` and conjugate by ``b -> c b`` so that they leave the fractal."""
    params = params or DrillParams()
    if K < 1:
        raise ValueError("K must be positive")
    sd = sd or base_eigenvectors(s)
    if params.force_N is not None and params.force_I is not None:
        I = tuple(Occurrence(*o) for o in params.force_I)
        sN = power(s, params.force_N)
        letters = {sN.image(o.j)[o.k - 1] for o in I}
        if len(letters) != 1:
            raise ValueError(f"forced occurrences point at several letters: {sorted(letters)}")
        a = letters.pop()
        tau_probe = split(sN, SplitSpec(a, I, sN.n))
        c = preceding_letter(tau_probe, sN.n + 1)
        if len(I) != K:
            raise ValueError(f"{len(I)} forced occurrences for K = {K}")
        rec = _pipeline(s, sd, K, a, c, params.force_N, I, forced=True, candidates=len(I))
        rec.check()
        return rec

    a, c, n0, j0, k0 = find_anchor(s, params.seed_anchor)
    anchor = Occurrence(j0, k0)
    base = fractal.tiles_by_gifs(s, sd, params.budget)
    sn0 = power(s, n0)
    anchor_cloud = fractal.subsubtile(sn0, power_spectral(sd, n0), base, a, anchor)
    anchor_raster = verify.rasterize(anchor_cloud, params.anchor_resolution, dilation=1)
    search_log = []
    first_N = params.force_N or n0 + 1
    last_N = params.force_N or params.max_N
    for N in range(first_N, last_N + 1):
        sN = power(s, N)
        sdN = power_spectral(sd, N)
        cands = []
        for occ in eligible_occurrences(sN, a, c):
            cloud = fractal.subsubtile(sN, sdN, base, a, occ)
            if anchor_raster.contains(cloud, erosion=params.erosion):
                cands.append({"occ": occ, "centroid": cloud.centroid(), "diameter": cloud.diameter()})
        chosen = _select(cands, K, params.separation)
        search_log.append({"N": N, "eligible": len(eligible_occurrences(sN, a, c)), "interior": len(cands),
                           "selected": chosen is not None})
        log.info("drill N=%d: %d interior candidates", N, len(cands))
        if chosen:
            I = tuple(sorted(x["occ"] for x in chosen))
            rec = _pipeline(s, sd, K, a, c, N, I, n0=n0, anchor=anchor, candidates=len(cands),
                            search_log=search_log)
            rec.check()
            return rec
    raise ValueError(
        f"no {K} separated interior occurrences of {a} after {c} up to N={last_N}: "
        + json.dumps(search_log)
    )


def drilled_tiles(rec: DrillRecord, budget: int = fractal.VERIFY_BUDGET, **kw) -> dict:
    """GIFS clouds of the drilled substitution under its derived eigenvectors."""
    return fractal.tiles_by_gifs(rec.theta, rec.sd_theta, budget, **kw)
