"""Dominant root, Galois conjugates, left eigenvectors, projection and contraction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .substitution import Substitution, char_poly, incidence_matrix, is_primitive

EIG_TOL = 1e-9


def polish_root(coeffs, x: complex, tol: float = 1e-12, max_iter: int = 60) -> complex:
    """Newton iteration on a polynomial (highest degree first).

    Stops once the residual, scaled by ``sum |c_i| |x|^i``, drops below ``tol``.
    """
    p = np.poly1d(coeffs)
    dp = p.deriv()
    absp = np.poly1d(np.abs(np.asarray(coeffs, dtype=float)))
    x = complex(x)
    for _ in range(max_iter):
        fx = p(x)
        if abs(fx) <= tol * max(absp(abs(x)), 1.0):
            break
        d = dp(x)
        if d == 0:
            break
        x -= fx / d
    return x


def poly_roots(coeffs) -> np.ndarray:
    """All roots via the companion matrix, each polished by Newton."""
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((n, n))
    comp[0, :] = -c[1:] / c[0]
    comp[1:, :-1] = np.eye(n - 1)
    roots = np.linalg.eigvals(comp).astype(complex)
    return np.array([polish_root(coeffs, r) for r in roots])


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Exact division of integer polynomials with monic ``den``."""
    num = list(num)
    q = []
    for i in range(len(num) - len(den) + 1):
        f = num[i]
        q.append(f)
        for t, d in enumerate(den):
            num[i + t] -= f * d
    return q, num[len(q):]


def minimal_factor(coeffs: list[int], root: complex, roots=None) -> list[int]:
    """Smallest-degree monic integer divisor of ``coeffs`` vanishing at ``root``.

    Candidates are products over subsets of the numeric roots that contain
    ``root``; a candidate is accepted only if its rounded coefficients divide
    ``coeffs`` exactly.
    """
    if roots is None:
        roots = poly_roots(coeffs)
    idx = int(np.argmin(np.abs(roots - root)))
    others = [r for t, r in enumerate(roots) if t != idx]
    for d in range(1, len(roots) + 1):
        for sub in itertools.combinations(range(len(others)), d - 1):
            cand = np.poly([roots[idx]] + [others[t] for t in sub])
            if np.max(np.abs(cand.imag)) > 1e-6:
                continue
            rounded = np.round(cand.real)
            if np.max(np.abs(cand.real - rounded)) > 1e-6:
                continue
            factor = [int(x) for x in rounded]
            _, rem = _poly_divmod(coeffs, factor)
            if not any(rem):
                return factor
    return list(coeffs)


def _order_conjugates(conj) -> tuple[list[float], list[complex]]:
    real, cplx = [], []
    for z in conj:
        if abs(z.imag) <= 1e-9 * max(1.0, abs(z)):
            real.append(float(z.real))
        elif z.imag > 0:
            cplx.append(complex(z))
    real.sort(key=lambda x: (abs(x), x))
    cplx.sort(key=lambda z: (abs(z), np.angle(z)))
    return real, cplx


@dataclass(frozen=True)
class Classification:
    beta: float
    degree: int
    n_real: int
    n_complex: int
    is_pisot: bool
    is_irreducible: bool
    min_poly: tuple
    char_poly: tuple
    conjugates: tuple

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "degree": self.degree,
            "r": self.n_real,
            "s": self.n_complex,
            "pisot": self.is_pisot,
            "irreducible": self.is_irreducible,
            "min_poly": list(self.min_poly),
            "char_poly": list(self.char_poly),
            "conjugate_moduli": [abs(z) for z in self.conjugates],
        }


def classify(s: Substitution) -> Classification:
    if not is_primitive(s):
        raise ValueError(f"{s} is not primitive")
    chi = char_poly(s)
    roots = poly_roots(chi)
    real = roots[np.abs(roots.imag) < 1e-9]
    beta = float(np.max(real.real))
    beta = polish_root(chi, beta).real
    mp = minimal_factor(chi, beta, roots)
    mp_roots = poly_roots(mp)
    ib = int(np.argmin(np.abs(mp_roots - beta)))
    conj = [z for t, z in enumerate(mp_roots) if t != ib]
    real_c, cplx_c = _order_conjugates(conj)
    is_pisot = beta > 1 and all(abs(z) < 1 for z in conj)
    d = len(mp) - 1
    return Classification(
        beta=beta,
        degree=d,
        n_real=len(real_c),
        n_complex=len(cplx_c),
        is_pisot=bool(is_pisot),
        is_irreducible=d == s.n,
        min_poly=tuple(mp),
        char_poly=tuple(chi),
        conjugates=tuple(real_c) + tuple(cplx_c),
    )


def left_eigenvector(m: np.ndarray, lam: complex, norm_index: int | None = None) -> tuple[np.ndarray, int]:
    """Left eigenvector ``v`` with ``v M = lam v``, scaled so ``v[norm_index] == 1``.

    With ``norm_index=None`` the first coordinate whose magnitude is not
    negligible is used.  Returns the vector and the index actually used.
    """
    n = m.shape[0]
    a = m.T.astype(complex) - lam * np.eye(n)
    _, _, vh = np.linalg.svd(a)
    v = vh[-1].conj()
    scale = np.max(np.abs(v))
    if norm_index is None or abs(v[norm_index]) < 1e-8 * scale:
        norm_index = int(np.flatnonzero(np.abs(v) >= 1e-8 * scale)[0])
    v = v / v[norm_index]
    # one refinement pass with the normalization pinned
    keep = [t for t in range(n) if t != norm_index]
    x, *_ = np.linalg.lstsq(a[:, keep], -a[:, norm_index], rcond=None)
    v = np.ones(n, dtype=complex)
    v[keep] = x
    return v, norm_index


@dataclass(frozen=True)
class SpectralData:
    """Eigen-information attached to one incidence matrix.

    ``vectors[t]`` is the left eigenvector for ``conjugates[t]``; real
    conjugates come first, then complex ones with positive imaginary part.
    ``convention`` records how ``beta_vector`` was produced, as a chain of
    steps (solve, split, conjugate, power).
    """

    beta: float
    conjugates: tuple
    n_real: int
    n_complex: int
    beta_vector: np.ndarray
    vectors: tuple
    matrix: np.ndarray
    convention: tuple

    @property
    def degree(self) -> int:
        return 1 + self.n_real + 2 * self.n_complex

    @property
    def dim(self) -> int:
        return self.n_real + 2 * self.n_complex

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def tag(self) -> str:
        return ">".join(self.convention)

    def eigenpairs(self):
        yield self.beta, self.beta_vector
        yield from zip(self.conjugates, self.vectors)

    def residuals(self) -> list[float]:
        m = self.matrix.astype(float)
        return [float(np.max(np.abs(v @ m - lam * v))) for lam, v in self.eigenpairs()]

    def projection_matrix(self) -> np.ndarray:
        rows = []
        for t, v in enumerate(self.vectors):
            if t < self.n_real:
                rows.append(v.real)
            else:
                rows.extend([v.real, v.imag])
        return np.array(rows, dtype=float).reshape(self.dim, self.n)

    def contraction_matrix(self) -> np.ndarray:
        h = np.zeros((self.dim, self.dim))
        row = 0
        for t, z in enumerate(self.conjugates):
            if t < self.n_real:
                h[row, row] = float(np.real(z))
                row += 1
            else:
                h[row:row + 2, row:row + 2] = [[z.real, -z.imag], [z.imag, z.real]]
                row += 2
        return h

    def to_dict(self) -> dict:
        def cvec(v):
            return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]

        return {
            "beta": self.beta,
            "conjugates": [[float(np.real(z)), float(np.imag(z))] for z in self.conjugates],
            "r": self.n_real,
            "s": self.n_complex,
            "beta_vector": cvec(self.beta_vector),
            "vectors": [cvec(v) for v in self.vectors],
            "convention": list(self.convention),
        }


def base_eigenvectors(s: Substitution, norm_index: int = 0) -> SpectralData:
    """Solve every eigensystem independently, pinning one shared coordinate to 1."""
    info = classify(s)
    if not info.is_pisot:
        raise ValueError(f"{s} is not Pisot (beta = {info.beta:.9g})")
    m = incidence_matrix(s)
    bv, idx = left_eigenvector(m, info.beta, norm_index)
    vectors = []
    for z in info.conjugates:
        v, used = left_eigenvector(m, z, idx)
        if used != idx:
            raise ValueError(f"normalization coordinate {idx + 1} vanishes for conjugate {z}")
        vectors.append(v)
    return SpectralData(
        beta=info.beta,
        conjugates=info.conjugates,
        n_real=info.n_real,
        n_complex=info.n_complex,
        beta_vector=bv.real.copy(),
        vectors=tuple(vectors),
        matrix=m,
        convention=(f"solved-and-normalized(coord={idx + 1})",),
    )


def derived(sd: SpectralData, matrix: np.ndarray, transform, step: str) -> SpectralData:
    """New spectral data whose eigenvectors are ``transform(v)`` of the old ones."""
    return SpectralData(
        beta=sd.beta,
        conjugates=sd.conjugates,
        n_real=sd.n_real,
        n_complex=sd.n_complex,
        beta_vector=np.asarray(transform(sd.beta_vector)),
        vectors=tuple(np.asarray(transform(v)) for v in sd.vectors),
        matrix=np.asarray(matrix),
        convention=sd.convention + (step,),
    )


def power_spectral(sd: SpectralData, N: int) -> SpectralData:
    """Eigen-data of ``M^N`` reusing the eigenvectors of ``M``.

    The conjugate order (and hence the projection) is kept even if ``z^N``
    would be listed differently by a fresh solve.
    """
    m = np.linalg.matrix_power(sd.matrix.astype(object), N).astype(np.int64)
    return SpectralData(
        beta=sd.beta ** N,
        conjugates=tuple(z ** N for z in sd.conjugates),
        n_real=sd.n_real,
        n_complex=sd.n_complex,
        beta_vector=sd.beta_vector,
        vectors=sd.vectors,
        matrix=m,
        convention=sd.convention + (f"power(N={N})",),
    )


class Projection:
    """Linear map ``Z^n -> R^(d-1)`` built from the conjugate eigenvectors."""

    def __init__(self, sd: SpectralData):
        self.matrix = sd.projection_matrix()
        self.dim = sd.dim

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T


class Contraction:
    """Diagonal action of the conjugates, realified."""

    def __init__(self, sd: SpectralData):
        self.multipliers = tuple(sd.conjugates)
        self.matrix = sd.contraction_matrix()
        self.rate = max(abs(z) for z in self.multipliers)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.matrix.T


def projection_of(sd: SpectralData) -> Projection:
    return Projection(sd)


def contraction_of(sd: SpectralData) -> Contraction:
    if any(abs(z) >= 1 for z in sd.conjugates):
        raise ValueError("conjugates are not all inside the unit disc")
    return Contraction(sd)
