"""Orthonormal bases of harmonic polynomials on S^2, S^3, S^4 and S^2 x S^2.

A homogeneous harmonic polynomial of degree l in x_1..x_m is fixed by its
part of x_1-degree at most one: writing p = sum_k x_1^(e+2k) q_k with
e in {0, 1}, Laplace's equation forces

    q_{k+1} = -Lap'(q_k) / ((e+2k+2)(e+2k+1)),

where Lap' acts on x_2..x_m.  Seeding q_0 with each monomial of degree l - e
gives an exact rational basis of the kernel, which is then orthonormalized
under the sphere inner product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .manifolds import get_manifold, inner, monomial_integrals
from .poly import Exponent, Polynomial, monomials_of_degree, product_embed


@dataclass(frozen=True)
class HarmonicMode:
    manifold: str
    degree: int | tuple[int, int]
    index: int
    poly: Polynomial
    factors: tuple["HarmonicMode", "HarmonicMode"] | None = None

    @property
    def total_degree(self) -> int:
        return sum(self.degree) if isinstance(self.degree, tuple) else self.degree

    @property
    def max_degree(self) -> int:
        return max(self.degree) if isinstance(self.degree, tuple) else self.degree

    def label(self) -> str:
        if self.factors is not None:
            return f"({self.factors[0].label()},{self.factors[1].label()})"
        return f"{self.degree}.{self.index}"


@dataclass(frozen=True)
class HarmonicBasis:
    manifold: str
    cutoff: int
    modes: tuple[HarmonicMode, ...]
    factor_basis: "HarmonicBasis | None" = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i: int) -> HarmonicMode:
        return self.modes[i]

    @property
    def basis_id(self) -> str:
        return f"{self.manifold}:cutoff={self.cutoff}"

    def block_sizes(self) -> list[int]:
        sizes: dict = {}
        for m in self.modes:
            sizes[m.degree] = sizes.get(m.degree, 0) + 1
        return [sizes[k] for k in sorted(sizes)]

    def gram(self) -> np.ndarray:
        return gram_matrix(self.manifold, [m.poly for m in self.modes])

    def to_json(self) -> dict:
        return {
            "manifold": self.manifold,
            "cutoff": self.cutoff,
            "normalization": "unit norm under the surface measure",
            "modes": [
                {
                    "degree": list(m.degree) if isinstance(m.degree, tuple) else m.degree,
                    "index": m.index,
                    "terms": m.poly.to_json(),
                }
                for m in self.modes
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


# exact kernel


def _lap_rest(q: dict[Exponent, Fraction]) -> dict[Exponent, Fraction]:
    """Laplacian in all variables of q (q lives on x_2..x_m)."""
    out: dict[Exponent, Fraction] = {}
    for e, c in q.items():
        for i, k in enumerate(e):
            if k >= 2:
                ne = e[:i] + (k - 2,) + e[i + 1 :]
                out[ne] = out.get(ne, Fraction(0)) + c * k * (k - 1)
    return {e: c for e, c in out.items() if c}


@lru_cache(maxsize=None)
def harmonic_kernel_exact(n_vars: int, degree: int) -> tuple[tuple[tuple[Exponent, Fraction], ...], ...]:
    """Rational basis of degree-``degree`` harmonic polynomials in ``n_vars`` variables."""
    basis = []
    for seed in monomials_of_degree(n_vars, degree):
        e0 = seed[0]
        if e0 > 1:
            continue
        q = {seed[1:]: Fraction(1)}
        terms: dict[Exponent, Fraction] = {}
        k = 0
        while q:
            power = e0 + 2 * k
            for e, c in q.items():
                terms[(power,) + e] = c
            q = _lap_rest(q)
            div = (power + 2) * (power + 1)
            q = {e: -c / div for e, c in q.items()}
            k += 1
        basis.append(tuple(sorted(terms.items(), reverse=True)))
    return tuple(basis)


def harmonic_block_dimension(n_vars: int, degree: int) -> int:
    """Enumerated kernel dimension (number of seeds) for one degree block."""
    if degree < 0:
        return 0
    return sum(1 for e in monomials_of_degree(n_vars, degree) if e[0] <= 1)


def laplacian_kernel_rank_dimension(n_vars: int, degree: int) -> int:
    """Kernel dimension from the numerical rank of the Laplacian matrix.

    Independent of the seed construction; used only as a cross-check.
    """
    cols = monomials_of_degree(n_vars, degree)
    if degree < 2:
        return len(cols)
    rows = {e: i for i, e in enumerate(monomials_of_degree(n_vars, degree - 2))}
    mat = np.zeros((len(rows), len(cols)))
    for j, e in enumerate(cols):
        for i, k in enumerate(e):
            if k >= 2:
                ne = e[:i] + (k - 2,) + e[i + 1 :]
                mat[rows[ne], j] += k * (k - 1)
    return len(cols) - int(np.linalg.matrix_rank(mat))


# counting


def dld(l: int, d: int) -> int:
    """Number of degree-l harmonics on S^d: C(l+d, d) - C(l+d-2, d)."""
    if l < 0:
        return 0
    return comb(l + d, d) - (comb(l + d - 2, d) if l >= 2 else 0)


def mode_counts(d: int, cutoff: int) -> tuple[list[int], int]:
    """Per-degree block sizes for l < cutoff and their sum."""
    if d not in (2, 3, 4):
        raise ValueError(f"unsupported sphere dimension {d}; expected 2, 3 or 4")
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    per = [dld(l, d) for l in range(cutoff)]
    return per, sum(per)


def closed_form_count(d: int, cutoff: int) -> int:
    N = cutoff
    if d == 2:
        return N * N
    if d == 3:
        return N * (N + 1) * (2 * N + 1) // 6
    if d == 4:
        return N * (N + 1) ** 2 * (N + 2) // 12
    raise ValueError(f"no closed form for d={d}")


# orthonormalization


def gram_matrix(manifold: str, polys: Sequence[Polynomial]) -> np.ndarray:
    index: dict[Exponent, int] = {}
    for p in polys:
        for e in p.terms:
            index.setdefault(e, len(index))
    coeffs = np.zeros((len(polys), len(index)))
    for r, p in enumerate(polys):
        for e, c in p.terms.items():
            coeffs[r, index[e]] = c
    moments = moment_matrix(manifold, list(index))
    return coeffs @ moments @ coeffs.T


def moment_matrix(manifold: str, exps: Sequence[Exponent]) -> np.ndarray:
    e = np.array(exps, dtype=int)
    return monomial_integrals(manifold, e[:, None, :] + e[None, :, :])


def _orthonormalize_block(manifold: str, vectors: np.ndarray, moments: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt (two passes) under <u, v> = u^T M v."""
    out: list[np.ndarray] = []
    for v in vectors:
        v = v.astype(float).copy()
        for _ in range(2):
            for u in out:
                v -= (u @ moments @ v) * u
        norm2 = v @ moments @ v
        if norm2 <= 1e-24:
            raise ArithmeticError("harmonic seeds were linearly dependent")
        out.append(v / np.sqrt(norm2))
    return np.array(out)


@lru_cache(maxsize=None)
def sphere_block(d: int, degree: int) -> tuple[Polynomial, ...]:
    """Orthonormal degree-``degree`` harmonics on S^d (unit surface-measure norm)."""
    n = d + 1
    tag = {2: "s2", 3: "s3", 4: "s4"}[d]
    exps = monomials_of_degree(n, degree)
    col = {e: i for i, e in enumerate(exps)}
    seeds = harmonic_kernel_exact(n, degree)
    vectors = np.zeros((len(seeds), len(exps)))
    for r, terms in enumerate(seeds):
        for e, c in terms:
            vectors[r, col[e]] = float(c)
    ortho = _orthonormalize_block(tag, vectors, moment_matrix(tag, exps))
    return tuple(Polynomial(n, {e: ortho[r, j] for j, e in enumerate(exps)}) for r in range(len(seeds)))


def harmonic_basis(manifold: str, cutoff: int) -> HarmonicBasis:
    """Orthonormal harmonic basis with degrees < cutoff (per factor for products)."""
    m = get_manifold(manifold)
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError(f"cutoff must be a positive integer, got {cutoff!r}")
    cutoff = int(cutoff)
    if not m.is_product:
        modes = []
        for l in range(cutoff):
            for i, p in enumerate(sphere_block(m.dim, l)):
                modes.append(HarmonicMode(m.tag, l, i, p))
        return HarmonicBasis(m.tag, cutoff, tuple(modes))
    factor = harmonic_basis("s2", cutoff)
    return HarmonicBasis(m.tag, cutoff, tuple(_product_modes(factor, cutoff)), factor_basis=factor)


def _product_modes(factor: HarmonicBasis, cutoff: int) -> list[HarmonicMode]:
    # ordered by max factor degree, so lower cutoffs form a prefix
    pairs = sorted(
        ((a, b) for a in range(len(factor)) for b in range(len(factor))),
        key=lambda ab: (max(factor[ab[0]].degree, factor[ab[1]].degree), ab[0], ab[1]),
    )
    modes = []
    for k, (a, b) in enumerate(pairs):
        fa, fb = factor[a], factor[b]
        poly = product_embed(fa.poly, 0, 6) * product_embed(fb.poly, 3, 6)
        modes.append(HarmonicMode("s2xs2", (fa.degree, fb.degree), k, poly, factors=(fa, fb)))
    return modes


def is_harmonic(mode: HarmonicMode, tol: float = 1e-12) -> bool:
    if mode.factors is not None:
        return all(is_harmonic(f, tol) for f in mode.factors)
    return mode.poly.laplacian().max_abs_coefficient() <= tol


class Projector:
    """Projects polynomials onto a fixed list of modes via exact moments."""

    def __init__(self, manifold: str, modes: Sequence[HarmonicMode], max_input_degree: int):
        self.manifold = get_manifold(manifold).tag
        self.modes = list(modes)
        m = get_manifold(manifold)
        if m.is_product:
            in_exps = [
                a + b
                for da in range(max_input_degree + 1)
                for a in monomials_of_degree(3, da)
                for db in range(max_input_degree + 1)
                for b in monomials_of_degree(3, db)
            ]
        else:
            in_exps = [e for dg in range(max_input_degree + 1) for e in monomials_of_degree(m.ambient_dim, dg)]
        self.in_index = {e: i for i, e in enumerate(in_exps)}
        mode_index: dict[Exponent, int] = {}
        for md in self.modes:
            for e in md.poly.terms:
                mode_index.setdefault(e, len(mode_index))
        mode_exps = list(mode_index)
        coeffs = np.zeros((len(self.modes), len(mode_exps)))
        for r, md in enumerate(self.modes):
            for e, c in md.poly.terms.items():
                coeffs[r, mode_index[e]] = c
        a = np.array(in_exps, dtype=int)
        b = np.array(mode_exps, dtype=int)
        cross = monomial_integrals(m, a[:, None, :] + b[None, :, :])
        # row i: integral of monomial i against each mode
        self._matrix = cross @ coeffs.T
        self._in_exps = in_exps

    def vector(self, p: Polynomial) -> np.ndarray:
        v = np.zeros(len(self.in_index))
        for e, c in p.terms.items():
            try:
                v[self.in_index[e]] = c
            except KeyError:
                raise ValueError(f"monomial {e} exceeds projector degree") from None
        return v

    def project(self, p: Polynomial) -> np.ndarray:
        return self.vector(p) @ self._matrix

    def norm2(self, p: Polynomial) -> float:
        return inner(self.manifold, p, p)
