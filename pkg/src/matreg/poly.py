"""Sparse real polynomials in the ambient embedding coordinates."""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]

PRUNE_TOL = 1e-14


class Polynomial:
    """Multivariate polynomial stored as ``{exponent tuple: coefficient}``.

    Instances are treated as immutable values; arithmetic returns new objects.
    Coefficients with magnitude below ``PRUNE_TOL`` are dropped.
    """

    __slots__ = ("ambient_dim", "terms")

    def __init__(self, ambient_dim: int, terms: Mapping[Exponent, float] | None = None):
        if ambient_dim < 1:
            raise ValueError("ambient_dim must be positive")
        self.ambient_dim = ambient_dim
        clean: dict[Exponent, float] = {}
        for exp, coef in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != ambient_dim:
                raise ValueError(f"exponent {exp} does not match ambient dimension {ambient_dim}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            coef = float(coef)
            if abs(coef) >= PRUNE_TOL:
                clean[exp] = clean.get(exp, 0.0) + coef
        self.terms = {e: c for e, c in clean.items() if abs(c) >= PRUNE_TOL}

    # construction helpers

    @classmethod
    def constant(cls, ambient_dim: int, value: float = 1.0) -> "Polynomial":
        return cls(ambient_dim, {(0,) * ambient_dim: value})

    @classmethod
    def coordinate(cls, ambient_dim: int, index: int, coef: float = 1.0) -> "Polynomial":
        exp = [0] * ambient_dim
        exp[index] = 1
        return cls(ambient_dim, {tuple(exp): coef})

    @classmethod
    def monomial(cls, exponent: Iterable[int], coef: float = 1.0) -> "Polynomial":
        exponent = tuple(exponent)
        return cls(len(exponent), {exponent: coef})

    @classmethod
    def _raw(cls, ambient_dim: int, terms: dict[Exponent, float]) -> "Polynomial":
        # trusted fast path: terms already validated
        p = cls.__new__(cls)
        p.ambient_dim = ambient_dim
        p.terms = {e: c for e, c in terms.items() if abs(c) >= PRUNE_TOL}
        return p

    # arithmetic

    def _check(self, other: "Polynomial") -> None:
        if other.ambient_dim != self.ambient_dim:
            raise ValueError(
                f"ambient dimension mismatch: {self.ambient_dim} vs {other.ambient_dim}"
            )

    def __add__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.ambient_dim, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial._raw(self.ambient_dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.ambient_dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.ambient_dim, other)
        return self + (-other)

    def __rsub__(self, other: float) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial._raw(self.ambient_dim, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        out: dict[Exponent, float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial._raw(self.ambient_dim, out)

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "Polynomial":
        return self * (1.0 / other)

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(self.ambient_dim)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.ambient_dim, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return f"Polynomial({self.ambient_dim}, 0)"
        parts = [f"{c:+.6g}*x^{e}" for e, c in sorted(self.terms.items())]
        return f"Polynomial({self.ambient_dim}, {' '.join(parts)})"

    # queries

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degrees = {sum(e) for e in self.terms}
        if not degrees:
            return True
        if len(degrees) != 1:
            return False
        return degree is None or degrees == {degree}

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def close_to(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        return (self - other).max_abs_coefficient() <= tol

    # calculus

    def derivative(self, index: int) -> "Polynomial":
        out: dict[Exponent, float] = {}
        for e, c in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            ne = e[:index] + (k - 1,) + e[index + 1 :]
            out[ne] = out.get(ne, 0.0) + c * k
        return Polynomial._raw(self.ambient_dim, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.derivative(i) for i in range(self.ambient_dim)]

    def laplacian(self, indices: Iterable[int] | None = None) -> "Polynomial":
        idx = range(self.ambient_dim) if indices is None else indices
        out = Polynomial(self.ambient_dim)
        for i in idx:
            out = out + self.derivative(i).derivative(i)
        return out

    # evaluation

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        """Evaluate on ``coords`` of shape ``(ambient_dim, ...)``."""
        coords = np.asarray(coords)
        if coords.shape[0] != self.ambient_dim:
            raise ValueError("first axis of coords must be the ambient dimension")
        out = np.zeros(coords.shape[1:])
        max_pow = max((max(e) for e in self.terms), default=0)
        powers = [[np.ones(coords.shape[1:])] for _ in range(self.ambient_dim)]
        for i in range(self.ambient_dim):
            for _ in range(max_pow):
                powers[i].append(powers[i][-1] * coords[i])
        for e, c in self.terms.items():
            term = np.full(coords.shape[1:], c)
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            out = out + term
        return out

    # serialization

    def to_json(self) -> list[dict]:
        return [{"exponents": list(e), "coefficient": c} for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, ambient_dim: int, items: list[dict]) -> "Polynomial":
        return cls(ambient_dim, {tuple(t["exponents"]): t["coefficient"] for t in items})


def evaluate_many(polys: Sequence[Polynomial], coords: np.ndarray) -> np.ndarray:
    """Evaluate several polynomials on ``coords``, sharing one table of powers."""
    coords = np.asarray(coords)
    shape = coords.shape[1:]
    out = np.zeros((len(polys),) + shape)
    powers: dict[tuple[int, int], np.ndarray] = {}

    def power(i: int, k: int) -> np.ndarray:
        if (i, k) not in powers:
            powers[(i, k)] = coords[i] if k == 1 else power(i, k - 1) * coords[i]
        return powers[(i, k)]

    for r, p in enumerate(polys):
        if p.ambient_dim != coords.shape[0]:
            raise ValueError("first axis of coords must be the ambient dimension")
        for e, c in p.terms.items():
            term = None
            for i, k in enumerate(e):
                if k:
                    term = power(i, k) if term is None else term * power(i, k)
            out[r] += c if term is None else c * term
    return out


def monomials_of_degree(n_vars: int, degree: int) -> list[Exponent]:
    """All exponent vectors of total ``degree`` in descending lexicographic order.

    Descending order puts ``x_1^degree`` first, matching the reading order
    x1, x2, x3, ... used throughout the package.
    """
    if n_vars == 1:
        return [(degree,)]
    out: list[Exponent] = []
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(n_vars - 1, degree - first):
            out.append((first,) + rest)
    return out


def product_embed(p: Polynomial, offset: int, total_dim: int) -> Polynomial:
    """Place ``p`` into a larger coordinate space starting at ``offset``."""
    out = {}
    for e, c in p.terms.items():
        ne = [0] * total_dim
        ne[offset : offset + p.ambient_dim] = e
        out[tuple(ne)] = c
    return Polynomial._raw(total_dim, out)


def reduce_mod_sphere(p: Polynomial, blocks: tuple[tuple[int, int], ...] | None = None) -> Polynomial:
    """Normal form modulo x_1^2 + ... + x_m^2 - 1 (one relation per block).

    Each ``(start, stop)`` block names a sphere's coordinates; the first
    coordinate of the block is reduced to degree at most one.  Two
    polynomials agree on the sphere iff their normal forms agree.
    """
    blocks = blocks or ((0, p.ambient_dim),)
    terms = dict(p.terms)
    for start, stop in blocks:
        out: dict[Exponent, float] = {}
        pending = list(terms.items())
        while pending:
            e, c = pending.pop()
            k = e[start]
            if k < 2:
                out[e] = out.get(e, 0.0) + c
                continue
            base = e[:start] + (k - 2,) + e[start + 1 :]
            pending.append((base, c))
            for i in range(start + 1, stop):
                ne = list(base)
                ne[i] += 2
                pending.append((tuple(ne), -c))
        terms = out
    return Polynomial._raw(p.ambient_dim, terms)
