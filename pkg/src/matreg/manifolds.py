"""Manifold descriptors, exact monomial integrals and angle-space quadrature.

The quadrature here works directly in the angular parametrizations with
their scalar densities and is kept independent of the algebraic bracket code
so it can serve as a cross-check for it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .poly import Polynomial, evaluate_many


class UnknownManifoldError(ValueError):
    pass


@dataclass(frozen=True)
class Manifold:
    tag: str
    dim: int
    ambient_dim: int
    volume: float
    factors: tuple[int, ...] = ()  # sphere dimensions of product factors

    @property
    def is_product(self) -> bool:
        return bool(self.factors)


def sphere_volume(d: int) -> float:
    """Surface area of the unit sphere S^d in R^(d+1)."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


MANIFOLDS: dict[str, Manifold] = {
    "s2": Manifold("s2", 2, 3, sphere_volume(2)),
    "s3": Manifold("s3", 3, 4, sphere_volume(3)),
    "s4": Manifold("s4", 4, 5, sphere_volume(4)),
    "s2xs2": Manifold("s2xs2", 4, 6, sphere_volume(2) ** 2, factors=(2, 2)),
}


def get_manifold(tag: str | Manifold) -> Manifold:
    if isinstance(tag, Manifold):
        return tag
    try:
        return MANIFOLDS[tag.lower()]
    except KeyError:
        raise UnknownManifoldError(f"unknown manifold {tag!r}; expected one of {sorted(MANIFOLDS)}") from None


# exact integrals


@lru_cache(maxsize=None)
def monomial_sphere_integral(d: int, exponents: tuple[int, ...]) -> float:
    """Integral of prod x_i^a_i over the unit S^d with surface measure.

    Uses  2 * prod Gamma((a_i+1)/2) / Gamma((|a| + d + 1)/2),  which vanishes
    whenever an exponent is odd.
    """
    exponents = tuple(int(a) for a in exponents)
    if len(exponents) != d + 1:
        raise ValueError(f"S^{d} needs {d + 1} exponents, got {len(exponents)}")
    if any(a < 0 for a in exponents):
        raise ValueError(f"negative exponent in {exponents}")
    if any(a % 2 for a in exponents):
        return 0.0
    log_num = sum(math.lgamma((a + 1) / 2) for a in exponents)
    log_den = math.lgamma((sum(exponents) + d + 1) / 2)
    return 2.0 * math.exp(log_num - log_den)


def monomial_integral(manifold: str | Manifold, exponents: tuple[int, ...]) -> float:
    m = get_manifold(manifold)
    if not m.is_product:
        return monomial_sphere_integral(m.dim, tuple(exponents))
    out = 1.0
    offset = 0
    for fd in m.factors:
        out *= monomial_sphere_integral(fd, tuple(exponents[offset : offset + fd + 1]))
        offset += fd + 1
    return out


def monomial_integrals(manifold: str | Manifold, exponents: np.ndarray) -> np.ndarray:
    """Vectorized :func:`monomial_integral` over the last axis of ``exponents``."""
    m = get_manifold(manifold)
    exponents = np.asarray(exponents)
    if m.is_product:
        out = np.ones(exponents.shape[:-1])
        offset = 0
        for fd in m.factors:
            out = out * _sphere_integrals(fd, exponents[..., offset : offset + fd + 1])
            offset += fd + 1
        return out
    return _sphere_integrals(m.dim, exponents)


def _sphere_integrals(d: int, exponents: np.ndarray) -> np.ndarray:
    a = exponents.astype(float)
    odd = np.any(exponents % 2 == 1, axis=-1)
    log_val = np.sum(gammaln((a + 1) / 2), axis=-1) - gammaln((a.sum(axis=-1) + d + 1) / 2)
    return np.where(odd, 0.0, 2.0 * np.exp(log_val))


def polynomial_integral(manifold: str | Manifold, p: Polynomial) -> float:
    m = get_manifold(manifold)
    return sum(c * monomial_integral(m, e) for e, c in p.terms.items())


def inner(manifold: str | Manifold, p: Polynomial, q: Polynomial) -> float:
    """Integral of p*q over the manifold (surface measure, not averaged)."""
    if not p.terms or not q.terms:
        return 0.0
    e1 = np.array(list(p.terms))
    e2 = np.array(list(q.terms))
    c1 = np.array(list(p.terms.values()))
    c2 = np.array(list(q.terms.values()))
    moments = monomial_integrals(manifold, e1[:, None, :] + e2[None, :, :])
    return float(c1 @ moments @ c2)


# parametrizations
#
# Each coordinate is a product over angles of one of: 1 (angle absent),
# sin, cos.  Encoded per coordinate as a tuple of 0/1/2 (none/sin/cos).

_NONE, _SIN, _COS = 0, 1, 2


def _sphere_factors(d: int) -> list[tuple[int, ...]]:
    rows = []
    for k in range(d + 1):
        row = [_NONE] * d
        for j in range(min(k, d)):
            row[j] = _SIN
        if k < d:
            row[k] = _COS
        rows.append(tuple(row))
    return rows


@dataclass(frozen=True)
class Parametrization:
    n_angles: int
    coord_factors: tuple[tuple[int, ...], ...]  # per coordinate, per angle
    polar: tuple[bool, ...]  # True -> [0, pi] Gauss-Legendre, False -> [0, 2pi) trapezoid
    density_powers: tuple[int, ...]  # rho = prod sin(phi_j)^p_j


@lru_cache(maxsize=None)
def parametrization(tag: str) -> Parametrization:
    m = get_manifold(tag)
    if not m.is_product:
        d = m.dim
        return Parametrization(
            n_angles=d,
            coord_factors=tuple(_sphere_factors(d)),
            polar=tuple([True] * (d - 1) + [False]),
            density_powers=tuple(d - 1 - j for j in range(d)),
        )
    # S^2 x S^2: (phi1, phi2) for x, (phi3, phi4) for y
    base = _sphere_factors(2)
    rows = [r + (_NONE, _NONE) for r in base] + [(_NONE, _NONE) + r for r in base]
    return Parametrization(
        n_angles=4,
        coord_factors=tuple(rows),
        polar=(True, False, True, False),
        density_powers=(1, 0, 1, 0),
    )


def _factor_value(kind: int, s: np.ndarray, c: np.ndarray) -> np.ndarray | float:
    if kind == _SIN:
        return s
    if kind == _COS:
        return c
    return 1.0


def _product(factors: list[np.ndarray], shape: tuple[int, ...]) -> np.ndarray:
    if not factors:
        return np.ones(shape)
    out = factors[0]
    for f in factors[1:]:
        out = out * f
    return np.broadcast_to(out, shape)


def embed(tag: str, angles: np.ndarray) -> np.ndarray:
    """Ambient coordinates of shape (ambient_dim, ...) for angles (n_angles, ...)."""
    par = parametrization(get_manifold(tag).tag)
    s, c = np.sin(angles), np.cos(angles)
    shape = angles.shape[1:]
    return np.array(
        [
            _product([_factor_value(kind, s[j], c[j]) for j, kind in enumerate(row) if kind != _NONE], shape)
            for row in par.coord_factors
        ]
    )


def embed_jacobian(tag: str, angles: np.ndarray) -> np.ndarray:
    """d x_i / d phi_j, shape (ambient_dim, n_angles, ...)."""
    par = parametrization(get_manifold(tag).tag)
    s, c = np.sin(angles), np.cos(angles)
    shape = angles.shape[1:]
    out = np.zeros((len(par.coord_factors), par.n_angles) + shape)
    for i, row in enumerate(par.coord_factors):
        for m, kind_m in enumerate(row):
            if kind_m == _NONE:
                continue
            factors = [-s[m] if kind_m == _COS else c[m]]
            factors += [_factor_value(kind, s[j], c[j]) for j, kind in enumerate(row) if j != m and kind != _NONE]
            out[i, m] = _product(factors, shape)
    return out


def density(tag: str, angles: np.ndarray) -> np.ndarray:
    par = parametrization(get_manifold(tag).tag)
    s = np.sin(angles)
    out = np.ones(angles.shape[1:])
    for j, p in enumerate(par.density_powers):
        if p:
            out = out * s[j] ** p
    return out


def _axis_rule(polar: bool, count: int) -> tuple[np.ndarray, np.ndarray]:
    if polar:
        x, w = np.polynomial.legendre.leggauss(count)
        return (x + 1) * (np.pi / 2), w * (np.pi / 2)
    nodes = 2 * np.pi * np.arange(count) / count
    return nodes, np.full(count, 2 * np.pi / count)


def _resolve(resolution: int | Sequence[int], n_angles: int) -> tuple[int, ...]:
    if isinstance(resolution, (int, np.integer)):
        res = (int(resolution),) * n_angles
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != n_angles:
        raise ValueError(f"need {n_angles} per-angle point counts, got {len(res)}")
    if min(res) < 8:
        raise ValueError("quadrature resolution must be at least 8 points per angle")
    return res


def iter_grid(tag: str, resolution: int | Sequence[int]) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (angles, weights) chunks, one per node of the first angle.

    ``weights`` are the bare quadrature weights; multiply by :func:`density`
    to integrate against the surface measure.
    """
    m = get_manifold(tag)
    par = parametrization(m.tag)
    res = _resolve(resolution, par.n_angles)
    rules = [_axis_rule(p, r) for p, r in zip(par.polar, res)]
    rest_nodes = np.meshgrid(*[r[0] for r in rules[1:]], indexing="ij")
    rest_weights = np.ones(rest_nodes[0].shape) if rest_nodes else np.ones(())
    for r, mesh_w in zip(rules[1:], np.meshgrid(*[r[1] for r in rules[1:]], indexing="ij")):
        rest_weights = rest_weights * mesh_w
    rest_nodes_flat = [g.ravel() for g in rest_nodes]
    rest_weights_flat = rest_weights.ravel()
    for node, weight in zip(*rules[0]):
        first = np.full(rest_weights_flat.shape, node)
        yield np.array([first] + rest_nodes_flat), weight * rest_weights_flat


def quadrature_integral(
    tag: str,
    integrand: Polynomial | Callable[[np.ndarray, np.ndarray], np.ndarray],
    resolution: int | Sequence[int] = 32,
) -> float:
    """Numerical integral over the manifold in its angular parametrization.

    ``integrand`` is either a polynomial in ambient coordinates or a callable
    ``f(angles, coords)`` returning values on the chunk.
    """
    m = get_manifold(tag)
    total = 0.0
    for angles, w in iter_grid(m.tag, resolution):
        coords = embed(m.tag, angles)
        vals = integrand(coords) if isinstance(integrand, Polynomial) else integrand(angles, coords)
        total += float(np.sum(w * density(m.tag, angles) * vals))
    return total


def _jacobian_support(tag: str) -> tuple[tuple[bool, ...], ...]:
    par = parametrization(get_manifold(tag).tag)
    return tuple(tuple(kind != _NONE for kind in row) for row in par.coord_factors)


def _angle_derivatives(tag: str, polys: Sequence[Polynomial], angles: np.ndarray, coords: np.ndarray) -> list:
    """d F_k / d phi_j at the nodes as nested lists; None marks an exact zero."""
    jac = embed_jacobian(tag, angles)
    support = _jacobian_support(tag)
    return [_poly_angle_derivative(p, jac, coords, support) for p in polys]


def _poly_angle_derivative(p: Polynomial, jac: np.ndarray, coords: np.ndarray, support=None) -> list:
    """Per-angle derivative arrays of p; None marks an identically zero entry.

    ``support[i][j]`` says whether d x_i / d phi_j can be nonzero.
    """
    out: list = [None] * jac.shape[1]
    for i, g in enumerate(p.gradient()):
        if not g.terms:
            continue
        gv = g(coords)
        for j in range(jac.shape[1]):
            if support is not None and not support[i][j]:
                continue
            term = gv * jac[i, j]
            out[j] = term if out[j] is None else out[j] + term
    return out


def _mul(a, b):
    return None if a is None or b is None else a * b


def _add(a, b):
    if a is None:
        return b
    return a if b is None else a + b


def _minor(a, b, c, d):
    """a*d - b*c with None as an exact zero."""
    left, right = _mul(a, d), _mul(b, c)
    if right is None:
        return left
    return -right if left is None else left - right


def small_det(m) -> np.ndarray | None:
    """Determinants of a stack (k, k, points); k <= 4 written out explicitly.

    ``m`` may also be a nested sequence of point arrays in which None marks
    an exact zero; the result is then None when the determinant vanishes.
    """
    k = len(m)
    if k == 1:
        return m[0][0]
    if k == 2:
        return _minor(m[0][0], m[0][1], m[1][0], m[1][1])
    if k in (3, 4):
        # Laplace expansion along the first k - 2 rows
        out = None
        for cols in itertools.combinations(range(k), k - 2):
            rest = [x for x in range(k) if x not in cols]
            if k == 3:
                top = m[0][cols[0]]
            else:
                top = _minor(m[0][cols[0]], m[0][cols[1]], m[1][cols[0]], m[1][cols[1]])
            if top is None:
                continue
            bottom = _minor(m[k - 2][rest[0]], m[k - 2][rest[1]], m[k - 1][rest[0]], m[k - 1][rest[1]])
            if bottom is None:
                continue
            term = top * bottom
            if (sum(cols) + sum(range(k - 2))) % 2:
                term = -term
            out = term if out is None else out + term
        return out
    m = np.asarray(m)
    return np.linalg.det(np.moveaxis(m, (0, 1), (-2, -1)))


def _bracket_from_derivatives(tag: str, d, sin_angles: np.ndarray, kind: str) -> np.ndarray:
    """Bracket times density from derivatives d[k][j] = dF_k/dphi_j."""
    m = get_manifold(tag)
    if kind == "nambu":
        if len(d) != m.dim:
            raise ValueError(f"{m.tag} Nambu bracket takes {m.dim} arguments")
        return small_det(d)
    if kind == "double_poisson":
        if m.tag != "s2xs2" or len(d) != 2:
            raise ValueError("double_poisson needs two arguments on s2xs2")
        x_part = _minor(d[0][0], d[0][1], d[1][0], d[1][1])
        y_part = _minor(d[0][2], d[0][3], d[1][2], d[1][3])
        return _add(_mul(x_part, sin_angles[2]), _mul(y_part, sin_angles[0]))
    if kind == "poisson":
        if len(d) != 2 or m.dim != 2:
            raise ValueError("poisson needs two arguments on s2")
        return _minor(d[0][0], d[0][1], d[1][0], d[1][1])
    raise ValueError(f"unknown bracket kind {kind!r}")


def angle_bracket_times_density(
    tag: str, polys: Sequence[Polynomial], angles: np.ndarray, coords: np.ndarray, kind: str = "nambu"
) -> np.ndarray:
    """rho * bracket computed from angle derivatives (no division by rho).

    ``kind='nambu'`` is the Jacobian determinant over all angles;
    ``kind='double_poisson'`` is the sum of the two per-factor Poisson
    brackets on S^2 x S^2; ``kind='poisson'`` is the S^2 bracket.
    """
    m = get_manifold(tag)
    out = _bracket_from_derivatives(m.tag, _angle_derivatives(m.tag, polys, angles, coords), np.sin(angles), kind)
    return np.zeros(angles.shape[1:]) if out is None else out


def angle_bracket_values(tag: str, polys: Sequence[Polynomial], angles: np.ndarray, kind: str = "nambu") -> np.ndarray:
    """Pointwise angle-space bracket (divides by rho; avoid the poles)."""
    coords = embed(tag, angles)
    return angle_bracket_times_density(tag, polys, angles, coords, kind) / density(tag, angles)


def angle_bracket_projection_table(
    tag: str,
    poly_tuples: Sequence[Sequence[Polynomial]],
    tests: Sequence[Polynomial],
    resolution: int | Sequence[int] = 64,
    kind: str | Sequence[str] = "nambu",
) -> np.ndarray:
    """Integrals of bracket(tuple) * G for every tuple and test, in one grid pass.

    ``kind`` is one bracket kind for all tuples or one kind per tuple.
    """
    m = get_manifold(tag)
    distinct: dict[Polynomial, int] = {}
    for tup in poly_tuples:
        for p in tup:
            distinct.setdefault(p, len(distinct))
    kinds = [kind] * len(poly_tuples) if isinstance(kind, str) else list(kind)
    if len(kinds) != len(poly_tuples):
        raise ValueError("need one bracket kind per tuple")
    support = _jacobian_support(m.tag)
    out = np.zeros((len(poly_tuples), len(tests)))
    for angles, w in iter_grid(m.tag, resolution):
        coords = embed(m.tag, angles)
        jac = embed_jacobian(m.tag, angles)
        sin_angles = np.sin(angles) if "double_poisson" in kinds else None
        derivs = [_poly_angle_derivative(p, jac, coords, support) for p in distinct]
        weighted = evaluate_many(tests, coords) * w
        brackets = np.zeros((len(poly_tuples), w.size))
        for r, tup in enumerate(poly_tuples):
            val = _bracket_from_derivatives(m.tag, [derivs[distinct[p]] for p in tup], sin_angles, kinds[r])
            if val is not None:
                brackets[r] = val
        out += brackets @ weighted.T
    return out


def angle_bracket_projections(
    tag: str,
    polys: Sequence[Polynomial],
    tests: Sequence[Polynomial],
    resolution: int | Sequence[int] = 64,
    kind: str = "nambu",
) -> np.ndarray:
    """Integrals of bracket(polys) * G over the manifold for each test G."""
    return angle_bracket_projection_table(tag, [polys], tests, resolution, kind)[0]
