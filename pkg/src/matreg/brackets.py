"""Classical Poisson, double-Poisson and Nambu brackets on polynomials.

Brackets are evaluated algebraically: a d-bracket is a derivation in each
slot, so it is fixed by its values on coordinate tuples,

    {p_1, ..., p_d} = sum_I  T_I  prod_k  d p_k / d x_{I_k},

with T_I the coordinate bracket table of the manifold.  Nothing here
differentiates in angles; see :mod:`matreg.manifolds` for that route.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .harmonics import HarmonicBasis, Projector, harmonic_basis
from .linalg import levi_civita
from .manifolds import get_manifold
from .poly import Polynomial, reduce_mod_sphere

ENTRY_TOL = 1e-12


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class CoordinateBracketTable:
    manifold: str
    arity: int
    entries: dict[tuple[int, ...], Polynomial]

    @property
    def ambient_dim(self) -> int:
        return get_manifold(self.manifold).ambient_dim

    @property
    def max_entry_degree(self) -> int:
        return max((p.degree for p in self.entries.values()), default=0)

    def value(self, indices: Sequence[int]) -> Polynomial:
        return self.entries.get(tuple(indices), Polynomial(self.ambient_dim))


def _eps_table(n: int, arity: int, sign: float) -> dict[tuple[int, ...], Polynomial]:
    out = {}
    for idx in itertools.permutations(range(n), arity):
        rest = [m for m in range(n) if m not in idx]
        if len(rest) != 1:
            continue
        m = rest[0]
        eps = levi_civita(list(idx) + [m])
        out[idx] = Polynomial.coordinate(n, m, sign * eps)
    return out


def _double_poisson_entries() -> dict[tuple[int, ...], Polynomial]:
    out = {}
    for offset in (0, 3):
        for i, j in itertools.permutations(range(3), 2):
            k = 3 - i - j
            out[(i + offset, j + offset)] = Polynomial.coordinate(6, k + offset, levi_civita([i, j, k]))
    return out


def _s2xs2_four_entries() -> dict[tuple[int, ...], Polynomial]:
    two = _double_poisson_entries()
    zero = Polynomial(6)

    def b(i: int, j: int) -> Polynomial:
        return two.get((i, j), zero)

    out = {}
    for a, bb, c, d in itertools.permutations(range(6), 4):
        val = b(a, bb) * b(c, d) - b(a, c) * b(bb, d) + b(a, d) * b(bb, c)
        if not val.is_zero():
            out[(a, bb, c, d)] = val
    return out


@lru_cache(maxsize=None)
def coordinate_table(manifold: str, arity: int | None = None) -> CoordinateBracketTable:
    """Coordinate bracket table.

    s2: {x_i,x_j} = eps_ijk x_k;  s3: {x_i,x_j,x_k} = -eps_ijkl x_l;
    s4: {x_i,x_j,x_k,x_l} = eps_ijklm x_m;  s2xs2 arity 2: double-Poisson
    bracket; s2xs2 arity 4: Nambu 4-bracket built from the double-Poisson
    table by the three-term resolution.
    """
    m = get_manifold(manifold)
    if arity is None:
        arity = m.dim
    if m.tag == "s2" and arity == 2:
        return CoordinateBracketTable("s2", 2, _eps_table(3, 2, 1.0))
    if m.tag == "s3" and arity == 3:
        return CoordinateBracketTable("s3", 3, _eps_table(4, 3, -1.0))
    if m.tag == "s4" and arity == 4:
        return CoordinateBracketTable("s4", 4, _eps_table(5, 4, 1.0))
    if m.tag == "s2xs2" and arity == 2:
        return CoordinateBracketTable("s2xs2", 2, _double_poisson_entries())
    if m.tag == "s2xs2" and arity == 4:
        return CoordinateBracketTable("s2xs2", 4, _s2xs2_four_entries())
    raise ArityError(f"no {arity}-bracket table for {m.tag}")


def bracket(args: Sequence[Polynomial], table: CoordinateBracketTable) -> Polynomial:
    """Multilinear derivation-in-each-slot expansion against ``table``."""
    if len(args) != table.arity:
        raise ArityError(f"table has arity {table.arity}, got {len(args)} arguments")
    n = table.ambient_dim
    for p in args:
        if p.ambient_dim != n:
            raise ValueError(f"ambient dimension mismatch: expected {n}, got {p.ambient_dim}")
    grads = [p.gradient() for p in args]
    support = [[i for i in range(n) if not g[i].is_zero()] for g in grads]
    out: dict = {}
    for idx in itertools.product(*support):
        t = table.entries.get(idx)
        if t is None:
            continue
        term = t
        for k, i in enumerate(idx):
            term = term * grads[k][i]
        for e, c in term.terms.items():
            out[e] = out.get(e, 0.0) + c
    return Polynomial(n, out)


def poisson_bracket(p: Polynomial, q: Polynomial, table: CoordinateBracketTable | None = None) -> Polynomial:
    table = table or coordinate_table("s2", 2)
    if table.arity != 2:
        raise ArityError("poisson_bracket needs an arity-2 table")
    return bracket([p, q], table)


def double_poisson(p: Polynomial, q: Polynomial, table: CoordinateBracketTable | None = None) -> Polynomial:
    """Sum of the two factor Poisson brackets on S^2 x S^2 (x1..x3, y1..y3)."""
    table = table or coordinate_table("s2xs2", 2)
    if table.manifold != "s2xs2" or table.arity != 2:
        raise ArityError("double_poisson needs the s2xs2 arity-2 table")
    return bracket([p, q], table)


def nambu_bracket(args: Sequence[Polynomial], table: CoordinateBracketTable) -> Polynomial:
    if table.arity not in (3, 4):
        raise ArityError("nambu_bracket supports arity 3 or 4")
    return bracket(args, table)


def nambu4_resolution_check(
    f1: Polynomial, f2: Polynomial, f3: Polynomial, f4: Polynomial
) -> tuple[Polynomial, Polynomial]:
    """Direct S^2 x S^2 Nambu 4-bracket and its double-Poisson resolution.

    The resolution is {F1,F2}{F3,F4} - {F1,F3}{F2,F4} + {F1,F4}{F2,F3}.
    """
    lhs = nambu_bracket([f1, f2, f3, f4], coordinate_table("s2xs2", 4))
    rhs = (
        double_poisson(f1, f2) * double_poisson(f3, f4)
        - double_poisson(f1, f3) * double_poisson(f2, f4)
        + double_poisson(f1, f4) * double_poisson(f2, f3)
    )
    return lhs, rhs


# structure constants


@dataclass
class StructureConstants:
    """Sparse structure-constant tensor f[A_1..A_d, C].

    Only strictly increasing (A_1 < ... < A_d) tuples are stored; other
    orderings follow by antisymmetry.  ``C`` indexes ``target_labels``, whose
    first ``n_in_cutoff`` entries are the in-cutoff modes.  ``residuals`` holds
    the norm of bracket content on out-of-cutoff target modes and
    ``closure_defect`` the norm left unexplained by the whole target set.
    """

    arity: int
    basis_id: str
    kind: str
    n_in_cutoff: int
    target_labels: list[str]
    entries: dict[tuple[int, ...], float] = field(default_factory=dict)
    residuals: dict[tuple[int, ...], float] = field(default_factory=dict)
    closure_defect: dict[tuple[int, ...], float] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def value(self, indices: Sequence[int]) -> float:
        *args, c = indices
        if len(set(args)) != len(args):
            return 0.0
        order = sorted(range(len(args)), key=lambda i: args[i])
        sign = levi_civita(order)
        return sign * self.entries.get(tuple(sorted(args)) + (c,), 0.0)

    def row(self, args: Sequence[int]) -> np.ndarray:
        return np.array([self.value(list(args) + [c]) for c in range(len(self.target_labels))])

    def tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.closure_defect)

    def in_cutoff_tensor(self) -> dict[tuple[int, ...], float]:
        return {k: v for k, v in self.entries.items() if k[-1] < self.n_in_cutoff}

    def max_closure_defect(self) -> float:
        return max(self.closure_defect.values(), default=0.0)

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "basis_id": self.basis_id,
            "kind": self.kind,
            "n_in_cutoff": self.n_in_cutoff,
            "entries": [{"indices": list(k), "value": v} for k, v in sorted(self.entries.items())],
            "residuals": [{"indices": list(k), "norm": v} for k, v in sorted(self.residuals.items())],
            "closure_defects": [{"indices": list(k), "norm": v} for k, v in sorted(self.closure_defect.items())],
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _sphere_blocks(tag: str) -> tuple[tuple[int, int], ...]:
    m = get_manifold(tag)
    if m.is_product:
        return ((0, 3), (3, 6))
    return ((0, m.ambient_dim),)


def attainable_degree(manifold: str, arity: int, max_degree: int) -> int:
    """Largest harmonic degree a bracket of modes of degree <= max_degree can reach.

    For the product manifold the bound is per factor.
    """
    m = get_manifold(manifold)
    if not m.is_product:
        return max(arity * max_degree - arity + 1, 0)
    if arity == 2:
        return 2 * max_degree
    return max(arity * max_degree - 1, 0)


def extended_basis(basis: HarmonicBasis, arity: int) -> HarmonicBasis:
    top = attainable_degree(basis.manifold, arity, basis.cutoff - 1)
    return harmonic_basis(basis.manifold, max(basis.cutoff, top + 1))


def classical_structure_constants(
    basis: HarmonicBasis,
    table: CoordinateBracketTable | None = None,
    target: HarmonicBasis | None = None,
) -> StructureConstants:
    """Expand brackets of basis modes in harmonics of every attainable degree."""
    m = get_manifold(basis.manifold)
    table = table or coordinate_table(m.tag)
    if table.manifold != m.tag:
        raise ValueError(f"table is for {table.manifold}, basis for {m.tag}")
    d = table.arity
    target = target or extended_basis(basis, d)
    if target.modes[: len(basis)] != basis.modes:
        raise ValueError("target basis must extend the input basis")
    max_in = attainable_degree(m.tag, d, basis.cutoff - 1) + 1
    proj = Projector(m.tag, target.modes, max_in)
    sc = StructureConstants(
        arity=d,
        basis_id=basis.basis_id,
        kind="classical",
        n_in_cutoff=len(basis),
        target_labels=[md.label() for md in target.modes],
        meta={"target_basis_id": target.basis_id, "normalization": "unit surface-measure norm"},
    )
    polys = [md.poly for md in basis.modes]
    for tup in itertools.combinations(range(len(basis)), d):
        res = bracket([polys[i] for i in tup], table)
        if res.is_zero():
            sc.closure_defect[tup] = 0.0
            sc.residuals[tup] = 0.0
            continue
        coeffs = proj.project(res)
        remainder = res
        for c, v in enumerate(coeffs):
            if abs(v) > ENTRY_TOL:
                sc.entries[tup + (c,)] = float(v)
                remainder = remainder - target.modes[c].poly * float(v)
        # normal form first: the remainder vanishes on the manifold up to roundoff
        remainder = reduce_mod_sphere(remainder, _sphere_blocks(m.tag))
        sc.closure_defect[tup] = float(np.sqrt(max(proj.norm2(remainder), 0.0)))
        sc.residuals[tup] = float(np.linalg.norm(coeffs[len(basis) :]))
    return sc
