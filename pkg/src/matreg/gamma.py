"""The five 2n x 2n Gamma matrices used for fuzzy S^4 and S^3.

    Gamma_i = a [[0, i S_i], [-i S_i, 0]]   (i = 1, 2, 3)
    Gamma_4 = b [[0, 1], [1, 0]]
    Gamma_5 = b [[1, 0], [0, -1]]

The coefficients come from two requirements: sum_i Gamma_i^2 = 1, and a
common eigenvalue d4 in -1/2 [Gamma_i, Gamma_j, Gamma_k, Gamma_l] =
d4 eps_ijklm Gamma_m.  With c = s(s+1) these read

    a^2 c + 2 b^2 = 1,    12 a b^2 = 4 a^3 c = 2 d4.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import fsolve

from .linalg import (
    DimensionError,
    SpinRep,
    anticommutator,
    commutator,
    four_commutator,
    hermiticity_defect,
    levi_civita,
    make_spin_rep,
)


@dataclass(frozen=True)
class GammaFamily:
    n: int
    a: float
    b: float
    d4: float
    gammas: tuple[np.ndarray, ...]
    branch: int = 1
    printed: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def casimir(self) -> float:
        return (self.n * self.n - 1) / 4


def printed_coefficients(n: int) -> dict[str, float]:
    """The closed forms as printed alongside the construction (positive branch)."""
    a = np.sqrt(6.0 / (5.0 * (n * n - 1)))
    return {"a": float(a), "b": float(1 / np.sqrt(5.0)), "d4": float(6.0 / 5.0 * a)}


def constraint_residuals(a: float, b: float, d4: float, casimir: float) -> np.ndarray:
    return np.array(
        [
            a * a * casimir + 2 * b * b - 1.0,
            12 * a * b * b - 4 * a**3 * casimir,
            4 * a**3 * casimir - 2 * d4,
        ]
    )


def solve_coefficients(n: int) -> tuple[float, float, float]:
    """Positive-branch root of the constraint system, seeded at the printed values."""
    if n < 2:
        raise DimensionError("Gamma family needs n >= 2 (s(s+1) vanishes at n = 1)")
    casimir = (n * n - 1) / 4
    guess = printed_coefficients(n)
    sol, _, _, msg = fsolve(
        lambda v: constraint_residuals(v[0], v[1], v[2], casimir),
        [guess["a"], guess["b"], guess["d4"]],
        full_output=True,
        xtol=1e-14,
    )
    a, b, d4 = (float(x) for x in sol)
    if np.max(np.abs(constraint_residuals(a, b, d4, casimir))) > 1e-13:
        raise ArithmeticError(f"constraint solve failed at n={n}: {msg}")
    if min(a, b, d4) <= 0:
        raise ArithmeticError(f"constraint solve left the positive branch at n={n}: {(a, b, d4)}")
    return a, b, d4


def build_gammas(spin: SpinRep, a: float, b: float) -> tuple[np.ndarray, ...]:
    n = spin.n
    zero = np.zeros((n, n), dtype=complex)
    one = np.eye(n, dtype=complex)
    gam = [a * np.block([[zero, 1j * s], [-1j * s, zero]]) for s in spin.S]
    gam.append(b * np.block([[zero, one], [one, zero]]))
    gam.append(b * np.block([[one, zero], [zero, -one]]))
    return tuple(gam)


def make_gamma_family(n: int, branch: int = 1) -> GammaFamily:
    """Gamma family for spin-block size ``n``; ``branch=-1`` flips a, b and d4."""
    if int(n) != n or n < 2:
        raise DimensionError(f"Gamma family needs an integer n >= 2, got {n!r}")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    n = int(n)
    a, b, d4 = solve_coefficients(n)
    a, b, d4 = branch * a, branch * b, branch * d4
    spin = make_spin_rep(n)
    printed = printed_coefficients(n)
    printed["a_ratio_solved_over_printed"] = abs(a) / printed["a"]
    printed["d4_ratio_solved_over_printed"] = abs(d4) / printed["d4"]
    return GammaFamily(n=n, a=a, b=b, d4=d4, gammas=build_gammas(spin, a, b), branch=branch, printed=printed)


def g45_block(n: int) -> np.ndarray:
    """[[0, -1], [1, 0]] in 2n x 2n block form."""
    zero = np.zeros((n, n))
    one = np.eye(n)
    return np.block([[zero, -one], [one, zero]]).astype(complex)


def listed_four_commutators(fam: GammaFamily) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """The five displayed identities: (indices, expected value), 0-based."""
    g = fam.gammas
    c = fam.casimir
    a, b = fam.a, fam.b
    return [
        ((0, 1, 2, 3), -4 * a**3 * c * g[4]),
        ((0, 1, 2, 4), 4 * a**3 * c * g[3]),
        ((0, 1, 3, 4), -12 * a * b * b * g[2]),
        ((0, 2, 3, 4), 12 * a * b * b * g[1]),
        ((1, 2, 3, 4), -12 * a * b * b * g[0]),
    ]


def family_defects(fam: GammaFamily, all_orderings: bool = False) -> dict[str, float]:
    """Max-abs entrywise errors of every family invariant."""
    g = fam.gammas
    dim = fam.dim
    out: dict[str, float] = {}
    out["normalization"] = float(np.max(np.abs(sum(x @ x for x in g) - np.eye(dim))))
    out["hermiticity"] = max(hermiticity_defect(x) for x in g)
    worst = 0.0
    tuples = itertools.permutations(range(5), 4) if all_orderings else itertools.combinations(range(5), 4)
    for idx in tuples:
        m = next(k for k in range(5) if k not in idx)
        lhs = -0.5 * four_commutator(*(g[i] for i in idx))
        rhs = fam.d4 * levi_civita(list(idx) + [m]) * g[m]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    out["four_bracket"] = worst
    out["listed_displays"] = max(
        float(np.max(np.abs(four_commutator(*(g[i] for i in idx)) - expected)))
        for idx, expected in listed_four_commutators(fam)
    )
    out["g45"] = float(np.max(np.abs(commutator(g[3], g[4]) - 2 * fam.b**2 * g45_block(fam.n))))
    out["constraints"] = float(np.max(np.abs(constraint_residuals(fam.a, fam.b, fam.d4, fam.casimir))))
    return out


def max_offdiagonal_anticommutator(fam: GammaFamily) -> float:
    g = fam.gammas
    return max(
        float(np.max(np.abs(anticommutator(g[i], g[j])))) for i, j in itertools.combinations(range(5), 2)
    )


def printed_vs_solved(n: int) -> dict[str, float]:
    """Compare printed and constraint-solved coefficients and their matrix residuals."""
    fam = make_gamma_family(n)
    printed = printed_coefficients(n)
    spin = make_spin_rep(n)
    gp = build_gammas(spin, printed["a"], printed["b"])
    norm_printed = float(np.max(np.abs(sum(x @ x for x in gp) - np.eye(2 * n))))
    bracket_printed = float(
        np.max(np.abs(-0.5 * four_commutator(gp[0], gp[1], gp[2], gp[3]) - printed["d4"] * gp[4]))
    )
    return {
        "n": n,
        "a_solved": fam.a,
        "a_printed": printed["a"],
        "d4_solved": fam.d4,
        "d4_printed": printed["d4"],
        "a_ratio": fam.a / printed["a"],
        "normalization_residual_printed": norm_printed,
        "four_bracket_residual_printed": bracket_printed,
        "normalization_residual_solved": family_defects(fam)["normalization"],
        "four_bracket_residual_solved": family_defects(fam)["four_bracket"],
    }
