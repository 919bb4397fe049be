"""Acceptance criteria 1 to 11 at their stated tolerances and runtime budgets.

Each test prints one line ``criterion N: PASS|FAIL (seconds) details`` and then
asserts the same verdict.  Run ``python3 tests/test_acceptance.py`` for the
eleven lines without pytest.
"""

from __future__ import annotations

import itertools
import sys
import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from matreg.brackets import bracket, coordinate_table
from matreg.convergence import (
    counting_checks,
    fit_loglog,
    gamma_commutator_scaling,
    independence_check,
    remainder_scaling,
    run_convergence,
)
from matreg.gamma import family_defects, make_gamma_family, max_offdiagonal_anticommutator, printed_vs_solved
from matreg.linalg import four_commutator, k_commutator_bruteforce, make_spin_rep, spin_algebra_defect
from matreg.manifolds import angle_bracket_projection_table, get_manifold, polynomial_integral
from matreg.matrixify import build_matrix_set, leibniz_remainder, required_size
from matreg.poly import Polynomial, monomials_of_degree

SEED = 20240611


@dataclass
class Outcome:
    number: int
    budget: float
    checks: dict[str, bool] = field(default_factory=dict)
    details: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks[name] = bool(ok)
        if detail:
            self.details.append(f"{name}: {detail}")

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and self.seconds < self.budget

    def line(self) -> str:
        failed = [k for k, v in self.checks.items() if not v]
        if self.seconds >= self.budget:
            failed.append(f"runtime over {self.budget:g} s")
        verdict = "PASS" if self.passed else "FAIL"
        tail = f" failed=[{', '.join(failed)}]" if failed else ""
        return f"criterion {self.number}: {verdict} ({self.seconds:.1f} s){tail} | " + "; ".join(self.details)


def timed(number: int, budget: float):
    def wrap(func):
        def run() -> Outcome:
            out = Outcome(number, budget)
            start = time.perf_counter()
            func(out)
            out.seconds = time.perf_counter() - start
            return out

        run.__name__ = func.__name__
        return run

    return wrap


@timed(1, 5.0)
def criterion_1(out: Outcome) -> None:
    worst_comm = worst_cas = 0.0
    for n in range(2, 65):
        comm, cas = spin_algebra_defect(make_spin_rep(n))
        worst_comm, worst_cas = max(worst_comm, comm), max(worst_cas, cas)
    out.check("su(2) relations", worst_comm <= 1e-12, f"{worst_comm:.1e}")
    out.check("unit Casimir", worst_cas <= 1e-12, f"{worst_cas:.1e}")


@timed(2, 5.0)
def criterion_2(out: Outcome) -> None:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        f = [rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)) for _ in range(4)]
        brute = k_commutator_bruteforce(f)
        worst = max(worst, np.linalg.norm(four_commutator(*f) - brute) / np.linalg.norm(brute))
    out.check("anticommutator form", worst <= 1e-10, f"{worst:.1e}")


ORACLE_CASES = {
    "s2": [(2, "poisson")],
    "s3": [(3, "nambu")],
    "s4": [(4, "nambu")],
    "s2xs2": [(2, "double_poisson"), (4, "nambu")],
}


def displayed_identity_defect(tag: str, arity: int) -> float:
    """Largest coefficient gap between algebraic coordinate brackets and the closed forms."""
    n = get_manifold(tag).ambient_dim
    x = [Polynomial.coordinate(n, i) for i in range(n)]
    table = coordinate_table(tag, arity)
    worst = 0.0
    for idx in itertools.permutations(range(n), arity):
        got = bracket([x[i] for i in idx], table)
        if tag == "s2xs2":
            expected = _product_closed_form(idx, x)
        else:
            m = ({*range(n)} - set(idx)).pop()
            sign = -1.0 if tag == "s3" else 1.0
            eps = np.linalg.det(np.eye(n)[list(idx) + [m]])
            expected = x[m] * float(sign * round(eps))
        worst = max(worst, (got - expected).max_abs_coefficient())
    return worst


def _eps3(i: int, j: int, k: int) -> float:
    return float((i - j) * (j - k) * (k - i) / 2)


def _product_closed_form(idx, x) -> Polynomial:
    def two(a: int, b: int) -> Polynomial:
        if (a < 3) != (b < 3) or a == b:
            return Polynomial(6)
        off = 0 if a < 3 else 3
        k = 3 - (a - off) - (b - off)
        return x[k + off] * _eps3(a - off, b - off, k)

    if len(idx) == 2:
        return two(*idx)
    a, b, c, d = idx
    return two(a, b) * two(c, d) - two(a, c) * two(b, d) + two(a, d) * two(b, c)


@timed(3, 30.0)
def criterion_3(out: Outcome) -> None:
    for tag, cases in ORACLE_CASES.items():
        for arity, _ in cases:
            gap = displayed_identity_defect(tag, arity)
            out.check(f"{tag} arity {arity} identities", gap == 0.0, f"{gap:.0e}")
    for tag, cases in ORACLE_CASES.items():
        n = get_manifold(tag).ambient_dim
        x = [Polynomial.coordinate(n, i) for i in range(n)]
        tests = [Polynomial.monomial(e) for d in (1, 2) for e in monomials_of_degree(n, d)]
        tuples, kinds, exact = [], [], []
        for arity, kind in cases:
            table = coordinate_table(tag, arity)
            for tup in itertools.combinations(range(n), arity):
                args = [x[i] for i in tup]
                tuples.append(args)
                kinds.append(kind)
                exact.append([polynomial_integral(tag, bracket(args, table) * g) for g in tests])
        oracle = angle_bracket_projection_table(tag, tuples, tests, 64, kinds)
        gap = float(np.max(np.abs(oracle - np.array(exact))))
        out.check(f"{tag} quadrature oracle", gap <= 1e-8, f"{gap:.1e} over {len(tuples)}x{len(tests)}")


@timed(4, 60.0)
def criterion_4(out: Outcome) -> None:
    worst = {"four_bracket": 0.0, "listed_displays": 0.0, "g45": 0.0, "normalization": 0.0}
    scaled = []
    for n in range(2, 41):
        fam = make_gamma_family(n)
        d = family_defects(fam, all_orderings=n <= 8)
        for key in worst:
            worst[key] = max(worst[key], d[key])
        scaled.append(fam.d4 * np.sqrt(n * n - 1))
    spread = float(np.ptp(scaled) / abs(scaled[0]))
    out.check("4-bracket eigen-relation", worst["four_bracket"] <= 1e-10, f"{worst['four_bracket']:.1e}")
    out.check("listed 4-commutators", worst["listed_displays"] <= 1e-10, f"{worst['listed_displays']:.1e}")
    out.check("[G4,G5] = 2b^2 block", worst["g45"] <= 1e-12, f"{worst['g45']:.1e}")
    out.check("sum G^2 = 1", worst["normalization"] <= 1e-12, f"{worst['normalization']:.1e}")
    out.check("d4 sqrt(n^2-1) constant", spread <= 1e-8, f"{spread:.1e}")
    ref = printed_vs_solved(4)
    out.check(
        "printed coefficients reported",
        True,
        f"a_solved/a_printed={ref['a_ratio']:.5f}, printed residuals norm={ref['normalization_residual_printed']:.3f} "
        f"bracket={ref['four_bracket_residual_printed']:.3f}",
    )


@timed(5, 5.0)
def criterion_5(out: Outcome) -> None:
    two = max_offdiagonal_anticommutator(make_gamma_family(2))
    three = max_offdiagonal_anticommutator(make_gamma_family(3))
    out.check("n=2 anticommutators vanish", two <= 1e-12, f"{two:.1e}")
    out.check("n=3 anticommutator survives", three > 1e-3, f"{three:.3f}")


@timed(6, 120.0)
def criterion_6(out: Outcome) -> None:
    rep = run_convergence("s2", 4, [4, 8, 16, 32])
    devs = [d["max"] for d in rep.deviations]
    coord = max(d["coordinate_max"] for d in rep.deviations)
    slope = rep.slopes["max_deviation"]["slope"]
    out.check("coordinate sector", coord <= 1e-10, f"{coord:.1e}")
    out.check("strictly decreasing", all(b < a for a, b in zip(devs, devs[1:])), " ".join(f"{d:.3g}" for d in devs))
    out.check("slope <= -0.8", slope is not None and slope <= -0.8, f"{slope:.2f}")


@timed(7, 300.0)
def criterion_7(out: Outcome) -> None:
    rep = run_convergence("s2xs2", 2, [3, 5, 9], kind="nambu4")
    devs = [d["max"] for d in rep.deviations]
    cross = max(r["max_abs_constant"] for r in rep.cross_sector)
    out.check("dimensions 9, 25, 81", rep.dims == [9, 25, 81], str(rep.dims))
    out.check("deviations decreasing", all(b < a for a, b in zip(devs, devs[1:])), " ".join(f"{d:.2e}" for d in devs))
    out.check("cross-sector constants", cross <= 1e-12, f"{cross:.1e}")


@timed(8, 120.0)
def criterion_8(out: Outcome) -> None:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        f = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(5)]
        rem = leibniz_remainder(*f)
        worst = max(worst, float(np.max(np.abs(rem.direct - rem.closed_form))))
    out.check("six-term closed form", worst <= 1e-10, f"{worst:.1e}")
    sizes = [4, 8, 16, 32]
    s2 = remainder_scaling("s2", sizes)
    ratio = s2.slopes["ratio"]["slope"]
    out.check("S2 ratio slope <= -0.8", ratio is not None and ratio <= -0.8, f"{ratio:.2f}")
    s4 = remainder_scaling("s4", sizes)
    slope = s4.slopes["remainder"]["slope"]
    norms = " ".join(f"{r['remainder']:.3g}" for r in s4.rows)
    out.check("S4 remainder slope <= -1.5", slope is not None and slope <= -1.5, f"{slope:.2f} ({norms})")


@timed(9, 5.0)
def criterion_9(out: Outcome) -> None:
    rows = counting_checks(range(1, 13))
    bad = [(r["d"], r["cutoff"]) for r in rows if not r["match"]]
    exact_ints = all(isinstance(r["total"], int) and isinstance(r["closed_form"], int) for r in rows)
    out.check("per-degree and closed-form counts", not bad, f"{len(rows)} rows, mismatches {bad}")
    out.check("integer arithmetic", exact_ints)


@timed(10, 120.0)
def criterion_10(out: Outcome) -> None:
    for cutoff in (2, 3, 4):
        n = required_size("s4", cutoff)
        mset = build_matrix_set("s4", cutoff, n, extended=False)
        min_sv, rank = independence_check(mset)
        out.check(
            f"full rank cutoff {cutoff}",
            rank == mset.n_in_cutoff and min_sv > 1e-8,
            f"n={n} rank {rank}/{mset.n_in_cutoff} min sv {min_sv:.1e}",
        )
    under = build_matrix_set("s4", 4, 4, extended=False, allow_undersized=True)
    _, rank = independence_check(under)
    out.check("undersized run is deficient", rank < under.n_in_cutoff, f"n=4 rank {rank}/{under.n_in_cutoff}")


@timed(11, 60.0)
def criterion_11(out: Outcome) -> None:
    sizes = [3, 6, 12, 24]
    rep = run_convergence("s3", 2, sizes)
    coord = max(d["coordinate_max"] for d in rep.deviations)
    out.check("degree-one 3-brackets exact", coord <= 1e-10, f"{coord:.1e} at n={sizes}")
    scaling = gamma_commutator_scaling([4, 8, 16, 32])
    out.check("||[G_i,G_j]|| slope <= -0.8", scaling["slope"] <= -0.8, f"{scaling['slope']:.2f}")


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
]


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 12)])
def test_acceptance(criterion, capsys):
    outcome = criterion()
    with capsys.disabled():
        print("\n" + outcome.line())
    assert outcome.passed, outcome.line()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
