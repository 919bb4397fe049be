"""Convergence experiments: classical vs matrix structure constants.

Reports are plain dataclasses that serialize to deterministic JSON (sorted
keys, fixed array order) and to a flat CSV table with one row per size.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .brackets import classical_structure_constants, coordinate_table
from .gamma import make_gamma_family
from .harmonics import (
    closed_form_count,
    dld,
    harmonic_basis,
    harmonic_block_dimension,
    laplacian_kernel_rank_dimension,
)
from .linalg import commutator, hs_norm, kronecker, make_spin_rep
from .manifolds import get_manifold
from .matrixify import (
    KIND_ARITY,
    MatrixHarmonicSet,
    SymmetrizedSubstitution,
    bracket_coefficients,
    bracket_kind_for,
    build_matrix_set,
    check_capacity,
    default_arity,
    leibniz_remainder,
    normalize,
    required_size,
)

TINY = 1e-300


@dataclass(frozen=True)
class Thresholds:
    coordinate_tol: float = 1e-10
    monotone_tol: float = 1e-10
    slope: float = -0.8
    cross_sector_tol: float = 1e-12
    remainder_ratio_slope: float = -0.8
    s4_remainder_slope: float = -1.5
    gamma_commutator_slope: float = -0.8


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> dict:
    """Least-squares slope of log y against log x, with RMS residual."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("slope fits need at least three sizes")
    if np.any(y <= TINY) or not np.all(np.isfinite(y)):
        return {"slope": None, "residual": None}
    lx, ly = np.log(x), np.log(y)
    coef = np.polyfit(lx, ly, 1)
    res = ly - np.polyval(coef, lx)
    return {"slope": float(coef[0]), "residual": float(np.sqrt(np.mean(res**2)))}


def auto_sizes(manifold: str, cutoff: int) -> list[int]:
    """Doubling ladder starting at the smallest admissible size."""
    n0 = required_size(manifold, cutoff)
    return [n0, 2 * n0, 4 * n0]


def _clean(value):
    # strict JSON: no NaN or inf
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _degree_key(degree) -> str:
    return "x".join(str(d) for d in degree) if isinstance(degree, tuple) else str(degree)


# independence and counting


def singular_values(mset: MatrixHarmonicSet, in_cutoff: bool = True) -> np.ndarray:
    k = mset.n_in_cutoff if in_cutoff else len(mset)
    return np.linalg.svd(mset.stack()[:k] / math.sqrt(mset.dim), compute_uv=False)


def independence_check(mset: MatrixHarmonicSet, threshold: float = 1e-8) -> tuple[float, int]:
    """Smallest singular value of the in-cutoff T_A stack and its numerical rank."""
    sv = singular_values(mset)
    return float(sv.min()), int(np.sum(sv > threshold))


def counting_checks(cutoffs: Sequence[int], dims: Sequence[int] = (2, 3, 4)) -> list[dict]:
    """Enumerated harmonic counts against per-degree and closed-form sums.

    Each degree block is counted twice: by the number of exact kernel seeds
    and by the rank of the Laplacian on homogeneous polynomials.
    """
    rows = []
    for d in dims:
        for N in cutoffs:
            seeds = [harmonic_block_dimension(d + 1, l) for l in range(N)]
            ranks = [laplacian_kernel_rank_dimension(d + 1, l) for l in range(N)]
            formula = [dld(l, d) for l in range(N)]
            total = sum(seeds)
            row = {
                "d": d,
                "cutoff": N,
                "per_degree_enumerated": seeds,
                "per_degree_rank": ranks,
                "per_degree_formula": formula,
                "total": total,
                "closed_form": closed_form_count(d, N),
                "match": seeds == ranks == formula and total == closed_form_count(d, N),
            }
            if d == 4 and N >= 2:
                bound = (N * N - 1) ** 2
                row["below_square_bound"] = total < bound
                row["match"] = row["match"] and row["below_square_bound"]
            rows.append(row)
    return rows


# convergence


@dataclass
class ConvergenceReport:
    manifold: str
    cutoff: int
    kind: str
    sizes: list[int]
    dims: list[int] = field(default_factory=list)
    deviations: list[dict] = field(default_factory=list)
    closure_defects: list[dict] = field(default_factory=list)
    slopes: dict = field(default_factory=dict)
    counting: dict = field(default_factory=dict)
    independence: list[dict] = field(default_factory=list)
    cross_sector: list[dict] | None = None
    normalization: list[dict] = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _clean(asdict(self))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = [
            "size",
            "dimension",
            "max_deviation",
            "rms_deviation",
            "coordinate_deviation",
            "max_closure_defect",
            "min_singular_value",
            "rank",
            "cross_sector_max",
        ]
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(cols)
        for i, size in enumerate(self.sizes):
            dev = self.deviations[i]
            ind = self.independence[i]
            cross = self.cross_sector[i]["max_abs_constant"] if self.cross_sector else ""
            w.writerow(
                [
                    size,
                    self.dims[i],
                    repr(dev["max"]),
                    repr(dev["rms"]),
                    repr(dev["coordinate_max"]),
                    repr(self.closure_defects[i]["max"]),
                    repr(ind["min_singular_value"]),
                    ind["rank"],
                    repr(cross) if cross != "" else "",
                ]
            )
        return buf.getvalue()


def _coordinate_modes(basis) -> set[int]:
    return {i for i, md in enumerate(basis.modes) if md.total_degree == 1}


def cross_sector_tuples(basis) -> list[tuple[int, int]]:
    """(pure-x, pure-y) pairs of S^2 x S^2 modes, both non-constant."""
    xs = [i for i, md in enumerate(basis.modes) if md.degree[0] >= 1 and md.degree[1] == 0]
    ys = [i for i, md in enumerate(basis.modes) if md.degree[0] == 0 and md.degree[1] >= 1]
    return [(a, b) for a in xs for b in ys]


def run_convergence(
    manifold: str,
    cutoff: int,
    sizes: Sequence[int],
    kind: str | None = None,
    thresholds: Thresholds | None = None,
) -> ConvergenceReport:
    """Compare classical and matrix structure constants across a size ladder."""
    m = get_manifold(manifold)
    thresholds = thresholds or Thresholds()
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("need at least one size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"sizes must be strictly increasing, got {sizes}")
    for s in sizes:
        check_capacity(m.tag, cutoff, s)
    kind = kind or bracket_kind_for(m.tag, default_arity(m.tag))
    arity = KIND_ARITY[kind]
    basis = harmonic_basis(m.tag, cutoff)
    classical = classical_structure_constants(basis, coordinate_table(m.tag, arity))
    n_in = len(basis)
    c_in = {k: v for k, v in classical.entries.items() if k[-1] < n_in}
    tuples = list(itertools.combinations(range(n_in), arity))
    coord = _coordinate_modes(basis)
    coord_rows = [r for r, t in enumerate(tuples) if all(i in coord for i in t)]
    c_dense = np.zeros((len(tuples), n_in))
    row_of = {t: r for r, t in enumerate(tuples)}
    for key, val in c_in.items():
        c_dense[row_of[key[:-1]], key[-1]] = val

    report = ConvergenceReport(
        manifold=m.tag,
        cutoff=cutoff,
        kind=kind,
        sizes=sizes,
        thresholds=asdict(thresholds),
        counting=_report_counting(m.tag, cutoff, len(basis)),
    )
    for size in sizes:
        mset = build_matrix_set(m.tag, cutoff, size, arity=arity)
        report.dims.append(mset.dim)
        coeffs, defects = bracket_coefficients(mset, kind, tuples)
        f_dense = coeffs.real[:, :n_in]
        diff = np.abs(f_dense - c_dense)
        report.deviations.append(
            {
                "size": size,
                "max": float(diff.max(initial=0.0)),
                "rms": float(np.sqrt(np.mean(diff**2))) if diff.size else 0.0,
                "coordinate_max": float(diff[coord_rows].max(initial=0.0)) if coord_rows else 0.0,
                "max_imag_coefficient": float(np.abs(coeffs.imag).max(initial=0.0)),
            }
        )
        report.closure_defects.append({"size": size, "max": float(defects.max(initial=0.0))})
        min_sv, rank = independence_check(mset)
        report.independence.append(
            {"size": size, "modes": n_in, "min_singular_value": min_sv, "rank": rank, "degenerate": int(sum(mset.degenerate[:n_in]))}
        )
        report.normalization.append(_normalization_row(mset))
        if m.tag == "s2xs2":
            pairs = cross_sector_tuples(basis)
            cc, _ = bracket_coefficients(mset, "commutator2", pairs)
            report.cross_sector = report.cross_sector or []
            report.cross_sector.append({"size": size, "pairs": len(pairs), "max_abs_constant": float(np.abs(cc).max(initial=0.0))})

    maxdev = [d["max"] for d in report.deviations]
    if len(sizes) >= 3:
        report.slopes = {
            "max_deviation": fit_loglog(sizes, maxdev),
            "rms_deviation": fit_loglog(sizes, [d["rms"] for d in report.deviations]),
        }
    slope = report.slopes.get("max_deviation", {}).get("slope")
    # a ladder that is exact at every size has nothing left to converge
    exact = all(d <= thresholds.coordinate_tol for d in maxdev)
    report.checks = {
        "coordinate_exact": all(d["coordinate_max"] <= thresholds.coordinate_tol for d in report.deviations),
        "monotone": all(b <= a + thresholds.monotone_tol for a, b in zip(maxdev, maxdev[1:])),
        "strictly_decreasing": exact or all(b < a for a, b in zip(maxdev, maxdev[1:])),
        "exact": exact,
        "slope_ok": exact or (slope is not None and slope <= thresholds.slope),
    }
    if report.cross_sector is not None:
        report.checks["cross_sector_zero"] = all(
            r["max_abs_constant"] <= thresholds.cross_sector_tol for r in report.cross_sector
        )
    return report


def _report_counting(tag: str, cutoff: int, enumerated: int) -> dict:
    m = get_manifold(tag)
    expected = closed_form_count(2, cutoff) ** 2 if m.is_product else closed_form_count(m.dim, cutoff)
    return {"enumerated": enumerated, "closed_form": expected, "match": enumerated == expected}


def _normalization_row(mset: MatrixHarmonicSet) -> dict:
    """gamma_A of the first mode of each degree: the scale between raw substitution and unit HS norm."""
    seen: dict[str, float] = {}
    for md, g in zip(mset.modes[: mset.n_in_cutoff], mset.gammas):
        seen.setdefault(_degree_key(md.degree), float(g))
    return {"size": mset.size, "gamma_by_degree": seen}


# Leibniz remainder scaling


@dataclass
class RemainderScaling:
    manifold: str
    evaluated_on: str
    quintuple: list[str]
    sizes: list[int]
    rows: list[dict] = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _clean(asdict(self))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def _product_quintuple_matrices(size: int) -> tuple[list[str], list[np.ndarray]]:
    # the first five degree-(1,1) product modes: x1y1, x1y2, x1y3, x2y1, x2y2
    basis = harmonic_basis("s2", 2)
    spin = make_spin_rep(size)
    subst = SymmetrizedSubstitution(spin.J)
    t = [normalize(subst(md.poly))[0] for md in basis.modes[1:4]]
    pairs = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)]
    labels = [f"({basis[a + 1].label()},{basis[b + 1].label()})" for a, b in pairs]
    return labels, [kronecker(t[a], t[b]) for a, b in pairs]


def _s4_degree_one(size: int) -> tuple[list[str], list[np.ndarray]]:
    basis = harmonic_basis("s4", 2)
    fam = make_gamma_family(size)
    subst = SymmetrizedSubstitution(fam.gammas)
    mods = basis.modes[1:6]
    return [md.label() for md in mods], [normalize(subst(md.poly))[0] for md in mods]


def s4_default_order(size: int, tol: float = 1e-12) -> tuple[int, ...]:
    """First ordering (lexicographic) of the five Gamma modes with a nonzero remainder."""
    _, mats = _s4_degree_one(size)
    for perm in itertools.permutations(range(5)):
        if hs_norm(leibniz_remainder(*(mats[i] for i in perm)).direct) > tol:
            return perm
    raise ArithmeticError("every ordering of the Gamma modes has a vanishing remainder")


def remainder_scaling(
    manifold: str,
    sizes: Sequence[int],
    order: Sequence[int] | None = None,
    closed_form: bool = True,
) -> RemainderScaling:
    """Norms of the Leibniz remainder and its leading pair along a size ladder.

    s2 and s2xs2 use five degree-(1,1) modes on the Kronecker product of two
    fuzzy spheres; four degree-one modes of a single S^2 always repeat a
    coordinate, so their 4-brackets vanish identically.  s4 uses the five
    degree-one Gamma modes in the first ordering with a nonzero remainder.
    """
    tag = get_manifold(manifold).tag
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise ValueError("remainder scaling needs at least three sizes")
    if tag in ("s2", "s2xs2"):
        builder, evaluated = _product_quintuple_matrices, "s2xs2"
        order = tuple(order) if order is not None else tuple(range(5))
    elif tag == "s4":
        builder, evaluated = _s4_degree_one, "s4"
        order = tuple(order) if order is not None else s4_default_order(sizes[0])
    else:
        raise ValueError(f"remainder scaling is defined for s2, s2xs2 and s4, not {tag}")
    out = RemainderScaling(manifold=tag, evaluated_on=evaluated, quintuple=[], sizes=sizes)
    for size in sizes:
        labels, mats = builder(size)
        out.quintuple = [labels[i] for i in order]
        rem = leibniz_remainder(*(mats[i] for i in order))
        row = {
            "size": size,
            "dimension": mats[0].shape[0],
            "remainder": hs_norm(rem.direct),
            "leading": hs_norm(rem.leading[0]) + hs_norm(rem.leading[1]),
            "ratio": rem.ratio(),
        }
        if closed_form:
            row["closed_form_error"] = float(np.max(np.abs(rem.direct - rem.closed_form)))
        out.rows.append(row)
    out.slopes = {
        "remainder": fit_loglog(sizes, [r["remainder"] for r in out.rows]),
        "ratio": fit_loglog(sizes, [r["ratio"] for r in out.rows]),
    }
    return out


def remainder_slope_panel(sizes: Sequence[int]) -> list[dict]:
    """Remainder slopes for every ordering of the five S^4 degree-one modes."""
    per_size = [_s4_degree_one(n)[1] for n in sizes]
    panel = []
    for perm in itertools.permutations(range(5)):
        norms = [hs_norm(leibniz_remainder(*(m[i] for i in perm)).direct) for m in per_size]
        panel.append({"order": list(perm), "norms": norms, **fit_loglog(sizes, norms)})
    return panel


def gamma_commutator_scaling(sizes: Sequence[int]) -> dict:
    """Largest ||[Gamma_i, Gamma_j]|| (i < j <= 3) per spin-block size, with log-log slope."""
    norms = []
    for n in sizes:
        g = make_gamma_family(n, branch=-1).gammas
        norms.append(max(hs_norm(commutator(g[i], g[j])) for i, j in itertools.combinations(range(3), 2)))
    return {"sizes": list(sizes), "norms": norms, **fit_loglog(sizes, norms)}
