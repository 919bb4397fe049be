"""Matrix regularization of harmonic modes and quantum brackets.

Every mode polynomial is turned into a matrix by symmetrized substitution of
matrix coordinates (spin matrices J_i for S^2, Gamma matrices for S^4 and
S^3) and then scaled to unit normalized Hilbert-Schmidt norm.  Each quantum
bracket carries a per-manifold constant fixed so that coordinate brackets
are reproduced exactly at every matrix size.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .brackets import StructureConstants, attainable_degree
from .gamma import GammaFamily, make_gamma_family
from .harmonics import HarmonicBasis, HarmonicMode, harmonic_basis, mode_counts
from .linalg import (
    DimensionError,
    SpinRep,
    commutator,
    hs_inner,
    hs_norm,
    k_commutator,
    kronecker,
    make_spin_rep,
)
from .manifolds import get_manifold
from .poly import Exponent, Polynomial

DEGENERATE_TOL = 1e-10
BRACKET_KINDS = ("commutator2", "nambu4", "nambu3_gamma5")


class CapacityError(ValueError):
    """Matrix size too small for the requested cutoff."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


class DegenerateModeWarning(UserWarning):
    pass


# symmetrized substitution


class SymmetrizedSubstitution:
    """Ordering-averaged monomials in a fixed list of matrices.

    Sym(alpha) averages the product over all distinct orderings of the
    factors.  It obeys Sym(alpha) = sum_i (alpha_i/|alpha|) X_i Sym(alpha - e_i),
    which is memoized here.
    """

    def __init__(self, mats: Sequence[np.ndarray]):
        self.mats = [np.asarray(m, dtype=complex) for m in mats]
        self.dim = self.mats[0].shape[0]
        self._cache: dict[Exponent, np.ndarray] = {}

    def monomial(self, exp: Exponent) -> np.ndarray:
        exp = tuple(exp)
        hit = self._cache.get(exp)
        if hit is not None:
            return hit
        total = sum(exp)
        if total == 0:
            out = np.eye(self.dim, dtype=complex)
        else:
            out = np.zeros((self.dim, self.dim), dtype=complex)
            for i, k in enumerate(exp):
                if k:
                    lower = exp[:i] + (k - 1,) + exp[i + 1 :]
                    out += (k / total) * (self.mats[i] @ self.monomial(lower))
        self._cache[exp] = out
        return out

    def __call__(self, poly: Polynomial) -> np.ndarray:
        if poly.ambient_dim != len(self.mats):
            raise DimensionError(f"polynomial has {poly.ambient_dim} variables, substitution has {len(self.mats)}")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for e, c in poly.terms.items():
            out += c * self.monomial(e)
        return out


def normalize(mat: np.ndarray, label: str = "") -> tuple[np.ndarray, float, bool]:
    """Scale to unit normalized HS norm; returns (matrix, gamma, degenerate)."""
    norm = hs_norm(mat)
    if norm < DEGENERATE_TOL:
        warnings.warn(f"mode {label} maps to a vanishing matrix (linearly dependent)", DegenerateModeWarning, stacklevel=3)
        return np.zeros_like(mat), 0.0, True
    return mat / norm, 1.0 / norm, False


def _check_manifold(mode: HarmonicMode, tags: tuple[str, ...]) -> None:
    if mode.manifold not in tags:
        raise ValueError(f"mode lives on {mode.manifold}, expected one of {tags}")


def matrixify_s2(mode: HarmonicMode, spin: SpinRep, subst: SymmetrizedSubstitution | None = None) -> np.ndarray:
    """Fuzzy-sphere matrix of an S^2 mode (J_i substituted for x_i, unit HS norm)."""
    return _matrixify_s2(mode, spin, subst)[0]


def _matrixify_s2(mode: HarmonicMode, spin: SpinRep, subst: SymmetrizedSubstitution | None = None):
    _check_manifold(mode, ("s2",))
    if mode.degree >= spin.n:
        warnings.warn(
            f"degree {mode.degree} >= n = {spin.n}: matrix is dependent on lower modes",
            DegenerateModeWarning,
            stacklevel=3,
        )
    subst = subst or SymmetrizedSubstitution(spin.J)
    return normalize(subst(mode.poly), mode.label())


def matrixify_product(mode: HarmonicMode, spin: SpinRep, subst: SymmetrizedSubstitution | None = None) -> np.ndarray:
    """T_A1 (x) T_A2 for an S^2 x S^2 product mode."""
    return _matrixify_product(mode, spin, subst)[0]


def _matrixify_product(mode: HarmonicMode, spin: SpinRep, subst: SymmetrizedSubstitution | None = None):
    _check_manifold(mode, ("s2xs2",))
    subst = subst or SymmetrizedSubstitution(spin.J)
    fa, ga, da = _matrixify_s2(mode.factors[0], spin, subst)
    fb, gb, db = _matrixify_s2(mode.factors[1], spin, subst)
    return kronecker(fa, fb), ga * gb, da or db


def matrixify_s4(mode: HarmonicMode, family: GammaFamily, subst: SymmetrizedSubstitution | None = None) -> np.ndarray:
    """Symmetrized substitution of all five Gammas, unit HS norm."""
    _check_manifold(mode, ("s4",))
    subst = subst or SymmetrizedSubstitution(family.gammas)
    return normalize(subst(mode.poly), mode.label())[0]


def matrixify_s3(mode: HarmonicMode, family: GammaFamily, subst: SymmetrizedSubstitution | None = None) -> np.ndarray:
    """Symmetrized substitution of Gamma_1..Gamma_4, unit HS norm."""
    _check_manifold(mode, ("s3",))
    subst = subst or SymmetrizedSubstitution(family.gammas[:4])
    return normalize(subst(mode.poly), mode.label())[0]


# capacity


def required_size(manifold: str, cutoff: int) -> int:
    """Smallest admissible size parameter for a cutoff.

    s2: matrix dimension N >= cutoff.  s2xs2: factor dimension n >= cutoff.
    s4/s3: spin block n with 2n >= cumulative mode count.
    """
    m = get_manifold(manifold)
    if m.tag in ("s2", "s2xs2"):
        return max(cutoff, 2)
    count = mode_counts(m.dim, cutoff)[1]
    return max(2, math.ceil(count / 2))


def matrix_dimension(manifold: str, size: int) -> int:
    tag = get_manifold(manifold).tag
    return {"s2": size, "s2xs2": size * size, "s4": 2 * size, "s3": 2 * size}[tag]


def check_capacity(manifold: str, cutoff: int, size: int) -> None:
    need = required_size(manifold, cutoff)
    if size < need:
        raise CapacityError(f"{manifold} cutoff {cutoff} needs size >= {need}, got {size}", need)


def _target_cutoff(manifold: str, cutoff: int, size: int, arity: int) -> int:
    """Largest basis cutoff worth projecting onto at this size."""
    m = get_manifold(manifold)
    top = attainable_degree(m.tag, arity, cutoff - 1) + 1
    if m.tag in ("s2", "s2xs2"):
        return max(cutoff, min(top, size))
    best = cutoff
    for c in range(cutoff + 1, top + 1):
        if mode_counts(m.dim, c)[1] > 2 * size:
            break
        best = c
    return best


# matrix sets


def quantization_constants(manifold: str, size: int, family: GammaFamily | None = None) -> dict[str, float]:
    """Raw quantization constant and full prefactor for each bracket kind."""
    m = get_manifold(manifold)
    vol = m.volume
    if m.tag == "s2":
        hbar = 2.0 / math.sqrt(size * size - 1)
        return {"hbar": hbar, "commutator2": 1.0 / (hbar * math.sqrt(vol))}
    if m.tag == "s2xs2":
        hbar = 2.0 / math.sqrt(size * size - 1)
        return {
            "hbar": hbar,
            "q4": hbar * hbar,
            "commutator2": 1.0 / (hbar * vol ** (1 / 2)),
            "nambu4": -1.0 / (2 * hbar * hbar) * vol ** (-3 / 2),
        }
    if family is None:
        raise ValueError(f"{m.tag} needs a Gamma family")
    if m.tag == "s4":
        return {"hbar": family.d4, "q4": family.d4, "nambu4": -1.0 / (2 * family.d4) * vol ** (-3 / 2)}
    # squared radius of the Gamma_1..Gamma_4 sphere under the normalized HS product
    r2 = sum(hs_inner(g, g).real for g in family.gammas[:4])
    kappa = r2 / (2 * abs(family.d4) * vol)
    return {"hbar": abs(family.d4), "kappa": kappa, "radius2": r2, "nambu3_gamma5": kappa}


@dataclass(frozen=True)
class MatrixHarmonicSet:
    """Unit-HS-norm matrix harmonics of one manifold at one size."""

    manifold: str
    cutoff: int
    size: int
    dim: int
    modes: tuple[HarmonicMode, ...]
    matrices: np.ndarray
    gammas: np.ndarray
    degenerate: tuple[bool, ...]
    n_in_cutoff: int
    target_cutoff: int
    constants: dict = field(default_factory=dict)
    family: GammaFamily | None = field(default=None, repr=False)
    spin: SpinRep | None = field(default=None, repr=False)

    @property
    def hbar(self) -> float:
        return self.constants["hbar"]

    @property
    def basis_id(self) -> str:
        return f"{self.manifold}:cutoff={self.cutoff}"

    def __len__(self) -> int:
        return len(self.modes)

    def stack(self) -> np.ndarray:
        """Rows are the row-major vectorized matrices."""
        return self.matrices.reshape(len(self.modes), -1)

    def gram(self, in_cutoff: bool = True) -> np.ndarray:
        k = self.n_in_cutoff if in_cutoff else len(self.modes)
        v = self.stack()[:k]
        return (v.conj() @ v.T) / self.dim

    def to_json(self, in_cutoff: bool = True) -> dict:
        k = self.n_in_cutoff if in_cutoff else len(self.modes)
        gamma_coeffs = None
        if self.family is not None:
            gamma_coeffs = {"a": self.family.a, "b": self.family.b, "d4": self.family.d4, "n": self.family.n}
        return {
            "manifold": self.manifold,
            "cutoff": self.cutoff,
            "size": self.size,
            "dimension": self.dim,
            "hbar": self.hbar,
            "constants": self.constants,
            "gamma_coeffs": gamma_coeffs,
            "matrices": [
                {
                    "mode": self.modes[i].label(),
                    "degree": list(self.modes[i].degree)
                    if isinstance(self.modes[i].degree, tuple)
                    else self.modes[i].degree,
                    "gamma": float(self.gammas[i]),
                    "degenerate": self.degenerate[i],
                    "real": self.matrices[i].real.ravel().tolist(),
                    "imag": self.matrices[i].imag.ravel().tolist(),
                }
                for i in range(k)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def default_arity(manifold: str) -> int:
    return get_manifold(manifold).dim


def build_matrix_set(
    manifold: str,
    cutoff: int,
    size: int,
    arity: int | None = None,
    extended: bool = True,
    allow_undersized: bool = False,
) -> MatrixHarmonicSet:
    """Matrix harmonics for ``cutoff`` at ``size``.

    ``size`` is the matrix dimension N for s2, the factor dimension n for
    s2xs2 (matrices n^2 x n^2) and the spin block n for s4/s3 (2n x 2n).
    With ``extended`` the set also holds higher modes used as projection
    targets; the first ``n_in_cutoff`` entries are always the cutoff basis.
    """
    m = get_manifold(manifold)
    if int(size) != size or size < 1:
        raise DimensionError(f"size must be a positive integer, got {size!r}")
    size = int(size)
    if size < 2:
        raise DimensionError("matrix regularization needs size >= 2")
    if not allow_undersized:
        check_capacity(m.tag, cutoff, size)
    arity = arity or default_arity(m.tag)
    target = _target_cutoff(m.tag, cutoff, size, arity) if extended else cutoff
    basis = harmonic_basis(m.tag, target)
    n_in = len(harmonic_basis(m.tag, cutoff))
    family = spin = None
    # degenerate modes are recorded in the set's flags instead of warned one by one
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateModeWarning)
        if m.tag in ("s2", "s2xs2"):
            spin = make_spin_rep(size)
            subst = SymmetrizedSubstitution(spin.J)
            one = _matrixify_s2 if m.tag == "s2" else _matrixify_product
            triples = [one(md, spin, subst) for md in basis.modes]
        else:
            family = make_gamma_family(size, branch=1 if m.tag == "s4" else -1)
            gam = family.gammas if m.tag == "s4" else family.gammas[:4]
            subst = SymmetrizedSubstitution(gam)
            triples = [normalize(subst(md.poly), md.label()) for md in basis.modes]
    mats = np.array([t[0] for t in triples])
    return MatrixHarmonicSet(
        manifold=m.tag,
        cutoff=cutoff,
        size=size,
        dim=matrix_dimension(m.tag, size),
        modes=basis.modes,
        matrices=mats,
        gammas=np.array([t[1] for t in triples]),
        degenerate=tuple(bool(t[2]) for t in triples),
        n_in_cutoff=n_in,
        target_cutoff=target,
        constants=quantization_constants(m.tag, size, family),
        family=family,
        spin=spin,
    )


# quantum brackets


def quantum_bracket(kind: str, args: Sequence[np.ndarray], context: MatrixHarmonicSet) -> np.ndarray:
    """Quantum bracket with the manifold's prefactor.

    commutator2: c (-i)[A, B];  nambu4: c [A, B, C, D];
    nambu3_gamma5: c [A, B, C, Gamma_5].
    """
    if kind not in BRACKET_KINDS:
        raise ValueError(f"unknown bracket kind {kind!r}; expected one of {BRACKET_KINDS}")
    scale = context.constants.get(kind)
    if scale is None:
        raise ValueError(f"bracket {kind} is not defined on {context.manifold}")
    args = [np.asarray(a) for a in args]
    for a in args:
        if a.shape != (context.dim, context.dim):
            raise DimensionError(f"expected {context.dim}x{context.dim} matrices, got {a.shape}")
    if kind == "commutator2":
        if len(args) != 2:
            raise ValueError("commutator2 takes two matrices")
        return scale * (-1j) * commutator(*args)
    if kind == "nambu4":
        if len(args) != 4:
            raise ValueError("nambu4 takes four matrices")
        return scale * k_commutator(args)
    if len(args) != 3:
        raise ValueError("nambu3_gamma5 takes three matrices")
    if context.family is None:
        raise ValueError("nambu3_gamma5 needs a Gamma family context")
    return scale * k_commutator(args + [context.family.gammas[4]])


def bracket_kind_for(manifold: str, arity: int) -> str:
    tag = get_manifold(manifold).tag
    if arity == 2:
        return "commutator2"
    if arity == 4:
        return "nambu4"
    if arity == 3 and tag == "s3":
        return "nambu3_gamma5"
    raise ValueError(f"no quantum {arity}-bracket on {tag}")


# Leibniz remainder


@dataclass(frozen=True)
class LeibnizRemainder:
    direct: np.ndarray
    closed_form: np.ndarray
    leading: tuple[np.ndarray, np.ndarray]

    def ratio(self) -> float:
        lead = hs_norm(self.leading[0]) + hs_norm(self.leading[1])
        return hs_norm(self.direct) / lead if lead > 0 else float("nan")


def remainder_closed_form(f1, f2, f3, f4, f5) -> np.ndarray:
    """Six-term form of the Leibniz remainder; every term holds three commutators."""
    c = commutator
    return (
        c(f1, f4) @ c(f5, c(f2, f3))
        + c(f3, f4) @ c(f5, c(f1, f2))
        - c(f2, f4) @ c(f5, c(f1, f3))
        + c(c(f1, f2), f4) @ c(f3, f5)
        - c(c(f1, f3), f4) @ c(f2, f5)
        + c(c(f2, f3), f4) @ c(f1, f5)
    )


def leibniz_remainder(f1, f2, f3, f4, f5) -> LeibnizRemainder:
    """O = [F1,F2,F3,F4 F5] - [F1,F2,F3,F4] F5 - F4 [F1,F2,F3,F5]."""
    mats = [np.asarray(f, dtype=complex) for f in (f1, f2, f3, f4, f5)]
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1] or any(m.shape != shape for m in mats):
        raise DimensionError("Leibniz remainder needs five square matrices of equal size")
    f1, f2, f3, f4, f5 = mats
    lead1 = k_commutator([f1, f2, f3, f4]) @ f5
    lead2 = f4 @ k_commutator([f1, f2, f3, f5])
    direct = k_commutator([f1, f2, f3, f4 @ f5]) - lead1 - lead2
    return LeibnizRemainder(direct, remainder_closed_form(f1, f2, f3, f4, f5), (lead1, lead2))


# structure constants


KIND_ARITY = {"commutator2": 2, "nambu4": 4, "nambu3_gamma5": 3}


def _tuple_batches(n: int, arity: int, batch: int):
    it = itertools.combinations(range(n), arity)
    while True:
        chunk = list(itertools.islice(it, batch))
        if not chunk:
            return
        yield chunk


class _Projection:
    """Least-squares projection onto the non-degenerate modes of a set."""

    def __init__(self, mset: MatrixHarmonicSet):
        self.live = [i for i, dg in enumerate(mset.degenerate) if not dg]
        self.v = mset.stack()[self.live]
        self.dim = mset.dim
        gram = (self.v.conj() @ self.v.T) / self.dim
        self.orthonormal = bool(np.allclose(gram, np.eye(len(self.live)), atol=1e-12, rtol=0))
        self.chol = None if self.orthonormal else np.linalg.cholesky(gram)

    def __call__(self, brackets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rows of vectorized matrices -> (coefficients on live modes, residual HS norms)."""
        rhs = (brackets @ self.v.conj().T) / self.dim
        if self.orthonormal:
            coeffs = rhs
        else:
            coeffs = np.linalg.solve(self.chol.conj().T, np.linalg.solve(self.chol, rhs.T)).T
        fitted = coeffs @ self.v
        defects = np.sqrt(np.sum(np.abs(brackets - fitted) ** 2, axis=1) / self.dim)
        return coeffs, defects


def bracket_coefficients(
    mset: MatrixHarmonicSet, kind: str, tuples: Sequence[tuple[int, ...]]
) -> tuple[np.ndarray, np.ndarray]:
    """Dense coefficients (len(tuples), len(mset)) and closure defects, in the given argument order."""
    proj = _Projection(mset)
    mats = mset.matrices
    brs = np.array([quantum_bracket(kind, [mats[i] for i in tup], mset) for tup in tuples]).reshape(len(tuples), -1)
    coeffs, defects = proj(brs) if len(tuples) else (np.zeros((0, len(proj.live))), np.zeros(0))
    dense = np.zeros((len(tuples), len(mset)), dtype=complex)
    dense[:, proj.live] = coeffs
    return dense, defects


def matrix_structure_constants(
    mset: MatrixHarmonicSet,
    kind: str | None = None,
    tuples: Sequence[tuple[int, ...]] | None = None,
    batch: int = 256,
) -> StructureConstants:
    """Least-squares expansion of quantum brackets in the matrix harmonics.

    Tuples are stored sorted; a tuple with a repeated mode gives a zero row.
    """
    kind = kind or bracket_kind_for(mset.manifold, default_arity(mset.manifold))
    if kind not in KIND_ARITY:
        raise ValueError(f"unknown bracket kind {kind!r}; expected one of {BRACKET_KINDS}")
    d = KIND_ARITY[kind]
    proj = _Projection(mset)
    sc = StructureConstants(
        arity=d,
        basis_id=mset.basis_id,
        kind=f"matrix:{kind}",
        n_in_cutoff=mset.n_in_cutoff,
        target_labels=[md.label() for md in mset.modes],
        meta={
            "size": mset.size,
            "dimension": mset.dim,
            "target_cutoff": mset.target_cutoff,
            "constants": mset.constants,
            "orthonormal_targets": proj.orthonormal,
        },
    )
    if tuples is None:
        batches = _tuple_batches(mset.n_in_cutoff, d, batch)
    else:
        tuples = [tuple(sorted(t)) for t in tuples]
        batches = (tuples[i : i + batch] for i in range(0, len(tuples), batch))
    mats = mset.matrices
    max_imag = 0.0
    for chunk in batches:
        distinct = [tup for tup in chunk if len(set(tup)) == d]
        for tup in chunk:
            if len(set(tup)) != d:
                sc.closure_defect[tup] = 0.0
                sc.residuals[tup] = 0.0
        if not distinct:
            continue
        brs = np.array([quantum_bracket(kind, [mats[i] for i in tup], mset) for tup in distinct])
        coeffs, defects = proj(brs.reshape(len(distinct), -1))
        max_imag = max(max_imag, float(np.max(np.abs(coeffs.imag), initial=0.0)))
        for tup, row, dfc in zip(distinct, coeffs.real, defects):
            sc.closure_defect[tup] = float(dfc)
            out_norm = 0.0
            for c, val in zip(proj.live, row):
                if abs(val) > 1e-12:
                    sc.entries[tup + (c,)] = float(val)
                if c >= mset.n_in_cutoff:
                    out_norm += val * val
            sc.residuals[tup] = float(math.sqrt(out_norm))
    sc.meta["max_imag_coefficient"] = max_imag
    return sc
