"""Dense complex matrix algebra used by every regularization map.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. All functions are
pure; nothing here caches or mutates its inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LEVI_CIVITA_3 = np.zeros((3, 3, 3))
for _i, _j, _k in itertools.permutations(range(3)):
    LEVI_CIVITA_3[_i, _j, _k] = np.linalg.det(np.eye(3)[[_i, _j, _k]])


class DimensionError(ValueError):
    """Raised when matrix shapes are incompatible or a size is invalid."""


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation of ``range(len(perm))`` (cycle counting)."""
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def levi_civita(indices: Sequence[int]) -> int:
    """Totally antisymmetric symbol on ``len(indices)`` labels 0..k-1."""
    if len(set(indices)) != len(indices):
        return 0
    if sorted(indices) != list(range(len(indices))):
        raise ValueError(f"indices {indices} are not a permutation of 0..{len(indices) - 1}")
    return permutation_sign(indices)


@dataclass(frozen=True)
class SpinRep:
    """Spin-s irreducible representation of su(2) in dimension n = 2s + 1.

    ``S`` holds the three spin matrices with ``[S_i, S_j] = i eps_ijk S_k``,
    ``J`` the rescaled copies ``S_i / sqrt(s(s+1))`` whose squares sum to the
    identity (``J`` is all-zero for ``n == 1``).
    """

    n: int
    S: tuple[np.ndarray, np.ndarray, np.ndarray]
    J: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def s(self) -> float:
        return (self.n - 1) / 2

    @property
    def casimir(self) -> float:
        return (self.n * self.n - 1) / 4

    @property
    def hbar(self) -> float:
        """Coefficient in ``-i[J_i, J_j] = hbar eps_ijk J_k``."""
        if self.n < 2:
            return 0.0
        return 2.0 / np.sqrt(self.n * self.n - 1.0)


def make_spin_rep(n: int) -> SpinRep:
    """Spin matrices of dimension ``n`` with S_3 = diag(s, s-1, ..., -s)."""
    if int(n) != n or n < 1:
        raise DimensionError(f"spin representation dimension must be a positive integer, got {n!r}")
    n = int(n)
    s = (n - 1) / 2
    m = s - np.arange(n)
    sz = np.diag(m).astype(complex)
    # S_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; row k-1 holds m = s-k+1.
    sp = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        sp[k - 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / 2j
    S = (sx, sy, sz)
    if n == 1:
        J = tuple(np.zeros((1, 1), dtype=complex) for _ in range(3))
    else:
        scale = 1.0 / np.sqrt(s * (s + 1))
        J = tuple(scale * x for x in S)
    return SpinRep(n=n, S=S, J=J)  # type: ignore[arg-type]


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor carries the slow index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def _check_square_same(matrices: Sequence[np.ndarray]) -> int:
    dim = None
    for m in matrices:
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected square matrices, got shape {m.shape}")
        if dim is None:
            dim = m.shape[0]
        elif m.shape[0] != dim:
            raise DimensionError(f"dimension mismatch: {dim} vs {m.shape[0]}")
    assert dim is not None
    return dim


def k_commutator_bruteforce(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Sum over all k! orderings of sign(sigma) F_sigma(1) ... F_sigma(k)."""
    matrices = [np.asarray(m, dtype=complex) for m in matrices]
    if len(matrices) < 2:
        raise ValueError("k-commutator needs at least two matrices")
    dim = _check_square_same(matrices)
    out = np.zeros((dim, dim), dtype=complex)
    for perm in itertools.permutations(range(len(matrices))):
        prod = matrices[perm[0]]
        for i in perm[1:]:
            prod = prod @ matrices[i]
        out += permutation_sign(perm) * prod
    return out


def four_commutator(f1: np.ndarray, f2: np.ndarray, f3: np.ndarray, f4: np.ndarray) -> np.ndarray:
    """4-commutator through its six-anticommutator resolution."""
    c12, c34 = commutator(f1, f2), commutator(f3, f4)
    c13, c24 = commutator(f1, f3), commutator(f2, f4)
    c14, c23 = commutator(f1, f4), commutator(f2, f3)
    return anticommutator(c12, c34) - anticommutator(c13, c24) + anticommutator(c14, c23)


def k_commutator(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Totally antisymmetrized product of k square matrices.

    k = 2 and k = 4 use closed resolutions; other k fall back to the
    permutation sum.
    """
    matrices = [np.asarray(m, dtype=complex) for m in matrices]
    if len(matrices) < 2:
        raise ValueError("k-commutator needs at least two matrices")
    _check_square_same(matrices)
    if len(matrices) == 2:
        return commutator(*matrices)
    if len(matrices) == 4:
        return four_commutator(*matrices)
    return k_commutator_bruteforce(matrices)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Normalized Hilbert-Schmidt product trace(A^dagger B) / dim."""
    a = np.asarray(a)
    b = np.asarray(b)
    dim = _check_square_same([a, b])
    return complex(np.vdot(a, b) / dim)


def hs_norm(a: np.ndarray) -> float:
    """Norm induced by :func:`hs_inner`, so that the identity has norm 1."""
    a = np.asarray(a)
    return float(np.sqrt(np.vdot(a, a).real / a.shape[0]))


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def spin_algebra_defect(rep: SpinRep) -> tuple[float, float]:
    """Max entrywise errors of [S_i,S_j] - i eps S_k and of sum J_i^2 - 1."""
    comm = 0.0
    for i in range(3):
        for j in range(3):
            target = sum(1j * LEVI_CIVITA_3[i, j, k] * rep.S[k] for k in range(3))
            comm = max(comm, float(np.max(np.abs(commutator(rep.S[i], rep.S[j]) - target))))
    if rep.n == 1:
        return comm, 0.0
    casimir = sum(j @ j for j in rep.J) - np.eye(rep.n)
    return comm, float(np.max(np.abs(casimir)))
