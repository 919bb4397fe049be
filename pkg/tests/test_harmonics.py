import numpy as np
import pytest

from matreg.harmonics import (
    Projector,
    closed_form_count,
    dld,
    harmonic_basis,
    harmonic_block_dimension,
    is_harmonic,
    laplacian_kernel_rank_dimension,
    mode_counts,
)
from matreg.poly import Polynomial


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("degree", range(7))
def test_block_dimension_three_ways(d, degree):
    assert harmonic_block_dimension(d + 1, degree) == laplacian_kernel_rank_dimension(d + 1, degree) == dld(degree, d)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("cutoff", range(1, 13))
def test_closed_form_sums(d, cutoff):
    per, total = mode_counts(d, cutoff)
    assert total == closed_form_count(d, cutoff) == sum(dld(l, d) for l in range(cutoff))
    assert isinstance(total, int)


def test_counting_validation():
    with pytest.raises(ValueError):
        mode_counts(5, 3)
    with pytest.raises(ValueError):
        mode_counts(2, 0)
    assert dld(-1, 2) == 0


@pytest.mark.parametrize(
    "manifold,cutoff,size", [("s2", 3, 9), ("s2", 5, 25), ("s3", 3, 14), ("s4", 3, 20), ("s2xs2", 2, 16), ("s2xs2", 3, 81)]
)
def test_basis_is_orthonormal_and_harmonic(manifold, cutoff, size):
    basis = harmonic_basis(manifold, cutoff)
    assert len(basis) == size
    assert np.allclose(basis.gram(), np.eye(size), atol=1e-12)
    assert all(is_harmonic(md) for md in basis)
    assert all(md.poly.is_homogeneous(md.total_degree) for md in basis)


def test_lower_cutoffs_are_prefixes():
    for tag in ("s2", "s4", "s2xs2"):
        small, big = harmonic_basis(tag, 2), harmonic_basis(tag, 3)
        assert big.modes[: len(small)] == small.modes


def test_degree_one_modes_are_scaled_coordinates():
    basis = harmonic_basis("s2", 2)
    scale = np.sqrt(3 / (4 * np.pi))
    assert basis[1].poly.terms == pytest.approx({(1, 0, 0): scale})
    assert basis.block_sizes() == [1, 3]


def test_projector_recovers_coefficients():
    basis = harmonic_basis("s3", 3)
    proj = Projector("s3", basis.modes, 2)
    p = basis[2].poly * 2.0 - basis[7].poly
    coeffs = proj.project(p)
    expected = np.zeros(len(basis))
    expected[2], expected[7] = 2.0, -1.0
    assert np.allclose(coeffs, expected, atol=1e-12)
    with pytest.raises(ValueError):
        proj.vector(Polynomial.monomial((3, 0, 0, 0)))


def test_json_shape():
    data = harmonic_basis("s2xs2", 2).to_json()
    assert data["manifold"] == "s2xs2" and len(data["modes"]) == 16
    assert data["modes"][-1]["degree"] == [1, 1]


def test_invalid_cutoff():
    with pytest.raises(ValueError):
        harmonic_basis("s2", 0)
