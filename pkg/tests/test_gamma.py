import numpy as np
import pytest

from matreg.gamma import (
    build_gammas,
    family_defects,
    g45_block,
    make_gamma_family,
    max_offdiagonal_anticommutator,
    printed_coefficients,
    printed_vs_solved,
    solve_coefficients,
)
from matreg.linalg import DimensionError, anticommutator, commutator, make_spin_rep


@pytest.mark.parametrize("n", [2, 3, 4, 7, 12])
@pytest.mark.parametrize("branch", [1, -1])
def test_family_invariants(n, branch):
    fam = make_gamma_family(n, branch=branch)
    d = family_defects(fam, all_orderings=n <= 4)
    assert d["normalization"] <= 1e-12
    assert d["hermiticity"] <= 1e-14
    assert d["four_bracket"] <= 1e-10
    assert d["listed_displays"] <= 1e-10
    assert d["g45"] <= 1e-12
    assert d["constraints"] <= 1e-12
    assert fam.dim == 2 * n
    assert fam.gammas[0].shape == (2 * n, 2 * n)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_solved_coefficients_closed_form(n):
    a, b, d4 = solve_coefficients(n)
    assert a == pytest.approx(np.sqrt(12 / (5 * (n * n - 1))), rel=1e-12)
    assert b == pytest.approx(1 / np.sqrt(5), rel=1e-12)
    assert d4 == pytest.approx(6 * a * b * b, rel=1e-12)


def test_d4_scaling_is_exact():
    scaled = [make_gamma_family(n).d4 * np.sqrt(n * n - 1) for n in range(2, 20)]
    assert np.ptp(scaled) / scaled[0] <= 1e-8


def test_printed_coefficients_do_not_normalize():
    ref = printed_vs_solved(4)
    assert ref["a_ratio"] == pytest.approx(np.sqrt(2))
    assert ref["normalization_residual_printed"] > 0.1
    assert ref["normalization_residual_solved"] <= 1e-12
    assert printed_coefficients(4)["a"] == pytest.approx(ref["a_printed"])


def test_clifford_degeneration():
    assert max_offdiagonal_anticommutator(make_gamma_family(2)) <= 1e-12
    assert max_offdiagonal_anticommutator(make_gamma_family(3)) > 1e-3


def test_gamma4_gamma5_anticommute_with_the_rest():
    g = make_gamma_family(5).gammas
    for k in (3, 4):
        for i in range(5):
            if i != k:
                assert np.allclose(anticommutator(g[i], g[k]), 0, atol=1e-14)


def test_g45_structure():
    fam = make_gamma_family(3)
    assert np.allclose(commutator(fam.gammas[3], fam.gammas[4]), 2 * fam.b**2 * g45_block(3))


def test_build_gammas_shapes_and_invalid_n():
    gs = build_gammas(make_spin_rep(3), 0.5, 0.3)
    assert len(gs) == 5 and all(g.shape == (6, 6) for g in gs)
    with pytest.raises(DimensionError):
        make_gamma_family(1)
