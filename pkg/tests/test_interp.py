"""Interpolatory multiwavelets: node families, delta property, interpolants."""

from fractions import Fraction

import numpy as np
import pytest

from mrdg.interp import (
    eval_interpolant,
    hierarchical_interpolate,
    interpolation_matrix,
    make_interp_basis,
)

EXACT = 1e-12

ALL_FAMILIES = [(m, v) for m in range(1, 6) for v in ("interface", "inner")]


@pytest.mark.parametrize("m,variant", ALL_FAMILIES)
def test_nodes_are_nested(m, variant):
    basis = make_interp_basis(m, variant)
    base = set(basis.base_nodes)
    level1 = {(x / 2, s) for x, s in base} | {((x + 1) / 2, s) for x, s in base}
    assert base <= level1
    assert len(level1 - base) == m + 1


@pytest.mark.parametrize("m,variant", ALL_FAMILIES)
def test_node_counts_and_sides(m, variant):
    basis = make_interp_basis(m, variant)
    assert len(basis.base_nodes) == m + 1
    for x, s in basis.base_nodes:
        if variant == "inner":
            # inner families avoid every dyadic point, so no side tags needed
            assert s == 0
            assert 0 < x < 1
        elif x.denominator & (x.denominator - 1) == 0:
            # dyadic nodes are one-sided: right limit at 0, left elsewhere
            assert s in (-1, 1)
            if x == 0:
                assert s == 1
            if x == 1:
                assert s == -1
        else:
            assert s == 0  # non-dyadic nodes sit strictly inside a cell


@pytest.mark.parametrize("m,variant", ALL_FAMILIES)
def test_level0_delta_property(m, variant):
    basis = make_interp_basis(m, variant)
    for i in range(m + 1):
        for j, (x, s) in enumerate(basis.nodes_level0()):
            val = basis.eval_phi(i, np.array([x]), s)[0]
            assert abs(val - (1.0 if i == j else 0.0)) < EXACT


@pytest.mark.parametrize("m,variant", ALL_FAMILIES)
def test_wavelet_delta_property(m, variant):
    # wavelet i is 1 at fresh node i, 0 at every other node of levels <= 1
    basis = make_interp_basis(m, variant)
    fresh = basis.nodes_for(1, 0)
    base = basis.nodes_level0()
    for i in range(m + 1):
        for j, (x, s) in enumerate(fresh):
            val = basis.eval_mother(i, np.array([x]), s)[0]
            assert abs(val - (1.0 if i == j else 0.0)) < EXACT
        for x, s in base:
            assert abs(basis.eval_mother(i, np.array([x]), s)[0]) < EXACT


@pytest.mark.parametrize("m,variant", [(2, "interface"), (3, "inner"), (4, "interface")])
def test_interpolation_matrix_unit_lower(m, variant):
    basis = make_interp_basis(m, variant)
    e = interpolation_matrix(basis, 3)
    np.testing.assert_allclose(np.diag(e), 1.0, atol=EXACT)
    assert np.max(np.abs(np.triu(e, 1))) < EXACT


@pytest.mark.parametrize("m,variant", ALL_FAMILIES)
def test_interpolant_reproduces_node_values(m, variant):
    # side enters f so one-sided nodes must be honored to reproduce values
    f = lambda x, side: np.sin(3 * x) + x**2 + 0.1 * side
    basis = make_interp_basis(m, variant)
    surplus = hierarchical_interpolate(f, basis, 3)
    for x, s in basis.all_nodes(3):
        got = eval_interpolant(surplus, basis, 3, np.array([x]), s)[0]
        assert abs(got - f(np.array([x]), s)[0]) < 1e-10


@pytest.mark.parametrize("m,variant", [(2, "interface"), (2, "inner"), (4, "interface")])
def test_interpolant_exact_on_polynomials(m, variant):
    # degree-M polynomials are reproduced everywhere, not only at nodes
    basis = make_interp_basis(m, variant)
    coef = np.arange(1.0, m + 2)
    poly = np.polynomial.Polynomial(coef)
    surplus = hierarchical_interpolate(lambda x, side: poly(x), basis, 2)
    x = np.linspace(0.013, 0.987, 41)
    np.testing.assert_allclose(
        eval_interpolant(surplus, basis, 2, x), poly(x), atol=1e-10
    )
    # and the surplus of every level >= 1 function vanishes
    assert np.max(np.abs(surplus[m + 1 :])) < 1e-10


def test_interface_m4_matches_closed_forms():
    basis = make_interp_basis(4, "interface")
    # nodes are the quarter points, one-sided at the dyadic ones
    assert basis.nodes_level0() == [(0.0, 1), (0.25, -1), (0.5, -1), (0.75, -1), (1.0, -1)]
    x = np.linspace(0.0, 1.0, 9)
    # phi_0 interpolates (0, +): the Lagrange polynomial through the quarter points
    phi0 = np.polynomial.Polynomial.fromroots([0.25, 0.5, 0.75, 1.0])
    phi0 = phi0 / phi0(0.0)
    np.testing.assert_allclose(basis.eval_phi(0, x), phi0(x), atol=1e-11)
    assert abs(basis.eval_phi(0, np.array([0.0]), 1)[0] - 1.0) < EXACT
    # right-half wavelet for fresh node (7/8)-: -(32/3)(x-1)(2x-1)(4x-3)(8x-5)
    fresh = basis.nodes_for(1, 0)
    idx = fresh.index((0.875, -1))
    xr = np.linspace(0.51, 0.99, 17)
    expect = -(32.0 / 3.0) * (xr - 1) * (2 * xr - 1) * (4 * xr - 3) * (8 * xr - 5)
    np.testing.assert_allclose(basis.eval_mother(idx, xr), expect, atol=1e-10)
    # and it vanishes identically on the other half
    assert np.max(np.abs(basis.eval_mother(idx, np.linspace(0.01, 0.49, 9)))) == 0.0


def test_inner_families_nest_across_degrees():
    # the M=3 node set sits inside the M=4 one (shared dyadic-orbit design)
    n3 = {x for x, _ in make_interp_basis(3, "inner").base_nodes}
    n4 = {x for x, _ in make_interp_basis(4, "inner").base_nodes}
    assert n3 <= n4
    assert Fraction(1, 3) in n4 and Fraction(1, 6) in n4


def test_degree_bounds_enforced():
    with pytest.raises(ValueError):
        make_interp_basis(0)
    with pytest.raises(ValueError):
        make_interp_basis(6)
