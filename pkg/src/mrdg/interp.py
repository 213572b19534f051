"""Interpolatory multiwavelets on nested dyadic point sets.

A family of M+1 base nodes X0 in [0,1] is chosen so that X0 is contained in
X1 = X0/2 u (X0+1)/2.  The M+1 fresh nodes of X1 define the mother wavelets:
wavelet i is the degree-<=M Lagrange polynomial on the half-interval holding
fresh node i that equals 1 there and 0 at the other nodes of X1 in that half,
extended by zero to the rest of [0,1].  Level-0 functions are the Lagrange
basis on X0.  Dilation psi_i(2^(n-1) x - j) populates level n >= 1, cell j,
whose fresh nodes are 2^-(n-1) (x~_i + j).

Nodes carry a one-sided evaluation tag (-1 left limit, +1 right limit,
0 plain) because piecewise fields are sampled at cell interfaces.  Two node
families are provided:

* ``interface``: X0 = {i/M} with tags on dyadic nodes (0 is approached from
  the right, dyadic interior nodes and 1 from the left).  Fresh midpoint
  nodes appear as left/right limit pairs.  This is the robust default.
* ``inner``: strictly interior nodes generated by the nested-orbit rule
  starting from {1/3, 2/3}; kept to reproduce the high-order instability of
  inner-node interpolation inside the wave solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular

from .alpert import Quadrature1D, legendre_values
from .grids import num_cells

# Base node values per variant, as exact rationals.  Inner nodes: each set is
# nested under x -> x/2, x -> (x+1)/2 images of itself; the M=4 and M=5 sets
# continue the same orbit.
_INNER_NODES = {
    1: ["1/3", "2/3"],
    2: ["1/6", "1/3", "2/3"],
    3: ["1/6", "1/3", "7/12", "2/3"],
    4: ["1/6", "7/24", "1/3", "7/12", "2/3"],
    5: ["1/12", "1/6", "7/24", "1/3", "7/12", "2/3"],
}


def _is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


def _base_nodes(m: int, variant: str) -> list[tuple[Fraction, int]]:
    if variant == "interface":
        nodes = []
        for i in range(m + 1):
            x = Fraction(i, m)
            if x == 0:
                side = 1
            elif _is_dyadic(x):
                side = -1  # includes x = 1 and interior dyadic nodes
            else:
                side = 0
            nodes.append((x, side))
        return nodes
    if variant == "inner":
        if m not in _INNER_NODES:
            raise ValueError(f"inner nodes available for M in 1..5, got {m}")
        return [(Fraction(s), 0) for s in _INNER_NODES[m]]
    raise ValueError(f"unknown node variant {variant!r}")


def _lagrange_on(nodes: list[Fraction], hold: int) -> np.ndarray:
    """Monomial coefficients (low->high) of the Lagrange cardinal at nodes[hold]."""
    poly = np.array([1.0])
    xi = float(nodes[hold])
    for j, xj in enumerate(nodes):
        if j == hold:
            continue
        xj = float(xj)
        poly = np.convolve(poly, np.array([-xj, 1.0])) / (xi - xj)
    return poly


def _poly_to_local_legendre(poly: np.ndarray, p: int) -> np.ndarray:
    """Expand a monomial-coefficient polynomial on [0,1] in the orthonormal
    shifted Legendre basis of degree p."""
    quad = Quadrature1D.gauss(p + 1)
    vals = np.polyval(poly[::-1], quad.nodes)
    basis = legendre_values(p, quad.nodes)
    return np.einsum("x,x,xq->q", quad.weights, vals, basis)


class InterpBasis1D:
    """1D interpolatory multiwavelet family of degree M.

    Attributes:
        m: polynomial degree (M+1 nodes per cell and level).
        variant: "interface" or "inner".
        base_nodes: list of (value, side) for X0, sorted.
        fresh_nodes: list of (value, side) for the fresh nodes of X1, sorted
            by (value, side); wavelet i interpolates fresh node i.
        halves: half-interval (0 left, 1 right) owning each wavelet.
        phi: level-0 Lagrange basis, orthonormal-Legendre coefficients,
            shape (M+1, M+1).
        mothers: wavelet pieces in half-local orthonormal Legendre
            coefficients, shape (M+1, 2, M+1); the off-support half is zero.
    """

    def __init__(self, m: int, variant: str = "interface"):
        if not 1 <= m <= 5:
            raise ValueError("degree M must be in 1..5")
        self.m = m
        self.p = m + 1
        self.variant = variant
        base = _base_nodes(m, variant)
        level1 = {(x / 2, s) for x, s in base} | {((x + 1) / 2, s) for x, s in base}
        if not {(x, s) for x, s in base} <= level1:
            raise AssertionError("node family is not nested")
        fresh = sorted(level1 - set(base))
        if len(fresh) != m + 1:
            raise AssertionError("expected M+1 fresh nodes at level 1")
        self.base_nodes = sorted(base)
        self.fresh_nodes = fresh
        self.halves = [self._half(x, s) for x, s in fresh]

        self.phi = np.zeros((self.p, self.p))
        base_vals = [x for x, _ in self.base_nodes]
        for i in range(self.p):
            self.phi[i] = _poly_to_local_legendre(_lagrange_on(base_vals, i), m)

        self.mothers = np.zeros((self.p, 2, self.p))
        level1_sorted = sorted(level1)
        for i, (x, s) in enumerate(fresh):
            h = self.halves[i]
            half_nodes = [v for v, sv in level1_sorted if self._half(v, sv) == h]
            assert len(half_nodes) == self.p
            # Lagrange on the half, in half-local coordinates xi = 2x - h.
            local = [2 * v - h for v in half_nodes]
            hold = local.index(2 * x - h)
            self.mothers[i, h] = _poly_to_local_legendre(
                _lagrange_on(local, hold), m
            ) / np.sqrt(2.0)
            # division: the half-local orthonormal functions are sqrt(2)-scaled

    @staticmethod
    def _half(x: Fraction, side: int) -> int:
        if x < Fraction(1, 2):
            return 0
        if x > Fraction(1, 2):
            return 1
        if side == 0:
            raise AssertionError("midpoint node must carry a side")
        return 0 if side < 0 else 1

    # -- node enumeration ------------------------------------------------

    def nodes_level0(self) -> list[tuple[float, int]]:
        return [(float(x), s) for x, s in self.base_nodes]

    def nodes_for(self, level: int, cell: int) -> list[tuple[float, int]]:
        """Fresh nodes owned by (level, cell), as (value, side) floats."""
        if level == 0:
            return self.nodes_level0()
        scale = Fraction(1, 1 << (level - 1))
        return [(float((x + cell) * scale), s) for x, s in self.fresh_nodes]

    def all_nodes(self, n: int) -> list[tuple[float, int]]:
        """Every node of levels 0..n in the hierarchical (level, cell, i) order."""
        out = list(self.nodes_level0())
        for level in range(1, n + 1):
            for cell in range(num_cells(level)):
                out.extend(self.nodes_for(level, cell))
        return out

    # -- evaluation ------------------------------------------------------

    def eval_phi(self, i: int, x, side: int = 0) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return legendre_values(self.m, x) @ self.phi[i]

    def eval_mother(self, i: int, x, side: int = 0) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = self.halves[i]
        if h == 0:
            inside = (x > 0.0) | ((x == 0.0) & (side >= 0))
            inside &= (x < 0.5) | ((x == 0.5) & (side < 0))
        else:
            inside = (x > 0.5) | ((x == 0.5) & (side >= 0))
            inside &= (x < 1.0) | ((x == 1.0) & (side < 0))
        vals = np.zeros_like(x)
        if np.any(inside):
            xi = 2.0 * x[inside] - h
            basis = np.sqrt(2.0) * legendre_values(self.m, xi)
            vals[inside] = basis @ self.mothers[i, h]
        return vals

    def eval_hier(self, level: int, cell: int, i: int, x, side: int = 0):
        """Hierarchical interpolatory function at x (one-sided at breakpoints)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if level == 0:
            return self.eval_phi(i, x, side)
        scale = float(1 << (level - 1))
        xi = scale * x - cell
        vals = np.zeros_like(x)
        inside = (xi >= 0.0) & (xi <= 1.0)
        if np.any(inside):
            vals[inside] = self.eval_mother(i, xi[inside], side)
        return vals


@lru_cache(maxsize=None)
def make_interp_basis(m: int, variant: str = "interface") -> InterpBasis1D:
    return InterpBasis1D(m, variant)


def interpolation_matrix(basis: InterpBasis1D, n: int) -> np.ndarray:
    """E[a, b] = value of hierarchical function b at hierarchical node a,
    for levels 0..n.  Unit lower triangular in the level-major order by the
    delta property; values at a node use the node's own side."""
    nodes = basis.all_nodes(n)
    ndof = len(nodes)
    e = np.zeros((ndof, ndof))
    xs = np.array([x for x, _ in nodes])
    col = 0
    for level in range(0, n + 1):
        cells = num_cells(level) if level else 1
        for cell in range(cells):
            for i in range(basis.p):
                for a, (x, s) in enumerate(nodes):
                    e[a, col] = basis.eval_hier(level, cell, i, np.array([x]), s)[0]
                col += 1
    assert col == ndof
    return e


def hierarchical_interpolate(f, basis: InterpBasis1D, n: int) -> np.ndarray:
    """Surplus coefficients of the level-n interpolant of a callable.

    `f` is called as f(x_array, side) so piecewise integrands can honor
    one-sided nodes.  Surpluses solve the unit-lower-triangular node-value
    system level by level.
    """
    nodes = basis.all_nodes(n)
    vals = np.array([float(np.asarray(f(np.array([x]), s)).ravel()[0]) for x, s in nodes])
    e = interpolation_matrix(basis, n)
    return solve_triangular(e, vals, lower=True, unit_diagonal=True)


def eval_interpolant(surplus: np.ndarray, basis: InterpBasis1D, n: int, x, side: int = 0):
    """Evaluate a surplus expansion at points (dense reference path)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    col = 0
    for level in range(0, n + 1):
        cells = num_cells(level) if level else 1
        for cell in range(cells):
            for i in range(basis.p):
                c = surplus[col]
                if c != 0.0:
                    out += c * basis.eval_hier(level, cell, i, x, side)
                col += 1
    return out
