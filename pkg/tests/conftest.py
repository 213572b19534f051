"""Shared brute-force oracles.

Everything here deliberately avoids the code paths under test: dense
matrices are assembled block-by-block from raw operator entries (ignoring
triangularity tags), integrals go through per-cell Gauss quadrature of
pointwise basis evaluations, and grids are grown by random child
activations so downward closure is the only structure they share.
"""

from __future__ import annotations

import numpy as np
import pytest

from mrdg.alpert import AlpertBasis1D, Quadrature1D
from mrdg.fastmv import CoeffSet, TensorSpace, TensorTerm
from mrdg.grids import AdaptiveGrid, children, num_cells


def cellwise_gauss(n: int, npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes/weights mapped to every cell of the level-n uniform mesh."""
    q = Quadrature1D.gauss(npts)
    h = 2.0**-n
    xs, ws = [], []
    for c in range(2**n):
        x, w = q.mapped(c * h, (c + 1) * h)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def alpert_values_brute(k: int, n: int, x: np.ndarray) -> np.ndarray:
    """Row i = hierarchical Alpert function i evaluated at x, via eval_hier."""
    basis = AlpertBasis1D(k, n)
    out = np.empty((basis.ndof, len(x)))
    for i in range(k + 1):
        out[basis.index(0, 0, i)] = basis.eval_scaling(i, x)
    for level in range(1, n + 1):
        for cell in range(num_cells(level)):
            for i in range(k + 1):
                out[basis.index(level, cell, i)] = basis.eval_hier(level, cell, i, x)
    return out


# ---------------------------------------------------------------------------
# grids


def random_pruning(ndim: int, n_max: int, seed: int, steps: int = 40) -> AdaptiveGrid:
    """Grow a random downward-closed active set by repeated child activation."""
    rng = np.random.default_rng(seed)
    grid = AdaptiveGrid(ndim, n_max)
    for _ in range(steps):
        keys = sorted(grid)
        key = keys[int(rng.integers(len(keys)))]
        dim = int(rng.integers(ndim))
        kids = children(key, dim, n_max)
        if kids:
            grid.activate(kids[int(rng.integers(len(kids)))])
    return grid


# ---------------------------------------------------------------------------
# dense tensor-operator oracle


def space_layout(space: TensorSpace, p: tuple[int, ...]):
    """Per-level (offset, block shape) in a flat global vector."""
    offsets, total = {}, 0
    for lv in space.levels:
        shape = space.cell_counts[lv] + tuple(p)
        offsets[lv] = (total, shape)
        total += int(np.prod(shape))
    return offsets, total


def flatten(space: TensorSpace, cs: CoeffSet) -> np.ndarray:
    offsets, total = space_layout(space, cs.p)
    out = np.zeros(total)
    for lv, (off, shape) in offsets.items():
        arr = cs.data.get(lv)
        if arr is not None:
            out[off : off + arr.size] = arr.ravel()
    return out


def _grouped_to_interleaved(ncells: tuple[int, ...], p: tuple[int, ...]) -> np.ndarray:
    # kron of per-dimension (cell, poly) matrices orders axes (c1,p1,c2,p2,...);
    # coefficient blocks order them (c1,...,cd,p1,...,pd).
    axes = []
    for c, q in zip(ncells, p):
        axes += [c, q]
    arr = np.arange(int(np.prod(axes))).reshape(axes)
    d = len(ncells)
    order = list(range(0, 2 * d, 2)) + list(range(1, 2 * d, 2))
    return arr.transpose(order).ravel()


def _active_mask_flat(space: TensorSpace, lv, p: tuple[int, ...]) -> np.ndarray:
    m = space.masks[lv]
    return np.broadcast_to(
        m.reshape(m.shape + (1,) * len(p)), m.shape + tuple(p)
    ).ravel()


def dense_from_terms(
    terms: list[TensorTerm], space: TensorSpace, p_in: tuple[int, ...]
) -> np.ndarray:
    """Dense matrix of sum(scale * kron(ops)) restricted to the active set.

    Entries are read straight from `op.mat` level blocks; tags, sweep order,
    and the L+U expansion are never consulted, so the result is an
    independent reference for the fast apply.
    """
    d = space.ndim
    p_out = tuple(
        (op.row.p if op is not None else q) for op, q in zip(terms[0].ops, p_in)
    )
    off_in, tot_in = space_layout(space, p_in)
    off_out, tot_out = space_layout(space, p_out)
    dense = np.zeros((tot_out, tot_in))
    for term in terms:
        for lvo in space.levels:
            for lvi in space.levels:
                factors = []
                for m in range(d):
                    op = term.ops[m]
                    if op is None:
                        if lvo[m] != lvi[m]:
                            factors = None
                            break
                        factors.append(np.eye(num_cells(lvi[m]) * p_in[m]))
                    else:
                        factors.append(op.block(lvo[m], lvi[m]))
                if factors is None:
                    continue
                kron = factors[0]
                for fac in factors[1:]:
                    kron = np.kron(kron, fac)
                if not kron.any():
                    continue
                co = tuple(num_cells(l) for l in lvo)
                ci = tuple(num_cells(l) for l in lvi)
                rows = _grouped_to_interleaved(co, p_out)
                cols = _grouped_to_interleaved(ci, p_in)
                oo, so = off_out[lvo]
                oi, si = off_in[lvi]
                dense[oo : oo + int(np.prod(so)), oi : oi + int(np.prod(si))] += (
                    term.scale * kron[np.ix_(rows, cols)]
                )
    row_mask = np.concatenate(
        [_active_mask_flat(space, lv, p_out) for lv in space.levels]
    )
    col_mask = np.concatenate(
        [_active_mask_flat(space, lv, p_in) for lv in space.levels]
    )
    dense[~row_mask] = 0.0
    dense[:, ~col_mask] = 0.0
    return dense


def random_coeffs(space: TensorSpace, p: tuple[int, ...], seed: int) -> CoeffSet:
    """Masked random coefficients (inactive cells zeroed, as callers guarantee)."""
    rng = np.random.default_rng(seed)
    cs = space.zeros(p)
    for lv in space.levels:
        cs.data[lv][...] = rng.standard_normal(cs.data[lv].shape)
    return space.mask(cs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
