"""Error norms, rate fits, and the text output helpers."""

import math

import numpy as np
import pytest

from mrdg.diagnostics import (
    RunRecord,
    center_lattice,
    dof_rates,
    eps_rates,
    fit_rate,
    fmt,
    l2_error,
    linf_error,
    orders,
    write_csv,
    write_lines,
)
from mrdg.fastmv import TensorSpace, eval_on_lattice, project_separable
from mrdg.grids import AdaptiveGrid

from conftest import cellwise_gauss, random_coeffs


def quadrature_l2_error(space, u, k, n, exact_xy):
    # brute reference: tensor Gauss quadrature of (u_h - u)^2 over the
    # finest mesh, dense in both directions
    x, wx = cellwise_gauss(n, k + 4)
    vals = eval_on_lattice(space, u, k, n, [x, x])
    diff = (vals - exact_xy(x[:, None], x[None, :])) ** 2
    return math.sqrt(float(wx @ diff @ wx))


def test_l2_error_matches_quadrature():
    k, n = 2, 3
    space = TensorSpace(AdaptiveGrid.sparse(2, n))
    u = random_coeffs(space, (k + 1, k + 1), 5)
    u.scale(0.05)
    # exact field sin(pi x) sin(pi y): closed-form squared integral 1/4
    terms = [(lambda x: np.sin(np.pi * x), lambda y: np.sin(np.pi * y))]
    got = l2_error(space, u, k, n, terms, 0.25)
    want = quadrature_l2_error(
        space, u, k, n, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    )
    assert abs(got - want) < 1e-9 * max(1.0, want)


def test_l2_error_is_cancellation_free_near_zero():
    # u_h = P(exact): the distance is the pure projection tail, which the
    # three-term expansion would compute as a difference of O(1) numbers
    k, n = 2, 4
    space = TensorSpace(AdaptiveGrid.full(2, n))
    terms = [(lambda x: np.sin(np.pi * x), lambda y: np.sin(np.pi * y))]
    u = project_separable(space, terms, k, n)
    got = l2_error(space, u, k, n, terms, 0.25)
    assert 0.0 < got < 1e-4
    want = quadrature_l2_error(
        space, u, k, n, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
    )
    assert abs(got - want) < 1e-3 * want


def test_l2_error_flags_nonfinite_and_bad_norms():
    k, n = 1, 2
    space = TensorSpace(AdaptiveGrid.sparse(2, n))
    u = space.zeros((2, 2))
    u.data[(0, 0)][0, 0, 0, 0] = np.nan
    terms = [(lambda x: 0.0 * x, lambda y: 0.0 * y)]
    assert l2_error(space, u, k, n, terms, 0.0) == math.inf
    ok = space.zeros((2, 2))
    with pytest.raises(ValueError):
        # claimed ||u||^2 far below the projection's: inconsistent inputs
        l2_error(space, ok, k, n, [(lambda x: 1.0 + 0 * x, lambda y: 1.0 + 0 * y)], 0.5)


def test_linf_error_on_lattice_and_chunked_path():
    k, n = 1, 3
    space = TensorSpace(AdaptiveGrid.full(2, n))
    terms = [(lambda x: x, lambda y: 1.0 - y)]
    u = project_separable(space, terms, k, n)
    exact = lambda x, y: x * (1.0 - y)
    assert linf_error(space, u, k, n, exact) < 1e-12
    # shifted exact field: the max deviation on the lattice is known
    off = lambda x, y: x * (1.0 - y) + 0.25
    assert abs(linf_error(space, u, k, n, off) - 0.25) < 1e-12
    # tiny npts exercises the slab loop boundaries
    assert abs(linf_error(space, u, k, n, off, npts=3) - 0.25) < 1e-12


def test_center_lattice_avoids_breakpoints():
    pts = center_lattice(3)
    assert len(pts) == 16
    scaled = pts * 2**3
    assert not np.any(np.isclose(scaled, np.round(scaled)))


def test_rate_helpers_on_hand_values():
    assert orders([8.0, 4.0, 1.0]) == [1.0, 2.0]
    assert orders([1.0, 0.0]) == [math.inf]
    assert fit_rate([1.0, 2.0, 4.0], [3.0, 6.0, 12.0]) == pytest.approx(1.0)
    assert dof_rates([10, 100], [1.0, 0.01]) == [pytest.approx(2.0)]
    assert eps_rates([1e-2, 1e-4], [1e-3, 1e-5]) == [pytest.approx(1.0)]


def test_fmt_six_significant_digits():
    assert fmt(0.000123456789) == "0.000123457"
    assert fmt(3) == "3"
    assert fmt(np.int64(7)) == "7"
    assert fmt(1.5) == "1.5"
    assert fmt("x") == "x"
    assert fmt(float("nan")) == "nan"


def test_write_csv_echo_and_determinism(tmp_path):
    rows = [[1, 0.5, "a"], [2, 1.0 / 3.0, "b"]]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (p1, p2):
        write_csv(p, ["n", "err", "tag"], rows, echo=["k = 1", "cfl = 0.1"])
    assert p1.read_bytes() == p2.read_bytes()
    lines = p1.read_text().splitlines()
    assert lines[0] == "# k = 1"
    assert lines[2] == "n,err,tag"
    assert lines[3] == "1,0.5,a"
    assert lines[4] == "2,0.333333,b"


def test_write_lines(tmp_path):
    p = tmp_path / "c.txt"
    write_lines(p, ["one", "two"], echo=["cfg = here"])
    assert p.read_text() == "# cfg = here\none\ntwo\n"


def test_run_record_stability_flag():
    assert RunRecord(dof=8, num_elements=2, t_final=1.0).stable
    assert not RunRecord(dof=8, num_elements=2, t_final=1.0, aborted_step=3).stable
