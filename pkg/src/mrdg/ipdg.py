"""Interior-penalty DG semi-discretization of u_tt = div(c^2 grad u) + f.

The spatial operator acting on the orthonormal hierarchical coefficients of
u is assembled from Kronecker factors per dimension:

  <L u, v> = -B(u, v),
  B(u, v)  = sum_m [ int p_m d_m v  -  sum_faces {p_m}[v]
                     - sum_faces (1/2 (d_m v)~ [q~] both sides)
                     + (sigma/h) sum_faces [u][v] ],

with q = I(c^2 u) and p_m = I(c^2 d_m u) interpolated onto the interpolatory
multiwavelet space.  For constant speed the interpolants are exact and the
whole operator collapses to one 1D matrix per dimension.  For speeds with
jumps aligned to dyadic planes, the third group samples both one-sided limits
of c^2 u separately (side-forced node evaluation); for continuous speeds both
halves merge into an averaged-derivative trace term.

Trace sums run over every interface of the finest mesh fixed by the configured
maximum level: jumps of functions smooth across a face vanish, so only true
element boundaries contribute, and the penalty weight sigma/h is uniform with
h = 2^-n_max.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .fastmv import (
    CoeffSet,
    TensorOperator,
    TensorSpace,
    TensorTerm,
    node_lattice,
)
from .operators1d import (
    Operator1D,
    alpert_family,
    assemble_mass,
    assemble_node_to_surplus,
    assemble_node_values,
    assemble_stiffness,
    assemble_trace,
    assemble_volume_derivative,
    interp_family,
    node_family,
)


@dataclass(frozen=True)
class Coefficient:
    """Squared wave speed c^2 as a field on [0,1]^d.

    `fn(xs, sides)` receives broadcast coordinate and side-tag arrays (one per
    dimension, sides in {-1, 0, +1}) and returns c^2 elementwise.  Fields with
    jumps aligned to dyadic planes must set `aligned_jumps` so the scheme
    samples both one-sided limits across them.
    """

    fn: Callable | None = None
    constant: float | None = None
    aligned_jumps: bool = False

    @classmethod
    def const(cls, value: float) -> "Coefficient":
        return cls(constant=float(value))

    @classmethod
    def smooth(cls, fn: Callable) -> "Coefficient":
        return cls(fn=lambda xs, sides: fn(*xs))

    @classmethod
    def piecewise(cls, fn: Callable) -> "Coefficient":
        return cls(fn=fn, aligned_jumps=True)

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def __call__(self, xs, sides):
        if self.is_constant:
            return np.broadcast_to(self.constant, np.broadcast(*xs).shape).copy()
        return self.fn(xs, sides)

    def __hash__(self):  # usable as part of cache keys
        return hash((id(self.fn), self.constant, self.aligned_jumps))


@dataclass(frozen=True)
class SchemeConfig:
    """Everything the spatial operator depends on."""

    ndim: int
    k: int
    m: int
    variant: str
    n_max: int
    sigma: float
    bc: tuple[tuple[str, str], ...]  # per dimension (left, right)
    csq: Coefficient

    @property
    def h_min(self) -> float:
        return 2.0 ** (-self.n_max)


def _elementwise_mul(cs: CoeffSet, values: dict) -> CoeffSet:
    for lv, arr in cs.data.items():
        arr *= values[lv]
    return cs


class WaveOperator:
    """Applies the semi-discrete spatial operator L on a tensor space."""

    def __init__(self, cfg: SchemeConfig):
        self.cfg = cfg
        d, k, n = cfg.ndim, cfg.k, cfg.n_max
        A = alpert_family(k, n)
        self.afam = A
        self.p_a = (k + 1,) * d
        soh = cfg.sigma / cfg.h_min

        if cfg.csq.is_constant:
            c2 = cfg.csq.constant
            terms = []
            for m in range(d):
                S = assemble_stiffness(A, A)
                T = assemble_trace(A, A, "jump", "davg", cfg.bc[m])
                J = assemble_trace(A, A, "jump", "jump", cfg.bc[m])
                mat = c2 * (S.mat - T.mat - T.mat.T) + soh * J.mat
                ops: list[Operator1D | None] = [None] * d
                ops[m] = Operator1D(mat, A, A, "general")
                terms.append(TensorTerm(tuple(ops), scale=-1.0))
            self._op_const = TensorOperator(terms)
            return

        I = interp_family(cfg.m, cfg.variant, n)
        Nd = node_family(cfg.m, cfg.variant, n)
        self.p_i = (cfg.m + 1,) * d
        C = assemble_mass(A, I)
        EA = assemble_node_values(Nd, A)
        Einv = assemble_node_to_surplus(Nd)
        self._nodeval = TensorOperator.from_factors((EA,) * d)
        self._surplus = TensorOperator.from_factors((Einv,) * d)

        # volume-plus-average branch, one operator per derivative direction
        self._p_ops = []
        self._pd_nodeval = []
        pen_terms = []
        for m in range(d):
            Vd = assemble_volume_derivative(A, I)
            Tav = assemble_trace(A, I, "jump", "avg", cfg.bc[m])
            ops = [C] * d
            ops[m] = Operator1D(Tav.mat - Vd.mat, A, I, "general")
            self._p_ops.append(TensorOperator.from_factors(tuple(ops)))
            EdA = assemble_node_values(Nd, A, deriv=True)
            nops = [EA] * d
            nops[m] = EdA
            self._pd_nodeval.append(TensorOperator.from_factors(tuple(nops)))
            J = assemble_trace(A, A, "jump", "jump", cfg.bc[m])
            jops: list[Operator1D | None] = [None] * d
            jops[m] = J
            pen_terms.append(TensorTerm(tuple(jops), scale=-soh))
        self._penalty = TensorOperator(pen_terms)

        if cfg.csq.aligned_jumps:
            # sample both one-sided limits of c^2 u across dyadic planes
            self._q_sided = []
            for m in range(d):
                for s, kind in ((-1, "dminus"), (1, "dplus")):
                    EAf = assemble_node_values(Nd, A, force_side=s)
                    nv_ops = [EA] * d
                    nv_ops[m] = EAf
                    F = assemble_trace(A, I, kind, "jump", cfg.bc[m], half=True)
                    q_ops = [C] * d
                    q_ops[m] = F
                    self._q_sided.append(
                        (
                            m,
                            s,
                            TensorOperator.from_factors(tuple(nv_ops)),
                            TensorOperator.from_factors(tuple(q_ops)),
                        )
                    )
        else:
            q_terms = []
            for m in range(d):
                Fq = assemble_trace(A, I, "davg", "jump", cfg.bc[m])
                ops = [C] * d
                ops[m] = Fq
                q_terms.append(TensorTerm(tuple(ops)))
            self._q_op = TensorOperator(q_terms)

        self._cval_cache: dict = {}

    # -- coefficient samples at the hierarchical nodes ------------------

    def _csq_at_nodes(self, space: TensorSpace, force: tuple[int, int] | None):
        key = (space.version, force)
        hit = self._cval_cache.get(key)
        if hit is not None:
            return hit
        stale = [kk for kk in self._cval_cache if kk[0] != space.version]
        for kk in stale:
            del self._cval_cache[kk]
        cfg = self.cfg
        d = cfg.ndim
        vals = {}
        for lv in space.levels:
            coords, sides = node_lattice(cfg.m, cfg.variant, lv)
            shape = space.cell_counts[lv] + tuple(self.p_i)
            xs, ss = [], []
            for m in range(d):
                axshape = [1] * (2 * d)
                axshape[m] = coords[m].shape[0]
                axshape[d + m] = coords[m].shape[1]
                xs.append(np.broadcast_to(coords[m].reshape(axshape), shape))
                sarr = sides[m]
                if force is not None and force[0] == m:
                    inner = (coords[m] > 0.0) & (coords[m] < 1.0)
                    sarr = np.where(inner, force[1], sides[m])
                ss.append(np.broadcast_to(sarr.reshape(axshape), shape))
            vals[lv] = np.asarray(cfg.csq(xs, ss), dtype=float)
        self._cval_cache[key] = vals
        return vals

    # -- operator application -------------------------------------------

    def apply(
        self, space: TensorSpace, u: CoeffSet, out: CoeffSet | None = None
    ) -> CoeffSet:
        """out += L u (allocates a fresh zero target when out is None)."""
        if self.cfg.csq.is_constant:
            return self._op_const.apply(space, u, out)
        if out is None:
            out = space.zeros(self.p_a)
        self._penalty.apply(space, u, out)
        cval = self._csq_at_nodes(space, None)
        for m in range(self.cfg.ndim):
            nv = self._pd_nodeval[m].apply(space, u)
            _elementwise_mul(nv, cval)
            self._p_ops[m].apply(space, self._surplus.apply(space, nv), out)
        if self.cfg.csq.aligned_jumps:
            for m, s, nv_op, q_op in self._q_sided:
                nv = nv_op.apply(space, u)
                _elementwise_mul(nv, self._csq_at_nodes(space, (m, s)))
                q_op.apply(space, self._surplus.apply(space, nv), out)
        else:
            nv = self._nodeval.apply(space, u)
            _elementwise_mul(nv, cval)
            self._q_op.apply(space, self._surplus.apply(space, nv), out)
        return out

    def apply_interpolated(
        self,
        space: TensorSpace,
        p_nodes: list[CoeffSet],
        q_nodes: CoeffSet,
        out: CoeffSet | None = None,
    ) -> CoeffSet:
        """Interpolated branches driven by externally sampled node values.

        `p_nodes[m]` holds node samples of c^2 d_m u and `q_nodes` of c^2 u
        for some (typically exact, smooth) u; the penalty term — zero for a
        continuous u — is not included.  Only the continuous-speed trace
        branch is wired here.
        """
        if self.cfg.csq.is_constant or self.cfg.csq.aligned_jumps:
            raise ValueError("external samples need the smooth-speed pipeline")
        if out is None:
            out = space.zeros(self.p_a)
        for m in range(self.cfg.ndim):
            self._p_ops[m].apply(space, self._surplus.apply(space, p_nodes[m]), out)
        self._q_op.apply(space, self._surplus.apply(space, q_nodes), out)
        return out

    def interpolant(self, space: TensorSpace, u: CoeffSet) -> CoeffSet:
        """Surpluses of I(c^2 u) (natural node sides), mainly a test hook."""
        nv = self._nodeval.apply(space, u)
        if not self.cfg.csq.is_constant:
            _elementwise_mul(nv, self._csq_at_nodes(space, None))
        else:
            nv.scale(self.cfg.csq.constant)
        return self._surplus.apply(space, nv)

    def bilinear(self, space: TensorSpace, u: CoeffSet, v: CoeffSet) -> float:
        """B(u, v) = -<L u, v>."""
        return -self.apply(space, u).dot(v)

    def energy(self, space: TensorSpace, u: CoeffSet, w: CoeffSet) -> float:
        """Discrete energy 1/2 ||w||^2 + 1/2 B(u, u)."""
        return 0.5 * w.norm2() + 0.5 * self.bilinear(space, u, u)


def sample_at_nodes(
    space: TensorSpace, m: int, variant: str, fn: Callable
) -> CoeffSet:
    """Values of an analytic function at every active element's node tuple."""
    d = space.ndim
    p = (m + 1,) * d
    out = space.zeros(p)
    for lv in space.levels:
        coords, _sides = node_lattice(m, variant, lv)
        shape = space.cell_counts[lv] + p
        xs = []
        for dim in range(d):
            axshape = [1] * (2 * d)
            axshape[dim] = coords[dim].shape[0]
            axshape[d + dim] = coords[dim].shape[1]
            xs.append(np.broadcast_to(coords[dim].reshape(axshape), shape))
        out.data[lv][...] = fn(*xs)
    return space.mask(out)


@lru_cache(maxsize=None)
def _energy_ops(ndim: int, k: int, n: int) -> tuple[TensorOperator, ...]:
    A = alpert_family(k, n)
    interior = ("neumann", "neumann")  # face list = interior interfaces only
    stiff_terms, avg_terms, jump_terms = [], [], []
    for m in range(ndim):
        S = assemble_stiffness(A, A)
        A2 = assemble_trace(A, A, "davg", "davg", interior)
        J2 = assemble_trace(A, A, "jump", "jump", interior)
        for terms, op in ((stiff_terms, S), (avg_terms, A2), (jump_terms, J2)):
            ops: list[Operator1D | None] = [None] * ndim
            ops[m] = op
            terms.append(TensorTerm(tuple(ops)))
    return (
        TensorOperator(stiff_terms),
        TensorOperator(avg_terms),
        TensorOperator(jump_terms),
    )


def energy_norm(space: TensorSpace, u: CoeffSet, k: int, n: int) -> float:
    """Broken H1-type norm: |||u|||^2 = ||grad u||^2 + h sum {du/dn}^2
    + (1/h) sum [u]^2, with trace sums over the interior finest-mesh
    interfaces (constants measure zero)."""
    stiff, avg2, jump2 = _energy_ops(space.ndim, k, n)
    h = 2.0**-n
    val = (
        stiff.apply(space, u).dot(u)
        + h * avg2.apply(space, u).dot(u)
        + jump2.apply(space, u).dot(u) / h
    )
    return float(np.sqrt(max(val, 0.0)))


@dataclass
class State:
    """First-order-system unknowns (u, u_t) as paired coefficient sets."""

    u: CoeffSet
    w: CoeffSet

    def copy(self) -> "State":
        return State(self.u.copy(), self.w.copy())

    def axpy(self, alpha: float, other: "State") -> "State":
        self.u.axpy(alpha, other.u)
        self.w.axpy(alpha, other.w)
        return self

    def scale(self, alpha: float) -> "State":
        self.u.scale(alpha)
        self.w.scale(alpha)
        return self

    def finite(self) -> bool:
        return self.u.finite() and self.w.finite()


@dataclass
class SourceTerm:
    """Separable load theta(t) * (fixed spatial coefficient vector)."""

    time_fn: Callable[[float], float]
    spatial: CoeffSet


def make_rhs(
    wop: WaveOperator,
    space: TensorSpace,
    sources: list[SourceTerm] = (),
):
    """Right-hand side of the first-order system d/dt (u, w) = (w, L u + f)."""

    def rhs(t: float, state: State) -> State:
        dw = wop.apply(space, state.u)
        for s in sources:
            dw.axpy(s.time_fn(t), s.spatial)
        return State(state.w.copy(), dw)

    return rhs
