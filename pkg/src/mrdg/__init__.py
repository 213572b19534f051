"""Adaptive multiresolution interior-penalty DG solver for the wave equation.

Sparse- and adaptive-grid discontinuous Galerkin discretization of
``u_tt = div(c^2 grad u) + f`` on the unit box in 1-3 dimensions, built on
orthonormal multiwavelets with interpolatory multiwavelets carrying the
variable-coefficient terms.  ``mrdg.runner.run`` / ``mrdg.runner.sweep``
drive complete experiments; the ``mrdg`` console script wraps them.
"""

from .config import RunConfig, load_config
from .grids import AdaptiveGrid
from .fastmv import TensorSpace
from .ipdg import Coefficient, SchemeConfig, State, WaveOperator
from .problems import Problem, make_problem
from .runner import RunResult, run, sweep

__all__ = [
    "AdaptiveGrid",
    "Coefficient",
    "Problem",
    "RunConfig",
    "RunResult",
    "SchemeConfig",
    "State",
    "TensorSpace",
    "WaveOperator",
    "load_config",
    "make_problem",
    "run",
    "sweep",
]
