"""Exact first-order tests for anomalous subvarieties of A-polynomials.

Modules: :mod:`.qlinalg` (rationals, ranks, Hermite forms), :mod:`.taufield`
(squarefree cusp-shape coefficients, symbolic minor rank), :mod:`.subgroup`
(relation lattices), :mod:`.series` (potentials and fits), :mod:`.anomaly`
(classification and deficient subsets) and :mod:`.cli`.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .taufield import TauScalar, minor_rank  # noqa: E402
from .subgroup import SubgroupSpec, normalize, jacobian, support_subgroup  # noqa: E402
from .anomaly import classify, locate_complete_cusps, PairFamily  # noqa: E402
from .series import PotentialSeries, LinearForm, theta_fit  # noqa: E402
