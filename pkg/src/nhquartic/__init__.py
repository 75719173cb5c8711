"""Non-Hermitian 2D quartic oscillators ``H0 + i*lam*W``.

Two discretizations of the same model (a harmonic-oscillator product basis
and a sinc grid), a high-precision 1D oracle for the separable ``lam = 0``
problem, point-group labelling, and branch tracking with exceptional-point
location.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BrokenConjugacyError,
    InternalConsistencyError,
    InvalidArgumentError,
    InvalidBracketError,
    MethodDisagreementError,
    NHQuarticError,
    NeedMoreLevelsError,
    PrecisionNotReachedError,
    ResourceLimitError,
    SolverFailureError,
)
from .hamiltonian2d import ModelParams, Perturbation, ProductBasis  # noqa: E402
from .basis1d import Basis1D  # noqa: E402
from .eigensolver import Spectrum, classify_reality, eig_general, eig_symmetric  # noqa: E402
from .problem import BasisConfig, BasisIndex, GridConfig, Problem  # noqa: E402
from .pseudospectral import Grid2D, cross_validate  # noqa: E402
from .oracle1d import compose_separable, quartic_levels  # noqa: E402
from .sweep import (  # noqa: E402
    SweepConfig,
    count_phase_transitions,
    find_exceptional_point,
    run_sweep,
)
