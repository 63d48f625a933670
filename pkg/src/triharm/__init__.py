"""triharm: a numerical laboratory for m-linear Fourier multipliers (m <= 3)
acting between Hardy spaces at desk scale."""

from .grid import (
    DomainError,
    GridFunction,
    GridSpec,
    SpectralFunction,
    convolve,
    forward_transform,
    inner,
    inverse_transform,
    lp_norm,
    moment,
)
from .lp_frame import (
    AnnularPartition,
    LPFamily,
    build_annular_partition,
    build_lp_family,
    gamma_j,
    lambda_j,
    tilde_gamma_j,
    tilde_lambda_j,
)
from .maximal import DyadicCube, hl_max, log_growth_check, shifted_dyadic_max
from .dyadic_frame import CoeffSeq, analyze, fpq_norm, synthesize
from .atoms import Atom, decay_profile_check, make_atom, validate_atom
from .function_spaces import build_hardy_profile, hardy_equivalence_report, hardy_norm
from .multiplier import (
    MultiplierTensor,
    apply_direct,
    apply_fast,
    apply_separable,
    localize,
    ls2_norm,
    make_symbol,
    make_vanishing_multiplier,
    moment_check,
    paraproduct_decompose,
)
from .regions import (
    BaseRegion,
    ExponentPoint,
    InterpPlan,
    classify,
    plan_interpolation,
    required_regularity,
    verify_plan,
)

__version__ = "0.1.0"
