__version__ = "0.1.0"

from .errors import *
from .special_functions import AiryValue, airy, airy_ai
from .quadrature import IntervalSpec, QuadratureRule, gauss_legendre, map_interval
from .kernels import (
    KernelEstimate,
    ProjectionSide,
    SpaceTimePoint,
    diagonal_tail,
    extended_kernel_block,
    k2,
    k2_ext,
    semigroup_block,
)
from .fredholm import (
    BlockKernelMatrix,
    CountingConfig,
    GenFunValue,
    build_block_matrix,
    count_distribution,
    fredholm_det,
    gap_probability,
    generating_function,
    joint_count_distribution,
    tracy_widom_cdf,
    tracy_widom_f2,
)
from .mixing import (
    DecayCurve,
    MixingExperiment,
    count_covariance,
    event_mixing,
    fit_decay_rate,
    mixing_remainder,
    mixing_sweep,
    offdiagonal_block_norms,
    trace_decay,
    trace_norm_offdiag,
)
from .ensembles import (
    EnsembleBatch,
    GibbsWindow,
    PathEnsemble,
    UniformGrid,
    gibbs_resample_check,
    gue_edge_sample,
    parabolic_shift,
    resample_window,
    sample_avoiding_ensemble,
    sample_avoiding_ensembles,
    sample_bridge,
    shift_gibbs_window,
)
from .util.rng import RngStream
