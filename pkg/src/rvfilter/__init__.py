"""Regular variation through linear filters: when does a heavy-tailed output force a heavy-tailed input?"""
from .certify import Verdict, check_left_tail_negligible, find_zero
from .curves import solve_failure_point, trace_curves
from .laws import (
    AbsCauchy,
    CounterexampleLaw,
    CounterexampleSpec,
    Discrete,
    Gamma,
    LogNormal,
    MomentDivergence,
    Pareto,
    SlowlyVarying,
    Symmetrized,
    TruncatedPower,
    Uniform,
    counterexample_tail,
    parse_law,
)
from .measures import (
    ExpKernel,
    FilterModel,
    GeometricAtoms,
    PowerAtoms,
    SpectralMeasure,
    StepKernel,
    build_noise_law,
    sample_noise,
)
from .mellin import eval_catalog, eval_kernel, eval_measure, mellin_line, moment
from .simulate import (
    LevyModel,
    TailReport,
    verify_integral,
    verify_product,
    verify_slow_variation_sum,
    verify_weighted_sum,
)

__version__ = "0.1.0"
