"""Conjugate Gaussian inversion of severely ill-posed diagonal linear problems."""
# ruff: noqa: F401

from .asymptotics import (
    CrossoverIndex,
    FixedTau,
    IntegralEstimate,
    RatePrediction,
    TunedTau,
    crossover_asymptotic,
    decay_integral,
    grow_integral,
    predict_rates,
    solve_crossover,
)
from .equivalence import EquivalenceReport, Verdict, diagnose_equivalence, hs_terms
from .harness import (
    ExperimentRecord,
    FitResult,
    SweepConfig,
    fit_line,
    fit_rate,
    read_sweep_csv,
    run_mise_sweep,
    trace_rate_fit,
    write_sweep_csv,
)
from .posterior import (
    PosteriorSpectrum,
    SpcBreakdown,
    compute_posterior_spectrum,
    exact_spc,
    posterior_mean,
    posterior_trace,
)
from .random_fields import (
    FixedCoefficients,
    GaussianDraw,
    RngPolicy,
    draw_truth,
    synthesize_data,
)
from .spectral_model import (
    CoefficientVector,
    ModelParams,
    SpaceTag,
    SpectralProblem,
    ValidationError,
    build_algebraic_problem,
    build_exponential_problem,
    build_helmholtz_problem,
    load_problem,
    sobolev_norm,
)

__version__ = "0.1.0"
