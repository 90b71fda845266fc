"""Exact conjugate posterior in coefficient space.

With prior N(0, tau^2 C0) and data d = L u + n^(-1/2) xi, xi ~ N(0, C1), the
posterior is N(m, C) with, mode by mode,

    c_j = tau^2 c0_j / (1 + e^{g_j}),     a_j l_j = e^{g_j} / (1 + e^{g_j}),

where g_j = ln(l_j^2 c0_j / (lambda c1_j)) is the log signal-to-regularization
ratio. Everything is evaluated from g_j so no product of underflowed singular
values is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .spectral_model import CoefficientVector, SpaceTag, SpectralProblem, ValidationError


def ordered_sum(values) -> float:
    """Sum in ascending-j order, correctly rounded.

    ``math.fsum`` tracks exact partials, so the result does not depend on how
    the tiny tail terms compare with the head.
    """
    return math.fsum(np.asarray(values, dtype=float).ravel())


@dataclass(frozen=True, eq=False)
class PosteriorSpectrum:
    problem: SpectralProblem = field(repr=False)
    log_snr: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    log_a: np.ndarray = field(repr=False)
    shrinkage: np.ndarray = field(repr=False)
    residual_factor: np.ndarray = field(repr=False)

    @property
    def lam(self) -> float:
        return self.problem.lam

    @property
    def tau(self) -> float:
        return self.problem.params.tau


def log_signal_ratio(problem: SpectralProblem) -> np.ndarray:
    """g_j = -ln(lambda) + 2 ln l_j + ln c0_j - ln c1_j."""
    return -problem.params.log_lam + 2.0 * problem.log_l + problem.log_c0 - problem.log_c1


def compute_posterior_spectrum(problem: SpectralProblem) -> PosteriorSpectrum:
    g = log_signal_ratio(problem)
    tau2 = problem.params.tau**2
    # expit/logaddexp saturate cleanly for |g| beyond the exp range
    shrink = expit(g)              # a_j l_j
    resid = expit(-g)              # 1 - a_j l_j
    c = tau2 * problem.c0 * resid
    log_a = (-problem.params.log_lam + problem.log_l + problem.log_c0 - problem.log_c1
             - np.logaddexp(0.0, g))
    a = np.exp(log_a)
    arrays = [g, c, a, log_a, shrink, resid]
    for arr in arrays:
        arr.flags.writeable = False
    return PosteriorSpectrum(problem, *arrays)


def posterior_mean(spec: PosteriorSpectrum, d) -> CoefficientVector:
    """m_j = a_j d_j."""
    d = np.asarray(d, dtype=float)
    if d.shape != (spec.problem.j_max,):
        raise ValidationError(f"data has {d.shape[0] if d.ndim else 0} modes, problem has {spec.problem.j_max}")
    return CoefficientVector(spec.a * d, SpaceTag.POSTERIOR_MEAN)


def posterior_trace(spec: PosteriorSpectrum) -> float:
    return ordered_sum(spec.c)


def precision_form(problem: SpectralProblem, d=None):
    """Posterior covariance (and mean, if data given) from the precision form.

    C^{-1} = n L* C1^{-1} L + tau^{-2} C0^{-1} and (1/n) C^{-1} m = L* C1^{-1} d.
    Only meant as a cross-check on small, non-underflowing problems.
    """
    p = problem.params
    prec = p.n * problem.l**2 / problem.c1 + 1.0 / (p.tau**2 * problem.c0)
    c = 1.0 / prec
    if d is None:
        return c
    m = p.n * c * problem.l * np.asarray(d, dtype=float) / problem.c1
    return c, m


@dataclass(frozen=True)
class SpcBreakdown:
    mise_exact: float
    trace: float
    spc: float
    noise_term: float
    bias_term: float

    def as_row(self) -> dict:
        return dict(mise_exact=self.mise_exact, trace=self.trace, spc=self.spc,
                    noise_term=self.noise_term, bias_term=self.bias_term)


def noise_term(spec: PosteriorSpectrum) -> float:
    """(1/n) sum_j a_j^2 c1_j, the variance part of the MISE."""
    p = spec.problem.params
    return ordered_sum(np.exp(2.0 * spec.log_a + spec.problem.log_c1 - math.log(p.n)))


def bias_term(spec: PosteriorSpectrum, u_truth) -> float:
    """sum_j (1 - a_j l_j)^2 u_j^2, the regularization bias."""
    u = np.asarray(u_truth, dtype=float)
    if u.shape != (spec.problem.j_max,):
        raise ValidationError("truth length does not match the problem")
    return ordered_sum((spec.residual_factor * u) ** 2)


def exact_spc(problem: SpectralProblem, u_truth, spec: PosteriorSpectrum | None = None) -> SpcBreakdown:
    """Closed-form MISE, trace and squared posterior contraction.

    SPC = E ||m - u||^2 + Tr(C), with the MISE split into noise and bias parts.
    """
    if spec is None:
        spec = compute_posterior_spectrum(problem)
    elif spec.problem is not problem:
        raise ValidationError("spectrum was computed for a different problem")
    noise = noise_term(spec)
    bias = bias_term(spec, u_truth)
    trace = posterior_trace(spec)
    mise = noise + bias
    return SpcBreakdown(mise_exact=mise, trace=trace, spc=mise + trace,
                        noise_term=noise, bias_term=bias)
