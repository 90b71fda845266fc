"""Crossover index, integral asymptotics and predicted contraction rates.

Rates for severely ill-posed problems are logarithmic in the noise level, and
the quantities behind them span hundreds of orders of magnitude, so the root
finder and both quadrature oracles work with logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .spectral_model import SpectralProblem, ValidationError

RESIDUAL_TOL = 1e-10


# -- crossover index --------------------------------------------------------

@dataclass(frozen=True)
class CrossoverIndex:
    j_lambda: float
    lam: float
    residual: float


def _crossover_log_excess(x, a, b, t, log_lam):
    return -a * x**b + t * math.log(x) - log_lam


def solve_crossover(a: float, b: float, t: float, lam: float | None = None, *,
                    log_lam: float | None = None) -> CrossoverIndex:
    """Unique x >= 1 with exp(-a x^b) x^t = lam.

    Bisection on G(x) = -a x^b + t ln x - ln lam. Pass ``log_lam`` directly
    when lam itself would underflow.
    """
    if not (a > 0 and b > 0):
        raise ValidationError("solve_crossover needs a > 0 and b > 0")
    if log_lam is None:
        if lam is None or not lam > 0:
            raise ValidationError("lambda must be positive")
        log_lam = math.log(lam)
    elif lam is None:
        lam = math.exp(log_lam)
    if not -log_lam - a > 0:
        raise ValidationError(
            f"lambda too large: need exp(-a)/lambda > 1, got ln(1/lambda) - a = {-log_lam - a:.3g}")

    def G(x):
        return _crossover_log_excess(x, a, b, t, log_lam)

    lo, hi = 1.0, 2.0
    while G(hi) >= 0:
        lo, hi = hi, 2.0 * hi
    g_mid = G(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = G(mid)
        if g_mid > 0:
            lo = mid
        else:
            hi = mid
        if abs(g_mid) <= 1e-3 * RESIDUAL_TOL:
            break
    # the closer bracket end
    root = lo if abs(G(lo)) <= abs(G(hi)) else hi
    return CrossoverIndex(j_lambda=root, lam=lam, residual=math.expm1(G(root)))


def crossover_asymptotic(a: float, b: float, lam: float | None = None, *,
                         log_lam: float | None = None) -> float:
    """Leading-order crossover (ln lambda^(-1/a))^(1/b)."""
    if log_lam is None:
        if lam is None or not 0 < lam < 1:
            raise ValidationError("crossover_asymptotic needs 0 < lambda < 1")
        log_lam = math.log(lam)
    if not log_lam < 0:
        raise ValidationError("crossover_asymptotic needs lambda < 1")
    return (-log_lam / a) ** (1.0 / b)


# -- integral oracles -------------------------------------------------------

@dataclass(frozen=True)
class IntegralEstimate:
    """A positive integral held as its logarithm."""

    log_value: float
    rel_error: float
    log_asymptote: float = math.nan

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709 else math.inf

    @property
    def asymptote_ratio(self) -> float:
        """Integral divided by the comparison envelope (the constant M)."""
        return math.exp(self.log_value - self.log_asymptote)


def _segments(length: float, scale: float):
    """Breakpoints 0, scale, 4 scale, 16 scale, ... capped at ``length``."""
    edges = [0.0]
    step = scale
    while edges[-1] < length:
        edges.append(min(step, length))
        step *= 4.0
    return edges


def _quad_pieces(f, edges, **kw):
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=500, **kw)
        total += val
        err += e
    return total, err


def grow_integral(a: float, b: float, c: float, J: float) -> IntegralEstimate:
    """int_1^J exp(a x^b) x^c dx, returned in log form.

    Substituting y = x^b and t = J^b - y gives
    exp(a J^b)/b * int_0^{J^b - 1} exp(-a t) (J^b - t)^p dt with p = (c+1)/b - 1,
    whose integrand is bounded by one near t = 0.
    """
    if not (a > 0 and b > 0):
        raise ValidationError("grow_integral needs a > 0 and b > 0")
    if not J > 1:
        raise ValidationError("grow_integral needs J > 1")
    Y = J**b
    p = (c + 1.0) / b - 1.0
    log_Y = math.log(Y)

    def f(t):
        return math.exp(-a * t + p * (math.log(Y - t) - log_Y))

    total, err = _quad_pieces(f, _segments(Y - 1.0, 1.0 / a))
    log_scale = a * Y + p * log_Y - math.log(b)
    log_value = log_scale + math.log(total)
    log_asym = -math.log(a * b) + a * Y + (c - b + 1.0) * math.log(J)
    return IntegralEstimate(log_value, err / total, log_asym)


def decay_integral(a: float, b: float, c: float, J: float) -> IntegralEstimate:
    """int_J^inf exp(-a x^b) x^c dx, returned in log form.

    ``asymptote_ratio`` is the integral over exp(-a J^b) J^(c-b+1), i.e. the
    empirical constant in the tail bound (it tends to 1/(ab)). Undefined at J = 0.
    """
    if not (a > 0 and b > 0):
        raise ValidationError("decay_integral needs a > 0 and b > 0")
    if not J >= 0:
        raise ValidationError("decay_integral needs J >= 0")
    Y = J**b
    p = (c + 1.0) / b - 1.0
    if Y == 0.0:
        if not p > -1.0:
            raise ValidationError("integral diverges at x = 0 (need c > -1)")
        edges = _segments(4.0**6 / a, 1.0 / a)
        head, e0 = integrate.quad(lambda t: math.exp(-a * t), 0.0, edges[1],
                                  weight="alg", wvar=(p, 0.0), epsabs=0.0, epsrel=1e-13)
        mid, e1 = _quad_pieces(lambda t: math.exp(-a * t + p * math.log(t)), edges[1:])
        tail, e2 = integrate.quad(lambda t: math.exp(-a * t + p * math.log(t)), edges[-1], math.inf,
                                  epsabs=0.0, epsrel=1e-13, limit=500)
        total, err = head + mid + tail, e0 + e1 + e2
        return IntegralEstimate(math.log(total) - math.log(b), err / total)

    log_Y = math.log(Y)

    def f(t):
        return math.exp(-a * t + p * math.log1p(t / Y))

    edges = _segments(4.0**8 / a, 1.0 / a)
    total, err = _quad_pieces(f, edges)
    tail, e2 = integrate.quad(f, edges[-1], math.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    total += tail
    err += e2
    log_value = -a * Y + p * log_Y - math.log(b) + math.log(total)
    log_env = -a * Y + (c - b + 1.0) * math.log(J)
    return IntegralEstimate(log_value, err / total, log_env)


# -- rate predictions -------------------------------------------------------

@dataclass(frozen=True)
class FixedTau:
    tau: float = 1.0

    def __call__(self, n):
        return self.tau * np.ones_like(np.asarray(n, dtype=float))


@dataclass(frozen=True)
class TunedTau:
    """Prior scale shrinking with the noise level.

    The default schedule sits on the lower window edge, tau(n) = n^(sigma - 1/2),
    which keeps n tau^2 = n^(2 sigma) growing.
    """

    sigma: float = 0.25
    schedule: Callable | None = field(default=None, compare=False)

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.schedule is not None:
            return np.asarray(self.schedule(n), dtype=float)
        return n ** (self.sigma - 0.5)


WINDOW_SLACK = 10.0


def check_tuned_window(regime: TunedTau, alpha: float, gamma: float, b: float,
                       n_grid=None) -> None:
    """Reject schedules outside n^(sigma-1/2) <~ tau(n) <~ (ln n)^((alpha-gamma-1/2)/b).

    "<~" is checked with a fixed slack factor on n = 10^2 .. 10^100.
    """
    if not regime.sigma > 0:
        raise ValidationError("TunedTau needs sigma > 0")
    n = np.logspace(2, 100, 99) if n_grid is None else np.asarray(n_grid, dtype=float)
    tau = regime(n)
    lower = n ** (regime.sigma - 0.5)
    upper = np.log(n) ** ((alpha - gamma - 0.5) / b)
    if np.any(tau * WINDOW_SLACK < lower) or np.any(tau > WINDOW_SLACK * upper):
        raise ValidationError("tau(n) schedule leaves the admissible window")


@dataclass(frozen=True)
class RatePrediction:
    alpha: float
    gamma: float
    s: float
    b: float
    regime: FixedTau | TunedTau

    @property
    def mise_exponent(self) -> float:
        """Power of ln(lambda^(-1/(2s))) in the MISE envelope (tau fixed)."""
        if self.b >= 1:
            noise = 2 * self.alpha / self.b
        else:
            noise = (2 * self.alpha + self.b - 1) / self.b
        return min(noise, 2 * self.gamma / self.b)

    @property
    def mise_is_upper_bound(self) -> bool:
        """For b < 1 the MISE envelope is only an upper bound."""
        return self.b < 1

    @property
    def trace_exponent(self) -> float:
        return (2 * self.alpha - 1) / self.b

    @property
    def contraction_exponent(self) -> float:
        if isinstance(self.regime, TunedTau):
            return self.gamma / self.b
        return min(self.gamma, self.alpha - 0.5) / self.b

    def tau(self, n):
        return self.regime(n)

    def lam(self, n):
        n = np.asarray(n, dtype=float)
        return 1.0 / (n * self.tau(n) ** 2)

    def _log_scale(self, n):
        # ln(lambda^(-1/(2s)))
        n = np.asarray(n, dtype=float)
        return (np.log(n) + 2.0 * np.log(self.tau(n))) / (2.0 * self.s)

    def mise_rate(self, n):
        L = self._log_scale(n)
        if self.b >= 1:
            noise_pow = 2 * self.alpha / self.b
        else:
            noise_pow = (2 * self.alpha + self.b - 1) / self.b
        # 1/(n lambda) = tau^2
        return self.tau(n) ** 2 * L ** (-noise_pow) + L ** (-2 * self.gamma / self.b)

    def trace_rate(self, n):
        return self.tau(n) ** 2 * self._log_scale(n) ** (-self.trace_exponent)

    def contraction_rate(self, n):
        n = np.asarray(n, dtype=float)
        return np.log(n) ** (-self.contraction_exponent)

    def contraction_rate_full(self, n):
        """(ln n tau^2)^(-gamma/b) + tau (ln n tau^2)^(-(alpha-1/2)/b)."""
        n = np.asarray(n, dtype=float)
        tau = self.tau(n)
        L = np.log(n * tau**2)
        return L ** (-self.gamma / self.b) + tau * L ** (-(self.alpha - 0.5) / self.b)

    def decreasing_from(self) -> float:
        """All envelopes decrease in n once ln(n tau^2) > 2s, i.e. lambda < e^(-2s)."""
        return math.exp(2 * self.s)


def predict_rates(problem: SpectralProblem, regime: FixedTau | TunedTau | None = None) -> RatePrediction:
    regime = FixedTau() if regime is None else regime
    s, b = problem.effective_decay
    p = problem.params
    if isinstance(regime, TunedTau):
        check_tuned_window(regime, p.alpha, p.gamma, b)
    return RatePrediction(alpha=p.alpha, gamma=p.gamma, s=s, b=b, regime=regime)
