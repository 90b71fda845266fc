"""Posterior-versus-prior equivalence checks (Feldman-Hajek conditions).

The three conditions are statements about infinite sequences; here they are
decided from the truncated sequences plus a tail extrapolation:

  (i)   c_j / (tau^2 c0_j) bounded away from 0,
  (ii)  posterior mean in the Cameron-Martin space H^alpha,
  (iii) t_j = 1 - tau^2 c0_j / c_j square summable.

Because c_j / (tau^2 c0_j) = 1 / (1 + e^{g_j}), the Hilbert-Schmidt terms are
exactly t_j = -e^{g_j}, so everything is read off the log signal ratio.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .posterior import PosteriorSpectrum
from .spectral_model import CoefficientVector, ValidationError, sobolev_norm

HEAD_FRACTION_EQUIVALENT = 0.1
HEAD_FRACTION_SINGULAR = 10.0
TAIL_WINDOW = 0.1


class Verdict(str, enum.Enum):
    EQUIVALENT = "Equivalent"
    SINGULAR = "Singular"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EquivalenceReport:
    ratio_min: float
    ratio_max: float
    k_hat: float
    hs_sum: float
    hs_tail_estimate: float
    tail_log_slope: float
    mean_in_cm_norm: float
    verdict: Verdict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        rows = [
            ("ratio_min  c_j/(tau^2 c0_j)", f"{self.ratio_min:.6g}"),
            ("ratio_max", f"{self.ratio_max:.6g}"),
            ("K_hat = max_j e^{g_j}", f"{self.k_hat:.6g}"),
            ("hs_sum  sum t_j^2", f"{self.hs_sum:.6g}"),
            ("hs tail estimate", f"{self.hs_tail_estimate:.6g}"),
            ("tail log-slope of |t_j|", f"{self.tail_log_slope:.6g}"),
            ("||m||_{H^alpha}", f"{self.mean_in_cm_norm:.6g}"),
            ("verdict", self.verdict.value),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def hs_terms(spec: PosteriorSpectrum) -> np.ndarray:
    """t_j = 1 - tau^2 c0_j / c_j, which equals -l_j^2 c0_j / (lambda c1_j)."""
    return -np.exp(spec.log_snr)


def log_abs_hs_terms(spec: PosteriorSpectrum) -> np.ndarray:
    """ln |t_j|, finite even where t_j underflows."""
    return np.asarray(spec.log_snr)


def tail_log_slope(log_t: np.ndarray, window: float = TAIL_WINDOW) -> float:
    """Least-squares slope of ln|t_j| against ln j over the last ``window`` of modes."""
    j_max = log_t.shape[0]
    start = max(1, int(j_max * (1.0 - window))) if j_max > 10 else 1
    j = np.arange(start, j_max + 1, dtype=float)
    x = np.log(j)
    y = log_t[start - 1:]
    if x.shape[0] < 2 or np.ptp(x) == 0:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


def _log_tail_estimate(log_t_last: float, j_max: int, slope: float) -> float:
    """ln of sum_{j > J} t_j^2 for |t_j| ~ |t_J| (j/J)^slope, via the integral."""
    q = 2.0 * slope
    if not q < -1.0:
        return math.inf
    return 2.0 * log_t_last + math.log(j_max) - math.log(-q - 1.0)


def diagnose_equivalence(spec: PosteriorSpectrum, m: CoefficientVector | None = None) -> EquivalenceReport:
    problem = spec.problem
    if m is not None and len(m) != problem.j_max:
        raise ValidationError("posterior mean does not belong to this spectrum's problem")
    g = np.asarray(spec.log_snr)
    ratios = expit(-g)
    ratio_min, ratio_max = float(ratios.min()), float(ratios.max())
    k_hat = float(np.exp(min(g.max(), 709.0)))

    log_head = float(logsumexp(2.0 * g))
    slope = tail_log_slope(g)
    log_tail = _log_tail_estimate(float(g[-1]), problem.j_max, slope)
    hs_sum = math.exp(log_head) if log_head < 709 else math.inf
    tail = math.exp(log_tail) if log_tail < 709 else math.inf

    cm_norm = 0.0 if m is None else sobolev_norm(m.coeffs, problem.params.alpha)

    # condition (i): the ratio decays to 0 iff g grows without bound along the tail
    ratios_ok = ratio_min > 0 and not (slope > 0 and g[-1] > g[0])
    mean_ok = math.isfinite(cm_norm)
    tail_fraction = math.exp(log_tail - log_head) if math.isfinite(log_tail) else math.inf
    if not ratios_ok or not mean_ok or tail_fraction > HEAD_FRACTION_SINGULAR:
        verdict = Verdict.SINGULAR
    elif tail_fraction < HEAD_FRACTION_EQUIVALENT:
        verdict = Verdict.EQUIVALENT
    else:
        verdict = Verdict.INCONCLUSIVE
    return EquivalenceReport(
        ratio_min=ratio_min,
        ratio_max=ratio_max,
        k_hat=k_hat,
        hs_sum=hs_sum,
        hs_tail_estimate=tail,
        tail_log_slope=slope,
        mean_in_cm_norm=cm_norm,
        verdict=verdict,
    )
