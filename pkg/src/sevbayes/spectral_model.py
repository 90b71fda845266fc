"""Diagonalized linear inverse problems.

Everything lives in the shared eigenbasis of the forward operator, the prior
covariance and the noise covariance, so a problem is just three eigenvalue
sequences truncated at ``j_max`` modes:

    l_j      singular values of the forward map
    c0_j     prior covariance eigenvalues, j^(-2 alpha)
    c1_j     noise covariance eigenvalues, j^(-2 beta)

Singular values of severely ill-posed operators underflow after a few hundred
modes, so ``log_l`` is the primary representation and ``l`` is derived from it.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_J_MAX = 100_000


class ValidationError(ValueError):
    """Raised when a parameter or input breaks a documented constraint."""


@dataclass(frozen=True)
class ModelParams:
    s: float = 1.0
    b: float = 1.0
    alpha: float = 2.0
    beta: float = 0.0
    gamma: float = 1.0
    tau: float = 1.0
    n: float = 1.0
    j_max: int = DEFAULT_J_MAX

    def __post_init__(self):
        checks = [
            ("s", self.s > 0, "s > 0"),
            ("b", self.b > 0, "b > 0"),
            ("alpha", self.alpha > 0.5, "alpha > 1/2 (prior must be trace class)"),
            ("beta", self.beta >= 0, "beta >= 0"),
            ("gamma", self.gamma > 0, "gamma > 0"),
            ("tau", self.tau > 0, "tau > 0"),
            ("n", self.n > 0, "n > 0"),
        ]
        for name, ok, rule in checks:
            value = getattr(self, name)
            if not (math.isfinite(value) and ok):
                raise ValidationError(f"{name}={value!r} violates {rule}")
        if int(self.j_max) != self.j_max or self.j_max < 1:
            raise ValidationError(f"j_max={self.j_max!r} violates j_max >= 1 (integer)")
        object.__setattr__(self, "j_max", int(self.j_max))
        lam = self.lam
        if not (math.isfinite(lam) and lam > 0):
            raise ValidationError(f"lambda = 1/(n tau^2) = {lam!r} is not finite and positive")

    @property
    def lam(self) -> float:
        """Regularization parameter 1/(n tau^2)."""
        return 1.0 / (self.n * self.tau**2)

    @property
    def log_lam(self) -> float:
        return -math.log(self.n) - 2.0 * math.log(self.tau)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ExponentialDecay:
    s: float
    b: float
    kind = "exponential"


@dataclass(frozen=True)
class Helmholtz:
    k: float
    kind = "helmholtz"


@dataclass(frozen=True)
class AlgebraicDecay:
    ell: float
    kind = "algebraic"


ForwardKind = ExponentialDecay | Helmholtz | AlgebraicDecay


class SpaceTag(enum.Enum):
    TRUTH = "truth"
    DATA = "data"
    NOISE = "noise"
    POSTERIOR_MEAN = "posterior_mean"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients of an element of H against the shared eigenbasis."""

    coeffs: np.ndarray
    space_tag: SpaceTag = SpaceTag.TRUTH

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.ndim != 1:
            raise ValidationError("coefficient vector must be one-dimensional")
        if not np.all(np.isfinite(coeffs)):
            raise ValidationError("coefficient vector has non-finite entries")
        object.__setattr__(self, "coeffs", coeffs)

    def __len__(self):
        return self.coeffs.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    params: ModelParams
    forward_kind: ForwardKind
    log_l: np.ndarray = field(repr=False)
    modes: np.ndarray = field(init=False, repr=False)
    l: np.ndarray = field(init=False, repr=False)
    log_c0: np.ndarray = field(init=False, repr=False)
    log_c1: np.ndarray = field(init=False, repr=False)
    c0: np.ndarray = field(init=False, repr=False)
    c1: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        log_l = _frozen(self.log_l)
        if log_l.shape != (self.params.j_max,):
            raise ValidationError("log_l must have length j_max")
        if not np.all(np.isfinite(log_l)):
            raise ValidationError("log_l must be finite")
        j = np.arange(1, self.params.j_max + 1, dtype=float)
        log_j = np.log(j)
        set_ = object.__setattr__
        set_(self, "log_l", log_l)
        set_(self, "modes", _frozen(j))
        set_(self, "l", _frozen(np.exp(log_l)))
        set_(self, "log_c0", _frozen(-2.0 * self.params.alpha * log_j))
        set_(self, "log_c1", _frozen(-2.0 * self.params.beta * log_j))
        set_(self, "c0", _frozen(j ** (-2.0 * self.params.alpha)))
        set_(self, "c1", _frozen(j ** (-2.0 * self.params.beta)))

    @property
    def j_max(self) -> int:
        return self.params.j_max

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def effective_decay(self) -> tuple[float, float]:
        """(s, b) used by the rate predictors.

        Helmholtz singular values behave like 2 exp(-j); constants do not
        change rates, so they map to (1, 1).
        """
        if isinstance(self.forward_kind, ExponentialDecay):
            return self.forward_kind.s, self.forward_kind.b
        if isinstance(self.forward_kind, Helmholtz):
            return 1.0, 1.0
        raise ValidationError("algebraic problems have no exponential decay parameters")

    def with_noise_level(self, n: float, tau: float | None = None) -> "SpectralProblem":
        """Same operator and covariances at a different noise level / prior scale."""
        changes = {"n": n}
        if tau is not None:
            changes["tau"] = tau
        return SpectralProblem(self.params.replace(**changes), self.forward_kind, self.log_l)

    def vector(self, coeffs, space_tag: SpaceTag = SpaceTag.TRUTH) -> CoefficientVector:
        v = CoefficientVector(coeffs, space_tag)
        if len(v) != self.j_max:
            raise ValidationError(f"expected {self.j_max} coefficients, got {len(v)}")
        return v


def build_exponential_problem(params: ModelParams) -> SpectralProblem:
    """l_j = exp(-s j^b)."""
    j = np.arange(1, params.j_max + 1, dtype=float)
    log_l = -params.s * j**params.b
    return SpectralProblem(params, ExponentialDecay(params.s, params.b), log_l)


def helmholtz_log_singular_values(k: float, j_max: int) -> np.ndarray:
    j = np.arange(1, j_max + 1, dtype=float)
    x = np.sqrt(j * j - k * k)
    # log(1/cosh x) without overflowing cosh
    return -x - np.log1p(np.exp(-2.0 * x)) + math.log(2.0)


def build_helmholtz_problem(k: float, params: ModelParams) -> SpectralProblem:
    """Cauchy problem for the Helmholtz equation, l_j = 1/cosh(sqrt(j^2 - k^2)).

    Only small wave numbers 0 < k < 1 are supported. ``params.s`` and
    ``params.b`` are ignored.
    """
    if not (0.0 < k < 1.0):
        raise ValidationError(f"wave number k={k!r} must lie in (0, 1)")
    return SpectralProblem(params, Helmholtz(float(k)), helmholtz_log_singular_values(k, params.j_max))


def build_algebraic_problem(ell: float, params: ModelParams) -> SpectralProblem:
    """Mildly ill-posed comparison case, l_j = j^(-ell)."""
    if not (math.isfinite(ell) and ell > 0):
        raise ValidationError(f"ell={ell!r} must be positive")
    j = np.arange(1, params.j_max + 1, dtype=float)
    return SpectralProblem(params, AlgebraicDecay(float(ell)), -ell * np.log(j))


def sobolev_norm(u, gamma: float) -> float:
    """Truncated ||u||_gamma = sqrt(sum_j u_j^2 j^(2 gamma))."""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValidationError("sobolev_norm needs finite coefficients")
    j = np.arange(1, u.shape[0] + 1, dtype=float)
    with np.errstate(over="ignore"):
        total = math.fsum(u * u * j ** (2.0 * gamma))
    if not math.isfinite(total):
        warnings.warn("sobolev_norm overflowed; returning inf", RuntimeWarning, stacklevel=2)
        return math.inf
    return math.sqrt(total)


def prior_tail_bound(params: ModelParams) -> float:
    """Upper bound on the prior trace discarded by truncation.

    sum_{j > J} tau^2 j^(-2 alpha) <= tau^2 J^(1 - 2 alpha) / (2 alpha - 1).
    """
    two_a = 2.0 * params.alpha
    return params.tau**2 * params.j_max ** (1.0 - two_a) / (two_a - 1.0)


# -- JSON -------------------------------------------------------------------

def problem_to_dict(problem: SpectralProblem) -> dict:
    fk = problem.forward_kind
    if isinstance(fk, ExponentialDecay):
        forward = {"kind": "exponential", "s": fk.s, "b": fk.b}
    elif isinstance(fk, Helmholtz):
        forward = {"kind": "helmholtz", "k": fk.k}
    else:
        forward = {"kind": "algebraic", "ell": fk.ell}
    p = problem.params
    return {
        "forward": forward,
        "alpha": p.alpha,
        "beta": p.beta,
        "gamma": p.gamma,
        "tau": p.tau,
        "n": p.n,
        "j_max": p.j_max,
    }


def problem_from_dict(doc: dict) -> SpectralProblem:
    try:
        forward = doc["forward"]
        kind = forward["kind"]
        common = {key: doc[key] for key in ("alpha", "beta", "gamma", "tau", "n") if key in doc}
        if "j_max" in doc:
            common["j_max"] = int(doc["j_max"])
        if kind == "exponential":
            params = ModelParams(s=float(forward["s"]), b=float(forward["b"]), **common)
            return build_exponential_problem(params)
        if kind == "helmholtz":
            return build_helmholtz_problem(float(forward["k"]), ModelParams(**common))
        if kind == "algebraic":
            return build_algebraic_problem(float(forward["ell"]), ModelParams(**common))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed problem document: {exc!r}") from exc
    raise ValidationError(f"unknown forward kind {kind!r}")


def load_problem(path) -> SpectralProblem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


def save_problem(problem: SpectralProblem, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=2) + "\n")


def read_coefficients_csv(path) -> np.ndarray:
    """One value per line; line k holds coefficient k."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: not a number: {line!r}") from exc
    return np.array(values)


def write_coefficients_csv(coeffs, path) -> None:
    with open(path, "w", newline="\n") as fh:
        for v in np.asarray(coeffs, dtype=float):
            fh.write(f"{v:.17g}\n")
