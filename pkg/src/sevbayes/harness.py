"""Noise-level sweeps: Monte-Carlo MISE against the closed form, plus rate fits."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from .asymptotics import FixedTau, TunedTau, predict_rates
from .posterior import compute_posterior_spectrum, exact_spc, posterior_mean
from .random_fields import (
    DEFAULT_EPSILON,
    FixedCoefficients,
    GaussianDraw,
    RngPolicy,
    TruthSpec,
    draw_truth,
    synthesize_data,
    truth_from_csv,
)
from .spectral_model import (
    AlgebraicDecay,
    SpectralProblem,
    ValidationError,
    problem_from_dict,
    problem_to_dict,
)

log = logging.getLogger(__name__)

DESK_J_MAX = 20_000
DESK_REALIZATIONS = 200
DESK_K_MAX = 60
PAPER_J_MAX = 100_000
PAPER_REALIZATIONS = 1000
PAPER_K_MAX = 100
DEFAULT_FIT_EXCLUDE = 5
SEED_ENV = "SBL_SEED"

CSV_COLUMNS = ("n", "lambda", "mise_mc", "mise_mc_stderr", "mise_exact", "trace", "spc", "eps_theory")


def decade_grid(k_min: int, k_max: int) -> list[float]:
    return [10.0**k for k in range(k_min, k_max + 1)]


@dataclass
class SweepConfig:
    problem: SpectralProblem
    n_grid: list = field(default_factory=lambda: decade_grid(1, DESK_K_MAX))
    realizations: int = DESK_REALIZATIONS
    tau_schedule: FixedTau | TunedTau = field(default_factory=FixedTau)
    master_seed: int = 0
    output_path: str | None = None
    truth: TruthSpec | None = None
    noiseless: bool = False
    redraw_truth: bool = False
    fit_exclude: int = DEFAULT_FIT_EXCLUDE

    def __post_init__(self):
        grid = [float(n) for n in self.n_grid]
        if not grid or any(not (n > 0 and math.isfinite(n)) for n in grid):
            raise ValidationError("n_grid must hold finite positive noise levels")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("n_grid must be strictly increasing")
        self.n_grid = grid
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ValidationError("realizations must be a positive integer")
        self.realizations = int(self.realizations)
        if self.truth is None:
            self.truth = GaussianDraw(self.problem.params.gamma, DEFAULT_EPSILON)
        RngPolicy(self.master_seed)  # validates the seed range

    @property
    def rng(self) -> RngPolicy:
        return RngPolicy(self.master_seed)

    def to_dict(self) -> dict:
        doc = {"problem": problem_to_dict(self.problem), "n_grid": self.n_grid,
               "realizations": self.realizations, "master_seed": self.master_seed,
               "noiseless": self.noiseless, "redraw_truth": self.redraw_truth,
               "fit_exclude": self.fit_exclude}
        if isinstance(self.tau_schedule, FixedTau):
            doc["tau_schedule"] = {"kind": "fixed", "tau": self.tau_schedule.tau}
        else:
            doc["tau_schedule"] = {"kind": "tuned", "sigma": self.tau_schedule.sigma}
        if isinstance(self.truth, GaussianDraw):
            doc["truth"] = {"kind": "gaussian", "gamma": self.truth.gamma,
                            "epsilon": self.truth.epsilon, "seed_id": self.truth.seed_id}
        else:
            doc["truth"] = {"kind": "fixed", "coeffs": list(self.truth.coeffs)}
        if self.output_path is not None:
            doc["output_path"] = self.output_path
        return doc


def _truth_from_doc(doc, gamma) -> TruthSpec:
    kind = doc.get("kind", "gaussian")
    if kind == "gaussian":
        return GaussianDraw(float(doc.get("gamma", gamma)), float(doc.get("epsilon", DEFAULT_EPSILON)),
                            int(doc.get("seed_id", 0)))
    if kind == "fixed":
        return FixedCoefficients(tuple(float(v) for v in doc["coeffs"]))
    if kind == "csv":
        return truth_from_csv(doc["path"])
    raise ValidationError(f"unknown truth kind {kind!r}")


def config_from_dict(doc: dict) -> SweepConfig:
    """Sweep config from JSON; problem fields may be nested under "problem" or top level."""
    try:
        problem = problem_from_dict(doc.get("problem", doc))
        if "n_grid" in doc:
            grid = doc["n_grid"]
        else:
            k_min, k_max = doc.get("k_range", (1, DESK_K_MAX))
            grid = decade_grid(int(k_min), int(k_max))
        sched = doc.get("tau_schedule", {"kind": "fixed", "tau": problem.params.tau})
        if sched.get("kind", "fixed") == "fixed":
            tau_schedule = FixedTau(float(sched.get("tau", 1.0)))
        elif sched["kind"] == "tuned":
            tau_schedule = TunedTau(float(sched.get("sigma", 0.25)))
        else:
            raise ValidationError(f"unknown tau schedule {sched['kind']!r}")
        truth = _truth_from_doc(doc["truth"], problem.params.gamma) if "truth" in doc else None
        return SweepConfig(
            problem=problem,
            n_grid=grid,
            realizations=doc.get("realizations", DESK_REALIZATIONS),
            tau_schedule=tau_schedule,
            master_seed=int(doc.get("master_seed", 0)),
            output_path=doc.get("output_path"),
            truth=truth,
            noiseless=bool(doc.get("noiseless", False)),
            redraw_truth=bool(doc.get("redraw_truth", False)),
            fit_exclude=int(doc.get("fit_exclude", DEFAULT_FIT_EXCLUDE)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed sweep config: {exc!r}") from exc


@dataclass(frozen=True)
class ExperimentRecord:
    n: float
    lam: float
    mise_mc: float
    mise_mc_stderr: float
    mise_exact: float
    trace: float
    spc: float
    eps_theory: float

    @property
    def z_score(self) -> float:
        if not self.mise_mc_stderr > 0:
            return math.nan
        return (self.mise_mc - self.mise_exact) / self.mise_mc_stderr


def _sweep_row(config: SweepConfig, row: int, n: float, truth_fixed) -> ExperimentRecord:
    tau = float(config.tau_schedule(n))
    problem = config.problem.with_noise_level(n, tau)
    rng = config.rng
    if config.redraw_truth and isinstance(config.truth, GaussianDraw):
        spec_truth = GaussianDraw(config.truth.gamma, config.truth.epsilon, seed_id=row + 1)
        u = draw_truth(spec_truth, problem.j_max, rng).coeffs
    else:
        u = truth_fixed
    spec = compute_posterior_spectrum(problem)
    exact = exact_spc(problem, u, spec)

    errors = np.empty(config.realizations)
    for r in range(config.realizations):
        d = synthesize_data(problem, u, rng, (row, r), noiseless=config.noiseless)
        m = posterior_mean(spec, d.coeffs).coeffs
        errors[r] = np.sum((m - u) ** 2)
    mise_mc = math.fsum(errors) / config.realizations
    if config.realizations > 1:
        stderr = float(np.std(errors, ddof=1)) / math.sqrt(config.realizations)
    else:
        stderr = math.nan

    if isinstance(problem.forward_kind, AlgebraicDecay):
        eps = math.nan
    else:
        eps = float(predict_rates(problem, config.tau_schedule).contraction_rate(n))
    return ExperimentRecord(n=n, lam=problem.lam, mise_mc=mise_mc, mise_mc_stderr=stderr,
                            mise_exact=exact.mise_exact, trace=exact.trace, spc=exact.spc,
                            eps_theory=eps)


def run_mise_sweep(config: SweepConfig, threads: int = 1, sink=None) -> list[ExperimentRecord]:
    """One row per noise level; rows come back (and reach ``sink``) in grid order.

    Every realization draws from its own (row, realization) stream, so the output
    does not depend on ``threads``.
    """
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    j_max = config.problem.j_max
    truth = draw_truth(config.truth, j_max, config.rng).coeffs
    records = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = pool.map(lambda item: _sweep_row(config, item[0], item[1], truth),
                        enumerate(config.n_grid))
        for rec in rows:
            log.info("n=%.3g mise_mc=%.6g mise_exact=%.6g", rec.n, rec.mise_mc, rec.mise_exact)
            records.append(rec)
            if sink is not None:
                sink(rec)
    return records


# -- CSV --------------------------------------------------------------------

def format_row(rec: ExperimentRecord) -> str:
    return ",".join(f"{v:.17g}" for v in astuple(rec))


def write_sweep_csv(records, path_or_file) -> None:
    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "w", newline="\n") as fh:
            write_sweep_csv(records, fh)
        return
    path_or_file.write(",".join(CSV_COLUMNS) + "\n")
    for rec in records:
        path_or_file.write(format_row(rec) + "\n")


def read_sweep_csv(path_or_file) -> list[ExperimentRecord]:
    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, newline="") as fh:
            return read_sweep_csv(fh)
    reader = csv.reader(path_or_file)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise ValidationError(f"sweep CSV header must be {','.join(CSV_COLUMNS)}")
    records = []
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        try:
            records.append(ExperimentRecord(*(float(v) for v in row)))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"line {lineno}: bad sweep row {row!r}") from exc
    return records


def sweep_csv_text(records) -> str:
    buf = io.StringIO()
    write_sweep_csv(records, buf)
    return buf.getvalue()


# -- rate fits --------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    x_transform: str
    y_transform: str
    n_points: int
    excluded: int = 0
    x: tuple = field(default=(), repr=False)
    y: tuple = field(default=(), repr=False)

    def summary(self) -> str:
        return (f"slope={self.slope:.6f} intercept={self.intercept:.6f} "
                f"r_squared={self.r_squared:.6f} points={self.n_points} "
                f"excluded_first={self.excluded}\n"
                f"x = {self.x_transform}, y = {self.y_transform}")

    def plot_tsv(self) -> str:
        lines = [f"# x = {self.x_transform}\ty = {self.y_transform}"]
        lines += [f"{a:.17g}\t{b:.17g}" for a, b in zip(self.x, self.y)]
        return "\n".join(lines) + "\n"


def fit_line(x, y, x_transform="x", y_transform="y", excluded=0) -> FitResult:
    """Ordinary least squares y = slope x + intercept.

    R^2 is 1 - SS_res/SS_tot; when SS_tot = 0 it is defined as 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.shape[0] < 2:
        raise ValidationError("need at least two paired points to fit")
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0.0:
        raise ValidationError("degenerate fit: all x values are equal")
    slope = float(np.dot(xc, y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    if ss_tot == 0.0:
        warnings.warn("SS_tot = 0 (constant response); reporting R^2 = 0", RuntimeWarning, stacklevel=2)
        r2 = 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(slope, intercept, r2, x_transform, y_transform, int(x.shape[0]), excluded,
                     tuple(x.tolist()), tuple(y.tolist()))


RATE_COLUMNS = {f.name for f in fields(ExperimentRecord)} - {"n", "lam", "mise_mc_stderr"}


def fit_rate(records, exclude: int = DEFAULT_FIT_EXCLUDE, column: str = "mise_mc") -> FitResult:
    """Regress -1/2 ln(column) on ln(ln(sqrt(n))), dropping the first ``exclude`` rows."""
    if column not in RATE_COLUMNS:
        raise ValidationError(f"cannot fit column {column!r}")
    if exclude < 0:
        raise ValidationError("exclude must be non-negative")
    used = list(records)[exclude:]
    if len(used) < 3:
        raise ValidationError("rate fit needs at least 3 records after exclusion")
    n = np.array([r.n for r in used])
    vals = np.array([getattr(r, column) for r in used])
    if np.any(vals <= 0) or np.any(n <= 1):
        raise ValidationError(f"rate fit needs positive {column} and n > 1")
    x = np.log(np.log(np.sqrt(n)))
    y = -0.5 * np.log(vals)
    return fit_line(x, y, "ln(ln(sqrt(n)))", f"-0.5*ln({column})", excluded=exclude)


def trace_rate_fit(problem: SpectralProblem, n_grid) -> FitResult:
    """Regress -ln Tr(C) on ln(ln(sqrt(n))) at fixed prior scale; no sampling involved."""
    n = np.asarray(n_grid, dtype=float)
    traces = []
    for nk in n:
        spec = compute_posterior_spectrum(problem.with_noise_level(float(nk)))
        traces.append(math.fsum(spec.c))
    x = np.log(np.log(np.sqrt(n)))
    y = -np.log(np.array(traces))
    return fit_line(x, y, "ln(ln(sqrt(n)))", "-ln(trace)")
