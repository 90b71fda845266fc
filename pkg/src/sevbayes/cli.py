"""Command-line entry point.

Subcommands: posterior, mise-sweep, rate-fit, diagnose-equivalence, predict.
Exit status is 0 on success, 1 on validation errors and 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import harness
from .asymptotics import FixedTau, TunedTau, predict_rates
from .equivalence import diagnose_equivalence
from .posterior import compute_posterior_spectrum, posterior_mean, posterior_trace
from .random_fields import GaussianDraw, RngPolicy, draw_truth, synthesize_data
from .spectral_model import (
    ValidationError,
    problem_from_dict,
    read_coefficients_csv,
    write_coefficients_csv,
)

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _load_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def _resolve_seed(args, fallback: int) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(harness.SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValidationError(f"{harness.SEED_ENV}={env!r} is not an integer") from exc
    return fallback


def _problem_doc(args) -> dict:
    if not args.config:
        raise ValidationError("--config PATH is required")
    doc = _load_json(args.config)
    doc = dict(doc.get("problem", doc))
    if args.modes is not None:
        doc["j_max"] = args.modes
    return doc


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_posterior(args) -> int:
    problem = problem_from_dict(_problem_doc(args))
    if not args.data:
        raise ValidationError("posterior needs --data PATH (one coefficient per line)")
    d = read_coefficients_csv(args.data)
    spec = compute_posterior_spectrum(problem)
    m = posterior_mean(spec, d)
    trace = posterior_trace(spec)
    if args.out:
        write_coefficients_csv(m.coeffs, args.out)
    else:
        for v in m.coeffs:
            print(f"{v:.17g}")
    print(f"trace {trace:.17g}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _sweep_config(args) -> harness.SweepConfig:
    if args.config:
        doc = _load_json(args.config)
    else:
        doc = {"forward": {"kind": "exponential", "s": 1.0, "b": 1.0},
               "alpha": 2.0, "beta": 0.0, "gamma": 1.0, "tau": 1.0, "n": 1.0}
    doc = dict(doc)
    if "problem" not in doc:
        doc["problem"] = {k: doc[k] for k in ("forward", "alpha", "beta", "gamma", "tau", "n", "j_max") if k in doc}
    doc["problem"] = dict(doc["problem"])
    if args.full_scale:
        doc["problem"].setdefault("j_max", harness.PAPER_J_MAX)
        doc.setdefault("realizations", harness.PAPER_REALIZATIONS)
        if "n_grid" not in doc:
            doc.setdefault("k_range", [1, harness.PAPER_K_MAX])
    doc["problem"].setdefault("j_max", harness.DESK_J_MAX)
    if args.modes is not None:
        doc["problem"]["j_max"] = args.modes
    if args.realizations is not None:
        doc["realizations"] = args.realizations
    doc["master_seed"] = _resolve_seed(args, int(doc.get("master_seed", 0)))
    return harness.config_from_dict(doc)


def cmd_mise_sweep(args) -> int:
    config = _sweep_config(args)
    out = args.out or config.output_path
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(",".join(harness.CSV_COLUMNS) + "\n")
            harness.run_mise_sweep(config, threads=args.threads,
                                   sink=lambda rec: (fh.write(harness.format_row(rec) + "\n"), fh.flush()))
    else:
        records = harness.run_mise_sweep(config, threads=args.threads)
        harness.write_sweep_csv(records, sys.stdout)
    return EXIT_OK


def cmd_rate_fit(args) -> int:
    if not args.input:
        raise ValidationError("rate-fit needs a sweep CSV (positional argument)")
    records = harness.read_sweep_csv(args.input)
    fit = harness.fit_rate(records, exclude=args.exclude, column=args.column)
    print(fit.summary())
    print(f"# metadata: first {args.exclude} grid points excluded as pre-asymptotic")
    if args.out:
        _emit(fit.plot_tsv(), args.out)
    else:
        sys.stdout.write(fit.plot_tsv())
    return EXIT_OK


def cmd_diagnose(args) -> int:
    problem = problem_from_dict(_problem_doc(args))
    spec = compute_posterior_spectrum(problem)
    if args.data:
        d = read_coefficients_csv(args.data)
    else:
        rng = RngPolicy(_resolve_seed(args, 0))
        u = draw_truth(GaussianDraw(problem.params.gamma), problem.j_max, rng)
        d = synthesize_data(problem, u.coeffs, rng, 0).coeffs
    report = diagnose_equivalence(spec, posterior_mean(spec, d))
    print(report.table())
    if args.out:
        _emit(report.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    problem = problem_from_dict(_problem_doc(args))
    regime = TunedTau(args.sigma) if args.tuned else FixedTau(problem.params.tau)
    rates = predict_rates(problem, regime)
    lines = [
        f"regime {'TunedTau(sigma=%g)' % args.sigma if args.tuned else 'FixedTau(tau=%g)' % problem.params.tau}",
        f"effective s={rates.s:g} b={rates.b:g}",
        f"mise_exponent {rates.mise_exponent:.6g}"
        + ("  (upper bound, b<1)" if rates.mise_is_upper_bound else ""),
        f"trace_exponent {rates.trace_exponent:.6g}",
        f"contraction_exponent {rates.contraction_exponent:.6g}",
        "n\tlambda\tmise_rate\ttrace_rate\tcontraction_rate",
    ]
    for k in range(1, args.kmax + 1):
        n = 10.0**k
        lines.append("\t".join(f"{v:.6g}" for v in (
            n, float(rates.lam(n)), float(rates.mise_rate(n)), float(rates.trace_rate(n)),
            float(rates.contraction_rate(n)))))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="problem / sweep JSON")
    common.add_argument("--seed", type=int, help=f"master seed (overrides ${harness.SEED_ENV})")
    common.add_argument("--realizations", type=int)
    common.add_argument("--modes", type=int, help="truncation j_max")
    common.add_argument("--out", help="output path")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="sevbayes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("posterior", parents=[common], help="posterior mean and trace for one data set")
    p.add_argument("--data", help="data coefficients, one per line")
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("mise-sweep", parents=[common], help="Monte-Carlo vs exact MISE over a noise grid")
    p.add_argument("--full-scale", action="store_true", help="10^5 modes, 1000 realizations, k=1..100")
    p.set_defaults(func=cmd_mise_sweep)

    p = sub.add_parser("rate-fit", parents=[common], help="least-squares rate fit of a sweep CSV")
    p.add_argument("input", nargs="?")
    p.add_argument("--exclude", type=int, default=harness.DEFAULT_FIT_EXCLUDE)
    p.add_argument("--column", default="mise_mc")
    p.set_defaults(func=cmd_rate_fit)

    p = sub.add_parser("diagnose-equivalence", parents=[common], help="Feldman-Hajek diagnostics")
    p.add_argument("--data", help="data coefficients; default is a synthetic data set")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("predict", parents=[common], help="theoretical rates")
    p.add_argument("--tuned", action="store_true", help="use a tuned tau(n) schedule")
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--kmax", type=int, default=10, help="tabulate n = 10^1 .. 10^kmax")
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
