"""Command-line front end: ``gridconv {solve,study,fit,verify}``.

Exit status: 0 success, 1 usage or configuration error, 2 numerical
failure (non-convergence, divergence, underdetermined fit, failed check).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import extrapolation as ex
from .afi_solver import SolverConfig, solve
from .config import load_config
from .errors import ConfigError, GridConvError, StudyError, UnderdeterminedFitError
from .oracle import laplace_saddle_series, linear_profile, poisson_square_series, relaxation_solve
from .scenarios import linear_problem, saddle_problem, source_problem
from .study import probe_value, run_study

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
SAMPLES_HEADER = "grid_size,probe,value,iterations,final_residual"
VERIFY_SIZES = (8, 16, 32)

log = logging.getLogger("gridconv")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header] + [",".join(r) for r in rows]
    write_atomic(path, "\n".join(lines) + "\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- solve -------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    n = args.n if args.n is not None else cfg.sizes()[-1]
    try:
        problem = cfg.problem(n)
    except ValueError as exc:
        raise ConfigError(f"--n: {exc}") from None
    report = solve(problem, cfg.solver_config())
    probes = {p.name: probe_value(report.field, p) for p in cfg.probe_list()}
    doc = {
        "config": cfg.to_dict(),
        "grid_size": n,
        "converged": report.converged,
        "iterations": report.iterations,
        "final_residual": report.final_residual,
        "tolerance_used": report.tolerance_used,
        "residual_history": list(report.residual_history),
        "probes": probes,
        "field": report.field.values.tolist(),
    }
    if args.out:
        write_json(Path(args.out), doc)
    print(f"n={n} converged={str(report.converged).lower()} iterations={report.iterations} "
          f"final_residual={fmt(report.final_residual)}")
    for name, value in probes.items():
        print(f"{name}={fmt(value)}")
    if not report.converged:
        print(f"error: no convergence within {report.config.max_iterations} iterations", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# -- study -------------------------------------------------------------------

def _report_entry(probe: str, rep: ex.ConvergenceReport) -> dict:
    return {
        "probe": probe,
        "degree": rep.model.degree,
        "coefficients": list(rep.model.coefficients),
        "residual_rms": rep.model.residual_rms,
        "grid_independent_value": rep.grid_independent_value,
        "grid_sizes": list(rep.grid_sizes),
        "samples": list(rep.samples),
        "truncation_errors": list(rep.truncation_errors),
        "stage_boundary": rep.stage_boundary,
        "threshold_used": rep.threshold_used,
    }


def cmd_study(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    probes = cfg.probe_list()
    try:
        result = run_study(
            cfg.problem(), cfg.sizes(), probes, cfg.solver_config(),
            keep_going=args.keep_going, max_workers=args.workers,
        )
    except StudyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    rows = []
    for n in result.grid_sizes:
        d = result.diagnostics(n)
        for p in probes:
            rows.append((str(n), p.name, fmt(result.samples[(n, p.name)]), str(d.iterations), fmt(d.final_residual)))
    write_csv(out / "samples.csv", SAMPLES_HEADER, rows)

    report = {
        "config": cfg.to_dict(),
        "grid_sizes": list(result.grid_sizes),
        "unconverged_grid_sizes": result.unconverged,
        "failed_grid_sizes": {str(k): v for k, v in result.failures.items()},
        "fits": [],
    }
    status = EXIT_OK
    for p in probes:
        series = result.series(p.name)
        try:
            rep = ex.analyse(series, cfg.fit_degree, cfg.stage_threshold)
        except UnderdeterminedFitError as exc:
            print(f"error: probe {p.name}: {exc}", file=sys.stderr)
            report["fits"].append({"probe": p.name, "error": str(exc)})
            status = EXIT_NUMERICAL
            continue
        report["fits"].append(_report_entry(p.name, rep))
        write_csv(
            out / f"plot_{p.name}.csv", "x,sample,fitted",
            ((str(n), fmt(y), fmt(ex.evaluate_fit(rep.model, n))) for n, y in series),
        )
        print(f"{p.name}: grid_independent_value={fmt(rep.grid_independent_value)} "
              f"stage_boundary={rep.stage_boundary}")
    write_json(out / "report.json", report)
    if result.unconverged:
        print(f"warning: unconverged rungs excluded from fits: {result.unconverged}", file=sys.stderr)
    return status


# -- fit ---------------------------------------------------------------------

def read_samples(path: Path, probe: str | None) -> list[tuple[int, float]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"grid_size", "value"} <= set(reader.fieldnames):
                raise ConfigError(f"{path}: need columns grid_size and value")
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read samples {path}: {exc}") from None
    names = sorted({r.get("probe") or "" for r in rows})
    if probe is None:
        if len(names) > 1:
            raise ConfigError(f"{path}: several probes ({', '.join(names)}); pick one with --probe")
    else:
        rows = [r for r in rows if r.get("probe") == probe]
        if not rows:
            raise ConfigError(f"{path}: no rows for probe {probe!r}")
    try:
        return sorted((float(r["grid_size"]), float(r["value"])) for r in rows)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def cmd_fit(args) -> int:
    if args.degree < 0:
        raise ConfigError("--degree: must be >= 0")
    samples = read_samples(Path(args.samples), args.probe)
    try:
        model = ex.fit_inverse_polynomial(samples, args.degree)
    except UnderdeterminedFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        raise ConfigError(f"{args.samples}: {exc}") from None
    a0 = ex.grid_independent_value(model)
    if args.out:
        write_json(Path(args.out), {
            "degree": model.degree,
            "coefficients": list(model.coefficients),
            "residual_rms": model.residual_rms,
            "grid_independent_value": a0,
            "truncation_errors": ex.truncation_errors(a0, samples),
        })
    print("coefficients=" + ",".join(fmt(c) for c in model.coefficients))
    print(f"residual_rms={fmt(model.residual_rms)}")
    print(fmt(a0))
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _agreement(problem, tol=1e-10):
    afi = solve(problem, SolverConfig(residual_tolerance=tol))
    ref = relaxation_solve(problem, tolerance=tol)
    return afi, float(np.max(np.abs(afi.field.values - ref.values)))


def verification_checks(scenario: str):
    """Yield ``(check name, passed, detail)`` for one scenario."""
    tol = 1e-10
    limit = 10 * (tol + tol)
    if scenario == "source":
        errs = []
        for n in VERIFY_SIZES:
            afi, diff = _agreement(source_problem(n), tol)
            yield f"source n={n} AFI vs relaxation", diff <= limit, f"max diff {diff:.2e}"
            exact = poisson_square_series(0.5, 0.5, q=2.0)
            errs.append(abs(afi.field.center() - exact))
        for (n0, e0), (n1, e1) in zip(zip(VERIFY_SIZES, errs), zip(VERIFY_SIZES[1:], errs[1:])):
            ratio = e0 / e1
            yield f"source error ratio n={n0}->{n1}", 3.7 <= ratio <= 4.3, f"ratio {ratio:.4f}"
    elif scenario == "saddle":
        for n in VERIFY_SIZES:
            afi, diff = _agreement(saddle_problem(n), tol)
            yield f"saddle n={n} AFI vs relaxation", diff <= limit, f"max diff {diff:.2e}"
            c = afi.field.center()
            yield f"saddle n={n} center = 50", abs(c - 50.0) <= 1e-6, f"center {fmt(c)}"
        s = laplace_saddle_series(0.5, 0.5, 100.0)
        yield "saddle series center = 50", abs(s - 50.0) <= 1e-9, f"series {fmt(s)}"
    elif scenario == "linear_adiabatic":
        for n in VERIFY_SIZES:
            afi, diff = _agreement(linear_problem(n), tol)
            yield f"linear n={n} AFI vs relaxation", diff <= limit, f"max diff {diff:.2e}"
            y = np.linspace(0.0, 1.0, n + 1)
            exact = np.array([linear_profile(v, 100.0, 0.0) for v in y])
            dev = float(np.max(np.abs(afi.field.values - exact[None, :])))
            yield f"linear n={n} affine exactness", dev <= 1e-8, f"max dev {dev:.2e}"
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")


def cmd_verify(args) -> int:
    scenarios = [args.scenario] if args.scenario else ["source", "saddle", "linear_adiabatic"]
    failed = []
    for sc in scenarios:
        for name, ok, detail in verification_checks(sc):
            print(f"{'PASS' if ok else 'FAIL'} {name} ({detail})")
            if not ok:
                failed.append(name)
    if failed:
        print(f"error: failed checks: {'; '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridconv", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one scenario on one grid")
    p.add_argument("--config", required=True, help="scenario config (JSON)")
    p.add_argument("--n", type=int, help="cells per side (default: largest configured size)")
    p.add_argument("--out", help="write field and solve report here (JSON)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("study", help="run a grid-refinement study and fit the convergence law")
    p.add_argument("--config", required=True, help="scenario config (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--keep-going", action="store_true", help="drop diverging rungs instead of aborting")
    p.add_argument("--workers", type=int, default=1, help="rungs solved concurrently")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("fit", help="fit the inverse-polynomial law to a samples CSV")
    p.add_argument("--samples", required=True, help="CSV with grid_size and value columns")
    p.add_argument("--degree", type=int, default=ex.DEFAULT_DEGREE)
    p.add_argument("--probe", help="probe to fit when the CSV holds several")
    p.add_argument("--out", help="write the fitted model here (JSON)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="cross-check AFI against the reference solutions")
    p.add_argument("--scenario", choices=["source", "saddle", "linear_adiabatic"])
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridConvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
