"""Command-line interface.

One process per command; every command is a pure function of its input
files, flags and seed, re-running to byte-identical outputs (the wall-time
field in report files is the single exception).  Machine-readable outputs
are CSV (header row, '.' decimal) or versioned JSON documents; each run
also prints a one-line JSON metadata block (command, seed, version, config
echo, wall time, output paths) to stdout.

Exit codes: 0 success, 2 input error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .design import lhd, maximin_improve
from .exceptions import SurrogateError
from .gpmodel import FitOptions, fit, fit_noisy, load_model, predict_batch, save_model, training_residuals
from .kernels import CorrelationSpec, Design, corr_matrix
from .linalg import DEFAULT_KAPPA_MAX, condition_number, decomposition_benchmark, nugget_lower_bound
from .localgp import BigDataset, local_fit_options, predict_local_batch
from .rng import derive_seed
from .seqdesign import ei_optimize
from .simulators import get_simulator
from .svdgp import fit_svdgp, load_svdgp, predict_svdgp, save_svdgp


class CliInputError(Exception):
    """User-input problem: missing/malformed file or inconsistent flags."""


# ---------------------------------------------------------------------------
# small deterministic I/O helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    return repr(float(value))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell) for cell in row])


def _write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _read_table(path) -> tuple[list, np.ndarray]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise CliInputError(f"{path}: empty file")
            rows = [[float(c) for c in row] for row in reader if row]
    except OSError as err:
        raise CliInputError(f"cannot read {path}: {err}") from err
    except ValueError as err:
        raise CliInputError(f"{path}: malformed numeric CSV: {err}") from err
    if not rows:
        raise CliInputError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths != {len(header)}:
        raise CliInputError(f"{path}: ragged rows or header/data width mismatch")
    return [h.strip() for h in header], np.asarray(rows, dtype=float)


def _read_xy(path, want_y: bool):
    header, table = _read_table(path)
    x_cols = [i for i, h in enumerate(header) if h.startswith("x")]
    y_cols = [i for i, h in enumerate(header) if h == "y"]
    if not x_cols:
        raise CliInputError(f"{path}: expected columns x1..xd (found {header})")
    if want_y and not y_cols:
        raise CliInputError(f"{path}: expected a y column (found {header})")
    x = table[:, x_cols]
    y = table[:, y_cols[0]] if y_cols else None
    return x, y


def _read_matrix(path) -> np.ndarray:
    """Headerless numeric CSV (the time-series response layout)."""
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as err:
        raise CliInputError(f"cannot read {path}: {err}") from err
    except ValueError as err:
        raise CliInputError(f"{path}: malformed numeric CSV: {err}") from err


def _parse_floats(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok != ""])
    except ValueError as err:
        raise CliInputError(f"--{name}: expected comma-separated numbers, got {text!r}") from err


def _spec_from_args(args, d: int) -> CorrelationSpec:
    beta = np.zeros(d)
    if args.kernel == "powexp":
        power = _parse_floats(args.power, "power") if args.power else None
        return CorrelationSpec(beta=beta, family="powexp", power=power)
    if args.kernel == "matern":
        return CorrelationSpec(beta=beta, family="matern", nu=args.nu)
    if args.kernel == "compact":
        if not args.tau:
            raise CliInputError("--kernel compact requires --tau")
        return CorrelationSpec(beta=beta, family="compact", tau=_parse_floats(args.tau, "tau"))
    raise CliInputError(f"unknown kernel {args.kernel!r}")


def _fit_options(args, **overrides) -> FitOptions:
    fields = dict(seed=args.seed, kappa_max=args.kappa_max)
    if getattr(args, "workers", None):
        fields["workers"] = args.workers
    fields.update(overrides)
    return FitOptions(**fields)


def _metadata(command: str, args, t0: float, outputs: list) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    doc = {
        "command": command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": config,
        "wall_time_s": time.perf_counter() - t0,
        "outputs": outputs,
    }
    print(json.dumps(doc, sort_keys=True))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    x_raw, y = _read_xy(args.data, want_y=True)
    bounds = None
    if args.bounds:
        pairs = [p.split(":") for p in args.bounds.split(",")]
        bounds = np.array([[float(lo), float(hi)] for lo, hi in pairs])
        from .design import scale_to_unit

        design = scale_to_unit(x_raw, bounds)
    else:
        design = Design(x_raw)
    spec = _spec_from_args(args, design.d)
    opts = _fit_options(args)
    model = (fit_noisy if args.noisy else fit)(design, y, spec_template=spec, opts=opts)
    model.bounds = bounds
    save_model(model, args.out)
    outputs = [args.out]
    if args.report:
        report = {
            "beta_hat": model.spec.beta.tolist(),
            "theta_hat": model.spec.theta.tolist(),
            "mu_hat": model.mu_hat,
            "sigma2_hat": model.sigma2_hat,
            "nugget": model.nugget,
            "noise_variance": model.noise_variance,
            "deviance": model.deviance_at_fit,
            "kappa": model.kappa,
            "kappa_max": opts.kappa_max,
            "degenerate": model.degenerate,
            "n": model.n,
            "d": model.d,
            "seed": args.seed,
            "version": __version__,
            "wall_time_s": time.perf_counter() - t0,
        }
        _write_json(args.report, report)
        outputs.append(args.report)
    _metadata("fit", args, t0, outputs)
    return 0


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    model = load_model(args.model)
    outputs = []
    if args.queries:
        x_raw, _ = _read_xy(args.queries, want_y=False)
        if model.bounds is not None:
            from .design import scale_to_unit

            pts = scale_to_unit(x_raw, model.bounds).points
        else:
            pts = x_raw
        means, variances, _ = predict_batch(model, pts, m=args.M)
        sd = np.sqrt(variances)
        rows = [(m, v, m - 2 * s, m + 2 * s) for m, v, s in zip(means, variances, sd)]
        _write_csv(args.out, ["mean", "variance", "lower95", "upper95"], rows)
        outputs.append(args.out)
    if args.plot_data:
        if model.d != 1:
            raise CliInputError("--plot-data draws a 1-d grid; model has d > 1")
        grid = np.linspace(0.0, 1.0, args.grid_size)[:, None]
        means, variances, _ = predict_batch(model, grid, m=args.M)
        sd = np.sqrt(variances)
        header = ["x", "mean", "lower95", "upper95"]
        cols = [grid[:, 0], means, means - 2 * sd, means + 2 * sd]
        if args.simulator:
            sim = get_simulator(args.simulator)
            truth = np.array([float(sim.evaluate(p)) for p in grid])
            header.insert(1, "truth")
            cols.insert(1, truth)
        _write_csv(args.plot_data, header, list(zip(*cols)))
        outputs.append(args.plot_data)
    if not outputs:
        raise CliInputError("nothing to do: provide --queries and/or --plot-data")
    _metadata("predict", args, t0, outputs)
    return 0


def cmd_diagnose(args) -> int:
    t0 = time.perf_counter()
    if args.data:
        x_raw, _ = _read_xy(args.data, want_y=False)
        design = Design(x_raw)
    elif args.n and args.d:
        design = lhd(args.n, args.d, seed=args.seed)
    else:
        raise CliInputError("diagnose needs --data or both --n and --d")
    spec = _spec_from_args(args, design.d)
    if args.theta:
        theta = _parse_floats(args.theta, "theta")
        if theta.size == 1:
            theta = np.full(design.d, theta[0])
        spec = spec.with_beta(np.log10(theta))
    r = corr_matrix(spec, design)
    eigs = np.linalg.eigvalsh(r)
    delta_lb = nugget_lower_bound(eigs, args.kappa_max)
    kappa = condition_number(r)
    doc = {
        "n": design.n,
        "d": design.d,
        "kappa": kappa if np.isfinite(kappa) else "inf",
        "eig_min": float(eigs[0]),
        "eig_max": float(eigs[-1]),
        "kappa_max": args.kappa_max,
        "delta_lower_bound": delta_lb,
        "kappa_after_nugget": float((eigs[-1] + delta_lb) / (eigs[0] + delta_lb)),
        "seed": args.seed,
        "version": __version__,
    }
    _write_json(args.out, doc)
    outputs = [args.out]
    if args.benchmark_out:
        report = decomposition_benchmark(design.n, design.d, args.trials, seed=args.seed)
        with open(args.benchmark_out, "w", encoding="utf-8", newline="") as fh:
            report.write_csv(fh)
        outputs.append(args.benchmark_out)
    _metadata("diagnose", args, t0, outputs)
    return 0


def cmd_benchmark(args) -> int:
    t0 = time.perf_counter()
    report = decomposition_benchmark(args.n, args.d, args.trials, seed=args.seed, strict=args.strict)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        report.write_csv(fh)
    _metadata("benchmark", args, t0, [args.out])
    return 0


def cmd_lhd(args) -> int:
    t0 = time.perf_counter()
    design = lhd(args.n, args.d, seed=args.seed)
    if args.maximin_passes:
        design = maximin_improve(design, args.maximin_passes, seed=derive_seed(args.seed, 1))
    header = [f"x{k+1}" for k in range(args.d)]
    _write_csv(args.out, header, design.points)
    _metadata("lhd", args, t0, [args.out])
    return 0


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    sim = get_simulator(args.simulator, length=args.length, qdim=args.qdim)
    x, _ = _read_xy(args.input, want_y=False)
    if x.shape[1] != sim.dim:
        raise CliInputError(f"{args.simulator} expects {sim.dim} input columns, got {x.shape[1]}")
    if sim.series_length:
        rows = [sim.evaluate(p) for p in x]
        header = [f"y{t+1}" for t in range(sim.series_length)]
        _write_csv(args.out, header, rows)
    else:
        rows = [(float(sim.evaluate(p)),) for p in x]
        _write_csv(args.out, ["y"], rows)
    _metadata("simulate", args, t0, [args.out])
    return 0


def cmd_svdgp_fit(args) -> int:
    t0 = time.perf_counter()
    x, _ = _read_xy(args.design, want_y=False)
    response = _read_matrix(args.response)
    opts = _fit_options(args)
    model = fit_svdgp(Design(x), response, frac=args.frac, opts=opts, center=args.center)
    save_svdgp(model, args.out)
    _metadata("svdgp-fit", args, t0, [args.out])
    return 0


def cmd_svdgp_predict(args) -> int:
    t0 = time.perf_counter()
    model = load_svdgp(args.model)
    x, _ = _read_xy(args.queries, want_y=False)
    rows = []
    for i, p in enumerate(x):
        mean, var = predict_svdgp(model, p)
        rows.extend((i, t + 1, mean[t], var[t]) for t in range(mean.size))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["query", "t", "mean", "variance"])
        for q, t, m, v in rows:
            writer.writerow([q, t, _fmt(m), _fmt(v)])
    _metadata("svdgp-predict", args, t0, [args.out])
    return 0


def cmd_localgp(args) -> int:
    t0 = time.perf_counter()
    x, y = _read_xy(args.data, want_y=True)
    queries, _ = _read_xy(args.queries, want_y=False)
    data = BigDataset(x, y)
    opts = local_fit_options(seed=args.seed, kappa_max=args.kappa_max)
    results, errors = predict_local_batch(data, queries, n=args.n_neighbors,
                                          opts=opts, workers=args.workers)
    if errors:
        for idx, err in errors:
            print(f"query {idx}: {err}", file=sys.stderr)
        raise SurrogateError(f"{len(errors)} of {len(results)} local predictions failed")
    _write_csv(args.out, ["mean", "variance"], [(r.mean, r.variance) for r in results])
    _metadata("localgp", args, t0, [args.out])
    return 0


def cmd_ei(args) -> int:
    t0 = time.perf_counter()
    sim = get_simulator(args.simulator)
    if sim.series_length:
        raise CliInputError("ei needs a scalar simulator")
    spec = _spec_from_args(args, sim.dim)
    opts = _fit_options(args, candidates_per_dim=args.candidates_per_dim,
                        keep_per_dim=args.keep_per_dim, clusters_per_dim=args.clusters_per_dim,
                        max_iterations=args.max_iterations)
    state = ei_optimize(sim, n0=args.n0, n_total=args.n_total,
                        candidate_count=args.candidates, opts=opts, spec_template=spec)
    header = ["step"] + [f"x{k+1}" for k in range(sim.dim)] + ["ei", "y", "fmin"]
    rows = [[str(step.step), *step.point, step.ei, step.y, step.fmin] for step in state.trace]
    _write_csv(args.trace_out, header, rows)
    summary = {
        "simulator": sim.name,
        "status": state.status,
        "fmin": state.fmin,
        "best_point": state.best_point.tolist(),
        "n_evaluations": int(state.y.size),
        "n0": state.n0,
        "n_total": state.n_total,
        "seed": args.seed,
        "version": __version__,
    }
    _write_json(args.summary_out, summary)
    _metadata("ei", args, t0, [args.trace_out, args.summary_out])
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=("powexp", "matern", "compact"), default="powexp")
    p.add_argument("--power", help="comma-separated powers in [1,2] (powexp)")
    p.add_argument("--nu", type=float, default=1.5, help="matern smoothness (0.5, 1.5 or 2.5)")
    p.add_argument("--tau", help="comma-separated support cutoffs (compact)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kappa-max", type=float, default=DEFAULT_KAPPA_MAX, dest="kappa_max")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpsurrogate",
                                     description="GP surrogate toolkit for computer-simulator data")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a scalar GP to x1..xd,y training CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--noisy", action="store_true", help="estimate a noise nugget")
    p.add_argument("--bounds", help="raw input bounds lo:hi per coordinate, comma separated")
    p.add_argument("--workers", type=int, default=1)
    _add_kernel_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict at query points from a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--queries")
    p.add_argument("--out", default="predictions.csv")
    p.add_argument("--M", type=int, default=1, help="iterative smoothing-correction passes")
    p.add_argument("--plot-data", dest="plot_data", help="emit a 1-d grid CSV for plotting")
    p.add_argument("--grid-size", type=int, default=1000, dest="grid_size")
    p.add_argument("--simulator", help="include a truth column in --plot-data output")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("diagnose", help="condition number, eigenvalue extremes, nugget bound")
    p.add_argument("--data")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--theta", help="comma-separated rate parameters (default all 1)")
    p.add_argument("--out", required=True)
    p.add_argument("--benchmark-out", dest="benchmark_out")
    p.add_argument("--trials", type=int, default=5)
    _add_kernel_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("benchmark", help="decomposition accuracy/timing benchmark CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true",
                   help="undo pivot permutations before reconstituting")
    _add_common(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("lhd", help="Latin hypercube design CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--maximin-passes", type=int, default=0, dest="maximin_passes")
    _add_common(p)
    p.set_defaults(func=cmd_lhd)

    p = sub.add_parser("simulate", help="run a built-in simulator over an input CSV")
    p.add_argument("--simulator", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--length", type=int, default=50, help="series length (dynamic-toy)")
    p.add_argument("--qdim", type=int, default=2, help="input dimension (dynamic-toy)")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("svdgp-fit", help="fit the dynamic (time-series) surrogate")
    p.add_argument("--design", required=True)
    p.add_argument("--response", required=True, help="headerless CSV, L rows x N columns")
    p.add_argument("--out", required=True)
    p.add_argument("--frac", type=float, default=0.95)
    p.add_argument("--center", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_svdgp_fit)

    p = sub.add_parser("svdgp-predict", help="predict mean/variance series at query inputs")
    p.add_argument("--model", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_svdgp_predict)

    p = sub.add_parser("localgp", help="nearest-neighbor local GP batch prediction")
    p.add_argument("--data", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--n-neighbors", type=int, required=True, dest="n_neighbors")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_localgp)

    p = sub.add_parser("ei", help="expected-improvement sequential minimization")
    p.add_argument("--simulator", required=True)
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--n-total", type=int, required=True, dest="n_total")
    p.add_argument("--candidates", type=int, default=500)
    p.add_argument("--trace-out", required=True, dest="trace_out")
    p.add_argument("--summary-out", required=True, dest="summary_out")
    p.add_argument("--candidates-per-dim", type=int, default=200, dest="candidates_per_dim")
    p.add_argument("--keep-per-dim", type=int, default=80, dest="keep_per_dim")
    p.add_argument("--clusters-per-dim", type=int, default=2, dest="clusters_per_dim")
    p.add_argument("--max-iterations", type=int, default=100, dest="max_iterations")
    _add_kernel_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_ei)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliInputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SurrogateError as err:
        print(f"error: {err.__class__.__name__}: {err}", file=sys.stderr)
        return 3
    except Exception as err:  # pragma: no cover - defensive
        print(f"error: unexpected {err.__class__.__name__}: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
