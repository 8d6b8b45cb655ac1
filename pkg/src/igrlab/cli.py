"""Command line entry point: ``igrlab {run,dispersion,opcheck,compare}``.

Exit codes: 0 success, 1 validation failure (bad input, failed check),
2 numerical failure (positivity loss, non-finite data, solver breakdown).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .backend import SolverError
from .config import ConfigError, parse_config
from .dg1d import DgDomainError, Mesh1D
from .eos import EosDomainError
from .io import CsvFormatError, compare_csv, write_diagnostics, write_snapshot
from .linwave import PhaseFitError, expected_phase_speed, measure_phase_speed
from .models import ModelKind, ModelParams, PositivityError, initial_condition_sod
from .opcheck import SingularOperatorError, run_suite
from .timestep import NumericalFailure, RunConfig, run

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2

NUMERICAL_ERRORS = (PositivityError, NumericalFailure, SingularOperatorError, SolverError, DgDomainError,
                    EosDomainError, PhaseFitError, FloatingPointError, np.linalg.LinAlgError)
VALIDATION_ERRORS = (ConfigError, CsvFormatError, ValueError, OSError)


def max_workers(n_jobs):
    """Worker count for ``n_jobs`` independent jobs, bounded by ``IGRLAB_THREADS``."""
    raw = os.environ.get("IGRLAB_THREADS", "").strip()
    if raw:
        try:
            limit = int(raw)
        except ValueError:
            raise ConfigError(f"IGRLAB_THREADS must be a positive integer, got {raw!r}") from None
        if limit < 1:
            raise ConfigError(f"IGRLAB_THREADS must be a positive integer, got {raw!r}")
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, n_jobs))


def _map(fn, jobs):
    """Ordered map over ``jobs``, in worker processes when more than one is allowed."""
    workers = max_workers(len(jobs))
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _classify(exc):
    if isinstance(exc, NUMERICAL_ERRORS):
        return EXIT_NUMERICAL
    return EXIT_VALIDATION


def _guard(fn, job):
    """Run ``fn(job)`` and turn exceptions into ``(exit code, message)``."""
    try:
        return EXIT_OK, fn(job)
    except NUMERICAL_ERRORS + VALIDATION_ERRORS as exc:
        return _classify(exc), f"{type(exc).__name__}: {exc}"


# -- run ---------------------------------------------------------------------

def simulate(cfg, out_dir, log=print):
    """Run one configuration, writing snapshots, diagnostics and the config echo."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    mesh = cfg.mesh()
    model = cfg.model_params()
    state = initial_condition_sod(mesh, model, delta=cfg.delta, x1=cfg.x1, x2=cfg.x2)
    tag = f"nc{cfg.n_cells}_{cfg.model.value.lower()}"
    written = []

    def on_output(s, rec):
        path = out / f"{tag}_t_{s.time:.6f}.csv"
        write_snapshot(s, model, path, cfg)
        written.append(path)
        log(f"t={s.time:.6f} mass={rec.total_mass:.17g} energy={rec.total_energy:.17g} -> {path}")

    rc = RunConfig(cfg.t_end, cfl=cfg.cfl, output_times=cfg.output_times, substeps=cfg.substeps)
    records = []
    try:
        _, records = run(state, model, rc, on_output=lambda s, r: (records.append(r), on_output(s, r)))
    finally:
        write_diagnostics(records, out / f"{tag}_diagnostics.csv")
    return [str(p) for p in written]


def _run_job(job):
    cfg_text, out_dir = job
    return _guard(lambda _: simulate(parse_config(cfg_text), out_dir, log=lambda m: None), None)


def _overrides(pairs):
    lines = []
    for p in pairs or ():
        if "=" not in p:
            raise ConfigError(f"override {p!r} must look like key=value")
        lines.append(p)
    return "\n".join(lines)


def cmd_run(args):
    texts = []
    paths = args.config or [None]
    for p in paths:
        base = Path(p).read_text(encoding="utf-8") if p else ""
        text = base + "\n" + _overrides(args.set)
        parse_config(text)  # validate before launching anything
        texts.append(text)
    out = Path(args.out)
    if len(texts) == 1:
        simulate(parse_config(texts[0]), out)
        return EXIT_OK
    jobs = [(t, out / Path(p).stem) for t, p in zip(texts, paths)]
    worst = EXIT_OK
    for (code, payload), p in zip(_map(_run_job, jobs), paths):
        if code:
            print(f"{p}: {payload}", file=sys.stderr)
        else:
            print(f"{p}: wrote {len(payload)} snapshots")
        worst = max(worst, code)
    return worst


# -- dispersion --------------------------------------------------------------

def _dispersion_job(job):
    kind, k_mode, n_cells, alpha, amplitude, t_measure = job
    mesh = Mesh1D(n_cells)
    model = ModelParams(kind=kind, alpha=alpha)

    def work(_):
        k = 2.0 * np.pi * k_mode
        c = measure_phase_speed(model, k_mode, amplitude, t_measure, mesh)
        c_exact = expected_phase_speed(model, k)
        return k, c_exact * k, c, abs(c - c_exact) / c_exact

    return _guard(work, None)


def cmd_dispersion(args):
    kind = ModelKind.parse(args.model)
    modes = [int(m) for m in args.k_modes.split(",")]
    if any(m < 1 for m in modes):
        raise ConfigError("k modes must be positive integers")
    if args.alpha is not None:
        alpha = args.alpha
    else:
        alpha = args.alpha_k2 / (2.0 * np.pi * max(modes)) ** 2
    jobs = [(kind, m, args.n_cells, alpha, args.amplitude, args.t_measure) for m in modes]
    rows = ["k,omega_analytic,speed_measured,rel_err"]
    worst = EXIT_OK
    for code, payload in _map(_dispersion_job, jobs):
        if code:
            print(payload, file=sys.stderr)
            worst = max(worst, code)
            continue
        rows.append(",".join(format(v, ".17g") for v in payload))
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return worst


# -- opcheck / compare -------------------------------------------------------

def cmd_opcheck(args):
    rows = run_suite(seed=args.seed, n_max_principle=args.instances)
    print(f"{'check':34s} {'value':>12s} {'tolerance':>10s}  result")
    for r in rows:
        print(f"{r.name:34s} {r.value:12.3e} {r.tolerance:10.1e}  {'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VALIDATION


def cmd_compare(args):
    report = compare_csv(args.a, args.b)
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(f"{'column':6s} {'L1':>24s} {'L2':>24s} {'Linf':>24s}")
        for c, n in report.items():
            print(f"{c:6s} {n['L1']:24.17g} {n['L2']:24.17g} {n['Linf']:24.17g}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="igrlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate the periodized smoothed Sod problem")
    r.add_argument("config", nargs="*", help="key = value config files (several run as a sweep)")
    r.add_argument("--out", default="out", help="output directory")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("dispersion", help="measured vs analytic acoustic phase speed")
    d.add_argument("--model", default="HRE")
    d.add_argument("--k-modes", default="1,2,4")
    d.add_argument("--n-cells", type=int, default=256)
    d.add_argument("--alpha", type=float, default=None, help="regularization length squared")
    d.add_argument("--alpha-k2", type=float, default=1.0,
                   help="alpha k^2 at the largest mode when --alpha is not given")
    d.add_argument("--amplitude", type=float, default=1e-6)
    d.add_argument("--t-measure", type=float, default=None)
    d.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    d.set_defaults(func=cmd_dispersion)

    o = sub.add_parser("opcheck", help="elliptic operator identity checks")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--instances", type=int, default=500, help="random maximum-principle instances")
    o.set_defaults(func=cmd_opcheck)

    c = sub.add_parser("compare", help="L1/L2/Linf differences between two snapshot CSVs")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the synopsis
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
