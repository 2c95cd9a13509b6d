"""Command-line interface: validate, run, sweep, fit, poincare, plot.

Exit-status contract (stable for harnesses):
    0  success (including completed runs that end in a tagged blowup,
       which is an expected semilinear outcome)
    1  general error (missing files, empty series)
    2  validation failure (hypothesis or configuration problems)
    3  runtime instability

Every run emits one CSV time series (17 significant digits, columns
t, E_u, l2_u, l2_local, dissipation_cum, G_k, identity_residual,
lemma25_residual, lemma25_ratio, au2_cum) plus one JSON manifest holding
the config hash, derived constants, and termination. Outputs are
deterministic functions of the config bytes. The default output
directory may be set with the DAMPEDWAVE_OUT environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, config as cfg, runner, solver
from .coefficients import Grid
from .diagnostics import CSV_COLUMNS
from .errors import ConfigError, ConvergenceError, GridDomainError, HypothesisError
from .spectral import estimate_c_star, poincare_problem

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_INSTABILITY = 3

_VALIDATION_ERRORS = (ConfigError, HypothesisError, GridDomainError)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _out_dir(arg: str | None) -> Path:
    out = arg or os.environ.get("DAMPEDWAVE_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def write_csv(path: Path, records) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.csv_values()))
    path.write_text("\n".join(lines) + "\n")


def _json_safe(x):
    if x is None or isinstance(x, (str, int, bool)):
        return x
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def build_manifest(lab: runner.LabRun, raw_config: bytes, csv_name: str) -> dict:
    profile = lab.profile
    derived = {
        "c_star": lab.c_star,
        "smallness_bound": (1.0 / (4.0 * lab.c_star)) if lab.c_star else None,
        "V_at_origin": profile.v_at_origin,
        "I0": lab.norms.I0 if lab.norms else None,
        "h1_norm_u0": lab.norms.h1_norm_u0 if lab.norms else None,
        "l2_norm_u1": lab.norms.l2_norm_u1 if lab.norms else None,
        "weighted_norm": lab.norms.weighted_norm if lab.norms else None,
    }
    if lab.mc is not None:
        derived.update(
            alpha=lab.mc.alpha, eps2=lab.mc.eps2, eps=lab.mc.eps, k=lab.mc.k,
            gamma0=lab.mc.gamma0, P0=lab.mc.P0, eta0=lab.mc.eta0,
            V_L=lab.mc.V_L, V_L_prime=lab.mc.V_L_prime,
        )
    grid = lab.grid
    return {
        "artifact_version": __version__,
        "config_hash": _config_hash(raw_config),
        "files": {"csv": csv_name},
        "termination": {"kind": lab.termination.kind,
                        "time": _json_safe(lab.termination.time)},
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max,
                 "n_cells": grid.n_cells, "dx": grid.dx},
        "time": {"dt": lab.result.dt, "n_steps": lab.result.n_steps,
                 "t_end": lab.run_config.t_end,
                 "record_every": lab.run_config.record_every},
        "coefficients": {
            "L": profile.L, "eps1": profile.eps1,
            "beta": _json_safe(profile.beta), "V0": _json_safe(profile.V0),
            "free_wave": bool(profile.a_max == 0.0 and float(np.max(profile.V)) == 0.0),
        },
        "data": {"support_radius": _json_safe(lab.data.support_radius)},
        "nonlinearity": {"p": _json_safe(lab.run_config.p)},
        "hypotheses": [
            {"name": c.name, "passed": c.passed, "detail": c.detail,
             "margin": _json_safe(c.margin)}
            for c in lab.validation.checks
        ],
        "derived_constants": {k: _json_safe(v) for k, v in derived.items()},
    }


def _load(config_path: str) -> tuple[cfg.RunSpec, bytes]:
    if not Path(config_path).exists():
        raise FileNotFoundError(f"config file not found: {config_path}")
    return cfg.load_config(config_path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        spec, _raw = _load(args.config)
        grid, profile, data = cfg.build_problem(spec)
        report, c_star, mc, norms = runner.prepare_constants(profile, data)
    except _VALIDATION_ERRORS as exc:
        print(f"INVALID: {exc}")
        return EXIT_VALIDATION

    for check in report.checks:
        status = {True: "pass", False: "FAIL", None: "skipped"}[check.passed]
        margin = "" if check.margin is None else f" (margin {check.margin:.6g})"
        print(f"{check.name:35s} {status:7s} {check.detail}{margin}")
    if c_star is not None:
        print(f"{'C*':35s} {c_star:.12g}")
        print(f"{'1/(4C*)':35s} {1.0 / (4.0 * c_star):.12g}")
    if args.json:
        payload = {
            "passed": report.passed,
            "c_star": _json_safe(c_star),
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail,
                 "margin": _json_safe(c.margin)}
                for c in report.checks
            ],
        }
        print(json.dumps(payload, sort_keys=True))
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_run(args) -> int:
    try:
        spec, raw = _load(args.config)
        lab = runner.execute(spec)
    except _VALIDATION_ERRORS as exc:
        print(f"invalid run configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = _out_dir(args.out)
    name = args.name or Path(args.config).stem
    csv_path = out / f"{name}.csv"
    write_csv(csv_path, lab.records)
    manifest = build_manifest(lab, raw, csv_path.name)
    manifest_path = out / f"{name}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {csv_path} ({len(lab.records)} records) and {manifest_path}")
    print(f"termination: {lab.termination.kind}"
          + (f" at t = {lab.termination.time:.6g}" if lab.termination.time else ""))
    return EXIT_INSTABILITY if lab.termination.kind == solver.INSTABILITY else EXIT_OK


def cmd_poincare(args) -> int:
    try:
        grid = Grid(-args.domain, args.domain, args.nodes)
        estimate = estimate_c_star(poincare_problem(grid, args.L), tol=args.tol)
    except (_VALIDATION_ERRORS + (ConvergenceError,)) as exc:
        print(f"poincare estimate failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print("L,c_star,lambda_min,residual")
    print(f"{_fmt(args.L)},{_fmt(estimate.c_star)},"
          f"{_fmt(estimate.lambda_min)},{_fmt(estimate.residual)}")
    return EXIT_OK


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    if rows.size == 0:
        return {name: np.array([]) for name in header}
    return {name: rows[:, i] for i, name in enumerate(header)}


def _records_path(path_arg: str) -> Path:
    path = Path(path_arg)
    if path.suffix == ".json" or path.name.endswith(".manifest.json"):
        manifest = json.loads(path.read_text())
        return path.parent / manifest["files"]["csv"]
    return path


def cmd_fit(args) -> int:
    try:
        columns = _read_csv(_records_path(args.series))
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read series: {exc}", file=sys.stderr)
        return EXIT_ERROR
    name = args.quantity
    if name == "l2_u_sq":
        q = columns["l2_u"] ** 2
    elif name in columns:
        q = columns[name]
    else:
        print(f"unknown quantity {name!r}; columns: {', '.join(columns)}", file=sys.stderr)
        return EXIT_ERROR
    t = columns["t"]
    sel = (t >= args.window[0]) & (t <= args.window[1])
    if sel.sum() < analysis.MIN_FIT_RECORDS:
        print(f"fit window holds {int(sel.sum())} records; need at least "
              f"{analysis.MIN_FIT_RECORDS}", file=sys.stderr)
        return EXIT_ERROR
    x = np.log1p(t[sel])
    y = np.log(np.clip(q[sel], analysis.QUANTITY_FLOOR, None))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - fitted) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    sup_scaled = float(np.max(q[sel] * (1.0 + t[sel]) ** args.claimed_rate))
    print("quantity,t_lo,t_hi,exponent,r_squared,sup_scaled,claimed_rate")
    print(f"{name},{_fmt(args.window[0])},{_fmt(args.window[1])},"
          f"{_fmt(slope)},{_fmt(r2)},{_fmt(sup_scaled)},{_fmt(args.claimed_rate)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    p_values = [float(v) for v in args.p.split(",")]
    i0_values = [float(v) for v in args.i0.split(",")]
    base = analysis.SweepBase(
        beta=args.beta, V0=args.V0, L=args.L, eps1=args.eps1,
        t_end=args.t_end, dx=args.dx,
    )
    sweep = analysis.semilinear_sweep(args.beta, p_values, i0_values,
                                      base=base, workers=args.workers)
    out = _out_dir(args.out)
    path = out / f"{args.name}.csv"
    header = "p\\I0," + ",".join(_fmt(v) for v in sweep.I0_values)
    lines = [header]
    for p, row in zip(sweep.p_values, sweep.outcomes):
        lines.append(",".join([_fmt(p)] + list(row)))
    path.write_text("\n".join(lines) + "\n")
    manifest = {
        "artifact_version": __version__,
        "kind": "sweep",
        "beta": sweep.beta,
        "p_critical": sweep.p_critical,
        "p_values": list(sweep.p_values),
        "I0_values": list(sweep.I0_values),
        "files": {"csv": path.name},
    }
    (out / f"{args.name}.manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}; critical exponent p*({sweep.beta:g}) = {sweep.p_critical:g}")
    return EXIT_OK


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Auto-generated plotting script for a damped-wave run ({name})."""
import csv
import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}
FREE_WAVE = {free_wave}

rows = []
with open(CSV_PATH) as fh:
    for row in csv.DictReader(fh):
        rows.append({{k: float(v) for k, v in row.items()}})

t = [r["t"] for r in rows]
tp1 = [1.0 + v for v in t]
E = [r["E_u"] for r in rows]
scaledE = [e * s for e, s in zip(E, tp1)]
l2 = [r["l2_u"] for r in rows]
gk = [r["G_k"] for r in rows]
ident = [abs(r["identity_residual"]) for r in rows]
lem25 = [abs(r["lemma25_residual"]) for r in rows]

fig, axes = plt.subplots(2, 2, figsize=(11, 8))

ax = axes[0][0]  # panel 1: energy decay
ax.loglog(tp1, E, label="E_u")
ax.loglog(tp1, scaledE, label="E_u (1+t)")
ax.set_title("energy decay")
ax.set_xlabel("1 + t")
ax.legend()

ax = axes[0][1]  # panel 2: solution norm
ax.loglog(tp1, l2, label="||u||")
if FREE_WAVE:
    c = max(l2[len(l2) // 2], 1e-300) / math.sqrt(tp1[len(l2) // 2])
    ax.loglog(tp1, [c * math.sqrt(v) for v in tp1], "--",
              label="slope-1 guide for ||u||^2")
ax.set_title("solution norm")
ax.set_xlabel("1 + t")
ax.legend()

ax = axes[1][0]  # panel 3: multiplier functional
ax.semilogx(tp1, gk)
ax.set_title("multiplier functional G_k")
ax.set_xlabel("1 + t")

ax = axes[1][1]  # panel 4: identity residuals
ax.loglog(tp1, ident, label="energy identity")
ax.loglog(tp1, lem25, label="accumulated-field identity")
ax.set_title("identity residuals")
ax.set_xlabel("1 + t")
ax.legend()

fig.tight_layout()
fig.savefig({png_path!r}, dpi=150)
print("wrote", {png_path!r})
'''


def cmd_plot(args) -> int:
    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        print(f"manifest not found: {manifest_path}", file=sys.stderr)
        return EXIT_ERROR
    manifest = json.loads(manifest_path.read_text())
    csv_path = manifest_path.parent / manifest["files"]["csv"]
    if not csv_path.exists():
        print(f"series not found: {csv_path}", file=sys.stderr)
        return EXIT_ERROR
    n_rows = sum(1 for _ in open(csv_path)) - 1
    if n_rows < 2:
        print("refusing to plot: series has fewer than 2 records", file=sys.stderr)
        return EXIT_ERROR
    name = csv_path.stem
    script = _PLOT_TEMPLATE.format(
        name=name,
        csv_path=str(csv_path.resolve()),
        png_path=str(csv_path.resolve().with_suffix(".png")),
        free_wave=bool(manifest.get("coefficients", {}).get("free_wave", False)),
    )
    out_path = Path(args.script) if args.script else manifest_path.parent / f"{name}.plot.py"
    out_path.write_text(script)
    print(f"wrote {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dampedwave",
        description="numerical laboratory for the damped wave equation with potential",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check coefficient hypotheses and smallness")
    v.add_argument("config")
    v.add_argument("--json", action="store_true", help="also print a JSON report")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="run a simulation and emit CSV + manifest")
    r.add_argument("config")
    r.add_argument("--out", default=None, help="output directory (or $DAMPEDWAVE_OUT)")
    r.add_argument("--name", default=None, help="basename for outputs")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("poincare", help="estimate the Poincare-type constant C*")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--domain", type=float, required=True, help="half width X of [-X, X]")
    p.add_argument("--nodes", type=int, required=True, help="cell count")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_poincare)

    f = sub.add_parser("fit", help="fit a decay exponent from a run CSV or manifest")
    f.add_argument("series", help="CSV or manifest path")
    f.add_argument("--quantity", default="E_u",
                   help="CSV column or l2_u_sq (default E_u)")
    f.add_argument("--window", type=float, nargs=2, default=(10.0, 200.0),
                   metavar=("T_LO", "T_HI"))
    f.add_argument("--claimed-rate", type=float, default=1.0)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep", help="semilinear (p, I0) outcome matrix")
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--p", required=True, help="comma-separated powers")
    s.add_argument("--i0", required=True, help="comma-separated data sizes")
    s.add_argument("--V0", type=float, default=0.01)
    s.add_argument("--L", type=float, default=1.0)
    s.add_argument("--eps1", type=float, default=1.0)
    s.add_argument("--t-end", type=float, default=40.0)
    s.add_argument("--dx", type=float, default=0.05)
    s.add_argument("--workers", type=int, default=2)
    s.add_argument("--out", default=None)
    s.add_argument("--name", default="sweep")
    s.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="generate a plotting script for a run")
    pl.add_argument("manifest")
    pl.add_argument("--script", default=None, help="where to write the script")
    pl.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
