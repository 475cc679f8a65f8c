"""darkmeter command line.

Every command writes its outputs plus one ``<out>.manifest.json`` recording
the argv, resolved configuration, seed, input/output hashes and duration.
``darkmeter replay MANIFEST`` re-runs a manifest and checks the outputs hash
identically.

Exit codes: 0 success, 2 input error, 3 convergence or numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .attenuation import DEFAULT_SATURATION_CUTOFF, attenuation, builtin_table_path, ea_estimate, load_system, solve_ls
from .bayes import McmcConfig, analyze, default_f_grid, powerlaw_fit, sensitivity_sweep
from .bayes.analysis import read_sweep_csv, write_sweep_csv
from .budget import (
    FlashModelInput,
    dark_hdi_length,
    flash_corrected,
    retina_scaling,
    rho_sweep,
    write_rho_sweep_csv,
)
from .common import GaussianEstimate, Side
from .errors import ConfigError, ConvergenceError, DarkmeterError, QuadratureError
from .jzs import TTestInput, jzs_bf01, t_statistic
from .protocol import SeriesSummary, ShutterProtocol, build_differences, read_counts_csv, summarize, write_counts_csv
from .simulator import load_config, simulate_campaign

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
SEED_ENV = "DARKMETER_SEED"


class _Run:
    """Collects inputs/outputs of one command for its manifest."""

    def __init__(self, args: argparse.Namespace, argv: list[str]):
        self.args = args
        self.argv = argv
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.config: dict[str, Any] = {}
        self.seed: int | None = None
        self.t0 = time.perf_counter()

    def write_json(self, path: Path, payload: Any) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.outputs.append(path)

    def manifest(self, status: int) -> None:
        out = Path(self.args.out)
        payload = {
            "schema_version": 1,
            "command": self.args.command,
            "argv": self.argv,
            "config": self.config,
            "seed": self.seed,
            "inputs": [{"path": str(p), "sha256": sha256(p)} for p in self.inputs],
            "outputs": [{"path": str(p), "sha256": sha256(p)} for p in self.outputs],
            "exit_code": status,
            "darkmeter_version": __version__,
            "duration_s": round(time.perf_counter() - self.t0, 3),
        }
        path = manifest_path(out)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


def resolve_seed(flag: int | None, fallback: int | None = None) -> int:
    if flag is not None:
        return flag
    if fallback is not None:
        return fallback
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


def _summary_stats(text: str) -> SeriesSummary:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("--summary-stats expects mean,var,n", field="summary-stats")
    try:
        return SeriesSummary.from_stats(float(parts[0]), float(parts[1]), int(float(parts[2])))
    except ValueError as exc:
        raise ConfigError(str(exc), field="summary-stats") from None


def _estimate(text: str, name: str) -> GaussianEstimate:
    try:
        return GaussianEstimate.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc), field=name) from None


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _protocol(args) -> ShutterProtocol:
    try:
        return ShutterProtocol(args.block_len, args.interval_len, not args.keep_first)
    except ValueError as exc:
        raise ConfigError(str(exc), field="protocol") from None


def _mcmc(args, run: _Run) -> McmcConfig:
    run.seed = resolve_seed(args.seed)
    try:
        return McmcConfig.for_total(args.draws, args.chains, args.warmup, run.seed)
    except ValueError as exc:
        raise ConfigError(str(exc), field="draws") from None


def _load_data(args, run: _Run) -> tuple[SeriesSummary, dict]:
    if args.summary_stats is not None:
        summary = _summary_stats(args.summary_stats)
        return summary, {"summary_stats": {"mean": summary.mean, "variance": summary.variance, "n": summary.n}}
    path = Path(args.data)
    run.inputs.append(path)
    summary = summarize(build_differences(read_counts_csv(path), _protocol(args)))
    desc = {
        "path": str(path),
        "sha256": sha256(path),
        "mean": summary.mean,
        "variance": summary.variance,
        "n": summary.n,
        "hourly": [h.__dict__ for h in summary.hourly],
    }
    return summary, desc


# --- commands ---------------------------------------------------------------


def cmd_simulate(args, run: _Run) -> int:
    path = Path(args.config)
    run.inputs.append(path)
    cfg = load_config(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    seed = resolve_seed(args.seed, raw.get("seed"))
    cfg = replace(cfg, seed=seed)
    run.seed = seed
    run.config = cfg.to_dict()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_counts_csv(simulate_campaign(cfg), out)
    run.outputs.append(out)
    return EXIT_OK


def cmd_analyze(args, run: _Run) -> int:
    summary, data_desc = _load_data(args, run)
    cfg = _mcmc(args, run)
    run.config = {"f": args.f, "mass": args.mass, "mcmc": cfg.__dict__}
    res = analyze(summary, args.f, cfg, args.mass, allow_unconverged=True)
    report = {
        "darkmeter_version": __version__,
        "input": data_desc,
        "prior": res.prior.as_dict(),
        "posterior": res.summary.as_dict(),
        "diagnostics": {
            **res.samples.diagnostics,
            "acceptance": list(res.samples.acceptance),
            "converged": res.samples.converged,
        },
        "mcmc": cfg.__dict__,
        "draws_file": None,
    }
    if args.draws_out:
        dpath = Path(args.draws_out)
        with dpath.open("w", encoding="utf-8") as fh:
            fh.write("mu,sigma_sq\n")
            for m, v in zip(res.samples.mu_draws, res.samples.sigma_sq_draws):
                fh.write(f"{m!r},{v!r}\n")
        run.outputs.append(dpath)
        report["draws_file"] = str(dpath)
    run.write_json(Path(args.out), report)
    if not res.samples.converged:
        print("MCMC diagnostics failed; evidence measures in the report are not trustworthy", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_sweep(args, run: _Run) -> int:
    out = Path(args.out)
    column = "rsd_pos" if args.variant == "positive" else "rsd_full"
    status = EXIT_OK
    if args.fit_only:
        table_path = Path(args.fit_only)
        run.inputs.append(table_path)
        table = read_sweep_csv(table_path)
        if column not in table:
            raise ConfigError(f"table has no '{column}' column", field="fit-only")
        f, r = table["f"], table[column]
    else:
        summary, data_desc = _load_data(args, run)
        cfg = _mcmc(args, run)
        grid = _float_list(args.f_grid) if args.f_grid else default_f_grid(summary.n)
        run.config = {"f_grid": grid, "mass": args.mass, "mcmc": cfg.__dict__}
        rows = sensitivity_sweep(summary, grid, cfg, args.mass, allow_unconverged=True)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(rows, out)
        run.outputs.append(out)
        if not all(s.converged for s in rows):
            status = EXIT_NUMERIC
        f = np.array([s.f for s in rows])
        r = np.array([getattr(s, "sd_ratio_pos" if column == "rsd_pos" else "sd_ratio_full") for s in rows])
    run.config.update({"fit_threshold": args.fit_threshold, "variant": args.variant})
    a, b = powerlaw_fit(f, r, args.fit_threshold)
    fit_path = out.with_name(out.stem + ".fit.json")
    run.write_json(
        fit_path,
        {"a": a, "b": b, "fit_threshold": args.fit_threshold, "variant": args.variant, "darkmeter_version": __version__},
    )
    return status


def cmd_ea(args, run: _Run) -> int:
    table = Path(args.table) if args.table else builtin_table_path()
    run.inputs.append(table)
    run.config = {"saturation_cutoff": args.saturation_cutoff, "weighted": args.weighted}
    sol = solve_ls(load_system(table, args.saturation_cutoff), weighted=args.weighted)
    report: dict[str, Any] = {"solution": sol.as_dict(), "input": {"path": str(table), "sha256": sha256(table)}}
    if args.closed_rate:
        src = GaussianEstimate(sol.log10_source, 0.0 if math.isnan(sol.log10_source_sd) else sol.log10_source_sd)
        a_c = attenuation(src, _estimate(args.closed_rate, "closed-rate"))
        report["attenuation"] = a_c.as_dict()
        if args.lab_rate:
            report["ea_estimate"] = ea_estimate(_estimate(args.lab_rate, "lab-rate"), a_c).as_dict()
    report["darkmeter_version"] = __version__
    run.write_json(Path(args.out), report)
    return EXIT_OK


def cmd_budget(args, run: _Run) -> int:
    kind = args.budget_command
    run.config = {k: v for k, v in vars(args).items() if k not in ("func", "out", "command", "budget_command")}
    run.config["kind"] = kind
    if kind == "rho-sweep":
        grid = np.geomspace(args.rho_min, args.rho_max, args.points)
        rows = rho_sweep(_estimate(args.delta_b, "delta-b"), _estimate(args.delta_m, "delta-m"), args.q, grid)
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_rho_sweep_csv(rows, out)
        run.outputs.append(out)
        return EXIT_OK
    if kind == "flash":
        inp = FlashModelInput(_estimate(args.delta_b, "delta-b"), _estimate(args.delta_m, "delta-m"), args.q, args.rho_ratio)
        result: dict[str, Any] = {"light_counts": flash_corrected(inp).as_dict()}
    elif kind == "hdi-length":
        result = {"dark_hdi_length": dark_hdi_length(args.var_rd, args.n)}
    else:
        result = {"upper_limit": retina_scaling(args.upper, args.diameter_mm)}
    result["inputs"] = run.config
    run.write_json(Path(args.out), result)
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_jzs(args, run: _Run) -> int:
    if args.summary_stats is not None:
        s = _summary_stats(args.summary_stats)
        t, n = t_statistic(s.mean, s.sd, s.n), s.n
    else:
        if args.t is None or args.n is None:
            raise ConfigError("give --summary-stats or both --t and --n", field="t")
        t, n = args.t, args.n
    side = Side.POSITIVE_ONLY if args.side == "positive" else Side.TWO_SIDED
    bf01 = jzs_bf01(TTestInput(t, n, args.scale, side))
    result = {"t": t, "n": n, "scale": args.scale, "side": side.value, "bf01": bf01, "bf10": 1.0 / bf01}
    run.config = {k: v for k, v in result.items() if k not in ("bf01", "bf10")}
    run.write_json(Path(args.out), result)
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    status = main(manifest["argv"])
    if status != manifest["exit_code"]:
        print(f"exit code {status} differs from recorded {manifest['exit_code']}", file=sys.stderr)
        return EXIT_NUMERIC
    mismatched = [o["path"] for o in manifest["outputs"] if sha256(o["path"]) != o["sha256"]]
    for p in mismatched:
        print(f"output differs: {p}", file=sys.stderr)
    return EXIT_NUMERIC if mismatched else EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_mcmc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--warmup", type=int, default=1000, help="warmup draws per chain")
    p.add_argument("--draws", type=int, default=60_000, help="total kept draws over all chains")
    p.add_argument("--mass", type=float, default=0.95, help="HDI mass")


def _add_data(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--data", help="count-series CSV (t_start_s,shutter,counts)")
    g.add_argument("--summary-stats", metavar="MEAN,VAR,N", help="skip ingestion; use published difference moments")
    p.add_argument("--block-len", type=int, default=10)
    p.add_argument("--interval-len", type=float, default=1.0)
    p.add_argument("--keep-first", action="store_true", help="keep the first interval of every block")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="darkmeter", description="Shutter-differenced darkness measurement toolkit")
    parser.add_argument("--version", action="version", version=f"darkmeter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a shuttered campaign to CSV")
    p.add_argument("--config", required=True, help="SimConfig JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="posterior analysis of the difference distribution")
    _add_data(p)
    _add_mcmc(p)
    p.add_argument("--f", type=float, default=10.0, help="prior broadening factor")
    p.add_argument("--out", required=True, help="analysis report JSON")
    p.add_argument("--draws-out", help="optional CSV of draws (mu,sigma_sq)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="prior-broadening sweep and power-law fit of the Savage-Dickey ratio")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--data")
    g.add_argument("--summary-stats", metavar="MEAN,VAR,N")
    g.add_argument("--fit-only", metavar="SWEEP_CSV", help="fit an existing sweep table instead of running one")
    p.add_argument("--block-len", type=int, default=10)
    p.add_argument("--interval-len", type=float, default=1.0)
    p.add_argument("--keep-first", action="store_true")
    _add_mcmc(p)
    p.add_argument("--f-grid", help="comma-separated broadening factors (default grid if omitted)")
    p.add_argument("--fit-threshold", type=float, default=10.0)
    p.add_argument("--variant", choices=("positive", "full"), default="positive")
    p.add_argument("--out", required=True, help="sweep CSV; the fit goes to <stem>.fit.json")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ea", help="LED/filter tomography and environment-attenuation estimate")
    p.add_argument("--table", help="led,f1..fn,log10_rate,log10_sd CSV (bundled measurement set if omitted)")
    p.add_argument("--saturation-cutoff", type=float, default=DEFAULT_SATURATION_CUTOFF)
    p.add_argument("--weighted", action="store_true", help="weight rows by 1/log10_sd (sensitivity check only)")
    p.add_argument("--closed-rate", metavar="MEAN,SD", help="LED rate through the closed chamber (cnt/s)")
    p.add_argument("--lab-rate", metavar="MEAN,SD", help="lab light level (cnt/s)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ea)

    p = sub.add_parser("budget", help="derived-quantity calculators")
    bsub = p.add_subparsers(dest="budget_command", required=True)
    b = bsub.add_parser("flash", help="reflected-flash corrected light counts")
    b.add_argument("--delta-b", required=True, metavar="MEAN,SD")
    b.add_argument("--delta-m", required=True, metavar="MEAN,SD")
    b.add_argument("--q", type=float, required=True)
    b.add_argument("--rho-ratio", type=float, required=True)
    b = bsub.add_parser("rho-sweep", help="flash correction over a log grid of rho ratios (CSV)")
    b.add_argument("--delta-b", required=True, metavar="MEAN,SD")
    b.add_argument("--delta-m", required=True, metavar="MEAN,SD")
    b.add_argument("--q", type=float, required=True)
    b.add_argument("--rho-min", type=float, default=1e-5)
    b.add_argument("--rho-max", type=float, default=0.9)
    b.add_argument("--points", type=int, default=50)
    b = bsub.add_parser("hdi-length", help="0.95 interval length reachable in absolute darkness")
    b.add_argument("--var-rd", type=float, required=True)
    b.add_argument("--n", type=int, required=True)
    b = bsub.add_parser("retina", help="scale an upper limit to a retinal spot diameter")
    b.add_argument("--upper", type=float, required=True)
    b.add_argument("--diameter-mm", type=float, required=True)
    for b in bsub.choices.values():
        b.add_argument("--out", required=True)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("jzs", help="Cauchy-prior one-sample Bayes factor")
    p.add_argument("--summary-stats", metavar="MEAN,VAR,N")
    p.add_argument("--t", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--scale", type=float, default=0.707)
    p.add_argument("--side", choices=("positive", "two-sided"), default="positive")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_jzs)

    p = sub.add_parser("replay", help="re-run a manifest and verify its outputs")
    p.add_argument("manifest")
    p.set_defaults(func=None)
    return parser


# options whose values may legitimately start with '-' (negative means)
_SIGNED_VALUE_FLAGS = {
    "--summary-stats", "--delta-b", "--delta-m", "--closed-rate", "--lab-rate", "--t", "--upper",
}


def _glue_signed_values(argv: list[str]) -> list[str]:
    """Turn ``--flag -1.5e-3,2`` into ``--flag=-1.5e-3,2`` so argparse does not read it as an option."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in _SIGNED_VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_signed_values(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "replay":
        return cmd_replay(args)

    run = _Run(args, argv)
    try:
        status = args.func(args, run)
    except (ConvergenceError, QuadratureError) as exc:
        print(f"darkmeter: numeric failure: {exc}", file=sys.stderr)
        status = EXIT_NUMERIC
    except (DarkmeterError, ValueError, OSError) as exc:
        print(f"darkmeter: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    run.manifest(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
