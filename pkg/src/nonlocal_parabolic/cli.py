"""Command line entry point: `nonlocal-parabolic run <config.toml>` writes deterministic CSV/JSON reports."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from . import experiments as E
from .benchmarks import KernelSpec
from .config import SCENARIOS, ConfigError, ExperimentConfig, load_config, with_overrides

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.12g" % v


def kernel_spec(cfg: ExperimentConfig) -> KernelSpec:
    k = cfg.kernel
    return KernelSpec(k.kind, k.dim, k.normalization, k.alpha0, k.lam, k.coeff)


def thresholds(cfg: ExperimentConfig) -> dict:
    """Criterion id -> metric -> human-readable threshold."""
    th = cfg.thresholds
    u = f"<= {fmt(th.uniformity)}"
    return {
        1: {"*": ">= -1e-12"},
        2: {"lambda_required_max": f"<= {fmt(cfg.membership.lam)}", "cone_passed": "== 1"},
        3: {"worst_error": f"<= {fmt(th.operator_tol)}", "min_rate": f">= {fmt(th.operator_rate)}"},
        4: {"max_contractivity_excess": "<= 1e-12", "min_slope": f">= {fmt(th.steklov_slope)}"},
        5: {"*": u},
        6: {"*": u},
        7: {"beta_fit_min": "> 0"},
        8: {"delta_min": "> 0", "delta_spread": u},
        9: {"relative_deviation": f"<= {fmt(th.scaling_tol)}"},
    }


def run_criterion(cid: int, cfg: ExperimentConfig) -> E.CriterionResult:
    th, spec, n = cfg.thresholds, kernel_spec(cfg), cfg.threads
    dt, theta = cfg.solver.dt, cfg.solver.theta
    if cid == 1:
        return E.algebraic_suite(cfg.seed, cfg.inequalities.suite_scale)
    if cid == 2:
        m = cfg.membership
        return E.kernel_certification(
            m.alphas, m.lam, cfg.kernel.alpha0, m.cone_alphas, m.cone_lam, m.aperture, cfg.seed, n
        )
    if cid == 3:
        return E.operator_consistency(tol=th.operator_tol, min_rate=th.operator_rate)
    if cid == 4:
        return E.steklov_suite(cfg.seed, cfg.inequalities.steklov_fields, min_slope=th.steklov_slope)
    if cid == 5:
        iq = cfg.inequalities
        return E.functional_inequalities(iq.alphas, cfg.grid.h, iq.n_probes, cfg.seed, iq.sobolev_radius, th.uniformity, n)
    if cid == 6:
        return E.weak_harnack(cfg.alphas, spec, cfg.grid.h, dt, th.uniformity, n, theta=theta)
    if cid == 7:
        return E.holder_robustness(cfg.alphas, spec, cfg.grid.h_holder, dt, th.beta0, th.fit_residual, n, theta=theta)
    if cid == 8:
        return E.growth_lemma(
            cfg.alphas, spec, cfg.grid.h, dt, th.eps0, uniformity=th.uniformity, seed=cfg.seed, threads=n, theta=theta
        )
    if cid == 9:
        return E.scaling_check(cfg.alphas[0], tol=th.scaling_tol)
    raise ValueError(f"unknown criterion {cid}")


def run_scenario(cfg: ExperimentConfig) -> list:
    return [run_criterion(c, cfg) for c in cfg.criteria]


def _csv(header, rows) -> str:
    return "\n".join([",".join(header)] + [",".join(fmt(v) for v in r) for r in rows]) + "\n"


def render_reports(results, cfg: ExperimentConfig) -> dict:
    """Relative path -> file contents. No timestamps or runtimes, so reruns are byte-identical."""
    files = {}
    per_alpha, glob = {}, []
    ops_by_file = {}
    for res in results:
        for r in res.rows:
            line = (res.cid, r.op, r.constant, r.value)
            if r.alpha is None:
                glob.append(line)
                ops_by_file.setdefault("global_constants.csv", set()).add(r.op)
            else:
                key = f"alpha_{fmt(r.alpha)}/constants.csv"
                per_alpha.setdefault(key, []).append(line)
                ops_by_file.setdefault(key, set()).add(r.op)
        files.update(res.artifacts)
    header = ("criterion", "op", "constant", "value")
    for key in sorted(per_alpha):
        files[key] = _csv(header, per_alpha[key])
    files["global_constants.csv"] = _csv(header, glob)
    th = thresholds(cfg)
    summary = []
    for res in results:
        rules = th.get(res.cid, {})
        for metric in sorted(res.metrics):
            rule = rules.get(metric, rules.get("*", ""))
            summary.append((res.cid, res.name, metric, res.metrics[metric], rule, ""))
        summary.append((res.cid, res.name, "passed", float(res.passed), "== 1", "true" if res.passed else "false"))
    files["summary.csv"] = _csv(("criterion", "name", "metric", "value", "threshold", "passed"), summary)
    columns = {
        "criterion": "criterion id",
        "op": "operation that produced the value",
        "constant": "name of the reported constant",
        "value": "value, formatted with %.12g",
    }
    manifest = {
        "config": _jsonable(asdict(cfg)),
        "criteria": [
            {"id": r.cid, "name": r.name, "passed": bool(r.passed), "ops": list(r.ops)} for r in results
        ],
        "files": {
            k: {"sha256": hashlib.sha256(v.encode()).hexdigest(), "ops": sorted(ops_by_file.get(k, ()))}
            for k, v in sorted(files.items())
        },
        "columns": columns,
    }
    files["manifest.json"] = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    return files


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj


def write_reports(files: dict, out: Path) -> None:
    for rel, text in files.items():
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-parabolic", description="Robustness experiments for nonlocal parabolic equations.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario from a TOML config")
    run.add_argument("config", help="path to a TOML config file")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--alpha", type=float, action="append", help="override the benchmark alphas (repeatable)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = with_overrides(
            cfg,
            scenario=args.scenario,
            alphas=tuple(args.alpha) if args.alpha else None,
            out=args.out,
            seed=args.seed,
            threads=args.threads,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    results = run_scenario(cfg)
    out = Path(cfg.out)
    write_reports(render_reports(results, cfg), out)
    for r in results:
        print(f"criterion {r.cid} ({r.name}): {'PASS' if r.passed else 'FAIL'}")
    failed = [r for r in results if not r.passed]
    if failed:
        names = ", ".join(f"{r.cid} ({r.name})" for r in failed)
        print(f"failed criteria: {names}", file=sys.stderr)
        return EXIT_FAIL
    print(f"all criteria passed; reports in {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
