"""Batch command-line front-end.

Subcommands
-----------
verify          run registered harnesses; nonzero exit when any fails
gauge           Monte Carlo gauge estimate at a point
eval            regular q-harmonic extension at points
gradient        finite-difference gradient of the extension at a point
counterexample  difference-quotient blow-up profile at the critical exponent
spectral        Dirichlet eigenpairs of the discrete operator
list            registered harnesses with their statement labels

Every run writes its artifacts under ``--out`` (default ``qharmlab-out``):
a JSON report embedding config hash / seed / version, delimited estimate
tables, and rendered figures.  Identical configuration and seed reproduce
byte-identical JSON.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import (
    RunConfig,
    build_boundary,
    build_domain,
    build_potential,
    load_config_file,
    parse_boundary_flag,
    parse_domain_flag,
    parse_potential_flag,
    stable_params,
)
from .errors import ConfigError, QharmlabError
from .registry import HARNESS_INDEX, HARNESSES, list_suites
from . import reporting
from .reporting import provenance_payload


def _common_flags(sp):
    sp.add_argument("--alpha", type=float, help="stability index in (0, 2)")
    sp.add_argument("--d", type=int, help="space dimension")
    sp.add_argument("--domain", type=str, help="domain shorthand, e.g. interval:-1,1")
    sp.add_argument("--q", type=str, help="potential shorthand, e.g. counterexample:w=0.3,r=0.2")
    sp.add_argument("--seed", type=int, help="base RNG seed")
    sp.add_argument("--workers", type=int, help="deterministic seed-space partitions")
    sp.add_argument("--n", type=int, help="sample count")
    sp.add_argument("--dt", type=float, help="time step")
    sp.add_argument("--out", type=str, help="output directory (default qharmlab-out)")
    sp.add_argument("--tolerance", type=float, help="tolerance override")
    sp.add_argument("--config", type=str, help="flat key-value config file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qharmlab",
                                 description="verification laboratory for fractional "
                                             "Schrodinger gradient estimates")
    ap.add_argument("--version", action="version", version=f"qharmlab {__version__}")
    subs = ap.add_subparsers(dest="subcommand", required=True)

    sp = subs.add_parser("verify", help="run harness suites")
    sp.add_argument("--suite", action="append", default=None,
                    help="harness key or 'all' (repeatable); see 'qharmlab list'")
    _common_flags(sp)

    sp = subs.add_parser("gauge", help="gauge function estimate")
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=8.0)
    _common_flags(sp)

    sp = subs.add_parser("eval", help="q-harmonic extension estimate")
    sp.add_argument("--x", type=float, action="append", required=True)
    sp.add_argument("--f", type=str, default="const:1",
                    help="boundary data shorthand: const:c, left-of:t, right-of:t")
    sp.add_argument("--t-max", type=float, default=8.0)
    _common_flags(sp)

    sp = subs.add_parser("gradient", help="finite-difference gradient of the extension")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--f", type=str, default="left-of:-1.5")
    sp.add_argument("--t-max", type=float, default=8.0)
    _common_flags(sp)

    sp = subs.add_parser("counterexample", help="critical-exponent blow-up profile")
    sp.add_argument("--w", type=float, default=0.3)
    sp.add_argument("--r", type=float, default=0.2)
    sp.add_argument("--kmin", type=int, default=3)
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--control", action="store_true",
                    help="also run the smooth control potential")
    _common_flags(sp)

    sp = subs.add_parser("spectral", help="Dirichlet eigenpairs on an interval")
    sp.add_argument("--m", type=int, default=256)
    sp.add_argument("--k", type=int, default=3)
    _common_flags(sp)

    subs.add_parser("list", help="list registered harnesses")
    return ap


def _load_cfg(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    cfg = RunConfig(args.subcommand, values)
    cfg.override("run.alpha", getattr(args, "alpha", None))
    cfg.override("run.d", getattr(args, "d", None))
    cfg.override("run.seed", getattr(args, "seed", None))
    cfg.override("run.workers", getattr(args, "workers", None))
    cfg.override("run.n", getattr(args, "n", None))
    cfg.override("run.dt", getattr(args, "dt", None))
    cfg.override("run.tolerance", getattr(args, "tolerance", None))
    if getattr(args, "domain", None):
        for k, v in parse_domain_flag(args.domain).items():
            cfg.override(k, v)
    if getattr(args, "q", None):
        for k, v in parse_potential_flag(args.q).items():
            cfg.override(k, v)
    if getattr(args, "f", None):
        for k, v in parse_boundary_flag(args.f).items():
            cfg.override(k, v)
    return cfg


def _outdir(args) -> Path:
    out = Path(getattr(args, "out", None) or "qharmlab-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_list(args) -> int:
    rows = list_suites()
    width = max(len(r["key"]) for r in rows)
    lwidth = max(len(r["label"]) for r in rows)
    for r in rows:
        print(f"{r['key']:{width}s}  {r['label']:{lwidth}s}  {r['summary']}")
    print(f"{len(rows)} harnesses registered")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_cfg(args)
    out = _outdir(args)
    keys = args.suite or ["all"]
    if "all" in keys:
        selected = list(HARNESSES)
    else:
        unknown = [k for k in keys if k not in HARNESS_INDEX]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)}; "
                              f"see 'qharmlab list'")
        selected = [HARNESS_INDEX[k] for k in keys]

    all_reports = []
    for harness in selected:
        outcome = harness.runner(cfg)
        all_reports.extend(outcome.reports)
        for rep in outcome.reports:
            status = "ok" if rep.passed else "FAIL"
            print(f"[{status}] {harness.key}: {rep.name} "
                  f"(worst {rep.worst_ratio:.5g}, tol {rep.tolerance:g})")
        _verify_figures(harness, outcome, out)

    table = reporting.render_report_table(all_reports)
    (out / "verify_table.txt").write_text(table)
    payload = {
        **provenance_payload(cfg.hash, cfg.seed),
        "suites": [h.key for h in selected],
        "reports": [r.to_dict() for r in all_reports],
        "passed": all(r.passed for r in all_reports),
    }
    reporting.write_json_atomic(out / "verify_report.json", payload)
    rows = [{"id": r.name, "value": r.worst_ratio, "stderr": "", "n": "",
             "seed": r.seed if r.seed is not None else ""} for r in all_reports]
    reporting.write_estimates_csv(out / "verify_summary.csv", rows,
                                  provenance={"config_hash": cfg.hash,
                                              "version": __version__})
    print(table, end="")
    return 0 if payload["passed"] else 1


def _verify_figures(harness, outcome, out: Path):
    arts = outcome.artifacts
    if "profiles" in arts:
        for tag, profile in arts["profiles"].items():
            reporting.fig_blowup(profile, out / f"fig_counterexample_{tag}.png")
    if "ratio_report" in arts:
        reporting.fig_ratio_profile(arts["ratio_report"], out / f"fig_{harness.key}.png")
    if "bridge_report" in arts:
        reporting.fig_lambda_curve(arts["bridge_report"], out / "fig_bridge.png")
    if "exponent_reports" in arts:
        for rep in arts["exponent_reports"]:
            beta = rep.details.get("beta")
            reporting.fig_exponent_fit(rep, out / f"fig_betau_{beta}.png")


def cmd_gauge(args) -> int:
    from .feynman_kac import gauge

    cfg = _load_cfg(args)
    out = _outdir(args)
    p = stable_params(cfg)
    dom = build_domain(cfg)
    q = build_potential(cfg, p.alpha, p.d)
    est = gauge(p, dom, q, args.x, n=cfg.get("run.n", 20_000, int),
                dt=cfg.get("run.dt", 0.005, float), seed=cfg.seed,
                t_max=args.t_max, workers=cfg.workers)
    prov = {"dt": cfg.get("run.dt", 0.005, float), "config_hash": cfg.hash,
            "version": __version__}
    reporting.write_estimates_csv(out / "gauge.csv", [est.to_row(f"gauge@x={args.x}")],
                                  provenance=prov, append=True)
    payload = {
        **provenance_payload(cfg.hash, cfg.seed),
        "x": args.x, "mean": est.mean, "stderr": est.stderr, "n": est.n,
        "diagnostics": est.extra,
    }
    reporting.write_json_atomic(out / "gauge.json", payload)
    _gauge_figure(est, out / "fig_gauge_diagnostic.png")
    print(f"gauge({args.x}) = {est.mean:.6f} +- {est.stderr:.6f} "
          f"(n={est.n}, stable={est.extra.get('stable')})")
    return 0


def _gauge_figure(est, path):
    import matplotlib.pyplot as plt

    horizons = est.extra.get("horizons", [])
    capped = est.extra.get("capped_means", [])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(horizons, capped, "o-")
    ax.set_xscale("log")
    ax.set_xlabel("horizon cap")
    ax.set_ylabel("capped gauge mean")
    ax.set_title("gaugeability diagnostic (stability under horizon doubling)")
    from .reporting import _save

    _save(fig, path)


def cmd_eval(args) -> int:
    from .feynman_kac import q_harmonic_eval

    cfg = _load_cfg(args)
    out = _outdir(args)
    p = stable_params(cfg)
    dom = build_domain(cfg)
    q = build_potential(cfg, p.alpha, p.d)
    f = build_boundary(cfg)
    rows, results = [], []
    for x in args.x:
        est = q_harmonic_eval(p, dom, q, f, x, n=cfg.get("run.n", 20_000, int),
                              dt=cfg.get("run.dt", 0.005, float), seed=cfg.seed,
                              t_max=args.t_max, workers=cfg.workers)
        rows.append(est.to_row(f"u@x={x}"))
        results.append({"x": x, "mean": est.mean, "stderr": est.stderr})
        print(f"u({x}) = {est.mean:.6f} +- {est.stderr:.6f}")
    prov = {"dt": cfg.get("run.dt", 0.005, float), "config_hash": cfg.hash,
            "version": __version__}
    reporting.write_estimates_csv(out / "eval.csv", rows, provenance=prov, append=True)
    reporting.write_json_atomic(out / "eval.json", {
        **provenance_payload(cfg.hash, cfg.seed), "results": results,
        "boundary": f.name, "potential": q.name,
    })
    _eval_figure(results, out / "fig_eval.png")
    return 0


def _eval_figure(results, path):
    import matplotlib.pyplot as plt

    from .reporting import _save

    xs = [r["x"] for r in results]
    ms = [r["mean"] for r in results]
    es = [3 * r["stderr"] for r in results]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(xs, ms, yerr=es, fmt="o", capsize=3)
    ax.set_xlabel("x")
    ax.set_ylabel("u(x)")
    ax.set_title("q-harmonic extension estimates (3-sigma bars)")
    _save(fig, path)


def cmd_gradient(args) -> int:
    from .feynman_kac import HarmonicEvaluator, gradient_fd

    cfg = _load_cfg(args)
    out = _outdir(args)
    p = stable_params(cfg)
    dom = build_domain(cfg)
    q = build_potential(cfg, p.alpha, p.d)
    f = build_boundary(cfg)
    ev = HarmonicEvaluator(p, dom, q, f, n=cfg.get("run.n", 40_000, int),
                           dt=cfg.get("run.dt", 0.002, float), seed=cfg.seed,
                           t_max=args.t_max, workers=cfg.workers)
    grad = gradient_fd(ev, args.x, args.h)
    value = ev.value(args.x)
    rows = [{"id": f"grad@x={args.x}[{i}]", "value": g, "stderr": s,
             "n": ev.n, "seed": cfg.seed}
            for i, (g, s) in enumerate(zip(grad.gradient, grad.stderr))]
    prov = {"dt": cfg.get("run.dt", 0.002, float), "config_hash": cfg.hash,
            "version": __version__}
    reporting.write_estimates_csv(out / "gradient.csv", rows, provenance=prov,
                                  append=True)
    reporting.write_json_atomic(out / "gradient.json", {
        **provenance_payload(cfg.hash, cfg.seed),
        "x": args.x, "h": args.h,
        "gradient": [float(g) for g in grad.gradient],
        "richardson_error": [float(e) for e in grad.error_estimate],
        "stderr": [float(s) for s in grad.stderr],
        "u": value.mean,
    })
    print(f"grad u({args.x}) = {grad.gradient} (+- {grad.stderr}, "
          f"fd error ~ {grad.error_estimate})")
    return 0


def cmd_counterexample(args) -> int:
    from .verification import counterexample_blowup

    cfg = _load_cfg(args)
    cfg.override("potential.w", args.w)
    cfg.override("potential.r", args.r)
    out = _outdir(args)
    from .params import StableParams

    p = StableParams(1, cfg.get("run.alpha", 0.5, float))
    from .domains import IntervalDomain

    dom = IntervalDomain(cfg.get("domain.a", -1.0, float), cfg.get("domain.b", 1.0, float))
    ks = range(args.kmin, args.kmax + 1)
    n = cfg.get("run.n", 60_000, int)
    dt = cfg.get("run.dt", 0.002, float)
    crit = counterexample_blowup(p, dom, args.w, args.r, ks, n, dt, cfg.seed,
                                 potential="critical")
    payload = {
        **provenance_payload(cfg.hash, cfg.seed),
        "alpha": p.alpha, "w": args.w, "r": args.r,
        "critical": crit.to_dict(),
        "log_divergent": crit.log_divergent(),
    }
    rows = [{"id": f"D@h={h:.6g}", "value": v, "stderr": s, "n": n, "seed": cfg.seed}
            for h, v, s in zip(crit.step_sizes, crit.quotients, crit.quotient_stderrs)]
    reporting.fig_blowup(crit, out / "fig_counterexample_critical.png")
    if args.control:
        ctrl = counterexample_blowup(p, dom, args.w, args.r, ks, n, dt, cfg.seed,
                                     potential="bump")
        payload["control"] = ctrl.to_dict()
        payload["control_flat"] = ctrl.flat()
        rows += [{"id": f"D_control@h={h:.6g}", "value": v, "stderr": s, "n": n,
                  "seed": cfg.seed}
                 for h, v, s in zip(ctrl.step_sizes, ctrl.quotients,
                                    ctrl.quotient_stderrs)]
        reporting.fig_blowup(ctrl, out / "fig_counterexample_control.png")
    prov = {"dt": dt, "config_hash": cfg.hash, "version": __version__}
    reporting.write_estimates_csv(out / "counterexample.csv", rows, provenance=prov)
    reporting.write_json_atomic(out / "counterexample.json", payload)
    print(f"blow-up slope b = {crit.slope:.4f} +- {crit.slope_stderr:.4f} "
          f"(t = {crit.t_value():.2f}, log-divergent: {crit.log_divergent()})")
    return 0


def cmd_spectral(args) -> int:
    from .spectral import build_discrete_frac_laplacian, eigenpairs

    cfg = _load_cfg(args)
    out = _outdir(args)
    p = stable_params(cfg)
    dom_a = cfg.get("domain.a", -1.0, float)
    dom_b = cfg.get("domain.b", 1.0, float)
    q = build_potential(cfg, p.alpha, 1)
    opr = build_discrete_frac_laplacian(p, (dom_a, dom_b), args.m)
    eig = eigenpairs(opr, q, args.k)
    reporting.write_eigen_csv(out / "spectral_phi.csv", eig)
    reporting.fig_eigenfunctions(eig, out / "fig_spectral.png")
    reporting.write_json_atomic(out / "spectral.json", {
        **provenance_payload(cfg.hash, cfg.seed),
        "alpha": p.alpha, "m": args.m, "interval": [dom_a, dom_b],
        "potential": q.name,
        "eigenvalues": [float(v) for v in eig.eigenvalues],
    })
    print("eigenvalues:", ", ".join(f"{v:.6f}" for v in eig.eigenvalues))
    return 0


COMMANDS = {
    "list": cmd_list,
    "verify": cmd_verify,
    "gauge": cmd_gauge,
    "eval": cmd_eval,
    "gradient": cmd_gradient,
    "counterexample": cmd_counterexample,
    "spectral": cmd_spectral,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.subcommand](args)
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"config error: {exc}{field}", file=sys.stderr)
        return 2
    except QharmlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
