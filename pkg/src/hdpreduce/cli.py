"""Command line entry point.

    hdpreduce run <config.yaml>
    hdpreduce verify [--scenario ID]
    hdpreduce print-schema

Exit codes: 0 fine, 1 verification failed, 2 bad configuration (nothing
written), 3 drift alarm or inconsistent solve (partial outputs written).
HDPREDUCE_OUTPUT_DIR overrides the output directory of the config.
"""
import argparse
import json
import os
import sys

from .bundle import atiyah_cotangent
from .config import SCHEMA, load_config
from .errors import ConfigError, HdpError
from .integrate import (deviation_series, lift_trajectory, project_trajectory,
                        reconstruct_group, simulate_full, simulate_reduced)
from . import output

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_ALARM = 0, 1, 2, 3
OUTPUT_ENV = "HDPREDUCE_OUTPUT_DIR"


def _suite(scenario_id=None, out=None):
    from .verify import run_suite
    out = out or sys.stdout
    checks = run_suite(scenario_id)
    for c in checks:
        print(c.line(), file=out)
    ok = all(c.passed for c in checks)
    print("all checks passed" if ok else "some checks FAILED", file=out)
    return checks, ok


def _paths(cfg):
    base = os.path.join(cfg.out_dir, cfg.prefix)
    return lambda suffix: f"{base}_{suffix}"


def run(path):
    try:
        cfg = load_config(path, os.environ.get(OUTPUT_ENV))
        if cfg.mode == "verify":
            sc = s0 = None
        else:
            sc = cfg.build_scenario()
            s0 = cfg.initial_state(sc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    output.ensure_dir(cfg.out_dir)
    at = _paths(cfg)
    summary = {"scenario": cfg.scenario_id, "mode": cfg.mode,
               "dt": cfg.integrator.dt, "T": cfg.integrator.T,
               "method": cfg.integrator.method, "alarm": None}

    if cfg.mode == "verify":
        checks, ok = _suite()
        summary["checks"] = [{"number": c.number, "name": c.name, "passed": c.passed,
                              "skipped": c.skipped, "value": c.value, "tol": c.tol}
                             for c in checks]
        output.write_summary(at("diagnostics.json"), summary)
        return EXIT_OK if ok else EXIT_FAILED

    conn = sc.problem.conn
    trajs = {}
    status = EXIT_OK
    try:
        if cfg.mode in ("full", "both"):
            trajs["full"] = simulate_full(sc, s0, cfg.integrator)
        if cfg.mode in ("reduced", "both"):
            r0 = atiyah_cotangent(s0, conn)
            trajs["reduced"] = simulate_reduced(sc, r0, cfg.integrator)
            C = reconstruct_group(trajs["reduced"], s0.C, problem=sc.problem)
            trajs["reconstructed"] = lift_trajectory(trajs["reduced"], C, conn)
    except HdpError as exc:
        status = EXIT_ALARM
        summary["alarm"] = {"type": type(exc).__name__, "message": str(exc)}
        part = getattr(exc, "trajectory", None)
        if part is not None and len(part):
            trajs[part.kind] = part
        print(f"alarm: {type(exc).__name__}: {exc}", file=sys.stderr)

    for kind, tr in trajs.items():
        output.write_trajectory(at(f"{kind}.csv"), tr)
        if tr.diagnostics:
            output.write_diagnostic_table(at(f"{kind}_diagnostics.csv"), tr)
            summary[kind] = output.summarize(tr)

    if "full" in trajs and "reduced" in trajs and \
            len(trajs["full"]) == len(trajs["reduced"]):
        proj = project_trajectory(trajs["full"], conn)
        dev = deviation_series(proj, trajs["reduced"])
        output.write_series(at("deviation.csv"), proj.times, dev, "deviation")
        summary["max_deviation"] = float(dev.max())

    output.write_summary(at("diagnostics.json"), summary)
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="hdpreduce", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="integrate a configured scenario")
    p_run.add_argument("config")
    p_ver = sub.add_parser("verify", help="run the acceptance suite")
    p_ver.add_argument("--scenario", choices=["ball_hocs", "ball_dalembert", "free"])
    sub.add_parser("print-schema", help="print the config JSON schema")
    args = ap.parse_args(argv)

    if args.cmd == "run":
        return run(args.config)
    if args.cmd == "verify":
        _, ok = _suite(args.scenario)
        return EXIT_OK if ok else EXIT_FAILED
    print(json.dumps(SCHEMA, indent=2))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
