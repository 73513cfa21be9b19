"""Command-line front end.

Subcommands: verify, degree, foliate, convergence, list. Exit codes:
0 success, 1 a numerical check or oracle comparison failed, 2 bad
configuration or arguments, 3 the degree estimate was inconclusive,
4 the foliation obstruction check found a contradiction.

Report files written with --out never contain wall-clock times, so two
runs with identical inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .catalogue import THRESHOLDS, catalogue_rows, evaluate_report, family_of, make_scenario
from .errors import (
    ConfigError,
    InconclusiveDegreeError,
    RetryWithDifferentValueError,
    TheoremContradictionError,
    TransgaussError,
)
from .foliation import VERDICT_CONTRADICTION, obstruction_check
from .invariants import degree as estimate_degree
from .invariants import degree_by_preimage, verify_main_theorem
from .kernel import DiffConfig

_RUN_KEYS = {"scenario", "v", "resolution", "t_samples", "orientation", "oracle", "out", "format"}
_ORACLE_SEED = 20240811
_ORACLE_RETRIES = 5


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _res_str(resolution) -> str:
    if isinstance(resolution, (list, tuple)):
        return ",".join(str(int(r)) for r in resolution)
    return str(int(resolution))


def _validate_threads() -> int:
    raw = os.environ.get("TRANSGAUSS_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"TRANSGAUSS_THREADS must be a positive integer, got {raw!r}")
    if not 1 <= n <= 256:
        raise ConfigError(f"TRANSGAUSS_THREADS must be in [1, 256], got {n}")
    # Evaluation is sequential; the variable is validated so a typo fails
    # loudly instead of silently running with an unintended setting.
    return n


def _parse_resolution(value):
    if value is None:
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, (list, tuple)):
        vals = [int(v) for v in value]
    else:
        parts = [p.strip() for p in str(value).split(",") if p.strip()]
        try:
            vals = [int(p) for p in parts]
        except ValueError:
            raise ConfigError(f"bad resolution {value!r}: expected N or N,N,...")
    if not vals:
        raise ConfigError("empty resolution")
    return vals[0] if len(vals) == 1 else vals


def _parse_t_samples(value):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value] or None
    try:
        vals = [float(p) for p in str(value).split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"bad t-samples {value!r}: expected comma-separated floats")
    return vals or None


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {path}: {exc}")
    for section in data:
        if section not in ("run", "diff", "foliate"):
            raise ConfigError(f"unknown config section [{section}]")
    run = data.get("run", {})
    for key in run:
        if key not in _RUN_KEYS:
            raise ConfigError(f"unknown [run] key {key!r}")
    return data


def _merge(args, config):
    """Fill argparse gaps from [run]/[diff]/[foliate]; explicit flags win."""
    run = config.get("run", {})

    def pick(flag_value, key, parse=lambda x: x):
        if flag_value is not None:
            return parse(flag_value)
        if key in run:
            return parse(run[key])
        return None

    merged = argparse.Namespace(**vars(args))
    merged.scenario = pick(args.scenario, "scenario", str)
    if hasattr(args, "v"):
        merged.v = pick(args.v, "v", str)
    merged.resolution = pick(args.resolution, "resolution", _parse_resolution)
    if hasattr(args, "t_samples"):
        merged.t_samples = pick(args.t_samples, "t_samples", _parse_t_samples)
    merged.orientation = pick(args.orientation, "orientation", int)
    if hasattr(args, "oracle"):
        merged.oracle = pick(args.oracle, "oracle", str)
    if hasattr(args, "out"):
        merged.out = pick(args.out, "out", str)
    if hasattr(args, "format"):
        merged.format = pick(args.format, "format", str)

    diff_cfg = config.get("diff", {})
    merged.diff = DiffConfig(
        step=float(diff_cfg.get("step", 1e-4)),
        richardson_levels=int(diff_cfg.get("richardson_levels", 1)),
    )
    fol = config.get("foliate", {})
    if hasattr(args, "rank_tol"):
        merged.rank_tol = args.rank_tol if args.rank_tol is not None else fol.get("rank_tol")
    if hasattr(args, "rank_bound"):
        merged.rank_bound = (
            args.rank_bound if args.rank_bound is not None else fol.get("rank_bound")
        )
    return merged


def _scenario_from(args):
    if not args.scenario:
        raise ConfigError("--scenario is required (or [run].scenario in --config)")
    orientation = args.orientation if args.orientation is not None else 1
    if orientation not in (1, -1):
        raise ConfigError(f"orientation must be 1 or -1, got {orientation}")
    sc = make_scenario(args.scenario, orientation=orientation, diff=args.diff)
    resolution = args.resolution if args.resolution is not None else sc.default_resolution
    return sc, resolution, orientation


def _field_from(scenario, args):
    name = args.v if getattr(args, "v", None) else scenario.default_field.name
    return scenario.field(name)


def _write_text(path, text):
    Path(path).write_text(text, encoding="utf-8")


def _report_json(report, checks, passed):
    payload = report.to_dict()
    payload["checks"] = checks
    payload["all_passed"] = bool(passed)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _report_csv(report):
    lines = ["# transgauss-verify-csv v1"]
    lines.append(
        "# scenario=%s v=%s resolution=%s orientation=%d degree=%d"
        % (
            report.scenario,
            report.v_name,
            _res_str(report.resolution),
            report.orientation,
            report.degree.rounded,
        )
    )
    lines.append("k,integral,rhs,residual")
    for k, (i, r, d) in enumerate(zip(report.integrals, report.rhs, report.residuals)):
        lines.append(f"{k},{_fmt(i)},{_fmt(r)},{_fmt(d)}")
    return "\n".join(lines) + "\n"


def cmd_verify(args):
    sc, resolution, orientation = _scenario_from(args)
    vfield = _field_from(sc, args)
    thresholds = THRESHOLDS[family_of(sc.name)]
    t0 = time.perf_counter()
    report = verify_main_theorem(
        sc.surface,
        vfield,
        resolution,
        t_samples=args.t_samples,
        scenario=sc.name,
        expected_degree=thresholds.get("expected_degree"),
    )
    wall = time.perf_counter() - t0
    checks, passed = evaluate_report(report, thresholds)

    print(f"scenario={sc.name} v={vfield.name} resolution={resolution} orientation={orientation}")
    d = report.degree
    print(f"degree: raw={_fmt(d.raw)} rounded={d.rounded} residual={_fmt(d.residual)}")
    for k, (i, r) in enumerate(zip(report.integrals, report.rhs)):
        print(f"mu{k}: integral={_fmt(i)} rhs={_fmt(r)}")
    if report.sign_flip_suspected:
        print("note: degree has the opposite sign of the expected value; "
              "if this input is oriented, check the chart orientation flag")
    for c in checks:
        tag = "PASS" if c["passed"] else "FAIL"
        print(f"{tag} {c['name']} value={_fmt(c['value'])} threshold={_fmt(c['threshold'])}")
    npass = sum(c["passed"] for c in checks)
    print(
        f"overall: {'PASS' if passed else 'FAIL'} ({npass}/{len(checks)} checks) "
        f"wall={wall:.2f}s transgauss {__version__}"
    )

    if args.out:
        fmt = (args.format or "json").lower()
        if fmt == "json":
            _write_text(args.out, _report_json(report, checks, passed))
        elif fmt == "csv":
            _write_text(args.out, _report_csv(report))
        else:
            raise ConfigError(f"unknown format {fmt!r} (json or csv)")
    return 0 if passed else 1


def _oracle_degree(scenario, resolution):
    if scenario.oracle_value is None:
        raise ConfigError(f"scenario {scenario.name} has no preimage oracle value")
    value = np.asarray(scenario.oracle_value, dtype=float)
    rng = np.random.default_rng(_ORACLE_SEED)
    last = None
    for _ in range(_ORACLE_RETRIES):
        try:
            return degree_by_preimage(scenario.surface, value, resolution)
        except RetryWithDifferentValueError as exc:
            last = exc
            value = value + 0.05 * rng.standard_normal(value.shape)
            value = value / np.linalg.norm(value)
    raise InconclusiveDegreeError(f"preimage oracle kept hitting critical values: {last}")


def cmd_degree(args):
    sc, resolution, orientation = _scenario_from(args)
    t0 = time.perf_counter()
    estimate = estimate_degree(sc.surface, resolution)
    wall = time.perf_counter() - t0
    print(f"scenario={sc.name} resolution={resolution} orientation={orientation}")
    print(
        f"degree: raw={_fmt(estimate.raw)} rounded={estimate.rounded} "
        f"residual={_fmt(estimate.residual)}"
    )
    payload = {
        "scenario": sc.name,
        "resolution": resolution if isinstance(resolution, int) else list(resolution),
        "orientation": orientation,
        "degree": estimate.to_dict(),
    }
    exit_code = 0
    if args.oracle:
        if args.oracle != "preimage":
            raise ConfigError(f"unknown oracle {args.oracle!r} (only: preimage)")
        oracle_deg = _oracle_degree(sc, resolution)
        match = oracle_deg == estimate.rounded
        print(f"oracle: preimage degree={oracle_deg} ({'matches' if match else 'MISMATCH'})")
        payload["oracle"] = {"kind": "preimage", "degree": int(oracle_deg), "matches": bool(match)}
        if not match:
            exit_code = 1
    print(f"wall={wall:.2f}s transgauss {__version__}")
    if args.out:
        _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return exit_code


def cmd_foliate(args):
    sc, resolution, orientation = _scenario_from(args)
    vfield = _field_from(sc, args)
    kwargs = {}
    if args.rank_tol is not None:
        kwargs["rank_tol"] = float(args.rank_tol)
    if args.rank_bound is not None:
        kwargs["rank_bound"] = int(args.rank_bound)
    report = obstruction_check(
        sc.surface,
        vfield,
        resolution,
        scenario=sc.name,
        declared_foliation=vfield.name in sc.leaf_fields,
        **kwargs,
    )
    print(
        f"scenario={sc.name} v={vfield.name} resolution={resolution} "
        f"orientation={orientation} input={report.input_label}"
    )
    hist = " ".join(f"{k}:{v}" for k, v in sorted(report.rank_histogram.items()))
    print(f"rank bound: {report.rank_bound}  max rank: {report.max_rank}  histogram: {hist}")
    print(
        f"degree: {report.degree.rounded} (raw {_fmt(report.degree.raw)})  "
        f"max |mu_top|: {_fmt(report.mu_top_max_abs)}"
    )
    print(report.verdict)
    if args.out:
        _write_text(
            args.out, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    if report.verdict == VERDICT_CONTRADICTION:
        raise TheoremContradictionError(
            f"{sc.name}/{vfield.name}: rank bound satisfied but degree = {report.degree.rounded}"
        )
    return 0


def cmd_convergence(args):
    sc, resolution, orientation = _scenario_from(args)
    vfield = _field_from(sc, args)
    if isinstance(resolution, int):
        sweep = [resolution]
    else:
        sweep = list(resolution)
    thresholds = THRESHOLDS[family_of(sc.name)]
    expected = thresholds.get("expected_degree")
    lines = ["# transgauss-convergence-csv v1"]
    lines.append(f"# scenario={sc.name} v={vfield.name} orientation={orientation}")
    ncoef = sc.surface.mdim
    cols = ["resolution"]
    cols += [f"I{k}" for k in range(ncoef)]
    cols += ["degree_raw"]
    cols += [f"res{k}" for k in range(ncoef)]
    lines.append(",".join(cols))
    for res in sweep:
        report = verify_main_theorem(
            sc.surface,
            vfield,
            res,
            t_samples=args.t_samples,
            scenario=sc.name,
            expected_degree=expected,
        )
        row = [str(res)]
        row += [_fmt(i) for i in report.integrals]
        row += [_fmt(report.degree.raw)]
        row += [_fmt(r) for r in report.residuals]
        lines.append(",".join(row))
        print(f"resolution={res} degree_raw={_fmt(report.degree.raw)} "
              f"max_residual={_fmt(max(report.residuals))}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_list(args):
    for row in catalogue_rows():
        print(row)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="transgauss",
        description="Translational Gauss map invariants for immersed hypersurfaces.",
    )
    parser.add_argument("--version", action="version", version=f"transgauss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_v=True, with_t=False):
        p.add_argument("--scenario", help="catalogue scenario name")
        if with_v:
            p.add_argument("--v", help="unit tangent field name (default: first in catalogue)")
        p.add_argument(
            "--resolution",
            help="grid resolution: N, or N,N,... per domain factor",
        )
        if with_t:
            p.add_argument("--t-samples", dest="t_samples", help="comma-separated fit offsets")
        p.add_argument("--orientation", type=int, choices=(1, -1), help="normal orientation")
        p.add_argument("--config", help="TOML config file ([run], [diff], [foliate])")
        p.add_argument("--out", help="write a report file (byte-stable)")

    p = sub.add_parser("verify", help="check the degree identity for a scenario")
    common(p, with_t=True)
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("degree", help="estimate the Gauss map degree")
    common(p, with_v=False)
    p.add_argument("--oracle", choices=("preimage",), help="cross-check via preimage counting")
    p.set_defaults(fn=cmd_degree)

    p = sub.add_parser("foliate", help="run the foliation rank obstruction check")
    common(p)
    p.add_argument("--rank-tol", dest="rank_tol", type=float, help="relative rank threshold")
    p.add_argument("--rank-bound", dest="rank_bound", type=int, help="override the rank bound")
    p.set_defaults(fn=cmd_foliate)

    p = sub.add_parser("convergence", help="sweep resolutions and report residuals")
    common(p, with_t=True)
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("list", help="list the scenario catalogue")
    p.set_defaults(fn=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate_threads()
        config = _load_config(getattr(args, "config", None))
        merged = _merge(args, config) if args.command != "list" else args
        return args.fn(merged)
    except TheoremContradictionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except InconclusiveDegreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TransgaussError as exc:
        if isinstance(exc, ValueError):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
