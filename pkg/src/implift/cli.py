"""Batch front end: run scenario configs, list examples, trace, certify.

Exit codes: 0 when every commanded check matches its expectation, 1 when a
command fails or mismatches, 2 for malformed configs or unknown examples.
Set IMPLIFT_LOG=debug|info|warning for log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, examples
from ._serialize import dumps
from .atlas import SolutionAtlas
from .certify import (diagonal_dominance_check, growth_bound_check,
                      uniform_bound_check, left_invertibility_check)
from .config import build_scenario, load_config, parse_path, parse_weight
from .errors import ConfigError, ImpliftError, Unreachable
from .tracer import TracerOptions, lift_path
from .weights import check_weight

logger = logging.getLogger(__name__)


def main(argv=None):
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ImpliftError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _setup_logging():
    level = os.environ.get("IMPLIFT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="implift",
        description="Trace implicit functions along paths and audit the "
                    "hypotheses that make them global.")
    parser.add_argument("--version", action="version", version=f"implift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario config")
    run.add_argument("config", help="path to a TOML scenario")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.set_defaults(handler=_cmd_run)

    lst = sub.add_parser("list", help="list bundled examples")
    lst.set_defaults(handler=_cmd_list)

    trace = sub.add_parser("trace", help="lift a path on a bundled example")
    trace.add_argument("--example", required=True)
    trace.add_argument("--path", help="path spec (default: the example's default path)")
    trace.add_argument("--y-start", help="comma-separated start y (default: example's)")
    trace.add_argument("--out", default="out", help="output directory")
    trace.add_argument("--tol", type=float, default=None, help="trace tolerance")
    trace.set_defaults(handler=_cmd_trace)

    certify = sub.add_parser("certify", help="run hypothesis audits on a bundled example")
    certify.add_argument("--example", required=True)
    certify.add_argument("--charts", default="recommended",
                         help="'recommended' or 'identity'")
    certify.add_argument("--weight", default=None, help="weight spec, e.g. affine:1,1")
    certify.add_argument("--path", help="path spec for the audited trace")
    certify.add_argument("--out", default="out", help="output directory")
    certify.set_defaults(handler=_cmd_certify)
    return parser


# ---------------------------------------------------------------------------
# list

def _cmd_list(args):
    rows = []
    for name in examples.names():
        descriptor = examples.get(name)
        problem = descriptor.problem
        rows.append((name, f"{problem.m}/{problem.n}/{problem.l}",
                     ",".join(sorted(descriptor.tags))))
    width = max(len(r[0]) for r in rows)
    print(f"{'name':<{width}}  m/n/l  tags")
    for name, dims, tags in rows:
        print(f"{name:<{width}}  {dims:<6} {tags}")
    return 0


# ---------------------------------------------------------------------------
# trace / certify one-shots

def _descriptor_trace(descriptor, path_spec, y_start_text, options):
    problem = descriptor.problem
    chart = descriptor.charts.phi if descriptor.charts else None
    if path_spec:
        path = parse_path(path_spec, problem.m, chart)
    elif descriptor.default_path is not None:
        path = descriptor.default_path
    else:
        raise ConfigError(f"example {descriptor.name!r} has no default path; give --path")
    if y_start_text:
        y_start = np.array([float(v) for v in y_start_text.split(",")])
    else:
        y_start = descriptor.default_y_start
        if y_start is None:
            raise ConfigError("no default y start; give --y-start")
    return lift_path(problem, path, y_start, options)


def _cmd_trace(args):
    descriptor = examples.get(args.example)
    options = TracerOptions() if args.tol is None else TracerOptions(trace_tol=args.tol)
    trace = _descriptor_trace(descriptor, args.path, args.y_start, options)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{args.example}-trace.csv"
    with open(csv_path, "w") as stream:
        trace.write_csv(stream)
    json_path = out / f"{args.example}-trace.json"
    with open(json_path, "w") as stream:
        trace.write_json(stream)
    print(f"status: {trace.status.kind}"
          + ("" if trace.completed else f" at t={trace.status.t:.6g}"))
    if trace.samples:
        final = trace.final
        print(f"samples: {len(trace.samples)}, final y: "
              + ",".join(f"{v:.10g}" for v in final.y))
    print(f"wrote {csv_path} and {json_path}")
    return 0 if trace.completed else 1


def _cmd_certify(args):
    descriptor = examples.get(args.example)
    problem = descriptor.problem
    if args.charts == "recommended":
        charts = descriptor.charts
        if charts is None:
            raise ConfigError(f"example {args.example!r} has no recommended charts; "
                              "use --charts identity")
    elif args.charts == "identity":
        from .charts import ChartPair, identity_chart
        charts = ChartPair(identity_chart(problem.m), identity_chart(problem.n))
    else:
        raise ConfigError(f"unknown charts spec {args.charts!r}")
    weight = parse_weight(args.weight) if args.weight else (descriptor.weight
                                                            or parse_weight("affine:1,1"))
    trace = _descriptor_trace(descriptor, args.path, None, TracerOptions())
    if not trace.completed:
        print(f"trace failed: {trace.status.kind} at t={trace.status.t:.6g}",
              file=sys.stderr)
        return 1
    reports = [
        growth_bound_check(trace, charts, weight),
        left_invertibility_check(trace),
    ]
    weight_report = check_weight(weight)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "example": args.example,
        "checks": [r.to_dict() for r in reports],
        "weight_audit": weight_report.to_dict(),
    }
    report_path = out / f"{args.example}-certify.json"
    with open(report_path, "w") as stream:
        stream.write(dumps(payload) + "\n")
    _print_report_table(reports, weight_report)
    print(f"wrote {report_path}")
    ok = all(r.passed for r in reports) and weight_report.admissible
    return 0 if ok else 1


def _print_report_table(reports, weight_report=None):
    print(f"{'check':<22} {'verdict':<10} worst margin")
    for report in reports:
        print(f"{report.name:<22} {report.verdict:<10} {report.worst_margin:.6g}")
    if weight_report is not None:
        verdict = "pass" if weight_report.admissible else "fail"
        flag = " (heuristic)" if weight_report.divergence_heuristic else ""
        print(f"{'weight-admissibility':<22} {verdict:<10}{flag}")


# ---------------------------------------------------------------------------
# scenario runner

def _cmd_run(args):
    cfg = load_config(args.config)
    scenario = build_scenario(cfg, base_dir=Path(args.config).parent,
                              output_dir=args.out)
    scenario.output_dir.mkdir(parents=True, exist_ok=True)
    runner = _ScenarioRunner(scenario)
    summary = runner.run()
    summary_path = scenario.output_dir / "summary.json"
    with open(summary_path, "w") as stream:
        stream.write(dumps(summary) + "\n")
    status = "ok" if summary["ok"] else "FAILED"
    print(f"{scenario.name}: {status} ({len(summary['commands'])} commands), "
          f"summary in {summary_path}")
    return 0 if summary["ok"] else 1


class _ScenarioRunner:
    def __init__(self, scenario):
        self.scenario = scenario
        self.problem = scenario.problem
        self.options = TracerOptions()
        self.atlas = None
        self.traces = {}

    def _get_atlas(self):
        if self.atlas is None:
            self.atlas = SolutionAtlas(self.problem, options=self.options)
        return self.atlas

    def run(self):
        entries = []
        for index, command in enumerate(self.scenario.commands):
            kind = command.get("kind")
            handler = getattr(self, f"_run_{kind.replace('-', '_')}", None) if kind else None
            if handler is None:
                raise ConfigError(f"unknown command kind {kind!r} (command {index})")
            try:
                entry = handler(command, index)
            except Unreachable as exc:
                entry = {"kind": kind, "error": f"unreachable: {exc.reason}",
                         "ok": command.get("expect") == "unreachable"}
            except ImpliftError as exc:
                entry = {"kind": kind, "error": str(exc), "ok": False}
            entries.append(entry)
        summary = {
            "scenario": self.scenario.name,
            "problem": self.problem.name or "inline",
            "commands": entries,
            "ok": all(entry.get("ok", False) for entry in entries),
        }
        return summary

    def _phi(self):
        return self.scenario.charts.phi if self.scenario.charts else None

    def _write_trace(self, trace, stem):
        artifacts = []
        if "csv" in self.scenario.formats:
            path = self.scenario.output_dir / f"{stem}.csv"
            with open(path, "w") as stream:
                trace.write_csv(stream)
            artifacts.append(path.name)
        if "json" in self.scenario.formats:
            path = self.scenario.output_dir / f"{stem}.json"
            with open(path, "w") as stream:
                trace.write_json(stream)
            artifacts.append(path.name)
        return artifacts

    def _write_report(self, payload, stem):
        path = self.scenario.output_dir / f"{stem}.json"
        with open(path, "w") as stream:
            stream.write(dumps(payload) + "\n")
        return [path.name]

    def _trace_for_certify(self, command, index):
        ref = command.get("trace")
        if ref is not None:
            if ref not in self.traces:
                raise ConfigError(f"certify references unknown trace {ref!r}")
            return self.traces[ref]
        descriptor = self.scenario.descriptor
        if "path" in command:
            path = parse_path(command["path"], self.problem.m, self._phi())
            y_start = np.asarray(command.get("y_start",
                                             self.problem.seed_y), dtype=float)
        elif descriptor is not None and descriptor.default_path is not None:
            path = descriptor.default_path
            y_start = descriptor.default_y_start
        else:
            raise ConfigError("certify needs 'trace', 'path', or an example default")
        trace = lift_path(self.problem, path, y_start, self.options)
        if not trace.completed:
            raise ConfigError(
                f"certify trace failed: {trace.status.kind} at t={trace.status.t:.6g}")
        return trace

    # -- command handlers ---------------------------------------------------

    def _run_trace(self, command, index):
        name = command.get("name", f"trace-{index}")
        path = parse_path(command["path"], self.problem.m, self._phi())
        y_start = np.asarray(command.get("y_start", self.problem.seed_y), dtype=float)
        trace = lift_path(self.problem, path, y_start, self.options)
        self.traces[name] = trace
        artifacts = self._write_trace(trace, name)
        expect = command.get("expect", "completed")
        entry = {
            "kind": "trace",
            "name": name,
            "status": trace.status.kind,
            "samples": len(trace.samples),
            "artifacts": artifacts,
            "expected": expect,
            "ok": trace.status.kind == expect,
        }
        if trace.samples:
            entry["final_t"] = trace.final.t
            entry["final_y"] = list(trace.final.y)
            entry["max_residual"] = max(s.residual_norm for s in trace.samples)
        return entry

    def _run_evaluate(self, command, index):
        x = np.asarray(command["x"], dtype=float)
        y = self._get_atlas().evaluate(x)
        payload = {"x": list(x), "y": list(y)}
        artifacts = self._write_report(payload, f"evaluate-{index}")
        return {"kind": "evaluate", "x": list(x), "y": list(y),
                "artifacts": artifacts, "ok": True}

    def _certify_charts(self, command):
        if "phi" not in command and "psi" not in command:
            return self.scenario.charts
        from .charts import ChartPair
        from .config import _build_chart
        phi = _build_chart(command.get("phi", "identity"), self.problem.m,
                           self.problem.domain_x, self.scenario.descriptor, "phi")
        psi = _build_chart(command.get("psi", "identity"), self.problem.n,
                           self.problem.domain_y, self.scenario.descriptor, "psi")
        return ChartPair(phi, psi)

    def _run_certify(self, command, index):
        trace = self._trace_for_certify(command, index)
        charts = self._certify_charts(command)
        reports = []
        weight_audit = None
        for spec in command.get("checks", ["growth-bound", "left-invertibility"]):
            name, _, arg = spec.partition(":")
            name = name.strip()
            if name == "growth-bound":
                reports.append(growth_bound_check(trace, charts,
                                                  self.scenario.weight))
            elif name == "left-invertibility":
                floor = float(arg) if arg else None
                reports.append(left_invertibility_check(trace, sigma_floor=floor))
            elif name == "uniform-bound":
                if not arg:
                    raise ConfigError("uniform-bound needs a constant, e.g. "
                                      "'uniform-bound:1.0'")
                reports.append(uniform_bound_check(trace, float(arg)))
            elif name == "diagonal-dominance":
                if not arg:
                    raise ConfigError("diagonal-dominance needs a margin, e.g. "
                                      "'diagonal-dominance:0.5'")
                points = [(s.x, s.y) for s in trace.samples]
                reports.append(diagonal_dominance_check(self.problem, points,
                                                        float(arg)))
            elif name == "weight-admissibility":
                weight_audit = check_weight(self.scenario.weight)
            else:
                raise ConfigError(f"unknown check {spec!r}")
        payload = {"checks": [r.to_dict() for r in reports]}
        if weight_audit is not None:
            payload["weight_audit"] = weight_audit.to_dict()
        artifacts = self._write_report(payload, f"certify-{index}")
        all_pass = (all(r.passed for r in reports)
                    and (weight_audit is None or weight_audit.admissible))
        expect = command.get("expect", "pass")
        ok = all_pass if expect == "pass" else (not all_pass)
        return {"kind": "certify",
                "checks": [{"name": r.name, "verdict": r.verdict,
                            "worst_margin": r.worst_margin} for r in reports],
                "weight_admissible": None if weight_audit is None else weight_audit.admissible,
                "artifacts": artifacts, "expected": expect, "ok": ok}

    def _run_monodromy(self, command, index):
        loop = parse_path(command["loop"], self.problem.m, self._phi())
        result = self._get_atlas().monodromy_check(loop)
        payload = result.to_dict()
        artifacts = self._write_report(payload, f"monodromy-{index}")
        expect = command.get("expect", "closed")
        observed = "closed" if result.closed else "open"
        return {"kind": "monodromy", "closed": result.closed, "gap": result.gap,
                "artifacts": artifacts, "expected": expect,
                "ok": observed == expect}

    def _run_path_independence(self, command, index):
        target = np.asarray(command["target"], dtype=float)
        paths = [parse_path(spec, self.problem.m, self._phi())
                 for spec in command["paths"]]
        result = self._get_atlas().path_independence_check(target, paths)
        artifacts = self._write_report(result.to_dict(), f"path-independence-{index}")
        expect = command.get("expect", "pass")
        observed = "pass" if result.passed else "fail"
        return {"kind": "path-independence", "max_gap": result.max_gap,
                "passed": result.passed, "artifacts": artifacts,
                "expected": expect, "ok": observed == expect}


if __name__ == "__main__":
    sys.exit(main())
