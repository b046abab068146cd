"""Scenario configuration: TOML documents driving batch runs.

A scenario names a problem (bundled example or inline expressions), optional
charts and weight, and an ordered command list (trace / evaluate / certify /
monodromy / path-independence). See README for the full schema and the
compact string grammars for paths, charts and weights.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import examples
from .charts import ChartPair, affine_chart, identity_chart, tangent_box_chart
from .errors import ConfigError, ImpliftError, UnknownExample
from .expressions import compile_residual
from .problem import Box, ImplicitProblem
from .tracer import ChartLinePath, CirclePath, PolylinePath, SegmentPath
from .weights import Weight


@dataclasses.dataclass
class Scenario:
    name: str
    descriptor: object  # ExampleDescriptor or None for inline problems
    problem: ImplicitProblem
    charts: ChartPair
    weight: Weight
    commands: list
    output_dir: Path
    formats: tuple
    seed: int


def load_config(path):
    path = Path(path)
    try:
        with open(path, "rb") as stream:
            return tomllib.load(stream)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from None


def build_scenario(cfg, base_dir=".", output_dir=None):
    """Materialize a scenario from a parsed config mapping."""
    base_dir = Path(base_dir)
    if "problem" not in cfg:
        raise ConfigError("config is missing the [problem] section")
    descriptor, problem = _build_problem(cfg["problem"])

    charts_cfg = cfg.get("charts", {})
    charts = _build_charts(charts_cfg, descriptor, problem)
    weight = _build_weight(cfg.get("weight", {}), descriptor, base_dir)

    commands = cfg.get("commands", [])
    if not isinstance(commands, list):
        raise ConfigError("[[commands]] must be an array of tables")

    out_cfg = cfg.get("output", {})
    out = Path(output_dir) if output_dir else base_dir / out_cfg.get("directory", "out")
    formats = tuple(out_cfg.get("formats", ["csv", "json"]))
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {fmt!r}")

    return Scenario(
        name=cfg.get("name", problem.name or "scenario"),
        descriptor=descriptor,
        problem=problem,
        charts=charts,
        weight=weight,
        commands=list(commands),
        output_dir=out,
        formats=formats,
        seed=int(cfg.get("seed", 0)),
    )


def _build_problem(section):
    if "example" in section:
        params = dict(section.get("params", {}))
        try:
            descriptor = examples.get(section["example"], **params)
        except UnknownExample:
            raise
        except TypeError as exc:
            raise ConfigError(f"bad example parameters: {exc}") from None
        return descriptor, descriptor.problem
    if "inline" in section:
        return None, _inline_problem(section["inline"])
    raise ConfigError("[problem] needs either 'example' or an [problem.inline] table")


def _inline_problem(inline):
    try:
        m = int(inline["m"])
        n = int(inline["n"])
        exprs = list(inline["expressions"])
        seed_x = [float(v) for v in inline["seed_x"]]
        seed_y = [float(v) for v in inline["seed_y"]]
    except KeyError as exc:
        raise ConfigError(f"[problem.inline] is missing {exc.args[0]!r}") from None
    residual_list = compile_residual(exprs, m, n)

    def residual(x, y):
        return np.array(residual_list(x, y))

    def parse_domain(key, dim):
        intervals = inline.get(key)
        if intervals is None:
            return None
        if len(intervals) != dim:
            raise ConfigError(f"{key} needs {dim} [lo, hi] pairs")
        pairs = []
        for pair in intervals:
            lo, hi = float(pair[0]), float(pair[1])
            pairs.append((lo, hi))
        return Box.from_intervals(pairs)

    try:
        return ImplicitProblem(
            m, n, len(exprs), residual, seed_x, seed_y,
            domain_x=parse_domain("domain_x", m),
            domain_y=parse_domain("domain_y", n),
            name=str(inline.get("name", "inline")))
    except ImpliftError as exc:
        raise ConfigError(f"inline problem rejected: {exc}") from exc


def _build_charts(section, descriptor, problem):
    pair_spec = section.get("pair")
    if pair_spec == "recommended":
        if descriptor is None or descriptor.charts is None:
            raise ConfigError("no recommended charts for this problem")
        return descriptor.charts
    if pair_spec is not None:
        raise ConfigError(f"unknown chart pair spec {pair_spec!r}")
    phi = _build_chart(section.get("phi", "identity"), problem.m,
                       problem.domain_x, descriptor, role="phi")
    psi = _build_chart(section.get("psi", "identity"), problem.n,
                       problem.domain_y, descriptor, role="psi")
    return ChartPair(phi, psi)


def _build_chart(spec, dim, domain, descriptor, role):
    if not isinstance(spec, str):
        raise ConfigError(f"chart spec must be a string, got {spec!r}")
    name, _, args = spec.partition(":")
    name = name.strip()
    if name == "identity":
        return identity_chart(dim)
    if name == "tangent-box":
        if args.strip():
            pairs = [_floats(chunk) for chunk in args.split(";")]
            box = Box.from_intervals([(p[0], p[1]) for p in pairs])
        elif isinstance(domain, Box):
            box = domain
        else:
            raise ConfigError("tangent-box needs an explicit box or a box domain")
        if box.dim != dim:
            raise ConfigError(f"tangent-box dim {box.dim} != expected {dim}")
        return tangent_box_chart(box.lower, box.upper)
    if name == "affine":
        rows_part, _, offset_part = args.partition("|")
        rows = [_floats(chunk) for chunk in rows_part.split(";") if chunk.strip()]
        matrix = np.array(rows)
        offset = _floats(offset_part) if offset_part.strip() else None
        try:
            return affine_chart(matrix, offset)
        except (ValueError, np.linalg.LinAlgError, ImpliftError) as exc:
            raise ConfigError(f"bad affine chart: {exc}") from None
    if name == "solution-composed":
        if descriptor is None or descriptor.charts is None:
            raise ConfigError("solution-composed charts need a bundled example "
                              "with a recommended pair")
        return descriptor.charts.psi if role == "psi" else descriptor.charts.phi
    raise ConfigError(f"unknown chart spec {spec!r}")


def _build_weight(section, descriptor, base_dir):
    spec = section.get("spec")
    if spec is None:
        if descriptor is not None and descriptor.weight is not None:
            return descriptor.weight
        return Weight.affine(1.0, 1.0)
    return parse_weight(spec, base_dir)


def parse_weight(spec, base_dir="."):
    if not isinstance(spec, str):
        raise ConfigError(f"weight spec must be a string, got {spec!r}")
    name, _, args = spec.partition(":")
    name = name.strip()
    if name == "constant":
        return Weight.constant(_floats(args)[0])
    if name == "affine":
        values = _floats(args)
        if len(values) != 2:
            raise ConfigError("affine weight needs 'affine:a,b'")
        return Weight.affine(values[0], values[1])
    if name == "table":
        path = Path(base_dir) / args.strip()
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2)
        except OSError as exc:
            raise ConfigError(f"cannot read weight table: {exc}") from None
        return Weight.from_table(data[:, 0], data[:, 1])
    raise ConfigError(f"unknown weight spec {spec!r}")


def parse_path(spec, dim, chart=None):
    """Path from a compact string or a structured mapping.

    Strings:  "segment: 0 -> 2"
              "polyline: 0,0 | 1,0 | 1,1"
              "circle: center=0,0; radius=1.5; turns=-1; start=0.5; axes=0,1"
              "chart-line: -1 -> 1"          (uses the scenario phi chart)
    """
    try:
        if isinstance(spec, dict):
            return _path_from_table(spec, dim, chart)
        if not isinstance(spec, str):
            raise ConfigError(f"path spec must be a string or table, got {spec!r}")
        return _path_from_string(spec, dim, chart)
    except ConfigError:
        raise
    except (ImpliftError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad path spec {spec!r}: {exc}") from exc


def _path_from_string(spec, dim, chart):
    kind, _, args = spec.partition(":")
    kind = kind.strip()
    if kind == "segment":
        start, end = _arrow_pair(args)
        return _checked_dim(SegmentPath(start, end), dim)
    if kind == "polyline":
        vertices = [_floats(chunk) for chunk in args.split("|")]
        if len(vertices) < 2:
            raise ConfigError("polyline needs at least two vertices")
        return _checked_dim(PolylinePath(vertices), dim)
    if kind == "circle":
        fields = _keyword_fields(args)
        try:
            center = fields.pop("center")
            radius = fields.pop("radius")[0]
        except KeyError as exc:
            raise ConfigError(f"circle path is missing {exc.args[0]!r}") from None
        turns = fields.pop("turns", [1.0])[0]
        start = fields.pop("start", [0.0])[0]
        axes = [int(v) for v in fields.pop("axes", [0.0, 1.0])]
        if fields:
            raise ConfigError(f"unknown circle fields {sorted(fields)}")
        return _checked_dim(
            CirclePath(center, radius, turns=turns, start_angle=start, axes=axes), dim)
    if kind == "chart-line":
        if chart is None:
            raise ConfigError("chart-line paths need a phi chart")
        start, end = _arrow_pair(args)
        return _checked_dim(ChartLinePath(start, end, chart), dim)
    raise ConfigError(f"unknown path kind {kind!r}")


def _path_from_table(table, dim, chart):
    kind = table.get("kind")
    if kind == "segment":
        return _checked_dim(SegmentPath(table["from"], table["to"]), dim)
    if kind == "polyline":
        return _checked_dim(PolylinePath(table["vertices"]), dim)
    if kind == "circle":
        return _checked_dim(
            CirclePath(table["center"], table["radius"],
                       turns=table.get("turns", 1.0),
                       start_angle=table.get("start", 0.0),
                       axes=table.get("axes", (0, 1))), dim)
    if kind == "chart-line":
        if chart is None:
            raise ConfigError("chart-line paths need a phi chart")
        return _checked_dim(ChartLinePath(table["from"], table["to"], chart), dim)
    raise ConfigError(f"unknown path kind {kind!r}")


def _checked_dim(path, dim):
    if path.dim != dim:
        raise ConfigError(f"path dim {path.dim} != problem dim {dim}")
    return path


def _floats(text):
    try:
        return [float(chunk) for chunk in text.replace(" ", "").split(",") if chunk]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _arrow_pair(text):
    parts = text.split("->")
    if len(parts) != 2:
        raise ConfigError(f"expected 'from -> to', got {text!r}")
    return _floats(parts[0]), _floats(parts[1])


def _keyword_fields(text):
    fields = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {chunk!r}")
        fields[key.strip()] = _floats(value)
    return fields
