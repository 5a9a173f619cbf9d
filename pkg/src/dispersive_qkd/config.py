"""Run configuration: YAML documents, ``--set`` overrides and validation.

Document layout (every section and key optional)::

    source:   {sigma_a, sigma_b, rho, rep_rate}
    link_a:   {length, attenuation, beta}
    link_b:   {length, attenuation, beta}
    detector: {dark_rate, misalignment}
    scan:     {xi_min, xi_max, coarse_points, refine_tol}
    search:   {lb_hi, step, tol}
    grid:     {axes: {<axis>: [values] | {start, stop, step}}, mode, xi}
    catalog, output, preset: strings or null
    workers:  integer

The short names ``rho``, ``L_A``, ``L_B``, ``e`` and ``d`` are accepted as
top-level aliases for ``source.rho``, ``link_a.length``, ``link_b.length``,
``detector.misalignment`` and ``detector.dark_rate``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .optimize import DistanceSearch, ScanSpec, SweepGrid
from .physics import FiberLink, SourceParams
from .security import DetectorParams


class ConfigError(ValueError):
    pass


SECTIONS = {
    "source": SourceParams,
    "link_a": FiberLink,
    "link_b": FiberLink,
    "detector": DetectorParams,
    "scan": ScanSpec,
    "search": DistanceSearch,
}
SCALARS = ("catalog", "output", "preset", "workers")
ALIASES = {
    "rho": ("source", "rho"),
    "L_A": ("link_a", "length"),
    "L_B": ("link_b", "length"),
    "e": ("detector", "misalignment"),
    "d": ("detector", "dark_rate"),
}
INT_FIELDS = {("scan", "coarse_points")}


@dataclass(frozen=True)
class RunConfig:
    source: SourceParams = field(default_factory=SourceParams)
    link_a: FiberLink = field(default_factory=lambda: FiberLink(length=1.0))
    link_b: FiberLink = field(default_factory=lambda: FiberLink(length=100.0))
    detector: DetectorParams = field(default_factory=DetectorParams)
    scan: ScanSpec = field(default_factory=ScanSpec)
    search: DistanceSearch = field(default_factory=DistanceSearch)
    grid: SweepGrid = field(default_factory=lambda: SweepGrid(axes={}))
    catalog: str | None = None
    output: str | None = None
    preset: str | None = None
    workers: int = 1


def _number(path: str, value: Any, integer: bool = False):
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    try:
        num = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}") from None
    if integer:
        if num != int(num):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(num)
    return num


def _axis_values(path: str, spec: Any) -> tuple[float, ...]:
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "step"}
        if unknown or len(spec) != 3:
            raise ConfigError(f"{path}: range form needs exactly start, stop, step")
        start = _number(f"{path}.start", spec["start"])
        stop = _number(f"{path}.stop", spec["stop"])
        step = _number(f"{path}.step", spec["step"])
        if step <= 0 or stop < start:
            raise ConfigError(f"{path}: need step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(count))
    if isinstance(spec, (list, tuple)):
        return tuple(_number(f"{path}[{i}]", v) for i, v in enumerate(spec))
    return (_number(path, spec),)


def _build_grid(doc: Any) -> SweepGrid:
    if doc is None:
        return SweepGrid(axes={})
    if not isinstance(doc, dict):
        raise ConfigError("grid: expected a mapping")
    unknown = set(doc) - {"axes", "mode", "xi"}
    if unknown:
        raise ConfigError(f"grid.{sorted(unknown)[0]}: unknown key")
    axes_doc = doc.get("axes") or {}
    if not isinstance(axes_doc, dict):
        raise ConfigError("grid.axes: expected a mapping of axis name to values")
    axes = {str(k): _axis_values(f"grid.axes.{k}", v) for k, v in axes_doc.items()}
    kwargs: dict[str, Any] = {"axes": axes}
    if "mode" in doc:
        kwargs["mode"] = str(doc["mode"])
    if "xi" in doc:
        kwargs["xi"] = _number("grid.xi", doc["xi"])
    try:
        return SweepGrid(**kwargs)
    except ValueError as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith("grid") else f"grid: {msg}") from None


def build_config(doc: Any) -> RunConfig:
    """Validate a parsed document and fill in defaults."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("<root>: expected a mapping")
    doc = {k: (dict(v) if isinstance(v, dict) else v) for k, v in doc.items()}

    for alias, (section, key) in ALIASES.items():
        if alias in doc:
            sub = doc.setdefault(section, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"{section}: expected a mapping")
            if key in sub:
                raise ConfigError(f"{alias}: conflicts with {section}.{key}")
            sub[key] = doc.pop(alias)

    unknown = set(doc) - set(SECTIONS) - set(SCALARS) - {"grid"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown key")

    base = RunConfig()
    values: dict[str, Any] = {}
    for section, cls in SECTIONS.items():
        sub = doc.get(section)
        if sub is None:
            continue
        if not isinstance(sub, dict):
            raise ConfigError(f"{section}: expected a mapping")
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in sub.items():
            if key not in names:
                raise ConfigError(f"{section}.{key}: unknown key")
            kwargs[key] = _number(f"{section}.{key}", value, (section, key) in INT_FIELDS)
        try:
            values[section] = replace(getattr(base, section), **kwargs)
        except ValueError as exc:
            raise ConfigError(f"{section}.{_offending(exc, kwargs)}: {exc}") from None

    values["grid"] = _build_grid(doc.get("grid"))
    for key in ("catalog", "output", "preset"):
        if doc.get(key) is not None:
            values[key] = str(doc[key])
    if doc.get("workers") is not None:
        workers = _number("workers", doc["workers"], integer=True)
        if workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {workers}")
        values["workers"] = workers
    return replace(base, **values)


def _offending(exc: ValueError, kwargs: dict) -> str:
    msg = str(exc)
    for key in kwargs:
        if msg.startswith(key):
            return key
    return next(iter(kwargs), "?")


def parse_config(text: str) -> RunConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<document>: malformed YAML: {exc}") from None
    return build_config(doc)


def load_config(path: str | Path) -> RunConfig:
    """Config from a YAML document or from a JSON sidecar written by the CLI."""
    return build_config(read_document(path))


def emit_config(cfg: RunConfig) -> dict:
    """Plain nested mapping that :func:`build_config` turns back into ``cfg``."""
    doc: dict[str, Any] = {name: asdict(getattr(cfg, name)) for name in SECTIONS}
    doc["grid"] = {
        "axes": {k: list(v) for k, v in cfg.grid.axes.items()},
        "mode": cfg.grid.mode,
        "xi": cfg.grid.xi,
    }
    for key in SCALARS:
        doc[key] = getattr(cfg, key)
    return doc


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(emit_config(cfg), sort_keys=False)


def apply_overrides(doc: dict | None, assignments: list[str]) -> dict:
    """Apply ``key=value`` strings (dotted keys, values parsed as YAML) to a document."""
    doc = dict(doc or {})
    for item in assignments:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"--set {item!r}: expected key=value")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{key}: malformed value {raw!r}: {exc}") from None
        parts = ALIASES.get(key, tuple(key.split(".")))
        node = doc
        for i, part in enumerate(parts[:-1]):
            child = node.get(part)
            if child is None:
                child = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"{'.'.join(parts[: i + 1])}: not a section")
            else:
                child = dict(child)
            node[part] = child
            node = child
        node[parts[-1]] = value
    return doc


def read_document(path: str | Path | None) -> dict:
    """Raw document from a YAML config or a JSON sidecar (empty when no path)."""
    if path is None:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping")
    if "config" in doc and "tool" in doc:
        doc = doc["config"]
    return doc
