"""Scenario configuration: YAML ingestion, unit conversion and validation.

A configuration is a YAML mapping::

    scenario: cpt                 # two-level | squeeze | cpt | noise
    preset: togan2011             # optional, cpt and noise only
    units:
      frequency: MHz              # default unit for every frequency field
      rate: 1/us
      time: us
      experiment.gamma_c: 1/s     # per-field override by dotted path
    model: {...}
    experiment: {...}             # cpt / noise
    ensemble: {...}               # cpt / noise
    grids: {...}                  # cpt / noise
    sweep:
      parameter: model.omega_a
      values: [1.0, 2.0]          # or {start, stop, num, spacing: linear|log}
    output:
      directory: results
      summary: yaml               # or json

Every value is converted to internal units (rad/us, 1/us, us) on ingest.
"""
from __future__ import annotations

import copy
import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import yaml

from .exceptions import ConfigError
from .operators import TWO_PI
from .models.cpt import PRESETS, CPTModel

SCENARIOS = ("two-level", "squeeze", "cpt", "noise")

# unit -> multiplier into internal units, grouped by physical kind
UNITS = {
    "frequency": {"rad/us": 1.0, "MHz": TWO_PI, "kHz": TWO_PI * 1e-3, "GHz": TWO_PI * 1e3},
    "rate": {"1/us": 1.0, "1/ms": 1e-3, "1/s": 1e-6, "1/ns": 1e3},
    "time": {"us": 1.0, "ms": 1e3, "s": 1e6, "ns": 1e-3},
    "dimensionless": {"1": 1.0},
}
DEFAULT_UNITS = {"frequency": "MHz", "rate": "1/us", "time": "us"}
UNIT_LABELS = {"rad/us": "rad_per_us", "1/us": "per_us", "us": "us", "1": "dimensionless"}

CPT_MODEL_FIELDS = {
    "omega_a": "frequency", "omega_e": "frequency", "delta_a2": "frequency", "zeeman": "frequency",
    "gamma": "rate", "gamma_s1": "rate", "gamma_s2": "rate", "gamma_s": "rate", "gamma_ce": "rate",
    "gamma_phi": "rate", "a_g": "frequency", "a_e": "frequency", "d_gs": "frequency",
    "e_a1": "frequency", "e_e12": "frequency", "gamma_e12": "rate", "include_a2": "bool",
}
CPT_REQUIRED = ("omega_a", "omega_e", "delta_a2", "zeeman", "gamma", "gamma_s1",
                "gamma_s2", "gamma_s", "gamma_ce")

SCHEMA = {
    "two-level": {
        "model": ({"rabi": "frequency", "detuning": "frequency", "gamma1": "rate",
                   "gamma_phi": "rate", "a_g": "frequency3", "a_e": "frequency3",
                   "zeeman": "frequency", "zeeman_direction": "vector3"},
                  ("rabi", "detuning", "gamma1")),
    },
    "squeeze": {
        "model": ({"rabi": "frequency", "detuning": "frequency", "gamma1": "rate",
                   "coupling": "frequency", "n_nuclei": "int"},
                  ("rabi", "detuning", "gamma1", "coupling")),
    },
}
_CPT_SCHEMA = {
    "model": (CPT_MODEL_FIELDS, CPT_REQUIRED),
    "experiment": ({"efficiency": "dimensionless", "t_cond": "time", "gamma_c": "rate",
                    "readout_rabi": "frequency", "zeeman_prep": "frequency",
                    "n14_zeeman": "frequency"}, ()),
    "ensemble": ({"n": "int", "a": "frequency", "a_perp": "frequency"}, ()),
    "grids": ({"detuning": "frequency_grid", "rabi": "frequency_grid", "time": "time_grid",
               "readout": "frequency_grid"}, ()),
}
SCHEMA["cpt"] = _CPT_SCHEMA
SCHEMA["noise"] = _CPT_SCHEMA

TOP_LEVEL = {"scenario", "preset", "units", "sweep", "output"}

# scenario defaults (internal units) applied beneath preset and user values
DEFAULTS = {
    "two-level": {"model": {"gamma_phi": 0.0, "a_g": [0.0, 0.0, 0.0], "a_e": [0.0, 0.0, 0.0],
                            "zeeman": 0.0, "zeeman_direction": [0.0, 0.0, 1.0]}},
    "squeeze": {"model": {"n_nuclei": 1}},
    "cpt": {"experiment": {"n14_zeeman": TWO_PI * 0.01},
            "grids": {"time": np.linspace(0.0, 2000.0, 201).tolist()}},
}
DEFAULTS["noise"] = DEFAULTS["cpt"]


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads exponent floats without a dot (``1e-6``)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                |[-+]?\.(?:inf|Inf|INF)
                |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


@dataclass(frozen=True)
class Sweep:
    path: str
    values: tuple


@dataclass
class ScenarioConfig:
    scenario: str
    preset: Optional[str]
    sections: dict
    sweep: Optional[Sweep]
    output_dir: str = "results"
    summary_format: str = "yaml"
    source: dict = field(default_factory=dict)

    def get(self, path: str):
        section, name = path.split(".", 1)
        return self.sections[section][name]

    def with_value(self, path: str, value) -> "ScenarioConfig":
        new = copy.deepcopy(self)
        section, name = path.split(".", 1)
        new.sections[section][name] = value
        return new

    @property
    def digest(self) -> str:
        blob = json.dumps({"scenario": self.scenario, "preset": self.preset,
                           "sections": _jsonable(self.sections),
                           "sweep": None if self.sweep is None else [self.sweep.path, list(self.sweep.values)]},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def cpt_model(self) -> CPTModel:
        return CPTModel(**self.sections["model"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _line_map(text: str) -> dict:
    """Dotted key path -> 1-based line number, from the YAML node tree."""
    lines = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                lines[path] = key.start_mark.line + 1
                walk(value, path)

    try:
        root = yaml.compose(text, Loader=_Loader)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, "")
    return lines


def _where(lines, path) -> str:
    line = lines.get(path)
    return f" (line {line})" if line else ""


def _convert_scalar(value, kind, unit, path, lines):
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}{_where(lines, path)}: expected true/false, got {value!r}")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}{_where(lines, path)}: expected an integer, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{_where(lines, path)}: expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ConfigError(f"{path}{_where(lines, path)}: value must be finite")
    return float(value) * UNITS[kind][unit]


def _grid_values(spec, path, lines):
    if isinstance(spec, list):
        values = spec
    elif isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "num", "spacing"}
        if unknown:
            raise ConfigError(f"{path}{_where(lines, path)}: unknown grid key(s) {sorted(unknown)}")
        try:
            start, stop, num = spec["start"], spec["stop"], spec["num"]
        except KeyError as exc:
            raise ConfigError(f"{path}{_where(lines, path)}: grid needs start, stop and num "
                              f"(missing {exc.args[0]})") from None
        spacing = spec.get("spacing", "linear")
        if not isinstance(num, int) or num < 1:
            raise ConfigError(f"{path}{_where(lines, path)}: num must be a positive integer")
        if spacing == "linear":
            values = np.linspace(start, stop, num).tolist()
        elif spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError(f"{path}{_where(lines, path)}: log grid needs positive bounds")
            values = np.geomspace(start, stop, num).tolist()
        else:
            raise ConfigError(f"{path}{_where(lines, path)}: spacing must be 'linear' or 'log'")
    else:
        raise ConfigError(f"{path}{_where(lines, path)}: grid must be a list or a start/stop/num mapping")
    if not values:
        raise ConfigError(f"{path}{_where(lines, path)}: grid is empty")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            raise ConfigError(f"{path}{_where(lines, path)}: grid values must be finite numbers")
    return [float(v) for v in values]


def _convert(value, kind, unit_of, path, lines):
    base = kind.replace("3", "").replace("_grid", "")
    if kind == "vector3":
        if not (isinstance(value, list) and len(value) == 3):
            raise ConfigError(f"{path}{_where(lines, path)}: expected a 3-vector")
        return [_convert_scalar(v, "dimensionless", "1", path, lines) for v in value]
    if kind.endswith("3"):
        if not (isinstance(value, list) and len(value) == 3):
            raise ConfigError(f"{path}{_where(lines, path)}: expected a 3-vector")
        return [_convert_scalar(v, base, unit_of(path, base), path, lines) for v in value]
    if kind.endswith("_grid"):
        factor = UNITS[base][unit_of(path, base)]
        return [v * factor for v in _grid_values(value, path, lines)]
    if kind in ("bool", "int"):
        return _convert_scalar(value, kind, None, path, lines)
    if kind == "frequency" and isinstance(value, list):
        # readout Rabi frequencies are given as a list
        return [_convert_scalar(v, kind, unit_of(path, kind), path, lines) for v in value]
    unit = unit_of(path, kind) if kind != "dimensionless" else "1"
    return _convert_scalar(value, kind, unit, path, lines)


def field_kind(scenario: str, path: str) -> str:
    section, name = path.split(".", 1)
    try:
        return SCHEMA[scenario][section][0][name]
    except KeyError:
        raise ConfigError(f"unknown parameter path {path!r} for scenario {scenario!r}") from None


def preset_sections(name: str) -> dict:
    """Preset values in internal units, laid out like the config sections."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    p = PRESETS[name]()
    m = p.model
    model = {k: getattr(m, k) for k in CPT_MODEL_FIELDS}
    return {
        "model": model,
        "experiment": {"efficiency": p.efficiency, "t_cond": p.t_cond,
                       "gamma_c": p.ensemble.gamma_c, "readout_rabi": list(p.readout_rabi),
                       "zeeman_prep": p.zeeman_prep},
        "ensemble": {"n": p.ensemble.n, "a": p.ensemble.a, "a_perp": p.ensemble.a_perp},
    }


def load_config(text: str, preset: Optional[str] = None) -> ScenarioConfig:
    """Parse and validate a YAML scenario description.

    ``preset`` (e.g. from the command line) takes precedence over a preset
    named in the document; explicit values in the document override both.

    Raises
    ------
    ConfigError
        On malformed YAML (with line number), unknown keys, missing
        required fields, unit mismatches and invalid grids.
    """
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML parse error{where}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a YAML mapping")
    lines = _line_map(text)

    scenario = doc.get("scenario")
    if scenario is None:
        raise ConfigError("missing required field 'scenario'")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario{_where(lines, 'scenario')}: must be one of {', '.join(SCENARIOS)}")
    schema = SCHEMA[scenario]
    for key in doc:
        if key not in TOP_LEVEL and key not in schema:
            raise ConfigError(f"unknown key {key!r}{_where(lines, key)} for scenario {scenario!r}")

    preset = preset or doc.get("preset")
    if preset is not None and scenario not in ("cpt", "noise"):
        raise ConfigError(f"presets apply to the cpt and noise scenarios only, not {scenario!r}")

    unit_defaults = dict(DEFAULT_UNITS)
    overrides = {}
    units = doc.get("units") or {}
    if not isinstance(units, dict):
        raise ConfigError(f"units{_where(lines, 'units')}: must be a mapping")
    for key, unit in units.items():
        path = f"units.{key}"
        if key in unit_defaults:
            if unit not in UNITS[key]:
                raise ConfigError(f"{path}{_where(lines, path)}: unit mismatch: {unit!r} is not a "
                                  f"{key} unit ({', '.join(UNITS[key])})")
            unit_defaults[key] = unit
        else:
            kind = field_kind(scenario, key).replace("3", "").replace("_grid", "")
            if kind not in UNITS or unit not in UNITS[kind]:
                raise ConfigError(f"{path}{_where(lines, path)}: unit mismatch: {unit!r} for {kind} "
                                  f"field {key}")
            overrides[key] = unit

    def unit_of(path, kind):
        return overrides.get(path, unit_defaults[kind])

    sections = copy.deepcopy(DEFAULTS.get(scenario, {}))
    for name in schema:
        sections.setdefault(name, {})
    if preset is not None:
        for name, values in preset_sections(preset).items():
            sections[name].update(values)
    for name, (fields, _) in schema.items():
        block = doc.get(name) or {}
        if not isinstance(block, dict):
            raise ConfigError(f"{name}{_where(lines, name)}: must be a mapping")
        for key, value in block.items():
            path = f"{name}.{key}"
            if key not in fields:
                raise ConfigError(f"unknown key {path!r}{_where(lines, path)}")
            sections[name][key] = _convert(value, fields[key], unit_of, path, lines)
    for name, (_, required) in schema.items():
        for key in required:
            if key not in sections[name]:
                raise ConfigError(f"missing required field '{name}.{key}'")
    if scenario in ("cpt", "noise"):
        for key in ("efficiency", "t_cond", "gamma_c", "readout_rabi", "zeeman_prep"):
            if key not in sections["experiment"]:
                raise ConfigError(f"missing required field 'experiment.{key}'")
        for key in ("n", "a", "a_perp"):
            if key not in sections["ensemble"]:
                raise ConfigError(f"missing required field 'ensemble.{key}'")
        if sections["ensemble"]["n"] < 1:
            raise ConfigError("ensemble.n must be at least 1")

    sweep = None
    if doc.get("sweep") is not None:
        spec = doc["sweep"]
        if not isinstance(spec, dict) or set(spec) - {"parameter", "values"}:
            raise ConfigError(f"sweep{_where(lines, 'sweep')}: expects keys 'parameter' and 'values'")
        if "parameter" not in spec or "values" not in spec:
            raise ConfigError("sweep needs both 'parameter' and 'values'")
        path = spec["parameter"]
        if not isinstance(path, str) or "." not in path:
            raise ConfigError(f"sweep.parameter{_where(lines, 'sweep.parameter')}: expected a dotted path")
        kind = field_kind(scenario, path)
        raw = _grid_values(spec["values"], "sweep.values", lines)
        if kind == "int":
            if any(v != int(v) for v in raw):
                raise ConfigError(f"sweep.values{_where(lines, 'sweep.values')}: {path} takes integers")
            values = tuple(int(v) for v in raw)
        elif kind in UNITS:
            unit = unit_of(path, kind) if kind != "dimensionless" else "1"
            values = tuple(v * UNITS[kind][unit] for v in raw)
        else:
            raise ConfigError(f"sweep.parameter{_where(lines, 'sweep.parameter')}: {path} is not a "
                              f"scalar numeric field")
        sweep = Sweep(path, values)

    output = doc.get("output") or {}
    if not isinstance(output, dict) or set(output) - {"directory", "summary"}:
        raise ConfigError(f"output{_where(lines, 'output')}: expects keys 'directory' and 'summary'")
    summary = output.get("summary", "yaml")
    if summary not in ("yaml", "json"):
        raise ConfigError("output.summary must be 'yaml' or 'json'")
    return ScenarioConfig(scenario, preset, sections, sweep, str(output.get("directory", "results")),
                          summary, source=doc)


def load_config_file(path: str, preset: Optional[str] = None) -> ScenarioConfig:
    """Read and parse a config file; ``OSError`` propagates unchanged."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_config(text, preset)
