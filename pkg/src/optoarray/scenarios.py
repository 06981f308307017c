"""Scenario files: YAML descriptions of a network plus what to compute.

Grammar (unknown keys are rejected; ``?`` marks optional keys)::

    name: str
    description: str
    network:
      initial_state?: thermal | vacuum
      defaults?: {any cavity field below except index}
      cavities:
        - index: int
          kappa, mu, omega_m: float
          detuning?, g?, nbar?: float            (default 0)
          regime?: full | blue | red              (default full)
          drive?: {E: float | [re, im], G0: float}   (sets g, excludes it)
      couplings?:
        - {kind: reversible | cascaded, source: int, target: int, chi?: float}
    run:
      mode: evolve | steady | sweep | stability | oracle-check
      t_max?, dt_out?: float                      (evolve)
      pairs?: [[b1, b2], ...]
      correlations?: [{modes: [a1, a2], form?: cc | ccdag | cdagc}, ...]
      sweep?:
        axes: [{path: "cavity[0].g", values: [...] | range: RANGE}, ...]
        evaluation: {type: steady}
                  | {type: max_over_time, horizon: float, step: float}
                  | {type: at_times, times: [...] | range: RANGE}
    oracle?: {cutoff: int | [int, ...], step?: int, t_max: float, dt_out: float}

    RANGE = {start, stop, num} or {start, stop, step}, both ends included.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .errors import ScenarioError
from .fock import TruncationSpec
from .model import (
    CavitySpec,
    CouplingKind,
    CouplingSpec,
    InitialState,
    NetworkSpec,
    RawDriveSpec,
    Regime,
    coupling_from_drive,
    validate,
)
from .sweep import AtTimes, MaxOverTime, Observables, SteadyState, SweepAxis, SweepSpec, time_grid

MODES = ("evolve", "steady", "sweep", "stability", "oracle-check")


@dataclass(frozen=True)
class RunSpec:
    mode: str
    observables: Observables
    t_max: float | None = None
    dt_out: float | None = None
    sweep: SweepSpec | None = None


@dataclass(frozen=True)
class OracleSpec:
    truncation: TruncationSpec
    t_max: float
    dt_out: float


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    network: NetworkSpec
    run: RunSpec
    oracle: OracleSpec | None = None
    source: str = "<string>"

    def with_initial(self, kind):
        """Copy with a different initial state (sweeps follow the network)."""
        if kind is None:
            return self
        net = replace(self.network, initial_state=InitialState(kind))
        run = self.run
        if run.sweep is not None:
            run = replace(run, sweep=replace(run.sweep, initial=InitialState(kind).value))
        return replace(self, network=net, run=run)


# ---------------------------------------------------------------------------
# YAML with line numbers


class _Map(dict):
    line = 0
    lines: dict


class _Loader(yaml.SafeLoader):
    pass


def _construct_map(loader, node):
    loader.flatten_mapping(node)
    out = _Map()
    out.line = node.start_mark.line + 1
    out.lines = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        out[key] = loader.construct_object(value_node, deep=True)
        out.lines[key] = value_node.start_mark.line + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_map)


class _Reader:
    def __init__(self, source):
        self.source = source

    def fail(self, where, line, msg):
        raise ScenarioError(f"{self.source}:{line}: {where}: {msg}")

    def mapping(self, value, where, line, required=(), optional=()):
        if not isinstance(value, dict):
            self.fail(where, line, f"expected a mapping, got {type(value).__name__}")
        line = getattr(value, "line", line)
        for key in value:
            if key not in required and key not in optional:
                self.fail(f"{where}.{key}", self.line_of(value, key, line), "unknown key")
        for key in required:
            if key not in value:
                self.fail(where, line, f"missing required field '{key}'")
        return value

    @staticmethod
    def line_of(m, key, default):
        return getattr(m, "lines", {}).get(key, default)

    def number(self, m, key, where, default=None, required=False):
        if key not in m:
            if required:
                self.fail(where, getattr(m, "line", 0), f"missing required field '{key}'")
            return default
        v = m[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{where}.{key}", self.line_of(m, key, 0), f"expected a number, got {v!r}")
        return float(v)

    def integer(self, m, key, where, default=None):
        if key not in m:
            return default
        v = m[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"{where}.{key}", self.line_of(m, key, 0), f"expected an integer, got {v!r}")
        return v

    def choice(self, m, key, where, enum, default=None):
        if key not in m:
            return default
        try:
            return enum(m[key])
        except ValueError:
            options = ", ".join(e.value for e in enum)
            self.fail(f"{where}.{key}", self.line_of(m, key, 0), f"{m[key]!r} is not one of: {options}")

    def seq(self, m, key, where):
        v = m.get(key, [])
        if not isinstance(v, list):
            self.fail(f"{where}.{key}", self.line_of(m, key, 0), "expected a list")
        return v

    def values(self, m, where, list_key):
        """Explicit list under ``list_key`` or a ``range`` mapping."""
        line = getattr(m, "line", 0)
        if (list_key in m) == ("range" in m):
            self.fail(where, line, f"give exactly one of '{list_key}' or 'range'")
        if list_key in m:
            vals = self.seq(m, list_key, where)
            for v in vals:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    self.fail(f"{where}.{list_key}", self.line_of(m, list_key, line), f"expected numbers, got {v!r}")
            if not vals:
                self.fail(f"{where}.{list_key}", self.line_of(m, list_key, line), "must not be empty")
            return tuple(float(v) for v in vals)
        r = self.mapping(m["range"], f"{where}.range", line, ("start", "stop"), ("num", "step"))
        start = self.number(r, "start", f"{where}.range")
        stop = self.number(r, "stop", f"{where}.range")
        if ("num" in r) == ("step" in r):
            self.fail(f"{where}.range", r.line, "give exactly one of 'num' or 'step'")
        if "num" in r:
            num = self.integer(r, "num", f"{where}.range")
            if num < 1:
                self.fail(f"{where}.range.num", r.lines["num"], "must be at least 1")
            return tuple(np.linspace(start, stop, num).tolist())
        step = self.number(r, "step", f"{where}.range")
        try:
            return tuple((start + time_grid(stop - start, step)).tolist())
        except ValueError as exc:
            self.fail(f"{where}.range", r.line, str(exc))


# ---------------------------------------------------------------------------
# sections

_CAVITY_NUMBERS = ("kappa", "mu", "omega_m", "detuning", "g", "nbar")
_CAVITY_KEYS = _CAVITY_NUMBERS + ("regime", "drive")


def _cavity(rd, raw, defaults, where):
    m = rd.mapping(raw, where, 0, ("index",), _CAVITY_KEYS)
    merged = _Map({**defaults, **m})
    merged.line, merged.lines = m.line, {**getattr(defaults, "lines", {}), **m.lines}
    index = rd.integer(merged, "index", where)
    fields = {}
    for key in ("kappa", "mu", "omega_m"):
        fields[key] = rd.number(merged, key, where, required=True)
    for key in ("detuning", "g", "nbar"):
        fields[key] = rd.number(merged, key, where, default=0.0)
    fields["regime"] = rd.choice(merged, "regime", where, Regime, Regime.FULL)
    if "drive" in m:
        if "g" in m:
            rd.fail(where, m.line, "give either 'g' or 'drive', not both")
        d = rd.mapping(m["drive"], f"{where}.drive", m.line, ("E", "G0"))
        E = d["E"]
        if isinstance(E, list) and len(E) == 2:
            E = complex(float(E[0]), float(E[1]))
        elif isinstance(E, (int, float)) and not isinstance(E, bool):
            E = complex(E)
        else:
            rd.fail(f"{where}.drive.E", d.lines["E"], "expected a number or [re, im]")
        drive = RawDriveSpec(E, rd.number(d, "G0", f"{where}.drive"))
        fields["g"] = coupling_from_drive(drive, fields["kappa"], fields["detuning"])
    return CavitySpec(index, **fields)


def _coupling(rd, raw, where):
    m = rd.mapping(raw, where, 0, ("kind", "source", "target"), ("chi",))
    kind = rd.choice(m, "kind", where, CouplingKind)
    chi = rd.number(m, "chi", where, default=0.0)
    if kind is CouplingKind.REVERSIBLE and "chi" not in m:
        rd.fail(where, m.line, "missing required field 'chi' for a reversible coupling")
    return CouplingSpec(kind, rd.integer(m, "source", where), rd.integer(m, "target", where), chi)


def _network(rd, raw):
    m = rd.mapping(raw, "network", 0, ("cavities",), ("initial_state", "defaults", "couplings"))
    defaults = _Map()
    if "defaults" in m:
        defaults = rd.mapping(m["defaults"], "network.defaults", m.line, (), _CAVITY_NUMBERS + ("regime",))
    cavities = tuple(_cavity(rd, c, defaults, f"network.cavities[{i}]") for i, c in enumerate(rd.seq(m, "cavities", "network")))
    couplings = tuple(_coupling(rd, c, f"network.couplings[{i}]") for i, c in enumerate(rd.seq(m, "couplings", "network")))
    initial = rd.choice(m, "initial_state", "network", InitialState, InitialState.THERMAL_MECHANICS)
    return validate(NetworkSpec(cavities, couplings, initial))


def _observables(rd, m, where):
    pairs = []
    for i, p in enumerate(rd.seq(m, "pairs", where)):
        if not (isinstance(p, list) and len(p) == 2):
            rd.fail(f"{where}.pairs[{i}]", rd.line_of(m, "pairs", m.line), "expected a pair like [b1, b2]")
        pairs.append(tuple(p))
    corrs = []
    for i, c in enumerate(rd.seq(m, "correlations", where)):
        cm = rd.mapping(c, f"{where}.correlations[{i}]", m.line, ("modes",), ("form",))
        corrs.append((*cm["modes"], cm.get("form", "ccdag")))
    try:
        return Observables(tuple(pairs), tuple(corrs))
    except ValueError as exc:
        rd.fail(where, m.line, str(exc))


def _evaluation(rd, raw, where):
    m = rd.mapping(raw, where, 0, ("type",), ("horizon", "step", "times", "range"))
    kind = m["type"]
    if kind == "steady":
        rd.mapping(m, where, 0, ("type",))
        return SteadyState()
    if kind == "max_over_time":
        rd.mapping(m, where, 0, ("type", "horizon", "step"))
        return MaxOverTime(rd.number(m, "horizon", where), rd.number(m, "step", where))
    if kind == "at_times":
        rd.mapping(m, where, 0, ("type",), ("times", "range"))
        return AtTimes(rd.values(m, where, "times"))
    rd.fail(f"{where}.type", m.lines["type"], f"{kind!r} is not one of: steady, max_over_time, at_times")


def _sweep(rd, raw, observables, where):
    m = rd.mapping(raw, where, 0, ("axes", "evaluation"), ("initial",))
    axes = []
    for i, a in enumerate(rd.seq(m, "axes", where)):
        am = rd.mapping(a, f"{where}.axes[{i}]", m.line, ("path",), ("values", "range"))
        try:
            axes.append(SweepAxis(am["path"], rd.values(am, f"{where}.axes[{i}]", "values")))
        except ValueError as exc:
            rd.fail(f"{where}.axes[{i}]", am.line, str(exc))
    initial = rd.choice(m, "initial", where, InitialState)
    try:
        return SweepSpec(tuple(axes), observables, _evaluation(rd, m["evaluation"], f"{where}.evaluation"),
                         initial.value if initial else None)
    except ValueError as exc:
        rd.fail(where, m.line, str(exc))


def _run(rd, raw):
    m = rd.mapping(raw, "run", 0, ("mode",), ("t_max", "dt_out", "pairs", "correlations", "sweep"))
    mode = m["mode"]
    if mode not in MODES:
        rd.fail("run.mode", m.lines["mode"], f"{mode!r} is not one of: {', '.join(MODES)}")
    obs = _observables(rd, m, "run")
    sweep = _sweep(rd, m["sweep"], obs, "run.sweep") if "sweep" in m else None
    t_max, dt_out = rd.number(m, "t_max", "run"), rd.number(m, "dt_out", "run")
    if mode == "evolve" and (t_max is None or dt_out is None):
        rd.fail("run", m.line, "mode 'evolve' needs 't_max' and 'dt_out'")
    if mode == "sweep" and sweep is None:
        rd.fail("run", m.line, "mode 'sweep' needs a 'sweep' section")
    return RunSpec(mode, obs, t_max, dt_out, sweep)


def _oracle(rd, raw):
    m = rd.mapping(raw, "oracle", 0, ("cutoff", "t_max", "dt_out"), ("step",))
    cut = m["cutoff"]
    if isinstance(cut, list):
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in cut):
            rd.fail("oracle.cutoff", m.lines["cutoff"], "expected integers")
        cut = tuple(cut)
    elif not isinstance(cut, int) or isinstance(cut, bool):
        rd.fail("oracle.cutoff", m.lines["cutoff"], "expected an integer or a list of integers")
    trunc = TruncationSpec(cut, rd.integer(m, "step", "oracle", 1))
    return OracleSpec(trunc, rd.number(m, "t_max", "oracle"), rd.number(m, "dt_out", "oracle"))


def parse_scenario(text, source="<string>") -> Scenario:
    """Parse and validate scenario YAML; raises :class:`ScenarioError` or
    :class:`~optoarray.errors.ValidationError`."""
    rd = _Reader(source)
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"{source}:{mark.line + 1 if mark else 0}: invalid YAML: {exc}") from None
    m = rd.mapping(doc, "scenario", 1, ("name", "description", "network", "run"), ("oracle",))
    network = _network(rd, m["network"])
    run = _run(rd, m["run"])
    oracle = _oracle(rd, m["oracle"]) if "oracle" in m else None
    if run.mode == "oracle-check" and oracle is None:
        rd.fail("run", m.lines["run"], "mode 'oracle-check' needs an 'oracle' section")
    return Scenario(str(m["name"]), str(m["description"]), network, run, oracle, source)


# ---------------------------------------------------------------------------
# bundled catalog


def _bundled():
    return resources.files("optoarray") / "scenarios"


def catalog():
    """Bundled scenario names mapped to their resource paths, sorted by name."""
    return {p.name[:-5]: p for p in sorted(_bundled().iterdir(), key=lambda p: p.name) if p.name.endswith(".yaml")}


def load_scenario(name_or_path) -> Scenario:
    """Load a bundled scenario by name, or a scenario file by path."""
    bundled = catalog()
    if str(name_or_path) in bundled:
        res = bundled[str(name_or_path)]
        return parse_scenario(res.read_text(encoding="utf-8"), source=res.name)
    path = Path(name_or_path)
    if not path.is_file():
        raise ScenarioError(f"no bundled scenario or file named {str(name_or_path)!r}")
    return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))
