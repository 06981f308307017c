"""Observables, result tables and parameter sweeps.

A sweep varies one or more numeric network parameters, addressed by paths
such as ``cavity[0].detuning``, ``cavity[*].nbar`` or ``coupling[0].chi``
(indices count cavities in index order and explicitly listed couplings).
Several axes form a Cartesian grid, the first axis varying slowest.
"""

from __future__ import annotations

import csv
import io
import itertools
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import covariance_trajectory, evolve, initial_state, stability, steady_state
from .entanglement import CORRELATION_FORMS, log_negativity_series, mode_correlation
from .errors import InvalidParameterError, UnstableError
from .generator import ModeIndex, build_generator
from .model import NetworkSpec, validate

CAVITY_FIELDS = ("kappa", "mu", "omega_m", "detuning", "g", "nbar")
COUPLING_FIELDS = ("chi",)
_PATH_RE = re.compile(r"^(cavity|coupling)\[(\d+|\*)\]\.(\w+)$")
_FORM_SUFFIX = {"cc": "{j}{k}", "ccdag": "{j}{k}dag", "cdagc": "{j}dag{k}"}


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class Correlation:
    j: ModeIndex
    k: ModeIndex
    form: str = "ccdag"

    def __post_init__(self):
        object.__setattr__(self, "j", ModeIndex.parse(self.j))
        object.__setattr__(self, "k", ModeIndex.parse(self.k))
        if self.form not in CORRELATION_FORMS:
            raise InvalidParameterError(f"unknown correlation form {self.form!r}; expected one of {CORRELATION_FORMS}")

    @property
    def label(self):
        return _FORM_SUFFIX[self.form].format(j=self.j, k=self.k)


@dataclass(frozen=True)
class Observables:
    """Mode pairs for log-negativity and complex correlations to report."""

    pairs: tuple = ()
    correlations: tuple = ()

    def __post_init__(self):
        pairs = tuple((ModeIndex.parse(a), ModeIndex.parse(b)) for a, b in self.pairs)
        corrs = tuple(c if isinstance(c, Correlation) else Correlation(*c) for c in self.correlations)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "correlations", corrs)

    @property
    def columns(self):
        cols = [f"EN_{a}_{b}" for a, b in self.pairs]
        for c in self.correlations:
            cols += [f"re_{c.label}", f"im_{c.label}"]
        return tuple(cols)

    def evaluate(self, sigmas, means, modes):
        """Array of shape ``(len(sigmas), len(columns))``."""
        sigmas = np.asarray(sigmas, dtype=float)
        out = np.empty((sigmas.shape[0], len(self.columns)))
        col = 0
        for a, b in self.pairs:
            out[:, col] = log_negativity_series(sigmas, modes, a, b)
            col += 1
        for c in self.correlations:
            for n, (sigma, mean) in enumerate(zip(sigmas, means)):
                value = mode_correlation(_State(sigma, mean), modes, c.j, c.k, c.form)
                out[n, col], out[n, col + 1] = value.real, value.imag
            col += 2
        return out


@dataclass(frozen=True, eq=False)
class _State:
    sigma: np.ndarray
    mean: np.ndarray


# ---------------------------------------------------------------------------
# tables


def format_value(value):
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


@dataclass
class Table:
    """Column names plus rows of floats (and an optional trailing status string)."""

    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name):
        i = self.columns.index(name)
        values = [r[i] for r in self.rows]
        return np.array(values, dtype=object if isinstance(values[0], str) else float)

    def to_csv(self, fh=None):
        """Write to ``fh`` (or return a string): 17 significant digits, '\\n' line ends."""
        target = fh if fh is not None else io.StringIO()
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return None if fh is not None else target.getvalue()


def time_grid(t_max, dt):
    n = int(round(t_max / dt))
    if n < 1 or not np.isclose(n * dt, t_max, rtol=1e-9, atol=1e-12):
        raise InvalidParameterError(f"t_max={t_max} is not a positive multiple of dt={dt}")
    return np.linspace(0.0, t_max, n + 1)


def time_series(network: NetworkSpec, observables: Observables, t_grid, initial=None) -> Table:
    gen = build_generator(network)
    states = evolve(gen, initial_state(network, initial), t_grid)
    values = observables.evaluate([s.sigma for s in states], [s.mean for s in states], gen.modes)
    rows = [(s.t, *v) for s, v in zip(states, values)]
    return Table(("t",) + observables.columns, rows)


def steady_table(network: NetworkSpec, observables: Observables) -> Table:
    """One-row table; raises :class:`UnstableError` when there is no steady state."""
    gen = build_generator(network)
    ss = steady_state(gen)
    values = observables.evaluate([ss.sigma], [ss.mean], gen.modes)[0]
    return Table(observables.columns, [tuple(values)])


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class AtTimes:
    times: tuple


@dataclass(frozen=True)
class SteadyState:
    pass


@dataclass(frozen=True)
class MaxOverTime:
    """Largest value on the grid ``0, step, ..., horizon`` (log-negativity only)."""

    horizon: float
    step: float


@dataclass(frozen=True)
class SweepAxis:
    path: str
    values: tuple

    def __post_init__(self):
        resolve_path(self.path)
        values = tuple(float(v) for v in self.values)
        if not values or not all(np.isfinite(values)):
            raise InvalidParameterError(f"sweep axis {self.path}: values must be non-empty and finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    observables: Observables
    evaluation: object = SteadyState()
    initial: str | None = None

    def __post_init__(self):
        if not self.axes:
            raise InvalidParameterError("a sweep needs at least one axis")
        if isinstance(self.evaluation, MaxOverTime) and self.observables.correlations:
            raise InvalidParameterError("MaxOverTime reports log-negativities only; drop the correlations")

    @property
    def points(self):
        return list(itertools.product(*(ax.values for ax in self.axes)))

    @property
    def columns(self):
        cols = tuple(ax.path for ax in self.axes)
        if isinstance(self.evaluation, AtTimes):
            cols += ("t",)
        return cols + self.observables.columns + ("status",)


def resolve_path(path):
    """``(collection, index or None, field)`` for a sweep path; ``None`` means every entry."""
    m = _PATH_RE.match(path.strip())
    if m is None:
        raise InvalidParameterError(f"unresolvable sweep path {path!r}; expected e.g. 'cavity[0].g'")
    kind, idx, name = m.groups()
    allowed = CAVITY_FIELDS if kind == "cavity" else COUPLING_FIELDS
    if name not in allowed:
        raise InvalidParameterError(f"unresolvable sweep path {path!r}: {kind} has no numeric field {name!r}")
    return kind, None if idx == "*" else int(idx), name


def apply_value(network: NetworkSpec, path, value) -> NetworkSpec:
    """Copy of ``network`` with the parameter at ``path`` set to ``value`` (not re-validated)."""
    kind, idx, name = resolve_path(path)
    cavities = list(network.cavities)
    couplings = [c for c in network.couplings if not c.implied]
    items = cavities if kind == "cavity" else couplings
    if idx is not None and idx >= len(items):
        raise InvalidParameterError(f"unresolvable sweep path {path!r}: only {len(items)} {kind} entries")
    targets = range(len(items)) if idx is None else [idx]
    for i in targets:
        items[i] = replace(items[i], **{name: float(value)})
    return replace(network, cavities=tuple(cavities), couplings=tuple(couplings), validated=False)


def _evaluate_point(args):
    network, sweep, point = args
    for ax, value in zip(sweep.axes, point):
        network = apply_value(network, ax.path, value)
    network = validate(network)
    gen = build_generator(network)
    obs = sweep.observables
    status = "ok" if stability(gen).hurwitz else "unstable"
    ev = sweep.evaluation
    if isinstance(ev, SteadyState):
        try:
            ss = steady_state(gen)
        except UnstableError:
            return [(*point, *([np.nan] * len(obs.columns)), "unstable")]
        return [(*point, *obs.evaluate([ss.sigma], [ss.mean], gen.modes)[0], status)]
    init = initial_state(network, sweep.initial)
    if isinstance(ev, MaxOverTime):
        sigmas = covariance_trajectory(gen, init, time_grid(ev.horizon, ev.step))
        values = obs.evaluate(sigmas, np.zeros(sigmas.shape[:2]), gen.modes).max(axis=0)
        return [(*point, *values, status)]
    states = evolve(gen, init, ev.times)
    values = obs.evaluate([s.sigma for s in states], [s.mean for s in states], gen.modes)
    return [(*point, s.t, *v, status) for s, v in zip(states, values)]


def run_sweep(network: NetworkSpec, sweep: SweepSpec, jobs=1) -> Table:
    """Evaluate every grid point; rows keep grid order whatever ``jobs`` is.

    Points without a steady state are reported with status ``unstable`` (and
    NaN values for :class:`SteadyState`) instead of stopping the sweep.
    """
    tasks = [(network, sweep, p) for p in sweep.points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_evaluate_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        chunks = [_evaluate_point(t) for t in tasks]
    return Table(sweep.columns, [row for chunk in chunks for row in chunk])
