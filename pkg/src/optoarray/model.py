"""Network description for arrays of driven optomechanical cavities.

All rates are dimensionless, measured in units of a reference linewidth.
A cavity is described directly by its effective (linearised) coupling ``g``;
the drive bookkeeping helpers below convert a raw drive amplitude into ``g``
when a scenario prefers to specify the laser instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import InvalidParameterError, ValidationError


class Regime(str, Enum):
    FULL = "full"
    BLUE_RWA = "blue"
    RED_RWA = "red"


class CouplingKind(str, Enum):
    REVERSIBLE = "reversible"
    CASCADED = "cascaded"


class InitialState(str, Enum):
    VACUUM_ALL = "vacuum"
    THERMAL_MECHANICS = "thermal"


@dataclass(frozen=True)
class RawDriveSpec:
    """Laser drive ``E`` (complex, rate) and single-photon coupling ``G0``."""

    E: complex
    G0: float


@dataclass(frozen=True)
class CavitySpec:
    index: int
    kappa: float
    mu: float
    omega_m: float
    detuning: float = 0.0
    g: float = 0.0
    nbar: float = 0.0
    regime: Regime = Regime.FULL


@dataclass(frozen=True)
class CouplingSpec:
    kind: CouplingKind
    source: int
    target: int
    chi: float = 0.0
    # added by validate() to complete a cascaded chain with its skip edges
    implied: bool = False


@dataclass(frozen=True)
class NetworkSpec:
    cavities: tuple[CavitySpec, ...]
    couplings: tuple[CouplingSpec, ...] = ()
    initial_state: InitialState = InitialState.THERMAL_MECHANICS
    validated: bool = field(default=False, compare=False)

    def cavity(self, index):
        for cav in self.cavities:
            if cav.index == index:
                return cav
        raise KeyError(index)

    @property
    def coupling_kind(self):
        kinds = {c.kind for c in self.couplings}
        return kinds.pop() if len(kinds) == 1 else None


def steady_state_amplitude(E, kappa, detuning):
    """Intracavity amplitude ``-i E / (kappa/2 + i detuning)`` of an empty driven cavity."""
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    return -1j * complex(E) / (kappa / 2 + 1j * detuning)


def effective_coupling(alpha, G0):
    """Linearised coupling ``|alpha| G0``; the drive phase is absorbed into the modes."""
    return abs(alpha) * G0


def thermal_occupation(ratio):
    """Bose occupation for ``ratio = hbar omega_m / (k_B T)``."""
    if not ratio > 0:
        raise InvalidParameterError(f"hbar*omega/kT ratio must be positive, got {ratio}")
    return 1.0 / math.expm1(ratio)


def coupling_from_drive(drive: RawDriveSpec, kappa, detuning):
    return effective_coupling(steady_state_amplitude(drive.E, kappa, detuning), drive.G0)


def _finite(*values):
    return all(
        math.isfinite(v.real) and math.isfinite(v.imag) if isinstance(v, complex) else math.isfinite(v)
        for v in values
    )


def _cavity_errors(cav):
    errs = []
    tag = f"cavity {cav.index}"
    if not _finite(cav.kappa, cav.mu, cav.omega_m, cav.detuning, cav.g, cav.nbar):
        errs.append(("non-finite", f"{tag}: parameters must be finite"))
        return errs
    if not cav.kappa > 0:
        errs.append(("kappa-nonpositive", f"{tag}: kappa={cav.kappa}"))
    if not cav.mu > 0:
        errs.append(("mu-nonpositive", f"{tag}: mu={cav.mu}"))
    if not cav.omega_m > 0:
        errs.append(("omega-m-nonpositive", f"{tag}: omega_m={cav.omega_m}"))
    if cav.nbar < 0:
        errs.append(("nbar-negative", f"{tag}: nbar={cav.nbar}"))
    if cav.g < 0:
        errs.append(("g-negative", f"{tag}: g={cav.g}"))
    if not isinstance(cav.regime, Regime):
        errs.append(("unknown-regime", f"{tag}: regime={cav.regime!r}"))
    return errs


def _components(indices, edges):
    parent = {i: i for i in indices}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in edges:
        parent[find(a)] = find(b)
    groups = {}
    for i in indices:
        groups.setdefault(find(i), []).append(i)
    return [sorted(g) for g in groups.values()]


def validate(network: NetworkSpec) -> NetworkSpec:
    """Check every invariant of ``network`` and return its normalised form.

    Normalisation sorts cavities by index and, for cascaded networks, adds the
    implied skip edges so that every ordered pair ``j < k`` inside a chain is
    coupled. Raises :class:`ValidationError` listing all violations.
    """
    errs = []
    cavities = tuple(sorted(network.cavities, key=lambda c: c.index))
    if not cavities:
        errs.append(("empty-network", "at least one cavity is required"))
    indices = [c.index for c in cavities]
    if len(set(indices)) != len(indices):
        errs.append(("duplicate-index", f"cavity indices {indices} are not unique"))
    for cav in cavities:
        errs.extend(_cavity_errors(cav))

    known = set(indices)
    explicit = [c for c in network.couplings if not c.implied]
    kinds = {c.kind for c in explicit}
    if len(kinds) > 1:
        errs.append(("mixed-coupling-kinds", "couplings must be all reversible or all cascaded"))
    seen = set()
    for c in explicit:
        tag = f"coupling {c.source}->{c.target}"
        if c.source not in known or c.target not in known:
            errs.append(("unknown-cavity", f"{tag}: refers to a missing cavity"))
        if c.source == c.target:
            errs.append(("self-coupling", f"{tag}: source equals target"))
        if c.kind is CouplingKind.REVERSIBLE:
            if not (math.isfinite(c.chi) and c.chi > 0):
                errs.append(("chi-nonpositive", f"{tag}: chi={c.chi}"))
            key = frozenset((c.source, c.target))
        else:
            if c.source > c.target:
                errs.append(("cascade-not-forward", f"{tag}: cascaded edges must run from lower to higher index"))
            key = (c.source, c.target)
        if key in seen:
            errs.append(("duplicate-coupling", f"{tag}: listed twice"))
        seen.add(key)

    regimes = {c.regime for c in cavities}
    if network.couplings and Regime.FULL in regimes and len(regimes) > 1:
        # Full-regime cavities need a common laser frequency; RWA cavities do not.
        errs.append(("mixed-regimes", "coupled networks cannot mix the full interaction with RWA regimes"))
    if errs:
        raise ValidationError(errs)

    couplings = sorted(explicit, key=lambda c: (min(c.source, c.target), max(c.source, c.target)))
    if kinds == {CouplingKind.CASCADED}:
        chains = _components(indices, [(c.source, c.target) for c in explicit])
        present = {(c.source, c.target) for c in explicit}
        for chain in chains:
            for pos, j in enumerate(chain):
                for k in chain[pos + 1:]:
                    if (j, k) not in present:
                        couplings.append(CouplingSpec(CouplingKind.CASCADED, j, k, implied=True))
        couplings.sort(key=lambda c: (c.source, c.target))
    return replace(network, cavities=cavities, couplings=tuple(couplings), validated=True)
