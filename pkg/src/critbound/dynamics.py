"""Stepping, trajectory recording and radius diagnostics for

    x(n+1) = e(phi) x(n) + f(x(n)) + y(n),   n >= 1.

A :class:`SystemSpec` bundles the rotation with an f-family and a y-family
(see :mod:`critbound.systems` for the concrete ones).  Families with
internal state (orbit index, argument tag) thread it through ``step`` as the
``aux`` value; those families also keep their radius as ``sign*base +
offset`` with an integer offset, so lower bounds on them can be checked
without tolerance.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .circle import RotationNumber, e, orbit_phase, reduce, TWO_PI
from .errors import FamilyError, NumericAbort, PreconditionError


# ---------------------------------------------------------------------------
# family contracts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyDescriptor:
    name: str
    params: dict = field(default_factory=dict, compare=False)
    statefulness: str = "none"     # none | orbit-index | argument-tag

    def to_json(self) -> dict:
        params = {k: (repr(v) if isinstance(v, complex) else v) for k, v in self.params.items()}
        return {"name": self.name, "params": params, "statefulness": self.statefulness}


class Nonlinearity:
    """Base class for f-families.

    Subclasses implement ``__call__(z, state, n)``.  Stateful ones also
    override :meth:`initial_state` and :meth:`advance`.
    """

    name = "abstract"
    statefulness = "none"
    exact_track = False
    requires_zero_forcing = False
    sup: float | None = None
    # closed-form limit profile, when the family knows it
    phi_closed_form = None
    upsilon_exact = None

    def __init__(self, phi: RotationNumber, **params):
        self.phi = phi
        self.rotation = e(float(phi))
        self.params = params

    @property
    def descriptor(self) -> FamilyDescriptor:
        return FamilyDescriptor(self.name, dict(self.params), self.statefulness)

    @property
    def stateful(self) -> bool:
        return self.statefulness != "none"

    def __call__(self, z: complex, state=None, n: int = 1) -> complex:
        raise NotImplementedError

    def initial_state(self, x1: complex, **init):
        if init:
            raise PreconditionError(f"{self.name} takes no initial-state options: {sorted(init)}")
        return None

    def advance(self, z: complex, x_next: complex, state, n: int):
        return x_next, state

    def evaluate(self, z: complex) -> complex:
        """Evaluate f without trajectory context (used for profiles and sup checks)."""
        if self.stateful:
            raise PreconditionError(f"{self.name} needs trajectory state to evaluate")
        return self(z, None, 1)


class Forcing:
    """Base class for y-families: ``y(n)`` for integer ``n >= 1``."""

    name = "abstract"
    sup: float | None = None

    def __init__(self, phi: RotationNumber, **params):
        self.phi = phi
        self.params = params

    @property
    def descriptor(self) -> FamilyDescriptor:
        return FamilyDescriptor(self.name, dict(self.params))

    def __call__(self, n: int) -> complex:
        raise NotImplementedError

    def derotated(self, n: int) -> complex:
        """``y(n) * e(-n*phi)``; families override with an exact expression."""
        return self(n) * e(-orbit_phase(n, self.phi))

    def derotated_array(self, n1: int, n2: int) -> np.ndarray:
        return np.array([self.derotated(n) for n in range(n1, n2)], dtype=complex)


@dataclass(frozen=True)
class SystemSpec:
    phi: RotationNumber
    f: Nonlinearity
    y: Forcing

    def __post_init__(self):
        if self.f.requires_zero_forcing and self.y.name != "zero":
            raise PreconditionError(f"{self.f.name} tracks radii exactly and needs y = 0",
                                    "y == 0")

    @property
    def rotation(self) -> complex:
        return self.f.rotation

    @property
    def f_family(self) -> FamilyDescriptor:
        return self.f.descriptor

    @property
    def y_family(self) -> FamilyDescriptor:
        return self.y.descriptor

    @property
    def f_sup(self) -> float | None:
        return self.f.sup

    @property
    def y_sup(self) -> float | None:
        return self.y.sup

    def to_json(self) -> dict:
        return {"phi": self.phi.to_json(), "f": self.f_family.to_json(),
                "y": self.y_family.to_json(), "f_sup": self.f_sup, "y_sup": self.y_sup}


# ---------------------------------------------------------------------------
# exact radius track
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ExactRadius:
    """Radius ``sign*base + offset`` with an integer offset.

    Comparisons against integers are exact: Python compares a float with an
    int without rounding, and ``sign*base`` is itself exact.
    """

    base: float
    sign: int = 1
    offset: int = 0

    def value(self) -> float:
        return self.sign * self.base + self.offset

    def _head(self) -> float:
        return self.sign * self.base

    def le(self, k: int) -> bool:
        return self._head() <= k - self.offset

    def ge(self, k: int) -> bool:
        return self._head() >= k - self.offset

    def is_zero(self) -> bool:
        return self._head() == -self.offset

    def ceil(self) -> int:
        return math.ceil(self._head()) + self.offset

    def shifted(self, d: int) -> "ExactRadius":
        return ExactRadius(self.base, self.sign, self.offset + d)

    def reflected(self) -> "ExactRadius":
        """``1 - r``."""
        return ExactRadius(self.base, -self.sign, 1 - self.offset)


def snap_modulus(x: complex, radius: ExactRadius) -> complex:
    r = radius.value()
    if r == 0.0:
        return 0j
    ax = abs(x)
    return x * (r / ax) if ax else complex(r, 0.0)


# ---------------------------------------------------------------------------
# stepping and trajectories
# ---------------------------------------------------------------------------

def step(x: complex, aux: Any, spec: SystemSpec, n: int) -> tuple[complex, Any]:
    """One application of the recurrence at index ``n``."""
    if n < 1:
        raise PreconditionError(f"step index must be >= 1, got {n}", "n >= 1")
    try:
        x_next = spec.rotation * x + spec.f(x, aux, n) + spec.y(n)
        if spec.f.stateful:
            x_next, aux = spec.f.advance(x, x_next, aux, n)
    except (PreconditionError, NumericAbort):
        raise
    except Exception as exc:
        raise FamilyError(n, exc) from exc
    return x_next, aux


@dataclass
class Trajectory:
    start: complex
    indices: np.ndarray            # n values (1-based) of the stored states
    states: np.ndarray
    sup_radius: float
    length: int
    stride: int = 1
    initial_aux: Any = None
    final_aux: Any = None
    exact_base: float | None = None
    exact_sign: np.ndarray | None = None
    exact_offset: np.ndarray | None = None
    radius_track: np.ndarray = field(init=False, repr=False)
    arg_track: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.radius_track = np.abs(self.states)
        with np.errstate(invalid="ignore"):
            args = reduce(np.angle(self.states) / TWO_PI)
        self.arg_track = np.where(self.states == 0, np.nan, args)

    @classmethod
    def from_states(cls, states: Iterable[complex]) -> "Trajectory":
        """Fully sampled trajectory from explicit states ``x(1), x(2), ...``."""
        arr = np.asarray(list(states), dtype=complex)
        return cls(complex(arr[0]), np.arange(1, len(arr) + 1), arr,
                   float(np.abs(arr).max()), len(arr))

    @property
    def fully_sampled(self) -> bool:
        return self.stride == 1

    @property
    def has_exact_track(self) -> bool:
        return self.exact_sign is not None

    def exact_radius(self, n: int) -> ExactRadius:
        i = self._position(n)
        return ExactRadius(self.exact_base, int(self.exact_sign[i]), int(self.exact_offset[i]))

    def exact_heads(self) -> np.ndarray:
        """``sign*base`` per stored state; the radius is this plus ``exact_offset``."""
        return self.exact_sign * self.exact_base

    def radius(self, n: int) -> float:
        return float(self.radius_track[self._position(n)])

    def _position(self, n: int) -> int:
        if self.stride == 1:
            if not 1 <= n <= self.length:
                raise PreconditionError(f"index {n} outside 1..{self.length}", "1 <= n <= length")
            return n - 1
        i = int(np.searchsorted(self.indices, n))
        if i >= len(self.indices) or self.indices[i] != n:
            raise PreconditionError(f"state {n} was not sampled (stride {self.stride})")
        return i

    def require_full(self, what: str):
        if self.stride != 1:
            raise PreconditionError(f"{what} needs a fully sampled trajectory (stride 1)",
                                    "stride == 1")


def simulate(spec: SystemSpec, x1: complex, n_steps: int, sample_stride: int = 1,
             **init) -> Trajectory:
    """States ``x(1) .. x(n_steps)``; every ``sample_stride``-th one is stored.

    ``sup_radius`` covers every step regardless of the stride.  Extra keyword
    arguments go to the f-family's initial state (e.g. ``q=`` for the
    argument-tag family).
    """
    if n_steps < 1:
        raise PreconditionError("n_steps must be >= 1", "n_steps >= 1")
    if sample_stride < 1:
        raise PreconditionError("sample_stride must be >= 1", "sample_stride >= 1")
    f, y, rot = spec.f, spec.y, spec.rotation
    x = complex(x1)
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise NumericAbort(1, x)
    aux = f.initial_state(x, **init)
    initial_aux = aux
    if f.exact_track:
        x = snap_modulus(x, aux.radius)
    stateful = f.stateful
    exact = f.exact_track

    n_store = (n_steps - 1) // sample_stride + 1
    states = np.empty(n_store, dtype=complex)
    signs = np.empty(n_store, dtype=np.int8) if exact else None
    offsets = np.empty(n_store, dtype=np.int64) if exact else None
    states[0] = x
    if exact:
        signs[0], offsets[0] = aux.radius.sign, aux.radius.offset
    sup = abs(x)
    slot = 1
    n = 1
    try:
        for n in range(1, n_steps):
            x_next = rot * x + f(x, aux, n) + y(n)
            if stateful:
                x_next, aux = f.advance(x, x_next, aux, n)
            r = abs(x_next)
            if not math.isfinite(r):
                raise NumericAbort(n + 1, x_next)
            if r > sup:
                sup = r
            x = x_next
            if n % sample_stride == 0:
                states[slot] = x
                if exact:
                    signs[slot], offsets[slot] = aux.radius.sign, aux.radius.offset
                slot += 1
    except (NumericAbort, PreconditionError):
        raise
    except Exception as exc:
        raise FamilyError(n, exc) from exc

    return Trajectory(
        start=complex(states[0]),
        indices=np.arange(0, n_store) * sample_stride + 1,
        states=states,
        sup_radius=float(sup),
        length=n_steps,
        stride=sample_stride,
        initial_aux=initial_aux,
        final_aux=aux,
        exact_base=aux.radius.base if exact else None,
        exact_sign=signs,
        exact_offset=offsets,
    )


def verify_recurrence(traj: Trajectory, spec: SystemSpec) -> float:
    """Largest gap between the stored states and the summed closed form

        x(n) = e((n-1)phi) [ x(1) + sum_{j<n} (f(x(j)) + y(j)) e(-j phi) ].

    f is re-evaluated on the recorded states (stateful families replay their
    auxiliary state from ``traj.initial_aux``).
    """
    traj.require_full("verify_recurrence")
    phi = float(spec.phi)
    states = traj.states
    N = len(states)
    if N == 1:
        return 0.0
    terms = np.empty(N - 1, dtype=complex)
    aux = traj.initial_aux
    f, y = spec.f, spec.y
    for j in range(1, N):
        z = complex(states[j - 1])
        terms[j - 1] = f(z, aux, j) + y(j)
        if f.stateful:
            _, aux = f.advance(z, complex(states[j]), aux, j)
    j = np.arange(1, N)
    terms *= np.exp(-1j * TWO_PI * reduce(j * phi))
    partial = np.concatenate(([0j], np.cumsum(terms)))
    n = np.arange(1, N + 1)
    predicted = np.exp(1j * TWO_PI * reduce((n - 1) * phi)) * (states[0] + partial)
    return float(np.max(np.abs(states - predicted)))


def recurrence_tolerance(traj: Trajectory) -> float:
    return 1e-8 * (1.0 + traj.sup_radius)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VisitRecord:
    moment: int
    annulus_low: float
    annulus_high: float


def visiting_moments(traj: Trajectory, H: float, width: float) -> list[VisitRecord]:
    """Indices ``n >= 2`` entering the annulus ``H < |x| <= H + width`` from outside."""
    if not H > 0 or not width > 0:
        raise PreconditionError("annulus needs H > 0 and width > 0", "H > 0, width > 0")
    traj.require_full("visiting_moments")
    r = traj.radius_track
    hi = H + width
    inside = (r > H) & (r <= hi)
    entered = np.flatnonzero(inside[1:] & ~inside[:-1]) + 2
    return [VisitRecord(int(m), float(H), float(hi)) for m in entered]


def window_drift(traj: Trajectory, n1: int, n2: int) -> float:
    if not 1 <= n1 < n2 <= traj.length:
        raise PreconditionError(f"window needs 1 <= n1 < n2 <= {traj.length}, got ({n1}, {n2})",
                                "1 <= n1 < n2 <= length")
    return (traj.radius(n2) - traj.radius(n1)) / (n2 - n1)


@dataclass(frozen=True)
class ProbeResult:
    verdict: str                    # "within" | "violated"
    first_violation: int | None
    growth_exponent: float | None


def growth_exponent(traj: Trajectory, tail: float = 0.5) -> float | None:
    """Least-squares slope of log|x(n)| against log n over the last ``tail`` of the run."""
    n = traj.indices.astype(float)
    r = traj.radius_track
    keep = (n >= (1.0 - tail) * traj.length) & (r > 0)
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(n[keep]), np.log(r[keep]), 1)
    return float(slope)


def boundedness_probe(traj: Trajectory, L: float) -> ProbeResult:
    """Compare the run against a claimed bound ``L``.

    ``first_violation`` is the first stored index above ``L`` (exact when the
    trajectory is fully sampled).
    """
    if not L > 0:
        raise PreconditionError("L must be positive", "L > 0")
    if traj.sup_radius <= L:
        return ProbeResult("within", None, None)
    above = np.flatnonzero(traj.radius_track > L)
    first = int(traj.indices[above[0]]) if len(above) else None
    return ProbeResult("violated", first, growth_exponent(traj))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

CSV_HEADER = ("n", "re", "im", "radius", "arg")


def write_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for n, z, r, a in zip(traj.indices, traj.states, traj.radius_track, traj.arg_track):
            w.writerow((int(n), repr(float(z.real)), repr(float(z.imag)), repr(float(r)),
                        "" if math.isnan(a) else repr(float(a))))


def summary(traj: Trajectory, visits: list[VisitRecord] | None = None) -> dict:
    out = {
        "length": traj.length,
        "stride": traj.stride,
        "start": [traj.start.real, traj.start.imag],
        "sup_radius": traj.sup_radius,
        "final_radius": float(traj.radius_track[-1]),
    }
    if visits is not None:
        out["visiting_moments"] = [v.moment for v in visits]
    return out


def dumps(obj) -> str:
    """Canonical JSON used for every report (sorted keys, fixed indentation)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
