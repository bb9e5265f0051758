"""Concrete f- and y-families and the registry that builds systems by name.

Each family validates its own parameters and declares a sup bound where one
is known.  Three families are state machines rather than plain functions of
z; they keep their radius exact (see :class:`~critbound.dynamics.ExactRadius`):

* ``ce-orbit-switch``: sign of a unit radial kick decided by an orbit index;
* ``ce-decimal-warp``: arguments carry a tag saying whether they are known
  rational multiples of phi;
* ``ce-slow-drift`` is stateless but pairs with the ``slow-drift`` forcing.
"""

from __future__ import annotations

import cmath
import hashlib
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .circle import TWO_PI, RotationNumber, arg_star, e, rotate
from .dynamics import ExactRadius, Forcing, Nonlinearity, SystemSpec, snap_modulus
from .errors import ConfigError, PreconditionError

# ---------------------------------------------------------------------------
# parameter handling
# ---------------------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(kind: type, value, where: str):
    if isinstance(value, str):
        text = value.strip()
        try:
            if kind is bool:
                if text.lower() in _TRUE:
                    return True
                if text.lower() in _FALSE:
                    return False
                raise ValueError(text)
            if kind is complex:
                return complex(text.replace(" ", "").replace("i", "j"))
            return kind(text)
        except ValueError:
            raise ConfigError(f"{where}: cannot read {value!r} as {kind.__name__}") from None
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is complex and isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    raise ConfigError(f"{where}: expected {kind.__name__}, got {value!r}")


def _resolve(cls, given: dict) -> dict:
    spec = cls.PARAMS
    unknown = set(given) - set(spec)
    if unknown:
        raise ConfigError(f"{cls.name}: unknown parameter(s) {sorted(unknown)}; "
                          f"accepted: {sorted(spec)}")
    out = {}
    for key, (kind, default) in spec.items():
        if key in given:
            out[key] = _coerce(kind, given[key], f"{cls.name}.{key}")
        else:
            out[key] = default
    return out


class _Family:
    PARAMS: dict = {}

    def __init__(self, phi: RotationNumber, **params):
        super().__init__(phi, **_resolve(type(self), params))
        self._setup(**self.params)

    def _setup(self, **params):
        pass


# ---------------------------------------------------------------------------
# generic f-families
# ---------------------------------------------------------------------------

class ZeroF(_Family, Nonlinearity):
    name = "zero"
    sup = 0.0

    def __call__(self, z, state=None, n=1):
        return 0j


class ConstantF(_Family, Nonlinearity):
    """f(z) = c for every z."""

    name = "constant"
    PARAMS = {"c": (complex, 1 + 0j)}

    def _setup(self, c):
        self.c = c
        self.sup = abs(c)

    def __call__(self, z, state=None, n=1):
        return self.c


class RadialF(_Family, Nonlinearity):
    """f(z) = c (z/|z|) e(phi), f(0) = at_zero.

    With ``c = -1`` this is the unit radius contraction ``r -> |r - 1|``.
    """

    name = "radial"
    PARAMS = {"c": (float, -1.0), "at_zero": (complex, 0j)}

    def _setup(self, c, at_zero):
        self.c = c
        self.at_zero = at_zero
        self.sup = max(abs(c), abs(at_zero))

    def __call__(self, z, state=None, n=1):
        if z == 0:
            return self.at_zero
        return self.c * (z / abs(z)) * self.rotation


# ---------------------------------------------------------------------------
# example with a tiny negative arc
# ---------------------------------------------------------------------------

E_E_E = math.exp(math.exp(math.e))      # below 2 + |z| = e^(e^e) the radial factor clamps to 1
SIN_POWER_LIMIT = 646.0                 # 3.0**646 still fits in a double
TINY_ARC_EXPONENT = 2025


def _hash_unit(r: float) -> float:
    """Deterministic value in [-1, 1] derived from the bits of ``r``."""
    digest = hashlib.blake2b(struct.pack("<d", r), digest_size=8).digest()
    return int.from_bytes(digest, "little") / 2.0 ** 63 - 1.0


class TinyArcF(_Family, Nonlinearity):
    """Bounded f whose limit profile is -1 on an arc of length 10**-2025 turns and 0 elsewhere.

    Outside that arc the radial factor decays like ``1/log log log(2 + |z|)``,
    clamped to 1 where the triple logarithm is below 1 or undefined.  The
    tangential factor ``sin(3**|z|)`` is replaced by a hash of ``|z|`` once
    ``3**|z|`` would overflow.

    In double precision the arc collapses to the positive real axis, since the
    smallest nonzero ``atan2`` result is far above ``10**-2025``.
    """

    name = "example-1-2"
    sup = math.sqrt(2.0)

    @staticmethod
    def radial_factor(r: float) -> float:
        x = 2.0 + r
        if x <= E_E_E:
            return 1.0
        return 1.0 / math.log(math.log(math.log(x)))

    @staticmethod
    def tangential_factor(r: float) -> float:
        if r < SIN_POWER_LIMIT:
            return math.sin(3.0 ** r)
        return _hash_unit(r)

    def __call__(self, z, state=None, n=1):
        if z == 0:
            return 0j
        r = abs(z)
        u = z / r
        if z.imag == 0 and z.real > 0:
            a = -1.0 + 0j          # sin(|Arg z|**10) = sin(0)
        else:
            a = complex(self.radial_factor(r), self.tangential_factor(r))
        return a * u * self.rotation

    @staticmethod
    def phi_closed_form(theta):
        theta = np.asarray(theta, dtype=float)
        return np.where(theta == 0.0, -1.0, 0.0)

    @property
    def upsilon_exact(self):
        import mpmath
        return -mpmath.mpf(10) ** (-TINY_ARC_EXPONENT) / (2 * mpmath.pi)


# ---------------------------------------------------------------------------
# power-law radial decay
# ---------------------------------------------------------------------------

class PowerLawF(_Family, Nonlinearity):
    """f(z) = (-g(|z|) + i tau(z)) (z/|z|) e(phi) with g(t) = t**-alpha for t >= M.

    Below M, g is continued by the constant M**-alpha.  The tangential part is
    ``amplitude * sin(2 pi arg z)`` when enabled.
    """

    name = "powerlaw"
    PARAMS = {"alpha": (float, 0.3), "M": (float, 1.0), "tangential": (bool, True),
              "amplitude": (float, 0.5)}

    def _setup(self, alpha, M, tangential, amplitude):
        if not alpha > 0:
            raise PreconditionError(f"powerlaw needs alpha > 0, got {alpha}", "alpha > 0")
        if not M > 0:
            raise PreconditionError(f"powerlaw needs M > 0, got {M}", "M > 0")
        self.alpha, self.M = alpha, M
        self.amplitude = amplitude if tangential else 0.0
        self.g_max = M ** -alpha
        self.sup = math.hypot(self.g_max, self.amplitude)

    def g(self, t):
        if np.ndim(t):
            t = np.asarray(t, dtype=float)
            return np.where(t >= self.M, np.maximum(t, self.M) ** -self.alpha, self.g_max)
        return t ** -self.alpha if t >= self.M else self.g_max

    def __call__(self, z, state=None, n=1):
        if z == 0:
            return 0j
        r = abs(z)
        u = z / r
        g = r ** -self.alpha if r >= self.M else self.g_max
        # sin(2 pi arg z) is just the imaginary part of the unit vector
        return complex(-g, self.amplitude * u.imag) * u * self.rotation


# ---------------------------------------------------------------------------
# orbit-index switch
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class OrbitState:
    radius: ExactRadius
    k: int          # orbit index of the current argument


class OrbitSwitchF(_Family, Nonlinearity):
    """Unit radial kick outward when ``|z| <= k**2``, inward otherwise; f(0) = 1.

    ``k`` is the orbit index of the current argument: the argument of x(n)
    is ``tau + k(n) phi`` with ``k(n) = k1 + n - 1``.  When an inward kick
    overshoots the origin (radius below 1) the argument flips by a half turn;
    the index keeps counting.
    """

    name = "ce-orbit-switch"
    statefulness = "orbit-index"
    exact_track = True
    requires_zero_forcing = True
    sup = 1.0
    PARAMS = {"k1": (int, 0)}

    def _setup(self, k1):
        self.k1 = k1

    def initial_state(self, x1, **init):
        if init:
            raise PreconditionError(f"{self.name} takes no initial-state options: {sorted(init)}")
        return OrbitState(ExactRadius(abs(x1)), self.k1)

    def __call__(self, z, state, n=1):
        rad = state.radius
        if rad.is_zero():
            return 1 + 0j
        u = z / abs(z)
        if rad.le(state.k * state.k):
            return u * self.rotation
        return -u * self.rotation

    def advance(self, z, x_next, state, n):
        rad, k = state.radius, state.k
        if rad.is_zero() or rad.le(k * k):
            new = rad.shifted(1)
        elif rad.ge(1):
            new = rad.shifted(-1)
        else:
            new = rad.reflected()
        return snap_modulus(x_next, new), OrbitState(new, k + 1)



# ---------------------------------------------------------------------------
# decimal warp with argument tags
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ArgumentTag:
    """Whether an argument is a known rational multiple ``q*phi mod 1``.

    For rational tags the phase ``phi*q mod 1`` is held exactly as
    ``num/den``; advancing by one rotation adds ``inc/den``.
    """

    kind: str                       # "rational-multiple" | "generic"
    arg_value: float
    q_base: Fraction | None = None
    steps: int = 0
    num: int = 0
    den: int = 1
    inc: int = 0

    @property
    def q(self) -> Fraction | None:
        return None if self.q_base is None else self.q_base + self.steps

    @property
    def rational(self) -> bool:
        return self.kind == "rational-multiple"

    @classmethod
    def generic(cls, arg: float) -> "ArgumentTag":
        return cls("generic", float(arg))

    @classmethod
    def rational_multiple(cls, q: Fraction, phi: float) -> "ArgumentTag":
        q = Fraction(q)
        p = Fraction(phi)
        den = p.denominator * q.denominator
        num = (p.numerator * q.numerator) % den
        inc = (p.numerator * q.denominator) % den
        return cls("rational-multiple", num / den, q, 0, num, den, inc)

    def advanced(self, phi: float) -> "ArgumentTag":
        if not self.rational:
            return ArgumentTag.generic(rotate(self.arg_value, phi))
        num = (self.num + self.inc) % self.den
        return ArgumentTag(self.kind, num / self.den, self.q_base, self.steps + 1,
                           num, self.den, self.inc)


def truncate_decimal(u: Fraction, digits: int) -> Fraction:
    """Keep ``digits`` decimal places of the nonnegative rational ``u`` (integer part kept)."""
    scale = 10 ** digits
    return Fraction(math.floor(u * scale), scale)


def warp_multiplier(arg: float, phi: float, digits: int) -> Fraction:
    """``q`` with ``q*phi`` equal to the warped truncation of ``arg`` (exact rational)."""
    return truncate_decimal(Fraction(arg) / Fraction(phi), digits)


# q carries as many decimal digits as the capture radius; beyond this the
# exact big-integer phase updates stop being cheap
MAX_WARP_DIGITS = 5000


@dataclass(frozen=True, slots=True)
class WarpState:
    radius: ExactRadius
    tag: ArgumentTag


class DecimalWarpF(_Family, Nonlinearity):
    """Radius +1 on tagged arguments and in the unit disc; capture into the tagged set otherwise.

    A generic argument at radius in ``(N, N+1]`` is replaced by ``phi`` times
    the ``N``-digit decimal truncation of ``arg/phi``, and the radius drops by
    one.  The truncation treats ``arg/phi`` as a real number (integer part
    kept), so the replaced argument moves by less than ``phi * 10**-N``.
    """

    name = "ce-decimal-warp"
    statefulness = "argument-tag"
    exact_track = True
    requires_zero_forcing = True

    def _setup(self):
        self.phi_v = float(self.phi)
        # |f| <= 1 + (r - 1)|e(F) - u| < 1 + N * 2 pi phi 10**-N, largest at N = 1
        self.sup = 1.0 + TWO_PI * self.phi_v / 10.0

    def initial_state(self, x1, q=None, **init):
        if init:
            raise PreconditionError(f"{self.name}: unknown initial-state options {sorted(init)}")
        x1 = complex(x1)
        rad = ExactRadius(abs(x1))
        if x1 == 0:
            return WarpState(rad, ArgumentTag.rational_multiple(Fraction(0), self.phi_v))
        if q is not None:
            tag = ArgumentTag.rational_multiple(Fraction(q), self.phi_v)
            d = abs(arg_star(x1) - tag.arg_value) % 1.0
            if min(d, 1.0 - d) > 1e-9:
                raise PreconditionError("x1's argument does not match q*phi", "arg x1 = q*phi mod 1")
            return WarpState(rad, tag)
        return WarpState(rad, ArgumentTag.generic(arg_star(x1)))

    def _capture(self, rad: ExactRadius, tag: ArgumentTag) -> ArgumentTag:
        digits = rad.ceil() - 1
        if digits > MAX_WARP_DIGITS:
            raise PreconditionError(
                f"capture at radius {rad.value():g} needs {digits} exact decimal digits",
                f"radius <= {MAX_WARP_DIGITS + 1}")
        q = warp_multiplier(tag.arg_value, self.phi_v, digits) + 1
        return ArgumentTag.rational_multiple(q, self.phi_v)

    def __call__(self, z, state, n=1):
        rad, tag = state.radius, state.tag
        if rad.is_zero():
            return 1 + 0j
        r = abs(z)
        u = z / r
        if tag.rational or rad.le(1):
            return u * self.rotation
        target = self._capture(rad, tag).arg_value
        # the captured tag already includes the +phi of the rotation
        warped = cmath.exp(1j * TWO_PI * (target - self.phi_v))
        return (-u + (r - 1.0) * (warped - u)) * self.rotation

    def evaluate(self, z):
        z = complex(z)
        if z == 0:
            return 1 + 0j
        return self(z, WarpState(ExactRadius(abs(z)), ArgumentTag.generic(arg_star(z))))

    def advance(self, z, x_next, state, n):
        rad, tag = state.radius, state.tag
        if rad.is_zero():
            new = rad.shifted(1)
            tag = ArgumentTag.rational_multiple(Fraction(0), self.phi_v)
        elif tag.rational:
            new = rad.shifted(1)
            tag = tag.advanced(self.phi_v)
        elif rad.le(1):
            new = rad.shifted(1)
            tag = tag.advanced(self.phi_v)
            return snap_modulus(x_next, new), WarpState(new, tag)
        else:
            new = rad.shifted(-1)
            tag = self._capture(rad, tag)
        x_next = new.value() * cmath.exp(1j * TWO_PI * tag.arg_value)
        return x_next, WarpState(new, tag)


# ---------------------------------------------------------------------------
# slow inward drift
# ---------------------------------------------------------------------------

def _h_linear(scale: float) -> Callable[[float], float]:
    return lambda t: 1.0 / (1.0 + scale * t)


def _h_exp(rate: float) -> Callable[[float], float]:
    return lambda t: math.exp(-rate * t)


# name -> builder returning t -> 1/h(t); every entry is strictly increasing with h > 1 on (0, inf)
H_FUNCTIONS = {
    "linear": (_h_linear, "scale"),       # h(t) = 1 + scale*t
    "exp": (_h_exp, "rate"),              # h(t) = exp(rate*t)
}


class SlowDriftF(_Family, Nonlinearity):
    """f(z) = -(z/|z|)(1 - 1/h(|z|)) e(phi), f(0) = 0."""

    name = "ce-slow-drift"
    sup = 1.0
    PARAMS = {"h": (str, "linear"), "scale": (float, 1.0), "rate": (float, 1.0)}

    def _setup(self, h, scale, rate):
        if h not in H_FUNCTIONS:
            raise PreconditionError(f"unknown h {h!r}; choose from {sorted(H_FUNCTIONS)}",
                                    "h registered")
        builder, key = H_FUNCTIONS[h]
        value = {"scale": scale, "rate": rate}[key]
        if not value > 0:
            raise PreconditionError(f"h={h} needs {key} > 0 to be increasing with h > 1",
                                    f"{key} > 0")
        self.inv_h = builder(value)

    def h(self, t: float) -> float:
        return 1.0 / self.inv_h(t)

    def __call__(self, z, state=None, n=1):
        if z == 0:
            return 0j
        r = abs(z)
        return -(z / r) * (1.0 - self.inv_h(r)) * self.rotation


# ---------------------------------------------------------------------------
# forcing families
# ---------------------------------------------------------------------------

class _RotatingForcing(_Family, Forcing):
    """y(n) = a(n) e(n phi) with a real or complex amplitude sequence a."""

    def __init__(self, phi, **params):
        super().__init__(phi, **params)
        self._phi_v = float(self.phi)

    def amplitude(self, n: int) -> complex:
        raise NotImplementedError

    def amplitude_array(self, n: np.ndarray) -> np.ndarray:
        return np.array([self.amplitude(int(k)) for k in n], dtype=complex)

    def __call__(self, n):
        return self.amplitude(n) * cmath.exp(1j * TWO_PI * (n * self._phi_v % 1.0))

    def derotated(self, n):
        return complex(self.amplitude(n))

    def derotated_array(self, n1, n2):
        return self.amplitude_array(np.arange(n1, n2))


class ZeroY(_Family, Forcing):
    name = "zero"
    sup = 0.0

    def __call__(self, n):
        return 0j

    def derotated(self, n):
        return 0j

    def derotated_array(self, n1, n2):
        return np.zeros(n2 - n1, dtype=complex)


class ResonantY(_RotatingForcing):
    """y(n) = c e(n phi)."""

    name = "resonant"
    PARAMS = {"c": (complex, 1 + 0j)}

    def _setup(self, c):
        if c == 0:
            raise PreconditionError("resonant forcing needs c != 0", "c != 0")
        self.c = c
        self.sup = abs(c)

    def amplitude(self, n):
        return self.c

    def amplitude_array(self, n):
        return np.full(len(n), self.c, dtype=complex)


class DecayY(_RotatingForcing):
    """y(n) = c n**-p e(n phi)."""

    name = "decay"
    PARAMS = {"c": (complex, 1 + 0j), "p": (float, 0.5)}

    def _setup(self, c, p):
        if not p >= 0:
            raise PreconditionError("decay exponent must be >= 0", "p >= 0")
        self.c, self.p = c, p
        self.sup = abs(c)

    def amplitude(self, n):
        return self.c * n ** -self.p

    def amplitude_array(self, n):
        return self.c * np.asarray(n, dtype=float) ** -self.p


class SlowDriftY(_RotatingForcing):
    """y(n) = (1 - 1/n**2) e(n phi)."""

    name = "slow-drift"
    sup = 1.0

    def amplitude(self, n):
        return 1.0 - 1.0 / (n * n)

    def amplitude_array(self, n):
        n = np.asarray(n, dtype=float)
        return (1.0 - 1.0 / (n * n)).astype(complex)


_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class RandomPhaseY(_RotatingForcing):
    """y(n) = amp e(n phi + u_n) with u_n a seeded uniform phase (counter-based, so random access)."""

    name = "random-phase"
    PARAMS = {"amp": (float, 1.0), "seed": (int, 0)}

    def _setup(self, amp, seed):
        if not amp > 0:
            raise PreconditionError("random-phase forcing needs amp > 0", "amp > 0")
        self.amp, self.seed = amp, seed
        self.sup = amp

    def phase(self, n: int) -> float:
        return _splitmix64(((self.seed & 0xFFFFFFFF) << 32) | (n & 0xFFFFFFFF)) / 2.0 ** 64

    def amplitude(self, n):
        return self.amp * e(self.phase(n))


# ---------------------------------------------------------------------------
# registry and constructors
# ---------------------------------------------------------------------------

F_FAMILIES = {cls.name: cls for cls in
              (ZeroF, ConstantF, RadialF, TinyArcF, PowerLawF, OrbitSwitchF, DecimalWarpF,
               SlowDriftF)}
Y_FAMILIES = {cls.name: cls for cls in (ZeroY, ResonantY, DecayY, SlowDriftY, RandomPhaseY)}


def build_f(phi, name: str, params: dict | None = None) -> Nonlinearity:
    if name not in F_FAMILIES:
        raise ConfigError(f"unknown f family {name!r}; choose from {sorted(F_FAMILIES)}")
    return F_FAMILIES[name](RotationNumber.parse(phi), **(params or {}))


def build_y(phi, name: str, params: dict | None = None) -> Forcing:
    if name not in Y_FAMILIES:
        raise ConfigError(f"unknown y family {name!r}; choose from {sorted(Y_FAMILIES)}")
    return Y_FAMILIES[name](RotationNumber.parse(phi), **(params or {}))


def make_system(phi, f_name: str = "zero", f_params: dict | None = None,
                y_name: str = "zero", y_params: dict | None = None) -> SystemSpec:
    phi = RotationNumber.parse(phi)
    return SystemSpec(phi, build_f(phi, f_name, f_params), build_y(phi, y_name, y_params))


def make_rotation(phi) -> SystemSpec:
    return make_system(phi)


def make_contraction(phi) -> SystemSpec:
    """f(z) = -(z/|z|) e(phi), y = 0: radius map r -> |r - 1|."""
    return make_system(phi, "radial", {"c": -1.0})


def make_example_1_2(phi) -> SystemSpec:
    return make_system(phi, "example-1-2", None, "decay", {"p": 0.5})


def make_powerlaw(phi, alpha: float, M: float, tangential: bool = True,
                  amplitude: float = 0.5) -> SystemSpec:
    return make_system(phi, "powerlaw",
                       {"alpha": alpha, "M": M, "tangential": tangential, "amplitude": amplitude})


def make_ce_orbit_switch(phi, k1: int = 0) -> SystemSpec:
    return make_system(phi, "ce-orbit-switch", {"k1": k1})


def make_ce_decimal_warp(phi) -> SystemSpec:
    return make_system(phi, "ce-decimal-warp")


def make_ce_slow_drift(phi, h_name: str = "linear", h_params: dict | None = None) -> SystemSpec:
    return make_system(phi, "ce-slow-drift", {"h": h_name, **(h_params or {})}, "slow-drift")


def make_resonant(phi, c: complex = 1 + 0j) -> SystemSpec:
    return make_system(phi, "zero", None, "resonant", {"c": c})


# ---------------------------------------------------------------------------
# lower-bound checks on recorded trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    checked: int
    first_failure: int | None
    worst_margin: float

    def to_json(self) -> dict:
        return {"holds": self.holds, "checked": self.checked,
                "first_failure": self.first_failure, "worst_margin": self.worst_margin}


def _require_exact(traj):
    if not traj.has_exact_track:
        raise PreconditionError("trajectory carries no exact radius track", "exact radius track")


def exact_bound_check(traj, shift: int = -2, include_base: bool = False) -> BoundCheck:
    """Check ``|x(n)| >= n + shift`` (plus ``|x(1)|`` when ``include_base``) with no tolerance.

    The radius is ``sign*base + offset``; the comparison is done as
    ``sign*base (- base) >= n + shift - offset``, all integers below 2**53 so
    the float comparison is exact.
    """
    _require_exact(traj)
    n = traj.indices.astype(np.int64)
    lhs = traj.exact_heads() - (traj.exact_base if include_base else 0.0)
    rhs = n + shift - traj.exact_offset
    ok = lhs >= rhs
    margin = lhs - rhs
    bad = np.flatnonzero(~ok)
    return BoundCheck(bool(ok.all()), len(n), int(n[bad[0]]) if len(bad) else None,
                      float(margin.min()))


def radius_increments(traj) -> np.ndarray:
    """Exact per-step radius changes ``|x(n)| - |x(n-1)|`` for ``n = 2..length``.

    Entries where a reflection changed the sign of the base part are NaN
    (the change is then not an integer).
    """
    _require_exact(traj)
    traj.require_full("radius_increments")
    same = traj.exact_sign[1:] == traj.exact_sign[:-1]
    inc = np.diff(traj.exact_offset).astype(float)
    return np.where(same, inc, np.nan)


def orbit_switch_report(traj) -> dict:
    """Where unit growth sets in, and the linear lower bound it implies.

    ``k0`` is the first index from which every step adds exactly 1; the bound
    ``|x(n)| >= |x(1)| + n - 2 k0`` is then checked exactly.
    """
    inc = radius_increments(traj)
    not_up = np.flatnonzero(~(inc == 1.0))
    k0 = int(not_up[-1]) + 2 if len(not_up) else 1        # inc[i] is the step from x(i+1) to x(i+2)
    check = exact_bound_check(traj, shift=-2 * k0, include_base=True)
    return {"k0": k0, "growth_from": k0 + 1, "bound": check.to_json(),
            "steps_checked": len(inc)}


def slow_drift_lower_bound(n, L: float, h_of_L: float, x1_abs: float):
    """``(n-1)/h(L) - |x(1)| - pi**2/6``: the radius any run confined to ``|x| <= L`` must exceed."""
    return (np.asarray(n, dtype=float) - 1.0) / h_of_L - x1_abs - math.pi ** 2 / 6


def slow_drift_crossing(traj, spec: SystemSpec, L: float) -> dict:
    """First n where the confined-run lower bound exceeds L, and whether the run left the disc by then."""
    h_of_L = spec.f.h(L)
    x1_abs = abs(traj.start)
    n_star = int(math.floor((L + x1_abs + math.pi ** 2 / 6) * h_of_L)) + 1
    while slow_drift_lower_bound(n_star, L, h_of_L, x1_abs) <= L:
        n_star += 1
    while n_star > 1 and slow_drift_lower_bound(n_star - 1, L, h_of_L, x1_abs) > L:
        n_star -= 1
    out = {"L": L, "h_L": h_of_L, "n_star": n_star, "reached": n_star <= traj.length}
    if not out["reached"]:
        return out
    upto = traj.indices <= n_star
    r = traj.radius_track[upto]
    out["max_radius_to_n_star"] = float(r.max())
    out["exceeds_L"] = bool(r.max() > L)
    out["first_exit"] = int(traj.indices[upto][np.argmax(r > L)]) if r.max() > L else None
    if traj.fully_sampled:
        # while the run has stayed inside the disc the lower bound must hold
        n = traj.indices[upto]
        prev_max = np.maximum.accumulate(np.concatenate(([0.0], r[:-1])))
        confined = prev_max <= L
        lb = slow_drift_lower_bound(n, L, h_of_L, x1_abs)
        out["implication_holds"] = bool(np.all(r[confined] >= lb[confined] - 1e-9 * (1 + lb[confined].clip(0))))
    return out
