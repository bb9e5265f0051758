"""Conventions for the circle T = R/Z.

Angles are measured in turns (fractions of a full revolution) everywhere, so
``e(t) = exp(2*pi*i*t)`` and reduction is plain ``mod 1``.  All functions
accept Python scalars or numpy arrays; scalars come back as floats.

Machine reals are rational, so a :class:`RotationNumber` only behaves like an
irrational rotation for horizons far below ``1/ulp``.  That is plenty for the
10^6-step runs this package performs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, UndefinedArgumentError

TWO_PI = 2.0 * math.pi

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SQRT2_FRAC = math.sqrt(2.0) - 1.0

_NAMED = {
    "golden": (GOLDEN, 1),
    "sqrt2-frac": (SQRT2_FRAC, 2),
}


def continued_fraction(x: float, max_terms: int = 20) -> list[int]:
    """Partial quotients of the (rational) machine value ``x``."""
    q = Fraction(x)
    terms: list[int] = []
    while len(terms) < max_terms:
        a = math.floor(q)
        terms.append(int(a))
        q -= a
        if q == 0:
            break
        q = 1 / q
    return terms


@dataclass(frozen=True)
class RotationNumber:
    """Rotation angle in turns, strictly inside (0, 1)."""

    value: float
    tag: str = "user-real"
    cf_terms: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        v = self.value
        if not math.isfinite(v) or not 0.0 < v < 1.0:
            raise PreconditionError(f"rotation number must lie in (0,1), got {v!r}",
                                    "0 < phi < 1")
        if self.tag in _NAMED and v != _NAMED[self.tag][0]:
            raise PreconditionError(f"{self.tag} rotation must equal its reference constant")

    @classmethod
    def golden(cls) -> "RotationNumber":
        return cls(GOLDEN, "golden", (0,) + (1,) * 20)

    @classmethod
    def sqrt2_frac(cls) -> "RotationNumber":
        return cls(SQRT2_FRAC, "sqrt2-frac", (0,) + (2,) * 20)

    @classmethod
    def from_value(cls, value: float) -> "RotationNumber":
        value = float(value)
        cls(value)          # validate before expanding
        return cls(value, "user-real", tuple(continued_fraction(value)))

    @classmethod
    def parse(cls, text: "str | float | RotationNumber") -> "RotationNumber":
        """Accept ``golden``, ``sqrt2-frac`` or a decimal literal."""
        if isinstance(text, RotationNumber):
            return text
        if isinstance(text, (int, float)):
            return cls.from_value(float(text))
        key = text.strip().lower()
        if key == "golden":
            return cls.golden()
        if key in ("sqrt2-frac", "sqrt2"):
            return cls.sqrt2_frac()
        try:
            return cls.from_value(float(key))
        except ValueError:
            raise PreconditionError(f"unrecognised rotation number {text!r}") from None

    def __float__(self) -> float:
        return self.value

    def to_json(self) -> dict:
        return {"value": self.value, "tag": self.tag}


def as_phi(phi: "float | RotationNumber") -> float:
    return float(phi)


def reduce(t):
    """Fractional part in [0, 1); exact 1.0 after rounding maps to 0.0."""
    if np.ndim(t) == 0:
        t = float(t)
        if not math.isfinite(t):
            raise PreconditionError(f"cannot reduce non-finite value {t!r}", "t finite")
        r = t - math.floor(t)
        return 0.0 if r >= 1.0 else r
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise PreconditionError("cannot reduce non-finite values", "t finite")
    r = t - np.floor(t)
    return np.where(r >= 1.0, 0.0, r)


def circle_distance(a, b):
    """Length of the shorter arc between ``a`` and ``b`` (result in [0, 1/2])."""
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        d = abs(float(a) - float(b)) % 1.0
        return min(d, 1.0 - d)
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


def arg_star(z):
    """Argument of ``z`` in turns, range [0, 1)."""
    if np.ndim(z) == 0:
        z = complex(z)
        if z == 0:
            raise UndefinedArgumentError("argument of 0 is undefined", "z != 0")
        return reduce(math.atan2(z.imag, z.real) / TWO_PI)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise UndefinedArgumentError("argument of 0 is undefined", "z != 0")
    return reduce(np.angle(z) / TWO_PI)


def rotate(theta, phi: "float | RotationNumber"):
    return reduce(theta + float(phi))


def e(t):
    """exp(2*pi*i*t), with ``t`` reduced mod 1 first to keep the phase accurate."""
    if np.ndim(t) == 0:
        return cmath.exp(1j * TWO_PI * reduce(t))
    return np.exp(1j * TWO_PI * reduce(t))


def orbit_phase(n, phi: "float | RotationNumber"):
    """``n*phi mod 1`` for integer ``n`` (scalar or array)."""
    return reduce(np.multiply(n, float(phi)) if np.ndim(n) else int(n) * float(phi))
