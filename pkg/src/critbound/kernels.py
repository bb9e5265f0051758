"""Perturbation kernels on the complex plane.

Three estimates govern how a bounded translation moves a point that sits far
from the origin:

* the angle between two nonzero numbers, written through the principal
  logarithm (:func:`arg_distance_via_log`);
* the rotation a translation of size at most ``C`` can cause at radius
  ``|w1| >= 2C`` (:func:`rotation_error_bound`, bound ``C/|w1|``);
* the first-order change of modulus with remainder at most ``2C^2/|w1|``
  (:func:`radial_increment`).

Every kernel accepts scalars or equally shaped numpy arrays.  Preconditions
are checked eagerly; a violation raises :class:`PreconditionError` naming the
inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import TWO_PI, arg_star, circle_distance, e
from .errors import PreconditionError

__all__ = [
    "RadialDecomposition",
    "RotationBound",
    "arg_distance_via_log",
    "rotation_error_bound",
    "radial_increment",
    "property_suite",
]


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def _require_nonzero(**values):
    for name, w in values.items():
        if np.any(np.asarray(w) == 0):
            raise PreconditionError(f"{name} must be nonzero", f"{name} != 0")


def arg_distance_via_log(w1, w2):
    """(1/2pi) |Ln(w1/w2) - ln(|w1|/|w2|)| with Im Ln in (-pi, pi]."""
    _require_nonzero(w1=w1, w2=w2)
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    ratio = w1 / w2
    # numpy's principal log puts -1+0j at +i*pi, the closed side of the cut.
    val = np.abs(np.log(ratio) - np.log(np.abs(w1) / np.abs(w2))) / TWO_PI
    return _scalar_or_array(val)


@dataclass(frozen=True)
class RotationBound:
    distance: float
    bound: float
    holds: bool


def rotation_error_bound(w1, w2, C: float) -> RotationBound:
    """Angular displacement of ``w2`` relative to ``w1`` against ``C/|w1|``.

    Requires ``C > 0``, ``|w1| >= 2C`` and ``|w1 - w2| <= C``.
    """
    if not np.all(np.asarray(C) > 0):
        raise PreconditionError(f"C must be positive, got {C!r}", "C > 0")
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    r1 = np.abs(w1)
    if np.any(r1 < 2 * C):
        raise PreconditionError("translation bound needs |w1| >= 2C", "|w1| >= 2C")
    if np.any(np.abs(w1 - w2) > C):
        raise PreconditionError("translation bound needs |w1 - w2| <= C", "|w1 - w2| <= C")
    distance = circle_distance(arg_star(w2), arg_star(w1))
    bound = C / r1
    holds = distance <= bound
    if np.ndim(holds) == 0:
        return RotationBound(float(distance), float(bound), bool(holds))
    return RotationBound(distance, bound, holds)


@dataclass(frozen=True)
class RadialDecomposition:
    """``|w2| - |w1| = linear_part + remainder`` with ``|remainder| <= remainder_bound``."""

    linear_part: float
    remainder: float
    remainder_bound: float

    @property
    def within_bound(self):
        return np.abs(self.remainder) <= self.remainder_bound


def radial_increment(w1, w2, C: float) -> RadialDecomposition:
    _require_nonzero(w1=w1, w2=w2)
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    if np.any(np.abs(w1 - w2) > C):
        raise PreconditionError("radial bound needs |w1 - w2| <= C", "|w1 - w2| <= C")
    r1 = np.abs(w1)
    linear = np.real(np.conj(w2 - w1) * e(arg_star(w1)))
    remainder = (np.abs(w2) - r1) - linear
    bound = 2.0 * C * C / r1
    return RadialDecomposition(_scalar_or_array(linear), _scalar_or_array(remainder),
                               _scalar_or_array(bound))


# ---------------------------------------------------------------------------
# Seeded property suite (used by tests and the ``verify-lemmas`` subcommand)
# ---------------------------------------------------------------------------

def _translate_within(w1, step, C, rng):
    """w1 + step*e(random) with |w2 - w1| <= C enforced after rounding."""
    w2 = w1 + step * np.exp(1j * TWO_PI * rng.random(np.shape(w1)))
    over = np.abs(w2 - w1) > C
    while np.any(over):
        w2 = np.where(over, w1 + (w2 - w1) * (1 - 1e-12), w2)
        over = np.abs(w2 - w1) > C
    return w2


def _random_complex(rng, size, log_lo=-3.0, log_hi=3.0):
    mod = 10.0 ** rng.uniform(log_lo, log_hi, size)
    return mod * np.exp(1j * TWO_PI * rng.random(size))


def property_suite(seed: int = 42, cases: int = 100_000, tol: float = 1e-10) -> dict:
    """Run the three kernel properties on ``cases`` seeded samples each.

    Returns a mapping ``name -> {"cases": n, "failures": k, "worst": x}``.
    """
    rng = np.random.default_rng(seed)
    out = {}

    # identity: log form agrees with the circle metric on arguments
    w1 = _random_complex(rng, cases)
    w2 = _random_complex(rng, cases)
    # a slice of exact opposite rays exercises the branch cut
    k = cases // 50
    w2[:k] = -w1[:k] * rng.uniform(0.1, 10.0, k)
    via_log = arg_distance_via_log(w1, w2)
    direct = circle_distance(arg_star(w1), arg_star(w2))
    err = np.abs(via_log - direct)
    out["argument_identity"] = {"cases": cases, "failures": int(np.sum(err > tol)),
                                "worst": float(err.max())}

    # translation bound: |w1| >= 2C, |w1 - w2| <= C
    C = 10.0 ** rng.uniform(-3, 3, cases)
    r1 = 2.0 * C * (1.0 + rng.exponential(2.0, cases))
    r1[: cases // 20] = 2.0 * C[: cases // 20]           # boundary radius
    w1 = r1 * np.exp(1j * TWO_PI * rng.random(cases))
    short = np.abs(w1) < 2.0 * C
    while np.any(short):
        w1 = np.where(short, w1 * (1 + 1e-15), w1)
        short = np.abs(w1) < 2.0 * C
    step = C * np.sqrt(rng.random(cases))
    step[: cases // 10] = C[: cases // 10]               # boundary translation
    w2 = _translate_within(w1, step, C, rng)
    res = rotation_error_bound(w1, w2, C)
    out["rotation_bound"] = {"cases": cases, "failures": int(np.sum(~res.holds)),
                             "worst": float(np.max(res.distance - res.bound))}

    # radial remainder: |w1 - w2| <= C, both nonzero
    C = 10.0 ** rng.uniform(-3, 3, cases)
    w1 = _random_complex(rng, cases, -3, 4)
    step = C * np.sqrt(rng.random(cases))
    w2 = _translate_within(w1, step, C, rng)
    w2 = np.where(w2 == 0, w1 + 1e-3 * C, w2)
    dec = radial_increment(w1, w2, C)
    slack = np.abs(dec.remainder) - dec.remainder_bound
    out["radial_remainder"] = {"cases": cases, "failures": int(np.sum(slack > 0)),
                               "worst": float(slack.max())}
    return out
