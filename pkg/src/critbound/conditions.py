"""Finite-horizon evidence for the three boundedness conditions.

1. the radial drift profile ``Phi_rho(theta) = Re(conj(f(rho e(theta))) e(phi + theta))``
   converges uniformly as rho grows;
2. its limit is Riemann integrable, with integral ``upsilon``;
3. every long enough window of de-rotated forcing has average modulus
   below ``-upsilon`` by a fixed margin ``|beta|``.

None of these can be decided by sampling.  The certificate records what a
grid and a finite horizon show, and its verdict (pass / fail / inconclusive)
is evidence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circle import TWO_PI
from .dynamics import SystemSpec
from .errors import PreconditionError

DEFAULT_GRID = 4096
DEFAULT_RHO = (1e2, 1e3, 1e4, 1e5, 1e6)
EXACT_WINDOW_HORIZON = 10_000
SUBSAMPLED_STARTS = 2_000
PASS_MARGIN = 1e-6
GAP_SLACK = 1e-12


def midpoint_grid(grid_size: int) -> np.ndarray:
    if grid_size < 16:
        raise PreconditionError(f"grid_size must be >= 16, got {grid_size}", "grid_size >= 16")
    return (np.arange(grid_size) + 0.5) / grid_size


@dataclass
class PhiProfile:
    grid: np.ndarray
    rho_list: np.ndarray
    values: np.ndarray                       # shape (len(rho_list), len(grid))
    omega: float
    upsilon: float
    refinement_error: float
    closed_form: Callable | None = field(default=None, repr=False)

    def row_integrals(self) -> np.ndarray:
        return self.values.mean(axis=1)

    def to_json(self) -> dict:
        return {"grid_size": len(self.grid), "rho_list": self.rho_list.tolist(),
                "omega": self.omega, "upsilon": self.upsilon,
                "refinement_error": self.refinement_error,
                "row_integrals": self.row_integrals().tolist()}


def profile_row(spec: SystemSpec, rho: float, grid: np.ndarray) -> np.ndarray:
    rot = np.exp(1j * TWO_PI * grid)
    fz = np.array([spec.f.evaluate(complex(w)) for w in rho * rot], dtype=complex)
    return np.real(np.conj(fz) * rot * spec.rotation)


def phi_profile(spec: SystemSpec, rho_list: Sequence[float] = DEFAULT_RHO,
                grid_size: int = DEFAULT_GRID) -> PhiProfile:
    rho = np.asarray(rho_list, dtype=float)
    if rho.ndim != 1 or len(rho) == 0 or np.any(rho <= 0) or np.any(np.diff(rho) <= 0):
        raise PreconditionError("rho_list must be positive and strictly increasing",
                                "0 < rho_1 < rho_2 < ...")
    grid = midpoint_grid(grid_size)
    values = np.vstack([profile_row(spec, r, grid) for r in rho])
    finest = values[-1]
    upsilon, refinement = _riemann(finest)
    return PhiProfile(grid, rho, values, float(np.max(np.abs(finest))), upsilon, refinement,
                      spec.f.phi_closed_form)


def _riemann(values: np.ndarray) -> tuple[float, float]:
    full = math.fsum(values) / len(values)
    half = math.fsum(values[::2]) / len(values[::2])
    return full, abs(full - half)


def riemann_integral(profile: PhiProfile) -> float:
    """Midpoint estimate of the integral of the finest profile row.

    ``profile.refinement_error`` compares it with the sum over every second node.
    """
    return profile.upsilon


def midpoint_rule(func: Callable, grid_size: int) -> float:
    """Midpoint rule for a vectorised function on [0, 1)."""
    return math.fsum(np.asarray(func(midpoint_grid(grid_size)), dtype=float)) / grid_size


def uniform_gap(profile: PhiProfile, reference: str = "auto") -> list[float]:
    """Grid sup of ``|Phi_rho - Phi_ref|`` per probe radius (a lower bound of the true sup).

    ``reference`` is ``"closed"`` (the family's closed-form limit), ``"largest"``
    (the row at the largest radius) or ``"auto"`` (closed form when declared).
    """
    if reference == "auto":
        reference = "closed" if profile.closed_form is not None else "largest"
    if reference == "closed":
        if profile.closed_form is None:
            raise PreconditionError("family declares no closed-form profile")
        ref = np.asarray(profile.closed_form(profile.grid), dtype=float)
    elif reference == "largest":
        if len(profile.rho_list) < 2:
            raise PreconditionError("need at least two probe radii", "len(rho_list) >= 2")
        ref = profile.values[-1]
    else:
        raise PreconditionError(f"unknown reference {reference!r}")
    return [float(v) for v in np.max(np.abs(profile.values - ref), axis=1)]


def forcing_window_norm(spec: SystemSpec, n1: int, n2: int) -> float:
    """``|sum_{n1 <= n < n2} y(n) e(-n phi)| / (n2 - n1)``."""
    if not 1 <= n1 < n2:
        raise PreconditionError(f"window needs 1 <= n1 < n2, got ({n1}, {n2})", "1 <= n1 < n2")
    d = spec.y.derotated_array(n1, n2)
    s = complex(math.fsum(d.real), math.fsum(d.imag))
    return abs(s) / (n2 - n1)


def max_window_norm(spec: SystemSpec, d0: int, horizon: int) -> tuple[float, bool]:
    """Largest window norm over ``1 <= n1 < n2 <= horizon`` with ``n2 - n1 >= d0``.

    Exhaustive for ``horizon <= 10**4``; above that only a regular subsample of
    window starts is scanned (every end point is still tried).  Returns
    ``(value, exact)``.
    """
    # prefix[k] = sum of d(n) over 1 <= n <= k, so window [n1, n2) is prefix[n2-1] - prefix[n1-1]
    d = spec.y.derotated_array(1, horizon)
    prefix = np.concatenate(([0j], np.cumsum(d)))
    exact = horizon <= EXACT_WINDOW_HORIZON
    if exact:
        starts = np.arange(1, horizon - d0 + 1)
    else:
        starts = np.unique(np.linspace(1, horizon - d0, SUBSAMPLED_STARTS).astype(np.int64))
    best = 0.0
    for n1 in starts:
        n2 = np.arange(n1 + d0, horizon + 1)
        vals = np.abs(prefix[n2 - 1] - prefix[n1 - 1]) / (n2 - n1)
        best = max(best, float(vals.max()))
    return best, exact


def aitken_limit(seq: Sequence[float]) -> float:
    """Aitken delta-squared extrapolation from the last three terms."""
    if len(seq) < 3:
        return float(seq[-1])
    a, b, c = seq[-3:]
    den = (c - b) - (b - a)
    if abs(den) <= 1e-15 * max(1.0, abs(a), abs(b), abs(c)):
        return float(c)
    return float(c - (c - b) ** 2 / den)


@dataclass
class ConditionCertificate:
    profile: PhiProfile
    uniform_gaps: list[float]
    upsilon: float
    beta_estimate: float
    d0: int
    horizon: int
    verdict: str                 # pass | fail | inconclusive
    window_max: float
    windows_exact: bool
    upsilon_limit: float
    reasons: list[str]

    def to_json(self) -> dict:
        return {
            "profile": self.profile.to_json(),
            "uniform_gaps": self.uniform_gaps,
            "upsilon": self.upsilon,
            "upsilon_limit": self.upsilon_limit,
            "beta_estimate": self.beta_estimate,
            "window_max": self.window_max,
            "windows_exact": self.windows_exact,
            "d0": self.d0,
            "horizon": self.horizon,
            "verdict": self.verdict,
            "reasons": self.reasons,
            "evidence": "finite horizon and finite grid; not a proof",
        }


def certify_conditions(spec: SystemSpec, d0: int, horizon: int,
                       rho_list: Sequence[float] = DEFAULT_RHO,
                       grid_size: int = DEFAULT_GRID) -> ConditionCertificate:
    """Collect the evidence and grade it.

    * ``fail`` when ``beta_estimate >= 0``;
    * ``pass`` when the gaps shrink, ``beta_estimate < 0`` and the estimate
      stays below ``-1e-6`` even with ``upsilon`` replaced by its
      extrapolated large-radius limit;
    * ``inconclusive`` otherwise (typically a profile drifting to 0).
    """
    if d0 < 1:
        raise PreconditionError("d0 must be >= 1", "d0 >= 1")
    if horizon < d0 + 1:
        raise PreconditionError("horizon must be >= d0 + 1", "horizon >= d0 + 1")
    profile = phi_profile(spec, rho_list, grid_size)
    gaps = uniform_gap(profile) if len(profile.rho_list) >= 2 or profile.closed_form else []
    f = spec.f
    if f.upsilon_exact is not None:
        upsilon = float(f.upsilon_exact)
        upsilon_limit = upsilon
    else:
        upsilon = profile.upsilon
        upsilon_limit = aitken_limit(list(profile.row_integrals()))
    window_max, exact = max_window_norm(spec, d0, horizon)
    beta = window_max + upsilon

    reasons = []
    shrinking = all(b <= a + GAP_SLACK for a, b in zip(gaps, gaps[1:]))
    if not shrinking:
        reasons.append("uniform gaps do not shrink over the probe radii")
    if beta >= 0:
        verdict = "fail"
        reasons.append("beta_estimate >= 0")
    elif shrinking and window_max + upsilon_limit < -PASS_MARGIN:
        verdict = "pass"
    else:
        verdict = "inconclusive"
        if window_max + upsilon_limit >= -PASS_MARGIN:
            reasons.append("extrapolated upsilon leaves no negative margin")
    return ConditionCertificate(profile, gaps, upsilon, beta, d0, horizon, verdict,
                                window_max, exact, upsilon_limit, reasons)


def write_profile_csv(profile: PhiProfile, path) -> None:
    header = "theta," + ",".join(f"rho={float(r)!r}" for r in profile.rho_list)
    rows = np.column_stack([profile.grid, profile.values.T])
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g")
