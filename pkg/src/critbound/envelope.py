"""Explicit radius envelopes.

Given sup bounds F and Y, a drift margin beta < 0, a tolerance eps with a
matching arc radius delta*, a window length D0 and a radius rho(eps) past
which the drift profile is eps-close to its limit, every solution stays in

    |x(n)| <= L = H + (3 N_d + 2)(F + Y) / 2

where

    N_d = max(D0 + 1, covering number at (delta*/2, 1 - 2 eps))
    H   = max(16 (F+Y)^2 / |beta|,  2 (F+Y) N_d / delta*,  |x(1)|,  rho(eps)).

The bound is only as good as the inputs: delta* and rho(eps) must be valid
for the true profile, which no finite computation can confirm.  Reports
carry that caveat in their audit.

:func:`powerlaw_envelope` handles profiles decaying like ``t**-alpha``
whose integral is 0: it scans ``beta = -2**-j`` until the envelope built for
that beta lives where the decay already exceeds ``2|beta|``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

from .circle import RotationNumber
from .ergodic import covering_number
from .errors import PreconditionError

CONDITIONAL_NOTE = "valid only if delta_star and rho_eps are valid for the true profile"


@dataclass(frozen=True)
class EnvelopeInput:
    f_sup: float
    y_sup: float
    beta: float
    eps: float
    delta_star: float
    d0: int
    rho_eps: float = 0.0
    x1_abs: float = 0.0

    def validate(self) -> dict:
        """Check every precondition; return audit notes. Raises on the first violation."""
        F, Y, b = self.f_sup, self.y_sup, self.beta
        checks = [
            (F >= 0 and Y >= 0, "F >= 0 and Y >= 0"),
            (F + Y > 0, "F + Y > 0"),
            (b < 0, "beta < 0"),
            (self.eps > 0, "eps > 0"),
            (self.eps < abs(b) / 16, "eps < |beta|/16"),
            (self.eps < 1, "eps < 1"),
            (0 < self.delta_star <= 1, "0 < delta_star <= 1"),
            (int(self.d0) == self.d0 and self.d0 >= 1, "d0 >= 1 integer"),
            (self.rho_eps >= 0, "rho_eps >= 0"),
            (self.x1_abs >= 0, "x1_abs >= 0"),
        ]
        for ok, name in checks:
            if not ok:
                raise PreconditionError(f"envelope input violates {name}: {self}", name)
        notes = {}
        if Y == 0:
            notes["delta_star"] = "vacuous: Y = 0 places no upper limit on delta_star"
        elif not self.delta_star < abs(b) / (8 * Y):
            raise PreconditionError(f"envelope input violates delta_star < |beta|/(8Y): {self}",
                                    "delta_star < |beta|/(8Y)")
        else:
            notes["delta_star"] = "delta_star < |beta|/(8Y)"
        return notes


@dataclass(frozen=True)
class EnvelopeReport:
    n_d: int
    h: float
    l: float
    audit: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def delta_star_lipschitz(eps: float, lipschitz: float) -> float:
    """Arc radius keeping a profile with Lipschitz constant ``lipschitz`` within eps."""
    if not (eps > 0 and lipschitz > 0):
        raise PreconditionError("need eps > 0 and a positive Lipschitz constant",
                                "eps > 0, lipschitz > 0")
    return eps / lipschitz


def delta_star_constant(beta: float, y_sup: float) -> float:
    """Default arc radius for a constant profile, where any radius works: ``|beta|/(16(Y+1))``."""
    if not beta < 0:
        raise PreconditionError("beta must be negative", "beta < 0")
    return abs(beta) / (16 * (y_sup + 1))


def _default_cover(phi, delta, m) -> int:
    return covering_number(phi, delta, m).result_n


def quantitative_envelope(inp: EnvelopeInput, phi: RotationNumber | float,
                          cover: Callable[[float, float, float], int] | None = None
                          ) -> EnvelopeReport:
    """``(N_d, H, L)`` for the given inputs; ``cover(phi, delta, m)`` defaults to the exact covering number."""
    audit = inp.validate()
    cover = cover or _default_cover
    FY = inp.f_sup + inp.y_sup
    n_cover = int(cover(float(phi), inp.delta_star / 2, 1 - 2 * inp.eps))
    n_d = max(inp.d0 + 1, n_cover)
    audit["n_d"] = "d0 + 1" if inp.d0 + 1 >= n_cover else "covering number"
    audit["covering_number"] = n_cover
    candidates = {
        "16(F+Y)^2/|beta|": 16 * FY * FY / abs(inp.beta),
        "2(F+Y)N_d/delta_star": 2 * FY * n_d / inp.delta_star,
        "|x1|": float(inp.x1_abs),
        "rho_eps": float(inp.rho_eps),
    }
    binding = max(candidates, key=candidates.get)
    h = candidates[binding]
    audit["h"] = binding
    audit["h_candidates"] = candidates
    audit["conditional"] = CONDITIONAL_NOTE
    l = h + (3 * n_d + 2) * FY / 2
    return EnvelopeReport(n_d, h, l, audit)


# ---------------------------------------------------------------------------
# power-law profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawParams:
    alpha: float
    gamma: float
    k: float
    m: float
    f_sup: float
    y_sup: float = 0.0
    x1_abs: float = 0.0

    def validate(self):
        for name in ("alpha", "gamma", "k", "m"):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"{name} must be positive", f"{name} > 0")
        if not (self.f_sup >= 0 and self.y_sup >= 0 and self.f_sup + self.y_sup > 0):
            raise PreconditionError("need F, Y >= 0 and F + Y > 0", "F + Y > 0")
        if self.x1_abs < 0:
            raise PreconditionError("x1_abs must be >= 0", "x1_abs >= 0")
        hyp = self.alpha * (1 + 1 / self.gamma)
        if not hyp < 1:
            raise PreconditionError(
                f"hypothesis alpha*(1+1/gamma) < 1 fails: alpha*(1+1/gamma) = {hyp:g}",
                "alpha*(1+1/gamma) < 1")

    def g(self, t: float) -> float:
        return t ** -self.alpha


class ScanExhausted(PreconditionError):
    """No beta on the scanned grid satisfied the acceptance inequalities."""

    def __init__(self, j_max: int, scan_log: list):
        super().__init__(f"no beta = -2**-j accepted for j <= {j_max}", f"accepted j <= {j_max}")
        self.scan_log = scan_log


@dataclass(frozen=True)
class PowerLawEnvelope:
    beta0: float
    l_beta0: float
    j: int
    entry: dict
    scan_log: list

    def to_json(self) -> dict:
        return {"beta0": self.beta0, "l_beta0": self.l_beta0, "j": self.j,
                "accepted": self.entry, "scan_log": self.scan_log}


def powerlaw_scan_entry(p: PowerLawParams, phi: RotationNumber | float, j: int) -> dict:
    beta = -(2.0 ** -j)
    b = abs(beta)
    FY = p.f_sup + p.y_sup
    delta_star = b / (16 * (p.y_sup + 1))
    eps = min(b / 32, delta_star / 4)
    try:
        d = math.floor((p.k / b) ** (1 / p.gamma)) + 1
    except OverflowError:
        return {"j": j, "beta": beta, "accepted": False, "reason": "D(beta) overflows"}
    n_cover = covering_number(phi, delta_star / 2, 1 - 2 * eps).result_n
    n_d = max(d + 1, n_cover)
    h = max(16 * FY * FY / b, 2 * FY * n_d / delta_star, p.x1_abs)
    l = h + (3 * n_d + 2) * FY / 2
    entry = {"j": j, "beta": beta, "delta_star": delta_star, "eps": eps, "d": d,
             "covering_number": n_cover, "n_d": n_d, "h": h, "l": l}
    reasons = []
    if h < p.m:
        reasons.append("H < M")
        entry["accepted"] = False
    else:
        gh, gl = p.g(h), p.g(l)
        entry["g_h"], entry["g_l"] = gh, gl
        if not gl > 2 * b:
            reasons.append("g(L) <= 2|beta|")
        if not abs(gh - gl) < eps:
            reasons.append("|g(H) - g(L)| >= eps")
        entry["accepted"] = not reasons
    if reasons:
        entry["reason"] = "; ".join(reasons)
    return entry


def powerlaw_envelope(p: PowerLawParams, phi: RotationNumber | float, j_max: int = 60,
                      log_depth: int | None = None) -> PowerLawEnvelope:
    """Scan ``beta = -2**-j``, ``j = 1..j_max``, and return the first accepted one.

    ``log_depth`` keeps logging past the accepted ``j`` (up to that ``j``), which
    is useful for studying how ``N_d`` and ``H`` scale as beta approaches 0.
    """
    p.validate()
    log = []
    found = None
    last = max(j_max, log_depth or 0)
    for j in range(1, last + 1):
        entry = powerlaw_scan_entry(p, phi, j)
        log.append(entry)
        if found is None and entry["accepted"] and j <= j_max:
            found = entry
        if found is not None and j >= (log_depth or found["j"]):
            break
    if found is None:
        raise ScanExhausted(j_max, log)
    return PowerLawEnvelope(found["beta"], found["l"], found["j"], found, log)
