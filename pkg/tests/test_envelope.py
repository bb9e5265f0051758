import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critbound.circle import GOLDEN
from critbound.envelope import (EnvelopeInput, PowerLawParams, ScanExhausted,
                                delta_star_constant, delta_star_lipschitz, powerlaw_envelope,
                                powerlaw_scan_entry, quantitative_envelope)
from critbound.ergodic import covering_number
from critbound.errors import PreconditionError

from oracles import envelope_exact, oracle_covering_number

WORKED = dict(f_sup=1.0, y_sup=0.0, beta=-0.5, eps=0.03, delta_star=0.05, d0=1,
              rho_eps=0.0, x1_abs=0.0)


def test_worked_example_exact():
    rep = quantitative_envelope(EnvelopeInput(**WORKED), GOLDEN)
    assert (rep.n_d, rep.h, rep.l) == (2, 80.0, 84.0)
    assert rep.audit["h"] == "2(F+Y)N_d/delta_star"
    assert rep.audit["h_candidates"]["16(F+Y)^2/|beta|"] == 32.0
    assert rep.audit["covering_number"] == 2
    assert "vacuous" in rep.audit["delta_star"]
    assert "conditional" in rep.audit
    cover = oracle_covering_number(GOLDEN, 0.025, 0.94)
    assert envelope_exact(1, 0, -0.5, 0.03, 0.05, 1, 0, 0, cover) == (2, 80, 84)


@pytest.mark.parametrize("change, constraint", [
    ({"eps": 0.5 / 16}, "eps < |beta|/16"),
    ({"beta": 0.0}, "beta < 0"),
    ({"f_sup": 0.0}, "F + Y > 0"),
    ({"y_sup": 1.0, "delta_star": 0.5 / 8}, "delta_star < |beta|/(8Y)"),
    ({"eps": 0.0}, "eps > 0"),
    ({"delta_star": 0.0}, "0 < delta_star <= 1"),
    ({"d0": 0}, "d0 >= 1 integer"),
    ({"rho_eps": -1.0}, "rho_eps >= 0"),
    ({"beta": -20.0, "eps": 1.0}, "eps < 1"),
])
def test_invalid_inputs_name_the_constraint(change, constraint):
    with pytest.raises(PreconditionError) as info:
        quantitative_envelope(EnvelopeInput(**{**WORKED, **change}), GOLDEN)
    assert info.value.constraint == constraint


def test_forcing_bound_applies_when_y_positive():
    inp = EnvelopeInput(**{**WORKED, "y_sup": 0.5, "delta_star": 0.05})
    rep = quantitative_envelope(inp, GOLDEN)
    assert rep.audit["delta_star"] == "delta_star < |beta|/(8Y)"
    assert rep.l - rep.h == (3 * rep.n_d + 2) * 1.5 / 2


def test_custom_cover_and_binding_terms():
    rep = quantitative_envelope(EnvelopeInput(**{**WORKED, "x1_abs": 500.0}), GOLDEN,
                                cover=lambda phi, d, m: 1)
    assert rep.n_d == 2 and rep.h == 500.0 and rep.audit["h"] == "|x1|"
    rep = quantitative_envelope(EnvelopeInput(**{**WORKED, "d0": 7}), GOLDEN)
    assert rep.n_d == 8 and rep.audit["n_d"] == "d0 + 1"


fy = st.floats(0.01, 10)


@st.composite
def envelope_inputs(draw):
    beta = -draw(st.floats(0.01, 4))
    F, Y = draw(fy), draw(st.sampled_from([0.0, 0.5, 2.0]))
    eps = draw(st.floats(0.01, 0.99)) * min(1, abs(beta) / 16)
    cap = 1.0 if Y == 0 else min(1.0, abs(beta) / (8 * Y))
    ds = draw(st.floats(0.05, 0.99)) * cap
    return EnvelopeInput(F, Y, beta, eps, ds, draw(st.integers(1, 200)),
                         draw(st.floats(0, 1e4)), draw(st.floats(0, 1e4)))


def _fake_cover(phi, delta, m):
    return 1 + int(1 / delta)


@given(envelope_inputs())
def test_report_identities(inp):
    rep = quantitative_envelope(inp, GOLDEN, cover=_fake_cover)
    FY = inp.f_sup + inp.y_sup
    # l is rounded once after adding to h, so l - h can only match to one ulp of l
    assert abs((rep.l - rep.h) - (3 * rep.n_d + 2) * FY / 2) <= math.ulp(rep.l)
    assert all(rep.h >= v for v in rep.audit["h_candidates"].values())
    exact = envelope_exact(inp.f_sup, inp.y_sup, inp.beta, inp.eps, inp.delta_star, inp.d0,
                           inp.rho_eps, inp.x1_abs, _fake_cover(0, inp.delta_star / 2, 0))
    assert rep.n_d == exact[0]
    assert rep.h == pytest.approx(float(exact[1]), rel=1e-14)
    assert rep.l == pytest.approx(float(exact[2]), rel=1e-14)


@given(envelope_inputs(), st.integers(1, 100))
def test_monotone_in_window_length(inp, extra):
    a = quantitative_envelope(inp, GOLDEN, cover=_fake_cover)
    bigger = EnvelopeInput(**{**inp.__dict__, "d0": inp.d0 + extra})
    b = quantitative_envelope(bigger, GOLDEN, cover=_fake_cover)
    assert b.n_d >= a.n_d and b.h >= a.h and b.l >= a.l


def test_delta_star_helpers():
    assert delta_star_lipschitz(0.1, 4.0) == 0.025
    assert delta_star_constant(-0.5, 0.0) == 0.5 / 16
    with pytest.raises(PreconditionError):
        delta_star_lipschitz(0.1, 0.0)
    with pytest.raises(PreconditionError):
        delta_star_constant(0.5, 0.0)


def test_powerlaw_hypothesis():
    with pytest.raises(PreconditionError) as info:
        PowerLawParams(0.9, 1, 1, 1, 1).validate()
    assert info.value.constraint == "alpha*(1+1/gamma) < 1"
    assert "1.8" in str(info.value)
    PowerLawParams(0.4, 2, 1, 1, 1).validate()
    with pytest.raises(PreconditionError):
        PowerLawParams(0.3, 0, 1, 1, 1).validate()


def test_powerlaw_scan_accepts_and_verifies():
    p = PowerLawParams(0.3, 1.0, 1.0, 1.0, 1.0)
    env = powerlaw_envelope(p, GOLDEN)
    entry = env.entry
    assert entry["accepted"] and env.j == len(env.scan_log)
    assert all(not e["accepted"] for e in env.scan_log[:-1])
    b = abs(env.beta0)
    assert p.g(env.l_beta0) > 2 * b
    assert abs(p.g(entry["h"]) - p.g(entry["l"])) < entry["eps"]
    assert entry["h"] >= p.m
    assert entry["covering_number"] == 1 == covering_number(GOLDEN, entry["delta_star"] / 2,
                                                           1 - 2 * entry["eps"]).result_n
    assert entry["n_d"] == math.floor(1 / b) + 2


def test_powerlaw_scan_exhaustion_keeps_log():
    p = PowerLawParams(0.3, 1.0, 1.0, 1e30, 1.0)
    with pytest.raises(ScanExhausted) as info:
        powerlaw_envelope(p, GOLDEN, j_max=5)
    assert len(info.value.scan_log) == 5
    assert all(e["reason"] == "H < M" for e in info.value.scan_log)


def test_powerlaw_scan_asymptotic_slopes():
    p = PowerLawParams(0.3, 1.0, 1.0, 1.0, 1.0)
    env = powerlaw_envelope(p, GOLDEN, log_depth=20)
    log = env.scan_log[-8:]
    lb = np.log([abs(e["beta"]) for e in log])
    nd_slope = np.polyfit(lb, np.log([e["n_d"] for e in log]), 1)[0]
    h_slope = np.polyfit(lb, np.log([e["h"] for e in log]), 1)[0]
    assert nd_slope == pytest.approx(-1.0, abs=0.1)
    assert h_slope == pytest.approx(-2.0, abs=0.1)


def test_scan_entry_by_hand():
    p = PowerLawParams(0.3, 1.0, 1.0, 1.0, 1.0)
    e = powerlaw_scan_entry(p, GOLDEN, 1)
    assert e["delta_star"] == 0.5 / 16 and e["eps"] == min(0.5 / 32, 0.5 / 64)
    assert e["d"] == 3 and e["n_d"] == 4
    assert e["h"] == max(16 / 0.5, 2 * 4 / (0.5 / 16))
    assert e["l"] == e["h"] + 14 / 2
