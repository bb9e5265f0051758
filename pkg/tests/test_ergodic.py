import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from critbound.circle import GOLDEN, circle_distance, continued_fraction
from critbound.ergodic import (birkhoff_average, circular_gaps, covering_measure,
                               covering_number, discrepancy, gap_counts, gap_spectrum,
                               normalize_arcs, occupation_fraction, occupation_violators,
                               orbit_prefix, star_discrepancy)
from critbound.errors import PreconditionError

from oracles import (defeated, distinct_count, geometric_cos_average, oracle_covering_number,
                     sorted_gaps_bruteforce)

# rotations whose first partial quotients stay moderate; near-rationals have
# astronomically large (though finite) covering numbers
def _moderate(x):
    cf = continued_fraction(x, 6)
    return len(cf) == 6 and max(cf[1:]) <= 60


phis = st.floats(0.01, 0.99).filter(_moderate)


def test_orbit_prefix_examples():
    assert orbit_prefix(GOLDEN, 1).tolist() == [GOLDEN]
    assert orbit_prefix(GOLDEN, 2) == pytest.approx([2 * GOLDEN - 1, GOLDEN], abs=1e-15)
    small, big = orbit_prefix(GOLDEN, 7), orbit_prefix(GOLDEN, 8)
    assert set(small.tolist()) <= set(big.tolist())


def test_orbit_prefix_rejects_bad_length():
    with pytest.raises(PreconditionError):
        orbit_prefix(GOLDEN, 0)


def test_gap_spectrum_golden_five():
    spec = gap_spectrum(GOLDEN, 5)
    assert spec.distinct == 2
    (short, ns), (long_, nl) = spec.gaps
    assert (ns, nl) == (2, 3)
    assert short == pytest.approx(0.145898, abs=1e-6)
    assert long_ == pytest.approx(0.236068, abs=1e-6)
    assert spec.total() == pytest.approx(1.0, abs=1e-15)


def test_gap_spectrum_single_point():
    spec = gap_spectrum(0.3, 1)
    assert spec.gaps == [(1.0, 1)]


@pytest.mark.parametrize("n", [2, 17, 233, 2000])
def test_gap_spectrum_matches_bruteforce(n):
    assert gap_spectrum(GOLDEN, n).distinct == distinct_count(sorted_gaps_bruteforce(GOLDEN, n))
    assert gap_spectrum(GOLDEN, n).distinct <= 3


@pytest.mark.parametrize("phi", [GOLDEN, math.sqrt(2) - 1, math.pi - 3])
def test_gap_counts_agree_with_gap_spectrum_everywhere(phi):
    counts = gap_counts(phi, 600)
    assert counts.tolist() == [gap_spectrum(phi, n).distinct for n in range(1, 601)]


def test_circular_gaps_sum_to_one():
    rng = np.random.default_rng(3)
    pts = np.sort(rng.random(50))
    assert math.fsum(circular_gaps(pts)) == pytest.approx(1.0, abs=1e-14)


def test_covering_measure_examples():
    assert covering_measure(0.3, 1, 0.1) == pytest.approx(0.2)
    assert covering_measure(0.3, 1, 0.5) == 1.0
    assert covering_measure(GOLDEN, 2, 0.025) == pytest.approx(0.1)
    assert covering_measure(GOLDEN, 9, 0.5) == 1.0


def test_covering_measure_validates_delta():
    with pytest.raises(PreconditionError):
        covering_measure(GOLDEN, 3, 0.0)
    with pytest.raises(PreconditionError):
        covering_measure(GOLDEN, 3, 0.6)


def test_covering_number_examples():
    assert covering_number(GOLDEN, 0.3, 0.5).result_n == 1
    q = covering_number(GOLDEN, 0.025, 0.94)
    assert q.result_n == 2 and q.covered == pytest.approx(0.1)


def test_covering_number_detects_periodic_orbit():
    with pytest.raises(PreconditionError) as info:
        covering_number(0.5, 0.01, 0.5)
    assert info.value.constraint == "orbit not periodic"


def test_covering_number_rejects_degenerate_mass():
    with pytest.raises(PreconditionError, match="empty set"):
        covering_number(GOLDEN, 0.1, 0.0)
    with pytest.raises(PreconditionError):
        covering_number(GOLDEN, 0.1, 1.5)


def test_covering_number_matches_oracle_on_small_sample():
    rng = np.random.default_rng(11)
    for _ in range(30):
        phi, delta, m = rng.uniform(0.01, 0.99), rng.uniform(0.005, 0.2), rng.uniform(0.05, 1)
        assert covering_number(phi, delta, m).result_n == oracle_covering_number(phi, delta, m)


def test_oracle_complement_really_avoids_the_orbit():
    # the witness set for n-1 keeps every orbit point at distance >= delta
    phi, delta, m = GOLDEN, 0.02, 0.3
    n = covering_number(phi, delta, m).result_n
    is_defeated, rest, pts = defeated(phi, delta, m, n - 1)
    assert is_defeated
    probes = [a + t * (b - a) for a, b in rest for t in (0.0, 0.5, 1.0)]
    assert min(circle_distance(p, q) for p in probes for q in pts) >= delta - 1e-12


@given(phis, st.floats(0.001, 0.5), st.integers(1, 300))
def test_covering_measure_monotone(phi, delta, n):
    assert covering_measure(phi, n + 1, delta) >= covering_measure(phi, n, delta) - 1e-15
    assert covering_measure(phi, n, min(0.5, delta * 1.5)) >= covering_measure(phi, n, delta) - 1e-15


@given(phis, st.floats(0.005, 0.5), st.floats(0.01, 1.0))
def test_covering_number_is_minimal(phi, delta, m):
    q = covering_number(phi, delta, m)
    assert covering_measure(phi, q.result_n, delta) > 1 - m
    if q.result_n > 1:
        assert covering_measure(phi, q.result_n - 1, delta) <= 1 - m


def test_birkhoff_examples():
    assert birkhoff_average(lambda t: 2.5, 0.3, GOLDEN, 100) == 2.5
    cosine = birkhoff_average(lambda t: np.cos(2 * np.pi * t), 0.0, GOLDEN, 10_000,
                              vectorized=True)
    assert abs(cosine) <= 1.2e-4
    assert cosine == pytest.approx(geometric_cos_average(GOLDEN, 10_000), abs=1e-12)
    half = birkhoff_average(lambda t: (np.asarray(t) < 0.5).astype(float), 0.0, GOLDEN,
                            100_000, vectorized=True)
    assert half == pytest.approx(0.5, abs=5e-4)


def test_birkhoff_scalar_and_vector_paths_agree():
    g = lambda t: np.sin(2 * np.pi * t) ** 2
    a = birkhoff_average(g, 0.2, GOLDEN, 500)
    b = birkhoff_average(g, 0.2, GOLDEN, 500, vectorized=True)
    assert a == pytest.approx(b, abs=1e-15)


def test_occupation_examples():
    assert occupation_fraction([(0.0, 1.0)], 0.4, GOLDEN, 50) == 1.0
    assert occupation_fraction([(0.0, 0.09)], 0.0, GOLDEN, 5) == 0.2
    assert occupation_fraction([], 0.0, GOLDEN, 5) == 0.0


def test_normalize_arcs_wraps_and_rejects_overlap():
    (a0, b0), (a1, b1) = normalize_arcs([(0.9, 0.2)])
    assert (a0, a1, b1) == (0.0, 0.9, 1.0) and b0 == pytest.approx(0.1)
    with pytest.raises(PreconditionError):
        normalize_arcs([(0.1, 0.3), (0.2, 0.1)])
    with pytest.raises(PreconditionError):
        normalize_arcs([(0.1, 1.5)])


def test_occupation_violators_small_set():
    thetas = (np.arange(10_000) + 0.5) / 10_000
    frac = occupation_violators([(0.0, 0.01)], thetas, GOLDEN, 1000, 0.1)
    assert frac <= 0.1 + 0.02


def test_discrepancy_examples():
    assert star_discrepancy(np.arange(10) / 10) == pytest.approx(0.1)
    assert discrepancy(GOLDEN, 1) == pytest.approx(max(GOLDEN, 1 - GOLDEN))
    assert discrepancy(GOLDEN, 10_000) <= 0.005
