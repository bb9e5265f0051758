"""Orbit analytics for the circle rotation theta -> theta + phi.

Indexing follows two conventions on purpose:

* orbit prefixes (gaps, covering, discrepancy) use ``{k*phi : k = 1..n}``;
* Birkhoff sums and occupation counts use ``k = 0..n-1`` starting at theta.

Covering numbers rest on one reduction.  A start theta and a Borel set S with
``lambda(S) >= m`` defeat ``n`` exactly when S avoids the union U of the open
balls ``B(theta + k*phi, delta)``, which is possible iff ``lambda(U) <= 1 - m``
(the closed complement of U is itself an admissible S).  ``lambda(U)`` does
not depend on theta and equals the sum over prefix gaps of ``min(gap, 2*delta)``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circle import RotationNumber, reduce
from .errors import PreconditionError

GAP_MERGE_TOL = 1e-12


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise PreconditionError(f"orbit length must be a positive integer, got {n!r}", "n >= 1")
    return int(n)


def _check_delta(delta: float) -> float:
    if not 0.0 < delta <= 0.5:
        raise PreconditionError(f"delta must lie in (0, 1/2], got {delta!r}", "0 < delta <= 1/2")
    return float(delta)


def orbit_points(phi, n: int, theta: float = 0.0, start: int = 1) -> np.ndarray:
    """Unsorted ``theta + k*phi mod 1`` for ``k = start .. start+n-1``."""
    # k*phi >= 0, so float mod 1 is exact and lands in [0, 1)
    pts = np.arange(start, start + n, dtype=float) * float(phi) % 1.0
    theta = reduce(theta)
    if theta:
        pts = (pts + theta) % 1.0
    return pts


def orbit_prefix(phi: RotationNumber | float, n: int) -> np.ndarray:
    n = _check_n(n)
    return np.sort(orbit_points(phi, n))


def circular_gaps(sorted_points: np.ndarray) -> np.ndarray:
    """Gaps between consecutive points, the last one wrapping through 0."""
    if len(sorted_points) == 1:
        return np.array([1.0])
    gaps = np.empty(len(sorted_points))
    np.subtract(sorted_points[1:], sorted_points[:-1], out=gaps[:-1])
    gaps[-1] = 1.0 - sorted_points[-1] + sorted_points[0]
    return gaps


@dataclass(frozen=True)
class GapSpectrum:
    n: int
    sorted_points: np.ndarray
    gaps: list[tuple[float, int]]   # (length, multiplicity), ascending length

    @property
    def distinct(self) -> int:
        return len(self.gaps)

    def total(self) -> float:
        return math.fsum(length * mult for length, mult in self.gaps)


def merge_lengths(values: np.ndarray, tol: float = GAP_MERGE_TOL) -> list[tuple[float, int]]:
    """Cluster sorted lengths that differ by at most ``tol`` (single linkage)."""
    v = np.sort(np.asarray(values, dtype=float))
    starts = np.flatnonzero(v[1:] - v[:-1] > tol) + 1
    starts = np.concatenate(([0], starts))
    bounds = np.concatenate((starts, [len(v)]))
    counts = bounds[1:] - bounds[:-1]
    means = np.add.reduceat(v, starts) / counts
    return list(zip(means.tolist(), counts.tolist()))


def gap_spectrum(phi: RotationNumber | float, n: int) -> GapSpectrum:
    pts = orbit_prefix(phi, n)
    return GapSpectrum(n, pts, merge_lengths(circular_gaps(pts)))


def gap_counts(phi: RotationNumber | float, n_max: int, tol: float = GAP_MERGE_TOL) -> np.ndarray:
    """Number of distinct gap lengths for every prefix ``n = 1..n_max``.

    Same merge rule as :func:`gap_spectrum`, but maintained incrementally:
    each new point splits one gap, and the count of "breaks" between
    neighbouring sorted gap lengths is patched locally.
    """
    n_max = _check_n(n_max)
    phi_v = float(phi)
    pts = [phi_v % 1.0]
    gaps = [1.0]
    breaks = 0
    out = np.empty(n_max, dtype=np.int64)
    out[0] = 1

    def brk(a, b):
        return 1 if b - a > tol else 0

    def remove(v):
        nonlocal breaks
        j = bisect.bisect_left(gaps, v)
        lo = gaps[j - 1] if j > 0 else None
        hi = gaps[j + 1] if j + 1 < len(gaps) else None
        if lo is not None:
            breaks -= brk(lo, v)
        if hi is not None:
            breaks -= brk(v, hi)
        if lo is not None and hi is not None:
            breaks += brk(lo, hi)
        del gaps[j]

    def insert(v):
        nonlocal breaks
        j = bisect.bisect_left(gaps, v)
        lo = gaps[j - 1] if j > 0 else None
        hi = gaps[j] if j < len(gaps) else None
        if lo is not None and hi is not None:
            breaks -= brk(lo, hi)
        if lo is not None:
            breaks += brk(lo, v)
        if hi is not None:
            breaks += brk(v, hi)
        gaps.insert(j, v)

    for n in range(2, n_max + 1):
        p = n * phi_v % 1.0
        i = bisect.bisect_left(pts, p)
        left = pts[i - 1]
        right = pts[i % len(pts)]
        remove(1.0 if len(pts) == 1 else (right - left) % 1.0)
        insert((p - left) % 1.0)
        insert((right - p) % 1.0)
        pts.insert(i, p)
        out[n - 1] = breaks + 1
    return out


def covering_measure(phi: RotationNumber | float, n: int, delta: float) -> float:
    """Lebesgue measure of the union of delta-balls around the first n orbit points."""
    delta = _check_delta(delta)
    gaps = circular_gaps(orbit_prefix(phi, n))
    return min(1.0, math.fsum(np.minimum(gaps, 2.0 * delta)))


@dataclass(frozen=True)
class CoverageQuery:
    phi: float
    delta: float
    m: float
    result_n: int
    covered: float          # covering_measure at result_n


def covering_number(phi: RotationNumber | float, delta: float, m: float,
                    max_n: int = 10_000_000) -> CoverageQuery:
    """Least n whose delta-ball union has measure strictly greater than ``1 - m``.

    Points are inserted one at a time into a sorted list and the ball measure
    is updated locally; the final answer is re-checked from scratch so float
    drift in the running sum cannot shift it.
    """
    delta = _check_delta(delta)
    if not m > 0:
        raise PreconditionError("m must be positive: no finite orbit prefix meets the empty set",
                                "m > 0")
    if m > 1:
        raise PreconditionError(f"m must lie in (0, 1], got {m!r}", "0 < m <= 1")
    phi_v = float(phi)
    target = 1.0 - m
    two_d = 2.0 * delta

    pts = [reduce(phi_v)]
    total = min(1.0, two_d)
    n = 1
    while total <= target:
        n += 1
        if n > max_n:
            raise PreconditionError(f"covering number exceeds max_n={max_n}", "n <= max_n")
        p = reduce(n * phi_v)
        i = bisect.bisect_left(pts, p)
        left = pts[i - 1]
        right = pts[i % len(pts)]
        if p == right or p == left:
            # n*phi is computed exactly here, so a repeat means the orbit is periodic
            raise PreconditionError(
                f"orbit of phi={phi_v!r} repeats after {n - 1} points without covering; "
                "the covering number is infinite", "orbit not periodic")
        old = 1.0 if len(pts) == 1 else (right - left) % 1.0
        g1 = (p - left) % 1.0
        g2 = (right - p) % 1.0
        total += min(g1, two_d) + min(g2, two_d) - min(old, two_d)
        pts.insert(i, p)

    # settle against the exact definition
    while covering_measure(phi_v, n, delta) <= target:
        n += 1
    while n > 1 and covering_measure(phi_v, n - 1, delta) > target:
        n -= 1
    return CoverageQuery(phi_v, delta, float(m), n, covering_measure(phi_v, n, delta))


def birkhoff_average(g: Callable, theta: float, phi: RotationNumber | float, n: int,
                     vectorized: bool = False) -> float:
    """Time average of ``g`` over ``theta + k*phi``, ``k = 0..n-1``.

    With ``vectorized=True`` ``g`` is called once on the whole orbit array.
    """
    n = _check_n(n)
    pts = orbit_points(phi, n, theta=theta, start=0)
    if vectorized:
        vals = np.asarray(g(pts), dtype=float)
    else:
        vals = np.fromiter((g(float(t)) for t in pts), dtype=float, count=n)
    return math.fsum(vals) / n


def normalize_arcs(arcs: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Turn ``(start, length)`` arcs into disjoint sorted pieces ``[a, b)`` inside [0, 1].

    Arcs may wrap through 0.  Overlaps, negative lengths and lengths above 1
    are rejected.
    """
    pieces = []
    for arc in arcs:
        try:
            start, length = (float(v) for v in arc)
        except (TypeError, ValueError):
            raise PreconditionError(f"malformed arc {arc!r}; expected (start, length)") from None
        if not (math.isfinite(start) and math.isfinite(length)) or not 0.0 <= length <= 1.0:
            raise PreconditionError(f"arc length must lie in [0, 1], got {arc!r}",
                                    "0 <= length <= 1")
        if length == 0.0:
            continue
        if length == 1.0:
            pieces.append((0.0, 1.0))
            continue
        a = reduce(start)
        b = a + length
        if b <= 1.0:
            pieces.append((a, b))
        else:
            pieces.append((a, 1.0))
            pieces.append((0.0, b - 1.0))
    pieces.sort()
    for (a0, b0), (a1, _) in zip(pieces, pieces[1:]):
        if a1 < b0:
            raise PreconditionError("arcs overlap after normalisation", "arcs disjoint")
    return pieces


def arc_membership(pieces: list[tuple[float, float]], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = np.zeros(x.shape, dtype=bool)
    for a, b in pieces:
        inside |= (x >= a) & (x < b)
    return inside


def occupation_fraction(arcs, theta: float, phi: RotationNumber | float, n: int) -> float:
    """Fraction of ``k = 0..n-1`` with ``theta + k*phi`` inside the arc union."""
    n = _check_n(n)
    pieces = normalize_arcs(arcs)
    pts = orbit_points(phi, n, theta=theta, start=0)
    return int(arc_membership(pieces, pts).sum()) / n


def occupation_violators(arcs, thetas, phi: RotationNumber | float, n_max: int,
                         eps: float) -> float:
    """Fraction of starts whose visit count exceeds ``eps*N`` for some ``N <= n_max``.

    This is the empirical side of the small-set estimate: with an arc of measure
    ``eps**2`` the violators should occupy measure at most ``eps``.
    """
    pieces = normalize_arcs(arcs)
    thetas = np.asarray(thetas, dtype=float)
    steps = reduce(np.arange(n_max, dtype=float) * float(phi))
    # rows: starts, cols: k = 0..n_max-1
    pts = reduce(thetas[:, None] + steps[None, :])
    counts = np.cumsum(arc_membership(pieces, pts), axis=1)
    horizon = np.arange(1, n_max + 1)
    bad = np.any(counts > eps * horizon, axis=1)
    return float(bad.mean())


def star_discrepancy(points) -> float:
    """Star discrepancy of a finite point set in [0, 1) via the sorted-points formula."""
    x = np.sort(np.asarray(points, dtype=float))
    n = len(x)
    if n == 0:
        raise PreconditionError("need at least one point", "n >= 1")
    i = np.arange(1, n + 1)
    return float(1.0 / (2 * n) + np.max(np.abs(x - (2 * i - 1) / (2.0 * n))))


def discrepancy(phi: RotationNumber | float, n: int) -> float:
    return star_discrepancy(orbit_points(phi, _check_n(n)))
