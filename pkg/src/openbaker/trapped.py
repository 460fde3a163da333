"""Forward trapped set of the doubling map with a hole, in exact arithmetic.

Escape from the baker map only depends on the q coordinate, which evolves
under q -> 2q mod 1.  The t-step survivor set S_t is a finite union of
half-open intervals whose endpoints are rationals with denominator
den0 * 2^t, so the recursion

    S_0 = complement of the hole,  S_{t+1} = S_0 intersect D^{-1}(S_t)

runs on integer endpoints with no rounding at all.  Areas come out as
Fraction values and the escape rate is fitted from their logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .classical import OpeningSpec, as_fraction, baker_inverse_array

DEFAULT_FIT_RANGE = (5, 25)
DEFAULT_MAX_INTERVALS = 10**8

_LN2 = math.log(2.0)
# int64 headroom: endpoints live in [0, 2*scale] during a doubling step
_MAX_SCALE = 2**62


class ResolutionExhausted(RuntimeError):
    """Raised when the interval population or denominator outgrows int64."""

    def __init__(self, t: int, n_intervals: int, scale: int, limit: int):
        self.t = t
        self.n_intervals = n_intervals
        self.scale = scale
        super().__init__(
            f"survivor recursion stopped at t={t}: {n_intervals} intervals "
            f"at denominator {scale} (limit {limit})"
        )


class IntervalUnion:
    """Disjoint sorted union of half-open subintervals of [0, 1).

    Endpoints are integers over a common denominator ``den``, so measures
    and membership tests are exact.
    """

    def __init__(self, starts, ends, den: int, validate: bool = True):
        self.starts = np.asarray(starts, dtype=np.int64)
        self.ends = np.asarray(ends, dtype=np.int64)
        self.den = int(den)
        if validate:
            self._check()

    def _check(self):
        s, e = self.starts, self.ends
        if s.shape != e.shape or s.ndim != 1:
            raise ValueError("starts and ends must be matching 1-d arrays")
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        if s.size:
            if not (s < e).all():
                raise ValueError("empty or inverted interval")
            if not (e[:-1] <= s[1:]).all():
                raise ValueError("intervals must be sorted and disjoint")
            if s[0] < 0 or e[-1] > self.den:
                raise ValueError("intervals must lie inside [0, 1)")

    def __len__(self) -> int:
        return int(self.starts.size)

    @property
    def measure(self) -> Fraction:
        # disjointness inside [0, den] bounds the sum by den, no overflow
        return Fraction(int((self.ends - self.starts).sum()), self.den)

    def as_fractions(self) -> list[tuple[Fraction, Fraction]]:
        den = self.den
        return [
            (Fraction(int(a), den), Fraction(int(b), den))
            for a, b in zip(self.starts, self.ends)
        ]

    def contains(self, q) -> bool:
        """Exact membership of a rational or float position."""
        x = as_fraction(q) % 1
        num, d = x.numerator, x.denominator
        scaled_floor = (num * self.den) // d
        i = int(np.searchsorted(self.starts, scaled_floor, side="right")) - 1
        if i < 0:
            return False
        return num * self.den < int(self.ends[i]) * d

    def contains_points(self, q: np.ndarray) -> np.ndarray:
        """Float membership mask for many positions (raster resolution)."""
        x = (np.asarray(q, dtype=float) % 1.0) * float(self.den)
        idx = np.searchsorted(self.starts, x, side="right") - 1
        found = idx >= 0
        idx = np.maximum(idx, 0)
        return found & (x < self.ends[idx])


def _hole_array(opening: OpeningSpec) -> tuple[np.ndarray, int]:
    """Hole as integer [start, end) rows over the smallest denominator."""
    lo, hi = opening.edges()
    if opening.delta_q == 0:
        return np.zeros((0, 2), dtype=np.int64), 1
    if hi <= 1:
        pieces = [(lo, hi)]
    else:
        pieces = [(Fraction(0), hi - 1), (lo, Fraction(1))]
    den = 1
    for a, b in pieces:
        den = math.lcm(den, a.denominator, b.denominator)
    rows = [(int(a * den), int(b * den)) for a, b in pieces]
    rows = [(a, b) for a, b in rows if a < b]
    return np.array(rows, dtype=np.int64).reshape(-1, 2), den


def _subtract(starts, ends, hole):
    """Remove each hole row from every interval, keeping order."""
    for u, v in hole:
        e1 = np.minimum(ends, u)
        s2 = np.maximum(starts, v)
        cand_s = np.empty(2 * starts.size, dtype=np.int64)
        cand_e = np.empty(2 * starts.size, dtype=np.int64)
        cand_s[0::2] = starts
        cand_e[0::2] = e1
        cand_s[1::2] = s2
        cand_e[1::2] = ends
        keep = cand_s < cand_e
        starts, ends = cand_s[keep], cand_e[keep]
    return starts, ends


def _merge(starts, ends):
    """Fuse intervals that share an endpoint."""
    if starts.size <= 1:
        return starts, ends
    gap = starts[1:] != ends[:-1]
    return starts[np.concatenate(([True], gap))], ends[np.concatenate((gap, [True]))]


def survivor_sets(
    opening: OpeningSpec, max_intervals: int = DEFAULT_MAX_INTERVALS
) -> Iterator[IntervalUnion]:
    """Yield S_0, S_1, S_2, ... until resolution runs out."""
    hole, den = _hole_array(opening)
    starts = np.array([0], dtype=np.int64)
    ends = np.array([den], dtype=np.int64)
    starts, ends = _subtract(starts, ends, hole)
    yield IntervalUnion(starts, ends, den, validate=False)
    scale = den
    t = 0
    while True:
        t += 1
        if scale >= _MAX_SCALE:
            raise ResolutionExhausted(t, starts.size, scale, max_intervals)
        if 2 * starts.size > max_intervals:
            raise ResolutionExhausted(t, 2 * starts.size, scale, max_intervals)
        # preimage under doubling: two copies at half size, i.e. the same
        # integer intervals reread at twice the denominator plus a shift
        cand_s = np.concatenate((starts, starts + scale))
        cand_e = np.concatenate((ends, ends + scale))
        scale *= 2
        cand_s, cand_e = _subtract(cand_s, cand_e, hole * (scale // den))
        starts, ends = _merge(cand_s, cand_e)
        yield IntervalUnion(starts, ends, scale, validate=False)


def survivor_set(
    opening: OpeningSpec, t: int, max_intervals: int = DEFAULT_MAX_INTERVALS
) -> IntervalUnion:
    """The t-step survivor set as an exact interval union."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    gen = survivor_sets(opening, max_intervals)
    for _ in range(t):
        next(gen)
    return next(gen)


@dataclass(frozen=True)
class SurvivalSeries:
    """Exact survivor areas A_fw(t) for t = 0 .. t_max."""

    opening: OpeningSpec
    areas: tuple[Fraction, ...]

    @property
    def t_max(self) -> int:
        return len(self.areas) - 1

    def as_rows(self) -> list[tuple[int, Fraction]]:
        return list(enumerate(self.areas))

    def log_areas(self) -> np.ndarray:
        """ln A_fw(t); exact rationals keep this safe from underflow."""
        return np.array(
            [math.log(a.numerator) - math.log(a.denominator) for a in self.areas]
        )


def area_series(
    opening: OpeningSpec, t_max: int, max_intervals: int = DEFAULT_MAX_INTERVALS
) -> SurvivalSeries:
    """Survivor areas from one run of the interval recursion."""
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    areas = []
    for t, su in enumerate(survivor_sets(opening, max_intervals)):
        areas.append(su.measure)
        if t == t_max:
            break
    return SurvivalSeries(opening=opening, areas=tuple(areas))


@dataclass(frozen=True)
class EscapeRateFit:
    """Least-squares decay rate of the survivor area."""

    gamma: float
    d_info: float
    fit_range: tuple[int, int]
    residual_rms: float

    @classmethod
    def from_series(
        cls, series: SurvivalSeries, fit_range: tuple[int, int] = DEFAULT_FIT_RANGE
    ) -> "EscapeRateFit":
        t_lo, t_hi = fit_range
        if t_lo < 0 or t_hi <= t_lo:
            raise ValueError(f"bad fit window {fit_range}")
        if t_hi > series.t_max:
            raise ValueError(
                f"series ends at t={series.t_max}, fit window needs t={t_hi}"
            )
        if any(a == 0 for a in series.areas[t_lo : t_hi + 1]):
            raise ValueError("survivor set vanished inside the fit window")
        ts = np.arange(t_lo, t_hi + 1)
        y = -series.log_areas()[t_lo : t_hi + 1]
        slope, intercept = np.polyfit(ts, y, 1)
        resid = y - (slope * ts + intercept)
        return cls(
            gamma=float(slope),
            d_info=2.0 - float(slope) / _LN2,
            fit_range=(t_lo, t_hi),
            residual_rms=float(np.sqrt(np.mean(resid**2))),
        )


def escape_rate(
    series: SurvivalSeries, fit_range: tuple[int, int] = DEFAULT_FIT_RANGE
) -> EscapeRateFit:
    return EscapeRateFit.from_series(series, fit_range)


def monte_carlo_area(
    opening: OpeningSpec,
    t: int,
    n_samples: int,
    seed: int = 0,
    chunk_size: int = 2**22,
) -> tuple[float, float]:
    """Survivor-area estimate and its standard error from uniform samples.

    Doubling a double is exact (a pure exponent shift), so the only
    approximation relative to the interval recursion is the sample noise
    plus a measure-zero edge effect from rounding the hole edges.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    lo, hi = opening.edges()
    wraps = hi > 1
    lo_f = float(lo)
    hi_f = float(hi - 1 if wraps else hi)
    rng = np.random.default_rng(seed)
    survivors = 0
    remaining = n_samples
    while remaining > 0:
        m = min(chunk_size, remaining)
        remaining -= m
        q = rng.random(m)
        for _ in range(t + 1):
            if wraps:
                inside = (q >= lo_f) | (q < hi_f)
            else:
                inside = (q >= lo_f) & (q < hi_f)
            q = q[~inside]
            q *= 2.0
            q[q >= 1.0] -= 1.0
        survivors += q.size
    p = survivors / n_samples
    return p, math.sqrt(p * (1.0 - p) / n_samples)


def qc_sweep(
    delta_q,
    qc_values: Sequence,
    t: int = 9,
    max_intervals: int = DEFAULT_MAX_INTERVALS,
) -> list[tuple[Fraction, Fraction]]:
    """Survivor area at fixed t for each hole center in qc_values."""
    out = []
    for qc in qc_values:
        qc_f = as_fraction(qc)
        series = area_series(OpeningSpec(qc_f, as_fraction(delta_q)), t, max_intervals)
        out.append((qc_f, series.areas[t]))
    return out


def render_trapped_set(
    opening: OpeningSpec,
    t: int,
    resolution: int = 512,
    mode: str = "initial",
) -> np.ndarray:
    """Boolean raster of the t-step survivor set, True where trapped.

    Mode "initial" paints initial conditions that survive t steps, which
    form full vertical strips.  Mode "image" paints the t-step forward
    image of that set via inverse iteration of cell centers, which bends
    the structure into the p direction.  Both carry the same area.
    Row 0 is the top of the square (p near 1).
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if mode not in ("initial", "image"):
        raise ValueError(f"unknown mode {mode!r}")
    su = survivor_set(opening, t)
    centers = (np.arange(resolution) + 0.5) / resolution
    if mode == "initial":
        img = np.tile(su.contains_points(centers), (resolution, 1))
    else:
        qg, pg = np.meshgrid(centers, centers)
        q, p = qg.ravel(), pg.ravel()
        for _ in range(t):
            q, p = baker_inverse_array(q, p)
        img = su.contains_points(q).reshape(resolution, resolution)
    return img[::-1]
