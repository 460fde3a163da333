"""Statistics over resonance spectra.

Everything here consumes ResonanceSet objects and produces plain arrays
and small result records: cumulative modulus fractions, normalized
modulus histograms, half-height widths, decay-rate rescalings and
power-law fits of long-lived mode counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .classical import OpeningSpec
from .propagator import PropagatorSpec
from .spectra import EigensolverError, ResonanceSet, resonance_set

DEFAULT_BIN_WIDTH = 0.01
TAIL_LO = 0.7
DEFAULT_NU_CUT = 0.3
# snap tolerance for moduli that land just above 1 through roundoff
EDGE_OVERSHOOT_TOL = 1e-8


def cumulative_moduli(rs: ResonanceSet) -> tuple[np.ndarray, np.ndarray]:
    """Moduli in ascending order with the cumulative fraction at each."""
    nu = np.sort(rs.moduli)
    n = np.arange(1, nu.size + 1) / nu.size
    return nu, n


@dataclass(frozen=True, eq=False)
class ModulusHistogram:
    """Histogram of moduli normalized by the full mode count.

    density[k] is (modes in bin k) / (all modes) / bin_width, so the
    full-range histogram integrates to one even when a restricted range
    drops part of the spectrum.
    """

    lo: float
    hi: float
    bin_width: float
    counts: np.ndarray
    density: np.ndarray
    n_total: int

    @property
    def left_edges(self) -> np.ndarray:
        return self.lo + self.bin_width * np.arange(self.counts.size)

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.counts.size + 1)


def modulus_histogram(
    rs: ResonanceSet,
    bin_width: float = DEFAULT_BIN_WIDTH,
    lo: float = 0.0,
    hi: float = 1.0,
) -> ModulusHistogram:
    """Bin the moduli over [lo, hi] with the top edge inclusive.

    Bins are [edge, next_edge) except the last, which also takes values
    equal to hi; moduli overshooting hi by no more than a roundoff
    tolerance are snapped onto the edge first.  Values outside the range
    are left out of the counts but still enter the normalization.
    """
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    if not lo < hi:
        raise ValueError(f"empty modulus range [{lo}, {hi}]")
    nbins = round((hi - lo) / bin_width)
    if nbins < 1 or abs(nbins * bin_width - (hi - lo)) > 1e-9:
        raise ValueError(f"bin width {bin_width} does not tile [{lo}, {hi}]")
    m = rs.moduli
    m = np.where((m > hi) & (m <= hi + EDGE_OVERSHOOT_TOL), hi, m)
    counts, _ = np.histogram(m, bins=np.linspace(lo, hi, nbins + 1))
    density = counts / len(rs) / bin_width
    return ModulusHistogram(
        lo=lo,
        hi=hi,
        bin_width=bin_width,
        counts=counts,
        density=density,
        n_total=len(rs),
    )


def tail_histogram(
    rs: ResonanceSet, bin_width: float = DEFAULT_BIN_WIDTH, lo: float = TAIL_LO
) -> ModulusHistogram:
    """Histogram of the long-lived tail, moduli above lo."""
    return modulus_histogram(rs, bin_width=bin_width, lo=lo, hi=1.0)


def half_height_width(hist: ModulusHistogram) -> float:
    """Width at half height: bin width times bins at or above half max.

    Counts every qualifying bin, contiguous or not, so the result is an
    exact multiple of the bin width.
    """
    peak = hist.density.max() if hist.density.size else 0.0
    if peak <= 0:
        raise ValueError("histogram has no occupied bins")
    return hist.bin_width * int((hist.density >= peak / 2).sum())


@dataclass(frozen=True)
class WidthPoint:
    dim: int
    q_c: float
    sigma: float


@dataclass(frozen=True)
class WidthFailure:
    dim: int
    q_c: float
    error: str


def width_sweep(
    dims: Sequence[int],
    qc_values: Sequence[float],
    delta_q: float,
    bin_width: float = DEFAULT_BIN_WIDTH,
    tail_lo: float = TAIL_LO,
    solver: Optional[Callable[[PropagatorSpec], ResonanceSet]] = None,
) -> tuple[list[WidthPoint], list[WidthFailure]]:
    """Half-height widths over a (q_c, dim) grid.

    A failing point is recorded and skipped rather than aborting the
    remaining grid.
    """
    solve = solver if solver is not None else resonance_set
    points: list[WidthPoint] = []
    failures: list[WidthFailure] = []
    for qc in qc_values:
        for dim in dims:
            try:
                rs = solve(PropagatorSpec(dim, OpeningSpec(qc, delta_q)))
                sigma = half_height_width(tail_histogram(rs, bin_width, tail_lo))
            except (ValueError, EigensolverError) as exc:
                failures.append(WidthFailure(dim=dim, q_c=qc, error=str(exc)))
                continue
            points.append(WidthPoint(dim=dim, q_c=qc, sigma=sigma))
    return points, failures


@dataclass(frozen=True, eq=False)
class RescaledHistogram:
    """Tail histogram carried to decay-rate units Gamma / gamma_cl.

    The modulus bins map to variable-width decay bins; each keeps its W
    value, and bins are stored with Gamma ascending.
    """

    gamma_cl: float
    lefts: np.ndarray
    rights: np.ndarray
    density: np.ndarray

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lefts + self.rights)

    def peak_location(self) -> float:
        """Midpoint of the highest bin; ties go to the longest-lived bin."""
        if self.density.size == 0 or self.density.max() <= 0:
            raise ValueError("histogram has no occupied bins")
        return float(self.midpoints[int(np.argmax(self.density))])


def rescaled_decay_histogram(
    rs: ResonanceSet,
    gamma_cl: float,
    bin_width: float = DEFAULT_BIN_WIDTH,
    tail_lo: float = TAIL_LO,
) -> RescaledHistogram:
    """Map the tail histogram from moduli to rescaled decay rates.

    A modulus bin [a, b) becomes the decay window (-2 ln b, -2 ln a]
    divided by gamma_cl, so comparable openings can be overlaid on one
    axis.
    """
    if gamma_cl <= 0:
        raise ValueError("gamma_cl must be positive")
    hist = tail_histogram(rs, bin_width, tail_lo)
    edges = hist.edges
    with np.errstate(divide="ignore"):
        gamma_edges = -2.0 * np.log(edges) / gamma_cl
    return RescaledHistogram(
        gamma_cl=gamma_cl,
        lefts=gamma_edges[1:][::-1],
        rights=gamma_edges[:-1][::-1],
        density=hist.density[::-1],
    )


@dataclass(frozen=True)
class WeylDataPoint:
    dim: int
    count: int
    nu_cut: float


def weyl_count(rs: ResonanceSet, nu_cut: float = DEFAULT_NU_CUT) -> WeylDataPoint:
    """Number of modes with modulus strictly above the cut."""
    if not 0 <= nu_cut < 1:
        raise ValueError(f"nu_cut must lie in [0, 1), got {nu_cut}")
    return WeylDataPoint(
        dim=rs.dim, count=int((rs.moduli > nu_cut).sum()), nu_cut=nu_cut
    )


@dataclass(frozen=True)
class WeylFit:
    """Power-law fit of long-lived counts against dimension."""

    slope: float
    intercept_log10: float
    rms_residual: float
    points: tuple[WeylDataPoint, ...]


def weyl_fit(points: Iterable[WeylDataPoint]) -> WeylFit:
    """Least squares in log10-log10 of count against dimension.

    Needs at least four points spanning a factor of four in dimension,
    all with nonzero counts, otherwise the exponent is not meaningful.
    """
    pts = tuple(points)
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points, got {len(pts)}")
    dims = np.array([p.dim for p in pts], dtype=float)
    counts = np.array([p.count for p in pts], dtype=float)
    if dims.max() < 4 * dims.min():
        raise ValueError("points must span at least a factor 4 in dimension")
    if (counts <= 0).any():
        raise ValueError("all counts must be positive for a log-log fit")
    x = np.log10(dims)
    y = np.log10(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return WeylFit(
        slope=float(slope),
        intercept_log10=float(intercept),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        points=pts,
    )


def synthetic_power_law_points(
    exponent_num: int = 4,
    exponent_den: int = 5,
    prefactor: int = 3,
    n_points: int = 4,
) -> list[WeylDataPoint]:
    """Exact power-law data for self-testing the fit.

    Dimensions are powers of 2^den and counts prefactor * 2^(num k), so
    count = prefactor * dim^(num/den) holds exactly in integers.
    """
    if not (0 < exponent_num < exponent_den):
        raise ValueError("exponent must be a proper fraction")
    return [
        WeylDataPoint(
            dim=2 ** (exponent_den * k),
            count=prefactor * 2 ** (exponent_num * k),
            nu_cut=DEFAULT_NU_CUT,
        )
        for k in range(1, n_points + 1)
    ]
