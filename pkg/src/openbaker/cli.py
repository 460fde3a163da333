"""Command line front end emitting figure-ready CSV files.

Four commands cover the pipeline: classical (survivor-area sweeps,
series and rasters), spectrum (cached resonance spectra), stats
(cumulative fractions, histograms, width sweeps, rescaled decay
distributions) and weyl (long-lived mode counting with a power-law
fit).  Every produced file gets a sidecar manifest; plotting is left to
whatever consumes the CSVs.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import csvio
from .cache import CacheError, SpectrumCache
from .classical import OpeningSpec, as_fraction
from .propagator import PropagatorSpec
from .spectra import EigensolverError
from .stats import (
    DEFAULT_BIN_WIDTH,
    DEFAULT_NU_CUT,
    TAIL_LO,
    cumulative_moduli,
    modulus_histogram,
    rescaled_decay_histogram,
    synthetic_power_law_points,
    weyl_count,
    weyl_fit,
    width_sweep,
)
from .trapped import (
    DEFAULT_FIT_RANGE,
    ResolutionExhausted,
    area_series,
    escape_rate,
    qc_sweep,
    render_trapped_set,
)

DQ_PRESETS = ("0.05", "0.1", "0.2")
WEYL_DIM_PRESETS = (128, 180, 256, 362, 512, 724, 1024)
WIDTH_DIM_RANGE = (500, 2000)


def _fractions(text: str) -> list[Fraction]:
    if not text:
        return []
    return [as_fraction(part) for part in text.split(",")]


def _ints(text: str) -> list[int]:
    if not text:
        return []
    return [int(part) for part in text.split(",")]


def _grid(text: str) -> list[Fraction]:
    """Inclusive decimal grid "start:stop:step" evaluated exactly."""
    try:
        start, stop, step = (as_fraction(p) for p in text.split(":"))
    except Exception as exc:
        raise ValueError(f"bad grid {text!r}, expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid {text!r}")
    values = []
    k = 0
    while start + k * step <= stop:
        values.append(start + k * step)
        k += 1
    return values


def _pair(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"expected two colon-separated values, got {text!r}")
    return as_fraction(parts[0]), as_fraction(parts[1])


def _num(x) -> str:
    """Compact decimal for filenames."""
    return format(float(x), "g")


def _params(args: argparse.Namespace) -> dict:
    return {k: str(v) for k, v in sorted(vars(args).items()) if k != "func"}


def _emit(path: Path, args: argparse.Namespace) -> None:
    csvio.write_manifest(path, _params(args))
    print(f"wrote {path}")


def _solve_many(specs, cache: SpectrumCache, jobs: int) -> dict:
    """Fill the cache for every spec, optionally with worker threads.

    The eigensolver releases the interpreter lock inside LAPACK, so
    threads scale on independent dimensions.  Results come back in a
    dict, keeping emission order deterministic regardless of jobs.
    """
    specs = list(specs)
    if jobs <= 1 or len(specs) <= 1:
        return {spec: cache.get_or_compute(spec)[0] for spec in specs}
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return dict(zip(specs, pool.map(lambda s: cache.get_or_compute(s)[0], specs)))


def cmd_classical(args, out: Path, cache: SpectrumCache) -> None:
    dqs = args.dq
    grid = args.grid
    for dq in dqs:
        rows = qc_sweep(dq, grid, args.t)
        path = out / f"sweep_dq{_num(dq)}_t{args.t}.csv"
        csvio.write_sweep_csv(path, dq, args.t, rows)
        _emit(path, args)
    fit_lo, fit_hi = (int(x) for x in args.fit_range.split(":"))
    for qc in args.series_qc:
        for dq in dqs:
            series = area_series(OpeningSpec(qc, dq), args.tmax)
            path = out / f"series_qc{_num(qc)}_dq{_num(dq)}.csv"
            csvio.write_series_csv(path, series)
            _emit(path, args)
            fit = escape_rate(series, (fit_lo, fit_hi))
            print(
                f"qc={_num(qc)} dq={_num(dq)}: gamma={fit.gamma:.5f} "
                f"d_info={fit.d_info:.5f} rms={fit.residual_rms:.2e}"
            )
    raster_t = args.t if args.raster_t is None else args.raster_t
    modes = ("initial", "image") if args.raster_mode == "both" else (args.raster_mode,)
    for qc in args.raster_qc:
        for dq in dqs:
            for mode in modes:
                img = render_trapped_set(
                    OpeningSpec(qc, dq), raster_t, args.resolution, mode
                )
                path = out / f"raster_qc{_num(qc)}_dq{_num(dq)}_t{raster_t}_{mode}.pgm"
                csvio.write_pgm(path, img)
                _emit(path, args)


def cmd_spectrum(args, out: Path, cache: SpectrumCache) -> None:
    opening = OpeningSpec(args.qc, args.dq)
    specs = [PropagatorSpec(dim, opening) for dim in args.n]
    hits = {spec: cache.has(spec) for spec in specs}
    _solve_many(specs, cache, args.jobs)
    for spec in specs:
        path = out / (
            f"spectrum_N{spec.dim}_qc{_num(args.qc)}_dq{_num(args.dq)}.csv"
        )
        # copy the payload bytes so reruns are identical to the cache
        path.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(cache.payload_path(spec), path)
        _emit(path, args)
        print(f"spectrum N={spec.dim}: {'cache hit' if hits[spec] else 'computed'}")


def _gamma_for(qc: Fraction, dq: Fraction, override) -> float:
    if override is not None:
        return float(override)
    fit = escape_rate(area_series(OpeningSpec(qc, dq), DEFAULT_FIT_RANGE[1]))
    return fit.gamma


def cmd_stats(args, out: Path, cache: SpectrumCache) -> None:
    dq = args.dq
    tag = f"dq{_num(dq)}"
    if args.mode == "width":
        dims = list(range(args.nmin, args.nmax + 1, args.step))
        specs = []
        for qc in args.qc:
            for d in dims:
                try:
                    specs.append(PropagatorSpec(d, OpeningSpec(qc, dq)))
                except ValueError:
                    pass  # width_sweep records the failure row itself
        _solve_many(specs, cache, args.jobs)

        def provider(spec):
            return cache.get_or_compute(spec)[0]

        points, failures = width_sweep(
            dims, args.qc, dq, args.bin, args.tail_lo, solver=provider
        )
        for f in failures:
            print(f"width point N={f.dim} q_c={_num(f.q_c)} failed: {f.error}",
                  file=sys.stderr)
        path = out / f"width_{tag}.csv"
        csvio.write_width_csv(path, points)
        _emit(path, args)
        return
    specs = [
        PropagatorSpec(dim, OpeningSpec(qc, dq)) for qc in args.qc for dim in args.n
    ]
    solved = _solve_many(specs, cache, args.jobs)
    gammas = {}
    if args.mode == "rescaled":
        gammas = {qc: _gamma_for(qc, dq, args.gamma_cl) for qc in args.qc}
    for qc in args.qc:
        for dim in args.n:
            rs = solved[PropagatorSpec(dim, OpeningSpec(qc, dq))]
            stem = f"N{dim}_qc{_num(qc)}_{tag}"
            if args.mode == "cumulative":
                nu, n = cumulative_moduli(rs)
                path = out / f"cumulative_{stem}.csv"
                csvio.write_cumulative_csv(path, nu, n)
            elif args.mode == "histogram":
                lo, hi = args.range
                hist = modulus_histogram(rs, args.bin, float(lo), float(hi))
                path = out / f"histogram_{stem}.csv"
                csvio.write_histogram_csv(path, hist)
            else:
                rh = rescaled_decay_histogram(rs, gammas[qc], args.bin, args.tail_lo)
                path = out / f"rescaled_{stem}.csv"
                csvio.write_rescaled_csv(path, rh)
            _emit(path, args)
    if args.mode == "rescaled":
        for qc, g in gammas.items():
            print(f"qc={_num(qc)}: gamma_cl={g:.5f}")


def cmd_weyl(args, out: Path, cache: SpectrumCache) -> None:
    if args.inject == "power-law":
        pts = synthetic_power_law_points()
        fit = weyl_fit(pts)
        target = 4 / 5
        path = out / "weyl_synthetic.csv"
        csvio.write_weyl_csv(path, pts)
        _emit(path, args)
        summary = out / "weyl_fit_synthetic.txt"
        summary.write_text(
            f"slope={fit.slope:.12g}\nintercept_log10={fit.intercept_log10:.12g}\n"
            f"target={target:.12g}\nrms_residual={fit.rms_residual:.3e}\n",
            encoding="ascii",
        )
        _emit(summary, args)
        if abs(fit.slope - target) > 1e-9:
            raise ValueError(
                f"self-test failed: recovered {fit.slope!r}, wanted {target!r}"
            )
        print(f"power-law self-test: slope {fit.slope:.12f} matches {target}")
        return
    opening = OpeningSpec(args.qc, args.dq)
    dims = args.n if args.n else list(WEYL_DIM_PRESETS)
    specs = [PropagatorSpec(dim, opening) for dim in dims]
    solved = _solve_many(specs, cache, args.jobs)
    pts = [weyl_count(solved[spec], args.nu_cut) for spec in specs]
    fit = weyl_fit(pts)
    reference = escape_rate(area_series(opening, DEFAULT_FIT_RANGE[1])).d_info - 1
    tag = f"qc{_num(args.qc)}_dq{_num(args.dq)}"
    path = out / f"weyl_{tag}.csv"
    csvio.write_weyl_csv(path, pts)
    _emit(path, args)
    summary = out / f"weyl_fit_{tag}.txt"
    summary.write_text(
        f"slope={fit.slope:.6f}\n"
        f"intercept_log10={fit.intercept_log10:.6f}\n"
        f"reference={reference:.6f}\n"
        f"deviation={fit.slope - reference:+.6f}\n"
        f"rms_residual={fit.rms_residual:.3e}\n"
        f"nu_cut={args.nu_cut}\n",
        encoding="ascii",
    )
    _emit(summary, args)
    print(
        f"weyl fit: slope={fit.slope:.4f} reference={reference:.4f} "
        f"deviation={fit.slope - reference:+.4f}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openbaker",
        description="Escape dynamics and resonance statistics of the open baker map.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--cache", default=None,
                        help="spectrum cache directory (default: OUT/cache)")
    common.add_argument("--jobs", type=int, default=1,
                        help="concurrent eigensolves for sweeps")
    common.add_argument("--seed", type=int, default=0,
                        help="seed recorded for sampling-based checks")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classical", parents=[common],
                       help="survivor-area sweeps, series, rasters")
    c.add_argument("--dq", type=_fractions, default=_fractions(",".join(DQ_PRESETS)),
                   help="comma list of opening widths")
    c.add_argument("--grid", type=_grid, default=_grid("0:0.5:0.005"),
                   help="q_c grid start:stop:step")
    c.add_argument("--t", type=int, default=9, help="sweep time step")
    c.add_argument("--series-qc", type=_fractions, default=_fractions(""),
                   help="emit area series for these centers")
    c.add_argument("--tmax", type=int, default=25, help="series length")
    c.add_argument("--fit-range", default="5:25", help="escape-rate fit window")
    c.add_argument("--raster-qc", type=_fractions, default=_fractions(""),
                   help="emit trapped-set rasters for these centers")
    c.add_argument("--raster-mode", choices=("initial", "image", "both"),
                   default="both")
    c.add_argument("--raster-t", type=int, default=None,
                   help="raster time step (default: --t)")
    c.add_argument("--resolution", type=int, default=512)
    c.set_defaults(func=cmd_classical)

    s = sub.add_parser("spectrum", parents=[common],
                       help="resonance spectra through the cache")
    s.add_argument("--n", type=_ints, required=True, help="comma list of dimensions")
    s.add_argument("--qc", type=as_fraction, required=True)
    s.add_argument("--dq", type=as_fraction, required=True)
    s.set_defaults(func=cmd_spectrum)

    st = sub.add_parser("stats", parents=[common],
                        help="statistics over cached spectra")
    st.add_argument("mode", choices=("cumulative", "histogram", "width", "rescaled"))
    st.add_argument("--n", type=_ints, default=_ints(""))
    st.add_argument("--qc", type=_fractions, default=_fractions(""))
    st.add_argument("--dq", type=as_fraction, required=True)
    st.add_argument("--bin", type=float, default=DEFAULT_BIN_WIDTH)
    st.add_argument("--range", type=_pair, default=_pair("0:1"),
                    help="histogram modulus range lo:hi")
    st.add_argument("--tail-lo", type=float, default=TAIL_LO)
    st.add_argument("--nmin", type=int, default=WIDTH_DIM_RANGE[0])
    st.add_argument("--nmax", type=int, default=WIDTH_DIM_RANGE[1])
    st.add_argument("--step", type=int, default=2)
    st.add_argument("--gamma-cl", type=float, default=None,
                    help="override the classical rate in rescaled mode")
    st.set_defaults(func=cmd_stats)

    w = sub.add_parser("weyl", parents=[common],
                       help="long-lived mode counts and power-law fit")
    w.add_argument("--qc", type=as_fraction)
    w.add_argument("--dq", type=as_fraction)
    w.add_argument("--n", type=_ints, default=_ints(""),
                   help=f"dimensions (default {','.join(map(str, WEYL_DIM_PRESETS))})")
    w.add_argument("--nu-cut", type=float, default=DEFAULT_NU_CUT)
    w.add_argument("--inject", choices=("power-law",), default=None,
                   help="run the synthetic self-test instead of solving")
    w.set_defaults(func=cmd_weyl)
    return parser


def _validate(args, parser: argparse.ArgumentParser) -> None:
    if args.command == "stats":
        needs_n = args.mode in ("cumulative", "histogram", "rescaled")
        if needs_n and not args.n:
            parser.error(f"stats {args.mode} requires --n")
        if not args.qc:
            parser.error(f"stats {args.mode} requires --qc")
    if args.command == "weyl" and args.inject is None:
        if args.qc is None or args.dq is None:
            parser.error("weyl requires --qc and --dq unless --inject is used")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache = SpectrumCache(args.cache if args.cache else out / "cache")
    try:
        args.func(args, out, cache)
    except (ValueError, ResolutionExhausted, EigensolverError, CacheError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
