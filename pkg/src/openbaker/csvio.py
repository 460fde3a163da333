"""Schema-exact CSV, PGM and manifest emission.

Every writer fixes its header and number formatting so that repeated
runs with identical inputs produce byte-identical files.  Each produced
file can get a sidecar JSON manifest recording the full parameter set,
the tool version and a content checksum.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .stats import ModulusHistogram, RescaledHistogram, WeylDataPoint, WidthPoint
from .trapped import SurvivalSeries

SWEEP_HEADER = "q_c,delta_q,t,area"
SERIES_HEADER = "t,area"
SPECTRUM_HEADER = "index,re,im,modulus,gamma"
CUMULATIVE_HEADER = "nu,n"
HISTOGRAM_HEADER = "nu_bin_left,W"
WIDTH_HEADER = "N,q_c,sigma"
RESCALED_HEADER = "gamma_over_gamma_cl,W"
WEYL_HEADER = "N,count,log10N,log10count"


def sig(x, digits: int = 15) -> str:
    """Fixed significant-digit rendering; infinities print as inf."""
    return format(float(x), f".{digits}g")


def _write_text(path, header: str, rows: Iterable[Sequence[str]]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_sweep_csv(path, delta_q, t: int, rows) -> None:
    """One row per grid point: (q_c, area) pairs at fixed width and time."""
    dq = sig(delta_q, 12)
    _write_text(
        path,
        SWEEP_HEADER,
        ([sig(qc, 12), dq, str(t), sig(area, 12)] for qc, area in rows),
    )


def write_series_csv(path, series: SurvivalSeries) -> None:
    _write_text(
        path,
        SERIES_HEADER,
        ([str(t), sig(area, 12)] for t, area in series.as_rows()),
    )


def write_spectrum_csv(path, values: np.ndarray) -> None:
    """Eigenvalues in their stored order, one row per mode."""
    moduli = np.abs(values)
    with np.errstate(divide="ignore"):
        gammas = -2.0 * np.log(moduli)
    _write_text(
        path,
        SPECTRUM_HEADER,
        (
            [str(i), sig(z.real), sig(z.imag), sig(nu), sig(g)]
            for i, (z, nu, g) in enumerate(zip(values, moduli, gammas))
        ),
    )


def read_spectrum_csv(path) -> np.ndarray:
    """Parse the eigenvalue column pair back into a complex array."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != SPECTRUM_HEADER:
            raise ValueError(f"unexpected spectrum header {header!r} in {path}")
        re, im = [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 5:
                raise ValueError(f"malformed spectrum row in {path}: {line!r}")
            re.append(float(parts[1]))
            im.append(float(parts[2]))
    return np.array(re, dtype=float) + 1j * np.array(im, dtype=float)


def write_cumulative_csv(path, nu: np.ndarray, n: np.ndarray) -> None:
    _write_text(
        path, CUMULATIVE_HEADER, ([sig(a), sig(b)] for a, b in zip(nu, n))
    )


def write_histogram_csv(path, hist: ModulusHistogram) -> None:
    _write_text(
        path,
        HISTOGRAM_HEADER,
        ([sig(e), sig(w)] for e, w in zip(hist.left_edges, hist.density)),
    )


def write_width_csv(path, points: Sequence[WidthPoint]) -> None:
    _write_text(
        path,
        WIDTH_HEADER,
        ([str(p.dim), sig(p.q_c), sig(p.sigma)] for p in points),
    )


def write_rescaled_csv(path, rh: RescaledHistogram) -> None:
    """One row per decay bin, located at the bin midpoint."""
    _write_text(
        path,
        RESCALED_HEADER,
        ([sig(m), sig(w)] for m, w in zip(rh.midpoints, rh.density)),
    )


def write_weyl_csv(path, points: Sequence[WeylDataPoint]) -> None:
    _write_text(
        path,
        WEYL_HEADER,
        (
            [str(p.dim), str(p.count), sig(np.log10(p.dim)), sig(np.log10(p.count))]
            for p in points
        ),
    )


def write_pgm(path, trapped: np.ndarray) -> None:
    """Binary PGM raster: trapped cells black (0), escaped white (255)."""
    trapped = np.asarray(trapped)
    if trapped.ndim != 2 or trapped.dtype != bool:
        raise ValueError("raster must be a 2-d boolean array")
    h, w = trapped.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.where(trapped, 0, 255).astype(np.uint8).tobytes())


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(target_path, parameters: dict) -> Path:
    """Sidecar record tying a produced file to its exact parameters.

    Deliberately timestamp-free so reruns stay byte-identical.
    """
    target_path = Path(target_path)
    record = {
        "file": target_path.name,
        "parameters": parameters,
        "sha256": sha256_file(target_path),
        "tool_version": __version__,
    }
    out = target_path.with_name(target_path.name + ".manifest.json")
    with open(out, "w", encoding="ascii", newline="\n") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return out
