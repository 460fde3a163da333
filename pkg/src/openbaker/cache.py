"""Disk cache for computed spectra.

Entries are keyed by a hash of the physical parameters plus convention
and solver version strings, so a change in grid or endpoint conventions
invalidates old data instead of silently mixing with it.  The payload is
the spectrum CSV itself; a JSON manifest carries the parameters, a
checksum and a timestamp.  Loads are validated against the checksum and
against the trace identity of a freshly rebuilt propagator diagonal.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path

from . import __version__
from .classical import OpeningSpec, as_fraction
from .csvio import read_spectrum_csv, sha256_file, write_spectrum_csv
from .propagator import PropagatorSpec, open_trace
from .spectra import ResonanceSet, resonance_set

# bump when endpoint/grid conventions or the solver pipeline change
CONVENTION_VERSION = 1
SOLVER_VERSION = 1

TRACE_TOL_PER_DIM = 1e-8


class CacheError(RuntimeError):
    """A cache entry exists but fails its integrity checks."""


def cache_key(spec: PropagatorSpec) -> str:
    """Stable hash of the parameters and the convention versions.

    q_c and delta_q are canonicalized to exact rationals first, so 0.1,
    "0.1" and Fraction(1, 10) address the same entry.
    """
    qc = as_fraction(spec.opening.q_c)
    dq = as_fraction(spec.opening.delta_q)
    text = (
        f"dim={spec.dim};qc={qc};dq={dq};"
        f"conv={CONVENTION_VERSION};solver={SOLVER_VERSION}"
    )
    return hashlib.sha256(text.encode("ascii")).hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class SpectrumCache:
    """Content-addressed store of spectrum CSVs under one directory."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def payload_path(self, spec: PropagatorSpec) -> Path:
        return self.root / (cache_key(spec) + ".csv")

    def manifest_path(self, spec: PropagatorSpec) -> Path:
        return self.root / (cache_key(spec) + ".json")

    def has(self, spec: PropagatorSpec) -> bool:
        return self.payload_path(spec).exists() and self.manifest_path(spec).exists()

    def store(self, spec: PropagatorSpec, rs: ResonanceSet) -> Path:
        """Write payload then manifest, each through an atomic rename."""
        payload = self.payload_path(spec)
        tmp = self.root / (payload.name + ".stage")
        write_spectrum_csv(tmp, rs.values)
        os.replace(tmp, payload)
        manifest = {
            "dim": spec.dim,
            "q_c": str(as_fraction(spec.opening.q_c)),
            "delta_q": str(as_fraction(spec.opening.delta_q)),
            "convention_version": CONVENTION_VERSION,
            "solver_version": SOLVER_VERSION,
            "sha256": sha256_file(payload),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
            "tool_version": __version__,
        }
        data = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("ascii")
        _atomic_write(self.manifest_path(spec), data)
        return payload

    def load(self, spec: PropagatorSpec) -> ResonanceSet:
        """Rebuild a ResonanceSet from disk, verifying integrity.

        Checks the manifest checksum against the payload bytes, then the
        trace identity: the eigenvalue sum must match the trace of the
        opened propagator recomputed from scratch.
        """
        payload = self.payload_path(spec)
        with open(self.manifest_path(spec), "r", encoding="ascii") as fh:
            manifest = json.load(fh)
        actual = sha256_file(payload)
        if manifest.get("sha256") != actual:
            raise CacheError(
                f"checksum mismatch for {payload.name}: "
                f"manifest {manifest.get('sha256')}, payload {actual}"
            )
        values = read_spectrum_csv(payload)
        if values.size != spec.dim:
            raise CacheError(
                f"{payload.name} holds {values.size} modes, expected {spec.dim}"
            )
        gap = abs(complex(values.sum()) - open_trace(spec))
        if gap > TRACE_TOL_PER_DIM * spec.dim:
            raise CacheError(
                f"trace identity violated for {payload.name}: |sum - trace| = {gap:.3e}"
            )
        values.setflags(write=False)
        return ResonanceSet(spec=spec, values=values)

    def get_or_compute(self, spec: PropagatorSpec) -> tuple[ResonanceSet, bool]:
        """Return the cached spectrum, computing and storing on a miss.

        The result is always the parse-back of the stored CSV, so hit
        and miss paths hand identical numbers downstream.
        """
        if self.has(spec):
            return self.load(spec), True
        self.store(spec, resonance_set(spec))
        return self.load(spec), False
