"""Torus quantization of the baker map and its opened variant.

The closed propagator mixes position and momentum through discrete
Fourier kernels with half-integer offsets (antiperiodic boundary
conditions).  Opening the map multiplies by a diagonal projector that
kills the grid sites inside the absorbing strip, which simply zeroes the
matching columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import block_diag

from .classical import OpeningSpec


def gn_matrix(n: int) -> np.ndarray:
    """Fourier kernel exp(-2 pi i (j+1/2)(k+1/2)/n) / sqrt(n)."""
    if n <= 0:
        raise ValueError(f"kernel dimension must be positive, got {n}")
    j = np.arange(n) + 0.5
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def baker_propagator(dim: int) -> np.ndarray:
    """Unitary quantization of the closed map on dim grid sites."""
    if dim <= 0 or dim % 2:
        raise ValueError(f"quantization requires even dimension, got {dim}")
    half = gn_matrix(dim // 2)
    return gn_matrix(dim).conj().T @ block_diag(half, half)


@dataclass(frozen=True)
class PropagatorSpec:
    """Dimension plus opening; everything downstream keys off this pair."""

    dim: int
    opening: OpeningSpec

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise ValueError(f"quantization requires even dimension, got {self.dim}")

    def kept_mask(self) -> np.ndarray:
        """True at grid sites outside the strip.

        Sites sit at q_j = (j + 1/2)/dim; membership is decided on exact
        rationals so edge sites land deterministically.
        """
        keep = np.ones(self.dim, dtype=bool)
        for j in range(self.dim):
            if self.opening.contains_q(Fraction(2 * j + 1, 2 * self.dim)):
                keep[j] = False
        return keep

    @property
    def removed_count(self) -> int:
        """Number of absorbed grid sites, about dim * delta_q."""
        return int((~self.kept_mask()).sum())


def opening_projector(spec: PropagatorSpec) -> np.ndarray:
    """Diagonal 0/1 matrix keeping sites outside the strip."""
    return np.diag(spec.kept_mask().astype(complex))


def open_propagator(spec: PropagatorSpec) -> np.ndarray:
    """Closed propagator with absorbed columns zeroed.

    Zeroing columns equals right-multiplying by the projector, with no
    floating-point product involved.
    """
    b = baker_propagator(spec.dim)
    b[:, ~spec.kept_mask()] = 0
    return b


def propagator_diagonal(dim: int) -> np.ndarray:
    """Diagonal of the closed propagator without the full matmul.

    Used to check the trace identity against a stored spectrum at a cost
    of one elementwise product instead of an O(dim^3) rebuild.
    """
    if dim <= 0 or dim % 2:
        raise ValueError(f"quantization requires even dimension, got {dim}")
    half = gn_matrix(dim // 2)
    blk = block_diag(half, half)
    return np.einsum("ij,ij->j", gn_matrix(dim).conj(), blk)


def open_trace(spec: PropagatorSpec) -> complex:
    """Trace of the opened propagator from its diagonal alone."""
    diag = propagator_diagonal(spec.dim)
    return complex(diag[spec.kept_mask()].sum())


def save_matrix(path, m: np.ndarray) -> None:
    """Dump a square complex matrix: int64 dimension then row-major
    complex128 entries, everything little-endian."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    with open(path, "wb") as fh:
        np.array([m.shape[0]], dtype="<i8").tofile(fh)
        np.ascontiguousarray(m, dtype="<c16").tofile(fh)


def load_matrix(path) -> np.ndarray:
    """Read back a matrix written by save_matrix, verifying the size."""
    with open(path, "rb") as fh:
        header = np.fromfile(fh, dtype="<i8", count=1)
        if header.size != 1 or header[0] <= 0:
            raise ValueError(f"bad matrix header in {path}")
        n = int(header[0])
        data = np.fromfile(fh, dtype="<c16")
    if data.size != n * n:
        raise ValueError(f"truncated matrix file {path}: {data.size} of {n * n} entries")
    return data.reshape(n, n).astype(complex)
