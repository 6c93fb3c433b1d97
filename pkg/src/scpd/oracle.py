"""Dense eigendecomposition ground truth for small snapshots.

Everything here is O(n^3) and meant for validating the stochastic and
Krylov approximations, plus the LAD baseline embedding (the full sorted
spectrum of ``L_sym``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dos import GLOBAL_DOS, LOCAL_DOS, SignatureVector, bin_index
from .graph import Snapshot, laplacian_operator

DEFAULT_CAP = 3000


class OracleSizeError(ValueError):
    pass


@dataclass
class ExactSpectrum:
    """Eigenvalues of ``L_sym`` in ascending order, optionally with eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    timestep: int = 0

    def weights(self, v: np.ndarray) -> np.ndarray:
        """``|v^T q_i|^2`` for every eigenvector."""
        if self.eigenvectors is None:
            raise ValueError("spectrum was computed without eigenvectors")
        return (self.eigenvectors.T @ np.asarray(v, dtype=np.float64)) ** 2


def sym_laplacian_dense(snapshot: Snapshot) -> np.ndarray:
    """Dense ``L_sym = I + H`` (isolated nodes get diagonal 1)."""
    return np.eye(snapshot.node_count) + laplacian_operator(snapshot).to_dense()


def _check_cap(snapshot: Snapshot, cap: int):
    if snapshot.node_count > cap:
        raise OracleSizeError(
            f"snapshot t={snapshot.timestep} has {snapshot.node_count} nodes > cap {cap}; "
            "use kpm_dos for graphs this large"
        )


def exact_spectrum(snapshot: Snapshot, with_vectors: bool = False, cap: int = DEFAULT_CAP) -> ExactSpectrum:
    _check_cap(snapshot, cap)
    L = sym_laplacian_dense(snapshot)
    if with_vectors:
        vals, vecs = np.linalg.eigh(L)
        return ExactSpectrum(vals, vecs, snapshot.timestep)
    return ExactSpectrum(np.linalg.eigvalsh(L), None, snapshot.timestep)


def exact_histogram(spectrum: ExactSpectrum, k: int, v: Optional[np.ndarray] = None) -> SignatureVector:
    """Bin the exact spectrum with the same layout as the approximations.

    Global: eigenvalue counts.  Local (``v`` given): ``sum |v^T q_i|^2`` per bin.
    """
    idx = bin_index(spectrum.eigenvalues - 1.0, k)
    if v is None:
        return SignatureVector(np.bincount(idx, minlength=k).astype(np.float64), GLOBAL_DOS, None, spectrum.timestep)
    return SignatureVector(np.bincount(idx, weights=spectrum.weights(v), minlength=k), LOCAL_DOS, None, spectrum.timestep)


def lad_embedding(snapshot: Snapshot, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All ``L_sym`` eigenvalues, ascending (equal to its singular values)."""
    return exact_spectrum(snapshot, cap=cap).eigenvalues


def pad_embeddings(vectors: list) -> np.ndarray:
    """Stack variable-length sorted spectra, left-padding with zeros to the longest."""
    size = max(len(v) for v in vectors)
    out = np.zeros((len(vectors), size))
    for r, v in enumerate(vectors):
        out[r, size - len(v):] = v
    return out
