"""Spectral density signatures for graph snapshots.

Global density of states comes from the Kernel Polynomial Method:
Chebyshev moments ``d_m = tr(T_m(H)) / n`` are estimated with Rademacher
probes and the expansion is integrated in closed form over each bin.
Attribute-conditioned local densities come from Lanczos quadrature started at
the attribute vector.

Bins are ``k`` equal-width intervals over ``[-1, 1]`` in ``H`` coordinates
(``[0, 2]`` for ``L_sym``), half-open on the right as in
``numpy.histogram``; the last bin also includes ``+1``.  A value lying within
``EDGE_TOL`` of an interior edge is assigned to the bin on its right.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph import GraphError, Snapshot, SpectralOperator, encode_attribute, laplacian_operator

log = logging.getLogger(__name__)

EDGE_TOL = 1e-9
GLOBAL_DOS = "global_dos"
LOCAL_DOS = "local_dos"

_PROBE_STREAM = 0x5C9D


@dataclass(frozen=True)
class DosConfig:
    """Embedding hyperparameters.

    ``per_timestep_seed`` derives an independent probe stream from
    ``(rng_seed, timestep)``; with it off every snapshot reuses the stream of
    ``rng_seed`` alone.

    ``ldos_binning`` selects how Lanczos quadrature becomes a histogram:
    ``"kernel"`` expands the quadrature measure in Chebyshev moments and
    reconstructs it with the same damping as the global DOS; ``"ritz"``
    drops each quadrature weight into the bin of its node.
    """

    n_probe: int = 100
    n_moments: int = 20
    n_bins: int = 50
    rng_seed: int = 0
    damping: str = "jackson"
    per_timestep_seed: bool = True
    ldos_binning: str = "kernel"

    def __post_init__(self):
        if self.n_probe < 1:
            raise ValueError("n_probe must be >= 1")
        if self.n_moments < 2:
            raise ValueError("n_moments must be >= 2")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        if self.damping not in ("jackson", "none"):
            raise ValueError(f"unknown damping {self.damping!r}")
        if self.ldos_binning not in ("kernel", "ritz"):
            raise ValueError(f"unknown ldos_binning {self.ldos_binning!r}")

    def rng(self, timestep: int) -> np.random.Generator:
        key = [self.rng_seed, timestep, _PROBE_STREAM] if self.per_timestep_seed else [self.rng_seed, _PROBE_STREAM]
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


@dataclass
class SignatureVector:
    bins: np.ndarray
    kind: str = GLOBAL_DOS
    label: Optional[str] = None
    timestep: int = 0

    @property
    def k(self) -> int:
        return len(self.bins)

    def normalized(self) -> "SignatureVector":
        norm = np.linalg.norm(self.bins)
        bins = self.bins / norm if norm > 0 else self.bins.copy()
        return SignatureVector(bins, self.kind, self.label, self.timestep)


def bin_edges(k: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, k + 1)


def bin_index(x, k: int) -> np.ndarray:
    """Bin index of each value in ``x`` (``H`` coordinates) under the fixed layout."""
    x = np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0)
    edges = bin_edges(k)
    idx = np.searchsorted(edges, x + EDGE_TOL, side="right") - 1
    return np.clip(idx, 0, k - 1)


def jackson_coefficients(n_moments: int) -> np.ndarray:
    """Jackson kernel ``g_m`` for ``m = 0..n_moments-1``; ``g_0 = 1``."""
    n = n_moments
    m = np.arange(n)
    a = np.pi / (n + 1)
    return ((n - m + 1) * np.cos(m * a) + np.sin(m * a) / np.tan(a)) / (n + 1)


def rademacher_probes(n: int, n_probe: int, rng: np.random.Generator) -> np.ndarray:
    """``(n, n_probe)`` sign probes scaled to unit norm."""
    signs = rng.integers(0, 2, size=(n, n_probe), dtype=np.int8)
    return (2.0 * signs - 1.0) / np.sqrt(n)


def chebyshev_moments(op: SpectralOperator, probes: np.ndarray, n_moments: int) -> np.ndarray:
    """Averaged probe moments ``mean_z z^T T_m(H) z`` for ``m < n_moments``.

    Only ``n_moments // 2`` products with ``H`` are needed, using
    ``T_{2j} = 2 T_j^2 - T_0`` and ``T_{2j-1} = 2 T_j T_{j-1} - T_1``.
    """
    n_probe = probes.shape[1]
    mu = np.zeros(n_moments)
    t_prev = probes
    t_cur = op @ probes
    mu[0] = np.sum(probes * probes) / n_probe
    mu[1] = np.sum(probes * t_cur) / n_probe
    if n_moments > 2:
        mu[2] = 2.0 * np.sum(t_cur * t_cur) / n_probe - mu[0]
    j = 1
    while 2 * j + 1 < n_moments:
        t_next = 2.0 * (op @ t_cur) - t_prev
        j += 1
        t_prev, t_cur = t_cur, t_next
        mu[2 * j - 1] = 2.0 * np.sum(t_cur * t_prev) / n_probe - mu[1]
        if 2 * j < n_moments:
            mu[2 * j] = 2.0 * np.sum(t_cur * t_cur) / n_probe - mu[0]
    return mu


def chebyshev_bin_integrals(n_moments: int, k: int) -> np.ndarray:
    """``I[m, b]``: integral of ``T_m(x) / (pi sqrt(1 - x^2))`` over bin ``b``."""
    theta = np.arccos(bin_edges(k))
    lo, hi = theta[:-1], theta[1:]
    out = np.empty((n_moments, k))
    out[0] = (lo - hi) / np.pi
    m = np.arange(1, n_moments)[:, None]
    out[1:] = (np.sin(m * lo) - np.sin(m * hi)) / (m * np.pi)
    return out


def kpm_bin_masses(moments: np.ndarray, n_nodes: int, k: int, damping: str = "jackson") -> np.ndarray:
    """Unclipped eigenvalue counts per bin reconstructed from the moments."""
    n_moments = len(moments)
    g = jackson_coefficients(n_moments) if damping == "jackson" else np.ones(n_moments)
    c = np.full(n_moments, 2.0)
    c[0] = 1.0
    return n_nodes * (g * c * moments) @ chebyshev_bin_integrals(n_moments, k)


def kpm_dos(op: SpectralOperator, cfg: DosConfig, rng: Optional[np.random.Generator] = None) -> SignatureVector:
    """Global density of states histogram, in eigenvalue counts per bin."""
    n = op.n
    if n == 0:
        raise GraphError(f"snapshot t={op.snapshot.timestep} has no nodes")
    if rng is None:
        rng = cfg.rng(op.snapshot.timestep)
    probes = rademacher_probes(n, cfg.n_probe, rng)
    moments = chebyshev_moments(op, probes, cfg.n_moments)
    masses = kpm_bin_masses(moments, n, cfg.n_bins, cfg.damping)
    return SignatureVector(np.clip(masses, 0.0, None), GLOBAL_DOS, None, op.snapshot.timestep)


def lanczos(op: SpectralOperator, v: np.ndarray, n_steps: int, tol: float = 1e-10):
    """Lanczos with full (twice-applied) Gram-Schmidt reorthogonalization.

    Returns the diagonal ``alpha`` and off-diagonal ``beta`` of the
    tridiagonal matrix.  Stops early once the residual norm drops below
    ``tol``, in which case ``len(alpha)`` is less than ``n_steps``.
    """
    n = len(v)
    n_steps = min(n_steps, n)
    basis = np.zeros((n, n_steps))
    alpha = np.zeros(n_steps)
    beta = np.zeros(n_steps)
    q = v / np.linalg.norm(v)
    q_prev = np.zeros(n)
    b_prev = 0.0
    steps = n_steps
    for i in range(n_steps):
        basis[:, i] = q
        w = op @ q - b_prev * q_prev
        alpha[i] = w @ q
        w -= alpha[i] * q
        Q = basis[:, : i + 1]
        w -= Q @ (Q.T @ w)
        w -= Q @ (Q.T @ w)
        beta[i] = np.linalg.norm(w)
        if beta[i] < tol:
            steps = i + 1
            break
        q_prev, q, b_prev = q, w / beta[i], beta[i]
    return alpha[:steps], beta[: steps - 1]


def gauss_quadrature(alpha: np.ndarray, beta: np.ndarray):
    """Nodes and weights of the quadrature rule encoded by a Jacobi matrix."""
    T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
    nodes, vecs = np.linalg.eigh(T)
    return nodes, vecs[0] ** 2


def quadrature_moments(nodes: np.ndarray, weights: np.ndarray, n_moments: int) -> np.ndarray:
    """Chebyshev moments ``sum_j w_j T_m(x_j)`` of a discrete measure."""
    theta = np.arccos(np.clip(nodes, -1.0, 1.0))
    return np.cos(np.arange(n_moments)[:, None] * theta[None, :]) @ weights


def gql_ldos(op: SpectralOperator, v: np.ndarray, cfg: DosConfig, label: Optional[str] = None) -> SignatureVector:
    """Local density of states of ``v`` by Lanczos quadrature.

    ``cfg.n_moments`` Lanczos steps from ``v / ||v||`` give a Gauss rule
    whose nodes and weights match the first ``2 * n_moments`` moments of the
    local density.  The histogram carries total mass ``||v||^2`` (before
    clipping, in kernel mode).  Deterministic: ``cfg.n_probe`` is not used.
    """
    v = np.asarray(v, dtype=np.float64)
    if len(v) != op.n:
        raise GraphError(f"attribute vector has length {len(v)}, expected {op.n}")
    norm2 = float(v @ v)
    if norm2 == 0:
        raise GraphError("cannot compute local density of a zero vector")
    alpha, beta = lanczos(op, v, cfg.n_moments)
    nodes, weights = gauss_quadrature(alpha, beta)
    if cfg.ldos_binning == "ritz":
        bins = np.bincount(bin_index(nodes, cfg.n_bins), weights=norm2 * weights, minlength=cfg.n_bins)
    else:
        moments = quadrature_moments(nodes, weights, cfg.n_moments)
        bins = np.clip(kpm_bin_masses(moments, norm2, cfg.n_bins, cfg.damping), 0.0, None)
    return SignatureVector(bins, LOCAL_DOS, label, op.snapshot.timestep)


@dataclass
class Embedding:
    """Signatures of one snapshot: the global DOS and, optionally, one LDOS per label."""

    timestep: int
    dos: SignatureVector
    ldos: Optional[list] = None

    def ldos_map(self) -> dict:
        return {s.label: s for s in self.ldos or []}


def _embed_one(snapshot: Snapshot, cfg: DosConfig, attribute: Optional[str]):
    op = laplacian_operator(snapshot)
    dos = kpm_dos(op, cfg)
    ldos = None
    if attribute is not None:
        if snapshot.attributes is None:
            raise GraphError(f"snapshot t={snapshot.timestep} has no attribute table")
        ldos = {label: gql_ldos(op, vec, cfg, label) for label, vec in encode_attribute(snapshot.attributes, attribute)}
    return dos, ldos


def embed_series(
    graphs: Sequence[Snapshot],
    cfg: DosConfig = DosConfig(),
    attribute: Optional[str] = None,
    threads: int = 1,
    normalize: bool = True,
) -> list:
    """Embed every snapshot; returns one :class:`Embedding` per snapshot.

    With ``attribute`` set, each embedding carries an LDOS signature for
    every label seen anywhere in the series (vocabulary union, in first-seen
    order).  A label absent from a snapshot gets an all-zero signature.
    Results do not depend on ``threads``.
    """
    if not graphs:
        raise ValueError("need at least one snapshot")

    def work(s):
        try:
            return _embed_one(s, cfg, attribute)
        except GraphError as exc:
            raise GraphError(f"t={s.timestep}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, graphs))
    else:
        results = [work(s) for s in graphs]

    labels: list = []
    if attribute is not None:
        for s in graphs:
            for label in s.attributes.vocabulary.get(attribute, [attribute]):
                if label not in labels:
                    labels.append(label)

    out = []
    for s, (dos, ldos) in zip(graphs, results):
        if normalize:
            dos = dos.normalized()
        local = None
        if ldos is not None:
            local = []
            for label in labels:
                sig = ldos.get(label)
                if sig is None:
                    sig = SignatureVector(np.zeros(cfg.n_bins), LOCAL_DOS, label, s.timestep)
                local.append(sig.normalized() if normalize else sig)
        out.append(Embedding(s.timestep, dos, local))
    return out
