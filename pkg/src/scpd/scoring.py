"""Dual-window anomaly scores over a series of signature vectors.

For each timestep the most recent ``w`` prior signatures form a context
matrix; its top left singular vector is the "normal behavior".  The raw
score is one minus the cosine similarity to that summary, maximized over the
short and long windows, and the final score keeps only increases:
``Z*_t = max(Z_t - Z_{t-1}, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class ScoringConfig:
    short_window: int = 5
    long_window: int = 10

    def __post_init__(self):
        if not 1 <= self.short_window <= self.long_window:
            raise ValueError("need 1 <= short_window <= long_window")


@dataclass
class ScoreSeries:
    timesteps: np.ndarray
    z: np.ndarray
    zstar: np.ndarray
    label: Optional[str] = None
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.timesteps)

    def ranking(self) -> np.ndarray:
        """All timesteps by descending ``Z*``; ties go to the earlier timestep."""
        order = np.lexsort((self.timesteps, -self.zstar))
        return self.timesteps[order]

    def top_n(self, n: int) -> list:
        return [int(t) for t in self.ranking()[:n]]


def normal_behavior(context, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Top left singular vector of the ``k x w`` context matrix.

    ``context`` is a sequence of ``w`` signature vectors (the columns).
    Computed by power iteration on the ``w x w`` Gram matrix from the
    column-mean direction, so degenerate ties resolve to the symmetric
    combination.  Sign is fixed so the result has a nonnegative dot product
    with the column mean.  An all-zero context returns the zero vector.
    """
    C = np.column_stack([np.asarray(c, dtype=np.float64) for c in context]) if len(context) else None
    if C is None:
        raise ValueError("empty context")
    G = C.T @ C
    x = np.full(C.shape[1], 1.0 / np.sqrt(C.shape[1]))
    for _ in range(max_iter):
        y = G @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        y /= ny
        if np.linalg.norm(y - x) < tol:
            x = y
            break
        x = y
    u = C @ x
    nu = np.linalg.norm(u)
    if nu == 0:
        return np.zeros(C.shape[0])
    u /= nu
    if u @ C.mean(axis=1) < 0:
        u = -u
    return u


def _similarity(sig: np.ndarray, summary: np.ndarray) -> float:
    # zero signature against zero summary counts as "no change"
    if not sig.any() and not summary.any():
        return 1.0
    return float(sig @ summary)


ZERO_TOL = 1e-12


def score_step(sig: np.ndarray, short_summary: np.ndarray, long_summary: np.ndarray) -> float:
    """``max(1 - cos)`` over both windows, clamped to ``[0, 1]``.

    Values below ``ZERO_TOL`` are round-off of a perfect match and become 0.
    """
    z = max(1.0 - _similarity(sig, short_summary), 1.0 - _similarity(sig, long_summary))
    if z < ZERO_TOL:
        return 0.0
    return min(z, 1.0)


def _as_matrix(signatures) -> np.ndarray:
    rows = [s.bins if hasattr(s, "bins") else s for s in signatures]
    return np.vstack([np.asarray(r, dtype=np.float64) for r in rows])


def score_series(
    signatures: Sequence,
    cfg: ScoringConfig = ScoringConfig(),
    timesteps: Optional[Sequence[int]] = None,
    label: Optional[str] = None,
) -> ScoreSeries:
    """Score a series of unit-norm signatures.

    ``signatures`` may be arrays or :class:`~scpd.dos.SignatureVector`
    objects.  Timesteps default to ``1..T``.  Early steps use whatever
    prior context exists; the first step has ``Z = Z* = 0``.
    """
    X = _as_matrix(signatures)
    T = len(X)
    if T < 2:
        raise ValueError("need at least 2 signatures to score")
    if timesteps is None:
        timesteps = np.arange(1, T + 1)
    timesteps = np.asarray(timesteps, dtype=np.int64)
    z = np.zeros(T)
    for t in range(1, T):
        short = normal_behavior(X[max(0, t - cfg.short_window):t])
        long = normal_behavior(X[max(0, t - cfg.long_window):t])
        z[t] = score_step(X[t], short, long)
    zstar = np.zeros(T)
    zstar[1:] = np.maximum(z[1:] - z[:-1], 0.0)
    return ScoreSeries(timesteps, z, zstar, label)


def score_attribute_series(
    ldos_per_label: Sequence[dict],
    cfg: ScoringConfig = ScoringConfig(),
    timesteps: Optional[Sequence[int]] = None,
):
    """Score each attribute label independently and aggregate by max.

    ``ldos_per_label[t]`` maps label -> signature at step ``t``.  Labels
    missing at a step are treated as all-zero signatures.  Returns
    ``(per_label, aggregate)``.
    """
    labels: list = []
    for step in ldos_per_label:
        for label in step:
            if label not in labels:
                labels.append(label)
    if not labels:
        raise ValueError("no attribute labels to score")
    k = None
    for step in ldos_per_label:
        for sig in step.values():
            k = len(sig.bins if hasattr(sig, "bins") else sig)
            break
        if k:
            break
    per_label = {}
    for label in labels:
        series = [step.get(label, np.zeros(k)) for step in ldos_per_label]
        per_label[label] = score_series(series, cfg, timesteps, label)
    first = per_label[labels[0]]
    agg = ScoreSeries(
        first.timesteps.copy(),
        np.max([s.z for s in per_label.values()], axis=0),
        np.max([s.zstar for s in per_label.values()], axis=0),
        "aggregate",
    )
    return per_label, agg
