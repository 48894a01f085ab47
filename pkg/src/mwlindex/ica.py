"""Symmetric FastICA with PCA whitening.

Data are laid out as (n_samples, n_channels).  The decomposition satisfies
``samples ~= sources @ mixing.T + channel_means`` and
``sources = (samples - channel_means) @ unmixing.T``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .records import EegRecording


class IcaConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IcaDecomposition:
    mixing: np.ndarray        # (n_channels, n_components)
    unmixing: np.ndarray      # (n_components, n_channels)
    sources: np.ndarray       # (n_samples, n_components)
    channel_means: np.ndarray
    whitening: np.ndarray     # (n_components, n_channels)
    converged: bool
    n_iter: int

    @property
    def n_components(self) -> int:
        return self.mixing.shape[1]

    def reconstruct(self, zeroed=()) -> np.ndarray:
        """Back-project the sources, with the components in ``zeroed`` set to zero."""
        s = self.sources
        zeroed = sorted(set(int(i) for i in zeroed))
        if zeroed:
            s = s.copy()
            s[:, zeroed] = 0.0
        return s @ self.mixing.T + self.channel_means


def whiten(x: np.ndarray, n_components: int | None = None, rank_tol: float = 1e-10):
    """PCA whitening of centered data; components below ``rank_tol`` relative variance are dropped."""
    means = x.mean(axis=0)
    xc = x - means
    cov = xc.T @ xc / xc.shape[0]
    d, e = np.linalg.eigh(cov)
    order = np.argsort(d)[::-1]
    d, e = d[order], e[:, order]
    if d[0] <= 0:
        raise ValueError("data have zero variance")
    rank = int(np.sum(d > rank_tol * d[0]))
    k = rank if n_components is None else min(int(n_components), rank)
    d, e = d[:k], e[:, :k]
    # fix eigenvector signs so the decomposition is reproducible across LAPACK builds
    e = e * np.where(e[np.argmax(np.abs(e), axis=0), np.arange(k)] < 0, -1.0, 1.0)
    k_white = (e / np.sqrt(d)).T
    dewhite = e * np.sqrt(d)
    return means, xc @ k_white.T, k_white, dewhite


def _sym_decorrelation(w: np.ndarray) -> np.ndarray:
    s, u = np.linalg.eigh(w @ w.T)
    s = np.clip(s, np.finfo(float).tiny, None)
    return (u / np.sqrt(s)) @ u.T @ w


def fast_ica(rec: EegRecording | np.ndarray, n_components: int | None = None, seed: int = 0,
             tol: float = 1e-4, max_iter: int = 200, rank_tol: float = 1e-10) -> IcaDecomposition:
    """Decompose a recording into independent components.

    Uses the tanh contrast with symmetric decorrelation.  ``n_components``
    defaults to the number of channels and is capped at the numerical rank
    of the data (an average-referenced recording loses one dimension).  If
    the fixed-point iteration does not converge within ``max_iter``, the
    whitened PCA components are returned with ``converged=False`` and an
    :class:`IcaConvergenceWarning`.
    """
    x = rec.samples if isinstance(rec, EegRecording) else np.asarray(rec, dtype=float)
    means, z, k_white, dewhite = whiten(x, n_components, rank_tol)
    n, k = z.shape
    rng = np.random.default_rng(seed)
    w = _sym_decorrelation(rng.standard_normal((k, k)))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        wx = z @ w.T
        g = np.tanh(wx)
        g_prime = 1.0 - g ** 2
        w1 = _sym_decorrelation(g.T @ z / n - g_prime.mean(axis=0)[:, None] * w)
        lim = np.max(np.abs(np.abs(np.einsum("ij,ij->i", w1, w)) - 1.0))
        w = w1
        if lim < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"FastICA did not converge in {max_iter} iterations (last change {lim:.2e}); "
                      "falling back to whitened PCA components", IcaConvergenceWarning, stacklevel=2)
        w = np.eye(k)
    sources = z @ w.T
    unmixing = w @ k_white
    mixing = dewhite @ w.T
    # order components by back-projected variance, largest first
    order = np.argsort(-np.sum(mixing ** 2, axis=0), kind="stable")
    mixing, unmixing, sources = mixing[:, order], unmixing[order], sources[:, order]
    return IcaDecomposition(mixing=mixing, unmixing=unmixing, sources=sources, channel_means=means,
                            whitening=k_white, converged=converged, n_iter=it)
