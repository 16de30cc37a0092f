"""Comparison policies: MoM, CRT, MENU, TOFU as greedy UCB wrappers.

All four keep a single unfiltered history over every past round (no stage
machinery) and each round play argmax of estimate plus width, with the
width rule (alpha_t + 1) * sqrt(x^T A^{-1} x) shared with the main
algorithms so that constant choices do not confound the comparison:
MoM and MENU reuse the median-of-means alpha, CRT and TOFU the
truncation alpha.

Replication and budget accounting for MoM / MENU mirror the
median-of-means master: r pulls per decision round.
"""

from __future__ import annotations

import math

import numpy as np

from .environment import RoundContexts
from .estimators import alpha_bmm, alpha_btc, replication_count
from .linalg import (
    NumericDegeneracyError,
    gram_init,
    gram_update,
    lower_median,
    quad_widths,
)

BASELINE_KINDS = ("mom", "crt", "menu", "tofu")


class _GreedyUcbPolicy:
    """Shared skeleton: ridge geometry, UCB selection, growing storage."""

    kind = "base"
    replications = 1

    def __init__(self, T, K, d, eps, delta, v, width_scale=1.0):
        if not 0 < eps <= 1:
            raise ValueError("eps must be in (0, 1]")
        self.T = T
        self.K = K
        self.d = d
        self.eps = eps
        self.delta = delta
        self.v = v
        self.width_scale = width_scale
        self.gram = gram_init(d)
        self.t = 0  # decision rounds completed

    def _alpha(self, t: int) -> float:
        raise NotImplementedError

    def _predict(self, contexts: RoundContexts) -> np.ndarray:
        raise NotImplementedError

    def _store(self, x: np.ndarray, payoffs: np.ndarray, t: int) -> None:
        raise NotImplementedError

    def select(self, contexts: RoundContexts) -> int:
        t = self.t + 1
        width = (self.width_scale * self._alpha(t) + 1.0) * quad_widths(
            self.gram, contexts.vectors
        )
        ucb = self._predict(contexts) + width
        return int(np.argmax(ucb))

    def observe(self, contexts: RoundContexts, arm: int, payoffs) -> None:
        rec = np.atleast_1d(np.asarray(payoffs, dtype=float))
        if rec.shape != (self.replications,):
            raise ValueError(f"expected {self.replications} payoffs, got {rec.shape}")
        t = self.t + 1
        x = contexts.vectors[arm]
        self.gram = gram_update(self.gram, x)
        self._store(x, rec, t)
        self.t = t


class MomPolicy(_GreedyUcbPolicy):
    """Median of the r replicated payoffs feeds one least-squares estimate."""

    kind = "mom"

    def __init__(self, T, K, d, eps, delta, v, width_scale=1.0):
        super().__init__(T, K, d, eps, delta, v, width_scale)
        self.replications = replication_count(T, K, delta)
        self.b = np.zeros(d)

    def _alpha(self, t):
        return alpha_bmm(t, self.eps, self.v)

    def _predict(self, contexts):
        return contexts.vectors @ (self.gram.a_inv @ self.b)

    def _store(self, x, payoffs, t):
        med, _ = lower_median(payoffs)
        self.b += med * x


class CrtPolicy(_GreedyUcbPolicy):
    """Payoffs truncated at eta_t = t^(1/(2(1+eps))) before regression."""

    kind = "crt"

    def __init__(self, T, K, d, eps, delta, v, width_scale=1.0):
        super().__init__(T, K, d, eps, delta, v, width_scale)
        self.b = np.zeros(d)

    @staticmethod
    def truncation_threshold(t: int, eps: float) -> float:
        return t ** (1.0 / (2.0 * (1.0 + eps)))

    def _alpha(self, t):
        return alpha_btc(t, self.eps, self.v, self.T, self.K, self.delta)

    def _predict(self, contexts):
        return contexts.vectors @ (self.gram.a_inv @ self.b)

    def _store(self, x, payoffs, t):
        r = float(payoffs[0])
        kept = r if abs(r) <= self.truncation_threshold(t, self.eps) else 0.0
        self.b += kept * x


class MenuPolicy(_GreedyUcbPolicy):
    """r parallel ridge estimators; plays the one with the smallest median
    Gram-norm distance to the others."""

    kind = "menu"

    def __init__(self, T, K, d, eps, delta, v, width_scale=1.0):
        super().__init__(T, K, d, eps, delta, v, width_scale)
        self.replications = replication_count(T, K, delta)
        self.b = np.zeros((self.replications, d))

    def _alpha(self, t):
        return alpha_bmm(t, self.eps, self.v)

    def _predict(self, contexts):
        thetas = self.b @ self.gram.a_inv
        k_star = menu_select_index(thetas, self.gram.a)
        return contexts.vectors @ thetas[k_star]

    def _store(self, x, payoffs, t):
        self.b += payoffs[:, None] * x[None, :]


def menu_select_index(thetas: np.ndarray, a: np.ndarray) -> int:
    """argmin over j of the element median of {||theta_j - theta_s||_A}.

    The j = s term (distance zero) is included; with an odd replication
    count it shifts every median's rank identically.
    """
    m = thetas @ a @ thetas.T
    diag = np.diag(m)
    sq = np.maximum(diag[:, None] + diag[None, :] - 2.0 * m, 0.0)
    dist = np.sqrt(sq)
    medians = np.array([lower_median(row)[0] for row in dist])
    return int(np.argmin(medians))


class TofuPolicy(_GreedyUcbPolicy):
    """Per-coordinate truncation of u^i_tau * r_tau under A^{-1/2} geometry.

    Rebuilds A^{-1/2} by eigendecomposition every round; the threshold is
    b_t = c_b * t^((1-eps)/(2(1+eps))) with c_b = (v / ln(2dT/delta))^(1/(1+eps))
    unless overridden.
    """

    kind = "tofu"

    def __init__(self, T, K, d, eps, delta, v, width_scale=1.0, c_b=None):
        super().__init__(T, K, d, eps, delta, v, width_scale)
        if c_b is None:
            c_b = (v / math.log(2.0 * d * T / delta)) ** (1.0 / (1.0 + eps))
        self.c_b = c_b
        self._contexts = np.empty((16, d))
        self._payoffs = np.empty(16)

    def threshold(self, t: int) -> float:
        return self.c_b * t ** ((1.0 - self.eps) / (2.0 * (1.0 + self.eps)))

    def _alpha(self, t):
        return alpha_btc(t, self.eps, self.v, self.T, self.K, self.delta)

    def _inv_sqrt(self) -> np.ndarray:
        vals, vecs = np.linalg.eigh(self.gram.a)
        if vals.min() <= 0.0:
            raise NumericDegeneracyError("Gram matrix lost positive definiteness")
        return (vecs / np.sqrt(vals)) @ vecs.T

    def estimate_theta(self) -> np.ndarray:
        inv_sqrt = self._inv_sqrt()
        if self.t == 0:
            return np.zeros(self.d)
        V = self._contexts[: self.t]
        r = self._payoffs[: self.t]
        u = inv_sqrt @ V.T  # rows u^1..u^d over samples
        weighted = u * r[None, :]
        kept = np.where(np.abs(weighted) <= self.threshold(self.t + 1), weighted, 0.0)
        return inv_sqrt @ kept.sum(axis=1)

    def _predict(self, contexts):
        return contexts.vectors @ self.estimate_theta()

    def _store(self, x, payoffs, t):
        if self.t == len(self._contexts):
            self._contexts = np.vstack([self._contexts, np.empty_like(self._contexts)])
            self._payoffs = np.concatenate([self._payoffs, np.empty_like(self._payoffs)])
        self._contexts[self.t] = x
        self._payoffs[self.t] = payoffs[0]


def make_baseline(kind, T, K, d, eps, delta, v, width_scale=1.0):
    cls = {"mom": MomPolicy, "crt": CrtPolicy, "menu": MenuPolicy, "tofu": TofuPolicy}
    if kind not in cls:
        raise ValueError(f"unknown baseline {kind!r}")
    return cls[kind](T, K, d, eps, delta, v, width_scale)
