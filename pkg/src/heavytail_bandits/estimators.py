"""Basic confidence-interval constructors for heavy-tailed payoffs.

Two routes to a robust per-arm estimate from a stage's filtered history:

* BMM replicates each pull r times, runs one ridge regression per
  replication slot, and takes the element median of the r predicted
  payoffs for the queried arm.
* BTC keeps single payoffs and, per queried arm, truncates each sample's
  weighted contribution beta_tau * r_tau at the data-dependent level h
  before summing.

Both return the same interval shape: r_hat +- (alpha_t + 1) * c where
c = sqrt(x^T A^{-1} x).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .linalg import GramState, gram_init, gram_update, lower_median, p_norm, quad_widths
from .environment import RoundContexts

# Histories at least this long use the pruned truncation scan in
# btc_estimate; shorter ones take the direct per-sample path.
_BTC_FAST_MIN = 64


def alpha_bmm(t: int, eps: float, v: float) -> float:
    """Width multiplier for BMM: (12 v)^(1/(1+eps)) * t^((1-eps)/(2(1+eps)))."""
    _check_alpha_args(t, eps)
    if v <= 0:
        raise ValueError("moment bound v must be positive")
    return (12.0 * v) ** (1.0 / (1.0 + eps)) * t ** ((1.0 - eps) / (2.0 * (1.0 + eps)))


def alpha_btc(t: int, eps: float, v: float, T: int, K: int, delta: float) -> float:
    """Width multiplier for BTC (Bernstein constant times the t power)."""
    _check_alpha_args(t, eps)
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    if T < 3:
        raise ValueError("horizon must be >= 3")
    ell = math.log(2.0 * T * K * math.log(T) / delta)
    base = 2.0 / 3.0 * ell + math.sqrt(2.0 * ell * v) + v
    return base * t ** ((1.0 - eps) / (2.0 * (1.0 + eps)))


def _check_alpha_args(t: int, eps: float) -> None:
    if t < 1:
        raise ValueError("round index t must be >= 1")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")


def replication_count(T: int, K: int, delta: float) -> int:
    """Replications per pull: ceil(8 ln(2KT lnT / delta)), forced odd.

    Odd r makes the element median unique and symmetric; bumping an even
    count up by one only tightens the union bound.
    """
    if T < 3:
        raise ValueError("horizon must be >= 3 so that ln T > 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    r = math.ceil(8.0 * math.log(2.0 * K * T * math.log(T) / delta))
    return r + 1 if r % 2 == 0 else r


@dataclass(frozen=True)
class ArmEstimate:
    """Per-arm estimate r_hat with confidence half-width (alpha_t+1)*c."""

    arm: int
    r_hat: float
    width: float


class StageHistory:
    """One stage's recorded rounds: contexts, payoff records, Gram state.

    Payoff records are length-``n_replications`` vectors (r payoffs per
    recorded round for BMM, a single payoff for BTC). The running vectors
    b[j] = sum_tau r_tau^j x_tau are maintained incrementally so BMM's r
    ridge solves never touch the raw history.
    """

    def __init__(self, dim: int, n_replications: int = 1):
        if n_replications < 1:
            raise ValueError("n_replications must be >= 1")
        self.dim = dim
        self.n_replications = n_replications
        self.gram: GramState = gram_init(dim)
        self._contexts = np.empty((16, dim))
        self._payoffs = np.empty((16, n_replications))
        self._n = 0
        self.b = np.zeros((n_replications, dim))
        # |payoff| of the first replication slot, kept sorted so the
        # truncation scan can skip samples too small to ever be clipped
        self._abs_sorted: list[float] = []
        self._abs_tau: list[int] = []

    def __len__(self) -> int:
        return self._n

    @property
    def contexts(self) -> np.ndarray:
        return self._contexts[: self._n]

    @property
    def payoffs(self) -> np.ndarray:
        return self._payoffs[: self._n]

    def add(self, x: np.ndarray, payoff_record) -> None:
        rec = np.atleast_1d(np.asarray(payoff_record, dtype=float))
        if rec.shape != (self.n_replications,):
            raise ValueError(
                f"expected payoff record of length {self.n_replications}, got {rec.shape}"
            )
        self.gram = gram_update(self.gram, x)
        if self._n == len(self._contexts):
            self._contexts = np.vstack([self._contexts, np.empty_like(self._contexts)])
            self._payoffs = np.vstack([self._payoffs, np.empty_like(self._payoffs)])
        self._contexts[self._n] = x
        self._payoffs[self._n] = rec
        pos = bisect.bisect(self._abs_sorted, abs(float(rec[0])))
        self._abs_sorted.insert(pos, abs(float(rec[0])))
        self._abs_tau.insert(pos, self._n)
        self._n += 1
        self.b += rec[:, None] * x[None, :]


def bmm_estimate(hist: StageHistory, contexts: RoundContexts, alpha_t: float) -> list[ArmEstimate]:
    """Median-of-means intervals for every arm in ``contexts``.

    Solves theta_j = A^{-1} b_j per replication slot, predicts each arm
    under all r estimators, and takes the element median per arm.
    """
    x = contexts.vectors
    widths = (alpha_t + 1.0) * quad_widths(hist.gram, x)
    if len(hist) == 0:
        return [ArmEstimate(a, 0.0, float(w)) for a, w in enumerate(widths)]
    thetas = hist.b @ hist.gram.a_inv  # (r, d); a_inv is symmetric
    preds = x @ thetas.T  # (K, r)
    out = []
    for a in range(x.shape[0]):
        med, _ = lower_median(preds[a])
        out.append(ArmEstimate(a, med, float(widths[a])))
    return out


def btc_truncation_level(hist: StageHistory, x: np.ndarray, eps: float) -> float:
    """Truncation criterion h = ||x^T A^{-1} V^T||_{1+eps} for one arm."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if len(hist) == 0:
        return 0.0
    beta = (np.asarray(x, dtype=float) @ hist.gram.a_inv) @ hist.contexts.T
    return p_norm(beta, 1.0 + eps)


def btc_estimate(
    hist: StageHistory, contexts: RoundContexts, alpha_t: float, eps: float
) -> list[ArmEstimate]:
    """Truncated least-squares intervals for every arm in ``contexts``.

    Per arm: weights beta = x^T A^{-1} V^T over the stored samples, level
    h = ||beta||_{1+eps}, and r_hat = sum of beta_tau * r_tau over samples
    with |beta_tau r_tau| <= h. The truncation is recomputed per arm per
    call because h depends on the queried context.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    x = contexts.vectors
    widths = (alpha_t + 1.0) * quad_widths(hist.gram, x)
    if len(hist) == 0:
        return [ArmEstimate(a, 0.0, float(w)) for a, w in enumerate(widths)]
    if eps == 1.0 and len(hist) >= _BTC_FAST_MIN:
        r_hats = _btc_truncated_sums_pruned(hist, x)
    else:
        betas = (x @ hist.gram.a_inv) @ hist.contexts.T  # (K, n)
        h = np.sum(np.abs(betas) ** (1.0 + eps), axis=1) ** (1.0 / (1.0 + eps))
        weighted = betas * hist.payoffs[:, 0][None, :]
        kept = np.where(np.abs(weighted) <= h[:, None], weighted, 0.0)
        r_hats = kept.sum(axis=1)
    return [
        ArmEstimate(a, float(r_hats[a]), float(widths[a])) for a in range(x.shape[0])
    ]


def _btc_truncated_sums_pruned(hist: StageHistory, x: np.ndarray) -> np.ndarray:
    """Truncated sums without scanning the whole history per arm.

    At eps = 1, V^T V = A - I gives h^2 = c^2 - ||A^{-1} x||^2 directly,
    and the untruncated sum is (x^T A^{-1}) b. A sample can only be
    clipped when |r_tau| > h / ||A^{-1} x|| (since |beta_tau| is at most
    ||A^{-1} x||), so only the sorted tail of large payoffs needs exact
    beta values; those contributions are then subtracted.
    """
    y = x @ hist.gram.a_inv  # (K, d)
    c2 = np.einsum("ij,ij->i", y, x)
    ynorm2 = np.einsum("ij,ij->i", y, y)
    h = np.sqrt(np.clip(c2 - ynorm2, 0.0, None))
    sums = y @ hist.b[0]
    payoffs = hist.payoffs[:, 0]
    contexts = hist.contexts
    for a in range(len(sums)):
        if ynorm2[a] <= 0.0:
            sums[a] = 0.0
            continue
        cut = h[a] / math.sqrt(ynorm2[a])
        pos = bisect.bisect(hist._abs_sorted, cut)
        if pos == len(hist._abs_sorted):
            continue
        taus = np.asarray(hist._abs_tau[pos:])
        prods = (contexts[taus] @ y[a]) * payoffs[taus]
        clipped = np.abs(prods) > h[a]
        if clipped.any():
            sums[a] -= prods[clipped].sum()
    return sums
