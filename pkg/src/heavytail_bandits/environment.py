"""Payoff generators.

Two families: the experimental linear environment (random unit contexts,
additive heavy-tailed noise) and the adversarial Bernoulli instance whose
payoffs take values in {0, 1/gamma} and whose hidden good arm changes
between stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise law: student_t(df), pareto(shape, scale), or zero.

    ``centered`` subtracts the Pareto mean shape*scale/(shape-1); the default
    keeps the raw draw, matching the payoff definition r = x.theta + eta.
    """

    kind: str
    df: float = 3.0
    shape: float = 3.0
    scale: float = 0.01
    centered: bool = False

    def __post_init__(self):
        if self.kind not in ("student_t", "pareto", "zero"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "student_t" and self.df <= 0:
            raise ValueError("student_t requires df > 0")
        if self.kind == "pareto" and (self.shape <= 1 or self.scale <= 0):
            raise ValueError("pareto requires shape > 1 and scale > 0")


def student_t_noise(df: float = 3.0) -> NoiseModel:
    return NoiseModel(kind="student_t", df=df)


def pareto_noise(shape: float = 3.0, scale: float = 0.01, centered: bool = False) -> NoiseModel:
    return NoiseModel(kind="pareto", shape=shape, scale=scale, centered=centered)


def zero_noise() -> NoiseModel:
    return NoiseModel(kind="zero")


def sample_noise(model: NoiseModel, rng: np.random.Generator, size: int | None = None):
    """Draw from the noise law.

    Student-t uses the ratio construction normal / sqrt(chi2(df)/df), which
    is the exact law without inverse-CDF tables; Pareto uses inverse-CDF
    sampling on (0, 1].
    """
    if model.kind == "student_t":
        z = rng.standard_normal(size)
        w = rng.chisquare(model.df, size)
        return z / np.sqrt(w / model.df)
    if model.kind == "pareto":
        u = 1.0 - rng.random(size)  # in (0, 1], keeps the draw finite
        draw = model.scale * u ** (-1.0 / model.shape)
        if model.centered:
            draw = draw - model.shape * model.scale / (model.shape - 1.0)
        return draw
    return 0.0 if size is None else np.zeros(size)


@dataclass(frozen=True)
class RoundContexts:
    """The K feature vectors presented at one round, one per row."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2:
            raise ValueError("contexts must be a K x d matrix")
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms > 1.0 + _UNIT_TOL):
            raise ValueError("context rows must lie in the unit ball")
        object.__setattr__(self, "vectors", v)

    @property
    def n_arms(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def gen_contexts(rng: np.random.Generator, d: int, K: int) -> RoundContexts:
    """K iid contexts: entries Uniform[0,1], each row scaled to unit norm."""
    if d < 1 or K < 1:
        raise ValueError("d and K must be >= 1")
    u = rng.random((K, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return RoundContexts(vectors=u)


def make_theta_star(d: int) -> np.ndarray:
    """The experiment's coefficient vector: all entries 1/sqrt(d), norm 1."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return np.full(d, 1.0 / math.sqrt(d))


@dataclass(frozen=True)
class LinearEnv:
    """Linear payoff environment: E[r | x] = x.theta_star plus noise."""

    dim: int
    n_arms: int
    theta_star: np.ndarray
    noise: NoiseModel
    fixed_contexts: RoundContexts | None = None

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        if theta.shape != (self.dim,):
            raise ValueError("theta_star dimension mismatch")
        if np.linalg.norm(theta) > 1.0 + 1e-12:
            raise ValueError("theta_star must lie in the unit ball")
        object.__setattr__(self, "theta_star", theta)

    def round_contexts(self, t: int, rng: np.random.Generator) -> RoundContexts:
        if self.fixed_contexts is not None:
            return self.fixed_contexts
        return gen_contexts(rng, self.dim, self.n_arms)

    def pull_many(self, t, contexts: RoundContexts, arm: int, n: int, rng) -> np.ndarray:
        if not 0 <= arm < contexts.n_arms:
            raise ValueError(f"arm {arm} out of range")
        mean = float(contexts.vectors[arm] @ self.theta_star)
        return mean + np.atleast_1d(sample_noise(self.noise, rng, n))


def pull(env: LinearEnv, contexts: RoundContexts, arm: int, rng: np.random.Generator) -> float:
    """One payoff draw for the given arm: x.theta_star + noise."""
    return float(env.pull_many(0, contexts, arm, 1, rng)[0])


@dataclass(frozen=True)
class AdversarialInstance:
    """Lower-bound construction: Bernoulli payoffs in {0, 1/gamma}.

    Rounds split into n_stages blocks of stage_len; during stage j the arm
    good_arms[j] has expected payoff 2*gamma^eps, every other arm gamma^eps.
    Feature 0 is sqrt(1/2) for every arm; arm a of stage j additionally
    lights feature j*K + a + 1 (features beyond stage_len*n_stages reuse the
    final stage's layout).
    """

    dim: int
    n_arms: int
    horizon: int
    epsilon: float
    gamma: float
    n_stages: int
    stage_len: int
    good_arms: tuple[int, ...]
    theta_star: np.ndarray = field(repr=False)

    def stage_of(self, t: int) -> int:
        """Stage index of 1-based round t; trailing rounds use the last stage."""
        if not 1 <= t <= self.horizon:
            raise ValueError(f"round {t} outside 1..{self.horizon}")
        return min((t - 1) // self.stage_len, self.n_stages - 1)

    def round_contexts(self, t: int, rng=None) -> RoundContexts:
        j = self.stage_of(t)
        h = math.sqrt(0.5)
        v = np.zeros((self.n_arms, self.dim))
        v[:, 0] = h
        for a in range(self.n_arms):
            v[a, j * self.n_arms + a + 1] = h
        return RoundContexts(vectors=v)

    def pull_many(self, t: int, contexts: RoundContexts, arm: int, n: int, rng) -> np.ndarray:
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm {arm} out of range")
        p = self.gamma * float(contexts.vectors[arm] @ self.theta_star)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"payoff probability {p} outside [0, 1]; instance infeasible")
        return np.where(rng.random(n) < p, 1.0 / self.gamma, 0.0)


def build_adversarial(d: int, K: int, T: int, eps: float, rng: np.random.Generator) -> AdversarialInstance:
    """Draw the hidden good arms and lay out theta_star for the instance."""
    if not (T >= K >= 4):
        raise ValueError("instance requires T >= K >= 4")
    if d < K + 1:
        raise ValueError(f"instance infeasible: need d >= K + 1, got d={d}, K={K}")
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    gamma = (K / (T + 2.0 * K)) ** (1.0 / (1.0 + eps))
    n_stages = (d - 1) // K
    stage_len = T // n_stages
    good_arms = tuple(int(rng.integers(K)) for _ in range(n_stages))
    theta = np.zeros(d)
    peak = math.sqrt(2.0) * gamma**eps
    theta[0] = peak
    for j, a in enumerate(good_arms):
        theta[j * K + a + 1] = peak
    return AdversarialInstance(
        dim=d,
        n_arms=K,
        horizon=T,
        epsilon=eps,
        gamma=gamma,
        n_stages=n_stages,
        stage_len=stage_len,
        good_arms=good_arms,
        theta_star=theta,
    )


def adversarial_pull(inst: AdversarialInstance, t: int, arm: int, rng: np.random.Generator) -> float:
    """One Bernoulli payoff draw: 1/gamma w.p. gamma * x.theta_star, else 0."""
    contexts = inst.round_contexts(t)
    return float(inst.pull_many(t, contexts, arm, 1, rng)[0])


def instant_regret(env, contexts: RoundContexts, arm: int) -> float:
    """Pseudo-regret of the pull: best expected payoff minus the arm's."""
    if not 0 <= arm < contexts.n_arms:
        raise ValueError(f"arm {arm} out of range")
    means = contexts.vectors @ env.theta_star
    return float(means.max() - means[arm])
