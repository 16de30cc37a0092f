"""Stage-wise master policy wrapping the BMM / BTC basic estimators.

Each decision round screens the arms through up to S = floor(ln T) stages.
At stage s, estimates come only from that stage's recorded history, which
is what keeps the payoffs inside any one stage independent: a round is
recorded into exactly one stage, and the recording decision never looks at
the payoff being recorded.

Three cases per stage:

* every candidate's width is at most 1/sqrt(T): exploit, play the highest
  upper confidence bound, record nothing;
* some candidate's width exceeds 2^-s: explore that arm and record the
  round into stage s;
* otherwise drop candidates more than 2^(1-s) below the best upper bound
  and proceed to stage s+1.

If the loop falls off the last stage (possible at small T where the stage
widths tie the exploit threshold), we exploit over the surviving set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .environment import RoundContexts
from .estimators import (
    StageHistory,
    alpha_bmm,
    alpha_btc,
    bmm_estimate,
    btc_estimate,
    replication_count,
)

VARIANTS = ("bmm", "btc")
EXPLORE_RULES = ("widest", "ucb", "greedy")


@dataclass(frozen=True)
class Decision:
    """Outcome of one screening pass.

    ``record_stage`` is set only for explore decisions; ``candidates``
    keeps the surviving arm set per visited stage for inspection.
    """

    arm: int
    stage: int
    case: str  # "exploit" | "explore"
    record_stage: int | None = None
    candidates: tuple[tuple[int, ...], ...] = field(default=())


@dataclass
class MasterState:
    variant: str
    S: int
    stages: list[StageHistory]
    T: int
    K: int
    d: int
    eps: float
    delta: float
    v: float
    r: int
    width_scale: float
    explore_rule: str
    pull_budget_used: int = 0
    rounds_played: int = 0


def master_init(
    variant: str,
    T: int,
    K: int,
    d: int,
    eps: float,
    delta: float,
    v: float,
    width_scale: float = 1.0,
    explore_rule: str = "widest",
) -> MasterState:
    """Fresh master state with S = floor(ln T) empty stages."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if explore_rule not in EXPLORE_RULES:
        raise ValueError(f"explore_rule must be one of {EXPLORE_RULES}")
    if K < 1:
        raise ValueError("K must be >= 1")
    if width_scale <= 0:
        raise ValueError("width_scale must be positive")
    S = math.floor(math.log(T)) if T >= 1 else 0
    if S < 1:
        raise ValueError(f"horizon T={T} too small: floor(ln T) must be >= 1")
    r = replication_count(T, K, delta) if variant == "bmm" else 1
    stages = [StageHistory(d, n_replications=r if variant == "bmm" else 1) for _ in range(S)]
    return MasterState(
        variant=variant,
        S=S,
        stages=stages,
        T=T,
        K=K,
        d=d,
        eps=eps,
        delta=delta,
        v=v,
        r=r,
        width_scale=width_scale,
        explore_rule=explore_rule,
    )


def _stage_estimates(state: MasterState, stage: int, contexts: RoundContexts, t: int):
    alpha = state.width_scale * (
        alpha_bmm(t, state.eps, state.v)
        if state.variant == "bmm"
        else alpha_btc(t, state.eps, state.v, state.T, state.K, state.delta)
    )
    hist = state.stages[stage - 1]
    if state.variant == "bmm":
        ests = bmm_estimate(hist, contexts, alpha)
    else:
        ests = btc_estimate(hist, contexts, alpha, state.eps)
    r_hat = np.array([e.r_hat for e in ests])
    width = np.array([e.width for e in ests])
    return r_hat, width


def select_arm(state: MasterState, contexts: RoundContexts) -> Decision:
    """Run the screening loop for the next decision round.

    Reads only the stage histories and the offered contexts; never a
    payoff of the current round. Ties resolve to the lowest arm index.
    """
    if contexts.n_arms != state.K:
        raise ValueError(f"expected {state.K} context rows, got {contexts.n_arms}")
    t = state.rounds_played + 1
    exploit_level = 1.0 / math.sqrt(state.T)
    cand = np.arange(state.K)
    visited: list[tuple[int, ...]] = []

    for s in range(1, state.S + 1):
        r_hat, width = _stage_estimates(state, s, contexts, t)
        visited.append(tuple(int(a) for a in cand))
        w_cand = width[cand]
        ucb_cand = r_hat[cand] + w_cand

        if np.all(w_cand <= exploit_level):
            arm = int(cand[int(np.argmax(ucb_cand))])
            return Decision(arm, s, "exploit", candidates=tuple(visited))

        threshold = 2.0 ** (-s)
        qualifying = w_cand > threshold
        if np.any(qualifying):
            idx = np.flatnonzero(qualifying)
            if state.explore_rule == "widest":
                pick = idx[int(np.argmax(w_cand[idx]))]
            elif state.explore_rule == "ucb":  # most optimistic among the wide arms
                pick = idx[int(np.argmax(ucb_cand[idx]))]
            else:  # "greedy": best current estimate among the wide arms
                pick = idx[int(np.argmax(r_hat[cand][idx]))]
            arm = int(cand[pick])
            return Decision(arm, s, "explore", record_stage=s, candidates=tuple(visited))

        keep = ucb_cand >= ucb_cand.max() - 2.0 ** (1 - s)
        cand = cand[keep]

    r_hat, width = _stage_estimates(state, state.S, contexts, t)
    ucb_cand = r_hat[cand] + width[cand]
    arm = int(cand[int(np.argmax(ucb_cand))])
    return Decision(arm, state.S, "exploit", candidates=tuple(visited))


def record(
    state: MasterState, decision: Decision, contexts: RoundContexts, payoffs
) -> MasterState:
    """Store an explore round into its stage; advance budget either way."""
    rec = np.atleast_1d(np.asarray(payoffs, dtype=float))
    if rec.shape != (state.r,):
        raise ValueError(f"expected {state.r} payoffs for variant {state.variant!r}, got {rec.shape}")
    if decision.case == "explore":
        state.stages[decision.record_stage - 1].add(contexts.vectors[decision.arm], rec)
    state.pull_budget_used += state.r
    state.rounds_played += 1
    return state


class MasterPolicy:
    """Harness-facing adapter: select / observe over a MasterState."""

    def __init__(self, variant, T, K, d, eps, delta, v, width_scale=1.0, explore_rule="widest"):
        self.state = master_init(variant, T, K, d, eps, delta, v, width_scale, explore_rule)
        self._pending: Decision | None = None

    @property
    def replications(self) -> int:
        return self.state.r

    def select(self, contexts: RoundContexts) -> int:
        self._pending = select_arm(self.state, contexts)
        return self._pending.arm

    def observe(self, contexts: RoundContexts, arm: int, payoffs) -> None:
        if self._pending is None or self._pending.arm != arm:
            raise ValueError("observe does not match the pending decision")
        record(self.state, self._pending, contexts, payoffs)
        self._pending = None
