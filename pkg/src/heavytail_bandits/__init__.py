"""Stochastic linear bandits with heavy-tailed payoffs: algorithms,
environments, baselines, and a reproducible experiment harness."""

from .linalg import (
    GramState,
    NumericDegeneracyError,
    gram_init,
    gram_update,
    lower_median,
    p_norm,
    quad_width,
)
from .environment import (
    AdversarialInstance,
    LinearEnv,
    NoiseModel,
    RoundContexts,
    adversarial_pull,
    build_adversarial,
    gen_contexts,
    instant_regret,
    make_theta_star,
    pareto_noise,
    pull,
    sample_noise,
    student_t_noise,
    zero_noise,
)
from .estimators import (
    ArmEstimate,
    StageHistory,
    alpha_bmm,
    alpha_btc,
    bmm_estimate,
    btc_estimate,
    btc_truncation_level,
    replication_count,
)
from .master import Decision, MasterPolicy, MasterState, master_init, record, select_arm
from .baselines import CrtPolicy, MenuPolicy, MomPolicy, TofuPolicy, make_baseline
from .harness import (
    ALGOS,
    NOISES,
    ExperimentConfig,
    RegretTrace,
    aggregate,
    build_env,
    build_policy,
    read_csv,
    run_experiment,
    run_one,
    run_policy,
    trace_seed,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
