"""f-divergence trajectory balance: surrogate losses over log-ratio deviations,
devgrad batch objectives, sequence-level LLM losses, and a tabular GFlowNet
trainer on the hypergrid environment.

Everything is implemented in the C++ core; this package re-exports the bound
operations.
"""

from ftb._core import (
    BackwardGeneratorValue,
    CheckResult,
    CompletionBatch,
    DevGradResult,
    DivergenceSpec,
    GeneratorValue,
    HypergridEnv,
    MetricsRow,
    PolicyParams,
    RunResult,
    __version__,
    backward_generator_eval,
    canonicalize,
    count_trajectories,
    delta_from_logprobs,
    devgrad_batch_loss,
    estimate_log_z,
    exact_target_distribution,
    full_spec_list,
    generator_eval,
    gradient_weights,
    inverse_generator,
    loss_deriv,
    loss_eval,
    loss_numeric,
    loss_second_deriv,
    metrics_csv,
    named_catalog,
    onpolicy_backward_g2,
    report_json,
    reward,
    spec,
    strictly_convex_spec_list,
    tempered_devgrad_llm,
    tempered_loss_eval,
    train_run,
    verify_suite,
)

__all__ = [
    "BackwardGeneratorValue",
    "CheckResult",
    "CompletionBatch",
    "DevGradResult",
    "DivergenceSpec",
    "GeneratorValue",
    "HypergridEnv",
    "MetricsRow",
    "PolicyParams",
    "RunResult",
    "__version__",
    "backward_generator_eval",
    "canonicalize",
    "count_trajectories",
    "delta_from_logprobs",
    "devgrad_batch_loss",
    "estimate_log_z",
    "exact_target_distribution",
    "full_spec_list",
    "generator_eval",
    "gradient_weights",
    "inverse_generator",
    "loss_deriv",
    "loss_eval",
    "loss_numeric",
    "loss_second_deriv",
    "metrics_csv",
    "named_catalog",
    "onpolicy_backward_g2",
    "report_json",
    "reward",
    "spec",
    "strictly_convex_spec_list",
    "tempered_devgrad_llm",
    "tempered_loss_eval",
    "train_run",
    "verify_suite",
]
