"""Besag-Clifford e-values and e-processes."""

from ._bcev import (
    ConfigError,
    EProcess,
    Kernel,
    Model,
    Statistic,
    ar1_kernel,
    composite_null_log_evalue,
    confidence_region,
    evalue,
    exact_kernel,
    experiment_names,
    fan_statistics,
    gaussian_mean_mle_statistic,
    gaussian_model,
    gof_pvalue,
    grapa_lambda,
    grapa_objective,
    log_bc_evalue,
    log_mean_exp,
    log_sum_exp,
    mala_kernel,
    oracles,
    plug_in_gaussian_statistic,
    poe_model,
    poisson_model,
    power_ulr_statistic,
    predictable_plug_in_gaussian_statistic,
    run_cli,
    run_experiment,
    rwm_kernel,
    stopping_time,
    ulr_statistic,
)

__version__ = "0.1.0"
