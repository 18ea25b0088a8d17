"""Bayesian MLP and multinomial-head posteriors (HMC/NUTS, diagonal Laplace) with calibration tools."""

from ._core import (
    Architecture,
    BayesheadError,
    Dataset,
    GaussianPosterior,
    PredictiveSummary,
    QaRecord,
    Rng,
    SampleChain,
    ValidationError,
    decide,
    derive_seed,
    ece,
    effective_sample_size,
    empirical_fisher_diag,
    evaluate,
    forward,
    grad_log_posterior,
    laplace_posterior,
    load_chain,
    load_dataset,
    load_qa_jsonl,
    log_posterior,
    predict,
    reduce_options,
    run_experiment,
    sample,
    sample_gaussian,
    sample_posterior,
    save_chain,
    save_csv,
    save_feature_binary,
    save_qa_jsonl,
    split_rhat,
    train_map,
    validate_config,
)

__version__ = "0.1.0"
