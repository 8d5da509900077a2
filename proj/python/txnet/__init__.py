"""Paired transcriptome differential expression and network analysis."""

from ._txnet import (
    TxnetError,
    __version__,
    adjusted_rand_index,
    bh_adjust,
    cluster_edges,
    de_contrast,
    fit_lmm,
    glasso,
    ric_lambda,
    run_pipeline,
    simulate,
    tmm_factors,
)

__all__ = [
    "TxnetError",
    "adjusted_rand_index",
    "bh_adjust",
    "cluster_edges",
    "de_contrast",
    "fit_lmm",
    "glasso",
    "ric_lambda",
    "run_pipeline",
    "simulate",
    "tmm_factors",
]
