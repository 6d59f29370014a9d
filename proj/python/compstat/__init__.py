"""Compression-based statistics.

Lossless code lengths as statistical evidence: conditional compression
lengths drive a two-sample homogeneity test, 2x2 association coefficients,
and a nearest-reference classifier. Markov sources and entropy helpers
support calibration studies.
"""

from ._core import (
    CompstatError,
    MarkovModel,
    associate,
    bernoulli_model,
    binary_flip_model,
    classify,
    compress_length,
    conditional_length,
    entropy_m,
    generate,
    homogeneity_test,
    kl_divergence,
    kraft_sum,
    limit_entropy,
    markov_model,
)

__all__ = [
    "CompstatError",
    "MarkovModel",
    "associate",
    "bernoulli_model",
    "binary_flip_model",
    "classify",
    "compress_length",
    "conditional_length",
    "entropy_m",
    "generate",
    "homogeneity_test",
    "kl_divergence",
    "kraft_sum",
    "limit_entropy",
    "markov_model",
]

__version__ = "0.1.0"
