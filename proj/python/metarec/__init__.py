"""Python bindings for the metarec classifier recommender."""

from ._core import (
    MetarecError,
    __version__,
    agreement,
    cdf_auc,
    default_grid,
    evaluate,
    feature_names,
    featurize,
    generate_corpus,
    permutation_test,
    recommend,
    run,
)

__all__ = [
    "MetarecError",
    "__version__",
    "agreement",
    "cdf_auc",
    "default_grid",
    "evaluate",
    "feature_names",
    "featurize",
    "generate_corpus",
    "permutation_test",
    "recommend",
    "run",
]
