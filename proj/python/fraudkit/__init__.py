"""Claims fraud analytics: trigger rules, a boosted-tree classifier, and
month-wise correlation/regression between fraud and epidemic rates."""

from fraudkit._core import (  # noqa: F401
    BoostedModel,
    ClaimRecord,
    DataError,
    DescriptiveStats,
    GbmParams,
    RegressionFit,
    UsageError,
    analyze,
    auc,
    builtin_rules,
    confusion,
    descriptive_stats,
    evaluate_triggers,
    f1_score,
    fit_gbm,
    fit_linear,
    fit_logarithmic,
    generate_synthetic,
    load_claims,
    monthly_series,
    pearson,
    residuals,
    roc_curve,
    train_test_split,
    __version__,
)
