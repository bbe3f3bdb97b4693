"""Unit-Modified Weibull distribution, quantile regression and diagnostics."""

from ._core import (
    ConvergenceFailure,
    DomainError,
    UmwOverflowError,
    RankDeficientDesign,
    SingularInformation,
    UmwError,
    UmwParams,
    __version__,
    cdf,
    fit,
    fit_regression,
    gof,
    hazard,
    info_criteria,
    log_pdf,
    loglik,
    observed_information,
    pdf,
    presets,
    quantile,
    quantile_residuals,
    r2_generalized,
    sample,
    score,
    simulate,
    wald_test,
)

__all__ = [
    "ConvergenceFailure",
    "DomainError",
    "UmwOverflowError",
    "RankDeficientDesign",
    "SingularInformation",
    "UmwError",
    "UmwParams",
    "__version__",
    "cdf",
    "fit",
    "fit_regression",
    "gof",
    "hazard",
    "info_criteria",
    "log_pdf",
    "loglik",
    "observed_information",
    "pdf",
    "presets",
    "quantile",
    "quantile_residuals",
    "r2_generalized",
    "sample",
    "score",
    "simulate",
    "wald_test",
]
