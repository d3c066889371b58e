"""Gaussian mixtures from moments: forward maps, moment inversion, EM baseline and variety tests."""

from .errors import (  # Re-export the exception hierarchy eagerly
    CandidateRejected,
    ConfigError,
    DimensionError,
    DomainError,
    MomentError,
    PreconditionError,
)

__version__ = "0.1.0"

_LAZY = {
    "MixtureModel": "models",
    "GaussianComponent": "models",
    "FitReport": "models",
    "PearsonCandidate": "models",
    "MembershipVerdict": "models",
    "EMOptions": "models",
    "EMResult": "models",
    "TruncatedSeries": "series",
    "MomentVector": "moments",
    "Dataset": "moments",
    "mixture_moments": "moments",
    "sample_moments": "moments",
    "CumulantVector": "cumulants",
    "moments_to_cumulants": "cumulants",
    "cumulants_to_moments": "cumulants",
    "real_roots": "rootfind",
    "fit_mom": "pearson",
    "em_fit": "em",
    "log_likelihood": "em",
    "special_data": "datasets",
    "sample_mixture": "datasets",
    "Settings": "config",
    "load_settings": "config",
}

__all__ = [
    "CandidateRejected",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "MomentError",
    "PreconditionError",
    *_LAZY,
]


def __getattr__(name: str):  # pragma: no cover - module attribute hook
    if name in _LAZY:
        from importlib import import_module

        return getattr(import_module(f".{_LAZY[name]}", __name__), name)
    raise AttributeError(name)


def __dir__():  # pragma: no cover - interactive helper
    return sorted(__all__)
