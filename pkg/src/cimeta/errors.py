"""Exception hierarchy shared across the package."""


class CimetaError(Exception):
    """Base class for all domain errors raised by this package."""


class UnknownVariable(CimetaError):
    """A referenced variable name is not among the labels."""


class DimensionMismatch(CimetaError):
    """Two labeled objects disagree on labels or ordering."""


class SingularConditioningSet(CimetaError):
    """A conditioning block is numerically singular (cond >= 1e12)."""


class DegenerateVariance(CimetaError):
    """A conditional variance collapsed to (numerical) zero."""


class DivergentInformation(CimetaError):
    """|partial correlation| is numerically 1; mutual information diverges."""


class NonPSDResult(CimetaError):
    """A computed covariance matrix failed the positive-semidefinite check."""


class InfeasibleStandardization(CimetaError):
    """Requested SEM coefficients admit no positive noise variance."""


class TooFewRows(CimetaError):
    """Dataset has too few rows for the requested statistic."""


class InsufficientSamples(CimetaError):
    """Sample size too small for the Fisher-Z test with this conditioning set."""


class InvalidSubsampleSize(CimetaError):
    """Subsample size outside [2, n]."""


class AllReplicatesDegenerate(CimetaError):
    """Every bootstrap replicate failed; no frequencies can be reported."""


class RankDeficientParents(CimetaError):
    """A parent design matrix is rank-deficient; OLS fit is not identified."""


class InternalConsistencyError(CimetaError):
    """A quantity violated an internal identity beyond roundoff tolerance."""


class ConfigError(CimetaError):
    """A config or spec file failed to parse."""
