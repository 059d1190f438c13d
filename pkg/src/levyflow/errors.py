"""Exception and warning types shared across the package."""


class LevyflowError(Exception):
    """Base class for all package errors."""


class ConfigError(LevyflowError):
    """Invalid or inconsistent run configuration."""


class DataError(LevyflowError):
    """Input data cannot be used as requested."""


# corpus ---------------------------------------------------------------

class EmptyCorpus(DataError):
    """Cleaning removed every token."""


class TooShort(DataError):
    """Stream does not contain at least two full chunks."""


class ThreadError(DataError):
    """Malformed threaded-discussion document."""


class MissingParent(ThreadError):
    """A comment references a parent id that does not exist."""


class DuplicateId(ThreadError):
    """Two nodes share an id."""


class MultipleRoots(ThreadError):
    """More than one node lacks a parent id."""


class CycleDetected(ThreadError):
    """Parent links do not form a tree rooted at the submission."""


# topics ---------------------------------------------------------------

class VocabularyTooSmall(DataError):
    """Fewer distinct word types than requested topics."""


# simplex / levy -------------------------------------------------------

class InfiniteDivergence(LevyflowError):
    """KL divergence is infinite: p puts mass where q has none."""


class DimensionNotThree(LevyflowError):
    """Barycentric density grids are only defined for three topics."""


# inference / flow / trees ---------------------------------------------

class DegenerateSample(DataError):
    """All sample values identical; no density can be estimated."""


class DegenerateCovariance(LevyflowError):
    """Covariance is singular; Mahalanobis distance undefined."""


class EmptyTree(DataError):
    """Tree has no comments below the submission."""


class ConstantPredictor(DataError):
    """Regression predictor has zero variance."""


# warnings -------------------------------------------------------------

class NumericalWarning(UserWarning):
    """Base class for warnings that `--strict` escalates to a failure."""


class NonConvergenceWarning(NumericalWarning):
    """Fixed-point iteration stopped at the iteration cap."""


class GridBoundaryWarning(NumericalWarning):
    """Posterior argmax sits on the grid boundary; estimates may be truncated."""
