"""Exception hierarchy shared by every mfgp module."""


class MFGPError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(MFGPError, ValueError):
    pass


class NotPositiveDefinite(MFGPError):
    """Cholesky failed even at the largest permitted jitter."""

    def __init__(self, message, jitter_tried=None):
        super().__init__(message)
        self.jitter_tried = jitter_tried


class TooFewPoints(MFGPError, ValueError):
    pass


class MissingGradients(MFGPError, ValueError):
    pass


class NotNested(MFGPError, ValueError):
    pass


class DuplicateLocations(MFGPError, ValueError):
    pass


class AllCandidatesFailed(MFGPError):
    pass


class ParseError(MFGPError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingColumns(ParseError):
    pass


class NonNestedDesign(NotNested):
    pass


class ZeroTruthNorm(MFGPError, ValueError):
    pass


class ModelFormatError(MFGPError, ValueError):
    pass


class InconsistentVariance(MFGPError):
    """A posterior variance came out more negative than round-off allows."""


class TrainingFailed(MFGPError):
    """Training of a named model failed numerically."""

    def __init__(self, model, cause, jitter_tried=None):
        state = "" if jitter_tried is None else f" (jitter escalated to {jitter_tried:.1e})"
        super().__init__(f"{model} training failed: {cause}{state}")
        self.model = model
        self.cause = cause
        self.jitter_tried = jitter_tried
