"""Exception types shared across the package."""


class SpanError(ValueError):
    """A noun-phrase span is out of bounds, overlapping, or otherwise malformed."""


class ArpaError(ValueError):
    """ARPA model file could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class WeightsFormatError(ValueError):
    """LSTM weight container is truncated or has the wrong magic/version."""


class SearchSpaceError(ValueError):
    """Exhaustive search refused: too many phrases to enumerate."""


class AlignmentError(ValueError):
    """Hypothesis and reference corpora do not line up (length or bag mismatch)."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss; carries epoch and window index."""

    def __init__(self, epoch: int, window: int):
        self.epoch = epoch
        self.window = window
        super().__init__(f"non-finite loss at epoch {epoch}, window {window}")


class VocabularyMismatchError(ValueError):
    """Model vocabulary and instance vocabulary disagree."""
