"""Exception hierarchy shared by every stage of the pipeline."""


class DominoError(Exception):
    """Base class for all toolkit errors."""


class IllConditioned(DominoError, ValueError):
    """The (subcarrier set, tap set) pairing gives a near-singular Gram matrix."""


class LayoutMismatch(DominoError, ValueError):
    pass


class LengthMismatch(DominoError, ValueError):
    pass


class EmptySignal(DominoError, ValueError):
    """Every CIR tap sits below the noise floor; the frame is unusable."""


class DominantTapTooWeak(DominoError, ValueError):
    pass


class RefNotActive(DominoError, ValueError):
    pass


class TooShort(DominoError, ValueError):
    pass


class NoPeak(DominoError, ValueError):
    """No spectral peak stands clear of the background in the band."""


class ConfigError(DominoError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TraceFormatError(DominoError, ValueError):
    pass
