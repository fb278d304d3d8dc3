"""Exception types shared by all modules."""


class VerificationError(Exception):
    """Base class for contract violations raised by the engine."""


class DimensionError(VerificationError, ValueError):
    pass


class ShapeError(VerificationError, ValueError):
    pass


class PoleError(VerificationError, ValueError):
    """A Gamma argument or a printed denominator hits a pole."""


class DivergenceError(VerificationError, ValueError):
    pass


class UnsupportedIdentityError(VerificationError, ValueError):
    pass


class NoRealRootError(VerificationError, ValueError):
    pass


class JetOrderError(VerificationError, ValueError):
    pass


class AccuracyError(VerificationError, RuntimeError):
    pass
