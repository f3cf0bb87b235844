"""Exceptions raised across the package."""

import numpy as np


class MfError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(MfError, np.linalg.LinAlgError):
    """A Hermitian factorization hit a pivot below tolerance; load the diagonal and retry."""


class DegenerateDenominator(MfError, ArithmeticError):
    pass


class ZeroSpeechPsd(MfError, ArithmeticError):
    pass


class SignalTooShort(MfError, ValueError):
    pass


class ConfigMismatch(MfError, ValueError):
    pass


class ConfigInvalid(MfError, ValueError):
    pass


class BinCountMismatch(MfError, ValueError):
    pass


class OrderMismatch(MfError, ValueError):
    pass


class ZeroReference(MfError, ValueError):
    pass


class LengthMismatch(MfError, ValueError):
    pass


class RefMismatch(MfError, ValueError):
    """The noisy input is not the sum of the clean and noise references."""


class MissingReference(MfError, ValueError):
    pass


class WeightFileError(MfError, ValueError):
    pass
