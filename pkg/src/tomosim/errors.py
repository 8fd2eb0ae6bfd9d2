"""Exception hierarchy shared by all tomosim modules."""


class TomosimError(Exception):
    """Base class for every error raised by tomosim."""


class InputError(TomosimError, ValueError):
    """Malformed or inconsistent input. The CLI maps these to exit code 2."""


class ResourceCapError(TomosimError):
    """A configured size cap was exceeded. The CLI maps these to exit code 3."""


class InvalidLabel(InputError):
    pass


class InvalidDimension(InputError):
    pass


class InvalidSites(InputError):
    pass


class ShapeError(InputError):
    pass


class InvalidDensityMatrix(InputError):
    pass


class InvalidChannel(InputError):
    pass


class InvalidShots(InputError):
    pass


class InvalidMode(InputError):
    """Fermionic mode index out of range."""


class InvalidTolerance(InputError):
    pass


class ZeroInput(InputError):
    pass


class TooLarge(ResourceCapError):
    pass


class TooManySites(ResourceCapError):
    pass


class LocalityCap(ResourceCapError):
    pass


class NumericalInconsistency(TomosimError, ArithmeticError):
    """Two computation routes that must agree did not."""
