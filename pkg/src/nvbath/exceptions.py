"""Exception hierarchy shared by every module."""


class NVBathError(Exception):
    """Base class for all errors raised by nvbath."""


class NumericalError(NVBathError):
    """A numerical procedure could not produce a trustworthy answer."""


class DegenerateSteadyState(NumericalError):
    """The generator has more than one stationary state."""


class NoStationaryState(NumericalError):
    """No vector in the numerical kernel satisfies the stationarity residual."""


class SingularResolvent(NumericalError):
    """(L + i w) cannot be inverted on the requested operand."""


class NegativeRate(NumericalError):
    """A second-order rate came out negative beyond round-off."""


class DivergentSqueezingTime(NumericalError):
    """The squeezing curvature vanishes, so the squeezing time is infinite."""


class NoFixedPoint(NumericalError):
    """The feedback map H(h) - h has no root inside [-h_max, h_max]."""


class FactorNonpositive(NumericalError):
    """The factor 1 - h H(h) / h_max**2 is not positive inside the grid."""


class ConfigError(NVBathError):
    """Invalid scenario configuration."""
