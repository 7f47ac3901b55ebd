"""Exception types shared across the solver."""


class ConfigError(ValueError):
    """Invalid configuration: bad key, bad type, or out-of-range value."""


class CoercivityError(RuntimeError):
    """The assembled operator failed its positive-definiteness check.

    Signals a rate outside the validated range or an assembly bug; the
    factorization that raised it is named in the message.
    """


class NoUnstableBranchError(RuntimeError):
    """Requested spectral branch carries no unstable growth rate."""


class NumericalError(RuntimeError):
    """A linear solve or eigensolve failed to meet its tolerance."""
