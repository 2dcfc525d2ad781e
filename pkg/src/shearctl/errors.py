"""Exception hierarchy shared across the toolkit."""


class ShearctlError(Exception):
    """Base class for all toolkit errors."""


class ModelError(ShearctlError):
    """Invalid structural model definition (bad masses, singular stiffness, ...)."""


class ParameterError(ShearctlError):
    """Invalid numerical parameters (time step, Newmark constants, ...)."""


class FormatError(ShearctlError):
    """File does not conform to its declared on-disk format."""


class ConfigError(ShearctlError):
    """Invalid or incomplete configuration (missing files, bad field values)."""


class ContractError(ShearctlError):
    """Caller violated an interface contract (wrong dimensions, bad action)."""


class LifecycleError(ShearctlError):
    """Operation called in the wrong phase (e.g. step after episode end)."""


class NumericalError(ShearctlError):
    """A numerical routine failed to produce a trustworthy result."""
