"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A distribution or model parameter lies outside its domain."""


class DataValidationError(ValueError):
    """Input data violate the recording conventions (bad row, PET range...)."""


class ConfigError(ValueError):
    """A study configuration file is malformed or incomplete."""


class EstimationError(ValueError):
    """An estimate is undefined for the given data (e.g. no exceedances)."""


class InitializationError(RuntimeError):
    """The sampler cannot start because the target is not finite at init."""
