"""Exception types shared across the simulator."""


class IfnsimError(Exception):
    """Base class for all simulator errors."""


class ShapeError(IfnsimError):
    """A spike waveform with structurally invalid geometry was evaluated."""


class ConfigError(IfnsimError):
    """Invalid network, stimulus, or simulation configuration."""


class ContractError(IfnsimError):
    """A state-machine operation was called out of order."""
