class ContractViolation(ValueError):
    """A caller broke an operation's precondition (e.g. a masked action)."""


class InfeasibleLinkError(ValueError):
    """Transmission requested over a link with zero rate."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
