class ConfigurationError(ValueError):
    """Invalid dimension, count, base, or sampler/size combination."""


class PreconditionError(ValueError):
    """Arguments violate an operation's documented precondition."""
