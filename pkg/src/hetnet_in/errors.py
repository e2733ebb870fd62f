"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class IntegrationError(RuntimeError):
    """Numerical quadrature failed to reach the requested accuracy."""


class ConsistencyError(RuntimeError):
    """An internal sanity check failed; this signals an implementation bug."""


class ConfigError(ValueError):
    """An experiment configuration violates a model invariant.

    ``messages`` holds one human-readable line per violated field.
    """

    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
