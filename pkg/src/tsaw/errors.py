class BudgetExhausted(RuntimeError):
    """A simulation hit its event/site/span budget before its stopping rule."""


class EmptyPath(ValueError):
    """The requested edge was never touched by the trajectory."""


class ConfigError(ValueError):
    pass


class UndersizedSample(ValueError):
    pass
