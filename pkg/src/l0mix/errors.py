"""Exception types shared across the package."""


class ContractError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class DivergenceError(ArithmeticError):
    """Raised when a filter's tap vector stops being finite.

    Attributes
    ----------
    iteration : int or None
        Sample index at which the non-finite update happened.
    filter_index : int or None
        1-based index of the offending component filter.
    run_index : int or None
        Ensemble member that diverged, when known.
    """

    def __init__(self, message, iteration=None, filter_index=None, run_index=None):
        self.iteration = iteration
        self.filter_index = filter_index
        self.run_index = run_index
        ctx = []
        if run_index is not None:
            ctx.append(f"run={run_index}")
        if iteration is not None:
            ctx.append(f"n={iteration}")
        if filter_index is not None:
            ctx.append(f"filter={filter_index}")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)


class ConfigError(ValueError):
    """Bad configuration document or override."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        if where:
            message = f"{' '.join(where)}: {message}"
        super().__init__(message)
