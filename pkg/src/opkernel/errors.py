"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user input: malformed files, violated invariants, bad flags."""


class ComputeError(RuntimeError):
    """Numeric failure during kernel or model computation."""


class BudgetError(ComputeError):
    """Exact enumeration refused because the pattern budget was exceeded."""
