"""Exception type for failed internal verification (identity/tolerance checks)."""


class VerificationError(RuntimeError):
    """An internal identity or tolerance check did not hold."""
