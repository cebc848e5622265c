class InvariantViolation(AssertionError):
    """A sample broke a property that holds almost surely (or by construction)."""
