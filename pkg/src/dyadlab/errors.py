"""Shared exception types."""


class CapExceededError(RuntimeError):
    """A configured resource cap (basis size, subset count) was exceeded."""
