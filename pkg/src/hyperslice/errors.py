"""Exception types raised across the package."""


class InvalidInput(ValueError):
    """Malformed or inconsistent arguments (dimension mismatch, bad composition...)."""


class ResourceGuard(RuntimeError):
    """Requested computation exceeds a configured size limit."""


class DegenerateConfig(ValueError):
    """Search configuration admits no valid move."""


class NotFound(KeyError):
    """Lookup key has no stored value."""
