"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """A caller supplied malformed input (unknown label, duplicate id, bad shape)."""


class DomainError(ValueError):
    """Inputs are well-formed but mathematically unusable (zero norm, zero denominator)."""
