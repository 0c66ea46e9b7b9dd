"""Shared exception types."""


class SpecParseError(ValueError):
    """A distribution / policy / stream / config spec string failed to parse."""


class RegularityError(ValueError):
    """A distribution failed a regularity check required by a mechanism."""
