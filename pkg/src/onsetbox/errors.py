"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Bad parameters or inconsistent in-memory data."""


class FormatError(Exception):
    """A file on disk could not be parsed or decoded."""
