"""Exception base for the whole package."""


class SaddleCertError(Exception):
    """Base class; every error raised by this package derives from it."""
