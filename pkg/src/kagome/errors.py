"""Exceptions shared across the package."""


class KagomeError(Exception):
    """Base class for domain errors."""


class NotTileable(KagomeError):
    """The region admits no tiling."""


class NotFlippable(KagomeError):
    """No flip is available at the requested vertex."""


class EnumerationCapExceeded(KagomeError):
    """State-space enumeration hit its node cap."""

    def __init__(self, cap: int):
        super().__init__(f"enumeration exceeded node cap {cap}")
        self.cap = cap


class OrderViolation(KagomeError):
    """Coupled chains left the pointwise height order."""
