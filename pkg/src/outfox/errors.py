"""Exception hierarchy shared by every layer of the package."""


class OutfoxError(Exception):
    """Base class for all errors raised by this package."""


class DecapsulationError(OutfoxError):
    """A KEM rejected a ciphertext (malformed or invalid)."""


class HeaderFailure(OutfoxError):
    """Header processing failed: wrong recipient or a tampered c/beta/gamma."""


class PayloadFailure(OutfoxError):
    """Payload processing failed: the zero padding did not verify."""


class MessageSpaceError(OutfoxError, ValueError):
    """A message is not a member of the fixed-length message space."""


class RouteError(OutfoxError, ValueError):
    """A route has the wrong length or inconsistent routing information."""


class DirectoryError(OutfoxError):
    """Duplicate registration or other directory misuse."""


class ProtocolAbort(OutfoxError):
    """A party aborted a protocol phase."""

    def __init__(self, reason: str, party: str | None = None):
        super().__init__(f"{party}: {reason}" if party else reason)
        self.reason = reason
        self.party = party
