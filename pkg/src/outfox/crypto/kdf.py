"""Per-layer key derivation from a KEM shared key."""

from __future__ import annotations

from dataclasses import dataclass, field

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from outfox import counters

MAX_OUTPUT = 255 * 32


@dataclass(frozen=True)
class KdfContext:
    kem_ciphertext: bytes
    public_key: bytes
    session_id: bytes = b""

    def encode(self) -> bytes:
        # Ciphertext and key widths are fixed per suite, so plain
        # concatenation is unambiguous.
        return self.kem_ciphertext + self.public_key + self.session_id


@dataclass(frozen=True)
class LayerKeys:
    header_key: bytes = field(repr=False)
    payload_key: bytes = field(repr=False)

    @classmethod
    def split(cls, okm: bytes, header_key_len: int) -> "LayerKeys":
        return cls(okm[:header_key_len], okm[header_key_len:])


def kdf_derive(shared_key: bytes, ctx: KdfContext, length: int) -> bytes:
    """HKDF-SHA256 without salt; ``length`` is in bytes."""
    if not 0 < length <= MAX_OUTPUT:
        raise ValueError(f"KDF output length must be in 1..{MAX_OUTPUT} bytes")
    counters.record("kdf")
    return HKDF(algorithm=hashes.SHA256(), length=length, salt=None, info=ctx.encode()).derive(shared_key)
