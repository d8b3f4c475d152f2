"""Lioness wide-block cipher (Anderson and Biham) over arbitrary-length blocks.

The block is split into a 32-byte left half L and the remainder R. Four
unbalanced Feistel rounds alternate a stream cipher (ChaCha20 keyed by
``L xor K``) and a keyed hash (BLAKE2b-256 over R)::

    R ^= S(L ^ K1);  L ^= H_K2(R);  R ^= S(L ^ K3);  L ^= H_K4(R)

Encryption and decryption are mutually inverse permutations, so either order
of composition is the identity.
"""

from __future__ import annotations

import hashlib

from outfox import counters
from outfox.crypto.aead import chacha_stream, xor_bytes

HALF = 32
MIN_BLOCK = HALF + 1


def _subkeys(key: bytes) -> tuple[bytes, bytes, bytes, bytes]:
    if not 16 <= len(key) <= 64:
        raise ValueError("Lioness key must be 16..64 bytes")
    return tuple(  # type: ignore[return-value]
        hashlib.blake2b(bytes([i]), key=key, digest_size=HALF, person=b"lioness-subkey").digest()
        for i in range(4)
    )


def _hash(key: bytes, data: bytes) -> bytes:
    return hashlib.blake2b(data, key=key, digest_size=HALF).digest()


def _check(block: bytes, length: int | None) -> None:
    if len(block) < MIN_BLOCK:
        raise ValueError(f"Lioness block must be at least {MIN_BLOCK} bytes")
    if length is not None and len(block) != length:
        raise ValueError(f"block length {len(block)} != configured payload length {length}")


def se_encrypt(key: bytes, block: bytes, length: int | None = None) -> bytes:
    _check(block, length)
    counters.record("se_encrypt")
    k1, k2, k3, k4 = _subkeys(key)
    left, right = block[:HALF], block[HALF:]
    right = xor_bytes(right, chacha_stream(xor_bytes(left, k1), len(right)))
    left = xor_bytes(left, _hash(k2, right))
    right = xor_bytes(right, chacha_stream(xor_bytes(left, k3), len(right)))
    left = xor_bytes(left, _hash(k4, right))
    return left + right


def se_decrypt(key: bytes, block: bytes, length: int | None = None) -> bytes:
    _check(block, length)
    counters.record("se_decrypt")
    k1, k2, k3, k4 = _subkeys(key)
    left, right = block[:HALF], block[HALF:]
    left = xor_bytes(left, _hash(k4, right))
    right = xor_bytes(right, chacha_stream(xor_bytes(left, k3), len(right)))
    left = xor_bytes(left, _hash(k2, right))
    right = xor_bytes(right, chacha_stream(xor_bytes(left, k1), len(right)))
    return left + right
