"""Length-preserving, key-committing AEAD for packet headers.

Every header key is used exactly once, so the nonce is fixed at zero. The
ChaCha20 keystream under the header key yields a 32-byte MAC key followed by
the encryption pad; the tag is HMAC-SHA256 over the ciphertext, truncated to
``tag_len`` bytes. Because HMAC-SHA256 is collision resistant, the tag binds
the key: opening the same ``(beta, gamma)`` under another key fails.
"""

from __future__ import annotations

import hashlib
import hmac

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from outfox import counters
from outfox.errors import HeaderFailure

KEY_LEN = 32
_ZERO_NONCE = bytes(16)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    n = len(a)
    return (int.from_bytes(a, "little") ^ int.from_bytes(b[:n], "little")).to_bytes(n, "little")


def chacha_stream(key: bytes, n: int) -> bytes:
    encryptor = Cipher(algorithms.ChaCha20(key, _ZERO_NONCE), mode=None).encryptor()
    return encryptor.update(bytes(n))


def _keystream(key: bytes, n: int) -> tuple[bytes, bytes]:
    if len(key) != KEY_LEN:
        raise ValueError(f"AEAD key must be {KEY_LEN} bytes")
    stream = chacha_stream(key, KEY_LEN + n)
    return stream[:KEY_LEN], stream[KEY_LEN:]


def _tag(mac_key: bytes, beta: bytes, tag_len: int) -> bytes:
    return hmac.new(mac_key, beta, hashlib.sha256).digest()[:tag_len]


def aead_seal(key: bytes, plaintext: bytes, tag_len: int = 16) -> tuple[bytes, bytes]:
    """Return ``(beta, gamma)`` with ``len(beta) == len(plaintext)``."""
    if not 16 <= tag_len <= 32:
        raise ValueError("tag length must be 16..32 bytes")
    counters.record("aead_seal")
    mac_key, pad = _keystream(key, len(plaintext))
    beta = xor_bytes(plaintext, pad)
    return beta, _tag(mac_key, beta, tag_len)


def aead_open(key: bytes, beta: bytes, gamma: bytes) -> bytes:
    """Return the plaintext or raise :class:`HeaderFailure`."""
    counters.record("aead_open")
    if not 16 <= len(gamma) <= 32:
        raise HeaderFailure("malformed authentication tag")
    mac_key, pad = _keystream(key, len(beta))
    if not hmac.compare_digest(_tag(mac_key, beta, len(gamma)), gamma):
        raise HeaderFailure("header authentication failed")
    return xor_bytes(beta, pad)
