"""On-disk key format.

    magic (4 bytes: b"OFK1" public / b"OFS1" secret)
    suite id (1 byte)
    key length (2 bytes, big-endian)
    raw key bytes
"""

from __future__ import annotations

import struct
from pathlib import Path

from outfox.crypto.kem import KemKeyPair, KemSuite, get_suite, public_from_secret

PUBLIC_MAGIC = b"OFK1"
SECRET_MAGIC = b"OFS1"
_HEAD = struct.Struct(">4sBH")


class KeyFileError(ValueError):
    pass


def encode_key(suite: KemSuite, key: bytes, secret: bool = False) -> bytes:
    magic = SECRET_MAGIC if secret else PUBLIC_MAGIC
    return _HEAD.pack(magic, int(suite.id), len(key)) + key


def decode_key(data: bytes) -> tuple[KemSuite, bytes, bool]:
    """Return ``(suite, key, is_secret)``."""
    if len(data) < _HEAD.size:
        raise KeyFileError("key file truncated")
    magic, suite_id, length = _HEAD.unpack_from(data)
    if magic not in (PUBLIC_MAGIC, SECRET_MAGIC):
        raise KeyFileError(f"bad magic {magic!r}")
    try:
        suite = get_suite(suite_id)
    except ValueError as exc:
        raise KeyFileError(str(exc)) from None
    key = data[_HEAD.size:]
    if len(key) != length:
        raise KeyFileError(f"declared length {length} but {len(key)} key bytes present")
    secret = magic == SECRET_MAGIC
    expected = suite.secret_key_len if secret else suite.public_key_len
    if length != expected:
        raise KeyFileError(f"{suite.name} key must be {expected} bytes")
    return suite, key, secret


def write_keypair(pair: KemKeyPair, stem: str | Path) -> tuple[Path, Path]:
    """Write ``<stem>.pk`` and ``<stem>.sk``; return both paths."""
    stem = Path(stem)
    pk_path, sk_path = stem.with_name(stem.name + ".pk"), stem.with_name(stem.name + ".sk")
    pk_path.write_bytes(encode_key(pair.suite, pair.public))
    sk_path.write_bytes(encode_key(pair.suite, pair.secret, secret=True))
    return pk_path, sk_path


def read_public(path: str | Path) -> tuple[KemSuite, bytes]:
    suite, key, secret = decode_key(Path(path).read_bytes())
    if secret:
        raise KeyFileError(f"{path} holds a secret key")
    return suite, key


def read_keypair(path: str | Path) -> KemKeyPair:
    suite, key, secret = decode_key(Path(path).read_bytes())
    if not secret:
        raise KeyFileError(f"{path} holds a public key")
    return KemKeyPair(suite, key, public_from_secret(suite, key))
