"""Key encapsulation mechanisms behind one uniform interface.

Four suites are offered:

* ``X25519``   -- ephemeral-static Diffie-Hellman used as a KEM.
* ``MLKEM768`` -- FIPS 203 ML-KEM-768 (implicit rejection).
* ``XWING``    -- X25519 + ML-KEM-768 hybrid with a SHA3-256 combiner.
* ``TESTKEM``  -- a hash-based toy KEM whose every output is a function of the
  caller's rng. It offers no secrecy and exists only for reproducible vectors.

Randomness is always drawn from a caller-supplied ``random.Random``-like
object exposing ``randbytes``. Pass ``random.SystemRandom()`` for real use and
a seeded ``random.Random`` for reproducible runs. ML-KEM encapsulation draws
its coins inside the backend and is therefore not reproducible from the rng.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field

from cryptography.hazmat.primitives.asymmetric import mlkem, x25519

from outfox import counters
from outfox.errors import DecapsulationError

_SYSTEM_RNG = random.SystemRandom()


def default_rng() -> random.Random:
    return _SYSTEM_RNG


class SuiteId(enum.IntEnum):
    TESTKEM = 0
    X25519 = 1
    MLKEM768 = 2
    XWING = 3


@dataclass(frozen=True)
class KemSuite:
    id: SuiteId
    public_key_len: int
    secret_key_len: int
    ciphertext_len: int
    shared_key_len: int

    @property
    def name(self) -> str:
        return self.id.name.lower()

    @property
    def ciphertext_bits(self) -> int:
        return 8 * self.ciphertext_len


TESTKEM = KemSuite(SuiteId.TESTKEM, 32, 32, 32, 32)
X25519 = KemSuite(SuiteId.X25519, 32, 32, 32, 32)
MLKEM768 = KemSuite(SuiteId.MLKEM768, 1184, 64, 1088, 32)
XWING = KemSuite(SuiteId.XWING, 1216, 32, 1120, 32)

SUITES: dict[SuiteId, KemSuite] = {s.id: s for s in (TESTKEM, X25519, MLKEM768, XWING)}
# suites offered on operator-facing interfaces
PRODUCTION_SUITES = (X25519, MLKEM768, XWING)


def get_suite(ident: "str | int | SuiteId | KemSuite") -> KemSuite:
    """Look a suite up by name (``"x25519"``), numeric id or enum member."""
    if isinstance(ident, KemSuite):
        return ident
    if isinstance(ident, str):
        key = ident.strip().upper().replace("-", "").replace("_", "")
        try:
            return SUITES[SuiteId[key]]
        except KeyError:
            raise ValueError(f"unsupported KEM suite {ident!r}") from None
    try:
        return SUITES[SuiteId(ident)]
    except ValueError:
        raise ValueError(f"unsupported KEM suite id {ident!r}") from None


@dataclass(frozen=True)
class KemKeyPair:
    suite: KemSuite
    secret: bytes = field(repr=False)
    public: bytes


# -- X25519 ---------------------------------------------------------------

def _x25519_public(secret: bytes) -> bytes:
    return x25519.X25519PrivateKey.from_private_bytes(secret).public_key().public_bytes_raw()


def _x25519_dh(secret: bytes, peer: bytes) -> bytes:
    try:
        return x25519.X25519PrivateKey.from_private_bytes(secret).exchange(
            x25519.X25519PublicKey.from_public_bytes(peer)
        )
    except ValueError as exc:  # all-zero output from a low-order point
        raise DecapsulationError("x25519: invalid public value") from exc


# -- X-Wing ---------------------------------------------------------------

_XWING_LABEL = b"\\.//^\\"


def _xwing_expand(seed: bytes) -> tuple[mlkem.MLKEM768PrivateKey, bytes]:
    expanded = hashlib.shake_256(seed).digest(96)
    return mlkem.MLKEM768PrivateKey.from_seed_bytes(expanded[:64]), expanded[64:]


def _xwing_combine(ss_m: bytes, ss_x: bytes, ct_x: bytes, pk_x: bytes) -> bytes:
    return hashlib.sha3_256(ss_m + ss_x + ct_x + pk_x + _XWING_LABEL).digest()


# -- TESTKEM --------------------------------------------------------------

def _testkem_public(secret: bytes) -> bytes:
    return hashlib.sha256(b"testkem/pk" + secret).digest()


def _testkem_shared(public: bytes, ct: bytes) -> bytes:
    return hashlib.sha256(b"testkem/ss" + public + ct).digest()


# -- uniform interface ----------------------------------------------------

def kem_keygen(suite: KemSuite, rng: random.Random | None = None) -> KemKeyPair:
    rng = rng or default_rng()
    sid = suite.id
    if sid is SuiteId.X25519:
        secret = rng.randbytes(32)
        public = _x25519_public(secret)
    elif sid is SuiteId.MLKEM768:
        secret = rng.randbytes(64)
        public = mlkem.MLKEM768PrivateKey.from_seed_bytes(secret).public_key().public_bytes_raw()
    elif sid is SuiteId.XWING:
        secret = rng.randbytes(32)
        sk_m, sk_x = _xwing_expand(secret)
        public = sk_m.public_key().public_bytes_raw() + _x25519_public(sk_x)
    elif sid is SuiteId.TESTKEM:
        secret = rng.randbytes(32)
        public = _testkem_public(secret)
    else:  # pragma: no cover
        raise ValueError(f"unsupported KEM suite {suite}")
    counters.record("kem_keygen")
    return KemKeyPair(suite, secret, public)


def public_from_secret(suite: KemSuite, secret: bytes) -> bytes:
    """Recompute the public key that belongs to ``secret``."""
    if len(secret) != suite.secret_key_len:
        raise ValueError(f"{suite.name}: secret key must be {suite.secret_key_len} bytes")
    if suite.id is SuiteId.X25519:
        return _x25519_public(secret)
    if suite.id is SuiteId.MLKEM768:
        return mlkem.MLKEM768PrivateKey.from_seed_bytes(secret).public_key().public_bytes_raw()
    if suite.id is SuiteId.XWING:
        sk_m, sk_x = _xwing_expand(secret)
        return sk_m.public_key().public_bytes_raw() + _x25519_public(sk_x)
    return _testkem_public(secret)


def kem_encap(suite: KemSuite, public_key: bytes, rng: random.Random | None = None) -> tuple[bytes, bytes]:
    """Return ``(shared_key, ciphertext)`` for ``public_key``."""
    if len(public_key) != suite.public_key_len:
        raise ValueError(f"{suite.name}: public key must be {suite.public_key_len} bytes")
    rng = rng or default_rng()
    sid = suite.id
    if sid is SuiteId.X25519:
        eph = rng.randbytes(32)
        ct = _x25519_public(eph)
        shared = _x25519_dh(eph, public_key)
    elif sid is SuiteId.MLKEM768:
        shared, ct = mlkem.MLKEM768PublicKey.from_public_bytes(public_key).encapsulate()
    elif sid is SuiteId.XWING:
        pk_m, pk_x = public_key[:1184], public_key[1184:]
        ss_m, ct_m = mlkem.MLKEM768PublicKey.from_public_bytes(pk_m).encapsulate()
        eph = rng.randbytes(32)
        ct_x = _x25519_public(eph)
        ss_x = _x25519_dh(eph, pk_x)
        shared, ct = _xwing_combine(ss_m, ss_x, ct_x, pk_x), ct_m + ct_x
    else:
        ct = rng.randbytes(32)
        shared = _testkem_shared(public_key, ct)
    counters.record("kem_encap")
    return shared, ct


def kem_decap(suite: KemSuite, secret_key: bytes, ciphertext: bytes) -> bytes:
    """Recover the shared key, or raise :class:`DecapsulationError`.

    ML-KEM and X-Wing never reject a well-sized ciphertext; a forged one
    yields a pseudorandom key that the caller's AEAD check will refuse.
    """
    counters.record("kem_decap")
    if len(ciphertext) != suite.ciphertext_len:
        raise DecapsulationError(
            f"{suite.name}: ciphertext must be {suite.ciphertext_len} bytes, got {len(ciphertext)}"
        )
    if len(secret_key) != suite.secret_key_len:
        raise ValueError(f"{suite.name}: secret key must be {suite.secret_key_len} bytes")
    sid = suite.id
    if sid is SuiteId.X25519:
        return _x25519_dh(secret_key, ciphertext)
    if sid is SuiteId.MLKEM768:
        sk = mlkem.MLKEM768PrivateKey.from_seed_bytes(secret_key)
        try:
            return sk.decapsulate(ciphertext)
        except ValueError as exc:
            raise DecapsulationError(str(exc)) from exc
    if sid is SuiteId.XWING:
        sk_m, sk_x = _xwing_expand(secret_key)
        ct_m, ct_x = ciphertext[:1088], ciphertext[1088:]
        try:
            ss_m = sk_m.decapsulate(ct_m)
        except ValueError as exc:
            raise DecapsulationError(str(exc)) from exc
        ss_x = _x25519_dh(sk_x, ct_x)
        return _xwing_combine(ss_m, ss_x, ct_x, _x25519_public(sk_x))
    return _testkem_shared(_testkem_public(secret_key), ciphertext)
