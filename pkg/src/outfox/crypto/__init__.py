"""The four primitives composed by the packet format: KEM, KDF, AEAD, SE."""

from outfox.crypto.aead import aead_open, aead_seal
from outfox.crypto.kdf import KdfContext, LayerKeys, kdf_derive
from outfox.crypto.kem import (
    MLKEM768,
    PRODUCTION_SUITES,
    SUITES,
    TESTKEM,
    X25519,
    XWING,
    KemKeyPair,
    KemSuite,
    SuiteId,
    get_suite,
    kem_decap,
    kem_encap,
    kem_keygen,
)
from outfox.crypto.lioness import se_decrypt, se_encrypt

__all__ = [
    "KdfContext", "KemKeyPair", "KemSuite", "LayerKeys", "MLKEM768", "PRODUCTION_SUITES",
    "SUITES", "SuiteId", "TESTKEM", "X25519", "XWING", "aead_open", "aead_seal", "get_suite",
    "kdf_derive", "kem_decap", "kem_encap", "kem_keygen", "se_decrypt", "se_encrypt",
]
