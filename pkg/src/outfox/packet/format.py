"""Wire types: packet format parameters, headers, packets, routing info, SURBs."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Union

from outfox.crypto.aead import KEY_LEN as HEADER_KEY_LEN
from outfox.crypto.kem import KemSuite, get_suite
from outfox.errors import HeaderFailure
from outfox.packet.sizes import SizeProfile

ALLOWED_K = (128, 256)


@dataclass(frozen=True)
class PacketFormat:
    """Everything a party needs to build or parse packets of one deployment."""

    suite: KemSuite
    k: int = 128
    layers: int = 5
    msg_len: int = 1024
    session_id: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "suite", get_suite(self.suite))
        if self.k not in ALLOWED_K:
            raise ValueError(f"k must be one of {ALLOWED_K}")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")

    @property
    def profile(self) -> SizeProfile:
        return SizeProfile(self.k, self.suite.ciphertext_bits, self.layers, self.msg_len)

    @property
    def kbytes(self) -> int:
        return self.k // 8

    @property
    def id_len(self) -> int:
        return self.k // 8

    @property
    def tag_len(self) -> int:
        return self.k // 8

    @property
    def ct_len(self) -> int:
        return self.suite.ciphertext_len

    @property
    def header_key_len(self) -> int:
        return HEADER_KEY_LEN

    @property
    def payload_key_len(self) -> int:
        return self.k // 8

    @property
    def kdf_len(self) -> int:
        return self.header_key_len + self.payload_key_len

    @property
    def payload_len(self) -> int:
        return self.profile.payload_len

    @property
    def surb_len(self) -> int:
        return self.profile.surb_len


# -- routing information ----------------------------------------------------

@dataclass(frozen=True)
class NextHop:
    party: bytes


@dataclass(frozen=True)
class Terminal:
    """Reply routing handed to a receiver: exit gateway and first reply node."""

    exit_gateway: bytes
    first_node: bytes


RoutingInfo = Union[NextHop, Terminal, None]

_TERMINAL_FLAG = 0x01


def encode_routing(fmt: PacketFormat, info: RoutingInfo, innermost: bool) -> bytes:
    """Fixed-width encoding: k bits for hops, 3k bits at the innermost layer."""
    n = fmt.id_len
    if not innermost:
        if not isinstance(info, NextHop):
            raise ValueError("non-innermost layers carry NextHop routing")
        _check_id(fmt, info.party)
        return info.party
    if info is None:
        return bytes(3 * n)
    if isinstance(info, Terminal):
        _check_id(fmt, info.exit_gateway)
        _check_id(fmt, info.first_node)
        return info.exit_gateway + info.first_node + bytes([_TERMINAL_FLAG]) + bytes(n - 1)
    raise ValueError("innermost layer carries Terminal or no routing")


def decode_terminal(fmt: PacketFormat, data: bytes) -> Terminal | None:
    n = fmt.id_len
    if len(data) != 3 * n:
        raise HeaderFailure("innermost routing has wrong width")
    flag = data[2 * n:]
    if flag == bytes(n):
        if data[:2 * n] != bytes(2 * n):
            raise HeaderFailure("malformed empty routing")
        return None
    if flag == bytes([_TERMINAL_FLAG]) + bytes(n - 1):
        return Terminal(data[:n], data[n:2 * n])
    raise HeaderFailure("unknown routing flag")


def _check_id(fmt: PacketFormat, ident: bytes) -> None:
    if len(ident) != fmt.id_len:
        raise ValueError(f"party identifiers are {fmt.id_len} bytes at k={fmt.k}")


@dataclass(frozen=True)
class RouteHop:
    party: bytes
    public_key: bytes
    routing: RoutingInfo = None


# -- headers and packets ----------------------------------------------------

@dataclass(frozen=True)
class Header:
    kem_ct: bytes
    aead_ct: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return self.kem_ct + self.aead_ct + self.tag

    def __len__(self) -> int:
        return len(self.kem_ct) + len(self.aead_ct) + len(self.tag)

    @classmethod
    def from_bytes(cls, fmt: PacketFormat, data: bytes) -> "Header":
        c, t = fmt.ct_len, fmt.tag_len
        # smallest header is the innermost one: c || 3k routing || tag
        if len(data) < c + 3 * fmt.kbytes + t:
            raise HeaderFailure(f"header of {len(data)} bytes is too short")
        return cls(data[:c], data[c:len(data) - t], data[len(data) - t:])


@dataclass(frozen=True)
class Packet:
    header: Header
    payload: bytes

    def to_bytes(self) -> bytes:
        return self.header.to_bytes() + self.payload

    def __len__(self) -> int:
        return len(self.header) + len(self.payload)

    @classmethod
    def from_bytes(cls, fmt: PacketFormat, data: bytes) -> "Packet":
        """Split wire bytes; the payload width is fixed by the format."""
        n = fmt.payload_len
        if len(data) <= n:
            raise HeaderFailure("packet shorter than its payload")
        return cls(Header.from_bytes(fmt, data[:-n]), data[-n:])


# -- single-use reply blocks ------------------------------------------------

@dataclass(frozen=True)
class Surb:
    header: Header
    payload_key: bytes = field(repr=False)

    def to_bytes(self) -> bytes:
        return self.header.to_bytes() + self.payload_key

    @classmethod
    def from_bytes(cls, fmt: PacketFormat, data: bytes) -> "Surb":
        if len(data) != fmt.surb_len:
            raise ValueError(f"SURB must be {fmt.surb_len} bytes")
        n = fmt.payload_key_len
        return cls(Header.from_bytes(fmt, data[:-n]), data[-n:])


@dataclass(frozen=True)
class SurbId:
    """SHA-256 digest of the innermost reply header."""

    digest: bytes

    @classmethod
    def of(cls, header: Header | bytes) -> "SurbId":
        raw = header.to_bytes() if isinstance(header, Header) else header
        return cls(hashlib.sha256(raw).digest())

    def hex(self) -> str:
        return self.digest.hex()


class SurbSecrets:
    """Payload keys of every reply layer, outermost first. Wipe after use."""

    def __init__(self, keys):
        self._keys = [bytearray(k) for k in keys]

    def __len__(self) -> int:
        return len(self._keys)

    def __getitem__(self, i: int) -> bytes:
        return bytes(self._keys[i])

    def __repr__(self) -> str:
        return f"SurbSecrets(<{len(self._keys)} keys>)"

    @property
    def wiped(self) -> bool:
        return not self._keys

    def wipe(self) -> None:
        for key in self._keys:
            key[:] = bytes(len(key))
        self._keys = []
