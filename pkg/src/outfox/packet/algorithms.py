"""Packet creation and processing, and the SURB algorithms.

Layer ``i`` of a packet is processed by the ``i``-th party of the route; the
last layer belongs to the end user (receiver for requests, sender for
replies). Creation draws one KEM encapsulation per layer; processing draws
exactly one decapsulation.
"""

from __future__ import annotations

import hmac
import random
from dataclasses import dataclass
from typing import Sequence

from outfox import counters
from outfox.crypto.aead import aead_open, aead_seal
from outfox.crypto.kdf import KdfContext, LayerKeys, kdf_derive
from outfox.crypto.kem import KemKeyPair, default_rng, kem_decap, kem_encap
from outfox.crypto.lioness import se_decrypt, se_encrypt
from outfox.errors import DecapsulationError, HeaderFailure, MessageSpaceError, PayloadFailure, RouteError
from outfox.packet.format import (
    Header,
    NextHop,
    Packet,
    PacketFormat,
    RouteHop,
    RoutingInfo,
    Surb,
    SurbId,
    SurbSecrets,
    Terminal,
    decode_terminal,
    encode_routing,
)


@dataclass(frozen=True)
class Forward:
    packet: Packet
    routing: NextHop


@dataclass(frozen=True)
class Deliver:
    message: bytes
    surb: Surb | None
    routing: Terminal | None


def _derive(fmt: PacketFormat, shared: bytes, kem_ct: bytes, public_key: bytes) -> LayerKeys:
    okm = kdf_derive(shared, KdfContext(kem_ct, public_key, fmt.session_id), fmt.kdf_len)
    return LayerKeys.split(okm, fmt.header_key_len)


def _check_message(fmt: PacketFormat, msg: bytes) -> None:
    if not isinstance(msg, (bytes, bytearray)) or len(msg) != fmt.msg_len:
        raise MessageSpaceError(f"messages are exactly {fmt.msg_len} bytes")


def _nest_headers(fmt: PacketFormat, hops: Sequence[RouteHop], rng: random.Random) -> tuple[list[LayerKeys], list[Header]]:
    """Encapsulate to every hop and build headers h_0..h_l (outermost first)."""
    keys, cts = [], []
    for hop in hops:
        shared, ct = kem_encap(fmt.suite, hop.public_key, rng)
        keys.append(_derive(fmt, shared, ct, hop.public_key))
        cts.append(ct)
    last = len(hops) - 1
    headers: list[Header] = [None] * len(hops)  # type: ignore[list-item]
    inner = b""
    for i in range(last, -1, -1):
        plaintext = encode_routing(fmt, hops[i].routing, innermost=i == last) + inner
        beta, gamma = aead_seal(keys[i].header_key, plaintext, fmt.tag_len)
        headers[i] = Header(cts[i], beta, gamma)
        inner = headers[i].to_bytes()
    return keys, headers


def _check_route(fmt: PacketFormat, route: Sequence[RouteHop]) -> None:
    if len(route) != fmt.layers - 1:
        raise RouteError(f"route has {len(route)} hops, expected {fmt.layers - 1}")
    for hop in route:
        if not isinstance(hop.routing, NextHop):
            raise RouteError("intermediate hops must carry NextHop routing")


def packet_create_layers(
    fmt: PacketFormat,
    route: Sequence[RouteHop],
    msg: bytes,
    receiver: RouteHop,
    surb: Surb | None = None,
    rng: random.Random | None = None,
) -> list[Packet]:
    """Like :func:`packet_create` but return every layer, outermost first.

    Element ``i`` is the packet exactly as party ``i`` receives it.
    """
    _check_message(fmt, msg)
    _check_route(fmt, route)
    if surb is None and receiver.routing is not None:
        raise RouteError("receiver routing must be empty when no SURB is attached")
    if surb is not None and not isinstance(receiver.routing, Terminal):
        raise RouteError("a SURB requires Terminal receiver routing")
    counters.record("packet_create")
    rng = rng or default_rng()

    keys, headers = _nest_headers(fmt, [*route, receiver], rng)
    reply_block = surb.to_bytes() if surb is not None else bytes(fmt.surb_len)
    payload = se_encrypt(keys[-1].payload_key, bytes(fmt.kbytes) + reply_block + bytes(msg), fmt.payload_len)
    payloads = [payload]
    for i in range(len(route) - 1, -1, -1):
        payload = se_encrypt(keys[i].payload_key, payload, fmt.payload_len)
        payloads.append(payload)
    payloads.reverse()
    return [Packet(h, p) for h, p in zip(headers, payloads)]


def packet_create(
    fmt: PacketFormat,
    route: Sequence[RouteHop],
    msg: bytes,
    receiver: RouteHop,
    surb: Surb | None = None,
    rng: random.Random | None = None,
) -> Packet:
    """Build a request packet for ``route`` followed by ``receiver``.

    ``route`` holds the ``layers - 1`` intermediate hops, each with the
    :class:`NextHop` it should forward to. ``receiver.routing`` is a
    :class:`Terminal` when ``surb`` is given and ``None`` otherwise.
    """
    return packet_create_layers(fmt, route, msg, receiver, surb, rng)[0]


def packet_process(fmt: PacketFormat, keypair: KemKeyPair, packet: Packet | bytes, last_layer: bool = False) -> Forward | Deliver:
    """Remove one layer of encryption.

    Raises :class:`HeaderFailure` when the header does not authenticate under
    this party's key and :class:`PayloadFailure` when the final-layer zero
    padding does not verify.
    """
    counters.record("packet_process")
    if keypair.suite != fmt.suite:
        raise ValueError("key pair suite does not match the packet format")
    if not isinstance(packet, Packet):
        packet = Packet.from_bytes(fmt, bytes(packet))
    header = packet.header
    try:
        shared = kem_decap(fmt.suite, keypair.secret, header.kem_ct)
    except DecapsulationError as exc:
        raise HeaderFailure(f"KEM rejected ciphertext: {exc}") from exc
    keys = _derive(fmt, shared, header.kem_ct, keypair.public)
    opened = aead_open(keys.header_key, header.aead_ct, header.tag)

    if last_layer:
        routing = decode_terminal(fmt, opened)
    else:
        n = fmt.id_len
        routing = NextHop(opened[:n])
        inner = Header.from_bytes(fmt, opened[n:])

    if len(packet.payload) != fmt.payload_len:
        raise PayloadFailure("payload has the wrong length")
    payload = se_decrypt(keys.payload_key, packet.payload, fmt.payload_len)
    if not last_layer:
        return Forward(Packet(inner, payload), routing)

    kb, sl = fmt.kbytes, fmt.surb_len
    if not hmac.compare_digest(payload[:kb], bytes(kb)):
        raise PayloadFailure("zero padding check failed")
    reply_block, msg = payload[kb:kb + sl], payload[kb + sl:]
    if routing is None:
        if reply_block != bytes(sl):
            raise PayloadFailure("reply block area is not empty")
        return Deliver(msg, None, None)
    return Deliver(msg, Surb.from_bytes(fmt, reply_block), routing)


def surb_create(
    fmt: PacketFormat,
    reply_route: Sequence[RouteHop],
    sender: RouteHop,
    rng: random.Random | None = None,
) -> tuple[Surb, SurbId, SurbSecrets]:
    """Build a reply block for ``reply_route`` ending at ``sender``."""
    _check_route(fmt, reply_route)
    if sender.routing is not None:
        raise RouteError("the sender hop of a reply route carries no routing")
    counters.record("surb_create")
    keys, headers = _nest_headers(fmt, [*reply_route, sender], rng or default_rng())
    surb = Surb(headers[0], keys[-1].payload_key)
    return surb, SurbId.of(headers[-1]), SurbSecrets(k.payload_key for k in keys)


def surb_use(fmt: PacketFormat, surb: Surb, msg: bytes) -> Packet:
    """Turn a reply block into a reply packet carrying ``msg``."""
    _check_message(fmt, msg)
    counters.record("surb_use")
    plaintext = bytes(fmt.kbytes + fmt.surb_len) + bytes(msg)
    return Packet(surb.header, se_encrypt(surb.payload_key, plaintext, fmt.payload_len))


def surb_check(fmt: PacketFormat, packet: Packet | bytes, idsurb: SurbId) -> bool:
    if not isinstance(packet, Packet):
        try:
            packet = Packet.from_bytes(fmt, bytes(packet))
        except HeaderFailure:
            return False
    return hmac.compare_digest(SurbId.of(packet.header).digest, idsurb.digest)


def surb_recover(fmt: PacketFormat, packet: Packet | bytes, secrets: SurbSecrets) -> bytes:
    """Undo every payload operation of a reply; raise :class:`PayloadFailure` on tampering."""
    if secrets.wiped:
        raise ValueError("SURB secrets were already used")
    if len(secrets) != fmt.layers:
        raise ValueError(f"expected {fmt.layers} SURB secrets, got {len(secrets)}")
    counters.record("surb_recover")
    if not isinstance(packet, Packet):
        packet = Packet.from_bytes(fmt, bytes(packet))
    payload = packet.payload
    if len(payload) != fmt.payload_len:
        raise PayloadFailure("payload has the wrong length")
    for i in range(fmt.layers - 2, -1, -1):
        payload = se_encrypt(secrets[i], payload, fmt.payload_len)
    plaintext = se_decrypt(secrets[fmt.layers - 1], payload, fmt.payload_len)
    pad = fmt.kbytes + fmt.surb_len
    if not hmac.compare_digest(plaintext[:pad], bytes(pad)):
        raise PayloadFailure("reply padding check failed")
    return plaintext[pad:]
