"""Route and key fixtures shared by the test modules."""

from __future__ import annotations

import random
from dataclasses import dataclass

from outfox.crypto.kem import KemKeyPair, kem_keygen
from outfox.packet import NextHop, PacketFormat, RouteHop, Terminal


@dataclass
class Path:
    fmt: PacketFormat
    pairs: list[KemKeyPair]
    ids: list[bytes]

    @property
    def route(self) -> list[RouteHop]:
        ids, pairs = self.ids, self.pairs
        return [RouteHop(ids[i], pairs[i].public, NextHop(ids[i + 1])) for i in range(len(pairs) - 1)]

    def receiver(self, routing=None) -> RouteHop:
        return RouteHop(self.ids[-1], self.pairs[-1].public, routing)


def make_path(fmt: PacketFormat, rng: random.Random) -> Path:
    pairs = [kem_keygen(fmt.suite, rng) for _ in range(fmt.layers)]
    ids = [rng.randbytes(fmt.id_len) for _ in range(fmt.layers)]
    return Path(fmt, pairs, ids)


def terminal(fmt: PacketFormat, rng: random.Random) -> Terminal:
    return Terminal(rng.randbytes(fmt.id_len), rng.randbytes(fmt.id_len))


def peel(fmt: PacketFormat, pairs, packet):
    """Process a packet through every hop; return (packets seen, final Deliver)."""
    from outfox.packet import packet_process

    seen = [packet]
    for pair in pairs[:-1]:
        packet = packet_process(fmt, pair, packet).packet
        seen.append(packet)
    return seen, packet_process(fmt, pairs[-1], packet, last_layer=True)
