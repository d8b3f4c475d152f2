"""A request packet from creation to delivery, one hop at a time.

Five parties hold X25519 keys. The sender wraps a message for all of them,
and each hop peels exactly one layer with a single decapsulation. The
header shrinks as layers come off while the payload keeps its length.

    python walkthroughs/01_packet_lifecycle.py
"""

import random

from outfox.counters import op_counter
from outfox.crypto import X25519, kem_keygen
from outfox.packet import NextHop, PacketFormat, RouteHop, packet_create, packet_process

rng = random.Random(2024)
fmt = PacketFormat(X25519, k=128, layers=5, msg_len=64)

names = ["N1", "N2", "N3", "Wx", "bob"]
keys = {n: kem_keygen(fmt.suite, rng) for n in names}
ids = {n: rng.randbytes(fmt.id_len) for n in names}

# every hop except the receiver learns only the id of the next party
route = [RouteHop(ids[a], keys[a].public, NextHop(ids[b])) for a, b in zip(names, names[1:])]
receiver = RouteHop(ids["bob"], keys["bob"].public)

message = b"meet at the usual place".ljust(64, b"\0")
with op_counter() as ops:
    packet = packet_create(fmt, route, message, receiver, rng=rng)
print(f"created a {len(packet)}-byte packet using {ops['kem_encap']} encapsulations")
print(f"  header {len(packet.header)} bytes, payload {len(packet.payload)} bytes\n")

for depth, name in enumerate(names):
    last = depth == fmt.layers - 1
    with op_counter() as ops:
        out = packet_process(fmt, keys[name], packet, last_layer=last)
    if last:
        print(f"{name:>4}: delivered {out.message.rstrip(bytes(1))!r} ({ops['kem_decap']} decap)")
        break
    nxt = names[names.index(name) + 1]
    assert out.routing.party == ids[nxt]
    packet = out.packet
    print(f"{name:>4}: forward to {nxt:<4} header now {len(packet.header):>3} bytes, "
          f"payload {len(packet.payload)} ({ops['kem_decap']} decap)")
