"""What happens to tampered packets, and what packets cost.

A flipped header bit is caught by the very next hop. A flipped payload bit
travels silently to the receiver, who spots it through the zero block that
opens every payload. The second half prints per-layer sizes for each KEM
suite.

    python walkthroughs/04_tampering_and_costs.py
"""

import random

from outfox.crypto import MLKEM768, X25519, XWING, kem_keygen
from outfox.errors import HeaderFailure, PayloadFailure
from outfox.packet import NextHop, PacketFormat, RouteHop, layer_sizes, packet_create, packet_process

rng = random.Random(11)
fmt = PacketFormat(X25519, k=128, layers=5, msg_len=64)
keys = [kem_keygen(fmt.suite, rng) for _ in range(5)]
ids = [rng.randbytes(fmt.id_len) for _ in range(5)]
route = [RouteHop(ids[i], keys[i].public, NextHop(ids[i + 1])) for i in range(4)]
packet = packet_create(fmt, route, bytes(64), RouteHop(ids[4], keys[4].public), rng=rng).to_bytes()


def flip(data, bit):
    out = bytearray(data)
    out[bit // 8] ^= 0x80 >> (bit % 8)
    return bytes(out)


try:
    packet_process(fmt, keys[0], flip(packet, 200))
except HeaderFailure as exc:
    print(f"header bit 200 flipped: first hop rejects it ({exc})")

current = flip(packet, 8 * len(packet) - 3)
for kp in keys[:-1]:
    current = packet_process(fmt, kp, current).packet
print("payload bit flipped: all four relays forward it unaware")
try:
    packet_process(fmt, keys[-1], current, last_layer=True)
except PayloadFailure as exc:
    print(f"receiver rejects it ({exc})\n")

for suite in (X25519, MLKEM768, XWING):
    rows = layer_sizes(PacketFormat(suite, layers=5, msg_len=1024).profile)
    print(f"{suite.name:>8}: " + "  ".join(f"L{r['layer']} {r['packet']}B" for r in rows))
