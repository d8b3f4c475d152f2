"""Anonymous replies with single-use reply blocks.

Alice builds a reply block for a return route and ships it inside her
request. Bob answers without learning where Alice sits. When the reply
arrives, Alice recognises it by the digest of its innermost header and
strips the payload layers with the keys she kept.

    python walkthroughs/02_reply_blocks.py
"""

import random

from outfox.crypto import X25519, kem_keygen
from outfox.packet import (
    NextHop, PacketFormat, RouteHop, Terminal,
    packet_create, packet_process, surb_check, surb_create, surb_recover, surb_use,
)

rng = random.Random(7)
fmt = PacketFormat(X25519, k=128, layers=5, msg_len=32)


def party():
    return kem_keygen(fmt.suite, rng), rng.randbytes(fmt.id_len)


def chain(parties):
    return [RouteHop(pid, kp.public, NextHop(nxt)) for (kp, pid), (_, nxt) in zip(parties, parties[1:])]


alice, bob = party(), party()
forward_path = [party() for _ in range(4)]
return_path = [party() for _ in range(4)]

# the reply route ends at alice; the last relay on it is her entry gateway
hops = chain(return_path + [alice])
surb, surb_id, secrets = surb_create(fmt, hops, RouteHop(alice[1], alice[0].public), rng)
print(f"reply block is {len(surb.to_bytes())} bytes; alice files it under {surb_id.hex()[:16]}...")

terminal = Terminal(rng.randbytes(fmt.id_len), return_path[0][1])
request = packet_create(fmt, chain(forward_path + [bob]), b"ping".ljust(32, b"\0"),
                        RouteHop(bob[1], bob[0].public, terminal), surb, rng)
request_len = len(request)
for kp, _ in forward_path:
    request = packet_process(fmt, kp, request).packet
delivered = packet_process(fmt, bob[0], request, last_layer=True)
print(f"bob reads {delivered.message.rstrip(bytes(1))!r} and holds a reply block: {delivered.surb is not None}")

reply = surb_use(fmt, delivered.surb, b"pong".ljust(32, b"\0"))
print(f"reply is {len(reply)} bytes, the request was {request_len}: the first relay cannot tell them apart")
for kp, _ in return_path:
    reply = packet_process(fmt, kp, reply).packet

print(f"alice matches the reply: {surb_check(fmt, reply, surb_id)}")
print(f"alice recovers {surb_recover(fmt, reply, secrets).rstrip(bytes(1))!r}")
