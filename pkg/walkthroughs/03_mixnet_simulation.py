"""A full request and reply through a simulated layered mixnet.

Runs the bundled topology: two gateways, three node layers and two users.
The simulator covers key setup, directory registration, the request, the
reply and every forwarding step. It ends by printing the event log, which
is what an auditor of the run gets to see.

    python walkthroughs/03_mixnet_simulation.py
"""

import random
from importlib.resources import files

from outfox.crypto import X25519
from outfox.mixnet import Mixnet, RouteSpec, Topology

topology = Topology.load(files("outfox") / "data" / "topology.json")
net = Mixnet(topology, X25519, 64, random.Random(3))

for name in topology.relays:
    net.setup(name)
for name in topology.users:
    net.register(name)

route = RouteSpec(
    ["alice", "W1", "N11", "N21", "N31", "W2", "bob"],
    reply=["W2", "N12", "N22", "N32", "W1", "alice"],
)
net.send_request(route, b"hello bob".ljust(64, b"\0"))
net.flush()

delivery = net.log.of("deliver")[0]
net.send_reply("bob", delivery["lpid"], b"hello alice".ljust(64, b"\0"))
net.flush()

for event in net.log:
    fields = {k: v for k, v in event.items() if k not in ("event", "msg")}
    print(f"{event['event']:>9}  {fields}")

for d in net.log.of("deliver"):
    print(f"\n{d['party']} received a {d['kind']}: {bytes.fromhex(d['msg']).rstrip(bytes(1))!r}")
