from outfox.packet.algorithms import (
    Deliver,
    Forward,
    packet_create,
    packet_create_layers,
    packet_process,
    surb_check,
    surb_create,
    surb_recover,
    surb_use,
)
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
from outfox.packet.sizes import SizeProfile, layer_sizes

__all__ = [
    "Deliver", "Forward", "Header", "NextHop", "Packet", "PacketFormat", "RouteHop", "RoutingInfo",
    "SizeProfile", "Surb", "SurbId", "SurbSecrets", "Terminal", "decode_terminal", "encode_routing",
    "layer_sizes", "packet_create", "packet_create_layers", "packet_process", "surb_check",
    "surb_create", "surb_recover", "surb_use",
]
