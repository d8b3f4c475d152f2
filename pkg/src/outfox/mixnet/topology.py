"""Party roles, topologies and route specifications."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


class TopologyError(ValueError):
    pass


class Role(enum.Enum):
    USER = "user"
    GATEWAY = "gateway"
    NODE = "node"


@dataclass(frozen=True)
class Party:
    name: str
    id: bytes
    role: Role
    layer: int | None = None  # 1-based node layer

    @property
    def is_relay(self) -> bool:
        return self.role is not Role.USER


def party_id(name: str, k: int) -> bytes:
    return hashlib.sha256(b"party:" + name.encode()).digest()[: k // 8]


class Topology:
    """Gateways, node layers and users of one simulated deployment.

    Three node layers give the standard five-layer packets; other layer
    counts are accepted so tests can vary the route length.
    """

    def __init__(
        self,
        gateways: Sequence[str],
        layers: Sequence[Sequence[str]],
        users: Sequence[str],
        session_id: bytes = b"",
        k: int = 128,
    ):
        if not gateways or not users:
            raise TopologyError("gateways and users must be non-empty")
        if any(not layer for layer in layers):
            raise TopologyError("every node layer must be non-empty")
        self.session_id = session_id
        self.k = k
        self.parties: dict[str, Party] = {}
        for name in gateways:
            self._add(Party(name, party_id(name, k), Role.GATEWAY))
        for depth, layer in enumerate(layers, start=1):
            for name in layer:
                self._add(Party(name, party_id(name, k), Role.NODE, depth))
        for name in users:
            self._add(Party(name, party_id(name, k), Role.USER))
        self.by_id = {p.id: p for p in self.parties.values()}
        if len(self.by_id) != len(self.parties):
            raise TopologyError("party identifier collision")
        self.gateways = tuple(gateways)
        self.layers = tuple(tuple(layer) for layer in layers)
        self.users = tuple(users)

    def _add(self, party: Party) -> None:
        if not isinstance(party.name, str) or not party.name:
            raise TopologyError(f"bad party name {party.name!r}")
        if party.name in self.parties:
            raise TopologyError(f"party {party.name!r} appears in more than one set")
        self.parties[party.name] = party

    def __getitem__(self, name: str) -> Party:
        try:
            return self.parties[name]
        except KeyError:
            raise TopologyError(f"unknown party {name!r}") from None

    @property
    def node_layers(self) -> int:
        return len(self.layers)

    @property
    def packet_layers(self) -> int:
        """Encryption layers per packet: every node layer, one gateway, the end user."""
        return self.node_layers + 2

    @property
    def relays(self) -> list[str]:
        return [*self.gateways, *(n for layer in self.layers for n in layer)]

    @classmethod
    def from_dict(cls, data: dict, k: int = 128) -> "Topology":
        if not isinstance(data, dict):
            raise TopologyError("topology must be a JSON object")
        try:
            if "layers" in data:
                layers = data["layers"]
            else:
                layers = []
                i = 1
                while f"layer{i}" in data:
                    layers.append(data[f"layer{i}"])
                    i += 1
                if not layers:
                    raise TopologyError("topology has no node layers")
            sid = data.get("session_id", "")
            return cls(data["gateways"], layers, data["users"], sid.encode() if isinstance(sid, str) else bytes(sid), k)
        except KeyError as exc:
            raise TopologyError(f"topology is missing {exc}") from None
        except TypeError as exc:
            raise TopologyError(f"malformed topology: {exc}") from None

    @classmethod
    def load(cls, path: str | Path, k: int = 128) -> "Topology":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise TopologyError(f"{path}: {exc}") from None
        return cls.from_dict(data, k)

    def to_dict(self) -> dict:
        d = {"session_id": self.session_id.decode(errors="replace"), "gateways": list(self.gateways)}
        for i, layer in enumerate(self.layers, start=1):
            d[f"layer{i}"] = list(layer)
        d["users"] = list(self.users)
        return d


@dataclass(frozen=True)
class RouteSpec:
    """Request path ``[T, We, N1..Nn, Wx, R]`` and optional reply path ``[Wx^, N1^..Nn^, We^, T^]``."""

    request: tuple[str, ...]
    reply: tuple[str, ...] | None = None

    def __init__(self, request: Sequence[str], reply: Sequence[str] | None = None):
        object.__setattr__(self, "request", tuple(request))
        object.__setattr__(self, "reply", tuple(reply) if reply is not None else None)

    @property
    def sender(self) -> str:
        return self.request[0]

    @property
    def receiver(self) -> str:
        return self.request[-1]

    def validate(self, topology: Topology) -> None:
        n = topology.node_layers
        if len(self.request) != n + 4:
            raise TopologyError(f"request path needs {n + 4} entries")
        _expect_roles(topology, self.request, n)
        if self.reply is not None:
            if len(self.reply) != n + 3:
                raise TopologyError(f"reply path needs {n + 3} entries")
            _expect_roles(topology, self.reply, n, leading_user=False)
            if self.reply[-1] != self.sender:
                raise TopologyError("the reply path must end at the sender")


def _expect_roles(topology: Topology, path: Sequence[str], n: int, leading_user: bool = True) -> None:
    expected = ([Role.USER] if leading_user else []) + [Role.GATEWAY] + [Role.NODE] * n + [Role.GATEWAY, Role.USER]
    for slot, (name, role) in enumerate(zip(path, expected)):
        party = topology[name]
        if party.role is not role:
            raise TopologyError(f"{name!r} in slot {slot} must be a {role.value}")
        if role is Role.NODE:
            layer = slot - (2 if leading_user else 1) + 1
            if party.layer != layer:
                raise TopologyError(f"{name!r} is a layer-{party.layer} node, slot needs layer {layer}")
