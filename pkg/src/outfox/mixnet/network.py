"""Party state machines and the five protocol phases.

A :class:`Mixnet` owns every party's state, the key directory and the
transport. Phase methods (``setup``, ``register``, ``send_request``,
``send_reply``, ``forward``) raise :class:`ProtocolAbort` on caller errors;
failures that happen while a party handles an incoming packet are recorded
in the run log instead, since no caller is waiting on them.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field

from outfox.crypto.kem import KemKeyPair, KemSuite, X25519, kem_keygen
from outfox.directory import Directory, Privacy
from outfox.errors import HeaderFailure, PayloadFailure, ProtocolAbort
from outfox.mixnet.topology import Role, RouteSpec, Topology, TopologyError
from outfox.packet import (
    NextHop,
    PacketFormat,
    RouteHop,
    Surb,
    SurbId,
    SurbSecrets,
    Terminal,
    packet_create,
    packet_process,
    surb_check,
    surb_create,
    surb_recover,
    surb_use,
)
from outfox.transport import Message, Transport

log = logging.getLogger(__name__)

FAILURE_EVENTS = ("header_fail", "payload_fail", "abort")


class RunLog:
    """Ordered protocol events, serializable as JSON-lines."""

    def __init__(self):
        self.events: list[dict] = []

    def append(self, event: str, **fields) -> dict:
        entry = {"seq": len(self.events), "event": event, **fields}
        self.events.append(entry)
        return entry

    def of(self, event: str) -> list[dict]:
        return [e for e in self.events if e["event"] == event]

    def count(self, event: str) -> int:
        return len(self.of(event))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)


@dataclass
class PartyState:
    keypair: KemKeyPair | None = None
    keys: dict[str, bytes] = field(default_factory=dict)
    # lpid -> (packet bytes, next party name or None when it must not be forwarded)
    pending: dict[int, tuple[bytes, str | None]] = field(default_factory=dict)
    # users: SURB id -> (secrets, expected entry gateway of the reply)
    surb_table: dict[SurbId, tuple[SurbSecrets, str]] = field(default_factory=dict)
    # receivers: lpid -> (surb, exit gateway, first reply node)
    reply_ctx: dict[int, tuple[Surb, str, str]] = field(default_factory=dict)
    used_replies: set[int] = field(default_factory=set)
    registered: bool = False


class Mixnet:
    def __init__(
        self,
        topology: Topology,
        suite: KemSuite = X25519,
        msg_len: int = 1024,
        rng: random.Random | None = None,
    ):
        self.topology = topology
        self.fmt = PacketFormat(
            suite, k=topology.k, layers=topology.packet_layers, msg_len=msg_len, session_id=topology.session_id
        )
        self.rng = rng or random.SystemRandom()
        self.log = RunLog()
        self.directory = Directory(authorized=[topology[n].id for n in topology.relays])
        self.transport = Transport()
        self.states = {name: PartyState() for name in topology.parties}
        self._lpids: set[int] = set()
        for name in topology.parties:
            self.transport.attach(name, self._handler(name))

    # -- helpers -------------------------------------------------------------

    def _handler(self, name: str):
        def handle(sender: str, message: Message) -> None:
            self._receive(name, sender, message)
        return handle

    def _fresh_lpid(self) -> int:
        lpid = self.rng.getrandbits(64)
        if lpid in self._lpids:
            raise RuntimeError("lpid collision")
        self._lpids.add(lpid)
        return lpid

    def _name_of(self, ident: bytes) -> str | None:
        party = self.topology.by_id.get(ident)
        return party.name if party else None

    def _sync_channel_log(self, before: int) -> None:
        for ev in self.transport.events[before:]:
            if ev.action != "delivered":
                self.log.append("channel", **ev.to_dict())

    def _send(self, sender: str, recipient: str, message: Message) -> None:
        before = len(self.transport.events)
        self.log.append("dispatch", **{"from": sender, "to": recipient, "length": len(message.packet)})
        self.transport.send(sender, recipient, message)
        self._sync_channel_log(before)

    # -- setup and registration ---------------------------------------------

    def setup(self, name: str) -> None:
        party = self.topology[name]
        if not party.is_relay:
            raise ProtocolAbort("only nodes and gateways run setup", name)
        state = self.states[name]
        if state.keypair is not None:
            raise ProtocolAbort("setup already ran", name)
        state.keypair = kem_keygen(self.fmt.suite, self.rng)
        self.directory.register(party.id, self.fmt.suite, state.keypair.public, Privacy.PUBLIC)
        self.log.append("setup", party=name)

    def register(self, name: str) -> None:
        party = self.topology[name]
        if party.role is not Role.USER:
            raise ProtocolAbort("only users register", name)
        state = self.states[name]
        if state.registered:
            raise ProtocolAbort("already registered", name)
        keys = {}
        for relay in self.topology.relays:
            pk = self.directory.retrieve(party.id, self.topology[relay].id, Privacy.PUBLIC)
            if pk is None:
                raise ProtocolAbort(f"no public key registered for {relay}", name)
            keys[relay] = pk
        state.keys.update(keys)
        state.keypair = kem_keygen(self.fmt.suite, self.rng)
        self.directory.register(party.id, self.fmt.suite, state.keypair.public, Privacy.PRIVATE)
        state.registered = True
        self.log.append("register", party=name)

    def _user_key(self, requester: str, target: str) -> bytes:
        state = self.states[requester]
        if target not in state.keys:
            pk = self.directory.retrieve(self.topology[requester].id, self.topology[target].id, Privacy.PRIVATE)
            if pk is None:
                raise ProtocolAbort(f"no public key registered for {target}", requester)
            state.keys[target] = pk
        return state.keys[target]

    # -- request and reply ---------------------------------------------------

    def _hops(self, owner: str, path: list[str], last: str) -> list[RouteHop]:
        ids = [self.topology[n].id for n in path] + [self.topology[last].id]
        keys = self.states[owner].keys
        return [RouteHop(ids[i], keys[n], NextHop(ids[i + 1])) for i, n in enumerate(path)]

    def send_request(self, route: RouteSpec, msg: bytes) -> None:
        try:
            route.validate(self.topology)
        except TopologyError as exc:
            raise ProtocolAbort(str(exc), route.request[0]) from None
        sender, receiver = route.sender, route.receiver
        state = self.states[sender]
        if not state.registered:
            raise ProtocolAbort("sender is not registered", sender)
        if len(msg) != self.fmt.msg_len:
            raise ProtocolAbort(f"message must be {self.fmt.msg_len} bytes", sender)
        receiver_pk = self._user_key(sender, receiver)
        entry, path = route.request[1], list(route.request[2:-1])  # path: N1..Nn, Wx

        surb, terminal = None, None
        if route.reply is not None:
            exit_gw, reply_path = route.reply[0], list(route.reply[1:-1])  # N1^..Nn^, We^
            hops = self._hops(sender, reply_path, sender)
            me = RouteHop(self.topology[sender].id, state.keypair.public, None)
            surb, idsurb, secrets = surb_create(self.fmt, hops, me, self.rng)
            state.surb_table[idsurb] = (secrets, reply_path[-1])
            terminal = Terminal(self.topology[exit_gw].id, self.topology[reply_path[0]].id)

        receiver_hop = RouteHop(self.topology[receiver].id, receiver_pk, terminal)
        packet = packet_create(self.fmt, self._hops(sender, path, receiver), msg, receiver_hop, surb, self.rng)
        self.log.append("request", party=sender, reply=surb is not None, length=len(packet))
        self._send(sender, entry, Message(packet.to_bytes(), self.topology[path[0]].id))

    def send_reply(self, receiver: str, lpid: int, msg: bytes) -> None:
        state = self.states[receiver]
        ctx = state.reply_ctx.get(lpid)
        if ctx is None:
            raise ProtocolAbort(f"no reply context for lpid {lpid:#x}", receiver)
        if len(msg) != self.fmt.msg_len:
            raise ProtocolAbort(f"message must be {self.fmt.msg_len} bytes", receiver)
        if lpid in state.used_replies:
            # permitted; replay protection is out of scope
            log.warning("%s reuses the reply block of lpid %#x", receiver, lpid)
            self.log.append("surb_reuse", party=receiver, lpid=lpid)
        state.used_replies.add(lpid)
        surb, exit_gw, first_node = ctx
        packet = surb_use(self.fmt, surb, msg)
        self.log.append("reply", party=receiver, lpid=lpid, length=len(packet))
        self._send(receiver, exit_gw, Message(packet.to_bytes(), self.topology[first_node].id))

    # -- forwarding ----------------------------------------------------------

    def forward(self, name: str, lpid: int) -> None:
        state = self.states[name]
        try:
            packet, nxt = state.pending.pop(lpid)
        except KeyError:
            raise ProtocolAbort(f"no stored packet with lpid {lpid:#x}", name) from None
        if nxt is None:
            self.log.append("abort", party=name, reason="packet is not forwardable")
            return
        self._send(name, nxt, Message(packet))

    def pending(self) -> list[tuple[str, int]]:
        return sorted((name, lpid) for name, st in self.states.items() for lpid in st.pending)

    def flush(self, limit: int = 100_000) -> int:
        """Forward stored packets in a seeded order until nothing is pending."""
        steps = 0
        while steps < limit:
            candidates = self.pending()
            if not candidates:
                return steps
            self.forward(*self.rng.choice(candidates))
            steps += 1
        raise RuntimeError("flush did not converge")

    # -- receiving -----------------------------------------------------------

    def _store(self, name: str, packet: bytes, nxt: str | None, processed: bool) -> int:
        lpid = self._fresh_lpid()
        self.states[name].pending[lpid] = (packet, nxt)
        self.log.append("store", party=name, lpid=lpid, next=nxt, length=len(packet), processed=processed)
        return lpid

    def _receive(self, name: str, sender: str, message: Message) -> None:
        party = self.topology[name]
        state = self.states[name]
        if state.keypair is None:
            self.log.append("abort", party=name, reason="party has no keys")
            return
        if party.role is Role.USER:
            self._user_receive(name, sender, message)
        elif self.topology[sender].role is Role.USER:
            # entry gateway of a request or exit gateway of a reply: store unprocessed
            if party.role is not Role.GATEWAY:
                self.log.append("abort", party=name, reason="nodes do not accept packets from users")
                return
            nxt = self._name_of(message.hint or b"")
            want = (Role.NODE, 1) if self.topology.node_layers else (Role.GATEWAY, None)
            if nxt is not None and (self.topology[nxt].role, self.topology[nxt].layer) != want:
                nxt = None
            self._store(name, message.packet, nxt, processed=False)
        else:
            self._relay_process(name, message.packet)

    def _relay_process(self, name: str, packet: bytes) -> None:
        """The single processing path for requests and replies alike."""
        try:
            out = packet_process(self.fmt, self.states[name].keypair, packet, last_layer=False)
        except (HeaderFailure, PayloadFailure) as exc:
            self.log.append("header_fail", party=name, length=len(packet), reason=str(exc))
            return
        self.log.append("process", party=name, length=len(packet))
        self._store(name, out.packet.to_bytes(), self._name_of(out.routing.party), processed=True)

    def _user_receive(self, name: str, sender: str, message: Message) -> None:
        state = self.states[name]
        packet = message.packet
        for idsurb, (secrets, entry_gw) in list(state.surb_table.items()):
            if not surb_check(self.fmt, packet, idsurb):
                continue
            if sender != entry_gw:
                self.log.append("abort", party=name, reason=f"reply arrived from {sender}, expected {entry_gw}")
                return
            del state.surb_table[idsurb]
            try:
                reply = surb_recover(self.fmt, packet, secrets)
            except PayloadFailure as exc:
                self.log.append("payload_fail", party=name, kind="reply", reason=str(exc))
                return
            finally:
                secrets.wipe()
            self.log.append("deliver", party=name, kind="reply", surb=idsurb.hex(), length=len(packet), msg=reply.hex())
            return

        try:
            out = packet_process(self.fmt, state.keypair, packet, last_layer=True)
        except HeaderFailure as exc:
            self.log.append("header_fail", party=name, length=len(packet), reason=str(exc))
            return
        except PayloadFailure as exc:
            self.log.append("payload_fail", party=name, kind="request", reason=str(exc))
            return
        fields = {"party": name, "kind": "request", "length": len(packet), "msg": out.message.hex()}
        if out.routing is not None:
            exit_gw, first = self._name_of(out.routing.exit_gateway), self._name_of(out.routing.first_node)
            if exit_gw is None or first is None:
                self.log.append("abort", party=name, reason="reply routing names unknown parties")
                return
            lpid = self._fresh_lpid()
            state.reply_ctx[lpid] = (out.surb, exit_gw, first)
            fields["lpid"] = lpid
        self.log.append("deliver", **fields)
