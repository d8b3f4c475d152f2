"""Scripted simulation runs.

A script is a list of actions (one JSON object per line on disk)::

    {"action": "setup"}                                   # all relays, or "party": name
    {"action": "register"}                                # all users, or "party": name
    {"action": "request", "route": [...], "reply_route": [...], "msg": "hello"}
    {"action": "reply", "party": "bob", "msg": "hi"}      # latest reply context, or "lpid"
    {"action": "forward"}                                 # drain, or "party" (+ "lpid")
    {"action": "drop", "at": "N2"}                        # next ingress at N2 is dropped
    {"action": "tamper", "at": "N2", "part": "header", "bit": 17}
    {"action": "duplicate", "at": "bob"}
    {"action": "expect", "event": "header_fail", "count": 1}

Messages are UTF-8 text zero-padded to the message length, or raw ``msg_hex``.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable

from outfox.crypto.kem import KemSuite, X25519
from outfox.errors import OutfoxError, ProtocolAbort
from outfox.mixnet.network import FAILURE_EVENTS, Mixnet, RunLog
from outfox.mixnet.topology import RouteSpec, Topology, TopologyError
from outfox.transport import Message, at, drop, duplicate, flip_bit

ACTIONS = ("setup", "register", "request", "reply", "forward", "drop", "tamper", "duplicate", "expect")


class ScenarioError(OutfoxError, ValueError):
    pass


def load_script(path: str | Path) -> list[dict]:
    actions = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            actions.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}:{lineno}: {exc}") from None
    return actions


def encode_message(action: dict, msg_len: int) -> bytes:
    if "msg_hex" in action:
        raw = bytes.fromhex(action["msg_hex"])
    else:
        raw = str(action.get("msg", "")).encode()
    if len(raw) > msg_len:
        raise ScenarioError(f"message longer than {msg_len} bytes")
    return raw + bytes(msg_len - len(raw))


def decode_message(hex_msg: str) -> str:
    return bytes.fromhex(hex_msg).rstrip(b"\0").decode(errors="replace")


class ScenarioRunner:
    def __init__(self, net: Mixnet):
        self.net = net
        self.expectations: dict[str, int] = {}

    @property
    def log(self) -> RunLog:
        return self.net.log

    def run(self, script: Iterable[dict]) -> RunLog:
        for step, action in enumerate(script):
            if not isinstance(action, dict) or action.get("action") not in ACTIONS:
                raise ScenarioError(f"step {step}: unknown action {action!r}")
            self._check_parties(step, action)
            try:
                getattr(self, "_do_" + action["action"])(action)
            except ProtocolAbort as exc:
                self.log.append("abort", party=exc.party, reason=exc.reason)
        return self.log

    def _check_parties(self, step: int, action: dict) -> None:
        names = [action[key] for key in ("party", "at") if key in action]
        names += list(action.get("route", [])) + list(action.get("reply_route") or [])
        for name in names:
            if name not in self.net.topology.parties:
                raise ScenarioError(f"step {step}: unknown party {name!r}")

    # -- actions -------------------------------------------------------------

    def _do_setup(self, action: dict) -> None:
        for name in [action["party"]] if "party" in action else self.net.topology.relays:
            self.net.setup(name)

    def _do_register(self, action: dict) -> None:
        for name in [action["party"]] if "party" in action else self.net.topology.users:
            self.net.register(name)

    def _do_request(self, action: dict) -> None:
        try:
            route = RouteSpec(action["route"], action.get("reply_route"))
        except KeyError:
            raise ScenarioError("request needs a route") from None
        self.net.send_request(route, encode_message(action, self.net.fmt.msg_len))

    def _do_reply(self, action: dict) -> None:
        name = action.get("party")
        if name is None:
            raise ScenarioError("reply needs a party")
        contexts = self.net.states[name].reply_ctx
        lpid = action.get("lpid")
        if lpid is None:
            if not contexts:
                raise ProtocolAbort("no request to reply to", name)
            lpid = list(contexts)[-1]
        self.net.send_reply(name, lpid, encode_message(action, self.net.fmt.msg_len))

    def _do_forward(self, action: dict) -> None:
        if "party" not in action:
            self.net.flush()
            return
        name = action["party"]
        lpids = [action["lpid"]] if "lpid" in action else sorted(self.net.states[name].pending)
        for lpid in lpids:
            self.net.forward(name, lpid)

    def _do_drop(self, action: dict) -> None:
        self.net.transport.add_hook(at(action["at"]), drop(), times=action.get("count", 1))

    def _do_duplicate(self, action: dict) -> None:
        self.net.transport.add_hook(at(action["at"]), duplicate(action.get("copies", 2)), times=action.get("count", 1))

    def _do_tamper(self, action: dict) -> None:
        part = action.get("part", "header")
        if part not in ("header", "payload"):
            raise ScenarioError("tamper part must be 'header' or 'payload'")
        payload_len = self.net.fmt.payload_len
        rng = self.net.rng
        fixed_bit = action.get("bit")

        def mutate(message: Message):
            header_bits = 8 * (len(message.packet) - payload_len)
            span = header_bits if part == "header" else 8 * payload_len
            bit = fixed_bit if fixed_bit is not None else rng.randrange(span)
            if not 0 <= bit < span:
                raise ScenarioError(f"bit {bit} outside the {part}")
            return flip_bit(bit + (0 if part == "header" else header_bits))(message)

        self.net.transport.add_hook(at(action["at"]), mutate, times=action.get("count", 1))

    def _do_expect(self, action: dict) -> None:
        event = action.get("event")
        if not event:
            raise ScenarioError("expect needs an event")
        self.expectations[event] = self.expectations.get(event, 0) + int(action.get("count", 1))

    # -- verdict ---------------------------------------------------------------

    def unmet(self) -> list[str]:
        """Problems that make a run count as a surfaced protocol abort."""
        problems = []
        for event, want in self.expectations.items():
            got = self.log.count(event)
            if got != want:
                problems.append(f"expected {want} {event} event(s), saw {got}")
        for event in FAILURE_EVENTS:
            if event not in self.expectations and self.log.count(event):
                problems.append(f"unexpected {event} event(s): {self.log.count(event)}")
        return problems


def run_scenario(
    topology: Topology,
    script: Iterable[dict],
    suite: KemSuite = X25519,
    msg_len: int = 1024,
    seed: int | None = None,
) -> tuple[RunLog, ScenarioRunner]:
    rng = random.Random(seed) if seed is not None else random.SystemRandom()
    runner = ScenarioRunner(Mixnet(topology, suite, msg_len, rng))
    runner.run(script)
    return runner.log, runner


__all__ = ["ScenarioError", "ScenarioRunner", "TopologyError", "decode_message", "encode_message", "load_script", "run_scenario"]
