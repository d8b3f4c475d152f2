"""Secure point-to-point channels between simulated parties.

Channels are confidential and integrity protected: the event log carries the
endpoints and the message length, never contents, and nothing on the public
interface can alter a message in flight. Adversarial behaviour is modelled
only at the endpoints, by hooks that fire just before the recipient ingests a
message (a corrupt recipient-side host dropping, mutating or duplicating it).
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Callable, Iterable, Union

from outfox.errors import OutfoxError


@dataclass(frozen=True)
class Message:
    packet: bytes
    hint: bytes | None = None  # next-hop id handed to a gateway along with the packet

    def __len__(self) -> int:
        return len(self.packet) + (len(self.hint) if self.hint else 0)


@dataclass(frozen=True)
class ChannelEvent:
    sender: str
    recipient: str
    length: int
    action: str                 # delivered | dropped | tampered | duplicated
    byte_index: int | None = None
    xor_mask: int | None = None

    def to_dict(self) -> dict:
        d = {"from": self.sender, "to": self.recipient, "length": self.length, "action": self.action}
        if self.byte_index is not None:
            d["byte_index"] = self.byte_index
            d["xor_mask"] = self.xor_mask
        return d


Predicate = Callable[[str, str, Message], bool]
# None drops the message, a list duplicates (or multiplies) it
Mutation = Callable[[Message], Union[Message, None, list]]
Handler = Callable[[str, Message], None]


@dataclass
class _Hook:
    predicate: Predicate
    mutation: Mutation
    remaining: int | None


class UnknownParty(OutfoxError, KeyError):
    pass


class Transport:
    def __init__(self):
        self._handlers: dict[str, Handler] = {}
        self._queues: dict[str, deque] = defaultdict(deque)
        self._hooks: dict[int, _Hook] = {}
        self._hook_ids = itertools.count(1)
        self._draining = False
        self.events: list[ChannelEvent] = []

    def attach(self, party: str, handler: Handler) -> None:
        self._handlers[party] = handler

    @property
    def parties(self) -> Iterable[str]:
        return self._handlers.keys()

    def add_hook(self, predicate: Predicate, mutation: Mutation, times: int | None = None) -> int:
        """Install an ingress hook; ``times`` limits how often it fires."""
        hook_id = next(self._hook_ids)
        self._hooks[hook_id] = _Hook(predicate, mutation, times)
        return hook_id

    def remove_hook(self, hook_id: int) -> None:
        self._hooks.pop(hook_id, None)

    def send(self, sender: str, recipient: str, message: Message) -> None:
        """Queue ``message`` for ``recipient`` and drain queues in FIFO order."""
        for party in (sender, recipient):
            if party not in self._handlers:
                raise UnknownParty(party)
        self._queues[recipient].append((sender, message))
        if not self._draining:
            self._drain()

    def _drain(self) -> None:
        self._draining = True
        try:
            while True:
                pending = [p for p, q in self._queues.items() if q]
                if not pending:
                    return
                # deterministic: lowest party name first, FIFO within a queue
                recipient = min(pending)
                sender, message = self._queues[recipient].popleft()
                for delivered in self._ingress(sender, recipient, message):
                    self._handlers[recipient](sender, delivered)
        finally:
            self._draining = False

    def _ingress(self, sender: str, recipient: str, message: Message) -> list[Message]:
        for hook_id, hook in list(self._hooks.items()):
            if not hook.predicate(sender, recipient, message):
                continue
            if hook.remaining is not None:
                hook.remaining -= 1
                if hook.remaining <= 0:
                    del self._hooks[hook_id]
            result = hook.mutation(message)
            if result is None:
                self.events.append(ChannelEvent(sender, recipient, len(message), "dropped"))
                return []
            if isinstance(result, list):
                self.events.extend(
                    ChannelEvent(sender, recipient, len(m), "duplicated") for m in result
                )
                return result
            if result != message:
                index, mask = _first_difference(message.packet, result.packet)
                self.events.append(ChannelEvent(sender, recipient, len(result), "tampered", index, mask))
                return [result]
        self.events.append(ChannelEvent(sender, recipient, len(message), "delivered"))
        return [message]

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict()) + "\n" for e in self.events)


def _first_difference(a: bytes, b: bytes) -> tuple[int | None, int | None]:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i, x ^ y
    return (min(len(a), len(b)), None) if len(a) != len(b) else (None, None)


# -- stock hooks ------------------------------------------------------------

def at(party: str) -> Predicate:
    return lambda sender, recipient, message: recipient == party


def drop() -> Mutation:
    return lambda message: None


def flip_bit(bit: int) -> Mutation:
    """Flip bit ``bit`` (0 = MSB of byte 0) of the packet bytes."""
    def mutate(message: Message) -> Message:
        data = bytearray(message.packet)
        data[bit // 8] ^= 0x80 >> (bit % 8)
        return Message(bytes(data), message.hint)
    return mutate


def duplicate(copies: int = 2) -> Mutation:
    return lambda message: [message] * copies
