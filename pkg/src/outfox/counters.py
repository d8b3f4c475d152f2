"""Operation counters for the primitives and packet algorithms.

Counting is off unless a recorder is active::

    with op_counter() as ops:
        packet_create(...)
    assert ops["kem_encap"] == fmt.layers
"""

from __future__ import annotations

import threading
from collections import Counter
from contextlib import contextmanager
from typing import Iterator

_local = threading.local()


def _active() -> list[Counter]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = _local.stack = []
    return stack


def record(name: str, n: int = 1) -> None:
    for counter in _active():
        counter[name] += n


@contextmanager
def op_counter() -> Iterator[Counter]:
    counter: Counter = Counter()
    stack = _active()
    stack.append(counter)
    try:
        yield counter
    finally:
        # Counters compare by value, so remove by identity.
        for i in range(len(stack) - 1, -1, -1):
            if stack[i] is counter:
                del stack[i]
                break
