"""Reproducible packet test vectors built on the deterministic test KEM.

A vector file is JSON-lines; each line holds::

    {"suite": "testkem", "seed": 7, "k": 128, "layers": 5, "msg_len": 64,
     "session_id": "", "route": ["N1", ..., "bob"], "msg": "<hex>",
     "expected_packet_hex": "<hex>"}

Everything, hop keys included, is drawn from ``random.Random(seed)`` in a
fixed order: one key pair per route entry, then packet creation. ``route``
names the hops in order, the last one being the receiver; party ids are
derived from the names.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from outfox.crypto.aead import KEY_LEN, chacha_stream, xor_bytes
from outfox.crypto.kem import TESTKEM, get_suite, kem_decap, kem_keygen
from outfox.errors import OutfoxError
from outfox.mixnet.topology import party_id
from outfox.packet import Header, NextHop, Packet, PacketFormat, RouteHop, packet_create_layers
from outfox.packet.algorithms import _derive

FIELDS = ("suite", "seed", "k", "layers", "msg_len", "session_id", "route", "msg", "expected_packet_hex")


class VectorError(OutfoxError, ValueError):
    pass


@dataclass(frozen=True)
class Mismatch:
    line: int
    layer: int | None
    field: str
    offset: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}"
        if self.layer is not None:
            where += f", layer {self.layer}"
        at = f" at byte {self.offset}" if self.offset is not None else ""
        return f"{where}: {self.field} differs{at}"


def _format(vec: dict) -> PacketFormat:
    suite = get_suite(vec.get("suite", "testkem"))
    if suite != TESTKEM:
        raise VectorError("vectors use the testkem suite only")
    return PacketFormat(
        suite,
        k=int(vec.get("k", 128)),
        layers=int(vec.get("layers", len(vec["route"]))),
        msg_len=int(vec.get("msg_len", len(vec["msg"]) // 2)),
        session_id=vec.get("session_id", "").encode(),
    )


def build(vec: dict) -> tuple[PacketFormat, list, list[Packet]]:
    """Recreate the hop key pairs and every packet layer of a vector."""
    fmt = _format(vec)
    route = list(vec["route"])
    if len(route) != fmt.layers:
        raise VectorError(f"route needs {fmt.layers} entries")
    rng = random.Random(vec["seed"])
    pairs = [kem_keygen(fmt.suite, rng) for _ in route]
    ids = [party_id(name, fmt.k) for name in route]
    hops = [RouteHop(ids[i], pairs[i].public, NextHop(ids[i + 1])) for i in range(len(route) - 1)]
    receiver = RouteHop(ids[-1], pairs[-1].public, None)
    layers = packet_create_layers(fmt, hops, bytes.fromhex(vec["msg"]), receiver, rng=rng)
    return fmt, pairs, layers


def make_vector(seed: int, route: list[str], msg: bytes, k: int = 128, session_id: str = "") -> dict:
    vec = {
        "suite": TESTKEM.name,
        "seed": seed,
        "k": k,
        "layers": len(route),
        "msg_len": len(msg),
        "session_id": session_id,
        "route": list(route),
        "msg": msg.hex(),
    }
    _, _, layers = build(vec)
    vec["expected_packet_hex"] = layers[0].to_bytes().hex()
    return vec


def default_vectors(count: int = 8) -> list[dict]:
    rng = random.Random(2024)
    vectors = []
    for seed in range(count):
        n_layers = 1 + seed % 5
        route = [f"N{i + 1}" for i in range(n_layers - 1)] + ["bob"]
        msg = rng.randbytes(16 * (1 + seed % 4))
        vectors.append(make_vector(seed, route, msg, k=256 if seed % 4 == 3 else 128))
    return vectors


def emit(path: str | Path, vectors: list[dict] | None = None) -> int:
    vectors = default_vectors() if vectors is None else vectors
    Path(path).write_text("".join(json.dumps(v, sort_keys=True) + "\n" for v in vectors))
    return len(vectors)


def _first_diff(a: bytes, b: bytes) -> int | None:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return None if len(a) == len(b) else min(len(a), len(b))


def _unmask(fmt: PacketFormat, pair, header: Header, beta: bytes) -> bytes:
    """Strip the header keystream from ``beta`` without checking any tag."""
    keys = _derive(fmt, kem_decap(fmt.suite, pair.secret, header.kem_ct), header.kem_ct, pair.public)
    return xor_bytes(beta, chacha_stream(keys.header_key, KEY_LEN + len(beta))[KEY_LEN:])


def diagnose(fmt: PacketFormat, pairs, layers: list[Packet], actual: bytes, line: int = 0) -> Mismatch | None:
    """Locate the layer and field where ``actual`` departs from ``layers[0]``.

    Nested headers are reached by stripping the keystream with the recreated
    keys, so corruption inside a ciphertext is pinned to the layer it belongs to.
    """
    expected = layers[0].to_bytes()
    if len(actual) != len(expected):
        return Mismatch(line, None, "packet length", min(len(actual), len(expected)))
    payload_len = fmt.payload_len
    off = _first_diff(actual[-payload_len:], layers[0].payload)
    if off is not None:
        return Mismatch(line, 0, "payload", off)
    header_bytes = actual[:-payload_len]
    for j, ours in enumerate(layers):
        theirs = Header.from_bytes(fmt, header_bytes)
        for name in ("kem_ct", "tag"):
            off = _first_diff(getattr(theirs, name), getattr(ours.header, name))
            if off is not None:
                return Mismatch(line, j, name, off)
        off = _first_diff(theirs.aead_ct, ours.header.aead_ct)
        if off is None:
            return None
        if j == len(layers) - 1:
            return Mismatch(line, j, "routing", off)
        mine = _unmask(fmt, pairs[j], ours.header, ours.header.aead_ct)
        got = _unmask(fmt, pairs[j], ours.header, theirs.aead_ct)
        off = _first_diff(got[: fmt.id_len], mine[: fmt.id_len])
        if off is not None:
            return Mismatch(line, j, "routing", off)
        header_bytes = got[fmt.id_len:]
    return None


def check_vector(vec: dict, line: int = 0) -> Mismatch | None:
    missing = [f for f in ("seed", "route", "msg", "expected_packet_hex") if f not in vec]
    if missing:
        raise VectorError(f"line {line}: missing fields {missing}")
    fmt, pairs, layers = build(vec)
    try:
        actual = bytes.fromhex(vec["expected_packet_hex"])
    except ValueError:
        return Mismatch(line, None, "expected_packet_hex (not hex)")
    return diagnose(fmt, pairs, layers, actual, line)


def check(path: str | Path) -> list[Mismatch]:
    problems = []
    for line, text in enumerate(Path(path).read_text().splitlines(), start=1):
        if not text.strip():
            continue
        try:
            vec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise VectorError(f"line {line}: {exc}") from None
        problem = check_vector(vec, line)
        if problem is not None:
            problems.append(problem)
    return problems
