"""Timing and operation-count report for packet creation and processing.

Timings depend on the host and are reported, never compared against fixed
numbers. Two properties are asserted: processing one layer costs a single
decapsulation and no encapsulation, and at five layers it is faster than
creating the packet.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import asdict, dataclass, field

from outfox.counters import op_counter
from outfox.crypto.kem import MLKEM768, TESTKEM, X25519, XWING, KemSuite, get_suite, kem_decap, kem_encap, kem_keygen
from outfox.packet import NextHop, PacketFormat, RouteHop, packet_create, packet_process

DEFAULT_SUITES = (X25519, MLKEM768, XWING)

# Rust (libcrux / dalek) measurements on server-class hardware, in microseconds.
# Shown next to local numbers for orientation only.
REFERENCE_US = {
    "x25519": {"keygen": 34.428, "encap": 69.587, "decap": 34.331, "create": 249.74, "process_node": 31.00, "process_user": 30.85},
    "mlkem768": {"keygen": 13.732, "encap": 14.485, "decap": 15.896, "create": 1130.0, "process_node": 243.92, "process_user": 225.30},
    "xwing": {"keygen": 48.438, "encap": 84.337, "decap": 50.218, "create": 1344.0, "process_node": 482.17, "process_user": 466.99},
}


@dataclass
class SuiteReport:
    suite: str
    layers: int
    iterations: int
    median_us: dict[str, float] = field(default_factory=dict)
    create_ops: dict[str, int] = field(default_factory=dict)
    process_ops: dict[str, int] = field(default_factory=dict)
    reference_us: dict[str, float] = field(default_factory=dict)

    @property
    def process_faster(self) -> bool:
        t = self.median_us
        return max(t["process_node"], t["process_user"]) < t["create"]

    @property
    def one_decap(self) -> bool:
        return self.process_ops.get("kem_decap") == 1 and not self.process_ops.get("kem_encap")

    @property
    def ok(self) -> bool:
        return self.process_faster and self.one_decap

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(process_faster=self.process_faster, one_decap=self.one_decap, ok=self.ok)
        return d


def _median_us(fn, iterations: int) -> float:
    samples = []
    for _ in range(iterations):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1e6)
    return statistics.median(samples)


def bench_suite(suite: KemSuite, iterations: int = 50, layers: int = 5, msg_len: int = 1000, seed: int | None = None) -> SuiteReport:
    suite = get_suite(suite)
    rng = random.Random(seed) if seed is not None else random.SystemRandom()
    fmt = PacketFormat(suite, k=128, layers=layers, msg_len=msg_len)
    pairs = [kem_keygen(suite, rng) for _ in range(layers)]
    ids = [rng.randbytes(fmt.id_len) for _ in range(layers)]
    route = [RouteHop(ids[i], pairs[i].public, NextHop(ids[i + 1])) for i in range(layers - 1)]
    receiver = RouteHop(ids[-1], pairs[-1].public, None)
    msg = rng.randbytes(msg_len)

    with op_counter() as create_ops:
        packet = packet_create(fmt, route, msg, receiver, rng=rng)
    with op_counter() as process_ops:
        packet_process(fmt, pairs[0], packet)

    # innermost layer, as the end user sees it
    inner = packet
    for pair in pairs[:-1]:
        inner = packet_process(fmt, pair, inner).packet
    pk, sk = pairs[0].public, pairs[0].secret
    _, ct = kem_encap(suite, pk, rng)

    report = SuiteReport(suite.name, layers, iterations, reference_us=REFERENCE_US.get(suite.name, {}))
    report.median_us = {
        "keygen": _median_us(lambda: kem_keygen(suite, rng), iterations),
        "encap": _median_us(lambda: kem_encap(suite, pk, rng), iterations),
        "decap": _median_us(lambda: kem_decap(suite, sk, ct), iterations),
        "create": _median_us(lambda: packet_create(fmt, route, msg, receiver, rng=rng), iterations),
        "process_node": _median_us(lambda: packet_process(fmt, pairs[0], packet), iterations),
        "process_user": _median_us(lambda: packet_process(fmt, pairs[-1], inner, last_layer=True), iterations),
    }
    report.create_ops = dict(create_ops)
    report.process_ops = dict(process_ops)
    return report


def run_bench(suites=DEFAULT_SUITES, iterations: int = 50, layers: int = 5, msg_len: int = 1000, seed: int | None = None) -> list[SuiteReport]:
    return [bench_suite(s, iterations, layers, msg_len, seed) for s in suites]


def format_table(reports: list[SuiteReport]) -> str:
    cols = ("keygen", "encap", "decap", "create", "process_node", "process_user")
    lines = [f"{'suite':<10}" + "".join(f"{c:>14}" for c in cols) + f"{'decaps/proc':>13}{'ok':>5}"]
    for r in reports:
        lines.append(
            f"{r.suite:<10}" + "".join(f"{r.median_us[c]:>12.1f}us" for c in cols)
            + f"{r.process_ops.get('kem_decap', 0):>13}{'yes' if r.ok else 'NO':>5}"
        )
        if r.reference_us:
            lines.append(f"{'  ref':<10}" + "".join(f"{r.reference_us[c]:>12.1f}us" for c in cols))
    return "\n".join(lines)


__all__ = ["DEFAULT_SUITES", "REFERENCE_US", "SuiteReport", "TESTKEM", "bench_suite", "format_table", "run_bench"]
