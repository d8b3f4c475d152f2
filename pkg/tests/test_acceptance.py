"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (the lines appear in the terminal
summary) or ``python tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import inspect
import random
import sys
import time
from unittest import mock

import pytest

from helpers import make_path, terminal
from outfox.bench import run_bench
from outfox.counters import op_counter
from outfox.crypto import MLKEM768, TESTKEM, X25519, XWING, kem_keygen
from outfox.directory import Directory, Privacy
from outfox.errors import HeaderFailure, PayloadFailure
from outfox.mixnet import Mixnet, RouteSpec, Topology
from outfox.mixnet import network
from outfox.packet import (
    Packet,
    PacketFormat,
    RouteHop,
    layer_sizes,
    packet_create,
    packet_create_layers,
    packet_process,
    surb_check,
    surb_create,
    surb_use,
)

RESULTS: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[criterion] = RESULTS[criterion] + " | " + line if criterion in RESULTS else line
    print(line)


def _flip(data: bytes, bit: int) -> bytes:
    out = bytearray(data)
    out[bit // 8] ^= 0x80 >> (bit % 8)
    return bytes(out)


def _topology() -> Topology:
    return Topology(
        gateways=["W1", "W2", "W3"],
        layers=[[f"N{d}{i}" for i in range(1, 4)] for d in range(1, 4)],
        users=["alice", "bob", "carol", "dave"],
        session_id=b"acceptance",
    )


def _random_route(topo: Topology, rng: random.Random, reply: bool) -> RouteSpec:
    sender, receiver = rng.sample(topo.users, 2)
    request = [sender, rng.choice(topo.gateways), *(rng.choice(layer) for layer in topo.layers), rng.choice(topo.gateways), receiver]
    back = None
    if reply:
        back = [rng.choice(topo.gateways), *(rng.choice(layer) for layer in topo.layers), rng.choice(topo.gateways), sender]
    return RouteSpec(request, back)


# -- 1 ----------------------------------------------------------------------------

@pytest.mark.slow
def test_c01_roundtrip():
    cases, start = 1000, time.perf_counter()
    tallies = []
    for suite in (TESTKEM, X25519, MLKEM768):
        rng = random.Random(1000 + int(suite.id))
        topo = _topology()
        net = Mixnet(topo, suite, 256, rng)
        for name in topo.relays:
            net.setup(name)
        for name in topo.users:
            net.register(name)
        requests_ok = replies_ok = replies_wanted = 0
        for _ in range(cases):
            reply = rng.random() < 0.5
            route = _random_route(topo, rng, reply)
            msg = rng.randbytes(256)
            mark = len(net.log)
            net.send_request(route, msg)
            net.flush()
            got = [e for e in net.log.events[mark:] if e["event"] == "deliver"]
            if len(got) == 1 and got[0]["party"] == route.receiver and bytes.fromhex(got[0]["msg"]) == msg:
                requests_ok += 1
            if reply:
                replies_wanted += 1
                answer = rng.randbytes(256)
                mark = len(net.log)
                net.send_reply(route.receiver, got[0]["lpid"], answer)
                net.flush()
                back = [e for e in net.log.events[mark:] if e["event"] == "deliver"]
                if len(back) == 1 and back[0]["party"] == route.sender and bytes.fromhex(back[0]["msg"]) == answer:
                    replies_ok += 1
        tallies.append((suite.name, requests_ok, replies_ok, replies_wanted))
    elapsed = time.perf_counter() - start
    ok = all(r == cases and rok == rw for _, r, rok, rw in tallies)
    detail = ", ".join(f"{n}: {r}/{cases} requests {rok}/{rw} replies" for n, r, rok, rw in tallies)
    report(1, ok, f"{detail}; {elapsed:.1f}s")
    assert ok


# -- 2 ----------------------------------------------------------------------------

def _measure(suite, layers, rng):
    fmt = PacketFormat(suite, k=128, layers=layers, msg_len=1024)
    path = make_path(fmt, rng)
    back = make_path(fmt, rng)
    surb, _, _ = surb_create(fmt, back.route, RouteHop(back.ids[-1], back.pairs[-1].public), rng)
    packets = packet_create_layers(fmt, path.route, rng.randbytes(1024), path.receiver(terminal(fmt, rng)), surb, rng)
    return fmt, packets, surb


SIZE_SUITES = (TESTKEM, X25519, MLKEM768, XWING)


def test_c02_size_law_header_payload():
    rng, checked, bad = random.Random(2), 0, []
    for suite in SIZE_SUITES:
        for l in range(1, 6):  # noqa: E741
            fmt, packets, surb = _measure(suite, l + 1, rng)
            k, p, m = 128, suite.ciphertext_bits, 8 * 1024
            if 8 * len(surb.to_bytes()) != 5 * k + (l + 1) * p + 2 * l * k:
                bad.append((suite.name, l, "surb"))
            for j, pkt in enumerate(packets):
                i = l - j
                want = {
                    "aead_ct": 3 * k + i * p + 2 * i * k,
                    "header": 4 * k + (i + 1) * p + 2 * i * k,
                    "payload": 6 * k + m + (l + 1) * p + 2 * l * k,
                }
                got = {"aead_ct": 8 * len(pkt.header.aead_ct), "header": 8 * len(pkt.header), "payload": 8 * len(pkt.payload)}
                if j == 0:
                    want["packet@0"] = 10 * k + m + 2 * (l + 1) * p + 4 * l * k
                    got["packet@0"] = 8 * len(pkt.to_bytes())
                bad += [(suite.name, l, j, key) for key in want if want[key] != got[key]]
                checked += len(want)
    spot = layer_sizes(PacketFormat(X25519, layers=5).profile)[0]["header"]
    ok = not bad and spot == 352
    report(2, ok, f"header/aead/payload/surb rows and layer-0 packet row: {checked} checks, {len(bad)} mismatches; X25519 l=4 header@0 = {spot} bytes")
    assert ok, bad


@pytest.mark.xfail(strict=True, reason="closed-form per-layer packet row disagrees with header + payload for layers > 0")
def test_c02_size_law_packet_row_every_layer():
    rng, bad, total = random.Random(2), [], 0
    for suite in SIZE_SUITES:
        for l in range(1, 6):  # noqa: E741
            _, packets, _ = _measure(suite, l + 1, rng)
            k, p, m = 128, suite.ciphertext_bits, 8 * 1024
            for j, pkt in enumerate(packets):
                i = l - j
                total += 1
                if 8 * len(pkt.to_bytes()) != 10 * k + m + 2 * (i + 1) * p + 2 * (i + l) * k:
                    bad.append((suite.name, l, j))
    report(2, not bad, f"per-layer packet row 10k+|m|+2(i+1)p+2(i+l)k: {total - len(bad)}/{total} layers match; "
                       "it differs from header+payload by (l-i)p at every layer j>0, so no length-preserving payload can satisfy "
                       "header, payload and packet rows together (see decisions ledger)")
    assert not bad


# -- 3 ----------------------------------------------------------------------------

def test_c03_op_counts():
    rows, ok = [], True
    for suite in (TESTKEM, X25519, MLKEM768, XWING):
        rng = random.Random(3)
        fmt = PacketFormat(suite, layers=5, msg_len=64)
        path = make_path(fmt, rng)
        with op_counter() as create:
            pkt = packet_create(fmt, path.route, bytes(64), path.receiver(), rng=rng)
        procs = []
        for j, pair in enumerate(path.pairs):
            with op_counter() as proc:
                out = packet_process(fmt, pair, pkt, last_layer=j == fmt.layers - 1)
            procs.append((proc["kem_decap"], proc["kem_encap"]))
            pkt = getattr(out, "packet", None)
        good = create["kem_encap"] == fmt.layers and create["kem_decap"] == 0 and all(p == (1, 0) for p in procs)
        ok &= good
        rows.append(f"{suite.name} create {create['kem_encap']}enc/{create['kem_decap']}dec process {procs[0][0]}dec/{procs[0][1]}enc")
    report(3, ok, "; ".join(rows))
    assert ok


# -- 4 ----------------------------------------------------------------------------

def _header_drill(suite, exhaustive: bool, samples: int, rng):
    fmt = PacketFormat(suite, layers=5, msg_len=64)
    path = make_path(fmt, rng)
    packets = packet_create_layers(fmt, path.route, bytes(64), path.receiver(), rng=rng)
    per_layer = []
    for j, pkt in enumerate(packets):
        raw = pkt.to_bytes()
        hbits = 8 * len(pkt.header)
        bits = range(hbits) if (j == 0 and exhaustive) else rng.sample(range(hbits), min(samples, hbits))
        hits = total = 0
        for bit in bits:
            total += 1
            try:
                packet_process(fmt, path.pairs[j], _flip(raw, bit), last_layer=j == fmt.layers - 1)
            except HeaderFailure:
                hits += 1
        per_layer.append((hits, total))
    return per_layer


@pytest.mark.slow
def test_c04_header_tamper():
    rng, ok, rows = random.Random(4), True, []
    for suite, exhaustive in ((X25519, True), (TESTKEM, True), (MLKEM768, False)):
        res = _header_drill(suite, exhaustive, 256, rng)
        ok &= all(h == t for h, t in res)
        rows.append(f"{suite.name} " + " ".join(f"L{j}:{h}/{t}" for j, (h, t) in enumerate(res)))
    report(4, ok, "; ".join(rows))
    assert ok


# -- 5 ----------------------------------------------------------------------------

@pytest.mark.slow
def test_c05_payload_tamper():
    rng = random.Random(5)
    fmt = PacketFormat(X25519, layers=5, msg_len=256)
    path = make_path(fmt, rng)
    packets = packet_create_layers(fmt, path.route, rng.randbytes(256), path.receiver(), rng=rng)
    header_fail_midway = bottoms = 0
    trials = 1000
    for _ in range(trials):
        j = rng.randrange(fmt.layers)
        pkt = packets[j]
        hbits = 8 * len(pkt.header)
        cur = Packet.from_bytes(fmt, _flip(pkt.to_bytes(), hbits + rng.randrange(8 * fmt.payload_len)))
        try:
            for pair in path.pairs[j:-1]:
                cur = packet_process(fmt, pair, cur).packet
        except HeaderFailure:
            header_fail_midway += 1
            continue
        try:
            packet_process(fmt, path.pairs[-1], cur, last_layer=True)
        except PayloadFailure:
            bottoms += 1
    ok = header_fail_midway == 0 and bottoms == trials
    report(5, ok, f"intermediate header failures {header_fail_midway}/{trials}; receiver payload failures {bottoms}/{trials}")
    assert ok


# -- 6 ----------------------------------------------------------------------------

def test_c06_request_reply_indistinguishable():
    topo = _topology()
    net = Mixnet(topo, X25519, 512, random.Random(6))
    for name in topo.relays:
        net.setup(name)
    for name in topo.users:
        net.register(name)
    route = RouteSpec(["alice", "W1", "N11", "N21", "N31", "W2", "bob"], ["W3", "N12", "N22", "N32", "W1", "alice"])

    callers = []
    real = network.packet_process

    def spy(*args, **kwargs):
        callers.append(inspect.stack()[1].function)
        return real(*args, **kwargs)

    with mock.patch.object(network, "packet_process", new=spy), \
            mock.patch.object(Mixnet, "_relay_process", autospec=True, side_effect=Mixnet._relay_process) as relay:
        net.send_request(route, bytes(512))
        net.flush()
        split = len(net.log)
        req_relay, req_callers = relay.call_count, list(callers)
        lpid = net.log.of("deliver")[0]["lpid"]
        net.send_reply("bob", lpid, bytes(512))
        net.flush()
        rep_relay, rep_callers = relay.call_count - req_relay, callers[len(req_callers):]

    req_len = [e["length"] for e in net.log.events[:split] if e["event"] == "dispatch"]
    rep_len = [e["length"] for e in net.log.events[split:] if e["event"] == "dispatch"]
    relay_callers = {c for c in req_callers + rep_callers if c != "_user_receive"}
    ok = (
        req_len == rep_len
        and req_relay == rep_relay == topo.node_layers + 1
        and relay_callers == {"_relay_process"}
        and net.log.count("deliver") == 2
    )
    report(6, ok, f"per-hop lengths request {req_len} reply {rep_len}; relay processing via {sorted(relay_callers)} "
                  f"({req_relay} request, {rep_relay} reply calls)")
    assert ok


# -- 7 ----------------------------------------------------------------------------

@pytest.mark.slow
def test_c07_unlinkability():
    rng = random.Random(7)
    fmt = PacketFormat(X25519, layers=5, msg_len=128)
    identical = leaks = hops = 0
    path = make_path(fmt, rng)
    for n in range(1000):
        if n % 50 == 0:
            path = make_path(fmt, rng)
        surb = None
        receiver = path.receiver()
        if n % 2:
            back = path
            surb, _, _ = surb_create(fmt, back.route, RouteHop(back.ids[-1], back.pairs[-1].public), rng)
            receiver = path.receiver(terminal(fmt, rng))
        packets = packet_create_layers(fmt, path.route, rng.randbytes(128), receiver, surb, rng)
        for j in range(fmt.layers - 1):
            out = packet_process(fmt, path.pairs[j], packets[j]).packet
            raw = out.to_bytes()
            hops += 1
            identical += out == packets[j + 1]
            h = packets[j].header
            leaks += sum(part in raw for part in (h.kem_ct, h.aead_ct, h.tag))
    ok = identical == hops and leaks == 0
    report(7, ok, f"1000 packets, {hops} hops: {identical} outputs equal the creation-time layer, {leaks} substring hits of c/beta/gamma")
    assert ok


# -- 8 ----------------------------------------------------------------------------

def test_c08_surb_matching():
    rng = random.Random(8)
    fmt = PacketFormat(X25519, layers=5, msg_len=64)
    path = make_path(fmt, rng)
    me = RouteHop(path.ids[-1], path.pairs[-1].public)
    ids, replies = [], []
    for _ in range(100):
        surb, idsurb, _ = surb_create(fmt, path.route, me, rng)
        pkt = surb_use(fmt, surb, rng.randbytes(64))
        for pair in path.pairs[:-1]:
            pkt = packet_process(fmt, pair, pkt).packet
        ids.append(idsurb)
        replies.append(pkt.to_bytes())
    fp = fn = 0
    for a, reply in enumerate(replies):
        for b, idsurb in enumerate(ids):
            hit = surb_check(fmt, reply, idsurb)
            fp += hit and a != b
            fn += (not hit) and a == b
    ok = fp == 0 and fn == 0
    report(8, ok, f"{len(replies) * len(ids)} pairings: {fp} false positives, {fn} false negatives")
    assert ok


# -- 9 ----------------------------------------------------------------------------

def test_c09_directory_leakage():
    rng = random.Random(9)
    d = Directory()
    private = [rng.randbytes(16) for _ in range(1000)]
    public = [rng.randbytes(16) for _ in range(1000)]
    for t in private:
        d.register(t, X25519, bytes(32), Privacy.PRIVATE)
    for t in public:
        d.register(t, X25519, bytes(32), Privacy.PUBLIC)
    requester = rng.randbytes(16)
    for t in private:
        assert d.retrieve(requester, t, Privacy.PRIVATE) is not None
    text = repr(d.audit)
    private_hits = sum(t.hex() in text for t in private)
    for t in public:
        assert d.retrieve(requester, t, Privacy.PUBLIC) is not None
    text = repr(d.audit)
    public_hits = sum(t.hex() in text for t in public)
    ok = private_hits == 0 and public_hits == 1000
    report(9, ok, f"private targets in audit log {private_hits}/1000; public targets {public_hits}/1000")
    assert ok


# -- 10 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_c10_bench():
    reports = run_bench((X25519, MLKEM768, XWING, TESTKEM), iterations=30, layers=5, msg_len=1000, seed=10)
    ok = all(r.ok for r in reports)
    rows = [f"{r.suite} create {r.median_us['create']:.0f}us process {r.median_us['process_node']:.0f}us" for r in reports]
    report(10, ok, "process < create at L=5: " + "; ".join(rows))
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
