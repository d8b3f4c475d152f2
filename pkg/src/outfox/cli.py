"""Batch tool: keys, sizes, packets on files, simulation, benchmarks, vectors.

Exit codes: 0 success, 1 protocol abort surfaced, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from importlib.resources import files
from pathlib import Path

from outfox.crypto.kem import PRODUCTION_SUITES, TESTKEM, get_suite, kem_keygen
from outfox.crypto.keyfile import KeyFileError, read_keypair, read_public, write_keypair
from outfox.directory import Directory, Privacy
from outfox.errors import HeaderFailure, OutfoxError, PayloadFailure
from outfox.mixnet import Topology, TopologyError, load_script, run_scenario
from outfox.mixnet.scenario import ScenarioError, decode_message
from outfox.mixnet.topology import party_id
from outfox.packet import Deliver, NextHop, PacketFormat, RouteHop, layer_sizes, packet_create, packet_process

EXIT_OK, EXIT_ABORT, EXIT_USAGE = 0, 1, 2

SUITE_NAMES = [s.name for s in PRODUCTION_SUITES]
BUNDLED_SCENARIOS = ("happy", "header_tamper", "payload_tamper")


class UsageError(Exception):
    pass


def _data(name: str):
    return files("outfox") / "data" / name


def _rng(seed):
    return random.Random(seed) if seed is not None else random.SystemRandom()


def _emit(args, payload, human: str) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True) if args.json else human)


def _suite(name: str):
    try:
        suite = get_suite(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if suite == TESTKEM:
        raise UsageError("testkem is for test vectors only")
    return suite


def _topology(args) -> Topology:
    path = args.topology or _data("topology.json")
    try:
        return Topology.load(path, k=args.k)
    except OSError as exc:
        raise UsageError(f"cannot read topology: {exc}") from None


def _format(args, layers=None) -> PacketFormat:
    try:
        return PacketFormat(_suite(args.suite), k=args.k, layers=layers or args.layers, msg_len=args.msg_len)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- commands ----------------------------------------------------------------

def cmd_keygen(args) -> int:
    if not args.out:
        raise UsageError("keygen needs --out STEM")
    pair = kem_keygen(_suite(args.suite), _rng(args.seed))
    pk_path, sk_path = write_keypair(pair, args.out)
    _emit(args, {"suite": pair.suite.name, "public": str(pk_path), "secret": str(sk_path), "public_key_len": len(pair.public)},
          f"{pair.suite.name}: wrote {pk_path} ({len(pair.public)}-byte key) and {sk_path}")
    return EXIT_OK


def cmd_sizes(args) -> int:
    fmt = _format(args)
    rows = layer_sizes(fmt.profile)
    report = {"suite": fmt.suite.name, "k": fmt.k, "layers": fmt.layers, "msg_len": fmt.msg_len,
              "surb": fmt.surb_len, "rows": rows}
    cols = ("layer", "kem_ct", "aead_ct", "tag", "header", "payload", "packet")
    lines = [f"{fmt.suite.name} k={fmt.k} layers={fmt.layers} msg_len={fmt.msg_len} surb={fmt.surb_len} (bytes)",
             "".join(f"{c:>9}" for c in cols)]
    lines += ["".join(f"{row[c]:>9}" for c in cols) for row in rows]
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


def cmd_simulate(args) -> int:
    topology = _topology(args)
    name = args.scenario or "happy"
    path = _data(f"{name}.jsonl") if name in BUNDLED_SCENARIOS else Path(name)
    try:
        script = load_script(path)
    except OSError as exc:
        raise UsageError(f"cannot read scenario: {exc}") from None
    log, runner = run_scenario(topology, script, _suite(args.suite), args.msg_len, args.seed)
    if args.out:
        Path(args.out).write_text(log.to_jsonl())
    problems = runner.unmet()
    summary = {e: log.count(e) for e in ("deliver", "header_fail", "payload_fail", "abort")}
    deliveries = [
        {"party": e["party"], "kind": e["kind"], "length": e["length"], "text": decode_message(e["msg"])}
        for e in log.of("deliver")
    ]
    lines = [f"{len(log)} events: " + ", ".join(f"{k}={v}" for k, v in summary.items())]
    lines += [f"  {d['kind']:<8} -> {d['party']}: {d['text']!r} ({d['length']} bytes)" for d in deliveries]
    lines += [f"  problem: {p}" for p in problems]
    _emit(args, {"summary": summary, "deliveries": deliveries, "problems": problems,
                 "events": log.events if args.out is None else str(args.out)}, "\n".join(lines))
    return EXIT_ABORT if problems else EXIT_OK


def cmd_bench(args) -> int:
    from outfox.bench import format_table, run_bench

    suites = [_suite(s) for s in (args.suite_list or SUITE_NAMES)]
    reports = run_bench(suites, args.iterations, args.layers, args.msg_len, args.seed)
    _emit(args, [r.to_dict() for r in reports], format_table(reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_ABORT


def cmd_vector(args) -> int:
    from outfox import vectors

    if args.mode == "emit":
        n = vectors.emit(args.path)
        _emit(args, {"emitted": n, "path": args.path}, f"wrote {n} vectors to {args.path}")
        return EXIT_OK
    try:
        problems = vectors.check(args.path)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, {"ok": not problems, "mismatches": [str(p) for p in problems]},
          "all vectors match" if not problems else "\n".join(f"FAIL {p}" for p in problems))
    return EXIT_ABORT if problems else EXIT_OK


def cmd_create(args) -> int:
    """Build a request packet for a route of public-key files (last one receives)."""
    if not args.route or not args.out:
        raise UsageError("create needs --route PK... and --out")
    keys = [read_public(p) for p in args.route]
    suites = {s for s, _ in keys}
    if len(suites) != 1:
        raise UsageError("all route keys must share one suite")
    args.suite = suites.pop().name
    fmt = _format(args, layers=len(keys))
    ids = [party_id(Path(p).name.rsplit(".", 1)[0], fmt.k) for p in args.route]
    hops = [RouteHop(ids[i], keys[i][1], NextHop(ids[i + 1])) for i in range(len(keys) - 1)]
    raw = args.msg.encode()
    if len(raw) > fmt.msg_len:
        raise UsageError(f"message exceeds {fmt.msg_len} bytes")
    packet = packet_create(fmt, hops, raw + bytes(fmt.msg_len - len(raw)), RouteHop(ids[-1], keys[-1][1]), rng=_rng(args.seed))
    Path(args.out).write_bytes(packet.to_bytes())
    _emit(args, {"out": args.out, "length": len(packet), "layers": fmt.layers},
          f"wrote {len(packet)}-byte packet ({fmt.layers} layers) to {args.out}")
    return EXIT_OK


def cmd_process(args) -> int:
    """Remove one layer with a secret-key file; ``--last`` for the receiver."""
    if not args.key or not args.packet:
        raise UsageError("process needs --key SK and --packet FILE")
    pair = read_keypair(args.key)
    args.suite = pair.suite.name
    fmt = _format(args)
    try:
        out = packet_process(fmt, pair, Path(args.packet).read_bytes(), last_layer=args.last)
    except HeaderFailure as exc:
        _emit(args, {"result": "header_fail", "reason": str(exc)}, f"header failure: {exc}")
        return EXIT_ABORT
    except PayloadFailure as exc:
        _emit(args, {"result": "payload_fail", "reason": str(exc)}, f"payload failure: {exc}")
        return EXIT_ABORT
    if isinstance(out, Deliver):
        text = out.message.rstrip(b"\0").decode(errors="replace")
        _emit(args, {"result": "deliver", "msg_hex": out.message.hex()}, f"delivered: {text!r}")
        return EXIT_OK
    if args.out:
        Path(args.out).write_bytes(out.packet.to_bytes())
    _emit(args, {"result": "forward", "next_hop_hex": out.routing.party.hex(), "length": len(out.packet)},
          f"forward {len(out.packet)} bytes to {out.routing.party.hex()}")
    return EXIT_OK


def cmd_directory(args) -> int:
    """Export the relay directory of a seeded topology, or list an exported file."""
    if args.mode == "export":
        topology = _topology(args)
        suite, rng = _suite(args.suite), _rng(args.seed)
        directory = Directory()
        for name in topology.relays:
            directory.register(topology[name].id, suite, kem_keygen(suite, rng).public, Privacy.PUBLIC)
        text = directory.export_json()
        if args.out:
            Path(args.out).write_text(text)
        _emit(args, json.loads(text), text if not args.out else f"wrote {len(directory)} records to {args.out}")
        return EXIT_OK
    if not args.path:
        raise UsageError("directory show needs a path")
    try:
        directory = Directory.import_json(Path(args.path).read_text())
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load directory: {exc}") from None
    records = json.loads(directory.export_json())
    _emit(args, records, "\n".join(f"{r['party_hex']} {r['suite']:<9} {r['privacy']:<8} {len(r['pk_hex']) // 2} bytes" for r in records))
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--suite", default="x25519", help=f"KEM suite ({', '.join(SUITE_NAMES)})")
    common.add_argument("--k", type=int, default=128, choices=(128, 256), help="security parameter in bits")
    common.add_argument("--layers", type=int, default=5, help="encryption layers per packet")
    common.add_argument("--msg-len", type=int, default=1024, help="message length in bytes")
    common.add_argument("--seed", type=int, default=None, help="seed for reproducible output")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--topology", default=None, help="topology JSON (default: bundled)")
    common.add_argument("--scenario", default=None, help="scenario JSON-lines or bundled name")
    common.add_argument("--out", default=None, help="output path")

    parser = argparse.ArgumentParser(prog="outfox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("keygen", parents=[common], help="generate a key pair")
    sub.add_parser("sizes", parents=[common], help="per-layer size table")
    sub.add_parser("simulate", parents=[common], help="run a scenario")
    bench = sub.add_parser("bench", parents=[common], help="timing and op-count report")
    bench.add_argument("--iterations", type=int, default=50)
    bench.add_argument("suite_list", nargs="*", metavar="SUITE")
    vector = sub.add_parser("vector", parents=[common], help="emit or check test vectors")
    vector.add_argument("mode", choices=("emit", "check"))
    vector.add_argument("path")
    create = sub.add_parser("create", parents=[common], help="create a packet from key files")
    create.add_argument("--route", nargs="+", help="public-key files, receiver last")
    create.add_argument("--msg", default="", help="message text")
    process = sub.add_parser("process", parents=[common], help="remove one layer of a packet file")
    process.add_argument("--key", help="secret-key file")
    process.add_argument("--packet", help="packet file")
    process.add_argument("--last", action="store_true", help="this party is the receiver")
    directory = sub.add_parser("directory", parents=[common], help="export or show a key directory")
    directory.add_argument("mode", choices=("export", "show"))
    directory.add_argument("path", nargs="?")
    return parser


COMMANDS = {
    "keygen": cmd_keygen, "sizes": cmd_sizes, "simulate": cmd_simulate, "bench": cmd_bench,
    "vector": cmd_vector, "create": cmd_create, "process": cmd_process, "directory": cmd_directory,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, TopologyError, ScenarioError, KeyFileError) as exc:
        print(f"outfox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutfoxError as exc:
        print(f"outfox: aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
