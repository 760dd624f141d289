"""ecdsalab command line.

Exit codes: 0 success/accept, 1 verification rejected, 2 usage or parse
error, 3 attack not applicable (nothing recovered).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import secrets
import sys
from dataclasses import dataclass, field

from . import attacks, scenarios
from .bigmod import from_hex, to_hex
from .curve import curve_ids, decode_point, encode_point, registry_get
from .ecdsa import (
    BiasedTopZero,
    FaultOnR,
    Fixed,
    KeyPair,
    ReuseTag,
    SignedMessage,
    Signer,
    Uniform,
    keygen,
    verify,
)
from .errors import EcdsaLabError
from .lattice import dump_basis

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_NOT_APPLICABLE = 0, 1, 2, 3

ATTACKS = ("revealed-nonce", "reuse", "two-key", "fault", "biased")


class UsageError(Exception):
    pass


def default_curve() -> str:
    return os.environ.get("ECDSALAB_CURVE", "secp256k1")


def _rng(seed):
    return random.Random(seed) if seed is not None else secrets.SystemRandom()


def _emit(obj, as_json: bool, text: str | None = None, out=None):
    out = out or sys.stdout
    if as_json or text is None:
        out.write(json.dumps(obj) + "\n")
    else:
        out.write(text + "\n")


# -- corpus I/O --------------------------------------------------------------


@dataclass
class Corpus:
    records: list[SignedMessage]
    indices: list[int]
    source: str
    errors: list[dict] = field(default_factory=list)


def load_corpus(path: str, lenient: bool = False) -> Corpus:
    """Read a JSONL corpus.  ``indices[i]`` is the 0-based line of record i."""
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    corpus = Corpus([], [], path)
    with fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                sm = SignedMessage.loads(line)
            except (ValueError, KeyError, TypeError) as exc:
                if not lenient:
                    raise UsageError(f"{path}:{lineno + 1}: {exc}") from exc
                corpus.errors.append({"line": lineno + 1, "error": str(exc)})
                continue
            corpus.records.append(sm)
            corpus.indices.append(lineno)
    return corpus


def write_records(records, out):
    for sm in records:
        out.write(sm.dumps() + "\n")


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8")


# -- keys --------------------------------------------------------------------


def load_key(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        c = registry_get(obj["curve"])
        d = from_hex(obj["d"])
        Q = decode_point(obj["pub"], c)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: bad key file: {exc}") from exc
    return c, KeyPair(d, Q)


def parse_policy(text: str):
    name, _, arg = text.partition(":")
    try:
        if name == "uniform" and not arg:
            return Uniform()
        if name == "fixed":
            return Fixed(from_hex(arg))
        if name == "reuse":
            return ReuseTag(arg or "default")
        if name == "biased":
            return BiasedTopZero(int(arg))
        if name == "fault" and not arg:
            return FaultOnR()
    except ValueError:
        pass
    raise UsageError(f"bad policy {text!r}; use uniform, fixed:HEX, reuse:TAG, biased:BITS or fault")


# -- commands ----------------------------------------------------------------


def cmd_keygen(args) -> int:
    c = registry_get(args.curve)
    kp = keygen(c, _rng(args.seed))
    obj = {"curve": c.id, "d": to_hex(kp.d, c.scalar_bytes), "pub": encode_point(kp.Q, c)}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
            fh.write("\n")
        _emit({"curve": c.id, "pub": obj["pub"], "out": args.out}, args.json,
              f"wrote {c.id} key to {args.out}")
    else:
        _emit(obj, True)
    return EXIT_OK


def cmd_sign(args) -> int:
    c, kp = load_key(args.key)
    policy = parse_policy(args.policy)
    items = [m.encode() for m in args.message or []]
    try:
        items += [bytes.fromhex(m) for m in args.message_hex or []]
        items += [from_hex(h) % c.n for h in args.hash or []]
    except ValueError as exc:
        raise UsageError(f"bad hex input: {exc}") from exc
    if not items:
        raise UsageError("nothing to sign; pass --message, --message-hex or --hash")
    signer = Signer(c, kp, _rng(args.seed))
    out = _open_out(args.out)
    try:
        for item in items:
            res = signer.sign(item, policy, leak_nonce=args.leak_nonce)
            write_records(res if isinstance(res, tuple) else [res], out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_verify(args) -> int:
    corpus = load_corpus(args.records)
    results = []
    for line, sm in zip(corpus.indices, corpus.records):
        results.append({"index": line, "valid": verify(sm)})
    ok = all(r["valid"] for r in results) and bool(results)
    text = "\n".join(f"{r['index']}: {'ACCEPT' if r['valid'] else 'REJECT'}" for r in results)
    _emit({"results": results, "valid": ok}, args.json, text or "no records")
    return EXIT_OK if ok else EXIT_REJECT


def _outcome(fn, *a):
    try:
        return fn(*a), None
    except EcdsaLabError as exc:
        return None, {"error": type(exc).__name__, "message": str(exc)}


def scan(corpus: Corpus, exploit: bool = False) -> dict:
    """Build the scan report for a loaded corpus; ordering is deterministic."""
    recs, lines = corpus.records, corpus.indices
    groups = attacks.detect_duplicate_r(recs)
    report = {
        "corpus": corpus.source,
        "records": len(recs),
        "parse_errors": corpus.errors,
        "reuse_groups": [],
        "duplicate_groups": [],
        "cross_key_groups": [],
        "quadruples": [],
    }
    recovered = {}

    def enc(i):
        return encode_point(recs[i].Q, registry_get(recs[i].curve))

    for g in groups:
        w = registry_get(recs[g.indices[0]].curve).scalar_bytes
        entry = {"r": to_hex(g.r, w), "indices": [lines[i] for i in g.indices]}
        if g.kind == "cross-key":
            entry["pubs"] = list(dict.fromkeys(enc(i) for i in g.indices))
            report["cross_key_groups"].append(entry)
            continue
        entry["pub"] = enc(g.indices[0])
        if g.kind == "duplicate":
            report["duplicate_groups"].append(entry)
            continue
        if exploit:
            first, err = g.indices[0], None
            for other in g.indices[1:]:
                res, err = _outcome(attacks.recover_from_nonce_reuse, recs[first], recs[other])
                if res is not None:
                    entry["outcome"] = res.report([lines[first], lines[other]])
                    recovered[entry["pub"]] = entry["outcome"]["recovered_d"]
                    break
            else:
                entry["outcome"] = err
        report["reuse_groups"].append(entry)

    # two cross-key groups over the same pair of keys form a two-key quadruple
    by_pair: dict = {}
    paired = set()
    cross = [g for g in groups if g.kind == "cross-key"]
    for gi, g in enumerate(cross):
        first_by_key: dict = {}
        for i in g.indices:
            first_by_key.setdefault(recs[i].Q, i)
        keys = list(first_by_key)
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                pair = frozenset((keys[a], keys[b]))
                for gj, prev in by_pair.get(pair, []):
                    if gj in paired or gi in paired:
                        continue
                    q1, q2 = recs[prev[0]].Q, recs[prev[1]].Q
                    quad = (prev[0], prev[1], first_by_key[q1], first_by_key[q2])
                    paired.update((gi, gj))
                    entry = {"indices": [lines[i] for i in quad], "pubs": [enc(quad[0]), enc(quad[1])]}
                    if exploit:
                        res, err = _outcome(attacks.recover_two_keys_shared_nonces,
                                            *(recs[i] for i in quad))
                        entry["outcome"] = err if res is None else res.report(entry["indices"])
                        if res is not None:
                            recovered[entry["pubs"][0]] = entry["outcome"]["recovered_d"][0]
                            recovered[entry["pubs"][1]] = entry["outcome"]["recovered_d"][1]
                    report["quadruples"].append(entry)
                by_pair.setdefault(pair, []).append(
                    (gi, (first_by_key[keys[a]], first_by_key[keys[b]]))
                )
    for gi, entry in enumerate(report["cross_key_groups"]):
        entry["in_quadruple"] = gi in paired
    unpaired = sum(1 for gi in range(len(cross)) if gi not in paired)
    report["counts"] = {
        "reuse_groups": len(report["reuse_groups"]),
        "duplicate_groups": len(report["duplicate_groups"]),
        "cross_key_groups": len(cross),
        "quadruples": len(report["quadruples"]),
        "findings": len(report["reuse_groups"]) + len(report["quadruples"]) + unpaired,
        "recovered_keys": len(recovered),
    }
    if exploit:
        report["recovered"] = [{"pub": k, "d": v} for k, v in recovered.items()]
    return report


def cmd_scan(args) -> int:
    corpus = load_corpus(args.corpus, lenient=args.lenient)
    sys.stdout.write(json.dumps(scan(corpus, args.exploit), indent=None if args.json else 1) + "\n")
    return EXIT_OK


def _pick(corpus: Corpus, wanted: list[int] | None, count: int | None) -> list[SignedMessage]:
    """Records by line index (0-based), or the whole file."""
    if wanted:
        pos = {line: i for i, line in enumerate(corpus.indices)}
        try:
            recs = [corpus.records[pos[w]] for w in wanted]
        except KeyError as exc:
            raise UsageError(f"no record at index {exc.args[0]}") from None
    else:
        recs = corpus.records
    if count is not None and len(recs) != count:
        raise UsageError(f"this attack takes exactly {count} records, got {len(recs)}; select with --index")
    return recs


def cmd_attack(args) -> int:
    corpus = load_corpus(args.inputs)
    name = args.name
    try:
        if name == "revealed-nonce":
            (sm,) = _pick(corpus, args.index, 1)
            k = from_hex(args.nonce) if args.nonce else sm.k
            if k is None:
                raise UsageError("no nonce: pass --nonce or use a record with a 'k' field")
            res = attacks.recover_from_revealed_nonce(sm, k)
        elif name == "reuse":
            res = attacks.recover_from_nonce_reuse(*_pick(corpus, args.index, 2))
        elif name == "two-key":
            res = attacks.recover_two_keys_shared_nonces(*_pick(corpus, args.index, 4))
        elif name == "fault":
            res = attacks.recover_from_fault(*_pick(corpus, args.index, 2))
        else:
            if args.bits is None:
                raise UsageError("biased attack needs --bits")
            recs = _pick(corpus, args.index, None)
            if args.dump_lattice:
                from .lattice import HnpInstance, build_hnp_lattice

                c = registry_get(recs[0].curve)
                inst = HnpInstance.from_signatures(recs, c.n, c.n.bit_length() - args.bits)
                try:
                    sys.stderr.write(dump_basis(build_hnp_lattice(inst)))
                except EcdsaLabError:
                    pass
            res = attacks.recover_from_biased_nonces(recs, args.bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except EcdsaLabError as exc:
        _emit({"attack": name, "error": type(exc).__name__, "message": str(exc)}, args.json,
              f"{type(exc).__name__}: {exc}", out=sys.stderr if not args.json else None)
        return EXIT_NOT_APPLICABLE
    pos = {id(sm): line for sm, line in zip(corpus.records, corpus.indices)}
    report = res.report([pos[id(sm)] for sm in res.evidence])
    _emit(report, True)
    return EXIT_OK


# -- demo --------------------------------------------------------------------


def _demo_defaults(c, bits, count):
    N = c.n.bit_length()
    bits = bits or N // 2
    count = count or max(4, math.ceil((N + 64) / bits))
    return bits, count


def run_demo(scenario: str, seed: int, curve: str, bits=None, count=None) -> list[str]:
    """Transcript lines for one planted attack; raises if recovery fails."""
    c = registry_get(curve)
    rng = random.Random(seed)
    w = c.scalar_bytes
    hx = lambda v: to_hex(v, w)  # noqa: E731
    lines = [f"scenario {scenario}  curve {c.id}  seed {seed}"]

    def show(tag, sm):
        lines.append(f"  {tag}: h={hx(sm.h)}")
        lines.append(f"  {tag}: r={hx(sm.r)}")
        lines.append(f"  {tag}: s={hx(sm.s)}")

    if scenario == "revealed-nonce":
        kp, sm = scenarios.revealed_nonce(c, rng)
        show("sig", sm)
        lines.append(f"  leaked k={hx(sm.k)}")
        res = attacks.recover_from_revealed_nonce(sm, sm.k)
        planted = [kp.d]
        got = [res.d]
    elif scenario == "reuse":
        kp, sm1, sm2, k = scenarios.nonce_reuse(c, rng)
        show("sig1", sm1)
        show("sig2", sm2)
        lines.append(f"  r1 == r2: {sm1.r == sm2.r}")
        res = attacks.recover_from_nonce_reuse(sm1, sm2)
        lines.append(f"  recovered k={hx(res.k)} (planted {hx(k)})")
        planted, got = [kp.d], [res.d]
    elif scenario == "two-key":
        kp1, kp2, sigs, _, _ = scenarios.two_keys_shared_nonces(c, rng)
        for i, sm in enumerate(sigs, 1):
            show(f"sig{i}", sm)
        res = attacks.recover_two_keys_shared_nonces(*sigs)
        lines.append(f"  recovered k1={hx(res.k1)} k2={hx(res.k2)}")
        planted, got = [kp1.d, kp2.d], [res.x1, res.x2]
    elif scenario == "fault":
        kp, valid, faulty = scenarios.fault(c, rng)
        show("valid", valid)
        show("faulty", faulty)
        lines.append(f"  r != r_f: {valid.r != faulty.r}   same h: {valid.h == faulty.h}")
        res = attacks.recover_from_fault(valid, faulty)
        lines.append(f"  reconstructed k={hx(res.k)}")
        planted, got = [kp.d], [res.d]
    elif scenario == "biased":
        bits, count = _demo_defaults(c, bits, count)
        kp, sigs = scenarios.biased(c, rng, bits, count)
        lines.append(f"  bias: top {bits} bits of k are zero, {count} signatures")
        for i, sm in enumerate(sigs, 1):
            show(f"sig{i}", sm)
        res = attacks.recover_from_biased_nonces(sigs, bits)
        lines.append("  lattice basis:")
        lines.extend("    " + row for row in dump_basis(res.extra["basis"]).splitlines())
        lines.append("  reduced basis:")
        lines.extend("    " + row for row in dump_basis(res.extra["reduced"]).splitlines())
        planted, got = [kp.d], [res.d]
    else:
        raise UsageError(f"unknown scenario {scenario!r}")
    for p, g in zip(planted, got):
        if p != g:
            raise AssertionError(f"demo recovered {hx(g)}, planted {hx(p)}")
    lines.append("RECOVERED " + " ".join(f"d={hx(g)}" for g in got))
    return lines


def cmd_demo(args) -> int:
    lines = run_demo(args.scenario, args.seed, args.curve, args.bits, args.count)
    if args.json:
        _emit({"scenario": args.scenario, "seed": args.seed, "curve": args.curve,
               "transcript": lines}, True)
    else:
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    c = registry_get(args.curve)
    planted = scenarios.planted_corpus(
        c, _rng(args.seed), args.records, args.reuse_pairs, args.quadruples, args.keys
    )
    out = _open_out(args.out)
    try:
        write_records(planted.records, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            json.dump({
                "reuse_pairs": planted.reuse_pairs,
                "quadruples": planted.quadruples,
                "keys": {encode_point(Q, c): to_hex(d, c.scalar_bytes)
                         for Q, d in planted.planted_keys.items()},
            }, fh, indent=1)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    ap = argparse.ArgumentParser(prog="ecdsalab", description="ECDSA nonce-misuse workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", parents=[common], help="generate a key pair")
    p.add_argument("--curve", default=default_curve(), choices=curve_ids())
    p.add_argument("--out", help="key file (default: print to stdout)")
    p.add_argument("--seed", type=int, help="deterministic RNG seed (default: OS entropy)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("sign", parents=[common], help="sign messages, one JSONL record each")
    p.add_argument("--key", required=True)
    p.add_argument("--message", action="append", help="UTF-8 message (repeatable)")
    p.add_argument("--message-hex", action="append", help="hex-encoded message (repeatable)")
    p.add_argument("--hash", action="append", help="precomputed digest scalar in hex (repeatable)")
    p.add_argument("--policy", default="uniform",
                   help="uniform | fixed:HEX | reuse:TAG | biased:BITS | fault")
    p.add_argument("--leak-nonce", action="store_true", help="record k in the output")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", parents=[common], help="verify JSONL records")
    p.add_argument("records", help="JSONL file or - for stdin")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", parents=[common], help="find duplicate-r patterns in a corpus")
    p.add_argument("corpus")
    p.add_argument("--exploit", action="store_true", help="attempt key recovery on findings")
    p.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("attack", parents=[common], help="run one key-recovery attack")
    p.add_argument("name", choices=ATTACKS)
    p.add_argument("inputs", help="JSONL file with the evidence records")
    p.add_argument("--index", type=int, action="append",
                   help="0-based line of a record to use (repeatable, in attack order)")
    p.add_argument("--nonce", help="revealed nonce in hex (revealed-nonce)")
    p.add_argument("--bits", type=int, help="forced-zero top nonce bits (biased)")
    p.add_argument("--dump-lattice", action="store_true", help="print the HNP basis to stderr")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("demo", parents=[common], help="reproducible planted attack walkthrough")
    p.add_argument("scenario", choices=ATTACKS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve", default=default_curve(), choices=curve_ids())
    p.add_argument("--bits", type=int, help="bias for the biased scenario")
    p.add_argument("--count", type=int, help="signature count for the biased scenario")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("gen-corpus", parents=[common], help="write a planted JSONL corpus")
    p.add_argument("--curve", default=default_curve(), choices=curve_ids())
    p.add_argument("--records", type=int, default=10_000)
    p.add_argument("--reuse-pairs", type=int, default=0)
    p.add_argument("--quadruples", type=int, default=0)
    p.add_argument("--keys", type=int, default=50, help="filler signing keys")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--truth", help="also write the planted indices and keys here")
    p.set_defaults(func=cmd_gen_corpus)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ecdsalab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, EcdsaLabError) as exc:
        print(f"ecdsalab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
