"""Command-line entry point: property suites, reductions, tradeoff sweeps,
crypto tools, and bound tables, all deterministically seeded.

Exit codes: 0 success, 1 check failure or I/O problem, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import crypto
from .bp import from_json_dict, to_json_dict
from .gf2 import BitVector
from .learners import (
    TradeoffPoint,
    estimate_sample_complexity,
    exhaustive_learner,
    gaussian_learner,
    prefix_pivot_learner,
)
from .lowerbound import reach_probability_bound, tradeoff_exponent
from .reduction import ReductionParams, reduce_to_affine
from .suites import run_all_suites

LEARNER_FACTORIES = {
    "gaussian": lambda n: gaussian_learner(n),
    "prefix": lambda n: prefix_pivot_learner(n),
    "exhaustive": lambda n: exhaustive_learner(n),
}


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def emit_report(report: dict, fmt: str, path: str | None) -> None:
    """Write a report with stable field order, deterministically."""
    if fmt == "json":
        text = json.dumps(report, indent=2) + "\n"
    elif fmt == "csv":
        if not isinstance(report, dict) or "rows" not in report:
            raise ValueError("csv format needs a report with header/rows")
        lines = [report["header"]] + list(report["rows"])
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def key_to_hex(x: BitVector) -> str:
    nbytes = (x.n + 7) // 8
    payload = crypto.reverse_bits(x.bits, x.n) << (nbytes * 8 - x.n)
    return payload.to_bytes(nbytes, "big").hex()


def key_from_hex(text: str, n: int) -> BitVector:
    nbytes = (n + 7) // 8
    raw = bytes.fromhex(text)
    if len(raw) != nbytes:
        raise ValueError(f"expected {nbytes} key bytes for n={n}, got {len(raw)}")
    payload = int.from_bytes(raw, "big") >> (nbytes * 8 - n)
    return BitVector(n, crypto.reverse_bits(payload, n))


def _cmd_verify_lemmas(args) -> int:
    report = run_all_suites(args.seed, args.trials,
                            ns=(args.n,) if args.n else None)
    if args.n and args.r is not None:
        # single-cell run at the requested (n, r)
        from .suites import fourier_suite, partition_suite
        report["suites"]["fourier"] = fourier_suite(
            args.trials, args.seed, ns=(args.n,), r_fracs=(args.r / args.n,))
        report["suites"]["partition"] = partition_suite(
            args.trials, args.seed, ns=(args.n,), r_fracs=(args.r / args.n,))
        report["ok"] = all(rep["ok"] for rep in report["suites"].values())
    emit_report(report, args.format, args.out)
    return 0 if report["ok"] else 1


def _cmd_reduce(args) -> int:
    with open(args.infile) as fh:
        doc = json.load(fh)
    bp, _, _ = from_json_dict(doc)
    red = reduce_to_affine(bp, ReductionParams(args.r))
    out_doc = to_json_dict(red.program, labels=red.labels, gamma=red.gamma)
    emit_report(out_doc, "json", args.out)
    if args.report:
        emit_report(red.report.to_dict(), "json", args.report)
    return 0 if red.report.all_ok else 1


def _cmd_tradeoff(args) -> int:
    rows = []
    for idx, name in enumerate(args.learners.split(",")):
        name = name.strip()
        if name not in LEARNER_FACTORIES:
            raise ValueError(f"unknown learner {name!r}; "
                             f"choose from {sorted(LEARNER_FACTORIES)}")
        learner = LEARNER_FACTORIES[name](args.n)
        point = estimate_sample_complexity(
            learner, args.target, _rng(args.seed, idx + 10),
            trials=args.trials, m_cap=args.m_cap, seed=args.seed)
        rows.append(point.csv_row())
    emit_report({"header": TradeoffPoint.CSV_HEADER, "rows": rows}, "csv", args.out)
    return 0


def _cmd_bounds(args) -> int:
    if args.c is not None:
        report = tradeoff_exponent(args.c, args.alpha, args.n)
        emit_report(report, "json", args.out)
        return 0
    value = reach_probability_bound(args.n, args.m, args.k)
    text = f"{value}\n"
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_crypto(args) -> int:
    if args.crypto_cmd == "keygen":
        key = crypto.keygen(args.n, _rng(args.seed, 1))
        emit_report({"n": key.n, "key": key_to_hex(key.x)}, "json", args.out)
        return 0
    if args.crypto_cmd == "encrypt":
        key = crypto.SecretKey(args.n, key_from_hex(args.key, args.n))
        with open(args.infile, "rb") as fh:
            plaintext = fh.read()
        blob = crypto.encode_stream(key, plaintext, _rng(args.seed, 2))
        with open(args.out, "wb") as fh:
            fh.write(blob)
        return 0
    if args.crypto_cmd == "decrypt":
        key = crypto.SecretKey(args.n, key_from_hex(args.key, args.n))
        with open(args.infile, "rb") as fh:
            blob = fh.read()
        plaintext = crypto.decode_stream(key, blob)
        with open(args.out, "wb") as fh:
            fh.write(plaintext)
        return 0
    if args.crypto_cmd == "attack":
        attacker = crypto.window_attacker(args.n, args.memory_bits)
        report = crypto.run_attack(attacker, args.m, args.trials, _rng(args.seed, 3))
        emit_report(report.to_dict(), "json", args.out)
        return 0
    raise ValueError(f"unknown crypto subcommand {args.crypto_cmd!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paritylab",
        description="memory-bounded parity learning laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-lemmas", help="run the property suites")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=_cmd_verify_lemmas)

    p = sub.add_parser("reduce", help="simulate a program by an affine one")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("tradeoff", help="sample-complexity sweep to CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--learners", default="gaussian,prefix,exhaustive")
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--m-cap", type=int, default=1 << 16)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_tradeoff)

    p = sub.add_parser("bounds", help="reach-probability bound / exponent tables")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("crypto", help="bounded-storage encryption tools")
    csub = p.add_subparsers(dest="crypto_cmd", required=True)

    c = csub.add_parser("keygen")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_crypto)

    c = csub.add_parser("encrypt")
    c.add_argument("--key", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, required=True)
    c.set_defaults(func=_cmd_crypto)

    c = csub.add_parser("decrypt")
    c.add_argument("--key", required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=_cmd_crypto)

    c = csub.add_parser("attack")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--memory-bits", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--trials", type=int, default=2000)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_crypto)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bounds":
            if args.c is None and (args.k is None or args.m is None):
                parser.error("bounds needs either --k and --m, or --c and --alpha")
            if args.c is not None and args.alpha is None:
                parser.error("--c needs --alpha")
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
