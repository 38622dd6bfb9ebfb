"""Command line interface.

Subcommands: translate (closed-form tolerance-to-privacy arithmetic, no
data touched), gen-data (synthetic ER tables), sweep (robot experiment
grid with CSV/JSON/figure outputs), replay (deterministic re-execution of
a recorded trace), serve (HTTP session service).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from .accountant import AccountantMode, PrivacyParams
from .data import build_pair_table, load_dataset, load_labels
from .engine import SessionData, open_session, submit
from .mechanisms import (
    Tolerance,
    translate_lcm,
    translate_lcmmp,
    translate_lcmp,
    translate_lm,
    translate_ltm,
)
from .synth import SynthConfig, write_files

REPLAY_COLUMNS = ("index", "type", "status", "answer", "spent_total", "estimate_checked")


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def cmd_translate(args) -> int:
    tol = Tolerance(args.alpha, args.beta)
    qtype = args.type.upper()
    if qtype == "LC":
        spec = translate_lm(tol, args.sensitivity)
        print(f"mechanism=LM b={_fmt(spec.b)} epsilon={_fmt(spec.epsilon)}")
    elif qtype == "LCC":
        if args.translator == "LCMP":
            poke, escalation = translate_lcmp(tol, args.f, args.sensitivity)
            worst = poke.epsilon + escalation.epsilon
            print(
                f"mechanism=LCMP poke_b={_fmt(poke.b)} poke_epsilon={_fmt(poke.epsilon)} "
                f"escalation_epsilon={_fmt(escalation.epsilon)} worst_case_epsilon={_fmt(worst)}"
            )
        elif args.translator == "LCMMP":
            spec = translate_lcmmp(tol, args.m, args.sensitivity)
            print(
                f"mechanism=LCMMP b={_fmt(spec.b)} worst_case_epsilon={_fmt(spec.epsilon)} "
                f"first_poke_epsilon={_fmt(spec.epsilon / args.m)}"
            )
        else:
            spec = translate_lcm(tol, args.sensitivity)
            print(f"mechanism=LCM b={_fmt(spec.b)} epsilon={_fmt(spec.epsilon)}")
    elif qtype == "LCT":
        spec = translate_ltm(tol, args.L, args.k, args.sensitivity)
        print(f"mechanism=LTM b={_fmt(spec.b)} epsilon={_fmt(spec.epsilon)} L={args.L} k={args.k}")
    else:
        print(f"unknown query type: {args.type}", file=sys.stderr)
        return 2
    return 0


def cmd_gen_data(args) -> int:
    cfg = SynthConfig(pairs=args.pairs, positive_fraction=args.positive_fraction, seed=args.seed)
    paths = write_files(args.out_dir, cfg)
    print(json.dumps(paths, indent=2))
    return 0


def cmd_sweep(args) -> int:
    from .sweep import SweepConfig, run_sweep

    with open(args.config, encoding="utf-8") as fh:
        obj = json.load(fh)
    cfg = SweepConfig.from_dict(obj)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    result = run_sweep(cfg)
    for cell in result["cells"]:
        print(
            f"t={cell['t']} B={cell['B']} median={cell['median']:.3f} "
            f"q1={cell['q1']:.3f} q3={cell['q3']:.3f}"
        )
    if cfg.out_dir:
        print(f"artifacts written to {cfg.out_dir}")
    return 0


def _answer_repr(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def cmd_replay(args) -> int:
    from .wire import parse_wire_query, response_to_dict

    lines = [
        json.loads(line)
        for line in Path(args.trace).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not lines or "session" not in lines[0]:
        print("trace must start with a session line", file=sys.stderr)
        return 2
    spec = lines[0]["session"]
    data_paths = spec["data"]
    d1 = load_dataset(data_paths["d1"])
    d2 = load_dataset(data_paths["d2"])
    labels = load_labels(data_paths["labels"])
    table = build_pair_table(d1, d2, labels, m=int(data_paths.get("m", 1)))
    session = open_session(
        SessionData(pair_table=table, datasets={"d1": d1, "d2": d2}),
        PrivacyParams(B=float(spec.get("B", math.inf)), delta=float(spec["delta"])),
        mode=AccountantMode.from_dict(spec.get("mode", {})),
        seed=int(spec.get("seed", 0)),
        default_beta=float(spec.get("beta", math.exp(-15))),
    )
    rows = []
    for i, line in enumerate(lines[1:]):
        req = parse_wire_query(line["query"], default_beta=session.default_beta)
        resp = submit(session, req)
        payload = response_to_dict(req, resp)
        rows.append({
            "index": i,
            "type": req.type,
            "status": payload["status"],
            "answer": _answer_repr(payload["answer"]),
            "spent_total": f"{payload['spent_total']:.10f}",
            "estimate_checked": f"{payload['estimate_checked']:.10f}",
        })
    out_path = Path(args.out)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPLAY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"replayed {len(rows)} queries -> {out_path}")
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    config = ServiceConfig.from_file(args.config)
    port_env = os.environ.get("DPTUNER_PORT")
    if args.port is not None:
        config.port = args.port
    elif port_env:
        config.port = int(port_env)
    seed_env = os.environ.get("DPTUNER_SEED")
    if args.seed is not None:
        config.seed_base = args.seed
    elif seed_env:
        config.seed_base = int(seed_env)
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dptuner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="print the mechanism a tolerance translates to")
    p.add_argument("type", help="LC | LCC | LCT")
    p.add_argument("alpha", type=float)
    p.add_argument("beta", type=float)
    p.add_argument("--sensitivity", type=int, default=1)
    p.add_argument("--L", type=int, default=1, help="formula count for LCT")
    p.add_argument("--k", type=int, default=1, help="selection size for LCT")
    p.add_argument("--translator", choices=("LCM", "LCMP", "LCMMP"), default="LCM")
    p.add_argument("--f", type=float, default=0.05, help="poking fraction for LCMP")
    p.add_argument("--m", type=int, default=5, help="poke count for LCMMP")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("gen-data", help="write synthetic ER tables and labels")
    p.add_argument("out_dir")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--positive-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("sweep", help="run a tolerance/budget sweep from a JSON config")
    p.add_argument("config")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-execute a recorded trace deterministically")
    p.add_argument("trace")
    p.add_argument("--out", default="replay.csv")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("config")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as exit status per CLI contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
