"""Command-line entry point.

One subcommand per experiment kind; parameters come from a JSON config
file (--config) with command-line overrides for the common knobs. Exit
codes: 0 success, 2 validation error, 3 capacity error, 4 estimation
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from fpplab import harness
from fpplab.errors import CapacityError, DomainError, EstimationError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAPACITY = 3
EXIT_ESTIMATION = 4


def _vec(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def _law(text: str) -> dict:
    a, b, p = text.split(",")
    return {"a": int(a), "b": int(b), "p": float(p)}


def _chord(text: str) -> list[list[int]]:
    x1, x2 = text.split("|")
    return [_vec(x1), _vec(x2)]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment spec")
    p.add_argument("--seed", type=int, help="master seed (required if not in config)")
    p.add_argument("--threads", type=int, help="replica thread budget")
    p.add_argument("--out", help="output CSV path or directory (env FPPLAB_OUT)")
    p.add_argument("--resume", action="store_true",
                   help="reuse completed replica-block checkpoints")
    p.add_argument("--law", type=_law, metavar="A,B,P", help="weight law, e.g. 0,1,0.25")
    p.add_argument("--R", type=int, help="replica count")
    p.add_argument("--n", type=int, help="scale n")
    p.add_argument("--direction", type=_vec, metavar="X,Y", help="lattice direction")
    p.add_argument("--n-list", dest="n_list", type=_int_list, metavar="N1,N2,...")
    p.add_argument("--t-list", dest="t_list", type=_int_list, metavar="T1,T2,...")
    p.add_argument("--kappa", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--chord", type=_chord, metavar="X1,Y1|X2,Y2")
    p.add_argument("--auto-fix-chords", dest="auto_fix_chords", action="store_true",
                   default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpplab",
        description="First-passage percolation experiments on finite lattice boxes",
    )
    subs = parser.add_subparsers(dest="kind", required=True)
    descriptions = {
        "mu": "estimate the per-direction time constant",
        "defect": "midpoint-convexity defect along a chord",
        "shape-check": "shape-theorem containment frequency",
        "height-scan": "height statistics of the optimal-path union across scales",
        "exits": "per-hyperplane crossing counts over a slab",
        "union-size": "union and slab cardinality trends",
        "regime-compare": "subcritical vs supercritical regime contrast",
        "oracle-suite": "oracle-equivalence and superset-law batteries",
    }
    for kind in harness.KINDS:
        sp = subs.add_parser(kind, help=descriptions[kind])
        _add_common(sp)
    return parser


def spec_from_args(args: argparse.Namespace) -> harness.ExperimentSpec:
    data: dict = {}
    if args.config is not None:
        data.update(json.loads(Path(args.config).read_text()))
    data["kind"] = args.kind
    overrides = (
        "seed", "threads", "out", "law", "R", "n", "direction",
        "n_list", "t_list", "kappa", "epsilon", "chord", "auto_fix_chords",
    )
    for name in overrides:
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    return harness.ExperimentSpec.from_dict(data)


def _print_rows(result: harness.RunResult) -> None:
    for row in result.rows:
        bits = [row.label]
        if row.direction:
            bits.append(f"x=({row.direction})")
        if row.chord:
            bits.append(f"chord={row.chord}")
        if row.n is not None:
            bits.append(f"n={row.n}")
        if row.mean is not None:
            bits.append(f"mean={row.mean:.6g}")
        if row.se is not None:
            bits.append(f"se={row.se:.3g}")
        if row.verdict:
            bits.append(f"verdict={row.verdict}")
        if row.trunc_failures:
            bits.append(f"trunc_failures={row.trunc_failures}")
        print("  ".join(bits))
    print(f"rows -> {result.csv_path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        result = harness.run(spec, resume=bool(args.resume))
    except ValidationError as e:
        for field, msg in e.issues:
            print(f"invalid spec: {field}: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as e:
        print(f"invalid spec: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as e:
        print(f"capacity: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except EstimationError as e:
        print(f"estimation: {e}", file=sys.stderr)
        return EXIT_ESTIMATION
    _print_rows(result)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
