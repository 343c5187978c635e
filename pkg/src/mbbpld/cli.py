"""Command-line entry point: ``mbbpld <subcommand> ...``.

Exit codes: 0 success, 1 configuration/input error, 2 runtime error.
Option precedence: command-line flags > ``--config`` JSON file > built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bp import BpConfig
from .codes import CssCode, FailureTest, PresetError, load_preset, validate_css
from .gf2 import as_bits, from_support, load_matrix, support
from .mbbp import MbbpDecoder
from .sim import (
    COMPARISON_COLUMNS,
    CSV_COLUMNS,
    DECODERS,
    SimulationConfig,
    compare_tree_vs_random,
    run_sweep,
)
from .subtree import build_augmented_bases, build_partitions, partition_record
from .tanner import TannerGraph, to_dot

log = logging.getLogger("mbbpld")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Argument groups


def _add_code_args(p):
    g = p.add_argument_group("code")
    g.add_argument("--preset", help="preset name or path to a preset JSON file (default: %(default)s)")
    g.add_argument("--hx", help="H_X matrix file (.alist or dense text); use with --hz")
    g.add_argument("--hz", help="H_Z matrix file (.alist or dense text); use with --hx")
    g.add_argument("--preset-dir", default=os.environ.get("MBBPLD_PRESET_DIR"),
                   help="extra preset directory (default: $MBBPLD_PRESET_DIR)")
    g.add_argument("--error-type", choices=("X", "Z"), default="X",
                   help="X: decode with H_Z syndromes against H_X stabilizers; Z swaps roles (default: %(default)s)")


def _add_bp_args(p):
    g = p.add_argument_group("belief propagation")
    g.add_argument("--alpha", type=float, default=0.875, help="min-sum normalization (default: %(default)s)")
    g.add_argument("--max-iter", type=int, default=100, help="maximum BP iterations (default: %(default)s)")
    g.add_argument("--schedule", choices=("flooding", "serial"), default="serial",
                   help="schedule used by MBBP instances (default: %(default)s)")
    g.add_argument("--serial-mode", choices=("check", "variable"), default="check",
                   help="serial sweep over check or variable nodes (default: %(default)s)")
    g.add_argument("--serial-order", choices=("ascending", "interleaved"), default="ascending",
                   help="check order for augmented matrices (default: %(default)s)")
    g.add_argument("--clip", type=float, default=50.0, help="LLR magnitude clip (default: %(default)s)")


def _add_common(p):
    p.add_argument("--config", help="JSON file of option defaults (keys are option names)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default: %(default)s)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mbbpld", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mbbpld {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate-code", help="check H_X H_Z^T = 0 and report n, k")
    _add_code_args(p)
    _add_common(p)

    p = sub.add_parser("partition", help="subtree partitions of a parity-check matrix")
    _add_code_args(p)
    p.add_argument("--matrix", help="parity-check matrix file (overrides the code's syndrome matrix)")
    p.add_argument("--count", type=int, default=20, help="number of random root permutations (default: %(default)s)")
    p.add_argument("--dot", help="write a Graphviz file coloured by the first partition")
    _add_common(p)

    p = sub.add_parser("decode", help="decode one syndrome with MBBP-LD")
    _add_code_args(p)
    _add_bp_args(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--syndrome-file", help="syndrome: JSON support list or 0/1 text")
    src.add_argument("--error-file", help="error: JSON support list or 0/1 text; its syndrome is decoded")
    p.add_argument("--p", type=float, default=0.05, help="channel error rate for the prior (default: %(default)s)")
    p.add_argument("--partitions", type=int, default=20,
                   help="root permutations whose subtree bases are pooled (default: %(default)s)")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte-Carlo logical error rate sweep")
    _add_code_args(p)
    _add_bp_args(p)
    p.add_argument("--decoder", choices=DECODERS, default="mbbp_ld", help="(default: %(default)s)")
    p.add_argument("--p", dest="p_values", type=_float_list, default=[0.08, 0.09, 0.10],
                   help="comma-separated physical error rates (default: 0.08,0.09,0.10)")
    p.add_argument("--failures", type=int, default=100, help="stop after this many failures (default: %(default)s)")
    p.add_argument("--max-trials", type=int, default=10_000_000, help="(default: %(default)s)")
    p.add_argument("--partitions", type=int, default=20,
                   help="root permutations whose subtree bases are pooled (default: %(default)s)")
    p.add_argument("--count-mode", choices=("logical", "nonconverged"), default="logical",
                   help="what counts as a failure (default: %(default)s)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="worker threads; results do not depend on it (default: %(default)s)")
    _add_common(p)

    p = sub.add_parser("compare-random", help="subtree vs matched random augmentation")
    _add_code_args(p)
    _add_bp_args(p)
    p.add_argument("--p", dest="p_values", type=_float_list, default=[0.07, 0.08],
                   help="comma-separated physical error rates (default: 0.07,0.08)")
    p.add_argument("--failures", type=int, default=100, help="failures per partition and mode (default: %(default)s)")
    p.add_argument("--max-trials", type=int, default=10_000_000, help="(default: %(default)s)")
    p.add_argument("--partitions", type=int, default=20, help="partitions per mode (default: %(default)s)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="(default: %(default)s)")
    _add_common(p)
    return parser


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            conf = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        # keys may be written as the flag (``max-iter``, ``p``) or its destination
        names = {}
        for a in sub._actions:
            names[a.dest] = a.dest
            for opt in a.option_strings:
                names[opt.lstrip("-").replace("-", "_")] = a.dest
        unknown = sorted(k for k in conf if k.replace("-", "_") not in names)
        if unknown:
            raise ConfigError(f"{path}: unknown options {unknown}")
        conf = {names[k.replace("-", "_")]: v for k, v in conf.items()}
        if "p_values" in conf and not isinstance(conf["p_values"], list):
            conf["p_values"] = _float_list(conf["p_values"])
        sub.set_defaults(**conf)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# Helpers


def _load_code(args) -> CssCode:
    if args.hx or args.hz:
        if not (args.hx and args.hz):
            raise ConfigError("--hx and --hz must be given together")
        return CssCode(Path(args.hx).stem, load_matrix(args.hx), load_matrix(args.hz))
    if not args.preset:
        raise ConfigError("a code is required: --preset NAME or --hx/--hz")
    return load_preset(args.preset, args.preset_dir)


def _bp_config(args, p: float = 0.05) -> BpConfig:
    return BpConfig(
        channel_p=p, max_iterations=args.max_iter, alpha=args.alpha, schedule=args.schedule,
        clip=args.clip, serial_order=args.serial_order, serial_mode=args.serial_mode,
    )


def _read_vector(path: str, length: int) -> np.ndarray:
    text = Path(path).read_text().strip()
    if text.startswith("["):
        return from_support(length, json.loads(text))
    bits = [int(x) for x in text.replace(",", " ").split()]
    return as_bits(bits, length)


def _csv_text(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.10g}"
    return x


class _Run:
    """Collects outputs and writes them plus a manifest."""

    def __init__(self, args):
        self.args = args
        self.started = datetime.now(timezone.utc).isoformat()
        self.outputs: dict[str, str] = {}

    def emit(self, text: str, path: str | None = None):
        target = path or self.args.out
        if target:
            Path(target).write_text(text)
            self.outputs[str(target)] = hashlib.sha256(text.encode()).hexdigest()
        else:
            sys.stdout.write(text)
            self.outputs["<stdout>"] = hashlib.sha256(text.encode()).hexdigest()

    def finish(self, extra: dict | None = None):
        config = {k: v for k, v in vars(self.args).items() if k not in ("verbose",)}
        manifest = {
            "tool": "mbbpld",
            "version": __version__,
            "command": self.args.command,
            "config": config,
            "seed": getattr(self.args, "seed", None),
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "outputs": self.outputs,
        }
        if extra:
            manifest.update(extra)
        text = json.dumps(manifest, indent=2, default=str) + "\n"
        if self.args.out:
            Path(str(self.args.out) + ".manifest.json").write_text(text)
        else:
            sys.stderr.write(text)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args) -> int:
    run = _Run(args)
    code = _load_code(args)
    rep = validate_css(code)
    if rep.valid:
        run.emit(f"valid, n={rep.n} k={rep.k}\n")
        run.finish()
        return 0
    run.emit(f"invalid, n={rep.n}: {len(rep.violations)} orthogonality violations, "
             f"first {rep.violations[:5]}\n")
    run.finish()
    return 1


def cmd_partition(args) -> int:
    run = _Run(args)
    if args.matrix:
        H = load_matrix(args.matrix)
    else:
        H = FailureTest(_load_code(args), args.error_type).syndrome_matrix
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    g = TannerGraph.from_matrix(H)
    parts = build_partitions(g, args.count, args.seed)
    records = [partition_record(g, part) for part in parts]
    run.emit(json.dumps(records) + "\n")
    if args.dot:
        run.emit(to_dot(g, list(parts[0].check_sets)), args.dot)
    run.finish()
    return 0


def cmd_decode(args) -> int:
    run = _Run(args)
    code = _load_code(args)
    ft = FailureTest(code, args.error_type)
    H = ft.syndrome_matrix
    if args.error_file:
        error = _read_vector(args.error_file, code.n)
        syndrome = ft.syndrome(error)
    elif args.syndrome_file:
        error = None
        syndrome = _read_vector(args.syndrome_file, H.num_rows)
    else:
        raise ConfigError("one of --syndrome-file or --error-file is required")
    parts = build_partitions(TannerGraph.from_matrix(H), args.partitions, args.seed)
    owners, bases = [], []
    for i, part in enumerate(parts):
        for b in build_augmented_bases(H, part):
            owners.append(i)
            bases.append(b)
    dec = MbbpDecoder(H, bases, _bp_config(args, args.p))
    out = dec.decode(syndrome)
    result = {
        "estimate_support": support(out.estimate),
        "any_converged": out.any_converged,
        "list_size": out.list_size,
        "k_max": out.k_max,
        "total_iterations": out.total_iterations,
        "per_instance": [
            {"partition": i, "subtree": b.subtree_index, "converged": o.converged,
             "iterations": o.iterations_used, "extra_rows": b.num_extra_rows}
            for i, b, o in zip(owners, bases, out.per_instance)
        ],
    }
    if error is not None:
        result["logical_failure"] = ft(error, out.estimate)
    run.emit(json.dumps(result) + "\n")
    run.finish()
    return 0


def _sim_config(args, code) -> SimulationConfig:
    return SimulationConfig(
        code=code,
        p_values=tuple(args.p_values),
        decoder=getattr(args, "decoder", "mbbp_ld"),
        target_failures=args.failures,
        max_trials=args.max_trials,
        seed=args.seed,
        partitions=args.partitions,
        bp=_bp_config(args),
        error_type=args.error_type,
        count=getattr(args, "count_mode", "logical"),
        workers=args.workers,
    )


def cmd_simulate(args) -> int:
    run = _Run(args)
    code = _load_code(args)
    cfg = _sim_config(args, code)
    result = run_sweep(cfg)
    run.emit(_csv_text(result.rows(), CSV_COLUMNS))
    run.finish({"code": {"name": code.name, "n": code.n, "k": code.k},
                "bp": asdict(cfg.bp)})
    return 0


def cmd_compare(args) -> int:
    run = _Run(args)
    code = _load_code(args)
    cfg = _sim_config(args, code)
    rows = compare_tree_vs_random(cfg, num_partitions=args.partitions)
    run.emit(_csv_text([r.row() for r in rows], COMPARISON_COLUMNS))
    run.finish({"code": {"name": code.name, "n": code.n, "k": code.k},
                "bp": asdict(cfg.bp)})
    return 0


COMMANDS = {
    "validate-code": cmd_validate,
    "partition": cmd_partition,
    "decode": cmd_decode,
    "simulate": cmd_simulate,
    "compare-random": cmd_compare,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"mbbpld: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse: --help/--version exit 0, usage errors exit 1
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PresetError, FileNotFoundError, ValueError) as exc:
        print(f"mbbpld: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - last-resort reporting
        log.exception("runtime failure")
        print(f"mbbpld: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
