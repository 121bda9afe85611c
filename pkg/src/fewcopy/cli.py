"""Command-line harness: ``fewcopy <command> [options]``.

Every command writes a CSV (or JSON) file plus ``<out>.manifest.json``
recording the resolved parameters, so ``fewcopy replay <manifest>``
regenerates the same bytes.

Defaults come from, in increasing priority: built-in values, a
``--config`` file of ``key = value`` lines, and command-line flags.
Relative output paths are placed under ``$FEWCOPY_OUTPUT_DIR`` when set.

Exit codes: 0 success, 1 usage or input error, 2 domain error (e.g. noise
beyond the tolerable limit).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from fewcopy import __version__
from fewcopy.baseline import resource_ratio, witness_lambda_limit
from fewcopy.detector import (
    ConfidenceTrace,
    NoiseLimitError,
    ProtocolConfig,
    check_noise,
    confidence_curve,
    kl_divergence,
    make_rng,
    run_protocol,
)
from fewcopy.fidelity import expected_fidelity, fidelity_from_trace
from fewcopy.states import (
    MAX_DENSE_QUBITS,
    GraphSpecError,
    NoisyState,
    expected_p_e,
    lambda_limit,
    load_graph,
    observable_set_from_witness,
)

OUTPUT_DIR_ENV = "FEWCOPY_OUTPUT_DIR"

TRACE_COLUMNS = [
    "copy_index", "observable_mask", "pauli_string", "outcome", "cumulative_s",
    "p_e_obs", "delta", "c_min", "conclusive", "c_min_theory",
]
CURVE_COLUMNS = ["n_copies", "c_min", "lambda"]
COMPARE_COLUMNS = [
    "lambda", "epsilon", "confidence_level", "q_terms", "shots_per_term",
    "total_shots", "fewcopy_n_max", "ratio",
]
FIDELITY_COLUMNS = ["lambda", "n_qubits", "n_copies", "f_hat", "std_error", "f_expected"]
NOISE_LIMIT_COLUMNS = ["n_qubits", "lambda_limit", "witness_lambda_limit_dense"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- serialisation ------------------------------------------------------------


def fmt(value) -> str:
    """12 significant digits for floats, plain ints, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return format(float(value), ".12g")
    return str(value)


def _json_value(text: str):
    if text == "":
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def render(columns: list[str], rows: list[list], fmt_name: str) -> str:
    cells = [[fmt(v) for v in row] for row in rows]
    if fmt_name == "json":
        records = [dict(zip(columns, (_json_value(c) for c in row))) for row in cells]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(cells)
    return buf.getvalue()


def resolve_out(out: str | None, default_name: str, fmt_name: str) -> Path:
    name = out or f"{default_name}.{fmt_name}"
    path = Path(name)
    if not path.is_absolute():
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base:
            path = Path(base) / path
    return path


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_manifest(path: Path, command: str, params: dict, outputs: list[Path], duration: float) -> Path:
    manifest = {
        "command": command,
        "parameters": params,
        "rng_seed": params.get("seed"),
        "version": __version__,
        "outputs": [str(p) for p in outputs],
        "wall_clock_seconds": round(duration, 6),
    }
    mpath = path.with_name(path.name + ".manifest.json")
    _write(mpath, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return mpath


# --- commands -----------------------------------------------------------------


# Each command returns (manifest anchor, written files).


def cmd_confidence_curve(args) -> tuple[Path, list[Path]]:
    rows = []
    for lam in args.noise:
        check_noise(lam, args.n)
        rows.extend([k, c, lam] for k, c in confidence_curve(lam, args.n, args.p_s, args.max_copies))
    path = resolve_out(args.out, "confidence_curve", args.format)
    _write(path, render(CURVE_COLUMNS, rows, args.format))
    for lam in args.noise:
        crossing = next((r[0] for r in rows if r[2] == lam and r[1] >= 0.99), None)
        print(f"lambda={fmt(lam)}: C_min >= 0.99 at N={crossing if crossing else '>' + str(args.max_copies)}")
    return path, [path]


def _trace_rows(trace: ConfidenceTrace, noise: float) -> list[list]:
    obs = trace.observable_set
    labels = {int(m): str(obs.observable(int(m))) for m in np.unique(trace.observable_mask)}
    n, p_s = trace.n_qubits, trace.separable_bound
    theory_d = None
    if noise < lambda_limit(n):
        theory_d = kl_divergence(expected_p_e(noise, n), p_s)
    rows = []
    for rec in trace.records():
        k = rec.copy_index + 1
        theory = -math.expm1(-theory_d * k) if theory_d is not None else None
        rows.append([
            rec.copy_index, rec.observable_mask, labels[rec.observable_mask], rec.outcome,
            rec.cumulative_s, rec.p_e_obs, rec.delta, rec.c_min, rec.conclusive, theory,
        ])
    return rows


def _protocol_config(args, n_copies: int) -> ProtocolConfig:
    g = load_graph(args.graph)
    return ProtocolConfig(
        observable_set_from_witness(g),
        NoisyState(g, args.noise),
        n_copies,
        rng_seed=args.seed,
        mode=args.mode,
    )


def cmd_trace(args) -> tuple[Path, list[Path]]:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    cfg = _protocol_config(args, args.copies)
    base = resolve_out(args.out, "trace", args.format)
    paths = []
    verdicts = {"entangled": 0, "inconclusive": 0}
    for k in range(args.trials):
        if args.trials == 1:
            trace = run_protocol(cfg)
            path = base
        else:
            trace = run_protocol(cfg, make_rng(args.seed, k))
            path = base.with_name(f"{base.stem}_trial{k:04d}{base.suffix}")
        verdicts[trace.verdict] += 1
        _write(path, render(TRACE_COLUMNS, _trace_rows(trace, args.noise), args.format))
        paths.append(path)
    print(f"{args.trials} trial(s): {verdicts['entangled']} entangled, {verdicts['inconclusive']} inconclusive")
    return base, paths


def cmd_noise_limit(args) -> tuple[Path, list[Path]]:
    if args.graph is not None:
        g = load_graph(args.graph)
        n = g.n_qubits
        dense = witness_lambda_limit(g, dense=True) if n <= MAX_DENSE_QUBITS else None
    elif args.n is not None:
        n, dense = args.n, None
        if n < 1:
            raise UsageError("--n must be positive")
    else:
        raise UsageError("noise-limit needs --n or --graph")
    limit = lambda_limit(n)
    path = resolve_out(args.out, "noise_limit", args.format)
    _write(path, render(NOISE_LIMIT_COLUMNS, [[n, limit, dense]], args.format))
    print(f"lambda_lim(n={n}) = {fmt(limit)}")
    return path, [path]


def cmd_witness_compare(args) -> tuple[Path, list[Path]]:
    rows = []
    for lam in args.noise:
        cost, n_max, ratio = resource_ratio(args.n, lam, args.epsilon, args.cl, args.q, args.c0)
        rows.append([
            lam, args.epsilon, args.cl, cost.n_terms, cost.shots_per_term,
            cost.total_shots, n_max, ratio,
        ])
        print(
            f"lambda={fmt(lam)}: witness {cost.total_shots} shots "
            f"({cost.n_terms} x {cost.shots_per_term}), few-copy N_max={n_max:.1f}, ratio={ratio:.1f}"
        )
    path = resolve_out(args.out, "witness_compare", args.format)
    _write(path, render(COMPARE_COLUMNS, rows, args.format))
    return path, [path]


def cmd_fidelity(args) -> tuple[Path, list[Path]]:
    cfg = _protocol_config(args, args.copies)
    est = fidelity_from_trace(run_protocol(cfg))
    n = cfg.state.n_qubits
    f_expected = expected_fidelity(args.noise, n)
    path = resolve_out(args.out, "fidelity", args.format)
    row = [args.noise, n, est.n_copies_used, est.f_hat, est.std_error, f_expected]
    _write(path, render(FIDELITY_COLUMNS, [row], args.format))
    print(f"F_hat = {fmt(est.f_hat)} +- {fmt(est.std_error)} (expected {fmt(f_expected)})")
    return path, [path]


COMMANDS = {
    "confidence-curve": cmd_confidence_curve,
    "trace": cmd_trace,
    "noise-limit": cmd_noise_limit,
    "witness-compare": cmd_witness_compare,
    "fidelity": cmd_fidelity,
}


# --- argument handling --------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (default <command>.<format>)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="key = value defaults file")


def _protocol_opts(p: argparse.ArgumentParser, copies: int) -> None:
    p.add_argument("--lambda", dest="noise", type=float, default=0.0)
    p.add_argument("--graph", default="linear:4", help="'linear:N', 'c4' or an edge-list file")
    p.add_argument("--copies", type=int, default=copies)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("analytic", "oracle"), default="analytic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fewcopy", description="Few-copy entanglement detection simulator.")
    parser.add_argument("--version", action="version", version=f"fewcopy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("confidence-curve", help="theoretical C_min versus copies")
    p.add_argument("--lambda", dest="noise", type=float, nargs="+", default=[0.0])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--max-copies", type=int, default=100)
    p.add_argument("--p-s", type=float, default=0.75)
    _common(p)

    p = sub.add_parser("trace", help="simulated per-copy confidence traces")
    _protocol_opts(p, copies=200)
    p.add_argument("--trials", type=int, default=1)
    _common(p)

    p = sub.add_parser("noise-limit", help="largest tolerable white-noise fraction")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, default=None)
    group.add_argument("--graph", default=None)
    _common(p)

    p = sub.add_parser("witness-compare", help="witness shot cost versus few-copy budget")
    p.add_argument("--lambda", dest="noise", type=float, nargs="+", default=[0.1])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--cl", type=float, default=0.95)
    p.add_argument("--q", type=int, default=None, help="local witness terms (default 2^n)")
    p.add_argument("--c0", type=float, default=0.99)
    _common(p)

    p = sub.add_parser("fidelity", help="fidelity estimate from protocol data")
    _protocol_opts(p, copies=1000)
    _common(p)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="redirect the primary output")
    return parser


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into flag tokens placed before user flags."""
    tokens: list[str] = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        tokens.append("--" + key.replace("_", "-"))
        tokens.extend(value.replace(",", " ").split())
    return tokens


def _with_config(argv: list[str]) -> list[str]:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            cfg = argv[i + 1]
        elif tok.startswith("--config="):
            cfg = tok.split("=", 1)[1]
        else:
            continue
        return argv[:1] + read_config(cfg) + argv[1:]
    return argv


def _params(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("command", "config")}


def run(args: argparse.Namespace) -> list[Path]:
    start = time.perf_counter()
    anchor, outputs = COMMANDS[args.command](args)
    write_manifest(anchor, args.command, _params(args), outputs, time.perf_counter() - start)
    return outputs


def replay(manifest_path: str, out: str | None = None) -> list[Path]:
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    params = dict(manifest["parameters"])
    if out is not None:
        params["out"] = out
    args = argparse.Namespace(command=manifest["command"], config=None, **params)
    return run(args)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_with_config(argv))
        if args.command == "replay":
            replay(args.manifest, args.out)
        else:
            run(args)
    except (UsageError, GraphSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NoiseLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
