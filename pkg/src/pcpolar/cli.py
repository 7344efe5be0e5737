"""Command-line front end: construct, encode, decode, simulate, compare.

Runs are driven by a schema-validated JSON config; every emitted artifact
embeds the resolved config (defaults expanded) and the tool version.
Exit codes: 0 ok, 1 usage or config error, 2 comparison failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .construction import (
    ROLE_NAMES,
    CodeSpec,
    build_code,
    chain_groups,
    check_invariants,
)
from .decoders import (
    CsrScanDecoder,
    DampingConfig,
    PcScanDecoder,
    ScanDecoder,
    ScDecoder,
)
from .encoder import csr_precode, encode, polar_transform
from .sim import DECODER_KINDS, DecoderConfig, SimConfig, sweep

FER_TARGETS = (1e-1, 1e-2, 1e-3)


class CliError(Exception):
    """Usage or configuration error (exit code 1)."""


_CODE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["N", "K"],
    "properties": {
        "N": {"type": "integer", "minimum": 4},
        "K": {"type": "integer", "minimum": 1},
        "scheme": {"enum": ["none", "fc", "mc", "nr"]},
        "A": {"type": ["number", "null"]},
        "L": {"type": ["integer", "null"], "minimum": 1},
        "mc_weights": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "nr_npc": {"type": "integer", "minimum": 0},
        "nr_npc_wm": {"type": "integer", "minimum": 0},
    },
}

_DECODER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(DECODER_KINDS)},
        "t_max": {"type": "integer", "minimum": 1},
        "lambda_p": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "lambda_i": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "schedule": {"enum": ["sequential", "literal"]},
    },
}

_SIM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "snr_points": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "max_frames": {"type": "integer", "minimum": 1},
        "min_frame_errors": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "noiseless": {"type": "boolean"},
        "batch_frames": {"type": "integer", "minimum": 1},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["code"],
    "properties": {
        "code": _CODE_SCHEMA,
        "decoder": _DECODER_SCHEMA,
        "sim": _SIM_SCHEMA,
    },
}

CSV_COLUMNS = (
    "decoder",
    "snr_db",
    "iter",
    "frames",
    "frame_errors",
    "bit_errors",
    "fer",
    "ber",
    "fer_ci_lo",
    "fer_ci_hi",
    "seconds",
)


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise CliError(f"config {path} is not valid JSON: {e}")
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise CliError(f"config {path} failed validation: {e.message}")
    return cfg


def resolve_spec(cfg: dict) -> CodeSpec:
    c = cfg["code"]
    try:
        return CodeSpec(
            N=c["N"],
            K=c["K"],
            scheme=c.get("scheme", "none"),
            A=c.get("A"),
            L=c.get("L"),
            mc_weights=tuple(c.get("mc_weights", (1,))),
            nr_npc=c.get("nr_npc", 3),
            nr_npc_wm=c.get("nr_npc_wm", 1),
        )
    except ValueError as e:
        raise CliError(f"invalid code config: {e}")


def resolve_decoder(cfg: dict, kind: str | None = None) -> DecoderConfig:
    d = cfg.get("decoder", {})
    try:
        return DecoderConfig(
            kind=kind or d.get("kind", "sc"),
            t_max=d.get("t_max", 1),
            damping=DampingConfig(
                lambda_p=tuple(d.get("lambda_p", (1.0,))),
                lambda_i=tuple(d.get("lambda_i", (0.67,))),
            ),
            schedule=d.get("schedule", "sequential"),
        )
    except ValueError as e:
        raise CliError(f"invalid decoder config: {e}")


def resolve_sim(cfg: dict, spec: CodeSpec, dec: DecoderConfig, args) -> SimConfig:
    s = cfg.get("sim", {})
    try:
        return SimConfig(
            spec=spec,
            decoder=dec,
            snr_points=tuple(s.get("snr_points", (0.0,))),
            max_frames=s.get("max_frames", 100_000),
            min_frame_errors=s.get("min_frame_errors", 100),
            master_seed=args.seed if args.seed is not None else s.get("master_seed", 1),
            workers=args.workers if args.workers is not None else s.get("workers", 1),
            noiseless=args.noiseless or s.get("noiseless", False),
            batch_frames=s.get("batch_frames", 1000),
        )
    except ValueError as e:
        raise CliError(f"invalid sim config: {e}")


def resolved_config_dict(spec: CodeSpec, dec: DecoderConfig | None = None, sim: SimConfig | None = None) -> dict:
    """Schema-valid config echo with all defaults expanded (L resolved)."""
    out: dict = {
        "code": {
            "N": spec.N,
            "K": spec.K,
            "scheme": spec.scheme,
            "A": spec.A,
            "L": spec.register_length,
            "mc_weights": list(spec.mc_weights),
            "nr_npc": spec.nr_npc,
            "nr_npc_wm": spec.nr_npc_wm,
        }
    }
    if dec is not None:
        out["decoder"] = {
            "kind": dec.kind,
            "t_max": dec.t_max,
            "lambda_p": list(dec.damping.lambda_p),
            "lambda_i": list(dec.damping.lambda_i),
            "schedule": dec.schedule,
        }
    if sim is not None:
        out["sim"] = {
            "snr_points": list(sim.snr_points),
            "max_frames": sim.max_frames,
            "min_frame_errors": sim.min_frame_errors,
            "master_seed": sim.master_seed,
            "workers": sim.workers,
            "noiseless": sim.noiseless,
            "batch_frames": sim.batch_frames,
        }
    return out


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)


# ---------------------------------------------------------------------------
# construct


def cmd_construct(args) -> int:
    cfg = load_config(args.config)
    spec = resolve_spec(cfg)
    rolemap, pcs = build_code(spec)
    if args.check:
        check_invariants(spec, rolemap, pcs)
        print("construction invariants ok", file=sys.stderr)
    doc = {
        "tool": "pcpolar",
        "version": __version__,
        "config": resolved_config_dict(spec),
        "register_length": pcs.L,
        "role": [ROLE_NAMES[r] for r in rolemap.role],
        # chains are only meaningful once the code has PC bits
        "chains": [list(c) for c in pcs.chains] if pcs.checked_sets else [],
        "checked_sets": {str(u): list(iu) for u, iu in sorted(pcs.checked_sets.items())},
        "checking_sets": {str(u): list(pu) for u, pu in sorted(pcs.checking_sets.items())},
        "checked_info": list(pcs.checked_info),
        "unchecked_info": list(pcs.unchecked_info),
        "chain_groups": chain_groups(rolemap, pcs),
    }
    _write_text(args.out, json.dumps(doc, indent=2))
    return 0


# ---------------------------------------------------------------------------
# encode


def _parse_message(text: str, K: int) -> np.ndarray:
    text = text.strip()
    if text.lower().startswith("0x"):
        digits = text[2:]
        try:
            bits = "".join(f"{int(c, 16):04b}" for c in digits)
        except ValueError:
            raise CliError(f"invalid hex message {text!r}")
        if len(bits) < K:
            bits = bits.zfill(K)
        bits = bits[-K:]
    else:
        bits = text
        if len(bits) != K:
            raise CliError(f"binary message must have exactly K={K} bits, got {len(bits)}")
    if set(bits) - {"0", "1"}:
        raise CliError(f"message {text!r} is not binary")
    return np.array([int(b) for b in bits], dtype=np.uint8)


def cmd_encode(args) -> int:
    cfg = load_config(args.config)
    spec = resolve_spec(cfg)
    rolemap, pcs = build_code(spec)
    if args.message is not None:
        text = args.message
    elif args.infile is not None:
        text = Path(args.infile).read_text()
    else:
        raise CliError("encode needs a message argument or --in file")
    msg = _parse_message(text, spec.K)
    lines = []
    if args.emit_q:
        s = np.zeros(spec.N, dtype=np.uint8)
        s[rolemap.info_positions] = msg
        q = csr_precode(s, rolemap, pcs.L)
        lines.append("q=" + "".join(str(b) for b in q))
        x = polar_transform(q)
    else:
        x = encode(msg, spec, rolemap, pcs)
    lines.append("".join(str(b) for b in x))
    _write_text(args.out, "\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# decode


def _parse_llr_line(line: str, N: int) -> np.ndarray:
    try:
        vals = [float(v) for v in line.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"cannot parse LLR line {line!r}")
    if len(vals) != N:
        raise CliError(f"LLR vector has {len(vals)} entries, expected N={N}")
    return np.array(vals)


def cmd_decode(args) -> int:
    cfg = load_config(args.config)
    spec = resolve_spec(cfg)
    dec = resolve_decoder(cfg, kind=args.decoder)
    rolemap, pcs = build_code(spec)
    if args.llrs is not None:
        frames = [_parse_llr_line(args.llrs, spec.N)]
    elif args.infile is not None:
        lines = [l for l in Path(args.infile).read_text().splitlines() if l.strip()]
        frames = [_parse_llr_line(l, spec.N) for l in lines]
    else:
        raise CliError("decode needs --llrs or --in file")
    t_max = args.t_max if args.t_max is not None else dec.t_max
    if dec.kind == "sc":
        decoder = ScDecoder(rolemap, pcs)
    elif dec.kind == "scan":
        decoder = ScanDecoder(rolemap, schedule=dec.schedule)
    elif dec.kind == "pc-scan":
        decoder = PcScanDecoder(rolemap, pcs, damping=dec.damping, schedule=dec.schedule)
    else:
        decoder = CsrScanDecoder(rolemap, pcs, schedule=dec.schedule)
    results = []
    for llr in frames:
        r = decoder.decode(llr) if dec.kind == "sc" else decoder.decode(llr, t_max)
        results.append(
            {
                "info_bits": [int(b) for b in r.info_bits],
                "leaf_posteriors": [float(v) for v in r.leaf_posteriors],
                "coded_extrinsics": [float(v) for v in r.coded_extrinsics],
                "coded_posteriors": [float(v) for v in r.coded_posteriors],
                "iterations_run": r.iterations_run,
            }
        )
    doc = {
        "tool": "pcpolar",
        "version": __version__,
        "config": resolved_config_dict(spec, dec),
        "results": results,
    }
    _write_text(args.out, json.dumps(doc, indent=2))
    return 0


# ---------------------------------------------------------------------------
# simulate


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _csv_text(config_echo: dict, rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# pcpolar {__version__}\n")
    buf.write("# config: " + json.dumps(config_echo, sort_keys=True) + "\n")
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _dat_text(config_echo: dict, rows: list[dict]) -> str:
    """Gnuplot-ready blocks, one per (decoder, iteration)."""
    buf = io.StringIO()
    buf.write(f"# pcpolar {__version__}\n")
    buf.write("# config: " + json.dumps(config_echo, sort_keys=True) + "\n")
    blocks: dict[tuple, list[dict]] = {}
    for row in rows:
        blocks.setdefault((row["decoder"], row["iter"]), []).append(row)
    for (dec, it), block in blocks.items():
        buf.write(f"\n# decoder={dec} iter={it}\n")
        buf.write("# snr_db fer ber fer_ci_lo fer_ci_hi frames\n")
        for r in sorted(block, key=lambda r: r["snr_db"]):
            buf.write(
                f"{_fmt(r['snr_db'])} {_fmt(r['fer'])} {_fmt(r['ber'])} "
                f"{_fmt(r['fer_ci_lo'])} {_fmt(r['fer_ci_hi'])} {r['frames']}\n"
            )
    return buf.getvalue()


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    spec = resolve_spec(cfg)
    kinds = args.decoders.split(",") if args.decoders else [None]
    rows: list[dict] = []
    per_decoder = []
    config_echo = None
    t_start = time.perf_counter()
    for kind in kinds:
        dec = resolve_decoder(cfg, kind=kind.strip() if kind else None)
        sim_cfg = resolve_sim(cfg, spec, dec, args)
        if config_echo is None:
            config_echo = resolved_config_dict(spec, dec, sim_cfg)
        result = sweep(sim_cfg)
        cell_rows = []
        for cell in result.cells:
            row = {"decoder": dec.kind, **cell.row()}
            rows.append(row)
            cell_rows.append(row)
        per_decoder.append(
            {
                "decoder": dec.kind,
                "t_max": dec.t_max,
                "cells": cell_rows,
            }
        )
    assert config_echo is not None
    doc = {
        "tool": "pcpolar",
        "version": __version__,
        "config": config_echo,
        "results": per_decoder,
        "timing": {
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "total_seconds": time.perf_counter() - t_start,
        },
    }
    out = args.out or "simulation"
    _write_text(out + ".csv", _csv_text(config_echo, rows))
    _write_text(out + ".json", json.dumps(doc, indent=2))
    _write_text(out + ".dat", _dat_text(config_echo, rows))
    print(f"wrote {out}.csv, {out}.json, {out}.dat", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# compare


def read_result_csv(path: str) -> list[dict]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}")
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    ints = ("iter", "frames", "frame_errors", "bit_errors")
    floats = ("snr_db", "fer", "ber", "fer_ci_lo", "fer_ci_hi", "seconds")
    rows = []
    for raw in reader:
        try:
            row = {"decoder": raw["decoder"]}
            row.update({k: int(raw[k]) for k in ints})
            row.update({k: float(raw[k]) for k in floats})
            rows.append(row)
        except (KeyError, TypeError, ValueError) as e:
            raise CliError(f"{path} is not a pcpolar result CSV: {e}")
    if not rows:
        raise CliError(f"{path} contains no result rows")
    return rows


def _curve(rows: list[dict], decoder: str | None, iteration: int | None, path: str):
    decoders = sorted({r["decoder"] for r in rows})
    if decoder is None:
        if len(decoders) > 1:
            raise CliError(f"{path} holds {decoders}; select one with --decoder-a/--decoder-b")
        decoder = decoders[0]
    rows = [r for r in rows if r["decoder"] == decoder]
    if not rows:
        raise CliError(f"{path} has no rows for decoder {decoder!r}")
    iters = sorted({r["iter"] for r in rows})
    it = iteration if iteration is not None else iters[-1]
    rows = [r for r in rows if r["iter"] == it]
    if not rows:
        raise CliError(f"{path} has no rows for iteration {it}")
    return sorted(rows, key=lambda r: r["snr_db"]), decoder, it


def snr_at_fer(points: list[tuple[float, float, int]], target: float) -> float | None:
    """SNR where the FER curve crosses `target`, log-linear in FER.

    Zero-FER cells are clamped to 0.5/frames so the interpolation stays
    defined; returns None when the curve never reaches the target.
    """
    pts = [(s, max(f, 0.5 / n)) for s, f, n in points]
    for (s0, f0), (s1, f1) in zip(pts, pts[1:]):
        if f0 == target:
            return s0
        if f0 > target >= f1:
            if f0 == f1:
                return s0
            w = (np.log10(f0) - np.log10(target)) / (np.log10(f0) - np.log10(f1))
            return float(s0 + (s1 - s0) * w)
    if pts and pts[-1][1] == target:
        return pts[-1][0]
    return None


def cmd_compare(args) -> int:
    rows_a = read_result_csv(args.csv_a)
    rows_b = read_result_csv(args.csv_b)
    curve_a, dec_a, it_a = _curve(rows_a, args.decoder_a, args.iter, args.csv_a)
    curve_b, dec_b, it_b = _curve(rows_b, args.decoder_b, args.iter, args.csv_b)
    grid_a = {r["snr_db"] for r in curve_a}
    grid_b = {r["snr_db"] for r in curve_b}
    if not grid_a & grid_b:
        raise CliError("the two result files have disjoint SNR grids")
    targets = [float(t) for t in args.targets.split(",")] if args.targets else list(FER_TARGETS)
    pts_a = [(r["snr_db"], r["fer"], r["frames"]) for r in curve_a]
    pts_b = [(r["snr_db"], r["fer"], r["frames"]) for r in curve_b]
    report = {
        "tool": "pcpolar",
        "version": __version__,
        "curve_a": {"file": args.csv_a, "decoder": dec_a, "iter": it_a},
        "curve_b": {"file": args.csv_b, "decoder": dec_b, "iter": it_b},
        "tolerance_db": args.tolerance,
        "targets": [],
    }
    failed = False
    for target in targets:
        sa = snr_at_fer(pts_a, target)
        sb = snr_at_fer(pts_b, target)
        entry = {"fer": target, "snr_a": sa, "snr_b": sb, "gap_db": None, "evaluable": False}
        if sa is not None and sb is not None:
            gap = sb - sa
            entry.update(gap_db=gap, evaluable=True)
            if gap > args.tolerance:
                failed = True
        report["targets"].append(entry)
    _write_text(args.out, json.dumps(report, indent=2))
    return 2 if failed else 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pcpolar", description=__doc__)
    p.add_argument("--version", action="version", version=f"pcpolar {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="dump role map and PC chain structure as JSON")
    c.add_argument("--config", required=True)
    c.add_argument("--out", default=None)
    c.add_argument("--check", action="store_true", help="run construction invariants")
    c.set_defaults(func=cmd_construct)

    e = sub.add_parser("encode", help="encode a message to a codeword")
    e.add_argument("message", nargs="?", default=None, help="binary string of K bits or 0x-hex")
    e.add_argument("--config", required=True)
    e.add_argument("--in", dest="infile", default=None)
    e.add_argument("--out", default=None)
    e.add_argument("--emit-q", action="store_true", help="also dump the pre-coded sequence")
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="decode LLR vectors to a DecodeResult JSON")
    d.add_argument("--config", required=True)
    d.add_argument("--llrs", default=None, help="comma/space separated LLR floats")
    d.add_argument("--in", dest="infile", default=None, help="file with one LLR vector per line")
    d.add_argument("--decoder", choices=DECODER_KINDS, default=None)
    d.add_argument("--t-max", type=int, default=None)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="run a Monte-Carlo FER/BER sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="output file prefix")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--noiseless", action="store_true")
    s.add_argument("--decoders", default=None, help="comma list, e.g. sc,csr-scan")
    s.set_defaults(func=cmd_simulate)

    x = sub.add_parser("compare", help="dB gap between two FER curves at target FERs")
    x.add_argument("csv_a")
    x.add_argument("csv_b")
    x.add_argument("--tolerance", type=float, default=0.15, help="max allowed gap (b minus a) in dB")
    x.add_argument("--targets", default=None, help="comma list of FER targets")
    x.add_argument("--iter", type=int, default=None, help="iteration to compare (default: last)")
    x.add_argument("--decoder-a", default=None)
    x.add_argument("--decoder-b", default=None)
    x.add_argument("--out", default=None)
    x.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
