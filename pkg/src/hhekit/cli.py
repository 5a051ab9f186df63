"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
from pathlib import Path

import numpy as np

from . import ckks, hhe, netmodel, rubato
from .errors import ContractError, FixedPointOverflow, FormatError, HHEError, ParameterError
from .field import find_rns_primes

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _derive(seed: str, label: str, n: int = 16) -> bytes:
    return hashlib.shake_128(f"{seed}/{label}".encode()).digest(n)


def _emit_kv(out, record: dict) -> None:
    for k, v in record.items():
        out.write(f"{k}={v}\n")


def _csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit_table(out, rows: list[dict], path: str | None) -> None:
    text = _csv_text(rows)
    if path:
        Path(path).write_text(text)
        out.write(f"csv={path}\n")
    else:
        out.write("--- csv ---\n" + text + "--- end ---\n")


def _read_message(path: str) -> np.ndarray:
    vals = []
    for no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            re_ = float(parts[0])
            im = float(parts[1]) if len(parts) > 1 else 0.0
        except ValueError:
            raise FormatError(f"not a number: {line!r}", line=no) from None
        vals.append(complex(re_, im))
    return np.array(vals, dtype=np.complex128)


def _write_message(path: str | None, m: np.ndarray, out) -> None:
    lines = "".join(f"{z.real:.12g},{z.imag:.12g}\n" for z in np.asarray(m, dtype=np.complex128))
    if path:
        Path(path).write_text(lines)
        out.write(f"message={path}\n")
    else:
        out.write(lines)


# ---------------------------------------------------------------------------
# subcommands


def cmd_primes(args, out):
    primes = find_rns_primes(args.k, 1 << args.logN, args.bnd_bits)
    out.write("bnd,q,delta,mu\n")
    for p in primes:
        out.write(f"{p.bnd},{p.q},{p.delta},{p.mu}\n")


def cmd_keygen(args, out):
    basis = ckks.default_basis(1 << args.logN, args.bases)
    keys = ckks.keygen(args.seed.encode(), basis)
    params = rubato.get_params(args.preset)
    rk = rubato.derive_key(args.seed.encode(), params)
    from .fileformats import save_keys
    save_keys(args.out, keys, basis, rk, params.preset)
    _emit_kv(out, {"keys": args.out, "N": basis.ring_degree, "bases": len(basis.primes),
                   "preset": params.preset})


def cmd_encrypt(args, out):
    from .fileformats import ckks_to_bytes, load_keys, se_to_bytes
    keys, basis, rk, preset = load_keys(args.keys)
    if args.input:
        m = _read_message(args.input)
    elif args.random:
        rng = np.random.default_rng(int.from_bytes(_derive(args.seed, "message", 8), "little"))
        m = rng.uniform(-1, 1, args.random).astype(np.complex128)
    else:
        raise UsageError("encrypt: give --input FILE or --random LENGTH")
    if m.size == 0:
        raise ContractError("empty message")
    cfg = hhe.SessionConfig(m.size, args.mode, args.bus, args.cloud_load, args.preset or preset,
                            args.se_scale_bits)
    mode = hhe.select_mode(cfg)
    if mode is hhe.Mode.RUBATO_SE and (np.abs(m.imag) > 0).any():
        if args.mode == "rubato":
            raise ContractError("Rubato SE carries real values only")
        mode = hhe.Mode.CKKS
        cfg.mode = "ckks"
    nonce = _derive(args.seed, "nonce")
    if mode is hhe.Mode.CKKS:
        slots = args.slots or m.size
        if m.size > slots:
            raise ContractError(f"message of {m.size} values exceeds {slots} slots")
        enc = ckks.EncodingParams(basis, slots, args.scale_bits)
        msg = np.zeros(slots, dtype=np.complex128)
        msg[: m.size] = m
        cfg.message_length = slots
        ct = hhe.hhe_encrypt(msg, cfg, hhe.HheKeys(ckks=keys), nonce, enc)
        data = ckks_to_bytes(ct.ckks_ct, slots, args.scale_bits)
        extra = {"slots": slots, "bases": len(basis.primes)}
    else:
        if rk is None:
            raise FormatError("key file carries no Rubato key")
        ct = hhe.hhe_encrypt(m.real, cfg, hhe.HheKeys(rubato_key=rk), nonce)
        data = se_to_bytes(ct.segments, m.size)
        extra = {"preset": cfg.preset, "segments": len(ct.segments)}
    Path(args.out).write_bytes(data)
    _emit_kv(out, {"mode": mode.value, "length": m.size, **extra, "bytes": len(data), "ciphertext": args.out})


def cmd_decrypt(args, out):
    from .fileformats import ckks_from_bytes, load_keys, se_from_bytes, sniff
    keys, basis, rk, _ = load_keys(args.keys)
    data = Path(args.input).read_bytes()
    kind = sniff(data)
    if kind == "ckks":
        ct, slots, scale_bits = ckks_from_bytes(data)
        if ct.moduli[0] != basis.primes[0].q:
            raise FormatError("ciphertext basis does not match the key file")
        m = ckks.decrypt_message(ct, ckks.EncodingParams(basis, slots, scale_bits), keys)
    else:
        segs, length = se_from_bytes(data)
        if rk is None:
            raise FormatError("key file carries no Rubato key")
        m = hhe.hhe_decrypt_segments(hhe.HheCiphertext(hhe.Mode.RUBATO_SE, segments=segs, length=length), rk)
        m = m[:length]
    if args.length:
        m = m[: args.length]
    _write_message(args.out, m, out)


def _parse_hex(text: str, what: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise UsageError(f"{what} is not valid hex") from None


def cmd_keystream(args, out):
    p = rubato.get_params(args.preset)
    raw = _parse_hex(args.key_hex, "--key-hex")
    if len(raw) != 4 * p.n:
        raise UsageError(f"--key-hex must encode {p.n} 32-bit little-endian words ({8 * p.n} hex digits)")
    key = np.frombuffer(raw, dtype="<u4").astype(np.int64)
    nonce = _parse_hex(args.nonce_hex, "--nonce-hex")
    ks = rubato.keystream(key, nonce, p, count=args.count, noise=args.noise)
    out.write(",".join(str(int(w)) for w in ks) + "\n")


def cmd_simulate(args, out):
    from .accelsim import programs, simulate
    from .accelsim.trace import trace_csv
    if args.program:
        text = Path(args.program).read_text()
    elif args.workload == "rubato":
        text = programs.rubato_block(args.preset)
    elif args.workload == "ckks-m2c":
        text = programs.ckks_m_to_ct(network=args.network)
    elif args.workload == "ckks-c2m":
        text = programs.ckks_ct_to_m(network=args.network)
    else:
        raise UsageError("simulate: give --workload or --program")
    report = simulate(text, bus=args.bus, in_order=args.in_order)
    summary = {"workload": args.workload or Path(args.program).name, "bus": args.bus, **report.summary()}
    _emit_kv(out, summary)
    if args.trace:
        Path(args.trace).write_text(trace_csv(report))
        out.write(f"trace={args.trace}\n")
    if args.figure:
        from .plots import plot_trace
        out.write(f"figure={plot_trace(report, args.figure)}\n")


def cmd_report(args, out):
    if args.kind == "latency":
        buses = [args.bus] if args.bus else list(netmodel.BUS_NAMES)
        directions = [args.direction] if args.direction else list(netmodel.DIRECTIONS)
        reports = []
        for d in directions:
            sc = netmodel.scenario(d)
            for b in buses:
                bus = netmodel.bus_config(b)
                if args.approach == "standalone":
                    reports.append(netmodel.standalone_latency(sc, bus))
                else:
                    reports.append(netmodel.near_network_latency(sc, bus, netmodel.niu_delay(d)))
        _emit_kv(out, {"report": "latency", "approach": args.approach, "rows": len(reports)})
        rows = [r.as_row() for r in reports]
        if args.approach == "nearnet":
            sweep = {(s.bus, s.direction): s.speedup for s in netmodel.speedup_sweep()}
            for row in rows:
                row["speedup_vs_standalone"] = round(sweep[(row["bus"], row["direction"])], 3)
        _emit_table(out, rows, args.out)
        if args.figure:
            from .plots import plot_latency, plot_speedup_sweep
            if args.approach == "nearnet":
                path = plot_speedup_sweep(netmodel.speedup_sweep(), args.figure)
            else:
                path = plot_latency(reports, args.figure)
            out.write(f"figure={path}\n")
    else:
        rows = hhe.crossover_report()
        _emit_kv(out, {"report": "crossover", "rows": len(rows)})
        _emit_table(out, [r.as_row() for r in rows], args.out)
        if args.figure:
            from .plots import plot_crossover
            out.write(f"figure={plot_crossover(rows, args.figure)}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hhekit", description="Edge-side HHE toolkit: CKKS, Rubato, accelerator and latency models.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("primes", help="list format primes as CSV (bnd,q,delta,mu)")
    p.add_argument("--k", type=int, default=54, help="prime bit width")
    p.add_argument("--logN", type=int, default=13, help="log2 of the ring degree")
    p.add_argument("--bnd-bits", type=int, default=10, help="bnd ranges over [1, 2^bnd_bits - 1]")
    p.set_defaults(func=cmd_primes)

    p = sub.add_parser("keygen", help="generate CKKS and Rubato keys into an .npz file")
    p.add_argument("--seed", required=True, help="seed string; fixes all key material")
    p.add_argument("--out", required=True, help="output key file (.npz)")
    p.add_argument("--logN", type=int, default=13, help="log2 of the ring degree")
    p.add_argument("--bases", type=int, default=3, help="number of RNS primes")
    p.add_argument("--preset", default="128L", help="Rubato preset for the symmetric key")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a message with CKKS or Rubato SE")
    p.add_argument("--keys", required=True, help="key file from keygen")
    p.add_argument("--input", help="message file: one value per line, 're' or 're,im'")
    p.add_argument("--random", type=int, help="encrypt LENGTH random reals in [-1, 1) instead of a file")
    p.add_argument("--out", required=True, help="ciphertext output file")
    p.add_argument("--mode", choices=("auto", "ckks", "rubato"), default="auto", help="encryption mode")
    p.add_argument("--cloud-load", choices=("low", "high"), default="low", help="cloud load hint for auto mode")
    p.add_argument("--bus", choices=netmodel.BUS_NAMES, default="2x256", help="bus profile for auto mode")
    p.add_argument("--preset", help="Rubato preset (default: the key file's)")
    p.add_argument("--slots", type=int, help="CKKS slot count (default: message length)")
    p.add_argument("--scale-bits", type=int, default=ckks.DEFAULT_SCALE_BITS, help="CKKS scale exponent")
    p.add_argument("--se-scale-bits", type=int, default=16, help="Rubato SE fixed-point fraction bits")
    p.add_argument("--seed", default="0", help="seed for encryption randomness and nonces")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a CKKS or SE ciphertext file")
    p.add_argument("--keys", required=True, help="key file from keygen")
    p.add_argument("--input", required=True, help="ciphertext file")
    p.add_argument("--out", help="message output file (default: stdout)")
    p.add_argument("--length", type=int, help="keep only the first LENGTH values")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("keystream", help="dump Rubato keystream words as decimal CSV")
    p.add_argument("--preset", required=True, choices=sorted(rubato.PRESETS), help="parameter set")
    p.add_argument("--key-hex", required=True, help="n key words, 32-bit little-endian, hex encoded")
    p.add_argument("--nonce-hex", required=True, help="16-byte nonce, hex encoded")
    p.add_argument("--count", type=int, help="number of words (default: one block)")
    p.add_argument("--noise", action="store_true", help="add the post-Fin Gaussian noise")
    p.set_defaults(func=cmd_keystream)

    p = sub.add_parser("simulate", help="run the accelerator model")
    p.add_argument("--workload", choices=("rubato", "ckks-m2c", "ckks-c2m"), help="built-in program")
    p.add_argument("--program", help="assembly file to run instead of a built-in program")
    p.add_argument("--preset", default="128S", choices=sorted(rubato.PRESETS), help="Rubato preset")
    p.add_argument("--bus", choices=netmodel.BUS_NAMES, default="1x64", help="bus calibration for DMA")
    p.add_argument("--network", action="store_true", help="include NIC send/receive tasks")
    p.add_argument("--in-order", action="store_true", help="use the serial reference scheduler")
    p.add_argument("--trace", help="write the per-task trace CSV here")
    p.add_argument("--figure", help="write a Gantt chart (PNG/PDF/SVG by extension)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="latency and crossover reports")
    p.add_argument("kind", choices=("latency", "crossover"), help="report type")
    p.add_argument("--bus", choices=netmodel.BUS_NAMES, help="single bus config (default: all)")
    p.add_argument("--approach", choices=("standalone", "nearnet"), default="standalone",
                   help="latency approach")
    p.add_argument("--direction", choices=netmodel.DIRECTIONS, help="single direction (default: both)")
    p.add_argument("--out", help="write the CSV table here instead of stdout")
    p.add_argument("--figure", help="also render a figure to this file")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        args.func(args, out)
        return EXIT_OK
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ParameterError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (FormatError, ContractError, FixedPointOverflow, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (HHEError, AssertionError, Exception) as exc:
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
