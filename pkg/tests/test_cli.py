import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hhekit.cli import main

GOLDEN = json.loads((Path(__file__).parent / "data" / "rubato_golden.json").read_text())


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    rc = main(list(map(str, argv)), out, err)
    return rc, out.getvalue(), err.getvalue()


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and "," not in line)


def csv_block(text):
    body = text.split("--- csv ---\n", 1)[1].split("--- end ---", 1)[0]
    lines = body.strip().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, row.split(","))) for row in lines[1:]]


@pytest.fixture(scope="module")
def keyfile(tmp_path_factory):
    path = tmp_path_factory.mktemp("keys") / "k.npz"
    rc, out, err = run("keygen", "--seed", "cli", "--out", path, "--preset", "128S")
    assert rc == 0, err
    assert kv(out)["preset"] == "128S"
    return path


def test_primes():
    rc, out, _ = run("primes")
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "bnd,q,delta,mu"
    assert len(lines) == 1 + 49
    bnd, q, delta, mu = map(int, lines[1].split(","))
    assert q == (1 << 54) - 2 * 8192 * bnd + 1 and mu == (1 << 54) + delta - 1


def test_auto_mode_small_message_uses_rubato(keyfile, tmp_path):
    rc, out, err = run("encrypt", "--keys", keyfile, "--random", 12, "--out", tmp_path / "c.bin", "--mode", "auto")
    assert rc == 0, err
    assert "mode=RUBATO_SE" in out.splitlines()
    assert kv(out)["segments"] == "1"


def test_round_trip_through_files(keyfile, tmp_path):
    msg = tmp_path / "m.txt"
    values = np.linspace(-0.9, 0.9, 30)
    msg.write_text("# sample\n" + "".join(f"{v}\n" for v in values))
    for mode, tol in (("rubato", 2.0 ** -16), ("ckks", 2.0 ** -12)):
        ct = tmp_path / f"{mode}.bin"
        rc, out, err = run("encrypt", "--keys", keyfile, "--input", msg, "--out", ct, "--mode", mode)
        assert rc == 0, err
        rc, out, err = run("decrypt", "--keys", keyfile, "--input", ct, "--length", 30)
        assert rc == 0, err
        got = np.array([complex(*map(float, line.split(","))) for line in out.splitlines()])
        assert got.size == 30
        assert np.abs(got - values).max() <= tol


def test_complex_input_falls_back_to_ckks(keyfile, tmp_path):
    msg = tmp_path / "z.txt"
    msg.write_text("0.5,0.25\n-0.5,0.1\n")
    rc, out, _ = run("encrypt", "--keys", keyfile, "--input", msg, "--out", tmp_path / "z.bin")
    assert rc == 0 and kv(out)["mode"] == "CKKS"
    rc, _, err = run("encrypt", "--keys", keyfile, "--input", msg, "--out", tmp_path / "z.bin", "--mode", "rubato")
    assert rc == 2 and "real values" in err


def test_seeded_encrypt_is_reproducible(keyfile, tmp_path):
    blobs = []
    for i in range(2):
        path = tmp_path / f"r{i}.bin"
        assert run("encrypt", "--keys", keyfile, "--random", 40, "--out", path, "--seed", "7")[0] == 0
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1]
    other = tmp_path / "other.bin"
    run("encrypt", "--keys", keyfile, "--random", 40, "--out", other, "--seed", "8")
    assert other.read_bytes() != blobs[0]


@pytest.mark.parametrize("preset", ["128S", "128M", "128L"])
def test_keystream_matches_golden(preset):
    g = GOLDEN[preset]
    key_hex = np.array(g["key"], dtype="<u4").tobytes().hex()
    rc, out, _ = run("keystream", "--preset", preset, "--key-hex", key_hex, "--nonce-hex", g["nonce"],
                     "--count", 2 * len(g["blocks"]["0"]))
    assert rc == 0
    words = list(map(int, out.strip().split(",")))
    assert words == g["blocks"]["0"] + g["blocks"]["1"]


def test_keystream_bad_key_length():
    rc, _, err = run("keystream", "--preset", "128S", "--key-hex", "00", "--nonce-hex", "00" * 16)
    assert rc == 1 and "32-bit" in err


def test_simulate_rubato(tmp_path):
    trace = tmp_path / "t.csv"
    rc, out, _ = run("simulate", "--workload", "rubato", "--preset", "128S", "--trace", trace,
                     "--figure", tmp_path / "g.png")
    assert rc == 0
    summary = kv(out)
    total = int(summary["total_cycles"])
    assert abs(total / 1235 - 1) <= 0.15
    assert int(summary["serial_cycles"]) >= total
    assert trace.read_text().startswith("task_id,unit,opcode")
    assert (tmp_path / "g.png").stat().st_size > 0


def test_simulate_program_file_and_in_order(tmp_path):
    prog = tmp_path / "p.asm"
    prog.write_text("SET_MOD 0 18014398508400641 13\nNTT RAM1.a RAM0.a 0\nMOVE RAM3.b RAM0.b 8192\n")
    rc, out, _ = run("simulate", "--program", prog)
    ooo = int(kv(out)["total_cycles"])
    rc2, out2, _ = run("simulate", "--program", prog, "--in-order")
    ino = int(kv(out2)["total_cycles"])
    assert rc == rc2 == 0 and ooo < ino == 26730 + 4098
    prog.write_text("NTT RAM1.a\n")
    rc, _, err = run("simulate", "--program", prog)
    assert rc == 2 and "line 1" in err


def test_report_latency_and_figures(tmp_path):
    rc, out, _ = run("report", "latency")
    assert rc == 0
    rows = csv_block(out)
    assert len(rows) == 12
    first = next(r for r in rows if r["bus"] == "1x64" and r["direction"] == "m_to_ct_to_cloud")
    assert float(first["overall_cycles"]) / 1e3 == pytest.approx(533.5, rel=0.015)
    csv_path, fig = tmp_path / "n.csv", tmp_path / "n.svg"
    rc, out, _ = run("report", "latency", "--approach", "nearnet", "--out", csv_path, "--figure", fig)
    assert rc == 0 and kv(out)["csv"] == str(csv_path)
    assert "speedup_vs_standalone" in csv_path.read_text().splitlines()[0]
    assert fig.read_text().lstrip().startswith("<?xml")


def test_report_crossover(tmp_path):
    fig = tmp_path / "c.pdf"
    rc, out, _ = run("report", "crossover", "--figure", fig)
    assert rc == 0
    rows = csv_block(out)
    assert rows and all(float(r["compute_speedup"]) > 1 for r in rows)
    assert fig.read_bytes().startswith(b"%PDF")


def test_exit_codes(keyfile, tmp_path):
    assert run("bogus")[0] == 1
    assert run("primes", "--k", "60")[0] == 1
    assert run("encrypt", "--keys", keyfile, "--out", tmp_path / "x")[0] == 1
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"\x89PNG....")
    rc, _, err = run("decrypt", "--keys", keyfile, "--input", junk)
    assert rc == 2 and err.startswith("error:")
    assert run("decrypt", "--keys", keyfile, "--input", tmp_path / "missing")[0] == 2
    assert run("--help")[0] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hhekit", "simulate", "--workload", "ckks-c2m"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "total_cycles=" in res.stdout
