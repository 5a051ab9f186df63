"""On-disk formats: CKKS ciphertexts, Rubato SE ciphertexts and key bundles.

CKKS ciphertext (little-endian)::

    magic "HHECKKS1" | N:u32 | L:u32 | slots:u32 | scale_bits:u32 | q[L]:u64
    then for each basis: ct0[N]:u64, ct1[N]:u64

SE ciphertext::

    magic "HHERUBS1" | preset:4s | scale_bits:u32 | length:u32 | segments:u32
    then per segment: nonce:16s | counter:u64 | words:u32 | word[words]:u64
"""
from __future__ import annotations

import struct
import zipfile
from pathlib import Path

import numpy as np

from . import ckks, rubato
from .errors import FormatError
from .field import prime_spec_from_q
from .transforms import NTT, Polynomial

CKKS_MAGIC = b"HHECKKS1"
SE_MAGIC = b"HHERUBS1"
_CKKS_HDR = struct.Struct("<8sIIII")
_SE_HDR = struct.Struct("<8s4sIII")
_SEG_HDR = struct.Struct("<16sQI")


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n: int, what: str) -> memoryview:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated {what}: need {n} bytes", offset=self.pos)
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct, what: str):
        return st.unpack(self.take(st.size, what))

    def words(self, count: int, what: str) -> np.ndarray:
        return np.frombuffer(self.take(8 * count, what), dtype="<u8").astype(np.uint64)

    def finish(self):
        if self.pos != len(self.data):
            raise FormatError("trailing bytes", offset=self.pos)


def ckks_to_bytes(ct: ckks.Ciphertext, slots: int, scale_bits: int) -> bytes:
    n = ct.ct0[0].modulus.ring_degree
    parts = [_CKKS_HDR.pack(CKKS_MAGIC, n, len(ct.ct0), slots, scale_bits),
             np.asarray(ct.moduli, dtype="<u8").tobytes()]
    for c0, c1 in zip(ct.ct0, ct.ct1):
        parts += [c0.coeffs.astype("<u8").tobytes(), c1.coeffs.astype("<u8").tobytes()]
    return b"".join(parts)


def ckks_from_bytes(data: bytes) -> tuple[ckks.Ciphertext, int, int]:
    rd = _Reader(data)
    magic, n, count, slots, scale_bits = rd.unpack(_CKKS_HDR, "header")
    if magic != CKKS_MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    if n == 0 or n & (n - 1) or count == 0:
        raise FormatError(f"bad dimensions N={n}, L={count}", offset=8)
    qs = rd.words(count, "modulus list")
    ct0, ct1 = [], []
    for i, q in enumerate(qs):
        try:
            spec = prime_spec_from_q(int(q), n)
        except ValueError as exc:
            raise FormatError(str(exc), offset=_CKKS_HDR.size + 8 * i) from None
        ct0.append(Polynomial(rd.words(n, f"basis {i} ct0"), spec, NTT, i))
        ct1.append(Polynomial(rd.words(n, f"basis {i} ct1"), spec, NTT, i))
        if (ct0[-1].coeffs >= q).any() or (ct1[-1].coeffs >= q).any():
            raise FormatError(f"coefficient out of range for basis {i}", offset=rd.pos)
    rd.finish()
    return ckks.Ciphertext(ct0, ct1, level=count - 1), slots, scale_bits


def se_to_bytes(segments: list[rubato.SeCiphertext], length: int) -> bytes:
    if not segments:
        raise FormatError("no segments to write")
    preset = segments[0].preset.encode().ljust(4, b"\0")
    parts = [_SE_HDR.pack(SE_MAGIC, preset, segments[0].scale_bits, length, len(segments))]
    for s in segments:
        parts.append(_SEG_HDR.pack(s.nonce, s.counter, s.words.size))
        parts.append(s.words.astype("<u8").tobytes())
    return b"".join(parts)


def se_from_bytes(data: bytes) -> tuple[list[rubato.SeCiphertext], int]:
    rd = _Reader(data)
    magic, preset, scale_bits, length, count = rd.unpack(_SE_HDR, "header")
    if magic != SE_MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    preset = preset.rstrip(b"\0").decode(errors="replace")
    segs = []
    for i in range(count):
        nonce, counter, nwords = rd.unpack(_SEG_HDR, f"segment {i} header")
        words = rd.words(nwords, f"segment {i} payload")
        segs.append(rubato.SeCiphertext(words, preset, bytes(nonce), counter, scale_bits, nwords))
    rd.finish()
    return segs, length


def sniff(data: bytes) -> str:
    head = bytes(data[:8])
    if head == CKKS_MAGIC:
        return "ckks"
    if head == SE_MAGIC:
        return "rubato"
    raise FormatError(f"unrecognised file magic {head!r}", offset=0)


# ---------------------------------------------------------------------------
# keys


def save_keys(path: str | Path, keys: ckks.KeyMaterial, basis: ckks.RnsBasis,
              rubato_key: np.ndarray | None = None, preset: str = "128L") -> None:
    arrays = {
        "q": np.array([p.q for p in basis.primes], dtype=np.uint64),
        "log_n": np.array(basis.ring_degree.bit_length() - 1),
        "sk_coeffs": np.asarray(keys.sk_coeffs, dtype=np.int8),
        "pk0": np.stack([p.coeffs for p in keys.pk0]),
        "pk1": np.stack([p.coeffs for p in keys.pk1]),
        "seed": np.frombuffer(keys.seed, dtype=np.uint8),
        "preset": np.array(preset),
    }
    if rubato_key is not None:
        arrays["rubato_key"] = np.asarray(rubato_key, dtype=np.uint64)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_keys(path: str | Path) -> tuple[ckks.KeyMaterial, ckks.RnsBasis, np.ndarray | None, str]:
    try:
        z = np.load(path, allow_pickle=False)
        n = 1 << int(z["log_n"])
        specs = tuple(prime_spec_from_q(int(q), n) for q in z["q"])
        basis = ckks.RnsBasis(specs)
        s = z["sk_coeffs"].astype(np.int64)
        sk = [ckks._lift(s, spec, i) for i, spec in enumerate(specs)]
        pk0 = [Polynomial(z["pk0"][i], spec, NTT, i) for i, spec in enumerate(specs)]
        pk1 = [Polynomial(z["pk1"][i], spec, NTT, i) for i, spec in enumerate(specs)]
        rk = z["rubato_key"] if "rubato_key" in z.files else None
        keys = ckks.KeyMaterial(sk, pk0, pk1, z["seed"].tobytes(), sk_coeffs=s)
        return keys, basis, rk, str(z["preset"])
    except (KeyError, ValueError, OSError, zipfile.BadZipFile) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise FormatError(f"unreadable key file: {exc}") from None
