"""Seeded SHAKE-128 stream and the samplers built on it.

One generator type serves both the CKKS noise samplers and the Rubato round
constants, the way a single RNG & sampling unit would on the accelerator.
"""
from __future__ import annotations

import hashlib
import math
from functools import lru_cache

import numpy as np

GAUSS_SIGMA = 3.2
GAUSS_TAIL = 6


class Xof:
    """Sequential reader over ``SHAKE128(seed || domain)``."""

    def __init__(self, seed: bytes, domain: bytes = b""):
        if isinstance(seed, str):
            seed = seed.encode()
        self._input = bytes(seed) + bytes(domain)
        self._buf = b""
        self._pos = 0

    def read(self, n: int) -> bytes:
        end = self._pos + n
        if end > len(self._buf):
            # XOF output is prefix-stable, so regenerate a longer digest
            self._buf = hashlib.shake_128(self._input).digest(max(end, 2 * len(self._buf), 168))
        out = self._buf[self._pos:end]
        self._pos = end
        return out

    @property
    def consumed(self) -> int:
        return self._pos


def words_from_bytes(data: bytes, bits: int) -> np.ndarray:
    """Split a byte string into consecutive little-endian ``bits``-wide words."""
    stream = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    count = stream.size // bits
    chunks = stream[: count * bits].reshape(count, bits).astype(np.uint64)
    weights = np.left_shift(np.uint64(1), np.arange(bits, dtype=np.uint64))
    return (chunks * weights).sum(axis=1, dtype=np.uint64)


def uniform_words(xof: Xof, count: int, modulus: int, bits: int | None = None,
                  nonzero: bool = False) -> np.ndarray:
    """Rejection-sample ``count`` words uniform in ``[0, modulus)``.

    Candidates are consecutive ``bits``-wide chunks of the stream (default:
    bit length of ``modulus``); with ``nonzero`` the value 0 is rejected too.
    """
    bits = modulus.bit_length() if bits is None else bits
    out = np.empty(0, dtype=np.uint64)
    while out.size < count:
        need = count - out.size
        # batches are multiples of 8 words so no stream bits are skipped
        batch = (int(need * (1 << bits) / max(modulus - nonzero, 1) * 1.05) + 8 + 7) // 8 * 8
        words = words_from_bytes(xof.read(batch * bits // 8), bits)
        keep = (words < modulus) & (words > 0) if nonzero else words < modulus
        out = np.concatenate([out, words[keep]])
    return out[:count]


def ternary(xof: Xof, count: int) -> np.ndarray:
    """Ternary samples with P(-1) = P(+1) = 1/4, P(0) = 1/2."""
    pairs = words_from_bytes(xof.read((2 * count + 7) // 8), 2)[:count].astype(np.int64)
    lut = np.array([0, 1, -1, 0], dtype=np.int64)
    return lut[pairs]


@lru_cache(maxsize=None)
def _gauss_cdt(sigma: float, tail: int) -> tuple[np.ndarray, int]:
    bound = int(math.floor(tail * sigma))
    ks = np.arange(-bound, bound + 1)
    phi = lambda x: 0.5 * (1.0 + math.erf(x / (sigma * math.sqrt(2.0))))
    probs = np.array([phi(k + 0.5) - phi(k - 0.5) for k in ks])
    cdf = np.cumsum(probs / probs.sum())
    thresholds = np.minimum(np.round(cdf * 2.0**63), 2.0**63 - 1).astype(np.uint64)
    return thresholds, bound


def gaussian(xof: Xof, count: int, sigma: float = GAUSS_SIGMA, tail: int = GAUSS_TAIL) -> np.ndarray:
    """Rounded Gaussian via a cumulative-distribution table, tail-cut at ``tail * sigma``."""
    thresholds, bound = _gauss_cdt(float(sigma), int(tail))
    raw = np.frombuffer(xof.read(8 * count), dtype="<u8") >> np.uint64(1)
    idx = np.searchsorted(thresholds, raw, side="right")
    return np.minimum(idx, thresholds.size - 1).astype(np.int64) - bound
