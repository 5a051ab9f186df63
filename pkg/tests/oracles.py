"""Slow, independent reference implementations used only by the tests.

Nothing here imports from hhekit; each oracle is written from the
mathematical definition with plain Python integers.
"""
from __future__ import annotations

import hashlib
import math


# ---------------------------------------------------------------------------
# primes and Barrett


def is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    f = 3
    while f <= r:
        if n % f == 0:
            return False
        f += 2
    return True


def is_prime_oracle(n: int) -> bool:
    """Trial division for small n, gmpy2's independent test otherwise."""
    if n < 1 << 40:
        return is_prime_trial(n)
    import gmpy2
    return bool(gmpy2.is_prime(n, 50))


def prime_scan(k: int, ring_degree: int, bnd_bits: int) -> list[int]:
    return [q for bnd in range(1, 1 << bnd_bits)
            if (q := (1 << k) - 2 * ring_degree * bnd + 1) > 2 and is_prime_oracle(q)]


def delta_oracle(k: int, q: int) -> int:
    """Delta by plain floor division: mu = floor(2^2k / q) = 2^k + delta - 1."""
    return (1 << 2 * k) // q - (1 << k) + 1


# ---------------------------------------------------------------------------
# polynomials


def negacyclic_schoolbook(a: list[int], b: list[int], q: int) -> list[int]:
    n = len(a)
    out = [0] * n
    for i in range(n):
        for j in range(n):
            k = i + j
            if k < n:
                out[k] += a[i] * b[j]
            else:
                out[k - n] -= a[i] * b[j]
    return [c % q for c in out]


def negacyclic_kronecker(a, b, q: int) -> list[int]:
    """Negacyclic product via one big-integer multiply (Kronecker substitution)."""
    import gmpy2

    n = len(a)
    slot = 16  # bytes per coefficient; n * q^2 < 2^128 for q < 2^57, n <= 2^14
    pa = b"".join(int(x).to_bytes(slot, "little") for x in a)
    pb = b"".join(int(x).to_bytes(slot, "little") for x in b)
    prod = gmpy2.mpz(int.from_bytes(pa, "little")) * gmpy2.mpz(int.from_bytes(pb, "little"))
    raw = int(prod).to_bytes(slot * 2 * n, "little")
    full = [int.from_bytes(raw[i * slot:(i + 1) * slot], "little") for i in range(2 * n)]
    return [(full[i] - full[i + n]) % q for i in range(n)]


# ---------------------------------------------------------------------------
# Rubato


RUBATO_PRESETS = {
    # name: (v, l, r, t)
    "128S": (4, 12, 5, 0x3EE0001),
    "128M": (6, 32, 3, 0x1FC0001),
    "128L": (8, 60, 2, 0x1FC0001),
}

MIX_FIRST_ROW = {4: [2, 3, 1, 1], 6: [4, 2, 4, 3, 1, 1], 8: [5, 3, 4, 3, 6, 2, 1, 1]}


class BitReader:
    def __init__(self, data: bytes):
        self.value = int.from_bytes(data, "little")
        self.pos = 0
        self.limit = 8 * len(data)

    def take(self, bits: int) -> int:
        if self.pos + bits > self.limit:
            raise EOFError
        out = (self.value >> self.pos) & ((1 << bits) - 1)
        self.pos += bits
        return out


def rubato_constants(nonce: bytes, counter: int, n: int, r: int, t: int) -> list[list[int]]:
    bits = t.bit_length()
    seed = nonce + counter.to_bytes(8, "little")
    size = 4096
    while True:
        rd = BitReader(hashlib.shake_128(seed).digest(size))
        vals = []
        try:
            while len(vals) < (r + 1) * n:
                w = rd.take(bits)
                if 0 < w < t:
                    vals.append(w)
        except EOFError:
            size *= 2
            continue
        return [vals[i * n:(i + 1) * n] for i in range(r + 1)]


def _circulant(v: int) -> list[list[int]]:
    row = MIX_FIRST_ROW[v]
    return [[row[(j - i) % v] for j in range(v)] for i in range(v)]


def _mix_columns(x, v, t):
    m = _circulant(v)
    return [sum(m[i][k] * x[k * v + j] for k in range(v)) % t for i in range(v) for j in range(v)]


def _mix_rows(x, v, t):
    m = _circulant(v)
    return [sum(x[i * v + k] * m[j][k] for k in range(v)) % t for i in range(v) for j in range(v)]


def _feistel(x, t):
    return [x[0]] + [(x[i] + x[i - 1] * x[i - 1]) % t for i in range(1, len(x))]


def _ark(x, key, rc, t):
    return [(a + k * c) % t for a, k, c in zip(x, key, rc)]


def rubato_block(preset: str, key: list[int], nonce: bytes, counter: int = 0) -> list[int]:
    v, l, r, t = RUBATO_PRESETS[preset]
    n = v * v
    rc = rubato_constants(nonce, counter, n, r, t)
    x = [(i + 1) % t for i in range(n)]
    x = _ark(x, key, rc[0], t)
    for i in range(1, r):
        x = _feistel(x, t)
        x = _mix_columns(_mix_rows(x, v, t), v, t)
        x = _ark(x, key, rc[i], t)
    x = _mix_columns(_mix_rows(x, v, t), v, t)
    x = _feistel(x, t)
    x = _mix_columns(_mix_rows(x, v, t), v, t)
    x = _ark(x, key, rc[r], t)
    return x[:l]


def golden_key(preset: str) -> list[int]:
    v, _, _, t = RUBATO_PRESETS[preset]
    return [(0x9E3779B1 * (i + 1) + 12345) % t for i in range(v * v)]


GOLDEN_NONCE = bytes(range(16))


# ---------------------------------------------------------------------------
# CKKS canonical embedding


def canonical_decode(coeffs: list[float], slots: int) -> list[complex]:
    """Evaluate the real polynomial at the slot roots zeta^(5^j), zeta = exp(i*pi/N)."""
    n = len(coeffs)
    out = []
    for j in range(slots):
        e = pow(5, j, 2 * n)
        root = complex(math.cos(math.pi * e / n), math.sin(math.pi * e / n))
        acc = 0j
        p = 1 + 0j
        for c in coeffs:
            acc += c * p
            p *= root
        out.append(acc)
    return out
