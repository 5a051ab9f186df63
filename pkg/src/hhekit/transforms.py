"""Negacyclic NTT over the RNS primes and a fixed-point complex FFT.

NTT: Cooley-Tukey on natural-order input producing bit-reversed output,
Gentleman-Sande back to natural order with the final N^-1 scaling.  Both
use the twiddle powers of a primitive 2N-th root stored in bit-reversed order.

FFT: radix-2 decimation in time over signed 29-bit fixed point with 26
fraction bits.  ``fft`` is unnormalised; ``ifft`` halves after every stage so
its output stays as bounded as its input.  Products are rounded half-to-even.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .errors import ContractError, FixedPointOverflow, StateError
from .field import PrimeSpec, vec_add, vec_mul, vec_sub

COEFF = "coefficient"
NTT = "ntt"

FRAC_BITS = 26
TOTAL_BITS = 29
FIXED_MAX = (1 << (TOTAL_BITS - 1)) - 1
FIXED_MIN = -(1 << (TOTAL_BITS - 1))


def bit_reverse(i: int, bits: int) -> int:
    return int(format(i, f"0{bits}b")[::-1], 2) if bits else 0


def bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@dataclass
class Polynomial:
    """Element of Z_q[X]/(X^N + 1) in coefficient or NTT representation."""

    coeffs: np.ndarray
    modulus: PrimeSpec
    domain: str = COEFF
    basis_index: int = 0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.uint64)
        if self.coeffs.shape != (self.modulus.ring_degree,):
            raise ContractError(f"expected {self.modulus.ring_degree} coefficients, got {self.coeffs.shape}")
        if self.domain not in (COEFF, NTT):
            raise ContractError(f"unknown domain {self.domain!r}")

    def copy(self) -> "Polynomial":
        return Polynomial(self.coeffs.copy(), self.modulus, self.domain, self.basis_index)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.modulus == other.modulus and self.domain == other.domain
                and np.array_equal(self.coeffs, other.coeffs))

    @classmethod
    def zero(cls, modulus: PrimeSpec, domain: str = COEFF, basis_index: int = 0) -> "Polynomial":
        return cls(np.zeros(modulus.ring_degree, dtype=np.uint64), modulus, domain, basis_index)


@dataclass(frozen=True)
class TwiddleTable:
    kind: str
    factors: np.ndarray = dc_field(repr=False)
    inverse: np.ndarray = dc_field(repr=False)
    ordering: str
    modulus: PrimeSpec | None = None
    root: int | None = None
    n_inv: int | None = None


def primitive_root_2n(spec: PrimeSpec) -> int:
    """Smallest-generator primitive 2N-th root of unity modulo q."""
    q, two_n = spec.q, 2 * spec.ring_degree
    if (q - 1) % two_n:
        raise ContractError(f"q={q} has no {two_n}-th roots of unity")
    for g in range(2, q):
        psi = pow(g, (q - 1) // two_n, q)
        if pow(psi, spec.ring_degree, q) == q - 1:
            return psi
    raise ContractError("no primitive root found")


@lru_cache(maxsize=64)
def make_ntt_table(spec: PrimeSpec) -> TwiddleTable:
    n, q = spec.ring_degree, spec.q
    psi = primitive_root_2n(spec)
    psi_inv = pow(psi, -1, q)
    bits = n.bit_length() - 1
    fwd = np.array([pow(psi, bit_reverse(i, bits), q) for i in range(n)], dtype=np.uint64)
    inv = np.array([pow(psi_inv, bit_reverse(i, bits), q) for i in range(n)], dtype=np.uint64)
    table = TwiddleTable(kind="ntt", factors=fwd, inverse=inv, ordering="bit-reversed",
                         modulus=spec, root=psi, n_inv=pow(n, -1, q))
    validate_ntt_table(table)
    return table


def validate_ntt_table(table: TwiddleTable) -> None:
    q, n, psi = table.modulus.q, table.modulus.ring_degree, table.root
    if pow(psi, n, q) != q - 1 or pow(psi, 2 * n, q) != 1:
        raise ContractError("NTT root is not a primitive 2N-th root of unity")


def _check_table(p: Polynomial, table: TwiddleTable):
    if table.kind != "ntt" or table.modulus != p.modulus:
        raise StateError("twiddle table does not match the polynomial modulus")


def ntt(p: Polynomial, table: TwiddleTable | None = None) -> Polynomial:
    if p.domain != COEFF:
        raise StateError("ntt expects a coefficient-domain polynomial")
    table = table or make_ntt_table(p.modulus)
    _check_table(p, table)
    spec = p.modulus
    a = p.coeffs.copy()
    n = a.size
    m, t = 1, n
    while m < n:
        t //= 2
        blk = a.reshape(m, 2, t)
        s = table.factors[m:2 * m, None]
        u = blk[:, 0, :].copy()
        v = vec_mul(blk[:, 1, :], np.broadcast_to(s, u.shape), spec)
        blk[:, 0, :] = vec_add(u, v, spec)
        blk[:, 1, :] = vec_sub(u, v, spec)
        m *= 2
    return Polynomial(a, spec, NTT, p.basis_index)


def intt(p: Polynomial, table: TwiddleTable | None = None) -> Polynomial:
    if p.domain != NTT:
        raise StateError("intt expects an NTT-domain polynomial")
    table = table or make_ntt_table(p.modulus)
    _check_table(p, table)
    spec = p.modulus
    a = p.coeffs.copy()
    n = a.size
    m, t = n, 1
    while m > 1:
        h = m // 2
        blk = a.reshape(h, 2, t)
        s = table.inverse[h:2 * h, None]
        u = blk[:, 0, :].copy()
        v = blk[:, 1, :].copy()
        blk[:, 0, :] = vec_add(u, v, spec)
        blk[:, 1, :] = vec_mul(vec_sub(u, v, spec), np.broadcast_to(s, u.shape), spec)
        t *= 2
        m = h
    a = vec_mul(a, np.full(n, table.n_inv, dtype=np.uint64), spec)
    return Polynomial(a, spec, COEFF, p.basis_index)


def _check_pair(a: Polynomial, b: Polynomial):
    if a.modulus != b.modulus:
        raise StateError("polynomials live in different RNS bases")
    if a.domain != b.domain:
        raise StateError(f"domain mismatch: {a.domain} vs {b.domain}")


def pointwise_add(a: Polynomial, b: Polynomial) -> Polynomial:
    _check_pair(a, b)
    return Polynomial(vec_add(a.coeffs, b.coeffs, a.modulus), a.modulus, a.domain, a.basis_index)


def pointwise_sub(a: Polynomial, b: Polynomial) -> Polynomial:
    _check_pair(a, b)
    return Polynomial(vec_sub(a.coeffs, b.coeffs, a.modulus), a.modulus, a.domain, a.basis_index)


def pointwise_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    _check_pair(a, b)
    return Polynomial(vec_mul(a.coeffs, b.coeffs, a.modulus), a.modulus, a.domain, a.basis_index)


def pointwise_mac(a: Polynomial, b: Polynomial, acc: Polynomial) -> Polynomial:
    """``a * b + acc`` elementwise."""
    _check_pair(a, b)
    _check_pair(a, acc)
    prod = vec_mul(a.coeffs, b.coeffs, a.modulus)
    return Polynomial(vec_add(prod, acc.coeffs, a.modulus), a.modulus, a.domain, a.basis_index)


# ---------------------------------------------------------------------------
# fixed-point complex FFT


@dataclass
class FixedVector:
    """Complex vector in signed fixed point (raw integers scaled by 2^26)."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        self.re = np.asarray(self.re, dtype=np.int64)
        self.im = np.asarray(self.im, dtype=np.int64)

    def __len__(self):
        return self.re.size

    @classmethod
    def from_complex(cls, z) -> "FixedVector":
        z = np.asarray(z, dtype=np.complex128)
        scale = float(1 << FRAC_BITS)
        vec = cls(np.rint(z.real * scale).astype(np.int64), np.rint(z.imag * scale).astype(np.int64))
        _check_range(vec, stage=0)
        return vec

    def to_complex(self) -> np.ndarray:
        scale = float(1 << FRAC_BITS)
        return self.re / scale + 1j * (self.im / scale)

    def conj(self) -> "FixedVector":
        return FixedVector(self.re.copy(), -self.im)


def _check_range(v: FixedVector, stage: int):
    lo = min(v.re.min(initial=0), v.im.min(initial=0))
    hi = max(v.re.max(initial=0), v.im.max(initial=0))
    if lo < FIXED_MIN or hi > FIXED_MAX:
        peak = max(-lo, hi) / float(1 << FRAC_BITS)
        raise FixedPointOverflow(stage, peak)


def round_shift(x: np.ndarray, shift: int) -> np.ndarray:
    """Arithmetic right shift with round-half-to-even."""
    if shift == 0:
        return x.copy()
    x = np.asarray(x, dtype=np.int64)
    q = x >> shift
    rem = x & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    up = (rem > half) | ((rem == half) & ((q & 1) == 1))
    return q + up


def fixed_cmul(ar, ai, br, bi):
    """Complex product with three real multiplies, rounded back to 26 fraction bits."""
    k1 = br * (ar + ai)
    k2 = ar * (bi - br)
    k3 = ai * (br + bi)
    return round_shift(k1 - k3, FRAC_BITS), round_shift(k1 + k2, FRAC_BITS)


@lru_cache(maxsize=32)
def make_fft_table(length: int) -> TwiddleTable:
    """Quantised ``exp(-2*pi*i*k/L)`` for ``k < L/2`` (natural order)."""
    if length < 1 or length & (length - 1):
        raise ContractError(f"FFT length must be a power of two, got {length}")
    k = np.arange(max(length // 2, 1))
    w = np.exp(-2j * np.pi * k / length)
    scale = float(1 << FRAC_BITS)
    fwd = np.stack([np.rint(w.real * scale), np.rint(w.imag * scale)]).astype(np.int64)
    inv = np.stack([fwd[0], -fwd[1]])
    return TwiddleTable(kind="fft", factors=fwd, inverse=inv, ordering="natural")


def _fixed_transform(v: FixedVector, twiddles: np.ndarray, halve: bool) -> FixedVector:
    n = len(v)
    if n & (n - 1):
        raise ContractError(f"FFT length must be a power of two, got {n}")
    _check_range(v, stage=0)
    perm = bit_reverse_permutation(n)
    re, im = v.re[perm].copy(), v.im[perm].copy()
    h, stage = 1, 1
    while h < n:
        groups = n // (2 * h)
        wr = twiddles[0][:: n // (2 * h)][:h]
        wi = twiddles[1][:: n // (2 * h)][:h]
        br, bi = re.reshape(groups, 2, h), im.reshape(groups, 2, h)
        ur, ui = br[:, 0, :].copy(), bi[:, 0, :].copy()
        vr, vi = fixed_cmul(br[:, 1, :], bi[:, 1, :], wr, wi)
        sr, si, dr, di = ur + vr, ui + vi, ur - vr, ui - vi
        if halve:
            sr, si, dr, di = (round_shift(x, 1) for x in (sr, si, dr, di))
        br[:, 0, :], bi[:, 0, :] = sr, si
        br[:, 1, :], bi[:, 1, :] = dr, di
        out = FixedVector(re, im)
        _check_range(out, stage)
        h *= 2
        stage += 1
    return FixedVector(re, im)


def fft(v: FixedVector, table: TwiddleTable | None = None) -> FixedVector:
    """Unnormalised forward DFT, ``X_k = sum_j x_j exp(-2*pi*i*jk/L)``."""
    table = table or make_fft_table(len(v))
    return _fixed_transform(v, table.factors, halve=False)


def ifft(v: FixedVector, table: TwiddleTable | None = None) -> FixedVector:
    """Inverse DFT including the 1/L factor, applied as a halving per stage."""
    table = table or make_fft_table(len(v))
    return _fixed_transform(v, table.inverse, halve=True)
