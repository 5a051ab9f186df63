"""Modular arithmetic over the structured RNS primes and the Rubato field.

Every CKKS modulus has the shape ``q = 2^k - 2N*bnd + 1``.  Its Barrett
constant then takes the shape ``mu = 2^k + delta - 1`` with a small ``delta``,
so both multiplications of a Barrett reduction collapse into shifts, adds and
one narrow multiply (by ``delta >> 12`` and by ``bnd`` respectively).

Scalar routines work on Python ints.  The ``*_array`` routines work on
``uint64`` numpy arrays and carry 108-bit products as two base-2^54 words.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractError, ParameterError

MAX_K = 54
DELTA_ZERO_BITS = 12
HALF = 27
_M27 = np.uint64((1 << 27) - 1)
_M54 = np.uint64((1 << 54) - 1)

# Deterministic Miller-Rabin witnesses; exact for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _check_power_of_two(n: int, name: str = "N") -> int:
    if n < 1 or n & (n - 1):
        raise ParameterError(f"{name} must be a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class PrimeSpec:
    """One RNS prime ``q = 2^k - 2N*bnd + 1`` with its Barrett constants."""

    k: int
    ring_degree: int
    bnd: int
    q: int
    delta: int
    mu: int

    @property
    def log_n(self) -> int:
        return self.ring_degree.bit_length() - 1

    @property
    def delta_prime(self) -> int | None:
        """Upper bits of delta when its low 12 bits are zero, else None."""
        if self.delta % (1 << DELTA_ZERO_BITS):
            return None
        return self.delta >> DELTA_ZERO_BITS

    @property
    def modulus(self) -> int:
        return self.q

    def check(self) -> None:
        """Raise AssertionError if any structural invariant fails."""
        k, two_n = self.k, 2 * self.ring_degree
        assert self.q == (1 << k) - two_n * self.bnd + 1
        assert is_prime(self.q)
        assert self.q % two_n == 1
        assert self.mu == (1 << k) + self.delta - 1
        assert self.mu == (1 << 2 * k) // self.q
        assert self.q * self.mu < 1 << 2 * k < self.q * (self.mu + 1)
        lo, hi = delta_interval(k, self.ring_degree, self.bnd)
        assert lo < self.delta < hi and hi - lo == 1


@dataclass(frozen=True)
class RubatoModulus:
    """Plain prime modulus ``t`` for the symmetric cipher, with a generic Barrett constant.

    ``k`` is the datapath word (28 bits), not the bit length of ``t``.
    """

    t: int
    k: int = 28

    def __post_init__(self):
        if not is_prime(self.t):
            raise ParameterError(f"t={self.t} is not prime")
        if self.t.bit_length() > self.k:
            raise ParameterError(f"t={self.t} does not fit a {self.k}-bit word")

    @property
    def mu(self) -> int:
        # Barrett constant for the bit length of t; the 28-bit word only bounds operand storage
        return (1 << 2 * self.log_t) // self.t

    @property
    def log_t(self) -> int:
        return self.t.bit_length()

    @property
    def modulus(self) -> int:
        return self.t


def delta_interval(k: int, ring_degree: int, bnd: int) -> tuple[Fraction, Fraction]:
    """Exact open interval (delta1, delta2) that contains delta."""
    two_n_bnd = 2 * ring_degree * bnd
    q = (1 << k) - two_n_bnd + 1
    if q <= 0:
        raise ParameterError(f"nonpositive modulus for k={k}, N={ring_degree}, bnd={bnd}")
    d1 = Fraction((two_n_bnd - 1) << k, q)
    d2 = Fraction(two_n_bnd * ((1 << k) - 1) + 1, q)
    return d1, d2


def compute_delta(k: int, ring_degree: int, bnd: int) -> tuple[int, int]:
    """Return ``(delta, mu)`` from the interval bound, without dividing 2^2k by q."""
    d1, d2 = delta_interval(k, ring_degree, bnd)
    delta = d1.numerator // d1.denominator + 1
    if not d1 < delta < d2:
        raise ParameterError(f"no integer delta in ({d1}, {d2})")
    return delta, (1 << k) + delta - 1


def make_prime_spec(k: int, ring_degree: int, bnd: int) -> PrimeSpec:
    _check_power_of_two(ring_degree)
    q = (1 << k) - 2 * ring_degree * bnd + 1
    delta, mu = compute_delta(k, ring_degree, bnd)
    return PrimeSpec(k=k, ring_degree=ring_degree, bnd=bnd, q=q, delta=delta, mu=mu)


def prime_spec_from_q(q: int, ring_degree: int, k: int | None = None) -> PrimeSpec:
    """Recover the (k, bnd) description of an already-known format prime."""
    k = q.bit_length() if k is None else k
    num = (1 << k) + 1 - q
    if num <= 0 or num % (2 * ring_degree):
        raise ParameterError(f"q={q} is not of the form 2^{k} - 2N*bnd + 1 for N={ring_degree}")
    return make_prime_spec(k, ring_degree, num // (2 * ring_degree))


def find_rns_primes(k: int, ring_degree: int, bnd_bits: int) -> list[PrimeSpec]:
    """All format primes with ``bnd`` in ``[1, 2^bnd_bits - 1]``, ascending in bnd."""
    if not 2 <= k <= MAX_K:
        raise ParameterError(f"k must be in [2, {MAX_K}], got {k}")
    _check_power_of_two(ring_degree)
    if not 1 <= bnd_bits <= 10:
        raise ParameterError(f"bnd_bits must be in [1, 10], got {bnd_bits}")
    out = []
    for bnd in range(1, 1 << bnd_bits):
        q = (1 << k) - 2 * ring_degree * bnd + 1
        if q < 3:
            break
        if is_prime(q):
            out.append(make_prime_spec(k, ring_degree, bnd))
    return out


# ---------------------------------------------------------------------------
# reduction


def _check_barrett_range(spec: PrimeSpec) -> None:
    # two final corrections suffice only while q stays within a quarter of 2^k
    if 2 * spec.ring_degree * spec.bnd > 1 << (spec.k - 2):
        raise ParameterError(f"q={spec.q} is too far below 2^{spec.k} for structured Barrett")


def _barrett_quotient(x1: int, spec: PrimeSpec) -> int:
    # (x1 * mu) >> k with mu = 2^k + delta - 1, using the narrow delta' multiply when possible
    dp = spec.delta_prime
    xd = (x1 * dp) << DELTA_ZERO_BITS if dp is not None else x1 * spec.delta
    return x1 + ((xd - x1) >> spec.k)


def _times_q(v: int, spec: PrimeSpec) -> int:
    # v * q = v * 2^k + v - (v * bnd) * 2N
    return (v << spec.k) + v - ((v * spec.bnd) << (spec.log_n + 1))


def barrett_reduce(x: int, mod: PrimeSpec | RubatoModulus) -> int:
    """``x mod q`` for ``0 <= x < 2^(2k)`` with at most two final subtractions."""
    k = mod.k if isinstance(mod, PrimeSpec) else mod.log_t
    if not 0 <= x < 1 << 2 * k:
        raise ContractError(f"x must lie in [0, 2^{2 * k}), got {x}")
    if isinstance(mod, PrimeSpec):
        _check_barrett_range(mod)
        qhat = _barrett_quotient(x >> k, mod)
        r = x - _times_q(qhat, mod)
        m = mod.q
    else:
        qhat = ((x >> (k - 1)) * mod.mu) >> (k + 1)
        m = mod.t
        r = x - qhat * m
    for _ in range(2):
        if r >= m:
            r -= m
    assert 0 <= r < m, "Barrett slack exceeded two corrections"
    return r


def _check_residues(mod, *vals):
    m = mod.modulus
    for v in vals:
        if not 0 <= v < m:
            raise ContractError(f"operand {v} outside [0, {m})")


def mod_add(a: int, b: int, mod) -> int:
    _check_residues(mod, a, b)
    s = a + b
    return s - mod.modulus if s >= mod.modulus else s


def mod_sub(a: int, b: int, mod) -> int:
    _check_residues(mod, a, b)
    return a - b if a >= b else a - b + mod.modulus


def mod_mul(a: int, b: int, mod) -> int:
    _check_residues(mod, a, b)
    if isinstance(mod, PrimeSpec):
        return barrett_reduce(wide_mul_karatsuba(a, b), mod)
    return barrett_reduce(a * b, mod)


class MulCounter:
    """Instrumentation hook: counts half-width partial products."""

    def __init__(self):
        self.partials = 0


def wide_mul_karatsuba(a: int, b: int, counter: MulCounter | None = None) -> int:
    """Exact 54x54-bit product from three 27/28-bit partial products."""
    if not (0 <= a < 1 << MAX_K and 0 <= b < 1 << MAX_K):
        raise ContractError("operands must fit in 54 bits")
    mask = (1 << HALF) - 1
    a1, a0 = a >> HALF, a & mask
    b1, b0 = b >> HALF, b & mask
    z2 = a1 * b1
    z0 = a0 * b0
    z1 = (a0 + a1) * (b0 + b1) - z2 - z0
    if counter is not None:
        counter.partials += 3
    return (z2 << 2 * HALF) + (z1 << HALF) + z0


# ---------------------------------------------------------------------------
# vectorised versions


def wide_mul_array(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Karatsuba product of uint64 arrays (< 2^54) as base-2^54 words ``(hi, lo)``."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    h = np.uint64(HALF)
    a1, a0 = a >> h, a & _M27
    b1, b0 = b >> h, b & _M27
    z2 = a1 * b1
    z0 = a0 * b0
    z1 = (a0 + a1) * (b0 + b1) - z2 - z0
    lo = z0 + ((z1 & _M27) << h)
    hi = z2 + (z1 >> h) + (lo >> np.uint64(54))
    return hi, lo & _M54


def barrett_reduce_array(hi: np.ndarray, lo: np.ndarray, spec: PrimeSpec) -> np.ndarray:
    """Vectorised structured Barrett of ``hi * 2^54 + lo`` modulo a format prime."""
    k = spec.k
    _check_barrett_range(spec)
    if spec.delta >= 1 << 27:
        raise ParameterError("vectorised path needs delta < 2^27")
    hi = np.asarray(hi, dtype=np.uint64)
    lo = np.asarray(lo, dtype=np.uint64)
    uk = np.uint64(k)
    up = np.uint64(MAX_K - k)
    x1 = (hi << up) + (lo >> uk)
    # x1 * delta as two base-2^54 words, then subtract x1 and shift by k
    d = np.uint64(spec.delta)
    ph = (x1 >> np.uint64(HALF)) * d
    pl = (x1 & _M27) * d
    p_lo = pl + ((ph & _M27) << np.uint64(HALF))
    p_hi = (ph >> np.uint64(HALF)) + (p_lo >> np.uint64(54))
    p_lo &= _M54
    borrow = p_lo < x1
    p_lo = np.where(borrow, p_lo + np.uint64(1 << 54) - x1, p_lo - x1)
    p_hi = p_hi - borrow.astype(np.uint64)
    qhat = x1 + (p_hi << up) + (p_lo >> uk)
    # r = x - qhat*q fits in 64 bits, so wrap-around arithmetic is exact
    x_low = (hi << np.uint64(54)) + lo
    qq = (qhat << uk) + qhat - ((qhat * np.uint64(spec.bnd)) << np.uint64(spec.log_n + 1))
    r = x_low - qq
    q = np.uint64(spec.q)
    r = np.where(r >= q, r - q, r)
    r = np.where(r >= q, r - q, r)
    return r


def _rubato_reduce_array(x: np.ndarray, mod: RubatoModulus) -> np.ndarray:
    k = mod.log_t
    qhat = ((x >> np.uint64(k - 1)) * np.uint64(mod.mu)) >> np.uint64(k + 1)
    r = x - qhat * np.uint64(mod.t)
    t = np.uint64(mod.t)
    r = np.where(r >= t, r - t, r)
    return np.where(r >= t, r - t, r)


def vec_mul(a: np.ndarray, b: np.ndarray, mod) -> np.ndarray:
    if isinstance(mod, PrimeSpec):
        return barrett_reduce_array(*wide_mul_array(a, b), mod)
    x = np.asarray(a, dtype=np.uint64) * np.asarray(b, dtype=np.uint64)
    return _rubato_reduce_array(x, mod)


def vec_add(a: np.ndarray, b: np.ndarray, mod) -> np.ndarray:
    m = np.uint64(mod.modulus)
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= m, s - m, s)


def vec_sub(a: np.ndarray, b: np.ndarray, mod) -> np.ndarray:
    m = np.uint64(mod.modulus)
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return np.where(a >= b, a - b, a + (m - b))


def to_residues(values, mod) -> np.ndarray:
    """Map signed integers into ``[0, modulus)``."""
    v = np.asarray(values, dtype=np.int64)
    return np.mod(v, np.int64(mod.modulus)).astype(np.uint64)


def center(residues: np.ndarray, mod) -> np.ndarray:
    """Map residues to the signed range ``(-m/2, m/2]``."""
    m = mod.modulus
    r = np.asarray(residues, dtype=np.uint64).astype(np.int64)
    return np.where(r > m // 2, r - np.int64(m), r)
