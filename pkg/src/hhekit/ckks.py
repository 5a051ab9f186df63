"""Edge-side RNS-CKKS: encode/encrypt (m-to-ct) and decrypt/decode (ct-to-m).

Encoding packs ``L_m`` complex slots into one real polynomial through the
fixed-point IFFT, then lifts the 26-fraction-bit result to ``2^scale_bits``
and resizes it into every RNS prime.  Encryption runs per prime in the NTT
domain; decryption only touches the first prime.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContractError, ParameterError, StateError
from .field import PrimeSpec, center, find_rns_primes, to_residues, vec_mul
from .sampling import GAUSS_SIGMA, Xof, gaussian, ternary, uniform_words
from .transforms import (
    COEFF, FRAC_BITS, NTT, FixedVector, Polynomial, fft, fixed_cmul, ifft, intt, ntt,
    pointwise_add, pointwise_mac, round_shift,
)

ETA = 26
DEFAULT_SCALE_BITS = 40


@dataclass(frozen=True)
class RnsBasis:
    primes: tuple[PrimeSpec, ...]
    eta: int = ETA

    def __post_init__(self):
        qs = [p.q for p in self.primes]
        if not qs:
            raise ParameterError("empty RNS basis")
        if len(set(qs)) != len(qs):
            raise ParameterError("RNS primes must be distinct")
        if len({p.ring_degree for p in self.primes}) != 1:
            raise ParameterError("all primes must share the ring degree")

    @property
    def level_count(self) -> int:
        return len(self.primes) - 1

    @property
    def ring_degree(self) -> int:
        return self.primes[0].ring_degree

    @property
    def base_scale(self) -> int:
        return 1 << self.primes[0].k

    def within_eta(self) -> bool:
        """True when every ``q_base / q_l`` lies in ``(1 - 2^-eta, 1 + 2^-eta)``."""
        tol = 2.0 ** -self.eta
        return all(abs(self.base_scale / p.q - 1.0) < tol for p in self.primes[1:])


def default_basis(ring_degree: int = 8192, count: int = 3, k: int = 54, bnd_bits: int = 10) -> RnsBasis:
    primes = find_rns_primes(k, ring_degree, bnd_bits)
    if len(primes) < count:
        raise ParameterError(f"only {len(primes)} format primes available, need {count}")
    return RnsBasis(tuple(primes[:count]))


@dataclass(frozen=True)
class EncodingParams:
    basis: RnsBasis
    slots: int
    scale_bits: int = DEFAULT_SCALE_BITS

    def __post_init__(self):
        n = self.basis.ring_degree
        if not 1 <= self.slots <= n // 2:
            raise ParameterError(f"slot count must be in [1, {n // 2}], got {self.slots}")
        if not FRAC_BITS <= self.scale_bits <= self.basis.primes[0].k - 6:
            raise ParameterError(f"scale_bits {self.scale_bits} out of range")

    @property
    def ring_degree(self) -> int:
        return self.basis.ring_degree

    @property
    def packed_slots(self) -> int:
        """Slot count rounded up to a power of two (the FFT length)."""
        return 1 << (self.slots - 1).bit_length()

    @property
    def scale(self) -> int:
        return 1 << self.scale_bits


@dataclass
class Plaintext:
    polys: list[Polynomial]
    slots: int
    scale_bits: int


@dataclass
class KeyMaterial:
    sk: list[Polynomial]
    pk0: list[Polynomial]
    pk1: list[Polynomial]
    seed: bytes
    sk_coeffs: np.ndarray = field(repr=False, default=None)


@dataclass
class Ciphertext:
    ct0: list[Polynomial]
    ct1: list[Polynomial]
    level: int

    @property
    def domain(self) -> str:
        return self.ct0[0].domain

    @property
    def moduli(self) -> list[int]:
        return [p.modulus.q for p in self.ct0]


@dataclass
class EncryptionNoise:
    """Small integer polynomials drawn once and shared by every RNS prime."""

    v: np.ndarray
    e0: np.ndarray
    e1: np.ndarray

    @classmethod
    def sample(cls, seed: bytes, ring_degree: int, sigma: float = GAUSS_SIGMA) -> "EncryptionNoise":
        return cls(
            ternary(Xof(seed, b"enc/v"), ring_degree),
            gaussian(Xof(seed, b"enc/e0"), ring_degree, sigma),
            gaussian(Xof(seed, b"enc/e1"), ring_degree, sigma),
        )

    @classmethod
    def zeros(cls, ring_degree: int) -> "EncryptionNoise":
        z = np.zeros(ring_degree, dtype=np.int64)
        return cls(z, z.copy(), z.copy())


# ---------------------------------------------------------------------------
# encoding


@lru_cache(maxsize=16)
def slot_permutation(n: int) -> np.ndarray:
    """DFT bin holding slot j: ``((5^j mod 4n) - 1) / 4``."""
    out = np.empty(n, dtype=np.int64)
    g = 1
    for j in range(n):
        out[j] = (g - 1) // 4 % n
        g = g * 5 % (4 * n)
    return out


@lru_cache(maxsize=16)
def _twist(n: int) -> tuple[np.ndarray, np.ndarray]:
    z = np.exp(2j * np.pi * np.arange(n) / (4 * n))
    s = float(1 << FRAC_BITS)
    return np.rint(z.real * s).astype(np.int64), np.rint(z.imag * s).astype(np.int64)


def embed_inverse(values, n: int) -> FixedVector:
    """Slots -> packed coefficients ``u`` (fixed point, length n)."""
    m = np.zeros(n, dtype=np.complex128)
    m[: len(values)] = values
    bins = np.zeros(n, dtype=np.complex128)
    bins[slot_permutation(n)] = m
    y = ifft(FixedVector.from_complex(bins).conj()).conj()
    tr, ti = _twist(n)
    ur, ui = fixed_cmul(y.re, y.im, tr, -ti)
    return FixedVector(ur, ui)


def embed(u: FixedVector, slots: int) -> np.ndarray:
    """Packed coefficients -> slot values."""
    n = len(u)
    tr, ti = _twist(n)
    wr, wi = fixed_cmul(u.re, u.im, tr, ti)
    spectrum = fft(FixedVector(wr, wi).conj()).conj()
    return spectrum.to_complex()[slot_permutation(n)][:slots]


def encode_coefficients(m, params: EncodingParams) -> np.ndarray:
    """Signed integer coefficients of the plaintext polynomial (before resizing)."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 1 or m.size != params.slots:
        raise ContractError(f"message must have {params.slots} slots, got shape {m.shape}")
    n = params.packed_slots
    u = embed_inverse(m, n)
    big_n = params.ring_degree
    gap = big_n // (2 * n)
    shift = params.scale_bits - FRAC_BITS
    coeffs = np.zeros(big_n, dtype=np.int64)
    coeffs[0: big_n // 2: gap] = u.re << shift
    coeffs[big_n // 2:: gap] = u.im << shift
    return coeffs


def encode(m, params: EncodingParams) -> Plaintext:
    coeffs = encode_coefficients(m, params)
    polys = [Polynomial(to_residues(coeffs, p), p, COEFF, i) for i, p in enumerate(params.basis.primes)]
    return Plaintext(polys, params.slots, params.scale_bits)


def decode_coefficients(coeffs: np.ndarray, params: EncodingParams) -> np.ndarray:
    n = params.packed_slots
    big_n = params.ring_degree
    gap = big_n // (2 * n)
    shift = params.scale_bits - FRAC_BITS
    coeffs = np.asarray(coeffs, dtype=np.int64)
    u = FixedVector(round_shift(coeffs[0: big_n // 2: gap], shift), round_shift(coeffs[big_n // 2:: gap], shift))
    return embed(u, params.slots)


def decode(pt: Plaintext, params: EncodingParams) -> np.ndarray:
    p0 = pt.polys[0]
    if p0.domain != COEFF:
        raise StateError("decode expects a coefficient-domain plaintext")
    return decode_coefficients(center(p0.coeffs, p0.modulus), params)


# ---------------------------------------------------------------------------
# keys and encryption


def _lift(small: np.ndarray, spec: PrimeSpec, index: int) -> Polynomial:
    return ntt(Polynomial(to_residues(small, spec), spec, COEFF, index))


def keygen(seed: bytes, basis: RnsBasis, sigma: float = GAUSS_SIGMA) -> KeyMaterial:
    if not seed:
        raise ContractError("seed must be nonempty")
    n = basis.ring_degree
    s = ternary(Xof(seed, b"key/sk"), n)
    e = gaussian(Xof(seed, b"key/epk"), n, sigma)
    sk, pk0, pk1 = [], [], []
    for i, spec in enumerate(basis.primes):
        s_hat = _lift(s, spec, i)
        a_hat = Polynomial(uniform_words(Xof(seed, b"key/pk1/%d" % i), n, spec.q), spec, NTT, i)
        e_hat = _lift(e, spec, i)
        # pk0 = e - a*s
        neg_as = Polynomial(vec_mul(a_hat.coeffs, s_hat.coeffs, spec), spec, NTT, i)
        neg_as.coeffs = np.where(neg_as.coeffs == 0, neg_as.coeffs, np.uint64(spec.q) - neg_as.coeffs)
        sk.append(s_hat)
        pk1.append(a_hat)
        pk0.append(pointwise_add(neg_as, e_hat))
    return KeyMaterial(sk, pk0, pk1, bytes(seed), sk_coeffs=s)


def encrypt(pt: Plaintext, keys: KeyMaterial, noise: EncryptionNoise) -> Ciphertext:
    if len(pt.polys) != len(keys.pk0):
        raise StateError("plaintext and public key cover different RNS bases")
    ct0, ct1 = [], []
    for i, p in enumerate(pt.polys):
        if p.domain != COEFF:
            raise StateError("encrypt expects a coefficient-domain plaintext")
        spec = p.modulus
        v = _lift(noise.v, spec, i)
        e0 = _lift(noise.e0, spec, i)
        e1 = _lift(noise.e1, spec, i)
        m = ntt(p)
        ct0.append(pointwise_add(pointwise_mac(v, keys.pk0[i], e0), m))
        ct1.append(pointwise_mac(v, keys.pk1[i], e1))
    return Ciphertext(ct0, ct1, level=len(ct0) - 1)


def decrypt(ct: Ciphertext, keys: KeyMaterial) -> Plaintext:
    """Plaintext over the first prime only, back in the coefficient domain."""
    if not ct.ct0:
        raise StateError("ciphertext has no basis 0 component")
    c0, c1 = ct.ct0[0], ct.ct1[0]
    if c0.domain != NTT or c1.domain != NTT:
        raise StateError("decrypt expects NTT-domain ciphertext components")
    if c0.modulus != keys.sk[0].modulus:
        raise StateError("ciphertext basis 0 does not match the secret key")
    pt = intt(pointwise_mac(c1, keys.sk[0], c0))
    return Plaintext([pt], slots=0, scale_bits=0)


def add_ciphertexts(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    return Ciphertext([pointwise_add(x, y) for x, y in zip(a.ct0, b.ct0)],
                      [pointwise_add(x, y) for x, y in zip(a.ct1, b.ct1)], min(a.level, b.level))


def encrypt_message(m, params: EncodingParams, keys: KeyMaterial, seed: bytes) -> Ciphertext:
    pt = encode(m, params)
    return encrypt(pt, keys, EncryptionNoise.sample(seed, params.ring_degree))


def decrypt_message(ct: Ciphertext, params: EncodingParams, keys: KeyMaterial) -> np.ndarray:
    return decode(decrypt(ct, keys), params)


def noise_std(ring_degree: int, sigma: float = GAUSS_SIGMA) -> float:
    """Standard deviation of one fresh-ciphertext noise coefficient.

    Noise is ``v*e + e1*s + e0`` with v and s ternary of density 1/2.
    """
    return sigma * np.sqrt(ring_degree * 0.5 + ring_degree * 0.5 + 1)
