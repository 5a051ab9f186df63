"""Rubato stream cipher over Z_t.

Block layout: the state is a v x v matrix of words (row-major, n = v^2).
One keystream block is

    ARK(rc_0)
    (r - 1) x [Feistel, MixRows, MixColumns, ARK(rc_i)]
    Fin = MixRows, MixColumns, Feistel, MixRows, MixColumns, ARK(rc_r), truncate to l

so a block costs r Feistel layers, r + 1 linear layers and r + 1 ARKs.
Round constants come from SHAKE-128 over ``nonce || counter`` by rejection
sampling of ceil(log t)-bit little-endian chunks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FixedPointOverflow, ParameterError
from .field import RubatoModulus, vec_add, vec_mul
from .sampling import GAUSS_SIGMA, Xof, gaussian, uniform_words

NONCE_BYTES = 16

# first rows of the circulant mixing matrices, indexed by v
_MIX_ROWS = {
    4: (2, 3, 1, 1),
    6: (4, 2, 4, 3, 1, 1),
    8: (5, 3, 4, 3, 6, 2, 1, 1),
}


@dataclass(frozen=True)
class RubatoParams:
    preset: str
    v: int
    l: int
    r: int
    t: RubatoModulus
    lam: int = 128
    noise_sigma: float = GAUSS_SIGMA

    @property
    def n(self) -> int:
        return self.v * self.v

    @property
    def log_t(self) -> int:
        return self.t.log_t

    @property
    def ciphertext_bits(self) -> int:
        return self.l * self.log_t


PRESETS = {
    "128S": RubatoParams("128S", v=4, l=12, r=5, t=RubatoModulus(0x3EE0001)),
    "128M": RubatoParams("128M", v=6, l=32, r=3, t=RubatoModulus(0x1FC0001)),
    "128L": RubatoParams("128L", v=8, l=60, r=2, t=RubatoModulus(0x1FC0001)),
}


def get_params(preset: str) -> RubatoParams:
    key = preset.upper().removeprefix("PAR-")
    if key not in PRESETS:
        raise ParameterError(f"unknown Rubato preset {preset!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key]


@dataclass(frozen=True)
class MixMatrix:
    m0: tuple[int, ...]

    @classmethod
    def for_size(cls, v: int) -> "MixMatrix":
        row = _MIX_ROWS[v]
        return cls(tuple(row[(-i) % v] for i in range(v)))

    @property
    def v(self) -> int:
        return len(self.m0)

    def dense(self) -> np.ndarray:
        v = self.v
        i, j = np.indices((v, v))
        return np.asarray(self.m0, dtype=np.uint64)[(i - j) % v]


@dataclass
class OpCounts:
    squarings: int = 0
    ark_muls: int = 0
    mix_macs: int = 0
    xof_bytes: int = 0


@dataclass
class RubatoState:
    words: np.ndarray
    v: int

    def __post_init__(self):
        self.words = np.asarray(self.words, dtype=np.uint64)
        if self.words.shape != (self.v * self.v,):
            raise ContractError(f"state must have {self.v * self.v} words")

    def matrix(self) -> np.ndarray:
        return self.words.reshape(self.v, self.v)


@dataclass
class RoundConstants:
    rc: np.ndarray  # shape (r + 1, n)
    consumed: int = 0


# ---------------------------------------------------------------------------
# layers


def _check_len(*arrays, n):
    for a in arrays:
        if len(a) != n:
            raise ContractError(f"expected length {n}, got {len(a)}")


def ark(state, key, rc, t: RubatoModulus, counts: OpCounts | None = None) -> np.ndarray:
    """``x + k * rc`` elementwise."""
    state, key, rc = (np.asarray(a, dtype=np.uint64) for a in (state, key, rc))
    _check_len(key, rc, n=len(state))
    if counts is not None:
        counts.ark_muls += len(state)
    return vec_add(state, vec_mul(key, rc, t), t)


def feistel(state, t: RubatoModulus, counts: OpCounts | None = None) -> np.ndarray:
    """``y_0 = x_0``, ``y_i = x_i + x_{i-1}^2`` using the input words throughout."""
    x = np.asarray(state, dtype=np.uint64)
    y = x.copy()
    if x.size > 1:
        y[1:] = vec_add(x[1:], vec_mul(x[:-1], x[:-1], t), t)
    if counts is not None:
        counts.squarings += max(x.size - 1, 0)
    return y


def _matmul_mod(a: np.ndarray, b: np.ndarray, t: RubatoModulus) -> np.ndarray:
    # products < 2^26 * 2^3 and at most 8 terms, so the sum stays well inside 64 bits
    return (a.astype(np.uint64) @ b.astype(np.uint64)) % np.uint64(t.t)


def mix_columns(state, mix: MixMatrix, t: RubatoModulus, counts: OpCounts | None = None) -> np.ndarray:
    v = mix.v
    s = np.asarray(state, dtype=np.uint64).reshape(v, v)
    if counts is not None:
        counts.mix_macs += v * v * v
    return _matmul_mod(mix.dense(), s, t).reshape(-1)


def mix_rows(state, mix: MixMatrix, t: RubatoModulus, counts: OpCounts | None = None) -> np.ndarray:
    v = mix.v
    s = np.asarray(state, dtype=np.uint64).reshape(v, v)
    if counts is not None:
        counts.mix_macs += v * v * v
    return _matmul_mod(s, mix.dense().T, t).reshape(-1)


def linear_layer(state, mix: MixMatrix, t: RubatoModulus, counts: OpCounts | None = None) -> np.ndarray:
    return mix_columns(mix_rows(state, mix, t, counts), mix, t, counts)


# ---------------------------------------------------------------------------
# round constants and keystream


def xof_input(nonce: bytes, counter: int) -> bytes:
    if len(nonce) != NONCE_BYTES:
        raise ContractError(f"nonce must be {NONCE_BYTES} bytes, got {len(nonce)}")
    return bytes(nonce) + int(counter).to_bytes(8, "little")


def derive_round_constants(nonce: bytes, params: RubatoParams, counter: int = 0) -> RoundConstants:
    xof = Xof(xof_input(nonce, counter))
    words = uniform_words(xof, (params.r + 1) * params.n, params.t.t, bits=params.log_t, nonzero=True)
    return RoundConstants(words.reshape(params.r + 1, params.n), consumed=xof.consumed)


def _check_key(key, params: RubatoParams) -> np.ndarray:
    key = np.asarray(key, dtype=np.int64)
    if key.shape != (params.n,):
        raise ContractError(f"key must have {params.n} words, got shape {key.shape}")
    if key.min(initial=0) < 0 or key.max(initial=0) >= params.t.t:
        raise ContractError("key words must lie in [0, t)")
    return key.astype(np.uint64)


def keystream_block(key, nonce: bytes, params: RubatoParams, counter: int = 0,
                    noise: bool = False, counts: OpCounts | None = None,
                    rc: RoundConstants | None = None) -> np.ndarray:
    """One block of ``l`` keystream words."""
    key = _check_key(key, params)
    rc = rc or derive_round_constants(nonce, params, counter)
    if counts is not None:
        counts.xof_bytes += rc.consumed
    t, mix = params.t, MixMatrix.for_size(params.v)
    x = np.arange(1, params.n + 1, dtype=np.uint64) % np.uint64(t.t)
    x = ark(x, key, rc.rc[0], t, counts)
    for i in range(1, params.r):
        x = feistel(x, t, counts)
        x = linear_layer(x, mix, t, counts)
        x = ark(x, key, rc.rc[i], t, counts)
    x = linear_layer(x, mix, t, counts)
    x = feistel(x, t, counts)
    x = linear_layer(x, mix, t, counts)
    x = ark(x, key, rc.rc[params.r], t, counts)
    out = x[: params.l]
    if noise:
        e = gaussian(Xof(xof_input(nonce, counter), b"noise"), params.l, params.noise_sigma)
        out = ((out.astype(np.int64) + e) % t.t).astype(np.uint64)
    return out


def keystream(key, nonce: bytes, params: RubatoParams, count: int | None = None,
              start_counter: int = 0, noise: bool = False,
              counts: OpCounts | None = None) -> np.ndarray:
    """``count`` words (default one block) from consecutive block counters."""
    count = params.l if count is None else count
    blocks = []
    ctr = start_counter
    while sum(b.size for b in blocks) < count:
        blocks.append(keystream_block(key, nonce, params, ctr, noise=noise, counts=counts))
        ctr += 1
    return np.concatenate(blocks)[:count] if blocks else np.empty(0, dtype=np.uint64)


def derive_key(seed: bytes, params: RubatoParams) -> np.ndarray:
    return uniform_words(Xof(seed, b"rubato/key"), params.n, params.t.t, bits=params.log_t)


# ---------------------------------------------------------------------------
# symmetric encryption of real vectors


@dataclass
class SeCiphertext:
    words: np.ndarray
    preset: str
    nonce: bytes
    counter: int
    scale_bits: int
    length: int = field(default=0)

    def __post_init__(self):
        self.words = np.asarray(self.words, dtype=np.uint64)
        if not self.length:
            self.length = int(self.words.size)


def encode_t(m, scale_bits: int, t: RubatoModulus) -> np.ndarray:
    z = np.rint(np.asarray(m, dtype=np.float64) * float(1 << scale_bits)).astype(np.int64)
    bad = np.abs(z) >= t.t // 2
    if bad.any():
        i = int(np.argmax(bad))
        raise FixedPointOverflow(0, float(abs(np.asarray(m)[i])))
    return np.mod(z, t.t).astype(np.uint64)


def decode_t(words, scale_bits: int, t: RubatoModulus) -> np.ndarray:
    w = np.asarray(words, dtype=np.int64)
    w = np.where(w > t.t // 2, w - t.t, w)
    return w / float(1 << scale_bits)


def se_encrypt(m, key, nonce: bytes, params: RubatoParams, scale_bits: int = 16,
               counter: int = 0, keystream_words=None) -> SeCiphertext:
    """Encrypt up to ``l`` reals with one keystream block."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 1 or m.size > params.l:
        raise ContractError(f"at most {params.l} values per block, got shape {m.shape}")
    ks = keystream_block(key, nonce, params, counter) if keystream_words is None else keystream_words
    ks = np.asarray(ks, dtype=np.uint64)[: m.size]
    c = vec_add(encode_t(m, scale_bits, params.t), ks, params.t)
    return SeCiphertext(c, params.preset, bytes(nonce), counter, scale_bits, m.size)


def se_decrypt(ct: SeCiphertext, key, params: RubatoParams, keystream_words=None) -> np.ndarray:
    if ct.preset != params.preset:
        raise ContractError(f"ciphertext preset {ct.preset} does not match {params.preset}")
    ks = keystream_block(key, ct.nonce, params, ct.counter) if keystream_words is None else keystream_words
    ks = np.asarray(ks, dtype=np.uint64)[: ct.length]
    w = ct.words.astype(np.int64) - ks.astype(np.int64)
    return decode_t(np.mod(w, params.t.t), ct.scale_bits, params.t)
