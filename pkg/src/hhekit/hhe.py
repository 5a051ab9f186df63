"""Dual-mode session logic: CKKS vs Rubato SE for the m-to-ct direction.

The ct-to-m direction is always CKKS; only the upload path switches.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import ckks, rubato
from .calibration import load_calibration
from .errors import ContractError, StateError

REPORT_LENGTHS = (12, 32, 60, 512, 4096)


class Mode(str, enum.Enum):
    CKKS = "CKKS"
    RUBATO_SE = "RUBATO_SE"


@dataclass(frozen=True)
class ModePolicy:
    length_threshold: int = 1000
    slow_buses: tuple[str, ...] = ("1x64",)


@dataclass
class SessionConfig:
    message_length: int
    mode: str = "auto"
    bus: str = "2x256"
    cloud_load: str = "low"
    preset: str = "128L"
    se_scale_bits: int = 16
    policy: ModePolicy = field(default_factory=ModePolicy)

    def __post_init__(self):
        if self.message_length < 1:
            raise ContractError("message length must be positive")
        if self.cloud_load not in ("low", "high"):
            raise ContractError(f"cloud_load must be low or high, got {self.cloud_load!r}")
        if self.mode not in ("auto", "ckks", "rubato"):
            raise ContractError(f"mode must be auto, ckks or rubato, got {self.mode!r}")


def select_mode(cfg: SessionConfig) -> Mode:
    if cfg.mode == "ckks":
        return Mode.CKKS
    if cfg.mode == "rubato":
        return Mode.RUBATO_SE
    short = cfg.message_length < cfg.policy.length_threshold
    if (short and cfg.cloud_load == "low") or cfg.bus in cfg.policy.slow_buses:
        return Mode.RUBATO_SE
    return Mode.CKKS


def segment_count(length: int, params: rubato.RubatoParams) -> int:
    return -(-length // params.l)


def segment_nonce(base: bytes, index: int) -> bytes:
    """First 8 bytes of the base nonce followed by the little-endian segment index."""
    if len(base) < 8:
        raise ContractError("base nonce needs at least 8 bytes")
    return bytes(base[:8]) + int(index).to_bytes(8, "little")


@dataclass
class HheKeys:
    ckks: ckks.KeyMaterial | None = None
    rubato_key: np.ndarray | None = None


@dataclass
class HheCiphertext:
    mode: Mode
    ckks_ct: ckks.Ciphertext | None = None
    segments: list[rubato.SeCiphertext] = field(default_factory=list)
    length: int = 0


def hhe_encrypt(m, cfg: SessionConfig, keys: HheKeys, nonce: bytes,
                encoding: ckks.EncodingParams | None = None) -> HheCiphertext:
    mode = select_mode(cfg)
    m = np.asarray(m)
    if m.size != cfg.message_length:
        raise ContractError(f"message has {m.size} values, config says {cfg.message_length}")
    if mode is Mode.CKKS:
        if keys.ckks is None or encoding is None:
            raise StateError("CKKS mode needs key material and encoding parameters")
        ct = ckks.encrypt_message(m, encoding, keys.ckks, nonce)
        return HheCiphertext(mode, ckks_ct=ct, length=m.size)
    if keys.rubato_key is None:
        raise StateError("Rubato mode needs a symmetric key")
    if np.iscomplexobj(m) and np.any(np.imag(m)):
        raise ContractError("Rubato SE encrypts real values only")
    p = rubato.get_params(cfg.preset)
    real = np.real(m).astype(np.float64)
    segs = []
    for s in range(segment_count(m.size, p)):
        chunk = real[s * p.l:(s + 1) * p.l]
        segs.append(rubato.se_encrypt(chunk, keys.rubato_key, segment_nonce(nonce, s), p, cfg.se_scale_bits))
    return HheCiphertext(mode, segments=segs, length=m.size)


def hhe_decrypt_segments(ct: HheCiphertext, key) -> np.ndarray:
    """Symmetric decryption of all SE segments (host-side check; the cloud would transcipher)."""
    if ct.mode is not Mode.RUBATO_SE:
        raise StateError("not an SE ciphertext")
    parts = [rubato.se_decrypt(s, key, rubato.get_params(s.preset)) for s in ct.segments]
    return np.concatenate(parts) if parts else np.empty(0)


# ---------------------------------------------------------------------------
# crossover report


@dataclass(frozen=True)
class CrossoverRow:
    length: int
    bus: str
    preset: str
    segments: int
    ckks_compute: float
    rubato_compute: float
    ckks_end_to_end: float
    rubato_end_to_end: float

    @property
    def compute_speedup(self) -> float:
        return self.ckks_compute / self.rubato_compute

    @property
    def end_to_end_speedup(self) -> float:
        return self.ckks_end_to_end / self.rubato_end_to_end

    def as_row(self) -> dict:
        return {
            "length": self.length, "bus": self.bus, "preset": self.preset, "segments": self.segments,
            "ckks_compute": round(self.ckks_compute), "rubato_compute": round(self.rubato_compute),
            "compute_speedup": round(self.compute_speedup, 3),
            "ckks_end_to_end": round(self.ckks_end_to_end), "rubato_end_to_end": round(self.rubato_end_to_end),
            "end_to_end_speedup": round(self.end_to_end_speedup, 3),
        }


def simulated_latencies(bus: str = "1x64", calibration: dict | None = None) -> dict:
    """Cycle counts from the accelerator model: CKKS m-to-ct and one block per Rubato preset."""
    from .accelsim import programs, simulate

    out = {"ckks": simulate(programs.ckks_m_to_ct(), bus=bus, calibration=calibration).total_cycles}
    for name in rubato.PRESETS:
        out[name] = simulate(programs.rubato_block(name), bus=bus, calibration=calibration).total_cycles
    return out


def crossover_report(latencies: dict | None = None, lengths=REPORT_LENGTHS,
                     buses=("1x64", "2x256"), calibration: dict | None = None) -> list[CrossoverRow]:
    """Rubato-vs-CKKS speedups for pure compute and for compute plus bus transfer.

    CKKS cost is flat in the message length (one batch); Rubato pays one
    keystream block per segment and uses whichever preset is cheapest.
    """
    cal = calibration or load_calibration()
    latencies = latencies if latencies is not None else simulated_latencies(calibration=cal)
    need = ["ckks", *rubato.PRESETS]
    missing = [k for k in need if k not in latencies]
    if missing:
        raise StateError(f"missing latency inputs: {', '.join(missing)}")
    rows = []
    for bus in buses:
        trip = cal["bus"][bus]["load"] + cal["bus"][bus]["store"]
        ckks_polys = cal["compute"]["m_to_ct_to_cloud"]["polys"]
        for length in lengths:
            best = min(rubato.PRESETS.values(),
                       key=lambda p: (segment_count(length, p) * latencies[p.preset], p.preset))
            segs = segment_count(length, best)
            r_compute = segs * latencies[best.preset]
            r_words = segs * best.l
            c_compute = latencies["ckks"]
            rows.append(CrossoverRow(
                length, bus, best.preset, segs, c_compute, r_compute,
                c_compute + ckks_polys * trip, r_compute + math.ceil(r_words * trip / 8192)))
    return rows
