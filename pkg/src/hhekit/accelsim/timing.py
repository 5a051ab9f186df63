"""Closed-form task durations for each functional unit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..calibration import load_calibration
from ..errors import ParameterError, SimulationError
from ..rubato import RubatoParams, get_params
from .isa import Instruction
from .mixsched import feistel_cycles, mix_cycles


@dataclass
class ConfigState:
    """Parameter registers written by CONFIG instructions."""

    moduli: dict = field(default_factory=dict)  # basis index -> (q, log_n)
    rubato: RubatoParams | None = None
    header_bytes: int = 8
    segment_words: int = 512

    def apply(self, ins: Instruction) -> None:
        a = ins.args
        if ins.opcode == "SET_MOD":
            self.moduli[a["index"]] = (a["q"], a["log_n"] if a["log_n"] is not None else 13)
        elif ins.opcode == "SET_RUBATO":
            try:
                self.rubato = get_params(a["preset"])
            except ParameterError as exc:
                raise SimulationError(f"line {ins.line}: {exc}") from None
        elif ins.opcode == "SET_PKT":
            self.header_bytes, self.segment_words = a["header_bytes"], a["segment_words"]

    def ring_degree(self, basis: int, line: int = 0) -> int:
        if basis not in self.moduli:
            raise SimulationError(f"line {line}: basis {basis} used before SET_MOD")
        return 1 << self.moduli[basis][1]

    def require_rubato(self, line: int) -> RubatoParams:
        if self.rubato is None:
            raise SimulationError(f"line {line}: cipher op before SET_RUBATO")
        return self.rubato


class TimingModel:
    def __init__(self, calibration: dict | None = None, bus: str = "1x64"):
        cal = calibration or load_calibration()
        self.acc = cal["accel"]
        if bus not in cal["bus"]:
            raise ParameterError(f"unknown bus config {bus!r}")
        self.bus = bus
        self.bus_load = cal["bus"][bus]["load"]
        self.bus_store = cal["bus"][bus]["store"]

    def _lanes(self) -> int:
        return self.acc["bfu_count"] * self.acc["lanes_per_bfu"]

    def duration(self, ins: Instruction, cfg: ConfigState) -> int:
        a, acc = ins.args, self.acc
        op = ins.opcode
        if op in ("DMA_LOAD", "DMA_STORE"):
            per_poly = self.bus_load if op == "DMA_LOAD" else self.bus_store
            core = math.ceil(a["words"] * per_poly / 8192)
        elif op == "SAMPLE":
            core = self._sample(ins, cfg)
        elif op in ("NTT", "INTT"):
            n = cfg.ring_degree(a["basis"], ins.line)
            core = (n // self._lanes() + acc["ntt_pipeline_depth"]) * int(math.log2(n))
        elif op in ("FFT", "IFFT"):
            length = 1 << max(a["slots"] - 1, 0).bit_length()
            stages = int(math.log2(length)) if length > 1 else 0
            # per-stage butterflies plus one pass for the twist / slot permutation
            core = math.ceil(length / self._lanes()) * (stages + 1) + acc["fft_pipeline_depth"]
        elif op in ("PWMUL", "PWADD") or (op == "MAC" and ins.mode == "PW"):
            n = cfg.ring_degree(a["basis"], ins.line)
            core = n // (self._lanes() // 2) + acc["reduction_stages"] + acc["multiplier_stages"]
        elif op == "MAC":
            core = self._cipher_mac(ins, cfg)
        elif op == "MOVE":
            core = math.ceil(a["words"] / acc["dtu_words_per_cycle"])
        elif op in ("SEND", "RECV"):
            packets = -(-a["words"] // cfg.segment_words) if a["words"] else 0
            flits = a["words"] + packets * math.ceil(cfg.header_bytes / 8)
            core = math.ceil(flits / acc["niu_words_per_cycle"])
        else:
            raise SimulationError(f"line {ins.line}: no timing for {op}")
        return int(core) + acc["task_overhead"]

    def _sample(self, ins: Instruction, cfg: ConfigState) -> int:
        a, acc = ins.args, self.acc
        words, dist = a["words"], a["dist"]
        lanes = acc["rsu_lanes"]
        if dist == "UNIFORM":
            # rejection against the first configured prime
            q = cfg.moduli[min(cfg.moduli)][0] if cfg.moduli else None
            retry = (1 << q.bit_length()) / q if q else 1.0
            return acc["rsu_warmup"] + math.ceil(words * retry / lanes)
        if dist == "XOF":
            p = cfg.require_rubato(ins.line)
            retry = (1 << p.log_t) / (p.t.t - 1)
            xof = math.ceil(words * retry * p.log_t / 8 / acc["xof_bytes_per_cycle"])
            return acc["rsu_warmup"] + max(math.ceil(words * retry / lanes), xof)
        return acc["rsu_warmup"] + math.ceil(words / lanes)

    def _cipher_mac(self, ins: Instruction, cfg: ConfigState) -> int:
        p = cfg.require_rubato(ins.line)
        acc = self.acc
        depth = acc["mac_pipeline_depth"]
        if ins.mode == "ARK":
            return math.ceil(p.n / self._lanes()) + depth
        if ins.mode == "FEISTEL":
            return feistel_cycles(p.n, acc["lanes_per_bfu"], depth)
        return mix_cycles(p.v, acc["bfu_count"], depth)
