"""Functional execution of simulator tasks on real data.

Each task runs through the same library calls a direct user would make,
at the moment the scheduler dispatches it.  Buffers are a dict keyed by
region name; ``external`` stands in for host memory and the network.
"""
from __future__ import annotations

import numpy as np

from .. import ckks, rubato
from ..errors import SimulationError
from ..field import center, prime_spec_from_q, to_residues, vec_add, vec_mul
from ..sampling import Xof, gaussian, ternary, uniform_words
from ..transforms import COEFF, NTT, Polynomial, intt, ntt
from .scheduler import Task


class FunctionalMachine:
    def __init__(self, seed: bytes = b"", nonce: bytes = bytes(16), counter: int = 0,
                 scale_bits: int = ckks.DEFAULT_SCALE_BITS):
        self.memory: dict[str, np.ndarray] = {}
        self.external: dict[str, object] = {}
        self.sent: list[np.ndarray] = []
        self.seed = seed
        self.nonce = nonce
        self.counter = counter
        self.scale_bits = scale_bits
        self._rc_cache = {}

    # -- helpers
    def load(self, region: str, data) -> None:
        self.memory[region] = np.array(data, copy=True)

    def _get(self, region, task: Task) -> np.ndarray:
        key = str(region)
        if key not in self.memory:
            raise SimulationError(f"line {task.instruction.line}: read of uninitialised region {key}")
        return self.memory[key]

    def _put(self, region, value) -> None:
        self.memory[str(region)] = value

    @staticmethod
    def _spec(task: Task, basis: int):
        if basis not in task.config.moduli:
            raise SimulationError(f"line {task.instruction.line}: basis {basis} not configured")
        q, log_n = task.config.moduli[basis]
        return prime_spec_from_q(q, 1 << log_n)

    def _encoding(self, task: Task, slots: int) -> ckks.EncodingParams:
        specs = tuple(self._spec(task, i) for i in sorted(task.config.moduli))
        return ckks.EncodingParams(ckks.RnsBasis(specs), slots, self.scale_bits)

    def _round_constants(self, params: rubato.RubatoParams):
        key = (params.preset, self.nonce, self.counter)
        if key not in self._rc_cache:
            self._rc_cache[key] = rubato.derive_round_constants(self.nonce, params, self.counter).rc
        return self._rc_cache[key]

    # -- dispatch
    def execute(self, task: Task) -> None:
        ins, a = task.instruction, task.instruction.args
        op = ins.opcode
        if op == "DMA_LOAD" or op == "RECV":
            sym = a["symbol"] or str(a["dst"])
            if sym not in self.external:
                raise SimulationError(f"line {ins.line}: no host data named {sym!r}")
            self._put(a["dst"], np.array(self.external[sym])[: a["words"]].copy())
        elif op == "DMA_STORE":
            self.external[a["symbol"] or str(a["src"])] = self._get(a["src"], task)[: a["words"]].copy()
        elif op == "SEND":
            self.sent.append(self._get(a["src"], task)[: a["words"]].copy())
        elif op == "MOVE":
            self._put(a["dst"], self._get(a["src"], task)[: a["words"]].copy())
        elif op == "SAMPLE":
            self._put(a["dst"], self._sample(task))
        elif op in ("NTT", "INTT"):
            spec = self._spec(task, a["basis"])
            src = self._get(a["src"], task)
            if op == "NTT":
                out = ntt(Polynomial(to_residues(src.astype(np.int64), spec), spec, COEFF, a["basis"]))
            else:
                out = intt(Polynomial(src, spec, NTT, a["basis"]))
            self._put(a["dst"], out.coeffs)
        elif op == "IFFT":
            params = self._encoding(task, a["slots"])
            self._put(a["dst"], ckks.encode_coefficients(self._get(a["src"], task)[: a["slots"]], params))
        elif op == "FFT":
            basis = a["basis"] or 0
            params = self._encoding(task, a["slots"])
            coeffs = center(self._get(a["src"], task), self._spec(task, basis))
            self._put(a["dst"], ckks.decode_coefficients(coeffs, params))
        elif op in ("PWMUL", "PWADD") or (op == "MAC" and ins.mode == "PW"):
            spec = self._spec(task, a["basis"])
            x, y = self._get(a["a"], task), self._get(a["b"], task)
            if op == "PWADD":
                out = vec_add(x, y, spec)
            else:
                out = vec_mul(x, y, spec)
                if op == "MAC":
                    out = vec_add(out, self._get(a["acc"], task), spec)
            self._put(a["dst"], out)
        elif op == "MAC":
            self._cipher(task)
        else:
            raise SimulationError(f"line {ins.line}: no functional model for {op}")

    def _sample(self, task: Task) -> np.ndarray:
        a = task.instruction.args
        dist, words, label = a["dist"], a["words"], a["label"] or str(a["dst"])
        if dist == "XOF":
            params = task.config.require_rubato(task.instruction.line)
            return self._round_constants(params)[int(label)].copy()
        xof = Xof(self.seed, label.encode())
        if dist == "TERNARY":
            return ternary(xof, words)
        if dist == "GAUSS":
            return gaussian(xof, words)
        spec = self._spec(task, min(task.config.moduli))
        return uniform_words(xof, words, spec.q)

    def _cipher(self, task: Task) -> None:
        ins, a = task.instruction, task.instruction.args
        p = task.config.require_rubato(ins.line)
        x = self._get(a["src"], task)
        mix = rubato.MixMatrix.for_size(p.v)
        if ins.mode == "ARK":
            out = rubato.ark(x, self._get(a["key"], task), self._get(a["rc"], task), p.t)
        elif ins.mode == "FEISTEL":
            out = rubato.feistel(x, p.t)
        elif ins.mode == "MIXCOL":
            out = rubato.mix_columns(x, mix, p.t)
        else:
            out = rubato.mix_rows(x, mix, p.t)
        self._put(a["dst"], out)
