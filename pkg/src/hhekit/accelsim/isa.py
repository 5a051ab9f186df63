"""Textual instruction set for the accelerator model.

One instruction per line, ``OPCODE arg1 arg2 ...``, ``#`` starts a comment.
Buffer regions are written ``BANK`` or ``BANK.tag``; an untagged bank
overlaps every tagged region inside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import FormatError

CONFIG = "CONFIG"
FUNC = "FUNC"

# bank -> capacity in 64-bit words
BANKS = {
    "RAM0": 2 * 4 * 8192,   # BUF0, key/ciphertext bank, two RNS domains resident
    "RAM1": 2 * 4 * 8192,   # BUF0 backup bank
    "RAM3": 2 * 8192,       # BUF1 ping
    "RAM4": 2 * 8192,       # BUF1 pong
    "RAM5": 4096,           # FFT twiddles
    "RAM6": 3 * 8192,       # NTT twiddles
    "NIC": 2 * 8192,        # NIC buffer
    "RF": 256,              # register file for cipher state
}
UNITS = ("DAU", "RSU", "UCU", "DTU", "NIU")
DISTRIBUTIONS = ("UNIFORM", "TERNARY", "GAUSS", "XOF")
MAC_MODES = ("PW", "ARK", "FEISTEL", "MIXCOL", "MIXROW")


@dataclass(frozen=True, order=True)
class Region:
    bank: str
    tag: str | None = None

    @classmethod
    def parse(cls, text: str) -> "Region":
        bank, _, tag = text.partition(".")
        if bank not in BANKS:
            raise ValueError(f"unknown buffer bank {bank!r}")
        if _ and not tag:
            raise ValueError(f"empty region tag in {text!r}")
        return cls(bank, tag or None)

    def overlaps(self, other: "Region") -> bool:
        return self.bank == other.bank and (self.tag is None or other.tag is None or self.tag == other.tag)

    def __str__(self):
        return self.bank if self.tag is None else f"{self.bank}.{self.tag}"


# operand signatures: (name, type); a trailing "?" marks an optional operand
_SIGS = {
    "SET_MOD": [("index", "int"), ("q", "int"), ("log_n", "int?")],
    "SET_RUBATO": [("preset", "name")],
    "SET_PKT": [("header_bytes", "int"), ("segment_words", "int")],
    "DMA_LOAD": [("dst", "region"), ("words", "int"), ("symbol", "name?")],
    "DMA_STORE": [("src", "region"), ("words", "int"), ("symbol", "name?")],
    "SAMPLE": [("dist", "dist"), ("dst", "region"), ("words", "int"), ("label", "name?")],
    "NTT": [("dst", "region"), ("src", "region"), ("basis", "int")],
    "INTT": [("dst", "region"), ("src", "region"), ("basis", "int")],
    "FFT": [("dst", "region"), ("src", "region"), ("slots", "int"), ("basis", "int?")],
    "IFFT": [("dst", "region"), ("src", "region"), ("slots", "int")],
    "PWMUL": [("dst", "region"), ("a", "region"), ("b", "region"), ("basis", "int")],
    "PWADD": [("dst", "region"), ("a", "region"), ("b", "region"), ("basis", "int")],
    "MAC.PW": [("dst", "region"), ("a", "region"), ("b", "region"), ("acc", "region"), ("basis", "int")],
    "MAC.ARK": [("dst", "region"), ("src", "region"), ("key", "region"), ("rc", "region")],
    "MAC.FEISTEL": [("dst", "region"), ("src", "region")],
    "MAC.MIXCOL": [("dst", "region"), ("src", "region")],
    "MAC.MIXROW": [("dst", "region"), ("src", "region")],
    "MOVE": [("dst", "region"), ("src", "region"), ("words", "int")],
    "SEND": [("src", "region"), ("words", "int")],
    "RECV": [("dst", "region"), ("words", "int"), ("symbol", "name?")],
}

UNIT_OF = {
    "DMA_LOAD": "DAU", "DMA_STORE": "DAU",
    "SAMPLE": "RSU",
    "NTT": "UCU", "INTT": "UCU", "FFT": "UCU", "IFFT": "UCU",
    "PWMUL": "UCU", "PWADD": "UCU", "MAC": "UCU",
    "MOVE": "DTU",
    "SEND": "NIU", "RECV": "NIU",
}
CONFIG_OPS = ("SET_MOD", "SET_RUBATO", "SET_PKT")
OPCODES = CONFIG_OPS + tuple(UNIT_OF)

_READ_FIELDS = ("src", "a", "b", "acc", "key", "rc")
_WRITE_FIELDS = ("dst",)


@dataclass(frozen=True)
class Instruction:
    opcode: str
    args: dict = field(hash=False)
    mode: str | None = None
    line: int = 0

    @property
    def kind(self) -> str:
        return CONFIG if self.opcode in CONFIG_OPS else FUNC

    @property
    def unit(self) -> str | None:
        return UNIT_OF.get(self.opcode)

    @property
    def name(self) -> str:
        return f"{self.opcode}.{self.mode}" if self.mode else self.opcode

    def reads(self) -> tuple[Region, ...]:
        return tuple(self.args[f] for f in _READ_FIELDS if f in self.args)

    def writes(self) -> tuple[Region, ...]:
        return tuple(self.args[f] for f in _WRITE_FIELDS if f in self.args)

    def text(self) -> str:
        parts = [self.opcode] + ([self.mode] if self.mode else [])
        for name, typ in _SIGS[self.name]:
            if name in self.args and self.args[name] is not None:
                parts.append(str(self.args[name]))
        return " ".join(parts)


def _convert(value: str, typ: str):
    typ = typ.rstrip("?")
    if typ == "int":
        return int(value, 0)
    if typ == "region":
        return Region.parse(value)
    if typ == "dist":
        v = value.upper()
        if v not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {value!r}")
        return v
    return value


def parse_line(text: str, line: int = 0) -> Instruction | None:
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    tokens = body.split()
    opcode = tokens[0].upper()
    if opcode not in OPCODES:
        raise FormatError(f"unknown opcode {tokens[0]!r}", line=line)
    operands = tokens[1:]
    mode = None
    key = opcode
    if opcode == "MAC":
        if not operands or operands[0].upper() not in MAC_MODES:
            raise FormatError(f"MAC needs a mode from {', '.join(MAC_MODES)}", line=line)
        mode = operands[0].upper()
        operands = operands[1:]
        key = f"MAC.{mode}"
    sig = _SIGS[key]
    required = sum(1 for _, t in sig if not t.endswith("?"))
    if not required <= len(operands) <= len(sig):
        want = str(required) if required == len(sig) else f"{required}-{len(sig)}"
        raise FormatError(f"{key} takes {want} operands, got {len(operands)}", line=line)
    args = {}
    for (name, typ), value in zip(sig, operands):
        try:
            args[name] = _convert(value, typ)
        except ValueError as exc:
            raise FormatError(f"bad operand {name}={value!r}: {exc}", line=line) from None
    for name, typ in sig[len(operands):]:
        args[name] = None
    for name in ("words", "slots", "header_bytes", "segment_words"):
        if name in args and args[name] is not None and args[name] < 0:
            raise FormatError(f"{name} must be nonnegative", line=line)
    return Instruction(opcode, args, mode, line)


def assemble(program_text: str) -> list[Instruction]:
    out = []
    for no, raw in enumerate(program_text.splitlines(), start=1):
        ins = parse_line(raw, no)
        if ins is not None:
            out.append(ins)
    return out


def disassemble(program: list[Instruction]) -> str:
    return "\n".join(ins.text() for ins in program) + ("\n" if program else "")
