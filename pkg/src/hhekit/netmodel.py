"""Standalone vs near-network latency model.

Standalone: ciphertext polynomials make a store-then-load round trip over
the system bus, so ``transfer = polys * (load + store)``.  Near-network: the
accelerator streams straight into the NIC and only a fixed non-overlapped
packaging delay remains.  Compute cycles are the accelerator core time plus
the DMA of the message itself (half a polynomial) over the same bus.
"""
from __future__ import annotations

from dataclasses import dataclass

from .calibration import load_calibration
from .errors import ParameterError, StateError

OUTBOUND = "m_to_ct_to_cloud"
INBOUND = "cloud_to_ct_to_m"
DIRECTIONS = (OUTBOUND, INBOUND)
BUS_NAMES = ("1x64", "1x128", "1x256", "2x64", "2x128", "2x256")


@dataclass(frozen=True)
class BusConfig:
    width_bits: int
    channels: int
    load_cycles: int
    store_cycles: int

    @property
    def name(self) -> str:
        return f"{self.channels}x{self.width_bits}"

    @property
    def round_trip(self) -> int:
        return self.load_cycles + self.store_cycles


def bus_config(name: str, calibration: dict | None = None) -> BusConfig:
    cal = calibration or load_calibration()
    entry = cal["bus"].get(name)
    if entry is None:
        raise ParameterError(f"unknown bus config {name!r}; known: {', '.join(cal['bus'])}")
    ch, width = name.split("x")
    return BusConfig(int(width), int(ch), int(entry["load"]), int(entry["store"]))


def all_buses(calibration: dict | None = None) -> list[BusConfig]:
    cal = calibration or load_calibration()
    return [bus_config(n, cal) for n in cal["bus"]]


@dataclass(frozen=True)
class TransferScenario:
    direction: str
    polys_transferred: int
    core_cycles: float
    message_dma: str = "load"
    message_fraction: float = 0.5

    def compute_cycles(self, bus: BusConfig) -> float:
        dma = bus.load_cycles if self.message_dma == "load" else bus.store_cycles
        return self.core_cycles + self.message_fraction * dma


def scenario(direction: str, calibration: dict | None = None, core_cycles: float | None = None) -> TransferScenario:
    cal = calibration or load_calibration()
    if direction not in cal["compute"]:
        raise ParameterError(f"unknown direction {direction!r}")
    c = cal["compute"][direction]
    core = c["core"] if core_cycles is None else core_cycles
    return TransferScenario(direction, int(c["polys"]), float(core), c["message_dma"], float(c["message_fraction"]))


@dataclass(frozen=True)
class LatencyReport:
    approach: str
    direction: str
    bus: str
    compute_cycles: float
    transfer_cycles: float
    overall_cycles: float

    @property
    def transfer_percentage(self) -> float:
        return self.transfer_cycles / self.overall_cycles if self.overall_cycles else 0.0

    def as_row(self) -> dict:
        return {
            "approach": self.approach, "direction": self.direction, "bus": self.bus,
            "compute_cycles": round(self.compute_cycles, 1), "transfer_cycles": round(self.transfer_cycles, 1),
            "overall_cycles": round(self.overall_cycles, 1),
            "transfer_pct": round(100 * self.transfer_percentage, 3),
        }


def standalone_latency(sc: TransferScenario, bus: BusConfig) -> LatencyReport:
    transfer = sc.polys_transferred * bus.round_trip
    compute = sc.compute_cycles(bus)
    return LatencyReport("standalone", sc.direction, bus.name, compute, transfer, compute + transfer)


def near_network_latency(sc: TransferScenario, bus: BusConfig, niu_nonoverlap: float | None) -> LatencyReport:
    if niu_nonoverlap is None:
        raise StateError("near-network model needs a calibrated NIU non-overlap delay")
    compute = sc.compute_cycles(bus)
    return LatencyReport("nearnet", sc.direction, bus.name, compute, float(niu_nonoverlap), compute + niu_nonoverlap)


def niu_delay(direction: str, calibration: dict | None = None) -> float | None:
    cal = calibration or load_calibration()
    return cal.get("niu_nonoverlap", {}).get(direction)


@dataclass(frozen=True)
class SweepRow:
    bus: str
    direction: str
    standalone: LatencyReport
    nearnet: LatencyReport

    @property
    def speedup(self) -> float:
        return self.standalone.overall_cycles / self.nearnet.overall_cycles


def speedup_sweep(calibration: dict | None = None) -> list[SweepRow]:
    cal = calibration or load_calibration()
    rows = []
    for direction in DIRECTIONS:
        sc = scenario(direction, cal)
        for bus in all_buses(cal):
            rows.append(SweepRow(bus.name, direction, standalone_latency(sc, bus),
                                 near_network_latency(sc, bus, niu_delay(direction, cal))))
    return rows


def ens(lut: float, ff: float, dsp: float, bram: float) -> int:
    """Equivalent number of slices."""
    if min(lut, ff, dsp, bram) < 0:
        raise ParameterError("resource counts must be nonnegative")
    return int(round(dsp * 100 + bram * 196 + lut / 4 + ff / 2))
