"""Transaction-level model of the edge HHE accelerator."""
from .isa import Instruction, Region, assemble, disassemble
from .machine import FunctionalMachine
from .scheduler import CycleReport, Task, check_hazards, run_in_order, run_out_of_order
from .timing import TimingModel
from . import programs


def simulate(program_text: str, bus: str = "1x64", calibration: dict | None = None,
             executor=None, in_order: bool = False) -> CycleReport:
    program = assemble(program_text)
    timing = TimingModel(calibration, bus)
    run = run_in_order if in_order else run_out_of_order
    return run(program, timing, executor)


__all__ = [
    "Instruction", "Region", "assemble", "disassemble", "FunctionalMachine", "CycleReport", "Task",
    "check_hazards", "run_in_order", "run_out_of_order", "TimingModel", "programs", "simulate",
]
