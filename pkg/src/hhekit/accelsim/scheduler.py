"""Hazard-aware out-of-order task dispatch.

All FUNC instructions are decoded up front into tasks (issue cycle 0).  At
each event time the dispatcher walks the pending queue oldest first and
starts every task whose unit is idle and whose regions conflict neither
with an in-flight task nor with an older task still waiting.  The second
check keeps program semantics: a younger task may overtake an older one only
when they touch disjoint data.
"""
from __future__ import annotations

import copy
import heapq
from dataclasses import dataclass, field

from ..errors import SimulationError
from .isa import CONFIG, UNITS, Instruction, Region
from .timing import ConfigState, TimingModel


@dataclass
class Task:
    id: int
    instruction: Instruction
    unit: str
    read_set: tuple[Region, ...]
    write_set: tuple[Region, ...]
    duration: int
    config: ConfigState = field(repr=False, default=None)
    issue: int = 0
    start: int | None = None
    finish: int | None = None

    @property
    def opcode(self) -> str:
        return self.instruction.name


def conflicts(a: Task, b: Task) -> bool:
    """RAW, WAR or WAW on overlapping regions."""
    def hit(xs, ys):
        return any(x.overlaps(y) for x in xs for y in ys)
    return hit(a.write_set, b.read_set) or hit(a.read_set, b.write_set) or hit(a.write_set, b.write_set)


@dataclass
class CycleReport:
    total_cycles: int
    tasks: list[Task]
    scheduler: str = "out-of-order"

    @property
    def serial_cycles(self) -> int:
        return sum(t.duration for t in self.tasks)

    def unit_busy(self) -> dict[str, int]:
        busy = {u: 0 for u in UNITS}
        for t in self.tasks:
            busy[t.unit] += t.duration
        return busy

    def occupancy(self) -> dict[str, float]:
        total = self.total_cycles or 1
        return {u: b / total for u, b in self.unit_busy().items()}

    def summary(self) -> dict:
        out = {"scheduler": self.scheduler, "tasks": len(self.tasks), "total_cycles": self.total_cycles,
               "serial_cycles": self.serial_cycles}
        for u, occ in self.occupancy().items():
            out[f"occupancy_{u}"] = round(occ, 4)
        return out


def decode(program: list[Instruction], timing: TimingModel | None = None) -> list[Task]:
    timing = timing or TimingModel()
    cfg = ConfigState()
    tasks = []
    for ins in program:
        if ins.kind == CONFIG:
            cfg.apply(ins)
            continue
        snap = copy.copy(cfg)
        snap.moduli = dict(cfg.moduli)
        tasks.append(Task(len(tasks), ins, ins.unit, ins.reads(), ins.writes(), timing.duration(ins, snap), snap))
    return tasks


def _start(executor, task, now):
    task.start = now
    task.finish = now + task.duration
    if executor is not None:
        executor.execute(task)


def run_out_of_order(program: list[Instruction], timing: TimingModel | None = None, executor=None) -> CycleReport:
    tasks = decode(program, timing)
    pending = list(tasks)
    running: list[tuple[int, int, Task]] = []  # (finish, id, task)
    busy: set[str] = set()
    now = 0
    while pending or running:
        started = False
        waiting: list[Task] = []
        for task in pending:
            ok = task.unit not in busy
            ok = ok and not any(conflicts(task, r) for _, _, r in running)
            ok = ok and not any(conflicts(task, w) for w in waiting)
            if ok:
                _start(executor, task, now)
                busy.add(task.unit)
                heapq.heappush(running, (task.finish, task.id, task))
                started = True
            else:
                waiting.append(task)
        pending = waiting
        if not running:
            if pending and not started:
                raise SimulationError(f"deadlock at cycle {now}: {len(pending)} tasks cannot start")
            continue
        # retire everything finishing at the next event time
        now = running[0][0]
        while running and running[0][0] == now:
            _, _, done = heapq.heappop(running)
            busy.discard(done.unit)
    total = max((t.finish for t in tasks), default=0)
    return CycleReport(total, tasks, "out-of-order")


def run_in_order(program: list[Instruction], timing: TimingModel | None = None, executor=None) -> CycleReport:
    """Reference schedule: one task at a time in program order."""
    tasks = decode(program, timing)
    now = 0
    for task in tasks:
        _start(executor, task, now)
        now = task.finish
    return CycleReport(now, tasks, "in-order")


def check_hazards(tasks: list[Task]) -> list[tuple[int, int]]:
    """Pairs of conflicting tasks whose execution intervals overlap."""
    bad = []
    for i, a in enumerate(tasks):
        for b in tasks[i + 1:]:
            if a.start < b.finish and b.start < a.finish and conflicts(a, b):
                bad.append((a.id, b.id))
    return bad
