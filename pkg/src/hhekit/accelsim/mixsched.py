"""Cycle-level micro-schedules for the Rubato linear layers and Feistel.

MixColumns/MixRows: each of the two BFUs owns one column (row) at a time.
It reads the v coefficients once into local registers, then for every
output coefficient issues a chain of v MACs against the circulant first
column and writes the result back once.  The chain accumulates into one
register, so the next output waits for the MAC pipeline to drain.

Feistel: two MAC lanes per cycle.  Lane pairing follows the held-register
trick: x[i-1] is read once, squared and kept so x[i] + x[i-1]^2 and the next
pair can issue back to back.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class MicroOp:
    cycle: int
    bfu: int
    op: str
    reads: tuple[int, ...] = ()
    writes: tuple[int, ...] = ()


@dataclass
class MicroSchedule:
    ops: list[MicroOp] = field(default_factory=list)
    depth: int = 0

    @property
    def issue_cycles(self) -> int:
        return max((o.cycle for o in self.ops), default=-1) + 1

    @property
    def cycles(self) -> int:
        return self.issue_cycles + self.depth if self.ops else 0

    def read_counts(self, n: int) -> list[int]:
        c = [0] * n
        for o in self.ops:
            for i in o.reads:
                c[i] += 1
        return c

    def write_counts(self, n: int) -> list[int]:
        c = [0] * n
        for o in self.ops:
            for i in o.writes:
                c[i] += 1
        return c

    def mac_count(self) -> int:
        return sum(1 for o in self.ops if o.op == "mac")


def mix_schedule(v: int, rows: bool = False, bfus: int = 2, depth: int = 7) -> MicroSchedule:
    """MixColumns (or MixRows with ``rows=True``) on a v x v state, row-major indices."""
    sched = MicroSchedule(depth=depth)
    clock = [0] * bfus

    def index(line, pos):
        return line * v + pos if rows else pos * v + line

    for line in range(v):
        b = line % bfus
        c = clock[b]
        members = tuple(index(line, p) for p in range(v))
        # MACs of output p, term j; the load of the line rides on the first MAC
        for p in range(v):
            for j in range(v):
                reads = members if (p == 0 and j == 0) else ()
                writes = (members[p],) if j == v - 1 else ()
                sched.ops.append(MicroOp(c + j, b, "mac", reads, writes))
            c += v + depth
        clock[b] = c
    return sched


def feistel_schedule(n: int, lanes: int = 2, depth: int = 7) -> MicroSchedule:
    sched = MicroSchedule(depth=depth)
    for k, i in enumerate(range(1, n)):
        cycle, lane = divmod(k, lanes)
        # x[i] is read for its own update; x[i-1] was already read for the previous pair
        # except x[0], which the first op reads directly
        reads = (i, i - 1) if i == 1 else (i,)
        sched.ops.append(MicroOp(cycle, lane, "mac", reads, (i,)))
    return sched


def mix_cycles(v: int, bfus: int = 2, depth: int = 7) -> int:
    return -(-v // bfus) * v * (v + depth)


def feistel_cycles(n: int, lanes: int = 2, depth: int = 7) -> int:
    return -(-(n - 1) // lanes) + depth if n > 1 else 0
