"""Data-hazard history structures kept by the register bank.

All three structures are pure values parameterised by the pipeline depth
``n`` and the execute-stage index ``i``:

- the detection queue holds the write destinations of the last ``n-i+2``
  instructions, youngest first;
- the detection table tags each register with a clean bit and a modular
  index snapshot;
- the 1-bit acknowledgement queue (length ``n-i``) tells the forwarding
  unit which forwarded-result channels will fire.

A forward case is an integer distance: 0 means no hazard (read the register
file); ``d`` in ``1..n-i`` selects the result forwarded from stage ``i+d``;
``d == n-i+1`` means the writer is retiring and the read must wait for the
in-flight register write.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NON = 0

# distances for the 5-stage machine (n=5, i=3)
EXER = 1  # result forwarded from the MEM stage
MEMR = 2  # result forwarded from the WB stage
WBR = 3   # wait for the in-flight register write


class NoMatch(Exception):
    """A register write found no pending entry: bookkeeping violation."""


class InvalidShape(Exception):
    pass


def queue_len(n: int, i: int) -> int:
    if n <= i or i < 1:
        raise InvalidShape(f"need n > i >= 1, got n={n} i={i}")
    return n - i + 2


def fraq_len(n: int, i: int) -> int:
    if n <= i or i < 1:
        raise InvalidShape(f"need n > i >= 1, got n={n} i={i}")
    return n - i


def dhdq_init(n: int = 5, i: int = 3) -> tuple:
    return (0,) * queue_len(n, i)


def dhdq_read(q: tuple, rs: int, rt: int, wd: int):
    """Detect hazards for both sources, then push the write destination.

    Returns (fw0, fw1, q').  The youngest match wins; a match in the oldest
    slot means the writer is already past write-back, so the file is read
    directly.
    """
    def case(src):
        if src == 0:
            return NON
        for pos in range(len(q) - 1):
            if q[pos] == src:
                return pos + 1
        return NON

    fw0, fw1 = case(rs), case(rt)
    return fw0, fw1, (wd,) + q[:-1]


def dhdq_write(q: tuple, rd: int) -> tuple:
    """Clear the oldest entry matching rd (the retiring writer's slot)."""
    assert rd != 0
    for pos in range(len(q) - 1, -1, -1):
        if q[pos] == rd:
            return q[:pos] + (0,) + q[pos + 1:]
    raise NoMatch(f"no pending write for ${rd} in {q}")


@dataclass(frozen=True)
class Dhdt:
    clean: tuple  # 32 bits
    index: tuple  # 32 modular snapshots
    cur_index: int
    depth: int    # n - i + 2

    @classmethod
    def init(cls, n: int = 5, i: int = 3) -> "Dhdt":
        return cls((1,) * 32, (0,) * 32, 0, queue_len(n, i))


def dhdt_read(t: Dhdt, rs: int, rt: int, wd: int):
    """Hazard check against the table, then mark wd dirty and advance.

    The distance wraps to 0 exactly when the queue implementation would have
    aged the entry out, so both report no hazard in that case.
    """
    def case(src):
        if src == 0 or t.clean[src]:
            return NON
        return (t.cur_index - t.index[src]) % t.depth

    fw0, fw1 = case(rs), case(rt)
    clean, index = t.clean, t.index
    if wd != 0:
        clean = clean[:wd] + (0,) + clean[wd + 1:]
        index = index[:wd] + (t.cur_index,) + index[wd + 1:]
    t2 = Dhdt(clean, index, (t.cur_index + 1) % t.depth, t.depth)
    return fw0, fw1, t2


def dhdt_write(t: Dhdt, rd: int, index_snapshot: int) -> Dhdt:
    """Mark rd clean only when the snapshot matches: a mismatch means a
    younger writer is still in flight."""
    assert rd != 0
    if t.index[rd] != index_snapshot or t.clean[rd]:
        return t
    clean = t.clean[:rd] + (1,) + t.clean[rd + 1:]
    return Dhdt(clean, t.index, t.cur_index, t.depth)


def fraq_init(n: int = 5, i: int = 3) -> tuple:
    return (0,) * fraq_len(n, i)


def fraq_step(f: tuple, will_write: bool):
    """Emit the current contents, then shift in the new writer bit."""
    return f, (1 if will_write else 0,) + f[:-1]


def storage_cost(kind: str, n: int, i: int) -> int:
    """Extra register-bank bits for each detection structure."""
    if n <= i or i < 1:
        raise InvalidShape(f"need n > i >= 1, got n={n} i={i}")
    slots = n - i + 2
    if kind == "dhdt":
        idx_bits = math.ceil(math.log2(slots))
        return (idx_bits + 1) * 31 + idx_bits
    if kind == "dhdq":
        return slots * 5
    raise ValueError(f"unknown kind {kind!r}")
