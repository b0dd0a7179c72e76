"""The distributed multi-colour control-hazard algorithm.

The processor state is a vector of colour bits, one per hazard-raising
stage, where a bit's priority grows with its index.  Every instruction
address carries the vector; a stage discards instructions whose bit for that
stage mismatches and adopts vectors whose higher-priority bits differ.  The
address arbitration unit applies the same priority filter to hazard-target
requests before letting them reach the program counter.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class LengthMismatch(Exception):
    pass


class Verdict(Enum):
    EXECUTE = "execute"
    EXECUTE_ADOPT = "execute_adopt"
    DISCARD = "discard"


class Kind(Enum):
    PC = "pc"
    BRANCH = "branch"
    EXCEPTION = "exception"
    INTERRUPT = "interrupt"


def colour_init(k: int) -> tuple:
    return (0,) * k


def colour_flip(colour: tuple, bit: int) -> tuple:
    return colour[:bit] + (colour[bit] ^ 1,) + colour[bit + 1:]


def colour_pack(colour: tuple) -> int:
    """Bit 0 is the lowest-priority colour (stage 1)."""
    v = 0
    for idx, b in enumerate(colour):
        v |= (b & 1) << idx
    return v


def colour_unpack(v: int, k: int) -> tuple:
    return tuple((v >> idx) & 1 for idx in range(k))


def colour_check_stage(stage_index: int, stage_colour: tuple,
                       instr_colour: tuple):
    """Per-stage filter: (verdict, new stage colour).

    A higher-priority difference marks the first address of a control
    transfer from deeper in the pipeline and overrides the own-bit check;
    with equal higher bits, an own-bit mismatch rejects the instruction as a
    stale prefetch.
    """
    if len(stage_colour) != len(instr_colour):
        raise LengthMismatch(
            f"{len(stage_colour)} vs {len(instr_colour)} colour bits")
    if instr_colour[stage_index + 1:] != stage_colour[stage_index + 1:]:
        return Verdict.EXECUTE_ADOPT, instr_colour
    if instr_colour[stage_index] != stage_colour[stage_index]:
        return Verdict.DISCARD, stage_colour
    return Verdict.EXECUTE, stage_colour


@dataclass(frozen=True)
class HazardRequest:
    target: int
    colour: tuple
    stage: int  # hazard stage index; one past the top bit for PC requests
    kind: Kind

    def pack(self) -> int:
        """NTarget wire layout: {colour bits, 2-bit stage, kind bit, target}."""
        enj = 0 if self.kind in (Kind.PC, Kind.BRANCH) else 1
        return (colour_pack(self.colour) << 35) | \
            ((self.stage & 0x3) << 33) | (enj << 32) | \
            (self.target & 0xFFFFFFFF)


def request_width(k: int) -> int:
    return k + 2 + 1 + 32


def aau_check(aau_colour: tuple, req: HazardRequest):
    """Arbitration-unit filter.

    Returns (accept, new aau colour, action) where action is
    ``issue_address`` or ``issue_exception_vector``.  Program-counter
    requests need an exact colour match; a stage request is accepted when
    every strictly-higher-priority bit agrees, and its colour is adopted.
    """
    if len(req.colour) != len(aau_colour):
        raise LengthMismatch(
            f"{len(aau_colour)} vs {len(req.colour)} colour bits")
    if req.kind == Kind.PC:
        if req.colour == aau_colour:
            return True, aau_colour, "issue_address"
        return False, aau_colour, None
    if req.colour[req.stage + 1:] != aau_colour[req.stage + 1:]:
        return False, aau_colour, None
    action = ("issue_exception_vector"
              if req.kind in (Kind.EXCEPTION, Kind.INTERRUPT)
              else "issue_address")
    return True, req.colour, action


def interrupt_backpoint(last_issued: int,
                        pending: Optional[HazardRequest]) -> int:
    """Re-entry address when the arbitration unit takes an interrupt:
    the pending exception's address, else a pending branch target, else the
    next not-yet-prefetched instruction."""
    if pending is not None and pending.kind == Kind.EXCEPTION:
        return pending.target & 0xFFFFFFFC
    if pending is not None and pending.kind == Kind.BRANCH:
        return pending.target & 0xFFFFFFFF
    return (last_issued + 4) & 0xFFFFFFFF
