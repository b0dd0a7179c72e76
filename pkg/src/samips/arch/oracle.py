"""Sequential in-order interpreter with precise exceptions.

This is the golden model that the pipeline is differentially tested against.
It interprets mnemonics directly and never touches the pipeline's control
encodings, so the two routes stay independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from ..isa import encoding
from ..isa.encoding import decode, is_halt
from .bits import (
    add_overflows, load_byte, load_half, lwl_merge, lwr_merge, s32,
    store_byte, store_half, sub_overflows, swl_merge, swr_merge, sx16, u32,
)
from .state import (
    ArchState, ExcCode, Memory, UnmappedAddress, cause_ip_bit,
    raise_exception, rfe,
)


@dataclass(frozen=True)
class RetireRecord:
    address: int
    mnemonic: str
    took_branch: bool = False
    exception: Optional[ExcCode] = None

    def to_json(self) -> str:
        return json.dumps({
            "addr": f"{self.address:08x}",
            "mnemonic": self.mnemonic,
            "branch": self.took_branch,
            "exc": None if self.exception is None else int(self.exception),
        }, separators=(",", ":"))


def trace_to_jsonl(records) -> str:
    return "\n".join(r.to_json() for r in records) + "\n"


class _Exc(Exception):
    def __init__(self, code):
        self.code = code


class Oracle:
    def __init__(self, memory: Memory, entry: int, delay_slot: bool = True):
        self.state = ArchState(pc=entry)
        self.mem = memory
        self.delay_slot = delay_slot
        self.pending_target: Optional[int] = None
        self.halted = False
        self.pending_pins: list[int] = []

    # -- helpers -------------------------------------------------------------

    def _check_data_addr(self, addr, align, is_store):
        code = ExcCode.ADES if is_store else ExcCode.ADEL
        if addr % align:
            raise _Exc(code)
        if self.state.user_mode() and addr >= 0x80000000:
            raise _Exc(code)

    def _load(self, mnemonic, addr, old_rt):
        s = self.state
        m = self.mem
        if mnemonic == "lw":
            self._check_data_addr(addr, 4, False)
            return m.read_word_aligned(addr)
        if mnemonic in ("lh", "lhu"):
            self._check_data_addr(addr, 2, False)
            return load_half(m.read_word_aligned(addr), addr,
                             mnemonic == "lh")
        if mnemonic in ("lb", "lbu"):
            self._check_data_addr(addr, 1, False)
            return load_byte(m.read_word_aligned(addr), addr,
                             mnemonic == "lb")
        if mnemonic == "lwl":
            self._check_data_addr(addr, 1, False)
            return lwl_merge(old_rt, m.read_word_aligned(addr), addr)
        if mnemonic == "lwr":
            self._check_data_addr(addr, 1, False)
            return lwr_merge(old_rt, m.read_word_aligned(addr), addr)
        raise AssertionError(mnemonic)

    def _store(self, mnemonic, addr, rt_val):
        m = self.mem
        if mnemonic == "sw":
            self._check_data_addr(addr, 4, True)
            m.write_word_aligned(addr, rt_val)
            return
        old = None
        if mnemonic == "sh":
            self._check_data_addr(addr, 2, True)
            old = m.read_word_aligned(addr, "store")
            m.write_word_aligned(addr, store_half(old, addr, rt_val))
        elif mnemonic == "sb":
            self._check_data_addr(addr, 1, True)
            old = m.read_word_aligned(addr, "store")
            m.write_word_aligned(addr, store_byte(old, addr, rt_val))
        elif mnemonic == "swl":
            self._check_data_addr(addr, 1, True)
            old = m.read_word_aligned(addr, "store")
            m.write_word_aligned(addr, swl_merge(old, rt_val, addr))
        elif mnemonic == "swr":
            self._check_data_addr(addr, 1, True)
            old = m.read_word_aligned(addr, "store")
            m.write_word_aligned(addr, swr_merge(old, rt_val, addr))
        else:
            raise AssertionError(mnemonic)

    def _link_value(self, pc):
        return u32(pc + 8) if self.delay_slot else u32(pc + 4)

    # -- one architectural step ----------------------------------------------

    def step(self) -> RetireRecord:
        s = self.state
        pc = s.pc
        in_slot = self.pending_target is not None
        if pc % 4:
            self.pending_target = None
            raise_exception(s, ExcCode.ADEL, pc, in_slot)
            return RetireRecord(pc, "<fetch-error>", exception=ExcCode.ADEL)
        word = self.mem.fetch(pc)
        ins = decode(word)
        m = ins.mnemonic
        f = ins.fields
        next_pc = u32(pc + 4)
        target = None
        took = False

        try:
            if ins.reserved:
                raise _Exc(ExcCode.RI)
            if is_halt(ins):
                self.halted = True
                self.pending_target = None
                return RetireRecord(pc, "break")
            r = s.read_reg

            if m == "nop":
                pass
            elif m in ("add", "addu", "sub", "subu", "and", "or", "xor",
                       "nor", "slt", "sltu"):
                a, b = r(f["rs"]), r(f["rt"])
                s.write_reg(f["rd"], self._alu(m, a, b))
            elif m in ("addi", "addiu", "slti", "sltiu"):
                a, b = r(f["rs"]), u32(sx16(f["imm"]))
                base = {"addi": "add", "addiu": "addu",
                        "slti": "slt", "sltiu": "sltu"}[m]
                s.write_reg(f["rt"], self._alu(base, a, b))
            elif m in ("andi", "ori", "xori"):
                a, b = r(f["rs"]), f["imm"]
                s.write_reg(f["rt"], self._alu(m[:-1], a, b))
            elif m == "lui":
                s.write_reg(f["rt"], u32(f["imm"] << 16))
            elif m in ("sll", "srl", "sra"):
                s.write_reg(f["rd"], self._shift(m, r(f["rt"]), f["sa"]))
            elif m in ("sllv", "srlv", "srav"):
                s.write_reg(f["rd"],
                            self._shift(m[:-1], r(f["rt"]), r(f["rs"]) & 31))
            elif m in ("mult", "multu"):
                a, b = r(f["rs"]), r(f["rt"])
                prod = (s32(a) * s32(b)) if m == "mult" else (a * b)
                prod &= (1 << 64) - 1
                s.hi, s.lo = (prod >> 32) & 0xFFFFFFFF, prod & 0xFFFFFFFF
            elif m in ("div", "divu"):
                a, b = r(f["rs"]), r(f["rt"])
                if b == 0:
                    # deterministic convention for the undefined case
                    s.hi, s.lo = a, 0xFFFFFFFF
                elif m == "div":
                    sa, sb = s32(a), s32(b)
                    q = abs(sa) // abs(sb)
                    if (sa < 0) != (sb < 0):
                        q = -q
                    s.hi, s.lo = u32(sa - q * sb), u32(q)
                else:
                    s.hi, s.lo = a % b, a // b
            elif m == "mfhi":
                s.write_reg(f["rd"], s.hi)
            elif m == "mflo":
                s.write_reg(f["rd"], s.lo)
            elif m == "mthi":
                s.hi = r(f["rs"])
            elif m == "mtlo":
                s.lo = r(f["rs"])
            elif m in encoding.LOADS:
                addr = u32(r(f["rs"]) + sx16(f["imm"]))
                s.write_reg(f["rt"], self._load(m, addr, r(f["rt"])))
            elif m in encoding.STORES:
                addr = u32(r(f["rs"]) + sx16(f["imm"]))
                self._store(m, addr, r(f["rt"]))
            elif m in ("beq", "bne", "blez", "bgtz", "bltz", "bgez",
                       "bltzal", "bgezal"):
                a = r(f["rs"])
                cond = {
                    "beq": a == r(f["rt"]),
                    "bne": a != r(f["rt"]),
                    "blez": s32(a) <= 0,
                    "bgtz": s32(a) > 0,
                    "bltz": s32(a) < 0,
                    "bgez": s32(a) >= 0,
                    "bltzal": s32(a) < 0,
                    "bgezal": s32(a) >= 0,
                }[m]
                if m in ("bltzal", "bgezal"):
                    s.write_reg(31, self._link_value(pc))
                if cond:
                    target = u32(pc + 4 + (sx16(f["imm"]) << 2))
                    took = True
            elif m == "j":
                target = ((pc + 4) & 0xF0000000) | (f["target"] << 2)
                took = True
            elif m == "jal":
                s.write_reg(31, self._link_value(pc))
                target = ((pc + 4) & 0xF0000000) | (f["target"] << 2)
                took = True
            elif m == "jr":
                target = r(f["rs"])
                took = True
            elif m == "jalr":
                link = self._link_value(pc)
                target = r(f["rs"])
                s.write_reg(f["rd"], link)
                took = True
            elif m == "syscall":
                raise _Exc(ExcCode.SYS)
            elif m == "break":
                raise _Exc(ExcCode.BP)
            elif m == "mtc0":
                s.cp0[f["rd"]] = r(f["rt"])
            elif m == "mfc0":
                s.write_reg(f["rt"], s.cp0[f["rd"]])
            elif m == "rfe":
                rfe(s)
            else:
                raise AssertionError(f"unhandled {m}")
        except _Exc as e:
            self.pending_target = None
            raise_exception(s, e.code, pc, in_slot)
            return RetireRecord(pc, m, exception=e.code)

        if in_slot:
            s.pc = self.pending_target
            self.pending_target = None
            if took:
                # branch inside a delay slot: architecturally undefined,
                # keep a deterministic choice (slot branch wins)
                s.pc = target
        elif took:
            if self.delay_slot:
                self.pending_target = target
                s.pc = next_pc
            else:
                s.pc = target
        else:
            s.pc = next_pc
        return RetireRecord(pc, m, took_branch=took)

    def _alu(self, m, a, b):
        if m == "add":
            if add_overflows(a, b):
                raise _Exc(ExcCode.OV)
            return u32(a + b)
        if m == "addu":
            return u32(a + b)
        if m == "sub":
            if sub_overflows(a, b):
                raise _Exc(ExcCode.OV)
            return u32(a - b)
        if m == "subu":
            return u32(a - b)
        if m == "and":
            return a & b
        if m == "or":
            return a | b
        if m == "xor":
            return a ^ b
        if m == "nor":
            return u32(~(a | b))
        if m == "slt":
            return 1 if s32(a) < s32(b) else 0
        if m == "sltu":
            return 1 if a < b else 0
        raise AssertionError(m)

    @staticmethod
    def _shift(m, v, amount):
        amount &= 31
        if m == "sll":
            return u32(v << amount)
        if m == "srl":
            return v >> amount
        if m == "sra":
            return u32(s32(v) >> amount)
        raise AssertionError(m)

    def take_interrupt(self, pin: int) -> RetireRecord:
        s = self.state
        s.cp0[13] |= cause_ip_bit(pin)
        at = s.pc
        self.pending_target = None
        raise_exception(s, ExcCode.INT, at, False)
        return RetireRecord(at, "<interrupt>", exception=ExcCode.INT)


def oracle_step(state: ArchState, memory: Memory,
                delay_slot_mode: bool = True) -> RetireRecord:
    """Single-step convenience wrapper over a transient Oracle."""
    o = Oracle(memory, state.pc, delay_slot_mode)
    o.state = state
    return o.step()


def oracle_run(image, max_steps: int = 100_000, delay_slot_mode: bool = True,
               interrupt_schedule=()):
    """Run to the halt convention; returns (state, records, memory, halted)."""
    mem = Memory(image.words)
    o = Oracle(mem, image.entry_point, delay_slot_mode)
    schedule = sorted(interrupt_schedule)
    records = []
    si = 0
    for step in range(max_steps):
        while si < len(schedule) and schedule[si][0] <= step:
            o.pending_pins.append(schedule[si][1])
            si += 1
        if o.pending_pins and o.state.interrupts_enabled():
            pin = o.pending_pins.pop(0)
            records.append(o.take_interrupt(pin))
        records.append(o.step())
        if o.halted:
            break
    return o.state, records, mem, o.halted
