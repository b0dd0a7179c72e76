"""Architectural state: register file, HI/LO, PC and the CP0 subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .bits import u32

EXC_VECTOR = 0x80000080

CP0_STATUS = 12
CP0_CAUSE = 13
CP0_EPC = 14

STATUS_IEC = 1 << 0
STATUS_KUC = 1 << 1  # 1 = user mode

CAUSE_EXCCODE_SHIFT = 2
CAUSE_EXCCODE_MASK = 0x1F << CAUSE_EXCCODE_SHIFT
CAUSE_IP_SHIFT = 8

# The six external interrupt pins occupy the hardware IP bits (IP2..IP7).
def cause_ip_bit(pin: int) -> int:
    if not 0 <= pin <= 5:
        raise ValueError(f"interrupt pin {pin} out of range 0..5")
    return 1 << (CAUSE_IP_SHIFT + 2 + pin)


class ExcCode(IntEnum):
    INT = 0
    ADEL = 4
    ADES = 5
    SYS = 8
    BP = 9
    RI = 10
    OV = 12


class UnmappedAddress(Exception):
    def __init__(self, addr, why="access"):
        super().__init__(f"unmapped {why} at {addr:#010x}")
        self.addr = addr


@dataclass
class ArchState:
    regs: list = field(default_factory=lambda: [0] * 32)
    hi: int = 0
    lo: int = 0
    pc: int = 0
    cp0: list = field(default_factory=lambda: [0] * 32)

    def write_reg(self, n: int, value: int) -> None:
        if n:
            self.regs[n] = u32(value)

    def read_reg(self, n: int) -> int:
        return self.regs[n] if n else 0

    @property
    def status(self) -> int:
        return self.cp0[CP0_STATUS]

    @property
    def cause(self) -> int:
        return self.cp0[CP0_CAUSE]

    @property
    def epc(self) -> int:
        return self.cp0[CP0_EPC]

    def user_mode(self) -> bool:
        return bool(self.status & STATUS_KUC)

    def interrupts_enabled(self) -> bool:
        return bool(self.status & STATUS_IEC)

    def clone(self) -> "ArchState":
        s = ArchState(list(self.regs), self.hi, self.lo, self.pc,
                      list(self.cp0))
        return s


def status_push(status: int) -> int:
    """Exception entry: KU/IE pairs shift old<-prev<-current, current
    becomes kernel with interrupts disabled."""
    return u32((status & ~0x3F) | ((status & 0x0F) << 2))


def status_pop(status: int) -> int:
    """RFE: current<-prev<-old, the old pair is preserved."""
    return u32((status & ~0x0F) | (status & 0x30) | ((status >> 2) & 0x0F))


def set_exc_code(cause: int, code: ExcCode) -> int:
    return u32((cause & ~CAUSE_EXCCODE_MASK) | (int(code) << CAUSE_EXCCODE_SHIFT))


def raise_exception(state: ArchState, code: ExcCode, faulting_pc: int,
                    in_delay_slot: bool = False) -> ArchState:
    """Precise exception entry: Cause/EPC update, Status push, vector."""
    state.cp0[CP0_CAUSE] = set_exc_code(state.cause, code)
    state.cp0[CP0_EPC] = u32(faulting_pc - 4 if in_delay_slot else faulting_pc)
    state.cp0[CP0_STATUS] = status_push(state.status)
    state.pc = EXC_VECTOR
    return state


def rfe(state: ArchState) -> ArchState:
    state.cp0[CP0_STATUS] = status_pop(state.status)
    return state


class Memory:
    """Word-addressed big-endian memory with explicit legal windows.

    Any address whose aligned word exists in the image is legal, as is any
    address inside a RAM window; legal-but-unwritten words read as zero.
    """

    DEFAULT_WINDOWS = ((0x10000000, 0x10010000), (0x7FFF0000, 0x80000000))

    def __init__(self, words=None, windows=DEFAULT_WINDOWS):
        self.words = dict(words) if words else {}
        self.windows = tuple(windows)
        self._image_words = frozenset(self.words)

    def legal(self, addr: int) -> bool:
        base = addr & ~3
        if base in self._image_words or base in self.words:
            return True
        return any(lo <= addr < hi for lo, hi in self.windows)

    def read_word_aligned(self, addr: int, why="load") -> int:
        base = addr & ~3
        if not self.legal(addr):
            raise UnmappedAddress(addr, why)
        return self.words.get(base, 0)

    def write_word_aligned(self, addr: int, value: int) -> None:
        if not self.legal(addr):
            raise UnmappedAddress(addr, "store")
        self.words[addr & ~3] = u32(value)

    def fetch(self, pc: int) -> int:
        base = pc & ~3
        if base not in self.words:
            raise UnmappedAddress(pc, "fetch")
        return self.words[base]
