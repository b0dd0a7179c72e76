"""Control-signal encodings that flow down the pipeline with each instruction.

The decoded control bundle has three parts: a 6-bit execute-stage operation
code, a 5-bit memory-stage control ({2-bit access type, 3-bit data type}) and
a 3-bit write-back control ({target bit, 2-bit action}).  Two execute-stage
code tables exist: the original one and the optimised one that relocates
ADD/SUB/NOP and adds a dedicated LUI entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from .encoding import Instruction, RESERVED

ORIGINAL = "original"
OPTIMIZED = "optimized"


class ExeOp(Enum):
    BEQ = "beq"; BNE = "bne"; BGTZ = "bgtz"; BLEZ = "blez"
    BLTZ = "bltz"; BLTZAL = "bltzal"; BGEZ = "bgez"; BGEZAL = "bgezal"
    JR = "jr"; JALR = "jalr"; JAL = "jal"
    ADD = "add"; SUB = "sub"; ADDU = "addu"; SUBU = "subu"
    AND = "and"; OR = "or"; XOR = "xor"; NOR = "nor"
    EXC = "exc"; EXCS = "excs"; MA = "ma"; COR = "cor"
    SLTU = "sltu"; SLT = "slt"
    SLLV = "sllv"; SRLV = "srlv"; SRAV = "srav"
    NOP = "nop"; SLL = "sll"; SRL = "srl"; SRA = "sra"
    MULTU = "multu"; MULT = "mult"; DIVU = "divu"; DIV = "div"
    MTHI = "mthi"; MTLO = "mtlo"; MFHI = "mfhi"; MFLO = "mflo"
    LUI = "lui"  # optimised encoding only


# (row bits 2..0, column bits 5..3); wire code = column << 3 | row.
_ORIGINAL_CELLS = {
    (0b000, 0b000): ExeOp.BEQ,   (0b000, 0b001): ExeOp.BNE,
    (0b000, 0b010): ExeOp.BGTZ,  (0b000, 0b011): ExeOp.BLEZ,
    (0b000, 0b100): ExeOp.BLTZ,  (0b000, 0b101): ExeOp.BLTZAL,
    (0b000, 0b110): ExeOp.BGEZ,  (0b000, 0b111): ExeOp.BGEZAL,
    (0b001, 0b001): ExeOp.JR,    (0b001, 0b010): ExeOp.JALR,
    (0b001, 0b011): ExeOp.JAL,
    (0b010, 0b000): ExeOp.ADD,   (0b010, 0b001): ExeOp.SUB,
    (0b010, 0b010): ExeOp.ADDU,  (0b010, 0b011): ExeOp.SUBU,
    (0b010, 0b100): ExeOp.AND,   (0b010, 0b101): ExeOp.OR,
    (0b010, 0b110): ExeOp.XOR,   (0b010, 0b111): ExeOp.NOR,
    (0b011, 0b000): ExeOp.EXC,   (0b011, 0b001): ExeOp.EXCS,
    (0b011, 0b010): ExeOp.MA,    (0b011, 0b011): ExeOp.COR,
    (0b011, 0b100): ExeOp.SLTU,  (0b011, 0b101): ExeOp.SLT,
    (0b100, 0b000): ExeOp.SLLV,  (0b100, 0b001): ExeOp.SRLV,
    (0b100, 0b010): ExeOp.SRAV,  (0b100, 0b011): ExeOp.NOP,
    (0b100, 0b100): ExeOp.SLL,   (0b100, 0b101): ExeOp.SRL,
    (0b100, 0b110): ExeOp.SRA,
    (0b110, 0b000): ExeOp.MULTU, (0b110, 0b001): ExeOp.MULT,
    (0b110, 0b010): ExeOp.DIVU,  (0b110, 0b011): ExeOp.DIV,
    (0b110, 0b100): ExeOp.MTHI,  (0b110, 0b101): ExeOp.MTLO,
    (0b110, 0b110): ExeOp.MFHI,  (0b110, 0b111): ExeOp.MFLO,
}

_OPTIMIZED_CELLS = dict(_ORIGINAL_CELLS)
for _cell in [(0b010, 0b000), (0b010, 0b001), (0b100, 0b011)]:
    del _OPTIMIZED_CELLS[_cell]  # ADD, SUB, NOP move
_OPTIMIZED_CELLS.update({
    (0b101, 0b000): ExeOp.ADD,
    (0b101, 0b001): ExeOp.SUB,
    (0b111, 0b000): ExeOp.NOP,
    (0b011, 0b110): ExeOp.LUI,
})


def _wire_map(cells):
    return {op: (col << 3) | row for (row, col), op in cells.items()}


EXE_WIRE = {
    ORIGINAL: _wire_map(_ORIGINAL_CELLS),
    OPTIMIZED: _wire_map(_OPTIMIZED_CELLS),
}

EXE_CELLS = {ORIGINAL: _ORIGINAL_CELLS, OPTIMIZED: _OPTIMIZED_CELLS}


def exe_wire(op: ExeOp, mode: str) -> int:
    return EXE_WIRE[mode][op]


class AccType(IntEnum):
    READ = 0b00
    WRITE = 0b01
    IMM = 0b10   # immediate travels on the offset channel, no memory access
    NONE = 0b11


class DataType(IntEnum):
    N = 0
    WORD = 1
    WORD_LEFT = 2
    WORD_RIGHT = 3
    HALF_SIGNED = 4
    HALF_UNSIGNED = 5
    BYTE_SIGNED = 6
    BYTE_UNSIGNED = 7


# With AccType.IMM the data-type field has no memory meaning; exception
# operations reuse it as the cause tag that rides down to the report sites.
class ExcTag(IntEnum):
    NONE = 0
    OV = 1
    ADEL = 2
    ADES = 3
    SYS = 4
    BP = 5
    RI = 6
    INT = 7


class WbTarget(IntEnum):
    CP0 = 0
    CPU = 1


class WbAction(Enum):
    NONE = "none"
    REG_WRITE = "write"
    REG_RESET = "reset"
    EXCEPTION_WRITE = "cp0write"  # CP0-targeted write (exception EPC, MTC0)


@dataclass(frozen=True)
class MemCtrl:
    acc: AccType
    dtype: int  # DataType, or an ExcTag when acc is IMM on exception ops

    def wire(self) -> int:
        return (self.acc << 3) | (self.dtype & 0x7)

    @classmethod
    def from_wire(cls, w: int) -> "MemCtrl":
        return cls(AccType((w >> 3) & 0x3), w & 0x7)


_WB_WIRE = {
    (WbTarget.CPU, WbAction.NONE): 0b100,
    (WbTarget.CPU, WbAction.REG_WRITE): 0b110,
    (WbTarget.CPU, WbAction.REG_RESET): 0b111,
    (WbTarget.CP0, WbAction.NONE): 0b000,
    (WbTarget.CP0, WbAction.EXCEPTION_WRITE): 0b010,
}
_WB_UNWIRE = {v: k for k, v in _WB_WIRE.items()}


@dataclass(frozen=True)
class WbCtrl:
    target: WbTarget
    action: WbAction

    def __post_init__(self):
        if self.action in (WbAction.REG_WRITE, WbAction.REG_RESET):
            assert self.target == WbTarget.CPU
        if self.action == WbAction.EXCEPTION_WRITE:
            assert self.target == WbTarget.CP0

    def wire(self) -> int:
        return _WB_WIRE[(self.target, self.action)]

    @property
    def writes_register_path(self) -> bool:
        """True when the register-address path (IDRd/EXRd/MEMRd) is in use."""
        return self.action is not WbAction.NONE

    @classmethod
    def from_wire(cls, w: int) -> "WbCtrl":
        return cls(*_WB_UNWIRE[w])


WB_CPU_NONE = WbCtrl(WbTarget.CPU, WbAction.NONE)
WB_CPU_WRITE = WbCtrl(WbTarget.CPU, WbAction.REG_WRITE)
WB_CPU_RESET = WbCtrl(WbTarget.CPU, WbAction.REG_RESET)
WB_CP0_WRITE = WbCtrl(WbTarget.CP0, WbAction.EXCEPTION_WRITE)


@dataclass(frozen=True)
class ControlBundle:
    exe: ExeOp
    mem: MemCtrl
    wb: WbCtrl

    def pack(self, mode: str = ORIGINAL) -> int:
        """Serialise to the {{1,2},{2,3},6}-bit control channel layout."""
        return (self.wb.wire() << 11) | (self.mem.wire() << 6) | \
            exe_wire(self.exe, mode)


_ALU_R = {
    "add": ExeOp.ADD, "addu": ExeOp.ADDU, "sub": ExeOp.SUB,
    "subu": ExeOp.SUBU, "and": ExeOp.AND, "or": ExeOp.OR,
    "xor": ExeOp.XOR, "nor": ExeOp.NOR, "slt": ExeOp.SLT,
    "sltu": ExeOp.SLTU,
}
_ALU_I = {
    "addi": ExeOp.ADD, "addiu": ExeOp.ADDU, "andi": ExeOp.AND,
    "ori": ExeOp.OR, "xori": ExeOp.XOR, "slti": ExeOp.SLT,
    "sltiu": ExeOp.SLTU,
}
_SHIFTS = {
    "sll": ExeOp.SLL, "srl": ExeOp.SRL, "sra": ExeOp.SRA,
    "sllv": ExeOp.SLLV, "srlv": ExeOp.SRLV, "srav": ExeOp.SRAV,
}
_MULT = {
    "mult": ExeOp.MULT, "multu": ExeOp.MULTU, "div": ExeOp.DIV,
    "divu": ExeOp.DIVU, "mthi": ExeOp.MTHI, "mtlo": ExeOp.MTLO,
    "mfhi": ExeOp.MFHI, "mflo": ExeOp.MFLO,
}
_BRANCHES = {
    "beq": ExeOp.BEQ, "bne": ExeOp.BNE, "blez": ExeOp.BLEZ,
    "bgtz": ExeOp.BGTZ, "bltz": ExeOp.BLTZ, "bgez": ExeOp.BGEZ,
    "bltzal": ExeOp.BLTZAL, "bgezal": ExeOp.BGEZAL,
}
LOAD_DTYPE = {
    "lw": DataType.WORD, "lwl": DataType.WORD_LEFT,
    "lwr": DataType.WORD_RIGHT, "lh": DataType.HALF_SIGNED,
    "lhu": DataType.HALF_UNSIGNED, "lb": DataType.BYTE_SIGNED,
    "lbu": DataType.BYTE_UNSIGNED,
}
STORE_DTYPE = {
    "sw": DataType.WORD, "swl": DataType.WORD_LEFT,
    "swr": DataType.WORD_RIGHT, "sh": DataType.HALF_SIGNED,
    "sb": DataType.BYTE_SIGNED,
}

EXC_TAG_FOR = {"syscall": ExcTag.SYS, "break": ExcTag.BP, RESERVED: ExcTag.RI}


def control_for(instr: Instruction, mode: str = ORIGINAL) -> ControlBundle:
    """Control bundle for a decoded instruction.

    Reserved instructions map to the exception operation (the delay-slot EXCS
    variant is substituted by the pipeline, which owns the slot flag).
    """
    m = instr.mnemonic
    none = MemCtrl(AccType.NONE, DataType.N)
    imm = MemCtrl(AccType.IMM, DataType.N)

    if m in EXC_TAG_FOR:
        return ControlBundle(ExeOp.EXC,
                             MemCtrl(AccType.IMM, EXC_TAG_FOR[m]),
                             WB_CP0_WRITE)
    if m in LOAD_DTYPE:
        return ControlBundle(ExeOp.MA, MemCtrl(AccType.READ, LOAD_DTYPE[m]),
                             WB_CPU_WRITE)
    if m in STORE_DTYPE:
        return ControlBundle(ExeOp.MA, MemCtrl(AccType.WRITE, STORE_DTYPE[m]),
                             WB_CPU_NONE)
    if m in _ALU_R:
        return ControlBundle(_ALU_R[m], none, WB_CPU_WRITE)
    if m in _ALU_I:
        return ControlBundle(_ALU_I[m], imm, WB_CPU_WRITE)
    if m == "lui":
        op = ExeOp.LUI if mode == OPTIMIZED else ExeOp.SLL
        return ControlBundle(op, imm, WB_CPU_WRITE)
    if m in _SHIFTS:
        return ControlBundle(_SHIFTS[m], none, WB_CPU_WRITE)
    if m == "nop":
        return ControlBundle(ExeOp.NOP, none, WB_CPU_NONE)
    if m in _MULT:
        wb = WB_CPU_WRITE if m in ("mfhi", "mflo") else WB_CPU_NONE
        return ControlBundle(_MULT[m], none, wb)
    if m in _BRANCHES:
        wb = WB_CPU_WRITE if m in ("bltzal", "bgezal") else WB_CPU_NONE
        return ControlBundle(_BRANCHES[m], imm, wb)
    if m == "j":
        return ControlBundle(ExeOp.NOP, none, WB_CPU_NONE)
    if m == "jal":
        return ControlBundle(ExeOp.JAL, none, WB_CPU_WRITE)
    if m == "jr":
        return ControlBundle(ExeOp.JR, none, WB_CPU_NONE)
    if m == "jalr":
        return ControlBundle(ExeOp.JALR, none, WB_CPU_WRITE)
    if m == "mtc0":
        return ControlBundle(ExeOp.OR, none, WB_CP0_WRITE)
    if m == "mfc0":
        return ControlBundle(ExeOp.COR, none, WB_CPU_WRITE)
    if m == "rfe":
        return ControlBundle(ExeOp.COR, none, WB_CP0_WRITE)
    raise ValueError(f"no control mapping for {m!r}")
