"""Channel inventory and payload packing for the processor wiring.

The colour vector carried end-to-end has four bits: one per hazard-raising
stage (ID, EX, MEM) plus the interrupt bit owned by the write-back stage,
highest priority last.  Channels the paper's tables list as 3-bit-coloured
widen by one bit accordingly, and the hazard-report channels all carry the
full request layout {colour, 3-bit stage, kind bit, 32-bit target} so that
address-error reports can deliver a return address.

Control channels carry the instruction's colour vector in front of the
encoded control bits; the execute/memory-stage colour checks need it there.
"""

from __future__ import annotations

from ..hazards.colour import colour_pack, colour_unpack
from ..isa.control import MemCtrl, WbCtrl

K = 4  # colour bits: (ID, EX, MEM, INT), priority grows with index

S_ID, S_EX, S_MEM, S_INT = 0, 1, 2, 3

# request stage-field codes (3 bits; the PC stream needs its own value)
RQ_ID, RQ_EX, RQ_MEM, RQ_INT, RQ_PC = 0, 1, 2, 3, 4

COLOURED_WIDTH = K + 32
REQUEST_WIDTH = K + 3 + 1 + 32
CTRL_EX_WIDTH = K + 14      # colour + {wb 3, mem 5, exe 6}
CTRL_MEM_WIDTH = K + 8      # colour + {wb 3, mem 5}
CTRL_WB_WIDTH = K + 3       # colour + {wb 3}


def pack_coloured(colour: tuple, value: int) -> int:
    return (colour_pack(colour) << 32) | (value & 0xFFFFFFFF)


def unpack_coloured(v: int):
    return colour_unpack(v >> 32, K), v & 0xFFFFFFFF


def pack_request(colour: tuple, stage: int, exception: bool,
                 target: int) -> int:
    return (colour_pack(colour) << 36) | ((stage & 0x7) << 33) | \
        ((1 if exception else 0) << 32) | (target & 0xFFFFFFFF)


def unpack_request(v: int):
    return (colour_unpack(v >> 36, K), (v >> 33) & 0x7,
            bool((v >> 32) & 1), v & 0xFFFFFFFF)


def pack_exctrl(colour: tuple, packed_bundle: int) -> int:
    return (colour_pack(colour) << 14) | packed_bundle


def unpack_exctrl(v: int):
    return colour_unpack(v >> 14, K), (v >> 11) & 0x7, (v >> 6) & 0x1F, \
        v & 0x3F


def pack_memctrl(colour: tuple, mem: MemCtrl, wb: WbCtrl) -> int:
    return (colour_pack(colour) << 8) | (mem.wire() << 3) | wb.wire()


def unpack_memctrl(v: int):
    return colour_unpack(v >> 8, K), MemCtrl.from_wire((v >> 3) & 0x1F), \
        WbCtrl.from_wire(v & 0x7)


def pack_wbctrl(colour: tuple, wb: WbCtrl) -> int:
    return (colour_pack(colour) << 3) | wb.wire()


def unpack_wbctrl(v: int):
    return colour_unpack(v >> 3, K), WbCtrl.from_wire(v & 0x7)


def pack_regread(rs: int, rt: int, wd: int) -> int:
    return (rs << 10) | (rt << 5) | wd


def unpack_regread(v: int):
    return (v >> 10) & 0x1F, (v >> 5) & 0x1F, v & 0x1F


class RdLayout:
    """{data, [index snapshot,] register} packing for the PIDRd/IDRd/EXRd
    path, the MEMRd tail and the RegWrite command; the snapshot field exists
    only in the table-based hazard mode."""

    def __init__(self, with_snapshot: bool):
        self.with_snapshot = with_snapshot
        self.snap_bits = 2 if with_snapshot else 0
        self.rd_width = 37 + self.snap_bits
        self.memrd_width = 5 + self.snap_bits
        self.regwrite_width = 38 + self.snap_bits

    def pack_rd(self, data: int, snap: int, rd: int) -> int:
        if self.with_snapshot:
            return ((data & 0xFFFFFFFF) << 7) | ((snap & 3) << 5) | rd
        return ((data & 0xFFFFFFFF) << 5) | rd

    def unpack_rd(self, v: int):
        if self.with_snapshot:
            return v >> 7, (v >> 5) & 3, v & 0x1F
        return v >> 5, 0, v & 0x1F

    def pack_memrd(self, snap: int, rd: int) -> int:
        return ((snap & 3) << 5) | rd if self.with_snapshot else rd

    def unpack_memrd(self, v: int):
        return ((v >> 5) & 3, v & 0x1F) if self.with_snapshot else (0, v & 0x1F)

    def pack_regwrite(self, data: int, snap: int, rd: int, write: bool) -> int:
        v = ((data & 0xFFFFFFFF) << 6) | (rd << 1) | (1 if write else 0)
        if self.with_snapshot:
            v |= (snap & 3) << 38
        return v

    def unpack_regwrite(self, v: int):
        return ((v >> 6) & 0xFFFFFFFF, (v >> 38) & 3 if self.with_snapshot
                else 0, (v >> 1) & 0x1F, bool(v & 1))


def pack_cp0w(data: int, rd: int, write: bool) -> int:
    return ((data & 0xFFFFFFFF) << 6) | (rd << 1) | (1 if write else 0)


def unpack_cp0w(v: int):
    return (v >> 6) & 0xFFFFFFFF, (v >> 1) & 0x1F, bool(v & 1)


def pack_memadd(write: bool, dtype: int, addr: int) -> int:
    return ((1 if write else 0) << 35) | ((dtype & 0x7) << 32) | \
        (addr & 0xFFFFFFFF)


def unpack_memadd(v: int):
    return bool((v >> 35) & 1), (v >> 32) & 0x7, v & 0xFFFFFFFF


def channel_table(layout: RdLayout):
    """(name, width, direction) for the full processor wiring."""
    return [
        ("NPC", COLOURED_WIDTH, "pull"),
        ("PCvalue", COLOURED_WIDTH, "push"),
        ("CInsAdd", COLOURED_WIDTH, "push"),
        ("CIns", COLOURED_WIDTH, "push"),
        ("PCplus4", COLOURED_WIDTH, "push"),
        ("BaseAddID", 32, "push"),
        ("BaseAddEX", 32, "push"),
        ("BaseAddMEM", 32, "push"),
        ("IDch", REQUEST_WIDTH, "push"),
        ("EXch", REQUEST_WIDTH, "push"),
        ("MEMch", REQUEST_WIDTH, "push"),
        ("WBch", REQUEST_WIDTH, "push"),
        ("NTarget1", REQUEST_WIDTH, "push"),
        ("NTarget2", REQUEST_WIDTH, "push"),
        ("EXCtrl", CTRL_EX_WIDTH, "push"),
        ("MEMCtrl", CTRL_MEM_WIDTH, "push"),
        ("WBCtrl", CTRL_WB_WIDTH, "push"),
        ("Offset32", 32, "push"),
        ("Sa", 5, "push"),
        ("RegRead", 15, "push"),
        ("RegWrite", layout.regwrite_width, "push"),
        ("ReadData0", 32, "push"),
        ("ReadData1", 32, "push"),
        ("FRACtrl", 2, "push"),
        ("FWCtrl", 4, "push"),
        ("FOp0", 32, "push"),
        ("FOp1", 32, "push"),
        ("Op0", 32, "push"),
        ("Op1", 32, "push"),
        ("FEXRes", 32, "push"),
        ("FMEMRes", 32, "push"),
        ("EXRes", 32, "push"),
        ("MEMRes", 32, "push"),
        ("MemD", 32, "push"),
        ("PIDRd", layout.rd_width, "push"),
        ("CIDRd", 5, "push"),
        ("IDRd", layout.rd_width, "push"),
        ("EXRd", layout.rd_width, "push"),
        ("MEMRd", layout.memrd_width, "push"),
        ("MemAdd", 36, "push"),
        ("WriteData", 32, "push"),
        ("MemData", 32, "push"),
        ("CP0RAdd", 5, "push"),
        ("CP0RData", 32, "push"),
        ("CP0W1", 38, "push"),
        ("CP0W2", 38, "push"),
        ("IRQ", 3, "push"),
        ("CP0Int", 3, "push"),
    ]
