"""The asynchronous processor: one kernel process per functional block.

Stage processes communicate only over the declared channels.  The program
counter loop, the address arbitration unit with its two leaf arbiters, the
decoder, the register bank with the hazard structures, the execute unit with
the forwarding unit and operand multiplexers, the memory interface, the
write-back unit and the coprocessor are each a resumable state machine
scheduled by the event kernel.

Halt convention: a break instruction with code 0x3FF stops the decoder after
two drain rounds (architectural no-ops excluded from the retire trace) that
let in-flight forwarded results find their consumers; the machine then
quiesces under channel backpressure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..arch.bits import (
    load_byte, load_half, lwl_merge, lwr_merge, s32, store_byte, store_half,
    swl_merge, swr_merge, sx16, u32,
)
from ..arch.oracle import RetireRecord
from ..arch.state import (
    CP0_CAUSE, CP0_EPC, CP0_STATUS, EXC_VECTOR, ExcCode, Memory,
    cause_ip_bit, set_exc_code, status_pop, status_push,
)
from ..hazards import (
    Dhdt, NON, Verdict, WBR, colour_check_stage, colour_flip, colour_init,
    dhdq_init, dhdq_read, dhdq_write, dhdt_read, dhdt_write, fraq_init,
    fraq_step,
)
from ..isa import encoding
from ..isa.control import (
    AccType, DataType, EXE_WIRE, ExcTag, ExeOp, MemCtrl, OPTIMIZED, ORIGINAL,
    WB_CPU_NONE, WB_CPU_RESET, WB_CPU_WRITE, WbAction, WbCtrl, WbTarget,
    control_for,
)
from ..isa.encoding import decode, is_halt
from ..kernel import (
    ArbiterPolicy, ChannelSpec, Delay, Halt, Peek, ProcessSpec, Recv, Select,
    Send, Simulator, Work,
)
from . import channels as ch
from .channels import (
    K, RQ_EX, RQ_ID, RQ_INT, RQ_MEM, RQ_PC, RdLayout, S_EX, S_ID, S_INT,
    S_MEM, channel_table, pack_coloured, pack_cp0w, pack_exctrl, pack_memadd,
    pack_memctrl, pack_regread, pack_request, pack_wbctrl, unpack_coloured,
    unpack_cp0w, unpack_exctrl, unpack_memadd, unpack_memctrl,
    unpack_regread, unpack_request, unpack_wbctrl,
)

DEFAULT_DELAYS = {
    "PC": {"step": 20},
    "ADD4": {"add": 20},
    "InsMem": {"service": 20},
    "DataMem": {"service": 20},
    "ArbIF": {"arb": 10},
    "ArbEM": {"arb": 10},
    "AAU": {"arbitrate": 40},
    "DeCode": {"decode": 150},
    "RegBank": {"read": 125, "write": 60},
    "MuxOp0": {"mux": 5},
    "MuxOp1": {"mux": 5},
    "MuxIDRd": {"mux": 5},
    "FWunit": {"fw": 30},
    # execute totals 200 ticks: 1.6x the register bank
    "EXEunit": {"receive": 30, "execute": 170, "mult": 350, "fast": 30},
    "MemInt": {"mem": 60},
    "WBUnit": {"wb": 60},
    "CP0Read": {"serve": 30},
    "CP0Write": {"serve": 30},
    "PinDriver": {},
}

OPTIMIZED_DELAYS = {
    # parallel colour check and leaner receive control
    "EXEunit": {"receive": 10, "execute": 150, "mult": 330, "fast": 20},
}


@dataclass(frozen=True)
class ProcessorConfig:
    hazard_impl: str = "dhdq"         # dhdq | dhdt
    delay_slot: bool = True
    exe_mode: str = ORIGINAL          # original | optimized
    interrupt_scheme: str = "wb"      # wb | aau
    seed: int = 0
    interrupt_schedule: tuple = ()    # ((ticks, pin), ...)
    delay_overrides: dict = field(default_factory=dict)
    log_events: bool = False
    max_events: int = 4_000_000
    debug_corrupt_fwcase: Optional[int] = None

    def delays(self, block: str) -> dict:
        base = dict(DEFAULT_DELAYS[block])
        if self.exe_mode == OPTIMIZED and block in OPTIMIZED_DELAYS:
            base.update(OPTIMIZED_DELAYS[block])
        base.update(self.delay_overrides.get(block, {}))
        return base


class PipelineFault(Exception):
    """Bookkeeping violation inside the pipeline (not an architectural
    exception): e.g. a register write with no pending hazard entry."""


class Deadlock(Exception):
    def __init__(self, blocked):
        names = "; ".join(f"{p} on {','.join(cs)}" for p, cs in blocked)
        super().__init__(f"pipeline deadlock: {names}")
        self.blocked = blocked


CONST_SHIFTS = (ExeOp.SLL, ExeOp.SRL, ExeOp.SRA)
VAR_SHIFTS = (ExeOp.SLLV, ExeOp.SRLV, ExeOp.SRAV)
BRANCH_OPS = (ExeOp.BEQ, ExeOp.BNE, ExeOp.BLEZ, ExeOp.BGTZ, ExeOp.BLTZ,
              ExeOp.BGEZ, ExeOp.BLTZAL, ExeOp.BGEZAL)
LINK_BRANCHES = (ExeOp.BLTZAL, ExeOp.BGEZAL)
BASE_OPS = BRANCH_OPS + (ExeOp.JAL, ExeOp.JALR, ExeOp.EXC, ExeOp.EXCS,
                         ExeOp.ADD, ExeOp.SUB)
ALU_OPS = (ExeOp.ADD, ExeOp.SUB, ExeOp.ADDU, ExeOp.SUBU, ExeOp.AND,
           ExeOp.OR, ExeOp.XOR, ExeOp.NOR, ExeOp.SLT, ExeOp.SLTU)
MULT_OPS = (ExeOp.MULT, ExeOp.MULTU, ExeOp.DIV, ExeOp.DIVU, ExeOp.MTHI,
            ExeOp.MTLO, ExeOp.MFHI, ExeOp.MFLO)


def needs_offset(mem: MemCtrl) -> bool:
    return mem.acc != AccType.NONE


def needs_sa(exe: ExeOp) -> bool:
    return exe in CONST_SHIFTS


def needs_base(exe: ExeOp) -> bool:
    return exe in BASE_OPS


def produces_exres(mem: MemCtrl, wb: WbCtrl) -> bool:
    return mem.acc in (AccType.READ, AccType.WRITE) or \
        wb.writes_register_path


def sends_memd(mem: MemCtrl) -> bool:
    if mem.acc == AccType.WRITE:
        return True
    return mem.acc == AccType.READ and mem.dtype in (
        DataType.WORD_LEFT, DataType.WORD_RIGHT)


def is_mem_op(mem: MemCtrl) -> bool:
    return mem.acc in (AccType.READ, AccType.WRITE)


def cpu_write_or_reset(wb: WbCtrl) -> bool:
    return wb.action in (WbAction.REG_WRITE, WbAction.REG_RESET)


# exception-code selector carried in the low bits of a report target
SEL_CODE = {
    (RQ_ID, 0): ExcCode.RI,
    (RQ_ID, 1): ExcCode.SYS,
    (RQ_ID, 2): ExcCode.BP,
    (RQ_EX, 0): ExcCode.OV,
    (RQ_MEM, 0): ExcCode.ADEL,
    (RQ_MEM, 1): ExcCode.ADES,
}
TAG_SEL = {ExcTag.RI: 0, ExcTag.SYS: 1, ExcTag.BP: 2}
ID_REPORT_PAYLOAD = 1024  # fixed report value on the decoder's hazard channel


def regread_triple(ins) -> tuple:
    m, f = ins.mnemonic, ins.fields
    if m in encoding.LOADS:
        if m in ("lwl", "lwr"):
            return f["rs"], f["rt"], f["rt"]
        return f["rs"], 0, f["rt"]
    if m in encoding.STORES:
        return f["rs"], f["rt"], 0
    if m in ("add", "addu", "sub", "subu", "and", "or", "xor", "nor",
             "slt", "sltu"):
        return f["rs"], f["rt"], f["rd"]
    if m in ("addi", "addiu", "slti", "sltiu", "andi", "ori", "xori"):
        return f["rs"], 0, f["rt"]
    if m == "lui":
        return 0, 0, f["rt"]
    if m in ("sll", "srl", "sra"):
        return 0, f["rt"], f["rd"]
    if m in ("sllv", "srlv", "srav"):
        return f["rs"], f["rt"], f["rd"]
    if m in ("mult", "multu", "div", "divu"):
        return f["rs"], f["rt"], 0
    if m in ("mfhi", "mflo"):
        return 0, 0, f["rd"]
    if m in ("mthi", "mtlo"):
        return f["rs"], 0, 0
    if m in ("beq", "bne"):
        return f["rs"], f["rt"], 0
    if m in ("blez", "bgtz", "bltz", "bgez"):
        return f["rs"], 0, 0
    if m in ("bltzal", "bgezal"):
        return f["rs"], 0, 31
    if m == "j":
        return 0, 0, 0
    if m == "jal":
        return 0, 0, 31
    if m == "jr":
        return f["rs"], 0, 0
    if m == "jalr":
        return f["rs"], 0, f["rd"]
    if m == "mtc0":
        return 0, f["rt"], 0
    if m == "mfc0":
        return 0, 0, f["rt"]
    # nop, rfe, syscall, break, reserved
    return 0, 0, 0


def offset_value(ins) -> int:
    m, f = ins.mnemonic, ins.fields
    if m in ("andi", "ori", "xori"):
        return f["imm"]
    if m == "lui":
        return f["imm"]
    if m in encoding.BRANCHES:
        return u32(sx16(f["imm"]) << 2)
    if m in ("syscall", "break") or ins.reserved:
        return 0
    return u32(sx16(f["imm"]))


class Core:
    """Shared mutable state the block processes close over, plus run
    artefacts (retire trace, debug records)."""

    def __init__(self, config: ProcessorConfig, image):
        self.config = config
        self.entry = image.entry_point
        self.mem = Memory(image.words)
        self.regs = [0] * 32
        self.cp0 = [0] * 32
        self.hi = 0
        self.lo = 0
        self.retires: list[RetireRecord] = []
        self.halted = False
        self.halt_confirmed = False
        self.halt_addr = 0
        self.aau_debug: list[dict] = []
        self.fop_log: list[tuple] = []  # (operand index, value, meta addr)
        self.layout = RdLayout(config.hazard_impl == "dhdt")
        self.wire_to_op = {w: op
                           for op, w in EXE_WIRE[config.exe_mode].items()}


# -- block behaviours --------------------------------------------------------


def pc_proc(core):
    def behavior(p):
        colour, addr = colour_init(K), core.entry
        while True:
            yield Work("step")
            v = pack_coloured(colour, addr)
            yield Send("PCvalue", v)
            yield Send("CInsAdd", v)
            got = yield Recv("NPC")
            colour, addr = unpack_coloured(got[1])
    return behavior


def add4_proc(core):
    def behavior(p):
        while True:
            got = yield Recv("PCvalue")
            colour, addr = unpack_coloured(got[1])
            yield Work("add")
            yield Send("PCplus4", pack_coloured(colour, u32(addr + 4)))
            yield Send("BaseAddID", u32(addr + 4))
    return behavior


def insmem_proc(core):
    def behavior(p):
        while True:
            got = yield Recv("CInsAdd")
            colour, addr = unpack_coloured(got[1])
            yield Work("service")
            word = core.mem.words.get(addr & ~3, 0)  # runahead reads as nop
            yield Send("CIns", pack_coloured(colour, word), {"addr": addr})
    return behavior


def leaf_arbiter(core, name, in_pc, in_req, out):
    """Two-way arbiter; converts the program-counter stream into requests."""
    def behavior(p):
        while True:
            which, v, meta = yield Select((in_pc, in_req))
            yield Work("arb")
            if which == in_pc:
                colour, addr = unpack_coloured(v)
                v = pack_request(colour, RQ_PC, False, addr)
            yield Send(out, v, meta)
    return behavior


def leaf_arbiter_plain(core, name, in_a, in_b, out):
    def behavior(p):
        while True:
            which, v, meta = yield Select((in_a, in_b))
            yield Work("arb")
            yield Send(out, v, meta)
    return behavior


def _request_of(v):
    colour, stage, exc, target = unpack_request(v)
    return colour, stage, exc, target


def aau_proc(core):
    scheme_aau = core.config.interrupt_scheme == "aau"

    def exc_code_of(stage, target):
        if stage == RQ_INT:
            return ExcCode.INT
        return SEL_CODE.get((stage, target & 3), ExcCode.RI)

    def accept(colour, stage, aauc):
        # program-counter requests need an exact match; stage requests pass
        # when every strictly-higher-priority bit agrees
        if stage == RQ_PC:
            return colour == aauc
        return colour[stage + 1:] == aauc[stage + 1:]

    def behavior(p):
        aauc = colour_init(K)
        last_issued = core.entry
        inputs = ("NTarget1", "NTarget2", "WBch", "CP0Int") if scheme_aau \
            else ("NTarget1", "NTarget2", "WBch")
        while True:
            which, v, meta = yield Select(inputs)
            yield Work("arbitrate")
            if which == "CP0Int":
                # alternative interrupt scheme: flip here, compute back point
                pending = yield Peek(("NTarget1", "NTarget2"))
                chosen = None
                for cid, t, pv, pm in sorted(pending, key=lambda x: x[1]):
                    colour, stage, exc, target = _request_of(pv)
                    if stage == RQ_PC or not accept(colour, stage, aauc):
                        continue
                    if exc and (chosen is None or not chosen[0]):
                        chosen = (True, target)
                    elif not exc and chosen is None:
                        chosen = (False, target)
                if chosen is not None and chosen[0]:
                    back = chosen[1] & 0xFFFFFFFC
                    case = "exception"
                elif chosen is not None:
                    back = chosen[1]
                    case = "branch"
                else:
                    back = u32(last_issued + 4)
                    case = "next"
                core.aau_debug.append(
                    {"case": case, "last_issued": last_issued, "back": back})
                aauc = colour_flip(aauc, S_INT)
                yield Send("CP0W2", pack_cp0w(int(ExcCode.INT) << 2,
                                              CP0_CAUSE, True))
                yield Send("CP0W2", pack_cp0w(back, CP0_EPC, True))
                core.retires.append(
                    RetireRecord(back, "<interrupt>", exception=ExcCode.INT))
                yield Send("NPC", pack_coloured(aauc, EXC_VECTOR))
                last_issued = EXC_VECTOR
                continue
            colour, stage, exc, target = _request_of(v)
            if not accept(colour, stage, aauc):
                continue  # superseded: consumed and dropped
            if stage != RQ_PC:
                aauc = colour
            if exc:
                code = exc_code_of(stage, target)
                if stage == RQ_INT:
                    core.retires.append(RetireRecord(
                        target & 0xFFFFFFFC, "<interrupt>",
                        exception=ExcCode.INT))
                yield Send("CP0W2", pack_cp0w(int(code) << 2, CP0_CAUSE,
                                              True))
                yield Send("CP0W2", pack_cp0w(target & 0xFFFFFFFC, CP0_EPC,
                                              True))
                yield Send("NPC", pack_coloured(aauc, EXC_VECTOR))
                last_issued = EXC_VECTOR
            else:
                addr = target & 0xFFFFFFFC
                yield Send("NPC", pack_coloured(aauc, addr))
                last_issued = addr
    return behavior


def decode_proc(core):
    cfg = core.config
    mode = cfg.exe_mode
    slot_mode = cfg.delay_slot

    def behavior(p):
        idc = colour_init(K)
        branch_r = False
        pending = None
        while True:
            if pending is not None:
                colour, word, base = pending
                pending = None
            else:
                got = yield Recv("CIns")
                colour, word = unpack_coloured(got[1])
                got = yield Recv("BaseAddID")
                base = got[1]
                yield Work("decode")
            addr = u32(base - 4)

            verdict, idc = colour_check_stage(S_ID, idc, colour)
            if verdict == Verdict.DISCARD:
                continue
            slot = False
            if branch_r and colour == idc:
                # delayed colour change: this instruction sits in the slot
                idc = colour_flip(idc, S_ID)
                slot = True
            else:
                idc = colour
            branch_r = False

            ins = decode(word)
            bundle = control_for(ins, mode)
            if is_halt(ins):
                # a halt only counts once it retires: send it down as a
                # no-op round with two drain rounds behind it (they give the
                # last writers' forwarded results their consumers), then sink
                # same-stream runahead until either the confirmation lands or
                # a deeper redirect supersedes the halt
                meta = {"addr": addr, "mn": "break", "slot": slot,
                        "halt": True}
                yield Send("RegRead", pack_regread(0, 0, 0), meta)
                packed = (WB_CPU_NONE.wire() << 11) | \
                    (MemCtrl(AccType.NONE, DataType.N).wire() << 6) | \
                    EXE_WIRE[mode][ExeOp.NOP]
                yield Send("EXCtrl", pack_exctrl(colour, packed), meta)
                for _ in range(2):
                    yield from _issue_nop_round(mode, colour)
                while not core.halt_confirmed:
                    got = yield Recv("CIns")
                    c2, w2 = unpack_coloured(got[1])
                    got = yield Recv("BaseAddID")
                    b2 = got[1]
                    yield Work("decode")
                    v2, idc = colour_check_stage(S_ID, idc, c2)
                    if v2 == Verdict.EXECUTE_ADOPT:
                        pending = (c2, w2, b2)
                        break
                if pending is not None:
                    continue  # the halt was wrong-path
                core.halted = True
                core.halt_addr = addr
                yield Halt()
                return
            m = ins.mnemonic
            exe, mem, wb = bundle.exe, bundle.mem, bundle.wb
            rs, rt, wd = regread_triple(ins)
            if wd == 0 and wb.action == WbAction.REG_WRITE:
                wb = WB_CPU_NONE  # writes to $0 are architectural no-ops
            if exe == ExeOp.EXC and slot:
                exe = ExeOp.EXCS

            meta = {"addr": addr, "mn": m, "slot": slot}
            if exe in (ExeOp.EXC, ExeOp.EXCS):
                meta["exc"] = int(SEL_CODE[(RQ_ID, TAG_SEL[mem.dtype])])

            yield Send("RegRead", pack_regread(rs, rt, wd), meta)
            packed = (wb.wire() << 11) | (mem.wire() << 6) | \
                EXE_WIRE[mode][exe]
            # downstream stages see the instruction's fetch-time colour
            yield Send("EXCtrl", pack_exctrl(colour, packed), meta)
            if needs_offset(mem):
                yield Send("Offset32", offset_value(ins))
            if needs_sa(exe):
                sa = 16 if m == "lui" else ins.fields["sa"]
                yield Send("Sa", sa)
            if needs_base(exe):
                yield Send("BaseAddEX", base)
            if wb.target == WbTarget.CP0 and \
                    wb.action == WbAction.EXCEPTION_WRITE:
                cid = {"mtc0": ins.fields.get("rd", 0), "rfe": CP0_STATUS}.get(
                    m, CP0_EPC)
                yield Send("CIDRd", cid)
            if exe == ExeOp.COR:
                yield Send("CP0RAdd",
                           CP0_STATUS if m == "rfe" else ins.fields["rd"])

            if m in ("j", "jal"):
                target = ((addr + 4) & 0xF0000000) | \
                    (ins.fields["target"] << 2)
                flipped = colour_flip(colour, S_ID)
                if slot_mode:
                    branch_r = True
                else:
                    idc = flipped
                yield Send("IDch",
                           pack_request(flipped, RQ_ID, False, target), meta)
            elif exe in (ExeOp.EXC, ExeOp.EXCS):
                sel = TAG_SEL[mem.dtype]
                flipped = colour_flip(colour, S_ID)
                idc = flipped  # exceptions have no delay slot
                yield Send("IDch",
                           pack_request(flipped, RQ_ID, True,
                                        ID_REPORT_PAYLOAD | sel), meta)
    return behavior


def _issue_nop_round(mode, colour):
    meta = {"drain": True, "addr": 0, "mn": "nop", "slot": False}
    yield Send("RegRead", pack_regread(0, 0, 0), meta)
    packed = (WB_CPU_NONE.wire() << 11) | \
        (MemCtrl(AccType.NONE, DataType.N).wire() << 6) | \
        EXE_WIRE[mode][ExeOp.NOP]
    yield Send("EXCtrl", pack_exctrl(colour, packed), meta)


def regbank_proc(core):
    cfg = core.config
    use_dhdt = cfg.hazard_impl == "dhdt"
    layout = core.layout

    def behavior(p):
        dhdq = dhdq_init()
        dhdt = Dhdt.init()
        fraq = fraq_init()
        rounds = 0

        def apply_write(data, snap, rd, write):
            nonlocal dhdq, dhdt
            if write:
                if rd:
                    core.regs[rd] = data
            if rd:
                if use_dhdt:
                    dhdt = dhdt_write(dhdt, rd, snap)
                else:
                    dhdq = dhdq_write(dhdq, rd)

        while True:
            which, v, meta = yield Select(("RegRead", "RegWrite"))
            if which == "RegWrite":
                yield Work("write")
                apply_write(*layout.unpack_regwrite(v))
                continue
            rs, rt, wd = unpack_regread(v)
            yield Work("read")
            out, fraq = fraq_step(fraq, wd != 0)
            yield Send("FRACtrl", (out[0] << 1) | out[1])
            if wd != 0:
                yield Send("PIDRd",
                           layout.pack_rd(core.regs[wd],
                                          dhdt.cur_index if use_dhdt else 0,
                                          wd))
            if use_dhdt:
                fw0, fw1, dhdt = dhdt_read(dhdt, rs, rt, wd)
                if fw0 > WBR:
                    fw0 = NON
                if fw1 > WBR:
                    fw1 = NON
            else:
                fw0, fw1, dhdq = dhdq_read(dhdq, rs, rt, wd)
            if cfg.debug_corrupt_fwcase is not None and \
                    rounds == cfg.debug_corrupt_fwcase:
                fw0 = NON if fw0 != NON else 1
            rounds += 1
            if fw0 == NON:
                yield Send("ReadData0", core.regs[rs] if rs else 0)
            if fw1 == NON:
                yield Send("ReadData1", core.regs[rt] if rt else 0)
            yield Send("FWCtrl", (fw0 << 2) | fw1)
            if WBR in (fw0, fw1):
                got = yield Recv("RegWrite")
                apply_write(*layout.unpack_regwrite(got[1]))
                if fw0 == WBR:
                    yield Send("ReadData0", core.regs[rs] if rs else 0)
                if fw1 == WBR:
                    yield Send("ReadData1", core.regs[rt] if rt else 0)
    return behavior


def fwunit_proc(core):
    def behavior(p):
        while True:
            got = yield Recv("FRACtrl")
            fra = got[1]
            yield Work("fw")
            # the control receives run in parallel with the forwarded-result
            # receives in the source model; taking the control first keeps
            # the register bank's round from waiting on a later write-back
            got = yield Recv("FWCtrl")
            fw0, fw1 = (got[1] >> 2) & 3, got[1] & 3
            fex = fmem = None
            if fra & 2:
                got = yield Recv("FEXRes")
                fex = got[1]
            if fra & 1:
                got = yield Recv("FMEMRes")
                fmem = got[1]
            for idx, fw in ((0, fw0), (1, fw1)):
                if fw == 1:
                    yield Send(f"FOp{idx}", fex)
                    core.fop_log.append((idx, fex))
                elif fw == 2:
                    yield Send(f"FOp{idx}", fmem)
                    core.fop_log.append((idx, fmem))
    return behavior


def mux_proc(core, name, in_a, in_b, out):
    def behavior(p):
        while True:
            which, v, meta = yield Select((in_a, in_b))
            yield Work("mux")
            yield Send(out, v, meta)
    return behavior


def mux_idrd_proc(core):
    layout = core.layout

    def behavior(p):
        while True:
            which, v, meta = yield Select(("PIDRd", "CIDRd"))
            yield Work("mux")
            if which == "CIDRd":
                v = layout.pack_rd(0, 0, v)
            yield Send("IDRd", v, meta)
    return behavior


def exe_proc(core):
    cfg = core.config
    slot_mode = cfg.delay_slot
    layout = core.layout

    def behavior(p):
        exc_colour = colour_init(K)
        branch_r = False
        slot_s = False

        while True:
            got = yield Recv("EXCtrl")
            meta = dict(got[2] or {})
            colour, wb_w, mem_w, exe_w = unpack_exctrl(got[1])
            exe = core.wire_to_op[exe_w]
            mem = MemCtrl.from_wire(mem_w)
            wb = WbCtrl.from_wire(wb_w)
            yield Work("receive")

            offset = sa = base = cp0data = None
            idrd = (0, 0, 0)
            if needs_offset(mem):
                got = yield Recv("Offset32")
                offset = got[1]
            if needs_sa(exe):
                got = yield Recv("Sa")
                sa = got[1]
            if needs_base(exe):
                got = yield Recv("BaseAddEX")
                base = got[1]
            if exe == ExeOp.COR:
                got = yield Recv("CP0RData")
                cp0data = got[1]
            if wb.writes_register_path:
                got = yield Recv("IDRd")
                idrd = layout.unpack_rd(got[1])
            got = yield Recv("Op0")
            op0 = got[1]
            got = yield Recv("Op1")
            op1 = got[1]

            verdict, exc_colour = colour_check_stage(S_EX, exc_colour, colour)
            if verdict == Verdict.DISCARD:
                slot_s = False
                if wb.action == WbAction.REG_WRITE:
                    # rejected writer: restore path unmarks the register and
                    # feeds dependants the original value
                    old, snap, rd = idrd
                    yield Work("execute")
                    yield Send("MEMCtrl",
                               pack_memctrl(colour,
                                            MemCtrl(AccType.NONE, DataType.N),
                                            WB_CPU_RESET),
                               dict(meta, wp=True))
                    yield Send("EXRd", layout.pack_rd(old, snap, rd))
                    yield Send("EXRes", old)
                continue
            if slot_mode and branch_r and colour == exc_colour:
                exc_colour = colour_flip(exc_colour, S_EX)
                slot_s = True
            else:
                exc_colour = colour
            branch_r = False
            in_slot = slot_s or bool(meta.get("slot"))

            if exe in MULT_OPS:
                yield Work("mult")
            elif cfg.exe_mode == OPTIMIZED and exe in (ExeOp.NOP, ExeOp.LUI):
                yield Work("fast")
            else:
                yield Work("execute")

            instr_colour = colour
            result = None
            exch = None

            if exe in BRANCH_OPS:
                cond = _branch_taken(exe, op0, op1)
                if exe in LINK_BRANCHES:
                    result = u32(base + 4) if slot_mode else base
                if cond:
                    target = u32(base + offset)
                    flipped = colour_flip(instr_colour, S_EX)
                    exch = pack_request(flipped, RQ_EX, False, target)
                    meta["tb"] = True
                    if slot_mode:
                        branch_r = True
                    else:
                        exc_colour = flipped
            elif exe in (ExeOp.JR, ExeOp.JALR):
                target = op0
                flipped = colour_flip(instr_colour, S_EX)
                exch = pack_request(flipped, RQ_EX, False, target)
                meta["tb"] = True
                if exe == ExeOp.JALR:
                    result = u32(base + 4) if slot_mode else base
                if slot_mode:
                    branch_r = True
                else:
                    exc_colour = flipped
            elif exe == ExeOp.JAL:
                result = u32(base + 4) if slot_mode else base
                meta["tb"] = True
            elif exe == ExeOp.MA:
                result = u32(op0 + offset)
            elif exe in ALU_OPS:
                b = offset if mem.acc == AccType.IMM else op1
                value, overflow = _alu(exe, op0, b)
                if overflow:
                    # arithmetic overflow: report, then take the restore path
                    ret = u32(base - 8) if in_slot else u32(base - 4)
                    flipped = colour_flip(instr_colour, S_EX)
                    exc_colour = flipped
                    meta = dict(meta, exc=int(ExcCode.OV))
                    yield Send("EXch",
                               pack_request(flipped, RQ_EX, True, ret), meta)
                    old, snap, rd = idrd
                    yield Send("MEMCtrl",
                               pack_memctrl(instr_colour,
                                            MemCtrl(AccType.NONE, DataType.N),
                                            WB_CPU_RESET), meta)
                    yield Send("EXRd", layout.pack_rd(old, snap, rd))
                    yield Send("EXRes", old)
                    slot_s = False
                    continue
                result = value
            elif exe in CONST_SHIFTS or exe in VAR_SHIFTS:
                value = offset if mem.acc == AccType.IMM else op1
                amount = sa if exe in CONST_SHIFTS else op0 & 31
                result = _shift(exe, value, amount)
            elif exe == ExeOp.LUI:
                result = u32(offset << 16)
            elif exe == ExeOp.NOP:
                pass
            elif exe in (ExeOp.EXC, ExeOp.EXCS):
                result = u32(base - 8) if exe == ExeOp.EXCS else u32(base - 4)
            elif exe == ExeOp.COR:
                result = status_pop(cp0data) if \
                    wb.action == WbAction.EXCEPTION_WRITE else cp0data
            elif exe in (ExeOp.MULT, ExeOp.MULTU):
                prod = (s32(op0) * s32(op1)) if exe == ExeOp.MULT \
                    else op0 * op1
                prod &= (1 << 64) - 1
                core.hi, core.lo = (prod >> 32) & 0xFFFFFFFF, prod & 0xFFFFFFFF
            elif exe in (ExeOp.DIV, ExeOp.DIVU):
                if op1 == 0:
                    core.hi, core.lo = op0, 0xFFFFFFFF
                elif exe == ExeOp.DIV:
                    sa_, sb_ = s32(op0), s32(op1)
                    q = abs(sa_) // abs(sb_)
                    if (sa_ < 0) != (sb_ < 0):
                        q = -q
                    core.hi, core.lo = u32(sa_ - q * sb_), u32(q)
                else:
                    core.hi, core.lo = op0 % op1, op0 // op1
            elif exe == ExeOp.MFHI:
                result = core.hi
            elif exe == ExeOp.MFLO:
                result = core.lo
            elif exe == ExeOp.MTHI:
                core.hi = op0
            elif exe == ExeOp.MTLO:
                core.lo = op0
            else:
                raise PipelineFault(f"unhandled execute op {exe}")

            slot_s = False
            if exch is not None:
                yield Send("EXch", exch, meta)
            yield Send("MEMCtrl", pack_memctrl(instr_colour, mem, wb), meta)
            if wb.writes_register_path:
                old, snap, rd = idrd
                yield Send("EXRd", layout.pack_rd(old, snap, rd))
            if produces_exres(mem, wb):
                yield Send("EXRes", result if result is not None else 0)
            if sends_memd(mem):
                yield Send("MemD", op1)
            if is_mem_op(mem):
                # the instruction address (or plus 4): pre-adjusted so the
                # memory stage's minus-4 yields the exception return address
                pc = meta.get("addr", 0)
                yield Send("BaseAddMEM", pc if in_slot else u32(pc + 4))
    return behavior


def _branch_taken(exe, op0, op1):
    if exe == ExeOp.BEQ:
        return op0 == op1
    if exe == ExeOp.BNE:
        return op0 != op1
    if exe == ExeOp.BLEZ:
        return s32(op0) <= 0
    if exe == ExeOp.BGTZ:
        return s32(op0) > 0
    if exe in (ExeOp.BLTZ, ExeOp.BLTZAL):
        return s32(op0) < 0
    return s32(op0) >= 0  # BGEZ / BGEZAL


def _alu(exe, a, b):
    if exe == ExeOp.ADD:
        sv = s32(a) + s32(b)
        if not -(1 << 31) <= sv < (1 << 31):
            return 0, True
        return u32(a + b), False
    if exe == ExeOp.SUB:
        sv = s32(a) - s32(b)
        if not -(1 << 31) <= sv < (1 << 31):
            return 0, True
        return u32(a - b), False
    if exe == ExeOp.ADDU:
        return u32(a + b), False
    if exe == ExeOp.SUBU:
        return u32(a - b), False
    if exe == ExeOp.AND:
        return a & b, False
    if exe == ExeOp.OR:
        return a | b, False
    if exe == ExeOp.XOR:
        return a ^ b, False
    if exe == ExeOp.NOR:
        return u32(~(a | b)), False
    if exe == ExeOp.SLT:
        return (1 if s32(a) < s32(b) else 0), False
    return (1 if a < b else 0), False  # SLTU


def _shift(exe, v, amount):
    amount &= 31
    if exe in (ExeOp.SLL, ExeOp.SLLV):
        return u32(v << amount)
    if exe in (ExeOp.SRL, ExeOp.SRLV):
        return v >> amount
    return u32(s32(v) >> amount)  # SRA / SRAV


def memint_proc(core):
    layout = core.layout

    def behavior(p):
        memc = colour_init(K)
        while True:
            got = yield Recv("MEMCtrl")
            meta = dict(got[2] or {})
            colour, mem, wb = unpack_memctrl(got[1])
            yield Work("mem")
            rd_msg = (0, 0, 0)
            exres = memd = basem = None
            if wb.writes_register_path:
                got = yield Recv("EXRd")
                rd_msg = layout.unpack_rd(got[1])
            if produces_exres(mem, wb):
                got = yield Recv("EXRes")
                exres = got[1]
            if sends_memd(mem):
                got = yield Recv("MemD")
                memd = got[1]
            if is_mem_op(mem):
                got = yield Recv("BaseAddMEM")
                basem = got[1]
            if cpu_write_or_reset(wb):
                yield Send("FEXRes", exres)  # forward before the colour check

            verdict, memc = colour_check_stage(S_MEM, memc, colour)
            if verdict == Verdict.DISCARD:
                if cpu_write_or_reset(wb):
                    old, snap, rd = rd_msg
                    yield Send("WBCtrl",
                               pack_wbctrl(colour, WB_CPU_RESET),
                               dict(meta, wp=True))
                    yield Send("MEMRd", layout.pack_memrd(snap, rd))
                    yield Send("MEMRes", old)
                continue

            if not is_mem_op(mem):
                yield Send("WBCtrl", pack_wbctrl(colour, wb), meta)
                if wb.writes_register_path:
                    old, snap, rd = rd_msg
                    yield Send("MEMRd", layout.pack_memrd(snap, rd))
                    yield Send("MEMRes", exres)
                continue

            addr = exres
            dt = DataType(mem.dtype)
            if _misaligned(dt, addr):
                sel = 1 if mem.acc == AccType.WRITE else 0
                code = ExcCode.ADES if sel else ExcCode.ADEL
                ret = u32(basem - 4)
                flipped = colour_flip(colour, S_MEM)
                memc = flipped
                meta = dict(meta, exc=int(code))
                yield Send("MEMch",
                           pack_request(flipped, RQ_MEM, True, ret | sel),
                           meta)
                if mem.acc == AccType.READ:
                    old, snap, rd = rd_msg
                    yield Send("WBCtrl", pack_wbctrl(colour, WB_CPU_RESET),
                               meta)
                    yield Send("MEMRd", layout.pack_memrd(snap, rd))
                    yield Send("MEMRes", old)
                else:
                    yield Send("WBCtrl", pack_wbctrl(colour, WB_CPU_NONE),
                               meta)
                continue

            if mem.acc == AccType.READ:
                old, snap, rd = rd_msg
                yield Send("WBCtrl", pack_wbctrl(colour, wb), meta)
                yield Send("MEMRd", layout.pack_memrd(snap, rd))
                yield Send("MemAdd", pack_memadd(False, int(dt), addr))
                got = yield Recv("MemData")
                word = got[1]
                yield Send("MEMRes", _extract_load(dt, word, addr, memd))
            else:
                yield Send("MemAdd", pack_memadd(True, int(dt), addr))
                yield Send("WriteData", memd)
                yield Send("WBCtrl", pack_wbctrl(colour, wb), meta)
    return behavior


def _misaligned(dt, addr):
    if dt == DataType.WORD:
        return addr % 4 != 0
    if dt in (DataType.HALF_SIGNED, DataType.HALF_UNSIGNED):
        return addr % 2 != 0
    return False


def _extract_load(dt, word, addr, old_rt):
    if dt == DataType.WORD:
        return word
    if dt == DataType.WORD_LEFT:
        return lwl_merge(old_rt, word, addr)
    if dt == DataType.WORD_RIGHT:
        return lwr_merge(old_rt, word, addr)
    if dt in (DataType.HALF_SIGNED, DataType.HALF_UNSIGNED):
        return load_half(word, addr, dt == DataType.HALF_SIGNED)
    return load_byte(word, addr, dt == DataType.BYTE_SIGNED)


def datamem_proc(core):
    def behavior(p):
        while True:
            got = yield Recv("MemAdd")
            write, dt_i, addr = unpack_memadd(got[1])
            dt = DataType(dt_i)
            yield Work("service")
            if write:
                got = yield Recv("WriteData")
                data = got[1]
                old = core.mem.read_word_aligned(addr, "store")
                if dt == DataType.WORD:
                    merged = data
                elif dt == DataType.WORD_LEFT:
                    merged = swl_merge(old, data, addr)
                elif dt == DataType.WORD_RIGHT:
                    merged = swr_merge(old, data, addr)
                elif dt == DataType.HALF_SIGNED:
                    merged = store_half(old, addr, data)
                else:
                    merged = store_byte(old, addr, data)
                core.mem.write_word_aligned(addr, merged)
            else:
                yield Send("MemData", core.mem.read_word_aligned(addr))
    return behavior


def wbunit_proc(core):
    cfg = core.config
    scheme_wb = cfg.interrupt_scheme == "wb"
    layout = core.layout

    def behavior(p):
        wbc = colour_init(K)
        last_addr = u32(core.entry - 4)
        while True:
            if scheme_wb:
                which, v, meta = yield Select(("WBCtrl", "CP0Int"))
            else:
                got = yield Recv("WBCtrl")
                which, v, meta = "WBCtrl", got[1], got[2]
            if which == "CP0Int":
                # finish-current-then-flush scheme: the instruction already
                # written back stays; everything younger is discarded
                wbc = colour_flip(wbc, S_INT)
                victim = u32(last_addr + 4)
                yield Send("WBch",
                           pack_request(wbc, RQ_INT, True, victim))
                continue
            meta = dict(meta or {})
            colour, wb = unpack_wbctrl(v)
            rd_v = res = None
            if wb.writes_register_path:
                got = yield Recv("MEMRd")
                rd_v = got[1]
                got = yield Recv("MEMRes")
                res = got[1]
            yield Work("wb")

            discard = scheme_wb and colour[S_INT] != wbc[S_INT]
            if not discard:
                wbc = colour
            if discard or meta.get("wp"):
                if cpu_write_or_reset(wb):
                    # forward first: its consumer round never depends on the
                    # register write landing, while the write's consumer may
                    snap, rd = layout.unpack_memrd(rd_v)
                    yield Send("FMEMRes", res)
                    yield Send("RegWrite",
                               layout.pack_regwrite(res, snap, rd, False))
                continue

            if cpu_write_or_reset(wb):
                snap, rd = layout.unpack_memrd(rd_v)
                yield Send("FMEMRes", res)
                yield Send("RegWrite", layout.pack_regwrite(
                    res, snap, rd, wb.action == WbAction.REG_WRITE))
            elif wb.action == WbAction.EXCEPTION_WRITE:
                snap, rd = layout.unpack_memrd(rd_v)
                yield Send("CP0W1", pack_cp0w(res, rd, True))

            if meta.get("halt"):
                core.halt_confirmed = True
            elif not meta.get("drain"):
                exc = meta.get("exc")
                core.retires.append(RetireRecord(
                    meta.get("addr", 0), meta.get("mn", "?"),
                    took_branch=bool(meta.get("tb")),
                    exception=None if exc is None else ExcCode(exc)))
                last_addr = meta.get("addr", last_addr)
    return behavior


def cp0_read_proc(core):
    def behavior(p):
        while True:
            got = yield Recv("CP0RAdd")
            rd = got[1]
            yield Work("serve")
            yield Send("CP0RData", core.cp0[rd])
    return behavior


def cp0_write_proc(core):
    scheme_wb = core.config.interrupt_scheme == "wb"

    def behavior(p):
        while True:
            which, v, meta = yield Select(("CP0W1", "CP0W2", "IRQ"))
            yield Work("serve")
            if which == "IRQ":
                pin = v
                core.cp0[CP0_CAUSE] |= cause_ip_bit(pin)
                if core.cp0[CP0_STATUS] & 1:  # interrupts enabled
                    yield Send("CP0Int", pin)
                continue
            data, rd, write = unpack_cp0w(v)
            if not write:
                continue
            if which == "CP0W2":
                if rd == CP0_CAUSE:
                    core.cp0[CP0_CAUSE] = set_exc_code(
                        core.cp0[CP0_CAUSE], ExcCode((data >> 2) & 0x1F))
                    continue
                if rd == CP0_EPC:
                    # exception entry: kernel mode, interrupts off
                    core.cp0[CP0_STATUS] = status_push(core.cp0[CP0_STATUS])
            core.cp0[rd] = data
    return behavior


def pin_driver_proc(core):
    schedule = sorted(core.config.interrupt_schedule)

    def behavior(p):
        now = 0
        for t, pin in schedule:
            if t > now:
                yield Delay(t - now)
                now = t
            yield Send("IRQ", pin)
    return behavior


# -- wiring -------------------------------------------------------------------

_WIRING = [
    # name, factory, inputs, outputs
    ("PC", pc_proc, ("NPC",), ("PCvalue", "CInsAdd")),
    ("ADD4", add4_proc, ("PCvalue",), ("PCplus4", "BaseAddID")),
    ("InsMem", insmem_proc, ("CInsAdd",), ("CIns",)),
    ("DeCode", decode_proc, ("CIns", "BaseAddID"),
     ("RegRead", "EXCtrl", "Offset32", "Sa", "BaseAddEX", "CIDRd",
      "CP0RAdd", "IDch")),
    ("RegBank", regbank_proc, ("RegRead", "RegWrite"),
     ("FRACtrl", "FWCtrl", "ReadData0", "ReadData1", "PIDRd")),
    ("FWunit", fwunit_proc, ("FRACtrl", "FWCtrl", "FEXRes", "FMEMRes"),
     ("FOp0", "FOp1")),
    ("EXEunit", exe_proc,
     ("EXCtrl", "Offset32", "Sa", "BaseAddEX", "CP0RData", "IDRd",
      "Op0", "Op1"),
     ("EXch", "MEMCtrl", "EXRd", "EXRes", "MemD", "BaseAddMEM")),
    ("MemInt", memint_proc,
     ("MEMCtrl", "EXRd", "EXRes", "MemD", "BaseAddMEM", "MemData"),
     ("FEXRes", "MEMRd", "MEMRes", "WBCtrl", "MemAdd", "WriteData",
      "MEMch")),
    ("DataMem", datamem_proc, ("MemAdd", "WriteData"), ("MemData",)),
    ("CP0Read", cp0_read_proc, ("CP0RAdd",), ("CP0RData",)),
    ("CP0Write", cp0_write_proc, ("CP0W1", "CP0W2", "IRQ"), ("CP0Int",)),
    ("PinDriver", pin_driver_proc, (), ("IRQ",)),
]


def build_processor(config: ProcessorConfig, image):
    """Instantiate all blocks and channels; returns (Simulator, Core)."""
    core = Core(config, image)
    specs = []
    for name, factory, ins, outs in _WIRING:
        specs.append(ProcessSpec(name, ins, outs, factory(core),
                                 config.delays(name)))
    specs.append(ProcessSpec(
        "ArbIF", ("PCplus4", "IDch"), ("NTarget1",),
        leaf_arbiter(core, "ArbIF", "PCplus4", "IDch", "NTarget1"),
        config.delays("ArbIF")))
    specs.append(ProcessSpec(
        "ArbEM", ("EXch", "MEMch"), ("NTarget2",),
        leaf_arbiter_plain(core, "ArbEM", "EXch", "MEMch", "NTarget2"),
        config.delays("ArbEM")))
    aau_inputs = ("NTarget1", "NTarget2", "WBch")
    if config.interrupt_scheme == "aau":
        aau_inputs = aau_inputs + ("CP0Int",)
        wb_inputs = ("WBCtrl", "MEMRd", "MEMRes")
    else:
        wb_inputs = ("WBCtrl", "MEMRd", "MEMRes", "CP0Int")
    specs.append(ProcessSpec("AAU", aau_inputs, ("NPC", "CP0W2"),
                             aau_proc(core), config.delays("AAU")))
    specs.append(ProcessSpec("WBUnit", wb_inputs,
                             ("RegWrite", "FMEMRes", "CP0W1", "WBch"),
                             wbunit_proc(core), config.delays("WBUnit")))
    specs.append(ProcessSpec(
        "MuxOp0", ("ReadData0", "FOp0"), ("Op0",),
        mux_proc(core, "MuxOp0", "ReadData0", "FOp0", "Op0"),
        config.delays("MuxOp0")))
    specs.append(ProcessSpec(
        "MuxOp1", ("ReadData1", "FOp1"), ("Op1",),
        mux_proc(core, "MuxOp1", "ReadData1", "FOp1", "Op1"),
        config.delays("MuxOp1")))
    specs.append(ProcessSpec(
        "MuxIDRd", ("PIDRd", "CIDRd"), ("IDRd",), mux_idrd_proc(core),
        config.delays("MuxIDRd")))

    chans = [ChannelSpec(name, width, direction)
             for name, width, direction in channel_table(core.layout)]
    sim = Simulator(specs, chans,
                    ArbiterPolicy("seeded_random_tie", config.seed),
                    log=config.log_events)
    return sim, core


@dataclass
class ProgramResult:
    state: "object"
    retires: list
    events: list
    status: str
    time: int
    core: Core


def run_program(config: ProcessorConfig, image,
                max_time: Optional[int] = None) -> ProgramResult:
    """Run to the halt convention and extract the architectural state."""
    from ..arch.state import ArchState

    sim, core = build_processor(config, image)
    res = sim.run(max_time=max_time, max_events=config.max_events)
    if not (res.status == "quiescent" and core.halted):
        raise Deadlock(res.blocked or [(f"<{res.status}>", [])])

    core.retires.append(RetireRecord(core.halt_addr, "break"))
    state = ArchState(list(core.regs), core.hi, core.lo, 0, list(core.cp0))
    state.pc = u32(core.halt_addr + 4)
    return ProgramResult(state, list(core.retires), res.events, res.status,
                         res.time, core)
