import itertools

import pytest

from samips.isa import (
    AccType, ControlBundle, DataType, EXE_CELLS, ExcTag, ExeOp, MemCtrl,
    OPTIMIZED, ORIGINAL, RESERVED, TABLE, WbAction, WbCtrl, WbTarget,
    control_for, decode, encode, exe_wire, is_halt, reencode,
)


def test_zero_word_is_nop():
    ins = decode(0x00000000)
    assert ins.mnemonic == "nop"


def test_decode_add_fields():
    # opcode=0 rs=2 rt=3 rd=1 sa=0 funct=0x20
    word = (2 << 21) | (3 << 16) | (1 << 11) | 0x20
    ins = decode(word)
    assert ins.mnemonic == "add"
    assert (ins.rs, ins.rt, ins.rd) == (2, 3, 1)
    assert word == 0x00430820  # independent field packing


def test_unused_opcode_is_reserved():
    assert decode(0x3F << 26).reserved
    assert decode(0x13 << 26).reserved  # COP3, unimplemented


@pytest.mark.parametrize("word,mnemonic", [
    (0x8C430004, "lw"),      # lw $3, 4($2)
    (0xAC430004, "sw"),
    (0x10220001, "beq"),     # beq $1, $2, +1
    (0x0441FFFF, "bgez"),    # regimm rt=1
    (0x04100002, "bltzal"),
    (0x08000000, "j"),
    (0x0C000000, "jal"),
    (0x00400008, "jr"),      # jr $2
    (0x3C011234, "lui"),     # lui $1, 0x1234
    (0x0000000C, "syscall"),
    (0x0000000D, "break"),
    (0x42000010, "rfe"),
    (0x40826000, "mtc0"),    # mtc0 $2, $12
    (0x40026000, "mfc0"),
    (0x00031040, "sll"),     # sll $2, $3, 1
    (0x00641824, "and"),
    (0x0064001A, "div"),
    (0x00002010, "mfhi"),    # mfhi $4
])
def test_decode_known_words(word, mnemonic):
    assert decode(word).mnemonic == mnemonic


def test_halt_convention():
    word = 0x0000000D | (0x3FF << 6)
    ins = decode(word)
    assert ins.mnemonic == "break" and is_halt(ins)
    assert not is_halt(decode(0x0000000D))


def test_encode_decode_roundtrip_all_mnemonics():
    for name in TABLE:
        word = encode(name, rs=3, rt=4, rd=5, sa=2, imm=0x1234,
                      target=0x155555, code=7)
        ins = decode(word)
        assert ins.mnemonic == name, f"{name} -> {ins.mnemonic}"
        assert reencode(ins) == word


def test_decode_encode_identity_sampled():
    # every decodable word re-encodes to itself
    import random
    rng = random.Random(0)
    checked = 0
    for _ in range(20000):
        w = rng.getrandbits(32)
        ins = decode(w)
        if not ins.reserved:
            assert reencode(ins) == w
            checked += 1
    assert checked > 100


def test_noncanonical_fields_are_reserved():
    # add with nonzero sa field is not a canonical encoding
    word = 0x00430820 | (3 << 6)
    assert decode(word).reserved


# -- control encodings -------------------------------------------------------


def test_sw_control():
    b = control_for(decode(0xAC430004))
    assert b.exe == ExeOp.MA
    assert b.mem == MemCtrl(AccType.WRITE, DataType.WORD)
    assert b.wb == WbCtrl(WbTarget.CPU, WbAction.NONE)


def test_j_control():
    b = control_for(decode(0x08000000))
    assert b.exe == ExeOp.NOP
    assert b.mem.acc == AccType.NONE
    assert b.wb == WbCtrl(WbTarget.CPU, WbAction.NONE)


def test_add_wire_codes_both_modes():
    assert exe_wire(ExeOp.ADD, ORIGINAL) == 0b000010
    assert exe_wire(ExeOp.ADD, OPTIMIZED) == 0b000101


def test_original_table_cells():
    # spot-check the row/column packing on several cells
    expect = {
        ExeOp.BEQ: 0b000000, ExeOp.BGEZAL: 0b111000, ExeOp.JR: 0b001001,
        ExeOp.JAL: 0b011001, ExeOp.NOR: 0b111010, ExeOp.EXC: 0b000011,
        ExeOp.EXCS: 0b001011, ExeOp.MA: 0b010011, ExeOp.COR: 0b011011,
        ExeOp.SLT: 0b101011, ExeOp.NOP: 0b011100, ExeOp.SLL: 0b100100,
        ExeOp.SRA: 0b110100, ExeOp.MULTU: 0b000110, ExeOp.MFLO: 0b111110,
    }
    for op, wire in expect.items():
        assert exe_wire(op, ORIGINAL) == wire, op


def test_optimized_table_moves():
    assert exe_wire(ExeOp.NOP, OPTIMIZED) == 0b000111
    assert exe_wire(ExeOp.SUB, OPTIMIZED) == 0b001101
    assert exe_wire(ExeOp.LUI, OPTIMIZED) == 0b110011
    with pytest.raises(KeyError):
        exe_wire(ExeOp.LUI, ORIGINAL)


def test_starred_cells_never_produced():
    for mode in (ORIGINAL, OPTIMIZED):
        valid = set(EXE_CELLS[mode].values())
        produced = set()
        for op in range(64):
            for funct in range(64):
                w = (op << 26) | funct
                produced.add(control_for(decode(w), mode).exe)
        missing = produced - valid - {ExeOp.LUI}
        assert not missing, missing


def test_control_for_total_over_opcode_funct():
    for op, funct in itertools.product(range(64), range(64)):
        w = (op << 26) | (1 << 21) | (2 << 16) | funct
        b = control_for(decode(w))
        assert isinstance(b, ControlBundle)


def test_reserved_maps_to_exception_with_ri_tag():
    b = control_for(decode(0x3F << 26))
    assert b.exe == ExeOp.EXC
    assert b.mem.acc == AccType.IMM and b.mem.dtype == ExcTag.RI
    assert b.wb.action == WbAction.EXCEPTION_WRITE


def test_bundle_pack_layout():
    b = control_for(decode(0xAC430004))  # sw
    packed = b.pack(ORIGINAL)
    assert packed & 0x3F == exe_wire(ExeOp.MA, ORIGINAL)
    assert (packed >> 6) & 0x1F == b.mem.wire()
    assert (packed >> 11) & 0x7 == b.wb.wire()


def test_wb_wire_values():
    assert WbCtrl(WbTarget.CPU, WbAction.REG_WRITE).wire() == 0b110
    assert WbCtrl(WbTarget.CPU, WbAction.REG_RESET).wire() == 0b111
    assert WbCtrl(WbTarget.CP0, WbAction.EXCEPTION_WRITE).wire() == 0b010
    assert WbCtrl.from_wire(0b010).action == WbAction.EXCEPTION_WRITE


def test_lui_mode_split():
    lui = decode(0x3C011234)
    orig = control_for(lui, ORIGINAL)
    opt = control_for(lui, OPTIMIZED)
    assert orig.exe == ExeOp.SLL and opt.exe == ExeOp.LUI
    assert orig.mem.acc == AccType.IMM
