import pytest

from samips.isa import (
    AsmError, EmptyImage, MemoryImage, OffsetOutOfRange, ParseError,
    UndefinedLabel, assemble, decode, disassemble, parse_image,
)


def test_nop_assembles_to_zero():
    img = assemble("nop\n")
    assert list(img.words.values()) == [0]


def test_beq_next_word_offset_zero():
    img = assemble("beq $1, $1, L\nL: nop\n")
    w = img.words[img.entry_point]
    assert w & 0xFFFF == 0x0000


def test_add_packing():
    img = assemble("add $1, $2, $3\n")
    assert img.words[img.entry_point] == 0x00430820


def test_branch_backwards():
    img = assemble("L: nop\nbne $2, $0, L\n")
    w = img.words[img.entry_point + 4]
    assert w & 0xFFFF == 0xFFFE  # -2 words


def test_jump_field_packing():
    src = ".org 0x00400000\nj 0x00400010\n"
    w = assemble(src).words[0x00400000]
    assert w >> 26 == 2
    assert w & 0x03FFFFFF == 0x00400010 >> 2


def test_undefined_label():
    with pytest.raises(UndefinedLabel):
        assemble("beq $1, $1, nowhere\n")


def test_offset_out_of_range():
    src = "beq $1, $1, L\n" + ".org 0x00440000\nL: nop\n"
    with pytest.raises(OffsetOutOfRange):
        assemble(src)


def test_misaligned_org():
    with pytest.raises(AsmError):
        assemble(".org 0x00400002\nnop\n")


def test_named_registers_and_mem_operands():
    img = assemble("lw $t0, 8($sp)\nsw $ra, -4($fp)\n")
    w0 = decode(img.words[img.entry_point])
    assert (w0.mnemonic, w0.rt, w0.rs, w0.imm) == ("lw", 8, 29, 8)
    w1 = decode(img.words[img.entry_point + 4])
    assert (w1.mnemonic, w1.rt, w1.rs) == ("sw", 31, 30)
    assert w1.imm == 0xFFFC


def test_data_section_words():
    src = """
    .data
    .org 0x10000000
    vals: .word 1, 2, 0xdeadbeef
    .text
    lw $2, 0($3)
    """
    img = assemble(src)
    assert img.words[0x10000000] == 1
    assert img.words[0x10000008] == 0xDEADBEEF


def test_roundtrip_asm_store_load_disassemble():
    src = "\n".join([
        "start: addiu $2, $0, 5",
        "addiu $3, $0, 7",
        "add $4, $2, $3",
        "sub $5, $4, $2",
        "and $6, $4, $5",
        "or $7, $4, $5",
        "xor $8, $4, $5",
        "nor $9, $4, $5",
        "sll $10, $4, 3",
        "srav $11, $4, $2",
        "slt $12, $2, $3",
        "lui $13, 0x8000",
        "lw $14, 0($13)",
        "sw $14, 4($13)",
        "beq $2, $3, start",
        "bgezal $2, start",
        "jal start",
        "jr $31",
        "mult $2, $3",
        "mflo $15",
        "break 1023",
    ]) + "\n"
    img = assemble(src)
    text = img.dump()
    img2 = parse_image(text)
    assert img2.words == img.words
    assert img2.entry_point == img.entry_point
    dis = disassemble(img2)
    mnemonics = [ln.split()[2] for ln in dis.strip().splitlines()]
    assert mnemonics == [
        "addiu", "addiu", "add", "sub", "and", "or", "xor", "nor", "sll",
        "srav", "slt", "lui", "lw", "sw", "beq", "bgezal", "jal", "jr",
        "mult", "mflo", "break",
    ]


def test_image_single_nop():
    img = parse_image("ENTRY 00400000\n00400000: 00000000\n")
    assert img.entry_point == 0x00400000
    assert img.words == {0x00400000: 0}


def test_image_empty_file_error():
    with pytest.raises(EmptyImage):
        parse_image("")
    with pytest.raises(EmptyImage):
        parse_image("# only a comment\n")


def test_image_parse_error_has_line():
    with pytest.raises(ParseError) as ei:
        parse_image("ENTRY 00400000\nnot hex\n")
    assert ei.value.line == 2


def test_image_misaligned_address():
    from samips.isa import MisalignedAddress
    with pytest.raises(MisalignedAddress):
        parse_image("ENTRY 00400000\n00400002: 00000000\n")


def test_duplicate_label_rejected():
    with pytest.raises(AsmError):
        assemble("a: nop\na: nop\n")
