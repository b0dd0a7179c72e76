"""MIPS R3000-subset instruction encoding and decoding.

Layouts:

- I-type: op(6) rs(5) rt(5) imm(16)
- J-type: op(6) target(26)
- R-type: op(6) rs(5) rt(5) rd(5) sa(5) funct(6)

Decoding is canonical: a word whose don't-care fields are non-zero decodes to
the reserved-instruction marker, which keeps ``encode(decode(w)) == w`` exact
for every decodable word.  The all-zero word is the canonical NOP.
"""

from __future__ import annotations

from dataclasses import dataclass

RESERVED = "reserved"

FMT_I = "I"
FMT_J = "J"
FMT_R = "R"

OP_SPECIAL = 0x00
OP_REGIMM = 0x01
OP_COP0 = 0x10

# name -> (format, opcode, funct-or-None, operand field names)
_R = lambda funct, fields: (FMT_R, OP_SPECIAL, funct, fields)

TABLE = {
    "nop":     (FMT_R, OP_SPECIAL, 0x00, ()),
    "sll":     _R(0x00, ("rd", "rt", "sa")),
    "srl":     _R(0x02, ("rd", "rt", "sa")),
    "sra":     _R(0x03, ("rd", "rt", "sa")),
    "sllv":    _R(0x04, ("rd", "rt", "rs")),
    "srlv":    _R(0x06, ("rd", "rt", "rs")),
    "srav":    _R(0x07, ("rd", "rt", "rs")),
    "jr":      _R(0x08, ("rs",)),
    "jalr":    _R(0x09, ("rd", "rs")),
    "syscall": _R(0x0C, ("code",)),
    "break":   _R(0x0D, ("code",)),
    "mfhi":    _R(0x10, ("rd",)),
    "mthi":    _R(0x11, ("rs",)),
    "mflo":    _R(0x12, ("rd",)),
    "mtlo":    _R(0x13, ("rs",)),
    "mult":    _R(0x18, ("rs", "rt")),
    "multu":   _R(0x19, ("rs", "rt")),
    "div":     _R(0x1A, ("rs", "rt")),
    "divu":    _R(0x1B, ("rs", "rt")),
    "add":     _R(0x20, ("rd", "rs", "rt")),
    "addu":    _R(0x21, ("rd", "rs", "rt")),
    "sub":     _R(0x22, ("rd", "rs", "rt")),
    "subu":    _R(0x23, ("rd", "rs", "rt")),
    "and":     _R(0x24, ("rd", "rs", "rt")),
    "or":      _R(0x25, ("rd", "rs", "rt")),
    "xor":     _R(0x26, ("rd", "rs", "rt")),
    "nor":     _R(0x27, ("rd", "rs", "rt")),
    "slt":     _R(0x2A, ("rd", "rs", "rt")),
    "sltu":    _R(0x2B, ("rd", "rs", "rt")),

    "bltz":    (FMT_I, OP_REGIMM, 0x00, ("rs", "imm")),
    "bgez":    (FMT_I, OP_REGIMM, 0x01, ("rs", "imm")),
    "bltzal":  (FMT_I, OP_REGIMM, 0x10, ("rs", "imm")),
    "bgezal":  (FMT_I, OP_REGIMM, 0x11, ("rs", "imm")),

    "j":       (FMT_J, 0x02, None, ("target",)),
    "jal":     (FMT_J, 0x03, None, ("target",)),
    "beq":     (FMT_I, 0x04, None, ("rs", "rt", "imm")),
    "bne":     (FMT_I, 0x05, None, ("rs", "rt", "imm")),
    "blez":    (FMT_I, 0x06, None, ("rs", "imm")),
    "bgtz":    (FMT_I, 0x07, None, ("rs", "imm")),
    "addi":    (FMT_I, 0x08, None, ("rt", "rs", "imm")),
    "addiu":   (FMT_I, 0x09, None, ("rt", "rs", "imm")),
    "slti":    (FMT_I, 0x0A, None, ("rt", "rs", "imm")),
    "sltiu":   (FMT_I, 0x0B, None, ("rt", "rs", "imm")),
    "andi":    (FMT_I, 0x0C, None, ("rt", "rs", "imm")),
    "ori":     (FMT_I, 0x0D, None, ("rt", "rs", "imm")),
    "xori":    (FMT_I, 0x0E, None, ("rt", "rs", "imm")),
    "lui":     (FMT_I, 0x0F, None, ("rt", "imm")),

    "mfc0":    (FMT_R, OP_COP0, None, ("rt", "rd")),
    "mtc0":    (FMT_R, OP_COP0, None, ("rt", "rd")),
    "rfe":     (FMT_R, OP_COP0, None, ()),

    "lb":      (FMT_I, 0x20, None, ("rt", "imm", "rs")),
    "lh":      (FMT_I, 0x21, None, ("rt", "imm", "rs")),
    "lwl":     (FMT_I, 0x22, None, ("rt", "imm", "rs")),
    "lw":      (FMT_I, 0x23, None, ("rt", "imm", "rs")),
    "lbu":     (FMT_I, 0x24, None, ("rt", "imm", "rs")),
    "lhu":     (FMT_I, 0x25, None, ("rt", "imm", "rs")),
    "lwr":     (FMT_I, 0x26, None, ("rt", "imm", "rs")),
    "sb":      (FMT_I, 0x28, None, ("rt", "imm", "rs")),
    "sh":      (FMT_I, 0x29, None, ("rt", "imm", "rs")),
    "swl":     (FMT_I, 0x2A, None, ("rt", "imm", "rs")),
    "sw":      (FMT_I, 0x2B, None, ("rt", "imm", "rs")),
    "swr":     (FMT_I, 0x2E, None, ("rt", "imm", "rs")),
}

_FUNCT_TO_NAME = {spec[2]: name for name, spec in TABLE.items()
                  if spec[1] == OP_SPECIAL and name != "nop"}
_REGIMM_TO_NAME = {spec[2]: name for name, spec in TABLE.items()
                   if spec[1] == OP_REGIMM}
_OP_TO_NAME = {spec[1]: name for name, spec in TABLE.items()
               if spec[1] not in (OP_SPECIAL, OP_REGIMM, OP_COP0)}

LOADS = frozenset(["lb", "lh", "lwl", "lw", "lbu", "lhu", "lwr"])
STORES = frozenset(["sb", "sh", "swl", "sw", "swr"])
BRANCHES = frozenset(["beq", "bne", "blez", "bgtz",
                      "bltz", "bgez", "bltzal", "bgezal"])
JUMPS = frozenset(["j", "jal", "jr", "jalr"])

HALT_BREAK_CODE = 0x3FF  # break with this code is the simulator halt


@dataclass(frozen=True)
class Instruction:
    word: int
    mnemonic: str  # TABLE key, or RESERVED
    fields: dict

    @property
    def reserved(self) -> bool:
        return self.mnemonic == RESERVED

    def __getattr__(self, name):
        try:
            return self.fields[name]
        except KeyError:
            raise AttributeError(name) from None


def extract_fields(word: int) -> dict:
    return {
        "op": (word >> 26) & 0x3F,
        "rs": (word >> 21) & 0x1F,
        "rt": (word >> 16) & 0x1F,
        "rd": (word >> 11) & 0x1F,
        "sa": (word >> 6) & 0x1F,
        "funct": word & 0x3F,
        "imm": word & 0xFFFF,
        "target": word & 0x03FFFFFF,
        "code": (word >> 6) & 0xFFFFF,
    }


def _zero_except(f, *keep) -> bool:
    slots = {"rs", "rt", "rd", "sa"}
    return all(f[s] == 0 for s in slots - set(keep))


def decode(word: int) -> Instruction:
    """Decode a 32-bit word; undefined encodings yield the RESERVED marker."""
    word &= 0xFFFFFFFF
    f = extract_fields(word)
    op = f["op"]
    name = RESERVED

    if op == OP_SPECIAL:
        if word == 0:
            name = "nop"
        else:
            cand = _FUNCT_TO_NAME.get(f["funct"])
            if cand is not None and _canonical_special(cand, f):
                name = cand
    elif op == OP_REGIMM:
        cand = _REGIMM_TO_NAME.get(f["rt"])
        if cand is not None:
            name = cand
    elif op == OP_COP0:
        if f["rs"] == 0x00 and f["sa"] == 0 and f["funct"] == 0:
            name = "mfc0"
        elif f["rs"] == 0x04 and f["sa"] == 0 and f["funct"] == 0:
            name = "mtc0"
        elif f["rs"] == 0x10 and f["funct"] == 0x10 and _zero_except(f, "rs"):
            name = "rfe"
    else:
        cand = _OP_TO_NAME.get(op)
        if cand is not None and _canonical_other(cand, f):
            name = cand

    return Instruction(word, name, f)


def _canonical_special(name, f) -> bool:
    fields = set(TABLE[name][3])
    if "code" in fields:
        return True  # syscall/break: bits 25..6 are the code operand
    allowed = {"rs", "rt", "rd", "sa"} & fields
    return _zero_except(f, *allowed)


def _canonical_other(name, f) -> bool:
    if name in ("blez", "bgtz"):
        return f["rt"] == 0
    if name == "lui":
        return f["rs"] == 0
    return True


def encode(mnemonic: str, **fields) -> int:
    """Pack a mnemonic plus operand fields into a 32-bit word."""
    fmt, op, funct, names = TABLE[mnemonic]
    word = op << 26
    if mnemonic == "nop":
        return 0
    if fmt == FMT_R and op == OP_SPECIAL:
        word |= funct
    if op == OP_REGIMM:
        word |= funct << 16
    if mnemonic == "mtc0":
        word |= 0x04 << 21
    if mnemonic == "rfe":
        word |= (0x10 << 21) | 0x10
    for name in names:
        v = fields.get(name, 0)
        if name == "rs":
            word |= (v & 0x1F) << 21
        elif name == "rt":
            word |= (v & 0x1F) << 16
        elif name == "rd":
            word |= (v & 0x1F) << 11
        elif name == "sa":
            word |= (v & 0x1F) << 6
        elif name == "imm":
            word |= v & 0xFFFF
        elif name == "target":
            word |= v & 0x03FFFFFF
        elif name == "code":
            word |= (v & 0xFFFFF) << 6
    return word


def reencode(instr: Instruction) -> int:
    """Rebuild the word from a decoded instruction's operand fields."""
    if instr.reserved:
        return instr.word
    fmt, op, funct, names = TABLE[instr.mnemonic]
    return encode(instr.mnemonic, **{n: instr.fields[n] for n in names})


def is_halt(instr: Instruction) -> bool:
    return instr.mnemonic == "break" and instr.fields["code"] == HALT_BREAK_CODE


GROUPS = {
    "Memory": LOADS | STORES,
    "Arithmetic": frozenset(["add", "addi", "addu", "addiu", "sub", "subu",
                             "slt", "sltu", "slti", "sltiu", "lui"]),
    "Logic": frozenset(["and", "andi", "or", "ori", "xor", "xori", "nor"]),
    "Shift": frozenset(["sll", "srl", "sra", "sllv", "srlv", "srav"]),
    "Nop": frozenset(["nop"]),
    "Multiply": frozenset(["mult", "multu", "div", "divu",
                           "mfhi", "mflo", "mthi", "mtlo"]),
    "Branch": BRANCHES | JUMPS,
    "Special": frozenset(["syscall", "break"]),
    "CP0": frozenset(["mtc0", "mfc0", "rfe"]),
}

GROUP_OF = {m: g for g, ms in GROUPS.items() for m in ms}
