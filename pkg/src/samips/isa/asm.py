"""A small two-pass assembler and matching disassembler.

Syntax:

- labels: ``name:`` at line start; referenced bare in branch/jump operands
- directives: ``.text``, ``.data``, ``.org ADDR``, ``.word V[, V ...]``
- registers ``$0``..``$31`` or conventional names (``$zero``, ``$a0``, ...)
- immediates in decimal or ``0x`` hex, negatives allowed
- memory operands as ``offset($base)``
- comments from ``#`` or ``;`` to end of line

Branch offsets are word offsets relative to the delay-slot address
(branch address + 4); jump targets fill the 26-bit field combined with the
high bits of that same address.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import encoding
from .encoding import TABLE, decode, encode
from .image import MemoryImage

REG_NAMES = {
    "zero": 0, "at": 1, "v0": 2, "v1": 3,
    "a0": 4, "a1": 5, "a2": 6, "a3": 7,
    "t0": 8, "t1": 9, "t2": 10, "t3": 11, "t4": 12, "t5": 13,
    "t6": 14, "t7": 15,
    "s0": 16, "s1": 17, "s2": 18, "s3": 19, "s4": 20, "s5": 21,
    "s6": 22, "s7": 23,
    "t8": 24, "t9": 25, "k0": 26, "k1": 27,
    "gp": 28, "sp": 29, "fp": 30, "ra": 31,
}

DEFAULT_TEXT_BASE = 0x00400000
DEFAULT_DATA_BASE = 0x10000000


class AsmError(Exception):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


class UndefinedLabel(AsmError):
    pass


class OffsetOutOfRange(AsmError):
    pass


class MisalignedOrg(AsmError):
    pass


_LABEL_RE = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*:")
_MEM_RE = re.compile(r"^(-?[\w.$]+)\s*\(\s*(\$\w+)\s*\)$")


def _reg(tok, line):
    t = tok.strip()
    if not t.startswith("$"):
        raise AsmError(f"expected register, got {tok!r}", line)
    body = t[1:]
    if body.isdigit():
        n = int(body)
    else:
        n = REG_NAMES.get(body.lower())
        if n is None:
            raise AsmError(f"unknown register {tok!r}", line)
    if not 0 <= n <= 31:
        raise AsmError(f"register {tok!r} out of range", line)
    return n


def _int(tok, line):
    try:
        return int(tok.strip(), 0)
    except ValueError:
        raise AsmError(f"bad integer {tok!r}", line) from None


@dataclass
class _Item:
    kind: str  # "insn" | "word"
    addr: int
    line: int
    mnemonic: str = ""
    operands: tuple = ()
    value: int = 0


@dataclass
class _Pass1:
    labels: dict = field(default_factory=dict)
    items: list = field(default_factory=list)


def _strip(line):
    for mark in "#;":
        if mark in line:
            line = line.split(mark, 1)[0]
    return line.strip()


def _first_pass(source: str) -> _Pass1:
    out = _Pass1()
    loc = DEFAULT_TEXT_BASE
    data_loc = DEFAULT_DATA_BASE
    in_text = True
    entry = None

    for lineno, raw in enumerate(source.splitlines(), 1):
        line = _strip(raw)
        while True:
            m = _LABEL_RE.match(line)
            if not m:
                break
            name = m.group(1)
            if name in out.labels:
                raise AsmError(f"duplicate label {name!r}", lineno)
            out.labels[name] = loc if in_text else data_loc
            line = line[m.end():].strip()
        if not line:
            continue

        if line.startswith("."):
            parts = line.split(None, 1)
            d = parts[0].lower()
            rest = parts[1] if len(parts) > 1 else ""
            if d == ".text":
                in_text = True
            elif d == ".data":
                in_text = False
            elif d == ".org":
                a = _int(rest, lineno)
                if a % 4:
                    raise MisalignedOrg(f".org {a:#x} not word-aligned",
                                        lineno)
                if in_text:
                    loc = a
                else:
                    data_loc = a
            elif d == ".word":
                for tok in rest.split(","):
                    addr = loc if in_text else data_loc
                    out.items.append(_Item("word", addr, lineno,
                                           operands=(tok.strip(),)))
                    if in_text:
                        loc += 4
                    else:
                        data_loc += 4
            else:
                raise AsmError(f"unknown directive {d!r}", lineno)
            continue

        parts = line.split(None, 1)
        mnem = parts[0].lower()
        ops = tuple(o.strip() for o in parts[1].split(",")) \
            if len(parts) > 1 else ()
        if mnem not in TABLE:
            raise AsmError(f"unknown mnemonic {mnem!r}", lineno)
        if not in_text:
            raise AsmError("instruction outside .text", lineno)
        if entry is None:
            entry = loc
        out.items.append(_Item("insn", loc, lineno, mnem, ops))
        loc += 4

    if entry is None:
        # data-only images start at the text base by convention
        entry = DEFAULT_TEXT_BASE
    out.labels.setdefault("__entry__", entry)
    return out


def _value_or_label(tok, labels, line):
    tok = tok.strip()
    if tok in labels:
        return labels[tok]
    try:
        return int(tok, 0)
    except ValueError:
        raise UndefinedLabel(f"undefined label {tok!r}", line) from None


def _branch_offset(tok, labels, addr, line):
    target = _value_or_label(tok, labels, line)
    diff = target - (addr + 4)
    if diff % 4:
        raise AsmError("branch target not word-aligned", line)
    off = diff >> 2
    if not -(1 << 15) <= off < (1 << 15):
        raise OffsetOutOfRange(f"branch offset {off} out of range", line)
    return off & 0xFFFF


def _encode_item(it: _Item, labels) -> int:
    m, ops, line, addr = it.mnemonic, list(it.operands), it.line, it.addr
    fmt, _op, _funct, names = TABLE[m]

    def need(n):
        if len(ops) != n:
            raise AsmError(f"{m} expects {n} operand(s), got {len(ops)}",
                           line)

    if m == "nop":
        need(0)
        return 0
    if m in ("syscall", "break"):
        if not ops:
            return encode(m, code=0)
        need(1)
        return encode(m, code=_int(ops[0], line))
    if m == "rfe":
        need(0)
        return encode(m)
    if m in ("mtc0", "mfc0"):
        need(2)
        return encode(m, rt=_reg(ops[0], line), rd=_reg(ops[1], line))
    if m in ("j", "jal"):
        need(1)
        target = _value_or_label(ops[0], labels, line)
        if target % 4:
            raise AsmError("jump target not word-aligned", line)
        if (target >> 28) != ((addr + 4) >> 28):
            raise OffsetOutOfRange("jump target outside the 256MB segment",
                                   line)
        return encode(m, target=(target >> 2) & 0x03FFFFFF)
    if m in encoding.LOADS or m in encoding.STORES:
        need(2)
        rt = _reg(ops[0], line)
        mm = _MEM_RE.match(ops[1])
        if not mm:
            raise AsmError(f"expected offset($base), got {ops[1]!r}", line)
        off = _value_or_label(mm.group(1), labels, line)
        base = _reg(mm.group(2), line)
        if not -(1 << 15) <= off < (1 << 16):
            raise OffsetOutOfRange(f"offset {off} out of range", line)
        return encode(m, rt=rt, rs=base, imm=off & 0xFFFF)
    if m in ("beq", "bne"):
        need(3)
        return encode(m, rs=_reg(ops[0], line), rt=_reg(ops[1], line),
                      imm=_branch_offset(ops[2], labels, addr, line))
    if m in ("blez", "bgtz", "bltz", "bgez", "bltzal", "bgezal"):
        need(2)
        return encode(m, rs=_reg(ops[0], line),
                      imm=_branch_offset(ops[1], labels, addr, line))
    if m == "jr":
        need(1)
        return encode(m, rs=_reg(ops[0], line))
    if m == "jalr":
        if len(ops) == 1:
            return encode(m, rd=31, rs=_reg(ops[0], line))
        need(2)
        return encode(m, rd=_reg(ops[0], line), rs=_reg(ops[1], line))
    if m == "lui":
        need(2)
        return encode(m, rt=_reg(ops[0], line),
                      imm=_int(ops[1], line) & 0xFFFF)
    if m in ("sll", "srl", "sra"):
        need(3)
        return encode(m, rd=_reg(ops[0], line), rt=_reg(ops[1], line),
                      sa=_int(ops[2], line) & 0x1F)
    if m in ("sllv", "srlv", "srav"):
        need(3)
        return encode(m, rd=_reg(ops[0], line), rt=_reg(ops[1], line),
                      rs=_reg(ops[2], line))
    if m in ("mult", "multu", "div", "divu"):
        need(2)
        return encode(m, rs=_reg(ops[0], line), rt=_reg(ops[1], line))
    if m in ("mfhi", "mflo"):
        need(1)
        return encode(m, rd=_reg(ops[0], line))
    if m in ("mthi", "mtlo"):
        need(1)
        return encode(m, rs=_reg(ops[0], line))
    if fmt == encoding.FMT_R:
        need(3)
        return encode(m, rd=_reg(ops[0], line), rs=_reg(ops[1], line),
                      rt=_reg(ops[2], line))
    if fmt == encoding.FMT_I:
        need(3)
        imm = _value_or_label(ops[2], labels, line)
        if not -(1 << 15) <= imm < (1 << 16):
            raise OffsetOutOfRange(f"immediate {imm} out of range", line)
        return encode(m, rt=_reg(ops[0], line), rs=_reg(ops[1], line),
                      imm=imm & 0xFFFF)
    raise AsmError(f"cannot assemble {m!r}", line)


def assemble(source: str) -> MemoryImage:
    p1 = _first_pass(source)
    words = {}
    for it in p1.items:
        if it.addr in words:
            raise AsmError(f"address {it.addr:#010x} assembled twice",
                           it.line)
        if it.kind == "word":
            v = _value_or_label(it.operands[0], p1.labels, it.line)
            words[it.addr] = v & 0xFFFFFFFF
        else:
            words[it.addr] = _encode_item(it, p1.labels)
    return MemoryImage(words, p1.labels["__entry__"])


# -- disassembler -----------------------------------------------------------


def _sx16(v):
    return v - 0x10000 if v & 0x8000 else v


def disassemble_word(addr: int, word: int) -> str:
    ins = decode(word)
    m = ins.mnemonic
    f = ins.fields
    if ins.reserved:
        text = f".word 0x{word:08x}"
    elif m == "nop":
        text = "nop"
    elif m in ("syscall", "break"):
        text = f"{m} {f['code']:#x}" if f["code"] else m
    elif m == "rfe":
        text = "rfe"
    elif m in ("mtc0", "mfc0"):
        text = f"{m} ${f['rt']}, ${f['rd']}"
    elif m in ("j", "jal"):
        target = ((addr + 4) & 0xF0000000) | (f["target"] << 2)
        text = f"{m} {target:#010x}"
    elif m in encoding.LOADS or m in encoding.STORES:
        text = f"{m} ${f['rt']}, {_sx16(f['imm'])}(${f['rs']})"
    elif m in ("beq", "bne"):
        dest = addr + 4 + (_sx16(f["imm"]) << 2)
        text = f"{m} ${f['rs']}, ${f['rt']}, {dest:#010x}"
    elif m in ("blez", "bgtz", "bltz", "bgez", "bltzal", "bgezal"):
        dest = addr + 4 + (_sx16(f["imm"]) << 2)
        text = f"{m} ${f['rs']}, {dest:#010x}"
    elif m == "jr":
        text = f"jr ${f['rs']}"
    elif m == "jalr":
        text = f"jalr ${f['rd']}, ${f['rs']}"
    elif m == "lui":
        text = f"lui ${f['rt']}, {f['imm']:#x}"
    elif m in ("sll", "srl", "sra"):
        text = f"{m} ${f['rd']}, ${f['rt']}, {f['sa']}"
    elif m in ("sllv", "srlv", "srav"):
        text = f"{m} ${f['rd']}, ${f['rt']}, ${f['rs']}"
    elif m in ("mult", "multu", "div", "divu"):
        text = f"{m} ${f['rs']}, ${f['rt']}"
    elif m in ("mfhi", "mflo"):
        text = f"{m} ${f['rd']}"
    elif m in ("mthi", "mtlo"):
        text = f"{m} ${f['rs']}"
    elif encoding.TABLE[m][0] == encoding.FMT_R:
        text = f"{m} ${f['rd']}, ${f['rs']}, ${f['rt']}"
    else:
        text = f"{m} ${f['rt']}, ${f['rs']}, {_sx16(f['imm'])}"
    return f"{addr:08x}: {word:08x} {text}"


def disassemble(image: MemoryImage) -> str:
    return "\n".join(disassemble_word(a, image.words[a])
                     for a in sorted(image.words)) + "\n"
