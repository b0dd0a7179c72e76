"""Word-level helpers shared by the oracle and the pipeline datapath.

All memory semantics are big-endian; sub-word loads/stores and the
left/right unaligned-word pair operate on the aligned 32-bit word that
contains the address.
"""

from __future__ import annotations

MASK32 = 0xFFFFFFFF


def u32(v: int) -> int:
    return v & MASK32


def s32(v: int) -> int:
    v &= MASK32
    return v - 0x100000000 if v & 0x80000000 else v


def sx16(v: int) -> int:
    v &= 0xFFFF
    return v - 0x10000 if v & 0x8000 else v


def sx8(v: int) -> int:
    v &= 0xFF
    return v - 0x100 if v & 0x80 else v


def add_overflows(a: int, b: int) -> bool:
    return not -(1 << 31) <= s32(a) + s32(b) < (1 << 31)


def sub_overflows(a: int, b: int) -> bool:
    return not -(1 << 31) <= s32(a) - s32(b) < (1 << 31)


def load_byte(word: int, addr: int, signed: bool) -> int:
    b = (word >> (8 * (3 - (addr & 3)))) & 0xFF
    return u32(sx8(b)) if signed else b


def load_half(word: int, addr: int, signed: bool) -> int:
    h = (word >> (8 * (2 - (addr & 2)))) & 0xFFFF
    return u32(sx16(h)) if signed else h


def lwl_merge(old_rt: int, word: int, addr: int) -> int:
    """Load word left: memory bytes from addr to the end of its word become
    the most-significant bytes of rt."""
    a = addr & 3
    shift = 8 * a
    keep_mask = (1 << shift) - 1
    return u32((word << shift) | (old_rt & keep_mask))


def lwr_merge(old_rt: int, word: int, addr: int) -> int:
    """Load word right: memory bytes from the start of the word to addr
    become the least-significant bytes of rt."""
    a = addr & 3
    shift = 8 * (3 - a)
    taken_mask = (1 << (8 * (a + 1))) - 1
    return u32((old_rt & ~taken_mask) | ((word >> shift) & taken_mask))


def swl_merge(old_word: int, rt: int, addr: int) -> int:
    a = addr & 3
    shift = 8 * a
    store_mask = MASK32 >> shift
    return u32((old_word & ~store_mask) | ((rt >> shift) & store_mask))


def swr_merge(old_word: int, rt: int, addr: int) -> int:
    a = addr & 3
    shift = 8 * (3 - a)
    store_mask = u32(MASK32 << shift)
    return u32((old_word & ~store_mask) | ((rt << shift) & store_mask))


def store_byte(old_word: int, addr: int, value: int) -> int:
    shift = 8 * (3 - (addr & 3))
    return u32((old_word & ~(0xFF << shift)) | ((value & 0xFF) << shift))


def store_half(old_word: int, addr: int, value: int) -> int:
    shift = 8 * (2 - (addr & 2))
    return u32((old_word & ~(0xFFFF << shift)) | ((value & 0xFFFF) << shift))
