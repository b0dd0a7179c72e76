"""Memory-image files: word map plus entry point, big-endian byte semantics.

Text format, one word per line, ``#`` comments allowed:

    ENTRY 00400000
    00400000: 24020005
    00400004: 0000000d
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ImageError(Exception):
    pass


class ParseError(ImageError):
    def __init__(self, msg, line):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class MisalignedAddress(ImageError):
    pass


class EmptyImage(ImageError):
    pass


@dataclass
class MemoryImage:
    words: dict  # word-aligned address -> 32-bit word
    entry_point: int
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for a in self.words:
            if a % 4:
                raise MisalignedAddress(f"address {a:#010x} not word-aligned")
        if self.entry_point % 4:
            raise MisalignedAddress("entry point not word-aligned")

    def dump(self) -> str:
        lines = [f"ENTRY {self.entry_point:08x}"]
        for a in sorted(self.words):
            lines.append(f"{a:08x}: {self.words[a]:08x}")
        return "\n".join(lines) + "\n"


def parse_image(text: str) -> MemoryImage:
    entry = None
    words = {}
    seen_any = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        seen_any = True
        if line.upper().startswith("ENTRY"):
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("ENTRY needs one hex address", lineno)
            try:
                entry = int(parts[1], 16)
            except ValueError:
                raise ParseError(f"bad entry {parts[1]!r}", lineno) from None
            continue
        if ":" not in line:
            raise ParseError(f"expected 'addr: word', got {line!r}", lineno)
        a_s, w_s = (s.strip() for s in line.split(":", 1))
        try:
            addr, word = int(a_s, 16), int(w_s, 16)
        except ValueError:
            raise ParseError(f"bad hex in {line!r}", lineno) from None
        if addr % 4:
            raise MisalignedAddress(f"line {lineno}: address {addr:#010x}")
        if word >> 32:
            raise ParseError(f"word {w_s!r} wider than 32 bits", lineno)
        words[addr] = word
    if not seen_any:
        raise EmptyImage("empty image file")
    if entry is None:
        raise ParseError("missing ENTRY line", 1)
    return MemoryImage(words, entry)


def load_image(path) -> MemoryImage:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_image(fh.read())


def store_image(image: MemoryImage, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(image.dump())
