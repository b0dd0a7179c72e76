from .encoding import (
    BRANCHES, GROUP_OF, GROUPS, HALT_BREAK_CODE, Instruction, JUMPS, LOADS,
    RESERVED, STORES, TABLE, decode, encode, extract_fields, is_halt,
    reencode,
)
from .control import (
    AccType, ControlBundle, DataType, EXC_TAG_FOR, EXE_CELLS, EXE_WIRE,
    ExcTag, ExeOp, LOAD_DTYPE, MemCtrl, OPTIMIZED, ORIGINAL, STORE_DTYPE,
    WB_CP0_WRITE, WB_CPU_NONE, WB_CPU_RESET, WB_CPU_WRITE, WbAction, WbCtrl,
    WbTarget, control_for, exe_wire,
)
from .asm import (
    AsmError, MisalignedOrg, OffsetOutOfRange, UndefinedLabel, assemble,
    disassemble, disassemble_word,
)
from .image import (
    EmptyImage, ImageError, MemoryImage, MisalignedAddress, ParseError,
    load_image, parse_image, store_image,
)
