from .detect import (
    Dhdt, EXER, InvalidShape, MEMR, NON, NoMatch, WBR, dhdq_init, dhdq_read,
    dhdq_write, dhdt_read, dhdt_write, fraq_init, fraq_len, fraq_step,
    queue_len, storage_cost,
)
from .colour import (
    HazardRequest, Kind, LengthMismatch, Verdict, aau_check,
    colour_check_stage, colour_flip, colour_init, colour_pack, colour_unpack,
    interrupt_backpoint, request_width,
)
