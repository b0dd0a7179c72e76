from .bits import (
    MASK32, add_overflows, load_byte, load_half, lwl_merge, lwr_merge, s32,
    store_byte, store_half, sub_overflows, swl_merge, swr_merge, sx16, sx8,
    u32,
)
from .state import (
    ArchState, CAUSE_EXCCODE_MASK, CAUSE_EXCCODE_SHIFT, CP0_CAUSE, CP0_EPC,
    CP0_STATUS, EXC_VECTOR, ExcCode, Memory, STATUS_IEC, STATUS_KUC,
    UnmappedAddress, cause_ip_bit, raise_exception, rfe, set_exc_code,
    status_pop, status_push,
)
from .oracle import Oracle, RetireRecord, oracle_run, oracle_step, \
    trace_to_jsonl
