from .sim import (
    ACK_DOWN_LAG,
    ArbiterPolicy,
    ChannelSpec,
    DanglingChannel,
    Delay,
    DuplicateId,
    Halt,
    Peek,
    Phase,
    PHASE_NAMES,
    Proc,
    ProcessSpec,
    ProtocolViolation,
    Recv,
    RunResult,
    Select,
    Send,
    SimError,
    Simulator,
    TICKS_PER_NS,
    WidthMismatch,
    Work,
    create_simulator,
)
from . import log

__all__ = [
    "ACK_DOWN_LAG", "ArbiterPolicy", "ChannelSpec", "DanglingChannel",
    "Delay", "DuplicateId", "Halt", "Peek", "Phase", "PHASE_NAMES", "Proc",
    "ProcessSpec", "ProtocolViolation", "Recv", "RunResult", "Select",
    "Send", "SimError", "Simulator", "TICKS_PER_NS", "WidthMismatch",
    "Work", "create_simulator", "log",
]
