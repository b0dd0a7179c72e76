from .processor import (
    Core, Deadlock, PipelineFault, ProcessorConfig, ProgramResult,
    build_processor, run_program,
)
from . import channels
