"""Asynchronous MIPS R3000 pipeline simulator.

Subpackages:

- ``kernel``: deterministic discrete-event runtime for handshake channels.
- ``isa``: instruction encoding/decoding, control encodings, assembler,
  memory images.
- ``arch``: architectural state and the sequential golden-model interpreter.
- ``hazards``: data-hazard structures (DHDQ/DHDT/FRAQ) and the multi-colour
  control-hazard algorithm.
- ``pipeline``: the full processor built from kernel processes.
- ``metrics``: busy/wait/idle decomposition, channel utilisation, instruction
  mix and pipeline latency/throughput calculators.
- ``experiments``: the forwarding-depth and colour-vector evaluation frames.
"""

__version__ = "0.1.0"
