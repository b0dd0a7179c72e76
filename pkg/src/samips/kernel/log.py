"""Event-log export and structural checks.

A log is a time-sorted list of (time, channel, phase, payload) tuples as
produced by the simulator.  Export formats: CSV with header
``time_ticks,channel,phase,payload_hex`` and JSON lines with the same fields.
"""

from __future__ import annotations

import json
from .sim import Phase, PHASE_NAMES

CSV_HEADER = "time_ticks,channel,phase,payload_hex"


def to_csv(events) -> str:
    lines = [CSV_HEADER]
    for t, ch, phase, payload in events:
        p = "" if payload is None else f"{payload:x}"
        lines.append(f"{t},{ch},{PHASE_NAMES[phase]},{p}")
    return "\n".join(lines) + "\n"


def to_jsonl(events) -> str:
    out = []
    for t, ch, phase, payload in events:
        out.append(json.dumps({
            "time_ticks": t,
            "channel": ch,
            "phase": PHASE_NAMES[phase],
            "payload_hex": None if payload is None else f"{payload:x}",
        }, separators=(",", ":")))
    return "\n".join(out) + "\n"


def check_phase_order(events):
    """Verify the strict ReqUp -> AckUp -> ReqDown -> AckDown cycle per channel.

    Returns the list of violations (empty when the log is well-formed).
    """
    expected = {}
    bad = []
    for t, ch, phase, _ in events:
        want = expected.get(ch, Phase.REQ_UP)
        if phase != want:
            bad.append((t, ch, PHASE_NAMES[phase], PHASE_NAMES[want]))
        expected[ch] = Phase((phase + 1) % 4)
    return bad


def conservation_counts(events):
    """Per-channel (req-up count, ack-up count) pairs."""
    counts = {}
    for _, ch, phase, _ in events:
        up, ack = counts.get(ch, (0, 0))
        if phase == Phase.REQ_UP:
            up += 1
        elif phase == Phase.ACK_UP:
            ack += 1
        counts[ch] = (up, ack)
    return counts


def causality_violations(events):
    """Transfers whose AckUp precedes its ReqUp (must be empty)."""
    last_req = {}
    bad = []
    for t, ch, phase, _ in events:
        if phase == Phase.REQ_UP:
            last_req[ch] = t
        elif phase == Phase.ACK_UP:
            if ch in last_req and t < last_req[ch]:
                bad.append((ch, last_req[ch], t))
    return bad
