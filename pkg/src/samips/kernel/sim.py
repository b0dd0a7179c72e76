"""Deterministic discrete-event runtime for handshake processes.

Processes are cooperatively scheduled generators that communicate over named
point-to-point channels using an abstract 4-phase handshake: every completed
transfer is recorded as four timestamped phases (req up, ack up, req down,
ack down).  Push channels carry the payload with the request, pull channels
with the acknowledge.  Time is kept in integer ticks of 0.1 ns.

Determinism contract: given identical wiring, delay tables, seed and stimulus,
two runs produce identical event logs byte for byte.  Same-time events are
ordered by an explicit (time, order-class, sequence) key and arbitration ties
are resolved by the configured policy only.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Iterable, Optional

TICKS_PER_NS = 10

# Return-phase latencies of the abstract 4-phase cycle, in ticks.
REQ_DOWN_LAG = 1
ACK_DOWN_LAG = 2

DEFAULT_ACK_LATENCY = 2


class SimError(Exception):
    """Base class for kernel errors."""


class DuplicateId(SimError):
    pass


class DanglingChannel(SimError):
    pass


class WidthMismatch(SimError):
    pass


class ProtocolViolation(SimError):
    pass


class Phase(IntEnum):
    REQ_UP = 0
    ACK_UP = 1
    REQ_DOWN = 2
    ACK_DOWN = 3


PHASE_NAMES = ("ReqUp", "AckUp", "ReqDown", "AckDown")


@dataclass(frozen=True)
class ChannelSpec:
    """A named handshake channel; width in bits, 0 for pure-sync channels."""

    id: str
    width: int
    direction: str = "push"  # "push" | "pull"

    def __post_init__(self):
        if self.direction not in ("push", "pull"):
            raise ValueError(f"bad channel direction {self.direction!r}")
        if self.width < 0:
            raise ValueError("negative channel width")


@dataclass(frozen=True)
class ArbiterPolicy:
    """Tie-break policy for simultaneous requests at a choice point."""

    mode: str = "earliest_request"  # or "seeded_random_tie"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("earliest_request", "seeded_random_tie"):
            raise ValueError(f"bad arbiter mode {self.mode!r}")


@dataclass(frozen=True)
class ProcessSpec:
    name: str
    inputs: tuple
    outputs: tuple
    behavior: Callable  # called with the live Proc, returns a generator
    delay_table: dict = field(default_factory=dict)


# Commands a process generator may yield.


class Send:
    __slots__ = ("channel", "payload", "meta")

    def __init__(self, channel, payload, meta=None):
        self.channel = channel
        self.payload = payload
        self.meta = meta


class Recv:
    __slots__ = ("channel",)

    def __init__(self, channel):
        self.channel = channel


class Select:
    """Blocking choice over 2..4 input channels (an arbiter)."""

    __slots__ = ("channels",)

    def __init__(self, channels):
        self.channels = tuple(channels)


class Peek:
    """Non-blocking probe: pending requests on the given input channels."""

    __slots__ = ("channels",)

    def __init__(self, channels):
        self.channels = tuple(channels)


class Delay:
    __slots__ = ("ticks",)

    def __init__(self, ticks):
        self.ticks = ticks


class Work:
    """Delay by the process's named delay-table entry."""

    __slots__ = ("action",)

    def __init__(self, action):
        self.action = action


class Halt:
    """Mark the process as intentionally stopped (normal for e.g. a halt op)."""

    __slots__ = ()


class Proc:
    __slots__ = (
        "name", "inputs", "outputs", "delay_table", "gen", "time",
        "state", "halted", "finished", "waiting_on",
    )

    def __init__(self, spec: ProcessSpec):
        self.name = spec.name
        self.inputs = frozenset(spec.inputs)
        self.outputs = frozenset(spec.outputs)
        self.delay_table = dict(spec.delay_table)
        self.gen = None
        self.time = 0
        self.state = None
        self.halted = False
        self.finished = False
        self.waiting_on = None  # channel name(s) while blocked


class _Channel:
    __slots__ = (
        "spec", "producer", "consumer", "pending_send", "pending_recv",
        "selector", "cycle_open",
    )

    def __init__(self, spec: ChannelSpec):
        self.spec = spec
        self.producer = None
        self.consumer = None
        # pending_send: (req_time, payload, meta, proc) | None
        self.pending_send = None
        # pending_recv: (ready_time, proc) | None
        self.pending_recv = None
        self.selector = None  # Proc parked on a Select that includes us
        self.cycle_open = False


@dataclass
class RunResult:
    status: str  # quiescent | max_time | max_events | livelock
    time: int
    events: list
    blocked: list  # [(proc, channels)] for parked processes at end


_ORD_RESUME = 0
_ORD_RESOLVE = 1


class Simulator:
    """Single-threaded deterministic event loop over handshake processes."""

    def __init__(self, processes: Iterable[ProcessSpec],
                 channels: Iterable[ChannelSpec],
                 policy: ArbiterPolicy = ArbiterPolicy(),
                 log: bool = True):
        self.policy = policy
        self._rng = random.Random(policy.seed)
        self._log_enabled = log
        self.events = []
        self._queue = []
        self._seq = 0
        self._nevents = 0
        self.time = 0

        self.channels: dict[str, _Channel] = {}
        for cs in channels:
            if cs.id in self.channels:
                raise DuplicateId(f"channel {cs.id!r} declared twice")
            self.channels[cs.id] = _Channel(cs)

        self.procs: dict[str, Proc] = {}
        for ps in processes:
            if ps.name in self.procs:
                raise DuplicateId(f"process {ps.name!r} declared twice")
            self.procs[ps.name] = Proc(ps)
            for c in ps.inputs:
                ch = self._channel(c)
                if ch.consumer is not None:
                    raise DuplicateId(f"channel {c!r} has two consumers")
                ch.consumer = ps.name
            for c in ps.outputs:
                ch = self._channel(c)
                if ch.producer is not None:
                    raise DuplicateId(f"channel {c!r} has two producers")
                ch.producer = ps.name

        for cid, ch in self.channels.items():
            if ch.producer is None or ch.consumer is None:
                raise DanglingChannel(
                    f"channel {cid!r} lacks a "
                    f"{'producer' if ch.producer is None else 'consumer'}")

        for ps in processes:
            proc = self.procs[ps.name]
            proc.gen = ps.behavior(proc)
            self._schedule(0, _ORD_RESUME, proc, None)

    # -- plumbing -----------------------------------------------------------

    def _channel(self, cid) -> _Channel:
        try:
            return self.channels[cid]
        except KeyError:
            raise DanglingChannel(f"unknown channel {cid!r}") from None

    def _schedule(self, time, order, proc, value):
        self._seq += 1
        heapq.heappush(self._queue, (time, order, self._seq, proc, value))

    def _log(self, time, channel, phase, payload):
        if self._log_enabled:
            self.events.append((time, channel, phase, payload))

    # -- handshake completion ----------------------------------------------

    def _complete(self, ch: _Channel):
        """Both sides present: emit the 4 phases and schedule both resumes."""
        req_time, payload, meta, sender = ch.pending_send
        ready, receiver = ch.pending_recv
        ch.pending_send = None
        ch.pending_recv = None
        ch.selector = None
        ch.cycle_open = False

        if ch.spec.direction == "push":
            acker = receiver  # consumer acknowledges the pushed data
        else:
            acker = sender  # pull: producer answers the consumer's request
        t_ack = max(req_time, ready) + acker.delay_table.get(
            "ack", DEFAULT_ACK_LATENCY)
        cid = ch.spec.id
        if ch.spec.direction == "push":
            # req already logged at registration
            self._log(t_ack, cid, Phase.ACK_UP, None)
        else:
            self._log(t_ack, cid, Phase.ACK_UP, payload)
        self._log(t_ack + REQ_DOWN_LAG, cid, Phase.REQ_DOWN, None)
        self._log(t_ack + ACK_DOWN_LAG, cid, Phase.ACK_DOWN, None)

        # Data receiver resumes with the payload at ack-up; the sender holds
        # the channel until the cycle closes.
        receiver.time = t_ack
        sender.time = t_ack + ACK_DOWN_LAG
        receiver.waiting_on = None
        sender.waiting_on = None
        self._schedule(t_ack, _ORD_RESUME, receiver, (cid, payload, meta))
        self._schedule(t_ack + ACK_DOWN_LAG, _ORD_RESUME, sender, None)

    def _register_send(self, proc: Proc, cmd: Send):
        ch = self._channel(cmd.channel)
        if ch.producer != proc.name:
            raise ProtocolViolation(
                f"{proc.name} is not the producer of {cmd.channel!r}")
        if ch.pending_send is not None:
            raise ProtocolViolation(
                f"send on {cmd.channel!r} while a cycle is incomplete")
        payload = 0 if cmd.payload is None else int(cmd.payload)
        w = ch.spec.width
        if payload < 0 or (payload >> w if w else payload):
            raise WidthMismatch(
                f"payload {payload:#x} does not fit {w}-bit {cmd.channel!r}")
        ch.pending_send = (proc.time, payload, cmd.meta, proc)
        proc.waiting_on = cmd.channel
        if ch.spec.direction == "push":
            ch.cycle_open = True
            self._log(proc.time, ch.spec.id, Phase.REQ_UP, payload)
        if ch.pending_recv is not None:
            self._complete(ch)
        elif ch.selector is not None:
            # let every same-time request register before resolving
            self._schedule(proc.time, _ORD_RESOLVE, ch.selector, None)

    def _register_recv(self, proc: Proc, channel):
        ch = self._channel(channel)
        if ch.consumer != proc.name:
            raise ProtocolViolation(
                f"{proc.name} is not the consumer of {channel!r}")
        ch.pending_recv = (proc.time, proc)
        proc.waiting_on = channel
        if ch.spec.direction == "pull":
            ch.cycle_open = True
            self._log(proc.time, ch.spec.id, Phase.REQ_UP, None)
        if ch.pending_send is not None:
            self._complete(ch)

    def _try_resolve_select(self, proc: Proc, channels) -> bool:
        pending = []
        for cid in channels:
            ch = self._channel(cid)
            if ch.pending_send is not None:
                pending.append((ch.pending_send[0], cid))
        if not pending:
            return False
        t0 = min(p[0] for p in pending)
        tied = sorted(cid for t, cid in pending if t == t0)
        if len(tied) > 1 and self.policy.mode == "seeded_random_tie":
            winner = tied[self._rng.randrange(len(tied))]
        else:
            winner = tied[0]
        for cid in channels:
            ch = self._channel(cid)
            ch.selector = None
        wch = self._channel(winner)
        wch.pending_recv = (proc.time, proc)
        self._complete(wch)
        return True

    def _register_select(self, proc: Proc, cmd: Select):
        if not 2 <= len(cmd.channels) <= 4:
            raise ProtocolViolation("select needs 2..4 channels")
        for cid in cmd.channels:
            ch = self._channel(cid)
            if ch.consumer != proc.name:
                raise ProtocolViolation(
                    f"{proc.name} is not the consumer of {cid!r}")
            if ch.spec.direction == "pull":
                raise ProtocolViolation("pull channels cannot be selected on")
        if self._try_resolve_select(proc, cmd.channels):
            return
        proc.waiting_on = cmd.channels
        for cid in cmd.channels:
            self._channel(cid).selector = proc

    # -- stepping -----------------------------------------------------------

    def _step_proc(self, proc: Proc, value):
        """Advance a process generator until it blocks."""
        gen = proc.gen
        while True:
            try:
                cmd = gen.send(value)
            except StopIteration:
                proc.finished = True
                proc.waiting_on = None
                return
            value = None
            if type(cmd) is Send:
                self._register_send(proc, cmd)
                return
            if type(cmd) is Recv:
                self._register_recv(proc, cmd.channel)
                return
            if type(cmd) is Select:
                self._register_select(proc, cmd)
                return
            if type(cmd) is Delay:
                proc.time += cmd.ticks
                self._schedule(proc.time, _ORD_RESUME, proc, None)
                return
            if type(cmd) is Work:
                proc.time += proc.delay_table.get(cmd.action, 0)
                self._schedule(proc.time, _ORD_RESUME, proc, None)
                return
            if type(cmd) is Peek:
                found = []
                for cid in cmd.channels:
                    ch = self._channel(cid)
                    if ch.pending_send is not None:
                        t, payload, meta, _ = ch.pending_send
                        found.append((cid, t, payload, meta))
                value = tuple(found)
                continue
            if type(cmd) is Halt:
                proc.halted = True
                proc.waiting_on = None
                return
            raise SimError(f"{proc.name} yielded unknown command {cmd!r}")

    def run(self, max_time: Optional[int] = None,
            max_events: Optional[int] = None) -> RunResult:
        queue = self._queue
        window = []  # recent event times for livelock detection
        while queue:
            time, order, _seq, proc, value = heapq.heappop(queue)
            if max_time is not None and time > max_time:
                heapq.heappush(queue, (time, order, _seq, proc, value))
                self._finish_log()
                return RunResult("max_time", self.time, self.events,
                                 self._blocked())
            self.time = time
            self._nevents += 1
            if max_events is not None:
                window.append(time)
                if len(window) > 1024:
                    window.pop(0)
                if self._nevents >= max_events:
                    self._finish_log()
                    status = ("livelock"
                              if len(window) > 64 and window[0] == time
                              else "max_events")
                    return RunResult(status, self.time, self.events,
                                     self._blocked())
            if order == _ORD_RESOLVE:
                if isinstance(proc.waiting_on, tuple):
                    self._try_resolve_select(proc, proc.waiting_on)
                continue
            if proc.halted or proc.finished:
                continue
            proc.time = max(proc.time, time)
            self._step_proc(proc, value)
        self._finish_log()
        return RunResult("quiescent", self.time, self.events, self._blocked())

    def _blocked(self):
        out = []
        for name in sorted(self.procs):
            p = self.procs[name]
            if p.waiting_on is not None and not (p.halted or p.finished):
                chans = (list(p.waiting_on)
                         if isinstance(p.waiting_on, tuple)
                         else [p.waiting_on])
                out.append((name, chans))
        return out

    def _finish_log(self):
        # stable sort: same-time events on one channel keep emission order,
        # so the 4-phase cycle survives back-to-back transfers
        if self._log_enabled:
            self.events.sort(key=lambda e: (e[0], e[1]))


def create_simulator(processes, channels, policy=ArbiterPolicy(), log=True):
    return Simulator(processes, channels, policy, log)


# -- generator helpers for behaviors ---------------------------------------


def send(channel, payload, meta=None):
    yield Send(channel, payload, meta)


def recv(channel):
    got = yield Recv(channel)
    _, payload, meta = got
    return payload, meta


def select(*channels):
    got = yield Select(channels)
    return got  # (channel, payload, meta)


def work(action):
    yield Work(action)


def delay(ticks):
    yield Delay(ticks)
