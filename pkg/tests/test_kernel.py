import pytest

from samips.kernel import (
    ArbiterPolicy, ChannelSpec, DanglingChannel, DuplicateId, Phase,
    ProcessSpec, Simulator, WidthMismatch, log,
)
from samips.kernel.sim import Delay, Halt, Recv, Select, Send, Work


def producer_of(values, channel, delay=0):
    def behavior(p):
        for v in values:
            if delay:
                yield Delay(delay)
            yield Send(channel, v)
    return behavior


def consumer_of(sink, channel, n):
    def behavior(p):
        for _ in range(n):
            got = yield Recv(channel)
            sink.append(got[1])
    return behavior


def two_proc_sim(values, width=32, delay=0, policy=ArbiterPolicy()):
    sink = []
    procs = [
        ProcessSpec("prod", (), ("c",), producer_of(values, "c", delay)),
        ProcessSpec("cons", ("c",), (), consumer_of(sink, "c", len(values))),
    ]
    sim = Simulator(procs, [ChannelSpec("c", width)], policy)
    return sim, sink


def test_minimal_wiring():
    sim, _ = two_proc_sim([1])
    assert len(sim.channels) == 1
    assert sim.events == []


def test_identity_transfer_logs_four_phases():
    sim, sink = two_proc_sim([0x00000004])
    res = sim.run()
    assert res.status == "quiescent"
    assert sink == [4]
    assert [e[2] for e in res.events] == [
        Phase.REQ_UP, Phase.ACK_UP, Phase.REQ_DOWN, Phase.ACK_DOWN]
    assert res.events[0][3] == 4


def test_width_check():
    sim, _ = two_proc_sim([0x1F], width=5)
    assert sim.run().status == "quiescent"
    sim2, _ = two_proc_sim([0x3F], width=5)
    with pytest.raises(WidthMismatch):
        sim2.run()


def test_consumer_ack_latency():
    # producer delays 200 ticks (20 ns); consumer waits from t=0
    sim, _ = two_proc_sim([7], delay=200)
    res = sim.run()
    req = [e for e in res.events if e[2] == Phase.REQ_UP][0]
    ack = [e for e in res.events if e[2] == Phase.ACK_UP][0]
    assert req[0] == 200
    assert ack[0] - req[0] == 2  # default ack latency


def test_duplicate_consumer_rejected():
    procs = [
        ProcessSpec("p", (), ("c",), producer_of([1], "c")),
        ProcessSpec("c1", ("c",), (), consumer_of([], "c", 1)),
        ProcessSpec("c2", ("c",), (), consumer_of([], "c", 1)),
    ]
    with pytest.raises(DuplicateId):
        Simulator(procs, [ChannelSpec("c", 8)])


def test_dangling_channel_rejected():
    procs = [ProcessSpec("p", (), ("c",), producer_of([1], "c"))]
    with pytest.raises(DanglingChannel):
        Simulator(procs, [ChannelSpec("c", 8)])


def test_empty_process_set_quiesces():
    sim = Simulator([], [])
    res = sim.run()
    assert res.status == "quiescent"
    assert res.events == []


def arbiter_fixture(t0, t1, seed=1):
    """Two producers racing into a 2-way select."""
    winners = []

    def left(p):
        yield Delay(t0)
        yield Send("a", 10)

    def right(p):
        yield Delay(t1)
        yield Send("b", 20)

    def arb(p):
        got = yield Select(("a", "b"))
        winners.append(got[0])
        got = yield Select(("a", "b"))
        winners.append(got[0])

    procs = [
        ProcessSpec("L", (), ("a",), left),
        ProcessSpec("R", (), ("b",), right),
        ProcessSpec("A", ("a", "b"), (), arb),
    ]
    sim = Simulator(procs, [ChannelSpec("a", 8), ChannelSpec("b", 8)],
                    ArbiterPolicy("seeded_random_tie", seed))
    return sim, winners


def test_arbitrate_earliest_wins():
    sim, winners = arbiter_fixture(10, 12)
    assert sim.run().status == "quiescent"
    assert winners == ["a", "b"]
    sim, winners = arbiter_fixture(12, 10)
    sim.run()
    assert winners == ["b", "a"]


def test_arbitrate_simultaneous_replays_with_seed():
    results = set()
    for _ in range(3):
        sim, winners = arbiter_fixture(10, 10, seed=1)
        sim.run()
        results.add(tuple(winners))
    assert len(results) == 1  # same seed, same outcome
    # loser is served next round regardless of the tie outcome
    w = results.pop()
    assert set(w) == {"a", "b"}


def test_no_starvation_pending_request_served():
    served = []

    def spam(p):
        for i in range(5):
            yield Send("a", i)

    def once(p):
        yield Delay(1)
        yield Send("b", 99)

    def arb(p):
        for _ in range(6):
            got = yield Select(("a", "b"))
            served.append((got[0], got[1]))

    procs = [
        ProcessSpec("S", (), ("a",), spam),
        ProcessSpec("O", (), ("b",), once),
        ProcessSpec("A", ("a", "b"), (), arb),
    ]
    sim = Simulator(procs, [ChannelSpec("a", 8), ChannelSpec("b", 8)])
    assert sim.run().status == "quiescent"
    b_pos = [i for i, (c, _) in enumerate(served) if c == "b"]
    assert b_pos and b_pos[0] <= 2  # within two rounds of arrival


def buffer_loop_procs():
    """Single-place buffers in a ring: repeats forever."""
    def buf(inp, out, prime):
        def behavior(p):
            if prime:
                yield Send(out, 0)
            while True:
                v, _ = (yield Recv(inp))[1:]
                yield Work("hold")
                yield Send(out, v)
        return behavior

    return [
        ProcessSpec("b0", ("x",), ("y",), buf("x", "y", True),
                    {"hold": 10}),
        ProcessSpec("b1", ("y",), ("x",), buf("y", "x", False),
                    {"hold": 10}),
    ]


def test_buffer_loop_halts_on_max_events():
    sim = Simulator(buffer_loop_procs(),
                    [ChannelSpec("x", 8), ChannelSpec("y", 8)])
    res = sim.run(max_events=500)
    assert res.status == "max_events"
    assert res.time > 0


def test_livelock_detected_when_time_frozen():
    def spin_src(p):
        while True:
            yield Send("x", 1)

    def spin_sink(p):
        while True:
            yield Recv("x")

    procs = [
        ProcessSpec("s", (), ("x",), spin_src, {"ack": 0}),
        ProcessSpec("k", ("x",), (), spin_sink, {"ack": 0}),
    ]
    sim = Simulator(procs, [ChannelSpec("x", 4)])
    # zero ack latency still advances by the fixed return-phase lags, so
    # freeze time harder: both delays zero means time only grows by ack-down
    res = sim.run(max_events=5000)
    assert res.status in ("max_events", "livelock")


def test_replay_determinism_bit_identical():
    def run_once():
        sim, winners = arbiter_fixture(10, 10, seed=7)
        sim.run()
        return log.to_csv(sim.events), tuple(winners)

    a, wa = run_once()
    b, wb = run_once()
    assert a == b
    assert wa == wb


def test_phase_order_and_conservation():
    sim, _ = two_proc_sim([1, 2, 3])
    res = sim.run()
    assert log.check_phase_order(res.events) == []
    for up, ack in log.conservation_counts(res.events).values():
        assert up == ack
    assert log.causality_violations(res.events) == []


def test_pull_channel_payload_on_ack():
    def prod(p):
        yield Delay(50)
        yield Send("npc", 0xAB)

    def cons(p):
        got = yield Recv("npc")
        p.state = got[1]

    procs = [ProcessSpec("P", (), ("npc",), prod),
             ProcessSpec("C", ("npc",), (), cons)]
    sim = Simulator(procs, [ChannelSpec("npc", 8, "pull")])
    res = sim.run()
    assert sim.procs["C"].state == 0xAB
    phases = [(e[2], e[3]) for e in res.events]
    assert phases[0] == (Phase.REQ_UP, None)  # consumer raises the request
    assert phases[1][0] == Phase.ACK_UP and phases[1][1] == 0xAB


def test_csv_and_jsonl_round_shapes():
    sim, _ = two_proc_sim([0xFF])
    res = sim.run()
    csv = log.to_csv(res.events)
    assert csv.splitlines()[0] == "time_ticks,channel,phase,payload_hex"
    assert "ReqUp" in csv and "ff" in csv
    jl = log.to_jsonl(res.events)
    assert '"channel":"c"' in jl


def test_halted_process_counts_as_quiescent():
    def stopper(p):
        yield Recv("c")
        yield Halt()

    procs = [ProcessSpec("p", (), ("c",), producer_of([1, 2], "c")),
             ProcessSpec("h", ("c",), (), stopper)]
    sim = Simulator(procs, [ChannelSpec("c", 8)])
    res = sim.run()
    # producer still parked with its second send: reported as blocked
    assert res.status == "quiescent"
    assert ("p", ["c"]) in res.blocked
