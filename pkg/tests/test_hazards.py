import random

import pytest
from hypothesis import given, settings, strategies as st

from samips.hazards import (
    Dhdt, EXER, HazardRequest, InvalidShape, Kind, LengthMismatch, MEMR, NON,
    NoMatch, Verdict, WBR, aau_check, colour_check_stage, colour_flip,
    colour_init, dhdq_init, dhdq_read, dhdq_write, dhdt_read, dhdt_write,
    fraq_init, fraq_step, interrupt_backpoint, storage_cost,
)


# -- worked example: SUB/AND/OR/ADD/SW over $2 -------------------------------


def test_worked_example_dhdq_walk():
    q = dhdq_init()
    assert q == (0, 0, 0, 0)
    fw0, fw1, q = dhdq_read(q, 1, 3, 2)          # SUB $2, $1, $3
    assert (fw0, fw1) == (NON, NON)
    assert q == (2, 0, 0, 0)
    fw0, fw1, q = dhdq_read(q, 2, 4, 3)          # AND $3, $2, $4
    assert fw0 == EXER
    assert q == (3, 2, 0, 0)
    fw0, fw1, q = dhdq_read(q, 1, 2, 4)          # OR $4, $1, $2
    assert fw1 == MEMR
    assert q == (4, 3, 2, 0)
    fw0, fw1, q = dhdq_read(q, 1, 2, 5)          # ADD $5, $1, $2
    assert fw1 == WBR
    assert q == (5, 4, 3, 2)
    # SUB's write-back arrives, then SW reads $2: valid again
    q = dhdq_write(q, 2)
    assert q == (5, 4, 3, 0)
    fw0, fw1, q = dhdq_read(q, 2, 5, 0)          # SW $5, 100($2)
    assert fw0 == NON
    assert q == (0, 5, 4, 3)


def test_worked_example_fraq_walk():
    f = fraq_init()
    assert f == (0, 0)
    out, f = fraq_step(f, True)                  # SUB writes $2
    assert out == (0, 0) and f == (1, 0)
    out, f = fraq_step(f, True)                  # AND writes $3
    assert out == (1, 0) and f == (1, 1)
    out, f = fraq_step(f, True)                  # OR writes $4
    assert out == (1, 1) and f == (1, 1)
    out, f = fraq_step(f, True)                  # ADD writes $5
    assert out == (1, 1) and f == (1, 1)
    out, f = fraq_step(f, False)                 # SW writes nothing
    assert out == (1, 1) and f == (0, 1)


def test_worked_example_dhdt_walk():
    t = Dhdt.init()
    fw0, fw1, t = dhdt_read(t, 1, 3, 2)          # SUB at cur=0
    assert (fw0, fw1) == (NON, NON)
    assert t.clean[2] == 0 and t.index[2] == 0
    fw0, fw1, t = dhdt_read(t, 2, 4, 3)          # AND at cur=1
    assert fw0 == 1                              # forwarded from MEM
    fw0, fw1, t = dhdt_read(t, 1, 2, 4)          # OR at cur=2
    assert fw1 == 2
    fw0, fw1, t = dhdt_read(t, 1, 2, 5)          # ADD at cur=3
    assert fw1 == 3


def test_dhdq_write_oldest_match_cleared():
    assert dhdq_write((5, 4, 3, 2), 2) == (5, 4, 3, 0)
    assert dhdq_write((3, 2, 2, 0), 2) == (3, 2, 0, 0)
    with pytest.raises(NoMatch):
        dhdq_write((0, 0, 0, 0), 7)


def test_dhdq_read_youngest_match_wins():
    fw0, _, _ = dhdq_read((2, 2, 0, 0), 2, 0, 0)
    assert fw0 == 1


def test_oldest_slot_reads_file_directly():
    fw0, _, _ = dhdq_read((0, 0, 0, 2), 2, 0, 0)
    assert fw0 == NON


def test_dhdt_write_snapshot_guard():
    t = Dhdt.init()
    _, _, t = dhdt_read(t, 0, 0, 2)              # write marker at idx 0
    t2 = dhdt_write(t, 2, 0)
    assert t2.clean[2] == 1
    t3 = dhdt_write(t, 2, 1)                     # stale snapshot
    assert t3.clean[2] == 0


def test_consecutive_writers_same_register():
    # SUB $2.. ; AND $2..: only the second write-back cleans the flag
    t = Dhdt.init()
    _, _, t = dhdt_read(t, 0, 0, 2)              # SUB at idx 0
    _, _, t = dhdt_read(t, 0, 0, 2)              # AND at idx 1
    t = dhdt_write(t, 2, 0)                      # SUB's write: mismatch
    assert t.clean[2] == 0
    t = dhdt_write(t, 2, 1)                      # AND's write: match
    assert t.clean[2] == 1


def test_storage_cost_table():
    assert [storage_cost("dhdt", n, 3) for n in range(5, 10)] == \
        [95, 127, 127, 127, 127]
    assert [storage_cost("dhdq", n, 3) for n in range(5, 10)] == \
        [20, 25, 30, 35, 40]
    assert storage_cost("dhdq", 4, 3) == 15
    with pytest.raises(InvalidShape):
        storage_cost("dhdq", 3, 3)


# -- DHDQ/DHDT equivalence ----------------------------------------------------


def replay_equivalence(seed, rounds, n=5, i=3):
    """Replay an in-order trace through both structures; writes retire in
    order n-i rounds after issue."""
    rng = random.Random(seed)
    q = dhdq_init(n, i)
    t = Dhdt.init(n, i)
    pending = []  # (wd, index_snapshot) in issue order
    lag = n - i
    cur = 0
    fws_q, fws_t = [], []
    for _ in range(rounds):
        if len(pending) > lag:
            wd, snap = pending.pop(0)
            if wd:
                q = dhdq_write(q, wd)
                t = dhdt_write(t, wd, snap)
        rs, rt = rng.randrange(32), rng.randrange(32)
        wd = rng.randrange(32) if rng.random() < 0.6 else 0
        a0, a1, q = dhdq_read(q, rs, rt, wd)
        b0, b1, t2 = dhdt_read(t, rs, rt, wd)
        fws_q.append((a0, a1))
        fws_t.append((b0, b1))
        pending.append((wd, cur))
        cur = (cur + 1) % (n - i + 2)
        t = t2
    return fws_q, fws_t


def test_dhdq_dhdt_equivalence_quick():
    for seed in range(200):
        a, b = replay_equivalence(seed, rounds=12)
        assert a == b, f"seed {seed}"


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_dhdq_snapshot_property(seed):
    # after any read, the queue equals the last n-i+2 write destinations
    rng = random.Random(seed)
    q = dhdq_init()
    issued = []
    for _ in range(rng.randrange(1, 12)):
        wd = rng.randrange(32)
        _, _, q = dhdq_read(q, rng.randrange(32), rng.randrange(32), wd)
        issued.append(wd)
    want = tuple(reversed(issued[-4:])) + (0,) * max(0, 4 - len(issued))
    assert q == want


# -- colour algorithm ---------------------------------------------------------


def test_colour_check_examples():
    stage = (0, 0, 0)
    v, c = colour_check_stage(0, stage, (0, 0, 0))
    assert v == Verdict.EXECUTE and c == stage

    v, c = colour_check_stage(0, (1, 0, 0), (0, 0, 0))
    assert v == Verdict.DISCARD and c == (1, 0, 0)

    v, c = colour_check_stage(0, (0, 0, 0), (0, 0, 1))
    assert v == Verdict.EXECUTE_ADOPT and c == (0, 0, 1)

    # a deeper-stage transfer overrides a stale own bit
    v, c = colour_check_stage(0, (1, 0, 0), (0, 0, 1))
    assert v == Verdict.EXECUTE_ADOPT and c == (0, 0, 1)


def test_colour_check_length_mismatch():
    with pytest.raises(LengthMismatch):
        colour_check_stage(0, (0, 0), (0, 0, 0))


def test_aau_pc_requests_exact_match():
    aau = (0, 1, 0)
    ok, c, act = aau_check(aau, HazardRequest(0x400000, (0, 1, 0), 3, Kind.PC))
    assert ok and act == "issue_address" and c == aau
    ok, c, act = aau_check(aau, HazardRequest(0x400000, (1, 1, 0), 3, Kind.PC))
    assert not ok and c == aau


def test_aau_stage_priority_filter():
    aau = (0, 0, 0)
    # ID request with matching higher bits: accepted, colour adopted
    req = HazardRequest(0x80, (1, 0, 0), 0, Kind.BRANCH)
    ok, c, act = aau_check(aau, req)
    assert ok and c == (1, 0, 0) and act == "issue_address"
    # ID request whose MEM bit mismatches: superseded, rejected
    req = HazardRequest(0x80, (1, 0, 1), 0, Kind.BRANCH)
    ok, c, act = aau_check((0, 0, 0), req)
    assert not ok and c == (0, 0, 0)
    # MEM requests always pass the priority filter
    req = HazardRequest(0x80, (1, 1, 1), 2, Kind.EXCEPTION)
    ok, c, act = aau_check((0, 0, 0), req)
    assert ok and c == (1, 1, 1) and act == "issue_exception_vector"


def test_aau_reject_changes_nothing():
    aau = (0, 0, 0)
    req = HazardRequest(0x80, (0, 1, 1), 1, Kind.BRANCH)  # MEM bit stale
    ok, c, _ = aau_check(aau, req)
    assert not ok and c == aau


def test_colour_monotonicity_random():
    rng = random.Random(7)
    aau = colour_init(3)
    for _ in range(2000):
        stage = rng.randrange(3)
        colour = tuple(rng.randrange(2) for _ in range(3))
        req = HazardRequest(0, colour, stage,
                            rng.choice([Kind.BRANCH, Kind.EXCEPTION]))
        ok, new, _ = aau_check(aau, req)
        if ok:
            assert new == req.colour
        else:
            assert new == aau
        aau = new


def test_interrupt_backpoint_cases():
    assert interrupt_backpoint(0x00400020, None) == 0x00400024
    br = HazardRequest(0x00400100, (0, 0, 0), 1, Kind.BRANCH)
    assert interrupt_backpoint(0x00400020, br) == 0x00400100
    ex = HazardRequest(0x00400018, (0, 0, 0), 0, Kind.EXCEPTION)
    assert interrupt_backpoint(0x00400020, ex) == 0x00400018


def test_colour_flip_helper():
    assert colour_flip((0, 0, 0), 1) == (0, 1, 0)
    assert colour_flip((0, 1, 0), 1) == (0, 0, 0)
