import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainmind import Config, MemoryBank, TokenKind, chain_activate
from chainmind.activation import EdgeKind, EdgeLog, PropagationEdge
from chainmind.decision import (
    ActionKind, Direction, GoalNode, NotExecutable, decide, expand_goal, extract_paths, segmented_imitate, tally,
)
from chainmind.demos import demo_script
from chainmind.harness import run_scenario
from chainmind.harness import Session
from chainmind.innate import InnateRegistry, default_specs, install, monitor_vitals
from chainmind.tokenizer import InputEvent, make_payload
from oracles import enumerate_walks, random_bank


def P(symbol, kind="ordinary"):
    return make_payload(symbol, kind)


def saturate(bank, memory=255.0):
    for r in bank:
        r.memory_value = memory
    bank.touch()


def edge(src, dst, amount=50.0, parent=-1, rnd=1):
    return PropagationEdge(src, dst, EdgeKind.PROXIMITY, 0.5, amount, parent, rnd)


def hammer_bank():
    b = MemoryBank()
    b.append([P("hammer"), P("heavy"), P("hard")], 0, 0)
    b.append([P("nail")], 1)
    b.append([P("reward", "reward")], 2)
    b.append([P("stone"), P("heavy"), P("hard")], 20, 0)
    b.append([P("swing", "drive"), P("reward", "reward")], 21, 0)
    saturate(b)
    return b


def charging_bank():
    """Bank and report from the charging demo at the low-battery tick."""
    script = demo_script("charging")
    script = dataclasses.replace(script, events=[e for e in script.events if e.event_time < 20],
                                 expectations=[])
    reg = InnateRegistry()
    _, bank = run_scenario(script, registry=reg)
    return bank, reg


# tally

def test_tally_empty_and_additive():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("a")], 0)
    assert (tally(chain_activate(b, [0], cfg)).reward_sum, tally(chain_activate(b, [0], cfg)).punishment_sum) == (0, 0)
    b.append([P("joy", "reward")], 20)
    b.append([P("gain", "reward")], 40)
    b.set_activation(1, 50)
    b.set_activation(2, 30)
    t = tally(chain_activate(b, [], cfg))
    assert t.reward_sum == 80 and t.per_symbol == {"joy": 50, "gain": 30}
    assert t.reward_sum == sum(v for s, v in t.per_symbol.items() if t.kinds[s] is TokenKind.REWARD)


def test_tally_hungry():
    cfg = Config()
    bank, reg = MemoryBank.for_config(cfg), InnateRegistry()
    install(bank, default_specs(cfg), reg, cfg)
    t = tally(monitor_vitals(bank, InputEvent("vital", "battery=5", 0), reg, cfg))
    assert t.punishment_sum > 0 and t.reward_sum == 0


# paths

def test_extract_paths_unreachable():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("a"), P("joy", "reward")], 0, 20)
    r = chain_activate(b, [0], cfg)
    assert extract_paths(r, "joy", 3) == []
    assert extract_paths(r, "nothing", 3) == []


def test_extract_paths_two_chains():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("left")], 0)
    b.append([P("joy", "reward")], 2)
    b.append([P("right")], 3)
    saturate(b)
    b.set_memory(0, 200)
    src = b.append([P("left"), P("right")], 30, 0)
    r = chain_activate(b, src, cfg)
    paths = extract_paths(r, "joy", 5)
    records = [(p[0].source,) + tuple(e.target for e in p) for p in paths]
    assert (3, 0, 1) in records and (4, 2, 1) in records
    # the memory-strong chain wins
    assert records.index((4, 2, 1)) < records.index((3, 0, 1))
    keys = [min(e.transferred for e in p) for p in paths]
    assert keys == sorted(keys, reverse=True)


def brute_force_paths(bank, seeds, a0, cfg, symbol, n):
    ranked = {}
    for walk in enumerate_walks(bank, seeds, a0, cfg):
        recs = (walk[0][0],) + tuple(t for _, t, _, _ in walk)
        if bank.records[recs[-1]].symbol != symbol or len(set(recs)) != len(recs):
            continue
        key = (-min(x for *_, x in walk), len(walk), recs)
        ranked[recs] = min(key, ranked.get(recs, key))
    return [k[2] for k in sorted(ranked.values())[:n]]


@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.integers(1, 6))
def test_extract_paths_matches_brute_force(seed, n, width):
    rng = np.random.default_rng(seed)
    cfg = Config()
    b = random_bank(rng, n, cfg, residual=False)
    valence = [p for p, r in enumerate(b) if r.kind.is_valence]
    symbol = b.records[valence[0]].symbol if valence else "none"
    inputs = [int(rng.integers(n))]
    want = brute_force_paths(b, inputs, 150, cfg, symbol, width)
    r = chain_activate(b, inputs, cfg, a0=150)
    got = [(p[0].source,) + tuple(e.target for e in p) for p in extract_paths(r, symbol, width)]
    assert got == want


def test_single_path_on_hungry_preset():
    cfg = Config()
    bank, reg = MemoryBank.for_config(cfg), InnateRegistry()
    install(bank, default_specs(cfg), reg, cfg)
    r = monitor_vitals(bank, InputEvent("vital", "battery=5", 0), reg, cfg)
    (path,) = extract_paths(r, "punishment", 1)
    assert len(path) == 1
    assert (bank.records[path[0].source].symbol, path[0].kind) == ("hungry", EdgeKind.PROXIMITY)


# goal expansion

def test_expand_drive_bridge_is_leaf():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("go"), P("walk", "drive"), P("joy", "reward")], 0)
    node = GoalNode(1, "joy", [edge(0, 1), edge(1, 2, parent=0, rnd=2)], Direction.PROMOTE)
    assert expand_goal(b, node, cfg) == []


def test_expand_on_empty_bank():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("a"), P("b"), P("joy", "reward")], 0)
    node = GoalNode(1, "joy", [edge(0, 1), edge(1, 2, parent=0, rnd=2)], Direction.PROMOTE)
    empty = MemoryBank.for_config(cfg)
    empty.records = list(b.records)
    empty._reindex()
    for r in empty:
        r.memory_value = 0
    assert expand_goal(empty, node, cfg) == []


def test_hammer_bridges_to_stone():
    cfg = Config(n_paths=8)
    b = hammer_bank()
    (inp,) = b.append([P("hammer")], 40)
    r = chain_activate(b, [inp], cfg)
    (path,) = extract_paths(r, "reward", 1)
    node = GoalNode(1, "reward", path, Direction.PROMOTE, ancestry=frozenset([inp]))
    assert [b.records[p].symbol for p in node.bridge] == ["hammer"]
    assert not node.executable
    before = b.dumps()
    children = expand_goal(b, node, cfg)
    assert b.dumps() == before
    via_stone = [c for c in children if any(b.records[p].record_time >= 20 for p in c.bridge)]
    assert via_stone and all(c.level == 2 and c.executable for c in via_stone)
    assert {b.records[p].symbol for c in via_stone for p in c.bridge} <= {"heavy", "hard"}
    with pytest.raises(NotExecutable):
        segmented_imitate(b, [node], cfg)
    node.children = children
    plan = segmented_imitate(b, [node], cfg)
    assert {s.payload.symbol_id for s in plan} == {"swing"}


# segmented imitation

def test_replay_single_leaf():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("cue"), P("motor:stand_up", "drive"), P("motor:walk", "drive")], 0)
    b.append([P("joy", "reward")], 12)
    leaf = GoalNode(2, "joy", [edge(3, 0), edge(0, 3, parent=0, rnd=2)], Direction.PROMOTE)
    plan = segmented_imitate(b, [leaf], cfg)
    assert [(s.payload.symbol_id, s.offset) for s in plan] == [("motor:stand_up", 0), ("motor:walk", 1)]
    assert all(s.payload.kind is TokenKind.DRIVE for s in plan)


def test_leaves_sharing_a_drive_replay_it_each():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("a")], 0)
    b.append([P("push", "drive")], 5)
    b.append([P("b")], 10)
    b.append([P("joy", "reward")], 30)
    one = GoalNode(2, "joy", [edge(3, 0), edge(0, 3, parent=0, rnd=2)], Direction.PROMOTE)
    two = GoalNode(2, "joy", [edge(3, 2), edge(2, 3, parent=0, rnd=2)], Direction.PROMOTE)
    plan = segmented_imitate(b, [one, two], cfg)
    assert [s.payload.symbol_id for s in plan] == ["push", "push"]
    assert [s.offset for s in plan] == [0, 1]


def test_leaf_without_drives_is_not_executable():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("a"), P("joy", "reward")], 0, 20)
    leaf = GoalNode(2, "joy", [edge(1, 0), edge(0, 1, parent=0, rnd=2)], Direction.PROMOTE)
    with pytest.raises(NotExecutable):
        segmented_imitate(b, [leaf], cfg)


def test_suppress_leaf_uses_stored_escape_or_nothing():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("fire"), P("pain", "punishment")], 0)
    b.append([P("step_back", "drive")], 2)
    b.append([P("ice"), P("cold", "punishment")], 30)
    burn = GoalNode(1, "pain", [edge(0, 1)], Direction.SUPPRESS)
    freeze = GoalNode(1, "cold", [edge(3, 4)], Direction.SUPPRESS)
    assert [s.payload.symbol_id for s in segmented_imitate(b, [burn], cfg)] == ["step_back"]
    assert segmented_imitate(b, [freeze], cfg) == ()


def test_promote_leaf_on_punishment_path_dropped():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    b.append([P("cake"), P("grab", "drive"), P("joy", "reward"), P("pain", "punishment")], 0, 0)
    good = GoalNode(2, "joy", [edge(0, 1), edge(1, 2, parent=0, rnd=2)], Direction.PROMOTE)
    bad = GoalNode(2, "pain", [edge(1, 3)], Direction.SUPPRESS)
    assert [s.payload.symbol_id for s in segmented_imitate(b, [good], cfg)] == ["grab"]
    assert segmented_imitate(b, [good, bad], cfg) == ()


# decide

def test_quiet_report_continues_observing():
    cfg = Config()
    b = MemoryBank.for_config(cfg)
    pos = b.append([P("hello"), P("there")], 0)
    action = decide(b, chain_activate(b, pos, cfg), cfg)
    assert action.kind is ActionKind.CONTINUE_OBSERVING and action.plan == ()


@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_default_quiescence(seed, n):
    rng = np.random.default_rng(seed)
    cfg = Config()
    b = random_bank(rng, n, cfg)
    r = chain_activate(b, [int(rng.integers(n))], cfg, a0=float(rng.uniform(0, 120)))
    valence = [r.activations[p] for p in range(n) if r.kinds[p].is_valence]
    if all(v <= min(cfg.a1, cfg.p1) for v in valence):
        assert decide(b, r, cfg).kind is ActionKind.CONTINUE_OBSERVING


def test_charging_executes_charge():
    cfg = Config()
    bank, reg = charging_bank()
    s = Session(bank, cfg, reg)
    turn, _ = s.process([InputEvent("vital", "battery=12", 100)])
    action = turn.action
    assert action.kind is ActionKind.EXECUTE
    names = [st.payload.symbol_id for st in action.plan]
    assert "charge" in names and "lie_down" in names and "plug_in" in names
    assert all(st.payload.kind is TokenKind.DRIVE for st in action.plan)
    offsets = [st.offset for st in action.plan]
    assert offsets == sorted(offsets)


def test_charging_high_battery_continues():
    cfg = Config()
    bank, reg = charging_bank()
    turn, _ = Session(bank, cfg, reg).process([InputEvent("vital", "battery=80", 100)])
    assert turn.action.kind is ActionKind.CONTINUE_OBSERVING


def conflict_bank():
    b = MemoryBank()
    b.append([P("fire")], 0)
    b.append([P("warm"), P("joy", "reward"), P("smoke"), P("pain", "punishment")], 1, 0)
    b.append([P("ash")], 2)
    saturate(b)
    return b


def test_conflicting_valence_seeks_information():
    cfg = Config()
    b = conflict_bank()
    (inp,) = b.append([P("fire")], 40)
    r = chain_activate(b, [inp], cfg)
    t = tally(r)
    assert t.reward_sum > cfg.a1 and t.punishment_sum > cfg.p1
    action = decide(b, r, cfg)
    assert action.kind is ActionKind.SEEK_INFORMATION
    expected = []
    for p in r.top(len(b)):
        sym = r.symbols[p]
        if not r.kinds[p].is_valence and sym != "fire" and sym not in expected:
            expected.append(sym)
    assert list(action.targets) == expected[: cfg.seek_width]
    assert action.targets


def test_decide_is_pure():
    cfg = Config()
    bank, reg = charging_bank()
    s = Session(bank, cfg, reg)
    turn, _ = s.process([InputEvent("vital", "battery=12", 100)])
    snapshot = bank.dumps()
    version = bank.version
    again = decide(bank, turn.report, cfg)
    assert bank.dumps() == snapshot and bank.version == version
    assert str(again) == str(turn.action)


def scaled(report, c):
    e = report.edges
    edges = EdgeLog(e.source, e.target, e.kind, e.coefficient, e.transferred * c, e.parent, e.round)
    return dataclasses.replace(report, activations=report.activations * c, edges=edges)


def leaf_set(action):
    return sorted(tuple(leaf.records) for g in action.goals for leaf in g.leaves())


@given(st.floats(1.01, 4.0))
def test_argmax_invariance(c):
    cfg = Config()
    for bank, inp in ((conflict_bank(), "fire"), (hammer_bank(), "hammer")):
        (pos,) = bank.append([P(inp)], 40)
        r = chain_activate(bank, [pos], cfg.replace(a0_base=140))
        if not tally(r).over(cfg.a1, cfg.p1):
            continue
        base = decide(bank, r, cfg)
        assert leaf_set(decide(bank, scaled(r, c), cfg)) == leaf_set(base)
        assert base.kind is decide(bank, scaled(r, c), cfg).kind


def test_trace_is_readable():
    cfg = Config()
    b = conflict_bank()
    (inp,) = b.append([P("fire")], 40)
    action = decide(b, chain_activate(b, [inp], cfg), cfg)
    assert action.trace[0].startswith("tally reward=")
    assert any(line.strip().startswith("L1 ") for line in action.trace)
    assert action.trace[-1] == f"action {action}"
