"""Seek-benefit-avoid-harm decisions over an activation report.

Reward and punishment activations are the value prediction. Paths that carry
activation into valence records become goals; the records inside a path are
the bridge tokens, which are re-seeded on a planning snapshot to decompose
the goal until its bridges sit next to stored drive commands. Executable
leaves are turned into a plan by replaying those stored drive sequences.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .activation import ActivationReport, EdgeKind, PropagationEdge, chain_activate
from .bank import MemoryBank, TokenKind, TokenPayload
from .config import Config


class Direction(str, enum.Enum):
    PROMOTE = "promote"
    SUPPRESS = "suppress"


class ActionKind(str, enum.Enum):
    CONTINUE_OBSERVING = "ContinueObserving"
    SEEK_INFORMATION = "SeekInformation"
    EXECUTE = "Execute"


@dataclass(frozen=True)
class PlanStep:
    payload: TokenPayload
    offset: int
    source: int  # bank position the step imitates


@dataclass
class ValenceTally:
    reward_sum: float = 0.0
    punishment_sum: float = 0.0
    per_symbol: dict[str, float] = field(default_factory=dict)
    kinds: dict[str, TokenKind] = field(default_factory=dict)
    peak: dict[str, float] = field(default_factory=dict)  # strongest single record per symbol

    def over(self, a1: float, p1: float) -> list[str]:
        """Valence symbols with a record above its attention threshold, strongest first."""
        hot = [
            s for s, v in self.peak.items()
            if v > (a1 if self.kinds[s] is TokenKind.REWARD else p1)
        ]
        return sorted(hot, key=lambda s: (-self.per_symbol[s], s))

    def distance(self, other: "ValenceTally") -> float:
        return abs(self.reward_sum - other.reward_sum) + abs(self.punishment_sum - other.punishment_sum)

    def __str__(self) -> str:
        return f"reward={self.reward_sum:.3f} punishment={self.punishment_sum:.3f}"


@dataclass
class GoalNode:
    level: int
    target: str
    path: list[PropagationEdge]
    direction: Direction
    children: list["GoalNode"] = field(default_factory=list)
    ancestry: frozenset[int] = frozenset()
    executable: bool = False

    @property
    def target_pos(self) -> int:
        return self.path[-1].target

    @property
    def records(self) -> list[int]:
        return [self.path[0].source] + [e.target for e in self.path]

    @property
    def bridge(self) -> list[int]:
        return self.records[1:-1]

    @property
    def bottleneck(self) -> float:
        return min(e.transferred for e in self.path)

    def leaves(self) -> list["GoalNode"]:
        if not self.children:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]

    def describe(self, symbols: Sequence[str]) -> str:
        hops = " ".join(
            f"{e.source}:{symbols[e.source]}->{e.target}:{symbols[e.target]}({e.kind.name[:3].lower()} {e.transferred:.3f})"
            for e in self.path
        )
        tag = " exec" if self.executable else ""
        return f"L{self.level} {self.direction.value} {self.target}{tag}: {hops}"


@dataclass
class Action:
    kind: ActionKind
    plan: tuple[PlanStep, ...] = ()
    targets: tuple[str, ...] = ()
    goals: list[GoalNode] = field(default_factory=list, repr=False)
    trace: list[str] = field(default_factory=list, repr=False)

    def __str__(self) -> str:
        if self.kind is ActionKind.EXECUTE:
            steps = ", ".join(f"{s.payload.symbol_id}@+{s.offset}" for s in self.plan)
            return f"Execute[{steps}]"
        if self.kind is ActionKind.SEEK_INFORMATION:
            return f"SeekInformation[{', '.join(self.targets)}]"
        return "ContinueObserving"


def _tally(activations: np.ndarray, kinds: Sequence[TokenKind], symbols: Sequence[str]) -> ValenceTally:
    out = ValenceTally()
    for pos in np.flatnonzero(activations > 0):
        kind = kinds[pos]
        if not kind.is_valence:
            continue
        a = float(activations[pos])
        sym = symbols[pos]
        out.per_symbol[sym] = out.per_symbol.get(sym, 0.0) + a
        out.peak[sym] = max(out.peak.get(sym, 0.0), a)
        out.kinds[sym] = kind
        if kind is TokenKind.REWARD:
            out.reward_sum += a
        else:
            out.punishment_sum += a
    return out


def tally(report: ActivationReport) -> ValenceTally:
    return _tally(report.activations, report.kinds, report.symbols)


def _bank_tally(bank: MemoryBank) -> ValenceTally:
    return _tally(bank.activation_values(), [r.kind for r in bank], [r.symbol for r in bank])


def extract_paths(report: ActivationReport, valence_symbol: str, n: int) -> list[list[PropagationEdge]]:
    """Up to ``n`` propagation paths ending in a record of ``valence_symbol``.

    Paths are ranked by their weakest transfer, then by length, then by the
    positions they visit. Walks that revisit a record are not paths.
    """
    edges = report.edges
    if not len(edges):
        return []
    targets = [p for p, s in enumerate(report.symbols) if s == valence_symbol]
    into = np.flatnonzero(np.isin(edges.target, targets))
    best: dict[tuple[int, ...], tuple] = {}
    for i in into:
        chain = edges.chain(int(i))
        records = (chain[0].source,) + tuple(e.target for e in chain)
        if len(set(records)) != len(records):
            continue
        key = (-min(e.transferred for e in chain), len(chain), records)
        if records not in best or key < best[records][0]:
            best[records] = (key, chain)
    ranked = sorted(best.values(), key=lambda kv: kv[0])
    return [chain for _, chain in ranked[:n]]


def _direction(kind: TokenKind) -> Direction:
    return Direction.PROMOTE if kind is TokenKind.REWARD else Direction.SUPPRESS


def drive_neighbourhood(bank: MemoryBank, anchors: Sequence[int], window: int) -> list[int]:
    """Drive records within ``window`` ticks of any anchor, in stored order."""
    if not anchors:
        return []
    times = [bank.records[p].record_time for p in anchors]
    out = []
    for pos, rec in enumerate(bank.records):
        if rec.kind is TokenKind.DRIVE and any(abs(rec.record_time - t) <= window for t in times):
            out.append(pos)
    return out


def is_executable(bank: MemoryBank, node: GoalNode, config: Config) -> bool:
    return bool(drive_neighbourhood(bank, node.bridge, config.window))


def expand_goal(bank: MemoryBank, node: GoalNode, config: Config, *, a0: float | None = None,
                in_place: bool = False) -> list[GoalNode]:
    """Re-seed the node's bridge records and return goals they reach.

    Works on a copy of ``bank`` unless ``in_place`` (the caller then owns a
    planning snapshot). Bridge records already seeded by an ancestor are not
    seeded again.
    """
    if node.executable or is_executable(bank, node, config):
        return []
    seeds = [p for p in node.bridge if p not in node.ancestry]
    if not seeds:
        return []
    snap = bank if in_place else bank.copy()
    report = chain_activate(snap, seeds, config, a0=a0)
    reached = sorted(
        {report.symbols[int(t)] for t in report.edges.target if report.kinds[int(t)].is_valence},
        key=lambda s: (-sum(report.activations[p] for p in snap.positions_of(s)), s),
    )
    ancestry = node.ancestry | set(seeds) | {node.path[0].source}
    children = []
    for sym in reached:
        kind = snap.records[snap.positions_of(sym)[0]].kind
        for path in extract_paths(report, sym, config.n_paths):
            child = GoalNode(node.level + 1, sym, path, _direction(kind), ancestry=frozenset(ancestry))
            child.executable = is_executable(snap, child, config)
            children.append(child)
    return children


def _segment(bank: MemoryBank, positions: Sequence[int]) -> list[tuple[int, int]]:
    if not positions:
        return []
    t0 = bank.records[positions[0]].record_time
    return [(p, bank.records[p].record_time - t0) for p in positions]


def avoidance_segment(bank: MemoryBank, node: GoalNode, config: Config) -> list[int]:
    """Drive records stored right after the punishment record: the experienced escape."""
    t = bank.records[node.target_pos].record_time
    return [
        p for p, r in enumerate(bank.records)
        if r.kind is TokenKind.DRIVE and t < r.record_time <= t + config.window
    ]


def _mark_executable(bank: MemoryBank, node: GoalNode, config: Config) -> None:
    node.executable = node.executable or is_executable(bank, node, config)
    for c in node.children:
        _mark_executable(bank, c, config)


class NotExecutable(Exception):
    def __init__(self, node: GoalNode):
        super().__init__(f"goal {node.target} at level {node.level} has no stored drive commands nearby")
        self.node = node


def _realizable(node: GoalNode) -> bool:
    return node.executable or any(_realizable(c) for c in node.children)


def _plan_leaves(node: GoalNode) -> list[GoalNode]:
    """Leaves of the realizable part of a goal tree."""
    live = [c for c in node.children if _realizable(c)]
    if not live:
        return [node]
    return [leaf for c in live for leaf in _plan_leaves(c)]


def segmented_imitate(bank: MemoryBank, goals: Sequence[GoalNode], config: Config) -> tuple[PlanStep, ...]:
    """Assemble a plan by replaying the drive neighbourhood of each leaf.

    Promote goals contribute the leaves of their realizable branches, each
    replaying the drives stored around its bridge records. Suppress leaves
    replay a stored avoidance sequence when one exists and otherwise
    contribute nothing. A promote leaf whose drives lie on a punishment path
    is dropped. Raises NotExecutable when no promote goal can be realized.
    """
    for g in goals:
        _mark_executable(bank, g, config)
    promote = [g for g in goals if g.direction is Direction.PROMOTE]
    live = [g for g in promote if _realizable(g)]
    if promote and not live:
        raise NotExecutable(promote[0])
    suppress_leaves = [leaf for g in goals if g.direction is Direction.SUPPRESS for leaf in g.leaves()]
    harmful = {p for leaf in suppress_leaves for p in leaf.records}
    leaves = [leaf for g in live for leaf in _plan_leaves(g)] + suppress_leaves
    segments: list[list[tuple[int, int]]] = []
    done: set[tuple] = set()
    for leaf in leaves:
        # leaves with the same bridge are one secondary target
        key = (leaf.direction, tuple(leaf.bridge) or (leaf.target_pos,))
        if key in done:
            continue
        done.add(key)
        if leaf.direction is Direction.PROMOTE:
            drives = drive_neighbourhood(bank, leaf.bridge, config.window)
            if harmful.intersection(drives):
                continue
            segments.append(_segment(bank, drives))
        else:
            segments.append(_segment(bank, avoidance_segment(bank, leaf, config)))
    plan: list[PlanStep] = []
    start = 0
    for seg in segments:
        if not seg:
            continue
        for pos, off in seg:
            plan.append(PlanStep(bank.records[pos].payload, start + off, pos))
        start = plan[-1].offset + 1
    return tuple(plan)


def _seek_targets(report: ActivationReport, config: Config) -> tuple[str, ...]:
    seen_symbols = {report.symbols[p] for p in report.seeded}
    out: list[str] = []
    for pos in report.top(len(report.activations)):
        sym = report.symbols[pos]
        if report.kinds[pos].is_valence or sym in seen_symbols or sym in out:
            continue
        out.append(sym)
        if len(out) >= config.seek_width:
            break
    return tuple(out)


def decide(bank: MemoryBank, report: ActivationReport, config: Config) -> Action:
    """Choose between observing, seeking information and executing a plan.

    Never mutates ``bank``: all planning runs on a snapshot.
    """
    symbols = report.symbols
    trace: list[str] = []
    first = tally(report)
    trace.append(f"tally {first}")
    hot = first.over(config.a1, config.p1)
    if not hot:
        trace.append("no valence above A1/P1")
        return Action(ActionKind.CONTINUE_OBSERVING, trace=trace)

    snap = bank.copy()
    seeds = frozenset(report.seeded)
    goals: list[GoalNode] = []
    for sym in hot:
        for path in extract_paths(report, sym, config.n_paths):
            node = GoalNode(1, sym, path, _direction(first.kinds[sym]), ancestry=seeds)
            node.executable = is_executable(snap, node, config)
            goals.append(node)
    for g in goals:
        trace.append("  " + g.describe(symbols))

    frontier = [g for g in goals if not g.executable and g.bridge]
    prev = _bank_tally(snap)
    converged = False
    for rnd in range(1, config.r_max + 1):
        nxt = []
        for node in frontier:
            node.children = expand_goal(snap, node, config, a0=report.a0, in_place=True)
            for c in node.children:
                trace.append("  " + c.describe(symbols))
            nxt.extend(c for c in node.children if not c.executable and c.bridge)
        cur = _bank_tally(snap)
        delta = cur.distance(prev)
        trace.append(f"round {rnd}: expanded={len(frontier)} {cur} delta={delta:.3f}")
        if delta < config.epsilon:
            converged = True
            break
        prev, frontier = cur, nxt

    if converged:
        try:
            plan = segmented_imitate(snap, goals, config)
        except NotExecutable as exc:
            trace.append(f"not executable: {exc}")
            plan = ()
        if plan:
            action = Action(ActionKind.EXECUTE, plan=plan, goals=goals, trace=trace)
            trace.append(f"action {action}")
            return action
    else:
        trace.append(f"no convergence after {config.r_max} rounds")
    action = Action(ActionKind.SEEK_INFORMATION, targets=_seek_targets(report, config), goals=goals, trace=trace)
    trace.append(f"action {action}")
    return action
