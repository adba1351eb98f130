"""Chain association activation.

Activation travels as packets. A packet of size ``x`` arriving at a record
is retransmitted once along every similarity and proximity edge of that
record, sending ``coefficient * x`` to each neighbour. Amounts below the
propagation threshold are dropped, and every coefficient is at most
``kappa < 1``, so each chain dies out after a bounded number of hops.
Received amounts accumulate on the target records.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .bank import MemoryBank, TokenKind
from .config import Config


class StaleReportError(Exception):
    """A report was used against a bank that changed after it was produced."""


_BLOCK = 4096


class PropagationLimitError(RuntimeError):
    """A chain activation produced more edges than ``Config.max_edges``."""


class EdgeKind(enum.IntEnum):
    SIMILARITY = 0
    PROXIMITY = 1


def memory_gain(m: float | np.ndarray, m_max: float) -> float | np.ndarray:
    return (1.0 + m / m_max) / 2.0


def similarity_coefficient(s: float, m_target: float, config: Config) -> float:
    if s < config.sim_floor:
        return 0.0
    return config.kappa * s * memory_gain(m_target, config.m_max)


def proximity_coefficient(d: float, m_target: float, config: Config) -> float:
    if d > config.window:
        return 0.0
    # window 0 means only simultaneous records are neighbours
    falloff = 2.0 ** (-d / config.window) if config.window else 1.0
    return config.kappa * falloff * memory_gain(m_target, config.m_max)


@dataclass(frozen=True)
class PropagationEdge:
    source: int
    target: int
    kind: EdgeKind
    coefficient: float
    transferred: float
    parent: int  # index of the edge that delivered the retransmitted packet; -1 for a seed packet
    round: int


class EdgeLog(Sequence[PropagationEdge]):
    """Columnar edge log; indexing materialises PropagationEdge objects."""

    def __init__(self, source=(), target=(), kind=(), coefficient=(), transferred=(), parent=(), round=()):
        self.source = np.asarray(source, dtype=np.int64)
        self.target = np.asarray(target, dtype=np.int64)
        self.kind = np.asarray(kind, dtype=np.int8)
        self.coefficient = np.asarray(coefficient, dtype=float)
        self.transferred = np.asarray(transferred, dtype=float)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.round = np.asarray(round, dtype=np.int32)

    def __len__(self) -> int:
        return len(self.source)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return PropagationEdge(
            int(self.source[i]), int(self.target[i]), EdgeKind(int(self.kind[i])),
            float(self.coefficient[i]), float(self.transferred[i]), int(self.parent[i]), int(self.round[i]),
        )

    def chain(self, i: int) -> list[PropagationEdge]:
        """The walk that delivered edge ``i``, seed first."""
        out = []
        while i >= 0:
            out.append(self[i])
            i = int(self.parent[i])
        return out[::-1]

    def into(self, target: int) -> np.ndarray:
        return np.flatnonzero(self.target == target)


@dataclass
class ActivationReport:
    activations: np.ndarray  # position -> activation after propagation (capped at a_max)
    baseline: np.ndarray  # position -> activation before propagation (residual, or A0 for seeds)
    edges: EdgeLog
    seeded: list[int]
    a0: float
    rounds: int
    visited: int
    bank_version: int
    kinds: list[TokenKind] = field(repr=False, default_factory=list)
    symbols: list[str] = field(repr=False, default_factory=list)

    def activation_of(self, pos: int) -> float:
        return float(self.activations[pos])

    def top(self, k: int, *, exclude: set[int] = frozenset(), predicate=None) -> list[int]:
        """Positions of the ``k`` most active records, ties to the lower position."""
        order = np.lexsort((np.arange(len(self.activations)), -self.activations))
        out = []
        for pos in order:
            pos = int(pos)
            if self.activations[pos] <= 0 or len(out) >= k:
                break
            if pos in exclude or (predicate is not None and not predicate(pos)):
                continue
            out.append(pos)
        return out

    def dumps(self, bank: MemoryBank | None = None, with_edges: bool = True) -> str:
        symbols = self.symbols or [r.symbol for r in bank]
        lines = [f"# rounds={self.rounds} visited={self.visited} a0={self.a0:.6g} edges={len(self.edges)}"]
        for pos in self.top(len(self.activations)):
            lines.append(f"{pos}\t{symbols[pos]}\t{self.activations[pos]:.6f}")
        if with_edges:
            e = self.edges
            for i in range(len(e)):
                kind = EdgeKind(int(e.kind[i])).name.lower()
                lines.append(f"{e.source[i]}->{e.target[i]}\t{kind}\t{e.coefficient[i]:.6f}\t{e.transferred[i]:.6f}")
        return "\n".join(lines) + "\n"


def prior_boost(prior: ActivationReport | None) -> float:
    """Summed reward and punishment activation of a previous report."""
    if prior is None:
        return 0.0
    mask = np.array([k.is_valence for k in prior.kinds], dtype=bool)
    return float(prior.activations[mask].sum()) if mask.any() else 0.0


def initial_activation(config: Config, prior: ActivationReport | None = None) -> float:
    return min(config.a_max, config.a0_base + config.a0_gain * prior_boost(prior))


def seed_activation(bank: MemoryBank, inputs: Sequence[int], config: Config,
                    prior: ActivationReport | None = None, a0: float | None = None) -> float:
    """Give every input record the initial activation A0 and return it."""
    if a0 is None:
        a0 = initial_activation(config, prior)
    for pos in inputs:
        if not 0 <= pos < len(bank):
            raise IndexError(f"input position {pos} not in bank")
        bank.records[pos].activation_value = min(bank.a_max, a0)
    bank.touch()
    return a0


class _Neighbours:
    """Per-call cache of outgoing edges, built lazily per source record."""

    def __init__(self, bank: MemoryBank, config: Config):
        self.arr = bank.arrays()
        self.config = config
        self.gain = memory_gain(self.arr.memory, config.m_max)
        self.cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def __call__(self, s: int):
        hit = self.cache.get(s)
        if hit is not None:
            return hit
        arr, cfg = self.arr, self.config
        # similarity edges
        same = arr.symbols == arr.symbols[s]
        sim = np.where(same, 1.0, 0.0)
        if arr.has_vector[s]:
            dots = np.clip(arr.vectors @ arr.vectors[s], 0.0, 1.0)
            dots[~arr.has_vector] = 0.0
            sim = np.where(same, 1.0, dots)
        sim[s] = 0.0
        sim_idx = np.flatnonzero(sim >= cfg.sim_floor)
        sim_coef = cfg.kappa * sim[sim_idx] * self.gain[sim_idx]
        # proximity edges
        t = arr.times[s]
        lo = np.searchsorted(arr.times, t - cfg.window, side="left")
        hi = np.searchsorted(arr.times, t + cfg.window, side="right")
        prox_idx = np.arange(lo, hi)
        prox_idx = prox_idx[prox_idx != s]
        d = np.abs(arr.times[prox_idx] - t).astype(float)
        falloff = 2.0 ** (-d / cfg.window) if cfg.window else np.ones_like(d)
        prox_coef = cfg.kappa * falloff * self.gain[prox_idx]

        targets = np.concatenate([sim_idx, prox_idx])
        coefs = np.concatenate([sim_coef, prox_coef])
        kinds = np.concatenate([np.zeros(len(sim_idx), np.int8), np.ones(len(prox_idx), np.int8)])
        order = np.lexsort((kinds, targets))
        hit = (targets[order], coefs[order], kinds[order])
        self.cache[s] = hit
        return hit


def chain_activate(bank: MemoryBank, inputs: Sequence[int], config: Config, *,
                   prior: ActivationReport | None = None, a0: float | None = None,
                   seed: bool = True) -> ActivationReport:
    """Run one chain activation from ``inputs`` and write the result back.

    With ``seed=False`` the inputs are assumed already seeded and their
    current activation is the packet they emit.
    """
    inputs = sorted(set(int(p) for p in inputs))
    if seed:
        a0 = seed_activation(bank, inputs, config, prior, a0)
    elif a0 is None:
        a0 = max((bank.records[p].activation_value for p in inputs), default=config.a0_base)
    n = len(bank)
    baseline = bank.activation_values()
    received = np.zeros(n)
    neighbours = _Neighbours(bank, config)
    theta = config.theta

    cols: dict[str, list[np.ndarray]] = {k: [] for k in ("src", "dst", "kind", "coef", "amt", "parent", "round")}
    n_edges = 0
    # frontier packets: position, amount, delivering edge
    f_pos = np.array(inputs, dtype=np.int64)
    f_amt = baseline[f_pos] if n else np.zeros(0)
    f_edge = np.full(len(f_pos), -1, dtype=np.int64)
    keep = f_amt >= theta
    f_pos, f_amt, f_edge = f_pos[keep], f_amt[keep], f_edge[keep]
    rounds = 0
    while len(f_pos):
        order = np.argsort(f_pos, kind="stable")
        f_pos, f_amt, f_edge = f_pos[order], f_amt[order], f_edge[order]
        starts = np.flatnonzero(np.r_[True, f_pos[1:] != f_pos[:-1]])
        ends = np.r_[starts[1:], len(f_pos)]
        parts = []
        pending = n_edges
        for a, b in zip(starts, ends):
            s = int(f_pos[a])
            targets, coefs, kinds = neighbours(s)
            if not len(targets):
                continue
            # bounded blocks keep the outer product small when many packets meet at one record
            for lo in range(a, b, _BLOCK):
                hi = min(b, lo + _BLOCK)
                out = np.outer(f_amt[lo:hi], coefs)
                mask = out >= theta
                if not mask.any():
                    continue
                rows, cidx = np.nonzero(mask)
                pending += len(rows)
                if pending > config.max_edges:
                    raise PropagationLimitError(
                        f"propagation exceeded {config.max_edges} edges in round {rounds + 1}; "
                        "raise theta, lower kappa or a0, or raise max_edges"
                    )
                parts.append((
                    np.full(len(rows), s, np.int64), targets[cidx], kinds[cidx], coefs[cidx],
                    out[rows, cidx], f_edge[lo:hi][rows],
                ))
        if not parts:
            break
        rounds += 1
        src, dst, kind, coef, amt, parent = (np.concatenate(c) for c in zip(*parts))
        np.add.at(received, dst, amt)
        ids = np.arange(n_edges, n_edges + len(dst), dtype=np.int64)
        n_edges += len(dst)
        for key, val in zip(cols, (src, dst, kind, coef, amt, parent, np.full(len(dst), rounds, np.int32))):
            cols[key].append(val)
        f_pos, f_amt, f_edge = dst, amt, ids

    edges = EdgeLog(*(np.concatenate(v) if v else () for v in cols.values()))
    activations = np.minimum(baseline + received, bank.a_max)
    for pos in np.flatnonzero(received):
        bank.records[pos].activation_value = float(activations[pos])
    bank.touch()
    visited = len(set(inputs) | set(edges.target.tolist()))
    return ActivationReport(
        activations=activations, baseline=baseline, edges=edges, seeded=inputs, a0=float(a0),
        rounds=rounds, visited=visited, bank_version=bank.version,
        kinds=[r.kind for r in bank], symbols=[r.symbol for r in bank],
    )


def decay_activations(bank: MemoryBank, dt: float, config: Config) -> None:
    """Halve every activation each ``h_act`` ticks; values under theta/10 go to zero."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return
    factor = 2.0 ** (-dt / config.h_act)
    floor = config.theta / 10.0
    for r in bank.records:
        if r.activation_value:
            v = r.activation_value * factor
            r.activation_value = v if v >= floor else 0.0
    bank.touch()
