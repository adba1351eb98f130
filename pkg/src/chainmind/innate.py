"""Preset innate knowledge: needs, valence adjacencies and gesture presets.

Innate records are ordinary bank records with high preset memory. Nothing
marks them as special in storage; the registry only remembers which vital
channels and gestures route to them.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

from .activation import ActivationReport, chain_activate
from .bank import MemoryBank, TokenKind, TokenPayload
from .config import Config
from .tokenizer import InputEvent, make_payload, tokenize_event

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


class InstallError(Exception):
    pass


@dataclass(frozen=True)
class NeedSpec:
    need_symbol: str
    monitor_channel: str
    op: str
    threshold: float
    emotion_symbol: str
    valence: TokenKind = TokenKind.PUNISHMENT
    preset_memory: float = 240.0

    def __post_init__(self):
        object.__setattr__(self, "valence", TokenKind(self.valence))
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        if not self.valence.is_valence:
            raise ValueError("valence must be reward or punishment")
        if self.preset_memory <= 0:
            raise ValueError("preset memory must be positive")

    @property
    def valence_symbol(self) -> str:
        return self.valence.value

    def fires(self, value: float) -> bool:
        return _OPS[self.op](value, self.threshold)


@dataclass(frozen=True)
class GestureSpec:
    name: str
    gesture_tokens: tuple[TokenPayload, ...]
    attached: tuple[tuple[str, TokenKind], ...]
    preset_memory: float = 240.0

    def __post_init__(self):
        if not self.gesture_tokens:
            raise ValueError("a gesture needs at least one token")
        if any(t.vector is None for t in self.gesture_tokens):
            raise ValueError("gesture tokens need feature vectors")
        n_valence = sum(1 for _, k in self.attached if TokenKind(k).is_valence)
        if n_valence != 1:
            raise ValueError("attached symbols must include exactly one reward or punishment symbol")
        if self.preset_memory <= 0:
            raise ValueError("preset memory must be positive")

    @classmethod
    def preset(cls, name: str, attached: Sequence[str], preset_memory: float = 240.0, *,
               dim: int = 64, seed: int = 0) -> "GestureSpec":
        """One hashed feature token for ``name``; ``kind:symbol`` or a bare symbol per attachment."""
        return cls(name, (make_payload(name, dim=dim, seed=seed),), tuple(_attachment(a) for a in attached),
                   preset_memory)


def _attachment(text: str) -> tuple[str, TokenKind]:
    kind, sep, symbol = text.partition(":")
    if sep:
        return symbol, TokenKind(kind)
    if text in ("reward", "punishment"):
        return text, TokenKind(text)
    return text, TokenKind.EMOTION


Spec = Union[NeedSpec, GestureSpec]


@dataclass
class InnateRegistry:
    needs: dict[str, list[NeedSpec]] = field(default_factory=dict)  # by monitored channel
    gestures: dict[str, GestureSpec] = field(default_factory=dict)
    installed: set[str] = field(default_factory=set)

    def triggered_needs(self, channel: str, value: float) -> list[NeedSpec]:
        return [s for s in self.needs.get(channel, ()) if s.fires(value)]


def install(bank: MemoryBank, specs: Sequence[Spec], registry: InnateRegistry, config: Config) -> list[int]:
    """Append each spec as an adjacent group with its preset memory value.

    Groups are separated by more than the proximity window so presets do
    not leak activation into one another by adjacency.
    """
    keys = [s.need_symbol if isinstance(s, NeedSpec) else f"gesture:{s.name}" for s in specs]
    for i, key in enumerate(keys):
        if key in registry.installed or key in keys[:i]:
            raise InstallError(f"{key!r} is already installed")
    positions: list[int] = []
    for spec in specs:
        tail = bank.tail_time
        t = 0 if tail is None else tail + config.window + 1
        if isinstance(spec, NeedSpec):
            head = [make_payload(spec.need_symbol, TokenKind.NEED, dim=bank.dim, seed=config.seed)]
            # emotion and valence both sit right next to the need
            rest = [
                make_payload(spec.emotion_symbol, TokenKind.EMOTION, dim=bank.dim, seed=config.seed),
                make_payload(spec.valence_symbol, spec.valence, dim=bank.dim, seed=config.seed),
            ]
            registry.needs.setdefault(spec.monitor_channel, []).append(spec)
            registry.installed.add(spec.need_symbol)
        else:
            head = list(spec.gesture_tokens)
            rest = [make_payload(sym, kind, dim=bank.dim, seed=config.seed) for sym, kind in spec.attached]
            registry.gestures[spec.name] = spec
            registry.installed.add(f"gesture:{spec.name}")
        new = bank.append(head, t, 0) + bank.append(rest, t + 1, 0)
        for pos in new:
            bank.records[pos].memory_value = min(bank.m_max, spec.preset_memory)
        bank.touch()
        positions.extend(new)
    return positions


def need_record(bank: MemoryBank, symbol: str) -> int | None:
    """The preset record of a need: the first need-kind record with ``symbol``."""
    for pos in bank.positions_of(symbol):
        if bank.records[pos].kind is TokenKind.NEED:
            return pos
    return None


def monitor_vitals(bank: MemoryBank, events: InputEvent | Sequence[InputEvent], registry: InnateRegistry,
                   config: Config, prior: ActivationReport | None = None) -> ActivationReport | None:
    """Seed the preset records of every need the readings trip, then propagate."""
    if isinstance(events, InputEvent):
        events = [events]
    seeds = []
    for ev in events:
        for payload in tokenize_event(ev, registry, dim=bank.dim, seed=config.seed):
            if payload.kind is TokenKind.NEED:
                pos = need_record(bank, payload.symbol_id)
                if pos is not None:
                    seeds.append(pos)
    if not seeds:
        return None
    return chain_activate(bank, seeds, config, prior=prior)


def parse_innate(text: str, config: Config | None = None) -> list[Spec]:
    """Parse innate spec lines.

    ``need <symbol> <channel> <op><threshold> <emotion> <reward|punishment> <memory>``
    ``gesture <name> <attached,...> <memory>`` (tab separated)
    """
    config = config or Config()
    specs: list[Spec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = raw.split("\t")
        try:
            if cols[0] == "need" and len(cols) == 7:
                _, sym, channel, pred, emotion, valence, memory = cols
                op = pred[:2] if pred[:2] in _OPS else pred[:1]
                specs.append(NeedSpec(sym, channel, op, float(pred[len(op):]), emotion, TokenKind(valence), float(memory)))
            elif cols[0] == "gesture" and len(cols) == 4:
                _, name, attached, memory = cols
                specs.append(GestureSpec.preset(name, attached.split(","), float(memory), dim=config.dim, seed=config.seed))
            else:
                raise ValueError("unrecognised line")
        except ValueError as exc:
            raise InstallError(f"innate line {lineno}: {exc}") from None
    return specs


def load_innate(path: str | Path, config: Config | None = None) -> list[Spec]:
    return parse_innate(Path(path).read_text(encoding="utf-8"), config)


def default_specs(config: Config) -> list[Spec]:
    """Battery hunger plus nod/shake communication presets."""
    m = config.preset_memory
    return [
        NeedSpec("hungry", "battery", "<", 20.0, "hungry-emotion", TokenKind.PUNISHMENT, m),
        GestureSpec.preset("nod", ["emotion:respected", "reward:reward"], m, dim=config.dim, seed=config.seed),
        GestureSpec.preset("shake", ["emotion:rejected", "punishment:punishment"], m, dim=config.dim, seed=config.seed),
    ]
