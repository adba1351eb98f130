"""Turns scripted inputs into token payloads.

Feature vectors are derived from a seeded hash of the symbol, so the same
symbol always maps to the same unit vector and distinct symbols are nearly
orthogonal at the default dimension.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .bank import TokenKind, TokenPayload

if TYPE_CHECKING:
    from .innate import InnateRegistry

CHANNELS = ("env", "gesture", "vital", "text", "drive")
# low resolution first: overview tokens precede detail tokens within a tick
CHANNEL_ORDER = {name: i for i, name in enumerate(CHANNELS)}

# deviation of an observed gesture from its preset; similarity = 1/sqrt(1 + 0.3**2)
GESTURE_JITTER = 0.3


class ScriptError(Exception):
    pass


@dataclass(frozen=True)
class InputEvent:
    channel: str
    content: str
    event_time: int


@lru_cache(maxsize=65536)
def _hash_vector(key: str, dim: int, seed: int) -> tuple[float, ...]:
    digest = hashlib.blake2b(f"{seed}\x00{key}".encode(), digest_size=16).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    return tuple(float(x) for x in v)


def hash_vector(symbol: str, dim: int = 64, seed: int = 0) -> tuple[float, ...]:
    """Deterministic unit vector for ``symbol``."""
    return _hash_vector(symbol, dim, seed)


def jittered_vector(base: tuple[float, ...], key: str, seed: int = 0, jitter: float = GESTURE_JITTER) -> tuple[float, ...]:
    """A unit vector at similarity exactly ``1/sqrt(1+jitter**2)`` to ``base``."""
    b = np.asarray(base)
    noise = np.asarray(_hash_vector("jitter:" + key, len(base), seed))
    noise = noise - noise.dot(b) * b
    noise /= np.linalg.norm(noise)
    v = b + jitter * noise
    v /= np.linalg.norm(v)
    return tuple(float(x) for x in v)


def make_payload(symbol: str, kind: TokenKind | str = TokenKind.ORDINARY, *, dim: int = 64, seed: int = 0) -> TokenPayload:
    return TokenPayload(symbol, TokenKind(kind), hash_vector(symbol, dim, seed))


def tokenize_text(line: str, granularity: str = "word", *, dim: int = 64, seed: int = 0) -> list[TokenPayload]:
    line = line.strip()
    if not line:
        return []
    if granularity == "word":
        units = line.split()
    elif granularity == "character":
        units = [c for c in line if not c.isspace()]
    else:
        raise ValueError(f"unknown granularity {granularity!r}")
    return [make_payload(u, dim=dim, seed=seed) for u in units]


_VITAL = re.compile(r"^\s*([^=\s]+)\s*=\s*(-?[0-9.eE+-]+)\s*$")


def tokenize_event(ev: InputEvent, registry: "InnateRegistry | None" = None, *, dim: int = 64, seed: int = 0,
                   granularity: str = "word") -> list[TokenPayload]:
    """Tokenize one scripted event.

    Vital readings that trip a registered need produce that need's trigger
    payload; other readings become one telemetry payload. Registered
    gestures produce a payload close to the preset gesture token.
    """
    channel = ev.channel
    if channel == "text":
        return tokenize_text(ev.content, granularity, dim=dim, seed=seed)
    if channel == "env":
        return tokenize_text(ev.content, "word", dim=dim, seed=seed)
    if channel == "vital":
        m = _VITAL.match(ev.content)
        if m is None:
            return [make_payload(f"vital:{ev.content.strip()}", dim=dim, seed=seed)]
        key, value = m.group(1), float(m.group(2))
        fired = registry.triggered_needs(key, value) if registry is not None else []
        if fired:
            return [make_payload(spec.need_symbol, TokenKind.NEED, dim=dim, seed=seed) for spec in fired]
        return [make_payload(f"vital:{key}", dim=dim, seed=seed)]
    if channel == "gesture":
        name = ev.content.strip()
        spec = registry.gestures.get(name) if registry is not None else None
        if spec is None:
            return [make_payload(f"gesture:{name}", dim=dim, seed=seed)]
        return [
            TokenPayload(f"gesture:{name}", TokenKind.ORDINARY, jittered_vector(tok.vector, f"{name}:{i}", seed))
            for i, tok in enumerate(spec.gesture_tokens)
        ]
    if channel == "drive":
        return [make_payload(u, TokenKind.DRIVE, dim=dim, seed=seed) for u in ev.content.split()]
    return [make_payload(f"{channel}:{ev.content.strip()}", dim=dim, seed=seed)]


def parse_script_events(text: str) -> list[InputEvent]:
    """Parse ``<tick>\\t<channel>\\t<content>`` lines; ``#`` starts a comment line."""
    events = []
    last = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.split("\t", 2)
        if len(parts) != 3:
            raise ScriptError(f"line {lineno}: expected <tick>\\t<channel>\\t<content>")
        try:
            tick = int(parts[0])
        except ValueError:
            raise ScriptError(f"line {lineno}: bad tick {parts[0]!r}") from None
        if last is not None and tick < last:
            raise ScriptError(f"line {lineno}: tick {tick} goes back in time (previous {last})")
        last = tick
        events.append(InputEvent(parts[1].strip(), parts[2], tick))
    return events


def group_events(events: Iterable[InputEvent]) -> list[list[InputEvent]]:
    """Group same-tick events, overview channels first."""
    groups: list[list[InputEvent]] = []
    for ev in events:
        if groups and groups[-1][0].event_time == ev.event_time:
            groups[-1].append(ev)
        else:
            groups.append([ev])
    return [sorted(g, key=lambda e: CHANNEL_ORDER.get(e.channel, len(CHANNELS))) for g in groups]
