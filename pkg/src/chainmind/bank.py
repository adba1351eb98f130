"""Append-only, time-ordered token store.

Each record carries the four fields of a memory-bank row: record time, the
token itself, its memory value and its activation value. Records are kept in
time order; ties keep insertion order, so a group stored with spacing 0 is a
set of simultaneous tokens.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import Config, bank_fingerprint

FORMAT_TAG = "CHAINMIND-BANK"
FORMAT_VERSION = "v1"


class BankError(Exception):
    pass


class DimensionError(BankError):
    pass


class OrderingError(BankError):
    pass


class BankFormatError(BankError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TokenKind(str, enum.Enum):
    ORDINARY = "ordinary"
    NEED = "need"
    REWARD = "reward"
    PUNISHMENT = "punishment"
    EMOTION = "emotion"
    DRIVE = "drive"

    @property
    def is_valence(self) -> bool:
        return self in (TokenKind.REWARD, TokenKind.PUNISHMENT)


@dataclass(frozen=True)
class TokenPayload:
    symbol_id: str
    kind: TokenKind = TokenKind.ORDINARY
    vector: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.symbol_id or any(c in self.symbol_id for c in "\t\r\n"):
            raise ValueError(f"invalid symbol id {self.symbol_id!r}")
        object.__setattr__(self, "kind", TokenKind(self.kind))
        if self.vector is not None:
            vec = tuple(float(x) for x in self.vector)
            norm = math.sqrt(math.fsum(x * x for x in vec))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"feature vector of {self.symbol_id!r} has norm {norm}, expected 1")
            object.__setattr__(self, "vector", vec)

    @property
    def dim(self) -> int | None:
        return None if self.vector is None else len(self.vector)


def similarity(a: TokenPayload, b: TokenPayload) -> float:
    """1 for the same symbol, otherwise the clamped dot product of the vectors."""
    if a.symbol_id == b.symbol_id:
        return 1.0
    if a.vector is None or b.vector is None:
        return 0.0
    dot = math.fsum(x * y for x, y in zip(a.vector, b.vector))
    return min(1.0, max(0.0, dot))


@dataclass
class TokenRecord:
    record_time: int
    payload: TokenPayload
    memory_value: float = 0.0
    activation_value: float = 0.0
    # extension: exempt from forgetting
    frozen: bool = False

    @property
    def symbol(self) -> str:
        return self.payload.symbol_id

    @property
    def kind(self) -> TokenKind:
        return self.payload.kind


@dataclass
class BankArrays:
    """Columnar read-only view used by the propagation engine."""

    times: np.ndarray
    memory: np.ndarray
    symbols: np.ndarray  # interned symbol codes
    vectors: np.ndarray  # (n, dim), zero rows for records without a vector
    has_vector: np.ndarray


class MemoryBank:
    def __init__(self, dim: int = 64, m_max: float = 255.0, a_max: float = 255.0):
        if dim < 1:
            raise DimensionError("dimension must be positive")
        self.dim = int(dim)
        self.m_max = float(m_max)
        self.a_max = float(a_max)
        self.records: list[TokenRecord] = []
        self.symbol_index: dict[str, list[int]] = {}
        # bumped on every mutation; reports remember the version they saw
        self.version = 0
        self._structure = 0
        self._arrays_cache: tuple[int, BankArrays] | None = None

    @classmethod
    def for_config(cls, config: Config) -> "MemoryBank":
        return cls(config.dim, config.m_max, config.a_max)

    @property
    def config_fingerprint(self) -> str:
        return bank_fingerprint(self.dim, self.m_max, self.a_max)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, pos: int) -> TokenRecord:
        return self.records[pos]

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MemoryBank):
            return NotImplemented
        return (
            (self.dim, self.m_max, self.a_max) == (other.dim, other.m_max, other.a_max)
            and self.records == other.records
        )

    def __repr__(self) -> str:
        return f"MemoryBank(records={len(self)}, dim={self.dim})"

    @property
    def tail_time(self) -> int | None:
        return self.records[-1].record_time if self.records else None

    def positions_of(self, symbol: str) -> list[int]:
        return list(self.symbol_index.get(symbol, ()))

    def touch(self) -> None:
        self.version += 1

    def _structural_change(self) -> None:
        self.version += 1
        self._structure += 1
        self._arrays_cache = None

    def _check_payload(self, payload: TokenPayload) -> None:
        if payload.vector is not None and len(payload.vector) != self.dim:
            raise DimensionError(
                f"payload {payload.symbol_id!r} has dimension {len(payload.vector)}, bank expects {self.dim}"
            )

    def append(self, payloads: Sequence[TokenPayload], base_time: int, spacing: int = 1) -> list[int]:
        """Store payloads at ``base_time, base_time + spacing, ...``.

        Spacing 0 stores a simultaneous group.
        """
        if spacing < 0:
            raise OrderingError(f"spacing must be non-negative, got {spacing}")
        payloads = list(payloads)
        if not payloads:
            return []
        for p in payloads:
            self._check_payload(p)
        tail = self.tail_time
        if tail is not None and base_time < tail:
            raise OrderingError(f"base time {base_time} is earlier than bank tail {tail}")
        start = len(self.records)
        for i, p in enumerate(payloads):
            self.records.append(TokenRecord(int(base_time + i * spacing), p))
            self.symbol_index.setdefault(p.symbol_id, []).append(start + i)
        self._structural_change()
        return list(range(start, len(self.records)))

    def add_record(self, record: TokenRecord) -> int:
        """Append one fully specified record (used by load and merge)."""
        self._check_payload(record.payload)
        tail = self.tail_time
        if tail is not None and record.record_time < tail:
            raise OrderingError(f"record time {record.record_time} is earlier than bank tail {tail}")
        self.records.append(record)
        self.symbol_index.setdefault(record.symbol, []).append(len(self.records) - 1)
        self._structural_change()
        return len(self.records) - 1

    def _reindex(self) -> None:
        self.symbol_index = {}
        for pos, rec in enumerate(self.records):
            self.symbol_index.setdefault(rec.symbol, []).append(pos)

    def prune(self) -> int:
        """Drop records whose memory and activation are both zero."""
        keep = [r for r in self.records if r.memory_value != 0.0 or r.activation_value != 0.0]
        removed = len(self.records) - len(keep)
        if removed:
            self.records = keep
            self._reindex()
            self._structural_change()
        return removed

    def set_memory(self, pos: int, value: float) -> None:
        self.records[pos].memory_value = min(self.m_max, max(0.0, float(value)))
        self.touch()

    def set_activation(self, pos: int, value: float) -> None:
        self.records[pos].activation_value = min(self.a_max, max(0.0, float(value)))
        self.touch()

    def memory_values(self) -> np.ndarray:
        return np.array([r.memory_value for r in self.records], dtype=float)

    def activation_values(self) -> np.ndarray:
        return np.array([r.activation_value for r in self.records], dtype=float)

    def arrays(self) -> BankArrays:
        n = len(self.records)
        cached = self._arrays_cache
        if cached is None or cached[0] != self._structure:
            codes: dict[str, int] = {}
            symbols = np.array([codes.setdefault(r.symbol, len(codes)) for r in self.records], dtype=np.int64)
            vectors = np.zeros((n, self.dim))
            has_vector = np.zeros(n, dtype=bool)
            for i, r in enumerate(self.records):
                if r.payload.vector is not None:
                    vectors[i] = r.payload.vector
                    has_vector[i] = True
            times = np.array([r.record_time for r in self.records], dtype=np.int64)
            cached = (self._structure, BankArrays(times, np.empty(0), symbols, vectors, has_vector))
            self._arrays_cache = cached
        base = cached[1]
        return BankArrays(base.times, self.memory_values(), base.symbols, base.vectors, base.has_vector)

    def copy(self) -> "MemoryBank":
        new = MemoryBank(self.dim, self.m_max, self.a_max)
        new.records = [
            TokenRecord(r.record_time, r.payload, r.memory_value, r.activation_value, r.frozen)
            for r in self.records
        ]
        new._reindex()
        new.version = self.version
        return new

    def stats(self) -> dict:
        kinds = Counter(r.kind.value for r in self.records)
        return {
            "records": len(self.records),
            "nonzero_memory": sum(1 for r in self.records if r.memory_value > 0),
            "active": sum(1 for r in self.records if r.activation_value > 0),
            "kinds": dict(sorted(kinds.items())),
        }

    # persistence

    def dumps(self) -> str:
        lines = [f"{FORMAT_TAG} {FORMAT_VERSION}; dim={self.dim}; mmax={_fmt(self.m_max)}; amax={_fmt(self.a_max)}"]
        for r in self.records:
            vec = "-" if r.payload.vector is None else ",".join(_fmt(x) for x in r.payload.vector)
            fields_ = [str(r.record_time), r.kind.value, r.symbol, _fmt(r.memory_value), _fmt(r.activation_value), vec]
            if r.frozen:
                fields_.append("frozen")
            lines.append("\t".join(fields_))
        return "\n".join(lines) + "\n"

    def save(self, destination: str | Path) -> None:
        Path(destination).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "MemoryBank":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise BankFormatError(1, "empty file, missing header")
        bank = cls(**_parse_header(lines[0]))
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                bank.add_record(_parse_record(line, bank))
            except BankFormatError:
                raise
            except (ValueError, BankError) as exc:
                raise BankFormatError(lineno, str(exc)) from None
        return bank

    @classmethod
    def load(cls, source: str | Path) -> "MemoryBank":
        return cls.loads(Path(source).read_text(encoding="utf-8"))


def _fmt(x: float) -> str:
    # 9 significant digits when that is lossless, otherwise the shortest exact repr
    s = f"{x:.9g}"
    return s if float(s) == x else repr(float(x))


def _parse_header(line: str) -> dict:
    parts = [p.strip() for p in line.split(";")]
    head = parts[0].split()
    if len(head) != 2 or head[0] != FORMAT_TAG:
        raise BankFormatError(1, f"not a bank file header: {line!r}")
    if head[1] != FORMAT_VERSION:
        raise BankFormatError(1, f"unsupported bank version {head[1]!r}, expected {FORMAT_VERSION}")
    values = {}
    for part in parts[1:]:
        key, _, value = part.partition("=")
        values[key.strip()] = value.strip()
    try:
        return {"dim": int(values["dim"]), "m_max": float(values["mmax"]), "a_max": float(values["amax"])}
    except (KeyError, ValueError):
        raise BankFormatError(1, f"malformed header {line!r}") from None


def _parse_record(line: str, bank: MemoryBank) -> TokenRecord:
    cols = line.split("\t")
    frozen = False
    if len(cols) == 7 and cols[6] == "frozen":
        frozen = True
        cols = cols[:6]
    if len(cols) != 6:
        raise ValueError(f"expected 6 tab-separated fields, got {len(cols)}")
    time_s, kind_s, symbol, mem_s, act_s, vec_s = cols
    vector = None
    if vec_s != "-":
        vector = tuple(float(x) for x in vec_s.split(","))
        if len(vector) != bank.dim:
            raise DimensionError(f"vector has dimension {len(vector)}, header says {bank.dim}")
    memory, activation = float(mem_s), float(act_s)
    if not 0.0 <= memory <= bank.m_max:
        raise ValueError(f"memory value {memory} outside [0, {bank.m_max}]")
    if not 0.0 <= activation <= bank.a_max:
        raise ValueError(f"activation value {activation} outside [0, {bank.a_max}]")
    payload = TokenPayload(symbol, TokenKind(kind_s), vector)
    return TokenRecord(int(time_s), payload, memory, activation, frozen)


def merge(a: MemoryBank, b: MemoryBank, *, offset: int | None = None, config: Config | None = None) -> MemoryBank:
    """Stitch two banks together.

    ``b``'s timeline is shifted by ``offset`` ticks. By default it starts
    ``window + 1`` ticks after ``a``'s last record, so no proximity edge spans
    the two sources. Memory values carry over; activations are reset.
    """
    if a.dim != b.dim:
        raise DimensionError(f"cannot merge banks of dimension {a.dim} and {b.dim}")
    if a.config_fingerprint != b.config_fingerprint:
        raise BankError("banks were built with incompatible bounds (m_max/a_max)")
    if offset is None:
        if a.records and b.records:
            gap = (config or Config()).window + 1
            offset = a.records[-1].record_time + gap - b.records[0].record_time
        else:
            offset = 0
    shifted = [
        TokenRecord(r.record_time + offset, r.payload, r.memory_value, 0.0, r.frozen) for r in b.records
    ]
    own = [TokenRecord(r.record_time, r.payload, r.memory_value, 0.0, r.frozen) for r in a.records]
    # stable merge: on equal times a's records come first
    merged = sorted(own + shifted, key=lambda r: r.record_time)
    out = MemoryBank(a.dim, a.m_max, a.a_max)
    out.records = merged
    out._reindex()
    out._structural_change()
    return out
