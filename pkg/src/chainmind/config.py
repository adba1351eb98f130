"""Engine configuration and the flat ``key=value`` config file format."""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class Config:
    # seeding
    a0_base: float = 90.0
    a0_gain: float = 0.5
    # propagation
    theta: float = 30.0
    kappa: float = 0.75
    window: int = 5
    sim_floor: float = 0.6
    # walks multiply in dense similarity cliques; stop instead of exhausting memory
    max_edges: int = 4_000_000
    # decay half-lives, in ticks
    h_act: float = 2.0
    h_mem: float = 1000.0
    # plasticity
    learning_rate: float = 1.4
    # decision
    n_paths: int = 3
    a1: float = 40.0
    p1: float = 40.0
    epsilon: float = 1.0
    r_max: int = 8
    seek_width: int = 5
    # bounds and innate presets
    m_max: float = 255.0
    a_max: float = 255.0
    preset_memory: float = 240.0
    # feature vectors
    dim: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.theta <= 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.h_act <= 0 or self.h_mem <= 0:
            raise ValueError("half-lives must be positive")
        if self.m_max <= 0 or self.a_max <= 0:
            raise ValueError("m_max and a_max must be positive")
        if not 0.0 < self.a0_base <= self.a_max:
            raise ValueError(f"a0_base must lie in (0, a_max], got {self.a0_base}")
        if not 0.0 < self.preset_memory <= self.m_max:
            raise ValueError("preset_memory must lie in (0, m_max]")
        if self.window < 0:
            raise ValueError("window must be non-negative")
        if not 0.0 < self.sim_floor <= 1.0:
            raise ValueError("sim_floor must lie in (0, 1]")
        if self.max_edges < 1:
            raise ValueError("max_edges must be positive")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.n_paths < 1 or self.r_max < 1 or self.seek_width < 0:
            raise ValueError("n_paths and r_max must be >= 1, seek_width >= 0")
        if self.a0_gain < 0 or self.learning_rate < 0 or self.epsilon < 0:
            raise ValueError("a0_gain, learning_rate and epsilon must be non-negative")

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    def dumps(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))

    @property
    def fingerprint(self) -> str:
        return bank_fingerprint(self.dim, self.m_max, self.a_max)


def bank_fingerprint(dim: int, m_max: float, a_max: float) -> str:
    """Identity of the parameters that give stored values their meaning.

    Two banks can be merged only if these agree; propagation constants are
    free to differ between the machines that produced them.
    """
    text = f"dim={dim};mmax={float(m_max)!r};amax={float(a_max)!r}"
    return hashlib.sha1(text.encode()).hexdigest()[:16]


def parse_config(text: str, base: Config | None = None) -> Config:
    """Parse ``key=value`` lines on top of ``base`` (defaults if omitted)."""
    base = base or Config()
    types = {f.name: f.type for f in fields(Config)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in types:
            raise ValueError(f"config line {lineno}: unknown or malformed entry {raw!r}")
        try:
            changes[key] = int(value) if types[key] == "int" else float(value)
        except ValueError:
            raise ValueError(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return base.replace(**changes)


def load_config(path: str | Path, base: Config | None = None) -> Config:
    return parse_config(Path(path).read_text(encoding="utf-8"), base)
