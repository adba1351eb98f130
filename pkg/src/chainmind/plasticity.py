"""Memory consolidation from activation, and slow forgetting."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .activation import ActivationReport, StaleReportError
from .bank import MemoryBank
from .config import Config

FORGET_FLOOR = 0.01


@lru_cache(maxsize=32)
def _decimal(x: float) -> Fraction:
    # the rate as written (1.4 is 7/5, not the nearest binary double)
    return Fraction(repr(x))


def memory_increment(m0: float, a: float, config: Config) -> float:
    """dm = lr * a * (1 - m0/m_max); with lr = 1.4, dm(0, 90) = 126 exactly.

    Evaluated in exact rational arithmetic and rounded once.
    """
    if a <= 0 or m0 >= config.m_max:
        return 0.0
    m_max = Fraction(config.m_max)
    return float(_decimal(config.learning_rate) * Fraction(a) * (m_max - Fraction(m0)) / m_max)


def reinforce(bank: MemoryBank, report: ActivationReport, config: Config) -> int:
    """Raise the memory of every record the report left active."""
    if report.bank_version != bank.version or len(report.activations) != len(bank):
        raise StaleReportError("bank changed after the report was produced")
    updated = 0
    for pos in np.flatnonzero(report.activations > 0):
        rec = bank.records[pos]
        dm = memory_increment(rec.memory_value, float(report.activations[pos]), config)
        if dm > 0:
            rec.memory_value = min(config.m_max, rec.memory_value + dm)
            updated += 1
    bank.touch()
    return updated


def forget(bank: MemoryBank, dt: float, config: Config) -> None:
    """Halve memory every ``h_mem`` ticks; frozen records are exempt."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return
    factor = 2.0 ** (-dt / config.h_mem)
    for r in bank.records:
        if r.memory_value and not r.frozen:
            v = r.memory_value * factor
            r.memory_value = v if v >= FORGET_FLOOR else 0.0
    bank.touch()
