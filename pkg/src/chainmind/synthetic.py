"""Synthetic banks for stress tests and experiments."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .bank import MemoryBank, TokenKind, TokenPayload, TokenRecord
from .config import Config
from .harness import Session
from .tokenizer import InputEvent, hash_vector

# telegraphic skill notes; the two vocabularies are disjoint
CHEF = [
    "chop onion fry pan",
    "boil water add salt pasta",
    "season soup pepper salt",
    "knead dough bake bread",
    "slice garlic fry onion",
    "stir sauce taste soup",
]
DOCTOR = [
    "listen heart stethoscope",
    "measure blood pressure arm",
    "prescribe antibiotics infection",
    "check fever measure pulse",
    "clean wound apply bandage",
    "ask patient pain fever",
]


def _unit(v: np.ndarray) -> tuple[float, ...]:
    return tuple(float(x) for x in v / np.linalg.norm(v))


def clique_bank(rng: np.random.Generator, n: int = 10_000, config: Config | None = None, *,
                clique_size: int = 32, n_cliques: int = 40, n_clusters: int = 20,
                max_gap: int = 3) -> MemoryBank:
    """A large bank seeded with adversarial structure.

    ``n_cliques`` symbols each recur ``clique_size`` times (every pair is a
    similarity edge), ``n_clusters`` vector clusters give near-duplicate
    payloads under distinct symbols, and random zero gaps create
    simultaneous groups. Memory values are skewed towards the maximum so
    coefficients sit close to the cap.
    """
    config = config or Config()
    dim = config.dim
    centres = rng.standard_normal((n_clusters, dim))
    centres /= np.linalg.norm(centres, axis=1, keepdims=True)
    slots = ["clique"] * (n_cliques * clique_size) + ["cluster"] * (n // 5)
    slots += ["plain"] * max(0, n - len(slots))
    slots = slots[:n]
    order = rng.permutation(len(slots))
    clique_ids = np.repeat(np.arange(n_cliques), clique_size)
    clique_vecs = [hash_vector(f"clique{i}", dim, config.seed) for i in range(n_cliques)]
    bank = MemoryBank.for_config(config)
    gaps = rng.integers(0, max_gap + 1, size=n)
    memory = np.where(rng.random(n) < 0.6, config.m_max, rng.uniform(0, config.m_max, size=n))
    kind_table = [TokenKind.ORDINARY, TokenKind.REWARD, TokenKind.PUNISHMENT, TokenKind.DRIVE]
    kinds = [kind_table[k] for k in rng.choice(4, p=[0.9, 0.04, 0.04, 0.02], size=n)]
    t, next_clique = 0, 0
    records = []
    for i, slot_index in enumerate(order):
        slot = slots[slot_index]
        t += int(gaps[i])
        if slot == "clique":
            c = int(clique_ids[next_clique])
            next_clique += 1
            payload = TokenPayload(f"clique{c}", TokenKind.ORDINARY, clique_vecs[c])
        elif slot == "cluster":
            c = int(rng.integers(n_clusters))
            vec = _unit(centres[c] + 0.2 * rng.standard_normal(dim) / np.sqrt(dim))
            payload = TokenPayload(f"cluster{c}_{i}", kinds[i], vec)
        else:
            payload = TokenPayload(f"plain{i}", kinds[i], None)
        records.append(TokenRecord(t, payload, float(memory[i])))
    bank.records = records
    bank._reindex()
    bank._structural_change()
    return bank


def corpus_bank(rng: np.random.Generator, n: int = 500, config: Config | None = None, *,
                vocabulary: int = 120, sentence: tuple[int, int] = (3, 8),
                memory: tuple[float, float] = (0.0, 255.0)) -> MemoryBank:
    """``n`` records of random sentences over a Zipf-ish vocabulary."""
    config = config or Config()
    words = [f"w{i}" for i in range(vocabulary)]
    weights = 1.0 / np.arange(1, vocabulary + 1)
    weights /= weights.sum()
    bank = MemoryBank.for_config(config)
    t = 0
    while len(bank) < n:
        k = min(int(rng.integers(sentence[0], sentence[1] + 1)), n - len(bank))
        picks = rng.choice(vocabulary, size=k, p=weights)
        payloads = [TokenPayload(words[j], TokenKind.ORDINARY, hash_vector(words[j], config.dim, config.seed))
                    for j in picks]
        for pos in bank.append(payloads, t, 1):
            bank.records[pos].memory_value = float(rng.uniform(*memory))
        t = bank.tail_time + config.window + 1
    bank.touch()
    return bank


def trained_bank(sentences: Sequence[str], config: Config | None = None, *, repeats: int = 3,
                 gap: int = 20) -> MemoryBank:
    """Learn ``sentences`` by presenting each ``repeats`` times through the normal pipeline."""
    config = config or Config()
    bank = MemoryBank.for_config(config)
    session = Session(bank, config)
    tick = 0
    for _ in range(repeats):
        for line in sentences:
            session.process([InputEvent("text", line, tick)])
            tick += gap
    for r in bank:
        r.activation_value = 0.0
    bank.touch()
    return bank
