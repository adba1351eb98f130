"""Propagation on large banks with dense similarity cliques: time, edges, peak activation.

    python3 scripts/termination_fuzz.py [--banks 50] [--records 10000] [--clique-size 32] [--a0 90]
"""
import argparse
import time

import numpy as np

from chainmind import Config, PropagationLimitError, chain_activate
from chainmind.synthetic import clique_bank


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--banks", type=int, default=50)
    parser.add_argument("--records", type=int, default=10_000)
    parser.add_argument("--clique-size", type=int, default=32)
    parser.add_argument("--a0", type=float, default=None, help="default: the configured A0")
    parser.add_argument("--seed", type=int, default=2000)
    args = parser.parse_args()

    cfg = Config()
    times, edges = [], []
    for i in range(args.banks):
        rng = np.random.default_rng(args.seed + i)
        bank = clique_bank(rng, args.records, cfg, clique_size=args.clique_size)
        cliques = [p for p, r in enumerate(bank) if r.symbol.startswith("clique")]
        inputs = rng.choice(cliques, 4).tolist() + rng.integers(0, len(bank), 4).tolist()
        start = time.perf_counter()
        try:
            r = chain_activate(bank, inputs, cfg, a0=args.a0)
        except PropagationLimitError as exc:
            print(f"bank {i:>3}: {exc}")
            continue
        times.append(time.perf_counter() - start)
        edges.append(len(r.edges))
        print(f"bank {i:>3}: {times[-1]:6.2f}s rounds={r.rounds} visited={r.visited:>5} "
              f"edges={len(r.edges):>8} peak={r.activations.max():6.1f}")
    if times:
        print(f"\nmean {np.mean(times):.2f}s  max {np.max(times):.2f}s  max edges {max(edges)}")


if __name__ == "__main__":
    main()
