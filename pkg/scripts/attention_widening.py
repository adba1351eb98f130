"""Sweep the initial activation A0 and report how far propagation reaches.

    python3 scripts/attention_widening.py [--records 500] [--banks 5] [--a0 30 60 90 120 140 170 200]
"""
import argparse
import time

import numpy as np

from chainmind import Config, PropagationLimitError, chain_activate
from chainmind.synthetic import corpus_bank


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", type=int, default=500)
    parser.add_argument("--banks", type=int, default=5)
    parser.add_argument("--a0", type=float, nargs="+", default=[30, 60, 90, 120, 140, 170, 200])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cfg = Config()
    print(f"{'bank':>4} " + " ".join(f"{a:>14.0f}" for a in args.a0) + "   (visited/edges)")
    for i in range(args.banks):
        bank = corpus_bank(np.random.default_rng(args.seed + i), args.records, cfg)
        inputs = bank.append([bank.records[3].payload, bank.records[10].payload],
                             bank.tail_time + cfg.window + 1)
        cells = []
        for a0 in args.a0:
            start = time.perf_counter()
            try:
                r = chain_activate(bank.copy(), inputs, cfg, a0=a0)
                cells.append(f"{r.visited:>5}/{len(r.edges):<8}")
            except PropagationLimitError:
                cells.append(f"{'limit':>14}")
            if time.perf_counter() - start > 10:
                break
        print(f"{args.seed + i:>4} " + " ".join(cells))


if __name__ == "__main__":
    main()
