"""Two-sentence consolidation: which character groups end up strongest.

    python3 scripts/world_peace.py [--seed N] [--trace]
"""
import argparse

from chainmind import Config
from chainmind.demos import demo_script
from chainmind.harness import memory_ranking, run_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trace", action="store_true", help="print the full transcript first")
    args = parser.parse_args()

    transcript, bank = run_scenario(demo_script("world-peace"), config=Config(seed=args.seed))
    if args.trace:
        print(transcript.text())
    print(f"{'symbol':<8}{'records':>8}{'best':>10}{'total':>10}")
    for symbol, best in memory_ranking(bank):
        total = sum(bank.records[p].memory_value for p in bank.positions_of(symbol))
        print(f"{symbol:<8}{len(bank.positions_of(symbol)):>8}{best:>10.2f}{total:>10.2f}")
    print("expectations", "met" if transcript.ok else "FAILED: " + "; ".join(transcript.failures))


if __name__ == "__main__":
    main()
