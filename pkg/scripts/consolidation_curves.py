"""Memory value against presentation count, for pairs shown together or apart.

    python3 scripts/consolidation_curves.py [--presentations 8] [--gap 20]
"""
import argparse

from chainmind import Config, MemoryBank
from chainmind.harness import Session
from chainmind.tokenizer import InputEvent


def total(bank, symbol):
    return sum(bank.records[p].memory_value for p in bank.positions_of(symbol))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--presentations", type=int, default=8)
    parser.add_argument("--gap", type=int, default=20)
    parser.add_argument("--pair", nargs=2, default=["cup", "tea"])
    args = parser.parse_args()

    cfg = Config()
    a, b = args.pair
    together, apart = MemoryBank.for_config(cfg), MemoryBank.for_config(cfg)
    s1, s2 = Session(together, cfg), Session(apart, cfg)
    print(f"{'k':>3} {'together ' + a:>16} {'apart ' + a:>14} {'together ' + b:>16} {'apart ' + b:>14}")
    for k in range(args.presentations):
        s1.process([InputEvent("text", f"{a} {b}", 2 * args.gap * k)])
        s2.process([InputEvent("text", a, 2 * args.gap * k)])
        s2.process([InputEvent("text", b, 2 * args.gap * k + args.gap)])
        print(f"{k + 1:>3} {total(together, a):>16.2f} {total(apart, a):>14.2f} "
              f"{total(together, b):>16.2f} {total(apart, b):>14.2f}")


if __name__ == "__main__":
    main()
