"""Stitch a chef bank and a doctor bank and compare domain queries before and after.

    python3 scripts/merge_domains.py [--repeats 2] [--query "fry onion"] ...
"""
import argparse

from chainmind import Config, chain_activate, merge
from chainmind.synthetic import CHEF, DOCTOR, trained_bank
from chainmind.tokenizer import tokenize_text


def top(bank, text, cfg, k):
    bank = bank.copy()
    inputs = bank.append(tokenize_text(text), bank.tail_time + cfg.window + 1)
    r = chain_activate(bank, inputs, cfg)
    return [(p, bank.records[p].symbol, float(r.activations[p])) for p in r.top(k, exclude=set(r.seeded))]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=2)
    parser.add_argument("--query", action="append",
                        help="query text (default: two per domain)")
    parser.add_argument("-k", type=int, default=5)
    args = parser.parse_args()

    cfg = Config()
    chef = trained_bank(CHEF, cfg, repeats=args.repeats)
    doctor = trained_bank(DOCTOR, cfg, repeats=args.repeats)
    both = merge(chef, doctor, config=cfg)
    print(f"chef {len(chef)} + doctor {len(doctor)} = merged {len(both)} records")
    for text in args.query or ["fry onion", "salt", "measure fever", "fever pain"]:
        words = set(text.split())
        source, shift = (chef, 0) if any(chef.positions_of(w) for w in words) else (doctor, len(chef))
        alone = top(source, text, cfg, args.k)
        merged = [(p - shift, s, a) for p, s, a in top(both, text, cfg, args.k)]
        same = "same" if alone == merged else "DIFFERENT"
        print(f"\n{text!r}: {same}")
        for (p, s, a), (_, s2, a2) in zip(alone, merged):
            print(f"  {p:>4} {s:<12}{a:8.2f}   merged {s2:<12}{a2:8.2f}")


if __name__ == "__main__":
    main()
