"""Turn-based text session over a memory bank."""
from __future__ import annotations

import sys
from typing import TextIO

from .activation import PropagationLimitError
from .bank import BankError, MemoryBank
from .config import Config
from .harness import Session, memory_ranking
from .innate import InnateRegistry
from .tokenizer import InputEvent

HELP = """commands:
  :save <file>   write the bank
  :load <file>   replace the bank
  :stats         record counts, kind histogram, strongest memories
  :quit          leave
anything else is one text turn"""

TURN_GAP = 10


class Repl:
    def __init__(self, bank: MemoryBank, config: Config, registry: InnateRegistry | None = None,
                 trace: bool = False, dump_report: bool = False):
        self.config = config
        self.registry = registry or InnateRegistry()
        self.trace = trace
        self.dump_report = dump_report
        self.tick = 0
        self._start(bank)

    def _start(self, bank: MemoryBank) -> None:
        self.bank = bank
        self.session = Session(bank, self.config, self.registry, "word", self.trace, self.dump_report)
        self.tick = 0

    def stats(self) -> str:
        s = self.bank.stats()
        kinds = " ".join(f"{k}={v}" for k, v in s["kinds"].items())
        lines = [f"records={s['records']} nonzero_memory={s['nonzero_memory']} active={s['active']}",
                 f"kinds: {kinds}", "top memory:"]
        lines += [f"  {sym}\t{m:.3f}" for sym, m in memory_ranking(self.bank)[:10]]
        return "\n".join(lines)

    def handle(self, line: str) -> str | None:
        """Process one input line; ``None`` ends the session."""
        line = line.strip()
        if not line:
            return ""
        if line.startswith(":"):
            cmd, _, arg = line.partition(" ")
            arg = arg.strip()
            if cmd == ":quit":
                return None
            if cmd == ":stats" and not arg:
                return self.stats()
            if cmd == ":save" and arg:
                self.bank.save(arg)
                return f"saved {len(self.bank)} records to {arg}"
            if cmd == ":load" and arg:
                try:
                    self._start(MemoryBank.load(arg))
                except (OSError, BankError) as exc:
                    return f"load failed: {exc}"
                return f"loaded {len(self.bank)} records from {arg}"
            return HELP
        try:
            turn, lines = self.session.process([InputEvent("text", line, self.tick)])
        except PropagationLimitError as exc:
            return f"turn aborted: {exc}"
        self.tick += TURN_GAP
        expect = turn.report.top(10, exclude=set(turn.report.seeded))
        lines.append("  expectation: " + " ".join(
            f"{turn.report.symbols[p]}:{turn.report.activations[p]:.1f}" for p in expect))
        return "\n".join(lines)

    def run(self, stdin: TextIO = sys.stdin, stdout: TextIO = sys.stdout, prompt: str = "> ") -> None:
        while True:
            if prompt:
                stdout.write(prompt)
                stdout.flush()
            line = stdin.readline()
            if not line:
                break
            out = self.handle(line)
            if out is None:
                break
            if out:
                stdout.write(out + "\n")
