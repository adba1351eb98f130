"""End-to-end scenario runner.

Each group of same-tick events goes through
tokenize -> append -> seed -> activate -> decide -> reinforce -> decay.

Scenario scripts are tab-separated ``<tick>\\t<channel>\\t<content>`` lines.
Lines starting with ``#@`` are directives:

    #@ set <key>=<value>             config override
    #@ innate default|<file>         install innate presets
    #@ remember <memory>\\t<items>    store a consolidated experience; items are
                                     ``kind:symbol`` separated by spaces (one
                                     tick apart) or ``&`` (simultaneous)
    #@ granularity word|character    text tokenization
    #@ exclude <sym>,<sym>           symbols left out of ``*`` in memory-order
    #@ expect memory-order <a,b> > <c> > *
                                     (``*``: every other non-excluded symbol,
                                     ``**``: every other symbol)
    #@ expect action <Variant>       final action
    #@ expect action-all <Variant>   action on every turn
    #@ expect action-at <tick> <Variant>
    #@ expect plan-contains <symbol>
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .activation import ActivationReport, chain_activate, decay_activations
from .bank import MemoryBank, TokenKind, TokenPayload
from .config import Config, parse_config
from .decision import Action, ActionKind, decide, tally
from .innate import InnateRegistry, default_specs, install, load_innate, need_record
from .plasticity import forget, reinforce
from .tokenizer import InputEvent, ScriptError, group_events, make_payload, parse_script_events, tokenize_event


class AssertionFailed(Exception):
    pass


@dataclass
class ScenarioScript:
    events: list[InputEvent]
    overrides: dict[str, str] = field(default_factory=dict)
    setup: list[tuple[str, str]] = field(default_factory=list)
    expectations: list[tuple[str, str]] = field(default_factory=list)
    granularity: str = "word"
    exclude: frozenset[str] = frozenset()
    base_dir: Path | None = None

    def config(self, base: Config | None = None) -> Config:
        text = "\n".join(f"{k}={v}" for k, v in self.overrides.items())
        return parse_config(text, base)


def parse_script(text: str, base_dir: Path | None = None) -> ScenarioScript:
    script = ScenarioScript(events=parse_script_events(text), base_dir=base_dir)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.startswith("#@"):
            continue
        words = raw[2:].strip().split(None, 1)
        if not words:
            raise ScriptError(f"line {lineno}: empty directive")
        name, arg = words[0], (words[1] if len(words) > 1 else "")
        if name == "set":
            key, sep, value = arg.partition("=")
            if not sep:
                raise ScriptError(f"line {lineno}: expected key=value")
            script.overrides[key.strip()] = value.strip()
        elif name in ("innate", "remember"):
            script.setup.append((name, arg))
        elif name == "granularity":
            if arg not in ("word", "character"):
                raise ScriptError(f"line {lineno}: unknown granularity {arg!r}")
            script.granularity = arg
        elif name == "exclude":
            script.exclude = script.exclude | {s.strip() for s in arg.split(",") if s.strip()}
        elif name == "expect":
            kind, _, rest = arg.partition(" ")
            if kind not in ("memory-order", "action", "action-all", "action-at", "plan-contains"):
                raise ScriptError(f"line {lineno}: unknown expectation {kind!r}")
            script.expectations.append((kind, rest.strip()))
        else:
            raise ScriptError(f"line {lineno}: unknown directive {name!r}")
    return script


def load_script(path: str | Path) -> ScenarioScript:
    path = Path(path)
    return parse_script(path.read_text(encoding="utf-8"), path.parent)


@dataclass
class Turn:
    tick: int
    time: int
    tokens: list[str]
    report: ActivationReport
    action: Action

    @property
    def tally(self):
        return tally(self.report)


@dataclass
class Transcript:
    turns: list[Turn] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    steps: list[str] = field(default_factory=list)

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    @property
    def ok(self) -> bool:
        return not self.failures


def _remember(bank: MemoryBank, arg: str, config: Config) -> None:
    memory_s, _, items = arg.partition("\t") if "\t" in arg else arg.partition(" ")
    memory = float(memory_s)
    tail = bank.tail_time
    t = 0 if tail is None else tail + config.window + 1
    for step in items.split():
        group = []
        for item in step.split("&"):
            kind, sep, sym = item.partition(":")
            if not sep:
                kind, sym = "ordinary", item
            group.append(make_payload(sym, TokenKind(kind), dim=bank.dim, seed=config.seed))
        for pos in bank.append(group, t, 0):
            bank.records[pos].memory_value = min(bank.m_max, memory)
        t += 1
    bank.touch()


def apply_setup(script: ScenarioScript, bank: MemoryBank, registry: InnateRegistry, config: Config) -> None:
    for name, arg in script.setup:
        if name == "innate":
            if arg == "default":
                specs = default_specs(config)
            else:
                path = Path(arg)
                if not path.is_absolute() and script.base_dir is not None:
                    path = script.base_dir / path
                specs = load_innate(path, config)
            install(bank, specs, registry, config)
        else:
            _remember(bank, arg, config)


class Session:
    """Runs event groups against one bank, carrying the previous report forward."""

    def __init__(self, bank: MemoryBank, config: Config, registry: InnateRegistry | None = None,
                 granularity: str = "word", trace: bool = False, dump_report: bool = False):
        self.bank = bank
        self.config = config
        self.registry = registry or InnateRegistry()
        self.granularity = granularity
        self.trace = trace
        self.dump_report = dump_report
        self.prior: ActivationReport | None = None
        self.origin: int | None = None
        self.last_tick: int | None = None
        self.steps: list[str] = []  # pipeline stage log, for inspection

    def _time(self, tick: int) -> int:
        if self.origin is None:
            tail = self.bank.tail_time
            self.origin = 0 if tail is None else tail + self.config.window + 1
        return self.origin + tick

    def process(self, group: Sequence[InputEvent]) -> tuple[Turn, list[str]]:
        cfg, bank = self.config, self.bank
        tick = group[0].event_time
        if self.last_tick is not None:
            self.advance(tick - self.last_tick)
        self.last_tick = tick
        t = self._time(tick)
        self.steps.append("tokenize")
        inputs: list[int] = []
        extra_seeds: list[int] = []
        tokens: list[str] = []
        for ev in group:
            payloads = tokenize_event(ev, self.registry, dim=bank.dim, seed=cfg.seed, granularity=self.granularity)
            spacing = 1 if ev.channel == "text" or ev.channel == "drive" else 0
            base = max(t, bank.tail_time if bank.tail_time is not None else t)
            if spacing and inputs:
                base = bank.tail_time + 1
            self.steps.append("append")
            inputs.extend(bank.append(payloads, base, spacing))
            tokens.extend(p.symbol_id for p in payloads)
            for p in payloads:
                if p.kind is TokenKind.NEED:
                    pos = need_record(bank, p.symbol_id)
                    if pos is not None:
                        extra_seeds.append(pos)
        self.steps.append("seed")
        self.steps.append("activate")
        report = chain_activate(bank, inputs + extra_seeds, cfg, prior=self.prior)
        self.steps.append("decide")
        action = decide(bank, report, cfg)
        self.steps.append("reinforce")
        reinforce(bank, report, cfg)
        self.prior = report
        turn = Turn(tick, t, tokens, report, action)
        return turn, self._describe(turn)

    def advance(self, dt: int) -> None:
        if dt > 0:
            self.steps.append("decay")
            decay_activations(self.bank, dt, self.config)
            forget(self.bank, dt, self.config)

    def _describe(self, turn: Turn) -> list[str]:
        r = turn.report
        lines = [
            f"tick {turn.tick} t={turn.time} tokens={' '.join(turn.tokens)}",
            f"  a0={r.a0:.3f} rounds={r.rounds} visited={r.visited} edges={len(r.edges)} {turn.tally}",
            f"  action {turn.action}",
        ]
        if self.trace:
            lines.extend("  | " + line for line in turn.action.trace)
        if self.dump_report:
            lines.extend("  > " + line for line in r.dumps().splitlines())
        return lines


def memory_ranking(bank: MemoryBank) -> list[tuple[str, float]]:
    """Symbols by their strongest record's memory value."""
    best: dict[str, float] = {}
    for r in bank:
        best[r.symbol] = max(best.get(r.symbol, 0.0), r.memory_value)
    return sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))


def _check_memory_order(bank: MemoryBank, spec: str, exclude: frozenset[str]) -> str | None:
    ranking = dict(memory_ranking(bank))
    groups = [[s.strip() for s in g.split(",") if s.strip()] for g in spec.split(">")]
    named = {s for g in groups for s in g}
    resolved = []
    for g in groups:
        if g == ["*"]:
            g = [s for s in ranking if s not in named and s not in exclude]
        elif g == ["**"]:
            g = [s for s in ranking if s not in named]
        missing = [s for s in g if s not in ranking]
        if missing:
            return f"memory-order: unknown symbols {missing}"
        resolved.append(g)
    for hi, lo in zip(resolved, resolved[1:]):
        if not lo:
            continue
        low_best = max(ranking[s] for s in lo)
        high_worst = min(ranking[s] for s in hi)
        if not high_worst > low_best:
            return f"memory-order: min{hi}={high_worst:.6f} is not above max{lo}={low_best:.6f}"
    return None


def check_expectations(script: ScenarioScript, bank: MemoryBank, turns: Sequence[Turn]) -> list[str]:
    failures = []
    for kind, arg in script.expectations:
        if kind == "memory-order":
            err = _check_memory_order(bank, arg, script.exclude)
            if err:
                failures.append(err)
        elif kind == "action":
            got = turns[-1].action.kind.value if turns else "none"
            if got != arg:
                failures.append(f"action: expected {arg}, got {got}")
        elif kind == "action-all":
            for turn in turns:
                if turn.action.kind.value != arg:
                    failures.append(f"action-all: tick {turn.tick} expected {arg}, got {turn.action.kind.value}")
        elif kind == "action-at":
            tick_s, _, want = arg.partition(" ")
            hits = [t for t in turns if t.tick == int(tick_s)]
            got = hits[-1].action.kind.value if hits else "none"
            if got != want.strip():
                failures.append(f"action-at {tick_s}: expected {want.strip()}, got {got}")
        elif kind == "plan-contains":
            plan = turns[-1].action.plan if turns else ()
            if not any(step.payload.symbol_id == arg for step in plan):
                failures.append(f"plan-contains: {arg} not in final plan")
    return failures


def run_scenario(script: ScenarioScript, bank: MemoryBank | None = None, config: Config | None = None, *,
                 registry: InnateRegistry | None = None, trace: bool = False,
                 dump_report: bool = False) -> tuple[Transcript, MemoryBank]:
    config = script.config(config)
    if bank is None:
        bank = MemoryBank.for_config(config)
    registry = registry or InnateRegistry()
    apply_setup(script, bank, registry, config)
    session = Session(bank, config, registry, script.granularity, trace, dump_report)
    transcript = Transcript()
    for group in group_events(script.events):
        turn, lines = session.process(group)
        transcript.turns.append(turn)
        transcript.lines.extend(lines)
    if transcript.turns:
        transcript.lines.append("memory ranking:")
        for sym, m in memory_ranking(bank)[:10]:
            transcript.lines.append(f"  {sym}\t{m:.6f}")
    transcript.failures = check_expectations(script, bank, transcript.turns)
    for f in transcript.failures:
        transcript.lines.append(f"FAILED {f}")
    transcript.steps = session.steps
    return transcript, bank
