"""Event-driven re-decision loop.

Context-change events are folded into the current context one at a time.
Whenever an event actually changes a factor value the configuration is
decided again and a log entry is emitted; events that change nothing are
silently absorbed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .decision import DEFAULT_TOLERANCE, DecisionResult, decide
from .errors import ConfigSpaceEmpty, SemanticError
from .model import ContextState, ModelSpec
from .modelio import ScenarioRecord


@dataclass(frozen=True)
class LoopState:
    current_ctx: ContextState
    last_decision: DecisionResult | None = None
    decisions_made: int = 0


@dataclass(frozen=True)
class DecisionLogEntry:
    seq: int
    ctx_delta: Mapping[str, float]
    chosen: str | None
    credentials: tuple[str, ...] | None
    utility: float | None
    total_risk: float | None
    changed: bool
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "ctx_delta": dict(self.ctx_delta),
            "chosen": self.chosen,
            "credentials": list(self.credentials) if self.credentials is not None else None,
            "utility": self.utility,
            "total_risk": self.total_risk,
            "changed": self.changed,
            "error": self.error,
        }


@dataclass(frozen=True)
class DecisionLoop:
    """Binds a model and an engine choice so that ``step`` only needs state and event."""

    model: ModelSpec
    engine: str = "exhaustive"
    tolerance: float = DEFAULT_TOLERANCE
    top_k: int = 1
    _known: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_known", frozenset(self.model.factor_ids))

    def initial_state(self, ctx: Mapping[str, float] | None = None) -> LoopState:
        values = {fid: 0.0 for fid in self.model.factor_ids}
        if ctx:
            self._check_ids(ctx)
            values.update({k: float(v) for k, v in ctx.items()})
        return LoopState(ContextState(values))

    def _check_ids(self, values: Mapping[str, Any]) -> None:
        unknown = sorted(k for k in values if k not in self._known)
        if unknown:
            raise SemanticError(f"unknown context factor(s): {', '.join(unknown)}")

    def step(self, state: LoopState, event: ScenarioRecord) -> tuple[LoopState, DecisionLogEntry | None]:
        self._check_ids(event.set)
        current = state.current_ctx
        delta = {
            k: float(v)
            for k, v in sorted(event.set.items())
            if current.get(k, 0.0) != float(v)
        }
        if not delta:
            return state, None
        ctx = current.updated(delta)
        previous = state.last_decision.chosen.summary() if state.last_decision is not None else None
        try:
            result = decide(self.model, ctx, self.engine, self.top_k, self.tolerance)
        except ConfigSpaceEmpty as exc:
            entry = DecisionLogEntry(event.seq, delta, None, None, None, None, previous is not None, str(exc))
            return LoopState(ctx, None, state.decisions_made), entry
        chosen = result.chosen.summary()
        best = result.best
        entry = DecisionLogEntry(
            event.seq,
            delta,
            chosen,
            result.chosen.credentials,
            best.utility,
            best.risk.total_risk,
            chosen != previous,
        )
        return LoopState(ctx, result, state.decisions_made + 1), entry

    def run(self, initial: LoopState, stream: Iterable[ScenarioRecord]) -> list[DecisionLogEntry]:
        state = initial
        log: list[DecisionLogEntry] = []
        for event in stream:
            state, entry = self.step(state, event)
            if entry is not None:
                log.append(entry)
        return log


def step(
    state: LoopState,
    event: ScenarioRecord,
    model: ModelSpec,
    engine: str = "exhaustive",
    tolerance: float = DEFAULT_TOLERANCE,
) -> tuple[LoopState, DecisionLogEntry | None]:
    return DecisionLoop(model, engine, tolerance).step(state, event)


def run(
    model: ModelSpec,
    initial_ctx: Mapping[str, float] | None,
    stream: Iterable[ScenarioRecord],
    engine: str = "exhaustive",
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[DecisionLogEntry]:
    loop = DecisionLoop(model, engine, tolerance)
    return loop.run(loop.initial_state(initial_ctx), stream)


LOG_COLUMNS = ("seq", "ctx_delta", "chosen", "utility", "total_risk", "changed", "error")


def log_to_jsonl(entries: Iterable[DecisionLogEntry]) -> str:
    return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in entries)


def _num(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def log_to_csv(entries: Iterable[DecisionLogEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_COLUMNS)
    for e in entries:
        delta = ";".join(f"{k}={v:g}" for k, v in e.ctx_delta.items())
        writer.writerow(
            [e.seq, delta, e.chosen or "", _num(e.utility), _num(e.total_risk), str(e.changed).lower(), e.error or ""]
        )
    return buf.getvalue()
