"""Semantic actions and the canonical JSON-sequence model interface.

The simulator's inputs and outputs are JSON-formatted *strings*, not
objects: external sequence generators see exactly these bytes.  The
canonical form is fixed here once and for all -- lowercase keys, a single
space after colons and commas, no trailing whitespace -- so round-trips
are byte-identical and tests can compare strings directly.

Input:  {"system": [[i, d, s, v], ...], "user": [<action list t-1>, <t-2>,
        <t-3>], "goal": [[domain, kind, slot, value, status], ...],
        "turn": t}
Output: {"action": [[i, d, s, v], ...], "text": "..."}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .goals import GoalEntry, UserGoal

HISTORY_DEPTH = 3


class ParseError(ValueError):
    pass


class CorpusError(ValueError):
    pass


class SemanticAction(NamedTuple):
    """One (intent, domain, slot, value) tuple.

    General-role intents use domain "general", slot "none", value "none".
    Request-role intents carry value "?".
    """

    intent: str
    domain: str
    slot: str
    value: str


ActionList = list[SemanticAction]


def action_from_fields(fields) -> SemanticAction:
    if len(fields) != 4:
        raise ParseError(f"action tuple must have 4 fields, got {len(fields)}: {fields!r}")
    if not all(isinstance(f, str) for f in fields):
        raise ParseError(f"action fields must all be strings: {fields!r}")
    return SemanticAction(*fields)


def actions_from_lists(raw) -> ActionList:
    if not isinstance(raw, list):
        raise ParseError(f"action list must be a list, got {type(raw).__name__}")
    return [action_from_fields(item) for item in raw]


@dataclass(frozen=True)
class InputContext:
    """Everything the generator sees for one turn."""

    system_action: tuple[SemanticAction, ...] = ()
    user_history: tuple[tuple[SemanticAction, ...], ...] = ()  # most recent first
    goal: UserGoal = field(default_factory=UserGoal)
    turn: int = 0

    def __post_init__(self):
        if len(self.user_history) > HISTORY_DEPTH:
            raise ValueError(f"user_history longer than {HISTORY_DEPTH} turns")
        if self.turn < 0:
            raise ValueError("turn must be non-negative")

    @classmethod
    def build(cls, system_action, full_history, goal, turn) -> "InputContext":
        """Construct from an unbounded history; keeps the 3 most recent turns."""
        truncated = tuple(tuple(al) for al in list(full_history)[:HISTORY_DEPTH])
        return cls(
            system_action=tuple(system_action),
            user_history=truncated,
            goal=goal,
            turn=turn,
        )


@dataclass(frozen=True)
class OutputRecord:
    action: tuple[SemanticAction, ...] = ()
    text: str = ""


def serialize_input(ctx: InputContext) -> str:
    doc = {
        "system": [list(a) for a in ctx.system_action],
        "user": [[list(a) for a in al] for al in ctx.user_history],
        "goal": [[e.domain, e.kind, e.slot, e.value, e.status] for e in ctx.goal.entries],
        "turn": ctx.turn,
    }
    return json.dumps(doc, ensure_ascii=False)


def parse_input(s: str) -> InputContext:
    try:
        doc = json.loads(s)
    except json.JSONDecodeError as e:
        raise ParseError(f"input is not valid JSON: {e.msg}") from e
    if not isinstance(doc, dict) or set(doc) != {"system", "user", "goal", "turn"}:
        raise ParseError("input must be an object with keys system, user, goal, turn")
    system = actions_from_lists(doc["system"])
    if not isinstance(doc["user"], list):
        raise ParseError("'user' must be a list of action lists")
    history = tuple(tuple(actions_from_lists(al)) for al in doc["user"])
    entries = []
    for raw in doc["goal"]:
        if not isinstance(raw, list) or len(raw) != 5 or not all(isinstance(x, str) for x in raw):
            raise ParseError(f"goal tuple must have 5 string fields: {raw!r}")
        entries.append(GoalEntry(domain=raw[0], kind=raw[1], slot=raw[2], value=raw[3], status=raw[4]))
    if not isinstance(doc["turn"], int) or isinstance(doc["turn"], bool):
        raise ParseError("'turn' must be an integer")
    return InputContext(
        system_action=tuple(system),
        user_history=history,
        goal=UserGoal(entries=tuple(entries)),
        turn=doc["turn"],
    )


def serialize_output(rec: OutputRecord) -> str:
    doc = {"action": [list(a) for a in rec.action], "text": rec.text}
    return json.dumps(doc, ensure_ascii=False)


_TEXT_RE = re.compile(r'"text"\s*:\s*"((?:[^"\\]|\\.)*)')


def parse_output(s: str, mode: str = "strict") -> OutputRecord:
    """Parse an output record.

    ``strict`` accepts the canonical grammar only (re-serialization must be
    byte-identical).  ``lenient`` tolerates whitespace variance and a
    truncated text field, for consuming free-running external generators;
    the action list must still be complete and well-formed.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown parse mode {mode!r}")
    try:
        doc = json.loads(s)
    except json.JSONDecodeError as e:
        if mode == "strict":
            raise ParseError(f"output is not valid JSON: {e.msg}") from e
        return _parse_output_lenient(s)
    if not isinstance(doc, dict) or "action" not in doc:
        raise ParseError("output must be an object with an 'action' key")
    if mode == "strict" and set(doc) != {"action", "text"}:
        raise ParseError("output must have exactly the keys action, text")
    text = doc.get("text", "")
    if not isinstance(text, str):
        raise ParseError("'text' must be a string")
    rec = OutputRecord(action=tuple(actions_from_lists(doc["action"])), text=text)
    if mode == "strict" and serialize_output(rec) != s:
        raise ParseError("output is valid JSON but not in canonical form")
    return rec


def _parse_output_lenient(s: str) -> OutputRecord:
    # Recover a record whose text field (and closing braces) got truncated.
    start = s.find('"action"')
    if start < 0:
        raise ParseError("no 'action' key found")
    open_idx = s.find("[", start)
    if open_idx < 0:
        raise ParseError("no action list found")
    depth = 0
    end_idx = None
    in_str = False
    escaped = False
    for i in range(open_idx, len(s)):
        ch = s[i]
        if in_str:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                end_idx = i
                break
    if end_idx is None:
        raise ParseError("action list is incomplete")
    try:
        raw_actions = json.loads(s[open_idx : end_idx + 1])
    except json.JSONDecodeError as e:
        raise ParseError(f"action list is malformed: {e.msg}") from e
    m = _TEXT_RE.search(s, end_idx)
    text = json.loads('"%s"' % m.group(1)) if m else ""
    return OutputRecord(action=tuple(actions_from_lists(raw_actions)), text=text)


# -- dialogue corpora and supervised pairs ------------------------------

FEATURE_MODES = ("full", "no_history", "no_goal_no_history")


def load_corpus(text: str) -> list[dict]:
    """Parse a JSONL dialogue corpus; each line is one dialogue object."""
    dialogues = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusError(f"line {lineno}: not valid JSON: {e.msg}") from e
        doc["_line"] = lineno
        dialogues.append(doc)
    return dialogues


def _validate_dialogue(doc: dict, lineno: int) -> list[str]:
    problems = []
    if not isinstance(doc.get("goal"), dict):
        problems.append(f"line {lineno}: missing or non-object 'goal'")
    turns = doc.get("turns")
    if not isinstance(turns, list):
        problems.append(f"line {lineno}: missing or non-list 'turns'")
        return problems
    for i, t in enumerate(turns):
        if not isinstance(t, dict):
            problems.append(f"line {lineno}: turn {i} is not an object")
            continue
        if t.get("speaker") not in ("sys", "usr"):
            problems.append(f"line {lineno}: turn {i} speaker must be 'sys' or 'usr'")
        if not isinstance(t.get("text", ""), str):
            problems.append(f"line {lineno}: turn {i} text must be a string")
        try:
            actions_from_lists(t.get("action", []))
        except ParseError as e:
            problems.append(f"line {lineno}: turn {i}: {e}")
    return problems


def build_supervised_pairs(
    corpus: Iterable[dict],
    features: str = "full",
    ontology=None,
    seed: int = 0,
) -> list[tuple[str, str]]:
    """One (input string, output string) pair per user turn of each dialogue.

    ``features`` drops parts of the context: ``no_history`` empties the
    "user" field, ``no_goal_no_history`` empties "goal" as well.  The goal
    is replayed turn by turn through the update rules; system-turn updates
    need intent roles, so they apply only when an ontology is given.
    """
    from random import Random

    from .goals import goal_from_json, update_on_system, update_on_user

    if features not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {features!r}; pick one of {FEATURE_MODES}")

    problems: list[str] = []
    dialogues = list(corpus)
    for doc in dialogues:
        problems.extend(_validate_dialogue(doc, doc.get("_line", 0)))
    if problems:
        raise CorpusError("corpus schema violations:\n" + "\n".join(problems))

    pairs: list[tuple[str, str]] = []
    for d_idx, doc in enumerate(dialogues):
        goal = goal_from_json(json.dumps(doc["goal"]))
        rng = Random(1_000_003 * (seed + 1) + d_idx)
        history: list[tuple[SemanticAction, ...]] = []  # most recent first
        sys_action: ActionList = []
        user_turn = 0
        for t in doc["turns"]:
            action = actions_from_lists(t.get("action", []))
            if t["speaker"] == "sys":
                sys_action = action
                if ontology is not None:
                    goal, _ = update_on_system(goal, action, ontology, rng)
                continue
            use_goal = goal if features in ("full", "no_history") else UserGoal()
            use_history = tuple(history) if features == "full" else ()
            ctx = InputContext.build(sys_action, use_history, use_goal, user_turn)
            rec = OutputRecord(action=tuple(action), text=t.get("text", ""))
            pairs.append((serialize_input(ctx), serialize_output(rec)))
            goal = update_on_user(goal, action)
            history.insert(0, tuple(action))
            del history[HISTORY_DEPTH:]
            sys_action = []
            user_turn += 1
    return pairs
