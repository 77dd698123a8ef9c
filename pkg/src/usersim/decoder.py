"""Per-turn constrained semantic decoding graph.

Every legal semantic action for a turn is a root-to-leaf path through a
layered graph: intent -> domain -> slot -> value.  Intents come from the
ontology's user side; domains, slots and values come from the user goal;
the current system action can insert additional nodes (e.g. a system
request for a slot the goal does not mention opens that slot's vocabulary
plus "dontcare" as inform options).  After each complete action the decoder
chooses between CONTINUE and STOP.

Construction rules:

* every general-role user intent gets the single path (intent, "general",
  "none", "none"); a bye-role intent behaves the same and additionally
  marks the dialogue end;
* inform-role intents reach (domain, slot, goal value) for every info/book
  goal entry that is not yet fulfilled (fulfilled paths reappear only while
  the system re-requests that slot);
* request-role intents reach (domain, slot, "?") for reqt entries under the
  same pruning rule;
* a request-role system action on (d, s) inserts inform options: the goal
  value when the goal mentions (d, s) with a concrete value, otherwise the
  slot's closed vocabulary plus "dontcare";
* a select-role system action offering (d, s, v) inserts v as an inform
  option;
* other-role user intents own no paths and are therefore never decodable.

Each path carries a provenance tag (``goal``, ``ontology`` or
``system_inserted``) so the no-hallucination property can be audited: a
value node exists only because the goal, the ontology, or the current
system action put it there.

A graph is immutable after build; one graph serves one turn.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .goals import UserGoal
from .ontology import Ontology
from .semact import ActionList, SemanticAction

CONTINUE = "CONTINUE"
STOP = "STOP"
POSITIONS = ("intent", "domain", "slot", "value", "boundary")
DEFAULT_MAX_ACTIONS = 5
ENUMERATION_GUARD = 10**6


class DecodeError(ValueError):
    pass


class EnumerationGuardError(RuntimeError):
    """The graph admits too many action lists to enumerate exhaustively."""


@dataclass
class Violation:
    kind: str  # unknown_intent | illegal_domain | illegal_slot | illegal_value | duplicate | over_length
    action: SemanticAction | None
    detail: str


@dataclass(frozen=True)
class ConstraintGraph:
    """Immutable set of legal paths for one turn, with provenance."""

    paths: dict[SemanticAction, str]
    roles: dict[str, str]  # user intent -> role, for policies built on top
    requested_slots: frozenset[tuple[str, str]]  # (domain, slot) the system just asked
    max_actions: int = DEFAULT_MAX_ACTIONS

    def intents(self) -> list[str]:
        seen: list[str] = []
        for a in self.paths:
            if a.intent not in seen:
                seen.append(a.intent)
        return seen

    def domains(self, intent: str) -> list[str]:
        seen: list[str] = []
        for a in self.paths:
            if a.intent == intent and a.domain not in seen:
                seen.append(a.domain)
        return seen

    def slots(self, intent: str, domain: str) -> list[str]:
        seen: list[str] = []
        for a in self.paths:
            if a.intent == intent and a.domain == domain and a.slot not in seen:
                seen.append(a.slot)
        return seen

    def values(self, intent: str, domain: str, slot: str) -> list[str]:
        return [a.value for a in self.paths if a[:3] == (intent, domain, slot)]

    def has_path(self, action: SemanticAction) -> bool:
        return action in self.paths

    def provenance(self, action: SemanticAction) -> str:
        return self.paths[action]

    def dump(self) -> str:
        """Deterministic one-path-per-line rendering for golden-file tests."""
        lines = [
            f"{a.intent} | {a.domain} | {a.slot} | {a.value} [{prov}]"
            for a, prov in sorted(self.paths.items())
        ]
        return "\n".join(lines)


def build_graph(
    ontology: Ontology,
    goal: UserGoal,
    a_sys: ActionList,
    max_actions: int = DEFAULT_MAX_ACTIONS,
) -> ConstraintGraph:
    """Pure function of (ontology, goal, current system action)."""
    paths: dict[SemanticAction, str] = {}
    roles = dict(ontology.user_intents)
    inform_intents = ontology.user_intents_with_role("inform")
    request_intents = ontology.user_intents_with_role("request")

    def add(intent: str, domain: str, slot: str, value: str, prov: str) -> None:
        paths.setdefault(SemanticAction(intent, domain, slot, value), prov)

    for intent, role in roles.items():
        if role in ("general", "bye"):
            add(intent, "general", "none", "none", "ontology")

    requested: list[tuple[str, str]] = []
    offered: list[tuple[str, str, str]] = []
    for intent, domain, slot, value in a_sys:
        role = ontology.system_role(intent)
        if role == "request" and slot != "none" and ontology.has_slot(domain, slot):
            requested.append((domain, slot))
        elif role == "select" and slot != "none" and value not in ("?", "none"):
            if ontology.has_slot(domain, slot):
                offered.append((domain, slot, value))
    requested_set = frozenset(requested)

    for e in goal.entries:
        live = e.status != "fulfilled" or (e.domain, e.slot) in requested_set
        if not live:
            continue
        if e.kind in ("info", "book"):
            for intent in inform_intents:
                add(intent, e.domain, e.slot, e.value, "goal")
        else:
            for intent in request_intents:
                add(intent, e.domain, e.slot, "?", "goal")

    goal_values = {(e.domain, e.slot): e.value for e in goal.entries if e.value != "?"}
    for domain, slot in requested:
        if (domain, slot) in goal_values:
            for intent in inform_intents:
                add(intent, domain, slot, goal_values[(domain, slot)], "goal")
        else:
            for intent in inform_intents:
                for v in ontology.legal_values(domain, slot):
                    add(intent, domain, slot, v, "system_inserted")
                add(intent, domain, slot, "dontcare", "system_inserted")
    for domain, slot, value in offered:
        for intent in inform_intents:
            add(intent, domain, slot, value, "system_inserted")

    return ConstraintGraph(
        paths=paths,
        roles=roles,
        requested_slots=requested_set,
        max_actions=max_actions,
    )


# -- validation ----------------------------------------------------------


def validate_action_list(cg: ConstraintGraph, al: ActionList) -> list[Violation]:
    """Empty list means the action list is legal for this turn."""
    violations: list[Violation] = []
    seen: set[SemanticAction] = set()
    for idx, action in enumerate(al):
        if idx >= cg.max_actions:
            violations.append(
                Violation("over_length", action, f"action {idx + 1} exceeds cap {cg.max_actions}")
            )
            continue
        if action in seen:
            violations.append(Violation("duplicate", action, "tuple repeated in one turn"))
            continue
        seen.add(action)
        if cg.has_path(action):
            continue
        intent, domain, slot, value = action
        if intent not in cg.roles:
            violations.append(Violation("unknown_intent", action, f"intent {intent!r} not in ontology"))
        elif domain not in cg.domains(intent):
            violations.append(
                Violation("illegal_domain", action, f"domain {domain!r} unreachable from {intent!r}")
            )
        elif slot not in cg.slots(intent, domain):
            violations.append(
                Violation("illegal_slot", action, f"slot {slot!r} unreachable from {intent}/{domain}")
            )
        else:
            violations.append(
                Violation("illegal_value", action, f"value {value!r} not an option for {intent}/{domain}/{slot}")
            )
    return violations


def is_valid(cg: ConstraintGraph, al: ActionList) -> bool:
    return not validate_action_list(cg, al)


# -- prefix queries -------------------------------------------------------


def _split_partial(partial) -> tuple[list[SemanticAction], tuple]:
    """Split into (complete actions, in-progress field tuple)."""
    done: list[SemanticAction] = []
    current: tuple = ()
    for i, item in enumerate(partial):
        fields = tuple(item)
        if len(fields) == 4:
            done.append(SemanticAction(*fields))
        elif i == len(partial) - 1:
            current = fields
        else:
            raise DecodeError(f"only the last element of a partial may be incomplete: {item!r}")
    return done, current


def legal_continuations(cg: ConstraintGraph, partial, position: str):
    """Options extending ``partial`` to a legal prefix at ``position``.

    ``partial`` is a sequence of 4-field actions whose last element may be a
    1-3 field prefix of the action being decoded.  Duplicates of actions
    already in ``partial`` are never offered; an option at intent/domain/
    slot level survives only if some non-duplicate completion exists.
    Boundary options are CONTINUE and STOP; CONTINUE disappears at the
    action cap or when every remaining path is a duplicate.
    """
    if position not in POSITIONS:
        raise DecodeError(f"unknown position {position!r}")
    done, current = _split_partial(partial)
    if len(done) > cg.max_actions or (done and len(done) == cg.max_actions and current):
        raise DecodeError("partial exceeds the action cap")
    for a in done:
        if not cg.has_path(a):
            raise DecodeError(f"partial contains an illegal action: {tuple(a)!r}")
    if len(set(done)) != len(done):
        raise DecodeError("partial contains duplicate actions")

    expected_len = {"intent": 0, "domain": 1, "slot": 2, "value": 3, "boundary": 0}[position]
    if position == "boundary" and current:
        raise DecodeError("boundary position requires only complete actions")
    if position != "boundary" and len(current) != expected_len:
        raise DecodeError(
            f"position {position!r} expects {expected_len} field(s) in progress, got {len(current)}"
        )

    used = set(done)
    remaining = [a for a in cg.paths if a not in used]

    if position == "boundary":
        options = []
        if remaining and len(done) < cg.max_actions:
            options.append(CONTINUE)
        options.append(STOP)
        return options

    if not current and len(done) >= cg.max_actions:
        return []

    seen: list[str] = []
    for a in remaining:
        if tuple(a)[:expected_len] != current:
            continue
        opt = a[expected_len]
        if opt not in seen:
            seen.append(opt)
    return seen


def enumerate_legal(cg: ConstraintGraph, max_actions: int | None = None) -> set[tuple]:
    """Every action list accepted by ``validate_action_list``, as tuples.

    Lists are ordered, so all orderings of the same path set are distinct
    members.  Guarded against explosion; prefer spot-checking with
    ``validate_action_list`` for large graphs.
    """
    cap = cg.max_actions if max_actions is None else min(max_actions, cg.max_actions)
    n = len(cg.paths)
    total, perm = 1, 1  # empty list counts
    for k in range(1, cap + 1):
        if k > n:
            break
        perm *= n - k + 1
        total += perm
        if total > ENUMERATION_GUARD:
            raise EnumerationGuardError(
                f"{n} paths with cap {cap} admit more than {ENUMERATION_GUARD} lists"
            )

    results: set[tuple] = set()
    paths = list(cg.paths)

    def extend(prefix: tuple) -> None:
        results.add(prefix)
        if len(prefix) == cap:
            return
        for a in paths:
            if a not in prefix:
                extend(prefix + (a,))

    extend(())
    return results


# -- serialized-prefix masks ----------------------------------------------


@dataclass
class PrefixMask:
    """Admissible next strings for a canonical output-record prefix.

    ``options`` are the exact strings that may be appended; each carries any
    structural glue needed so that prefix + option is again a canonical
    prefix ending at the next decision point.  ``position`` names that
    decision: one of start, intent, domain, slot, value, boundary, text,
    free (``free`` = inside the unconstrained text field).
    """

    position: str
    options: list[str] | None


class MaskError(ValueError):
    pass


def prefix_mask(cg: ConstraintGraph, partial_serialized: str) -> PrefixMask:
    """Walk the canonical grammar of an output record against the graph.

    A generator that always appends one of the returned options can never
    serialize an illegal action list.
    """
    s = partial_serialized
    i = 0
    done: list[SemanticAction] = []

    def mask_from(options: list[tuple[str, object]], position: str) -> PrefixMask | None:
        """Consume one choice; None return means a full option was consumed."""
        nonlocal i
        remaining = s[i:]
        if remaining == "":
            return PrefixMask(position=position, options=[r for r, _ in options])
        partials = []
        for rendered, token in options:
            if remaining.startswith(rendered):
                i += len(rendered)
                _apply(token)
                return None
            if rendered.startswith(remaining):
                partials.append(rendered[len(remaining):])
        if partials:
            i = len(s)
            return PrefixMask(position=position, options=partials)
        raise MaskError(f"unparseable prefix at offset {i}: {remaining[:40]!r}")

    chosen: dict = {}

    def _apply(token) -> None:
        if isinstance(token, tuple):
            key, value = token
            chosen[key] = value

    state = "start"
    current: list[str] = []
    while True:
        if state == "start":
            m = mask_from([('{"action": [', None)], "start")
            if m:
                return m
            state = "list_open"
        elif state == "list_open":
            opts: list[tuple[str, object]] = [("]", ("close", None))]
            for intent in _legal_intents(cg, done):
                opts.append(("[" + json.dumps(intent, ensure_ascii=False), ("intent", intent)))
            m = mask_from(opts, "intent")
            if m:
                return m
            if "intent" in chosen:
                current = [chosen.pop("intent")]
                state = "domain"
            else:
                state = "text"
            chosen.clear()
        elif state in ("domain", "slot", "value"):
            field_opts = legal_continuations(cg, done + [tuple(current)], state)
            opts = [
                (", " + json.dumps(v, ensure_ascii=False), ("field", v)) for v in field_opts
            ]
            m = mask_from(opts, state)
            if m:
                return m
            current.append(chosen.pop("field"))
            chosen.clear()
            if state == "domain":
                state = "slot"
            elif state == "slot":
                state = "value"
            else:
                done.append(SemanticAction(*current))
                current = []
                state = "boundary"
        elif state == "boundary":
            bopts = legal_continuations(cg, done, "boundary")
            opts = []
            if CONTINUE in bopts:
                for intent in _legal_intents(cg, done):
                    opts.append(
                        ("], [" + json.dumps(intent, ensure_ascii=False), ("intent", intent))
                    )
            opts.append(("]]", ("close", None)))
            m = mask_from(opts, "boundary")
            if m:
                return m
            if "intent" in chosen:
                current = [chosen.pop("intent")]
                state = "domain"
            else:
                state = "text"
            chosen.clear()
        elif state == "text":
            m = mask_from([(', "text": "', None)], "text")
            if m:
                return m
            return PrefixMask(position="free", options=None)


def _legal_intents(cg: ConstraintGraph, done: list[SemanticAction]) -> list[str]:
    if len(done) >= cg.max_actions:
        return []
    return legal_continuations(cg, list(done), "intent")
