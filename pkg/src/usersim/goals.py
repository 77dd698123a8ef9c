"""User goals: ordered (domain, kind, slot, value, status) tuples and their updates.

A goal is a value object; every update returns a new goal plus a change log,
so a transcript can replay and audit every status transition.  Entry order
encodes user preference (earlier entries are mentioned first) and is
preserved by all operations.

Status transitions implemented here:

* a system or user inform matching an entry's value  -> ``fulfilled``
* a system inform contradicting an entry's value     -> ``conflict``
* a system inform on a reqt entry                    -> ``fulfilled`` (answer logged)
* a user request on a reqt entry                     -> ``requested``
* a user inform on a book entry                      -> ``requested`` (a booking
  needs a confirming system action with book_confirm role to fulfil)
* a system failure action (failure role) on a domain -> info/book entries in
  that domain get a fresh random value and reset to ``not_mentioned``
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from random import Random

from .ontology import KINDS, Ontology, UnreplaceableValueError

STATUSES = ("not_mentioned", "fulfilled", "conflict", "requested")


class GoalError(ValueError):
    pass


@dataclass(frozen=True)
class GoalEntry:
    domain: str
    kind: str
    slot: str
    value: str
    status: str = "not_mentioned"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GoalError(f"unknown goal kind {self.kind!r}")
        if self.status not in STATUSES:
            raise GoalError(f"unknown goal status {self.status!r}")
        if (self.kind == "reqt") != (self.value == "?"):
            raise GoalError(
                f"entry {self.domain}.{self.slot}: kind reqt iff value '?' "
                f"(got kind={self.kind!r}, value={self.value!r})"
            )

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.domain, self.kind, self.slot)


@dataclass(frozen=True)
class UserGoal:
    entries: tuple[GoalEntry, ...] = ()

    def __post_init__(self):
        keys = [e.key for e in self.entries]
        if len(set(keys)) != len(keys):
            raise GoalError("duplicate (domain, kind, slot) in goal")

    def domains(self) -> list[str]:
        seen: list[str] = []
        for e in self.entries:
            if e.domain not in seen:
                seen.append(e.domain)
        return seen

    def pending(self) -> list[GoalEntry]:
        return [e for e in self.entries if e.status != "fulfilled"]


@dataclass
class ChangeRecord:
    """One audited goal transition (or an ignored system slot)."""

    event: str  # fulfilled | conflict | answered | replaced | book_confirmed | requested | ignored
    domain: str
    slot: str
    kind: str | None = None
    old_value: str | None = None
    new_value: str | None = None
    old_status: str | None = None
    new_status: str | None = None
    answer: str | None = None


ChangeLog = list[ChangeRecord]


def is_satisfied(goal: UserGoal) -> bool:
    """True iff every entry is fulfilled.  An empty goal is vacuously satisfied."""
    return all(e.status == "fulfilled" for e in goal.entries)


def _transition(entries: list[GoalEntry], i: int, log: ChangeLog, event: str, **changes) -> None:
    old = entries[i]
    new = replace(old, **changes)
    entries[i] = new
    log.append(
        ChangeRecord(
            event=event,
            domain=old.domain,
            slot=old.slot,
            kind=old.kind,
            old_value=old.value,
            new_value=new.value,
            old_status=old.status,
            new_status=new.status,
        )
    )


def update_on_system(
    goal: UserGoal, a_sys, ontology: Ontology, rng: Random
) -> tuple[UserGoal, ChangeLog]:
    """Apply one system action list to the goal.

    Informs and booking confirmations are applied first, in action order;
    failure-role actions are applied last so a combined "sorry, nothing
    matches" turn replaces values after any informs landed.  Unknown system
    slots never raise; they are logged as ignored.
    """
    entries = list(goal.entries)
    log: ChangeLog = []
    failures: list = []

    for action in a_sys:
        intent, domain, slot, value = action
        role = ontology.system_role(intent)
        if role == "failure":
            failures.append(action)
            continue
        if role == "book_confirm":
            for i, e in enumerate(entries):
                if e.domain == domain and e.kind == "book" and e.status != "fulfilled":
                    _transition(entries, i, log, "book_confirmed", status="fulfilled")
            continue
        if role != "inform":
            continue
        if value in ("?", "none") or slot == "none":
            continue
        if not ontology.has_slot(domain, slot):
            log.append(ChangeRecord(event="ignored", domain=domain, slot=slot, new_value=value))
            continue
        for i, e in enumerate(entries):
            if e.domain != domain or e.slot != slot:
                continue
            if e.kind == "reqt":
                # Also pre-fulfils an entry the user has not requested yet.
                if e.status != "fulfilled":
                    _transition(entries, i, log, "answered", status="fulfilled")
                    log[-1].answer = value
            elif e.value == value or e.value == "dontcare":
                if e.status != "fulfilled":
                    _transition(entries, i, log, "fulfilled", status="fulfilled")
            else:
                if e.status != "conflict":
                    _transition(entries, i, log, "conflict", status="conflict")

    for action in failures:
        _, domain, _, _ = action
        for i, e in enumerate(entries):
            if e.domain != domain or e.kind not in ("info", "book"):
                continue
            try:
                new_value = ontology.random_alternative(e.domain, e.slot, e.value, rng)
            except UnreplaceableValueError:
                new_value = e.value
            _transition(entries, i, log, "replaced", value=new_value, status="not_mentioned")

    return UserGoal(entries=tuple(entries)), log


def update_on_user(goal: UserGoal, a_usr) -> UserGoal:
    """Apply one user action list to the goal.

    Requests are recognised by value ``"?"``, informs by a concrete value;
    no ontology needed.  A user inform fulfils a matching info entry, marks
    a matching book entry as requested (awaiting the system's booking
    confirmation), and leaves everything else untouched.
    """
    entries = list(goal.entries)
    for intent, domain, slot, value in a_usr:
        for i, e in enumerate(entries):
            if e.domain != domain or e.slot != slot:
                continue
            if value == "?":
                if e.kind == "reqt" and e.status == "not_mentioned":
                    entries[i] = replace(e, status="requested")
            elif value == e.value:
                if e.kind == "book":
                    if e.status == "not_mentioned":
                        entries[i] = replace(e, status="requested")
                elif e.status != "fulfilled":
                    entries[i] = replace(e, status="fulfilled")
    return UserGoal(entries=tuple(entries))


@dataclass
class GoalSamplerConfig:
    """Ranges for random goal construction. Counts are inclusive (min, max)."""

    domains: tuple[int, int] = (1, 2)
    info: tuple[int, int] = (1, 3)
    reqt: tuple[int, int] = (1, 2)
    book: tuple[int, int] = (0, 1)
    dontcare_prob: float = 0.0


def _sample_value(ontology: Ontology, domain: str, slot: str, rng: Random, dontcare_prob: float) -> str:
    if dontcare_prob > 0 and rng.random() < dontcare_prob:
        return "dontcare"
    schema = ontology.slot(domain, slot)
    pool = schema.candidates if schema.open_valued else schema.values
    return rng.choice(list(pool))


def _domain_pools(ontology: Ontology, domain: str) -> dict[str, list[str]]:
    pools: dict[str, list[str]] = {"info": [], "reqt": [], "book": []}
    for sname, schema in ontology.domains[domain].slots.items():
        has_values = bool(schema.values) or bool(schema.candidates)
        if "info" in schema.kinds and has_values:
            pools["info"].append(sname)
        if "book" in schema.kinds and has_values:
            pools["book"].append(sname)
        if "reqt" in schema.kinds:
            pools["reqt"].append(sname)
    return pools


def sample_goal(ontology: Ontology, cfg: GoalSamplerConfig, rng: Random) -> UserGoal:
    """Draw a random goal that is legal under the ontology.

    Within each chosen domain, info and book entries come first (shuffled),
    then requests (shuffled); domains themselves appear in random order.
    Only domains able to satisfy the per-kind minimums are eligible; if
    fewer than ``cfg.domains[0]`` qualify the config is unsatisfiable.
    """
    eligible = []
    for d in ontology.domains:
        pools = _domain_pools(ontology, d)
        if (
            len(pools["info"]) >= cfg.info[0]
            and len(pools["reqt"]) >= cfg.reqt[0]
            and len(pools["book"]) >= cfg.book[0]
        ):
            eligible.append(d)
    if len(eligible) < cfg.domains[0]:
        raise GoalError(
            f"ontology {ontology.name!r} cannot satisfy sampler config: "
            f"{len(eligible)} eligible domain(s), need {cfg.domains[0]}"
        )
    n_domains = rng.randint(cfg.domains[0], min(cfg.domains[1], len(eligible)))
    chosen = rng.sample(eligible, n_domains)

    entries: list[GoalEntry] = []
    for d in chosen:
        pools = _domain_pools(ontology, d)
        used: set[str] = set()

        def take(kind: str, lo: int, hi: int) -> list[str]:
            avail = [s for s in pools[kind] if s not in used]
            n = rng.randint(lo, min(hi, len(avail)))
            picked = rng.sample(avail, n)
            used.update(picked)
            return picked

        info_slots = take("info", cfg.info[0], cfg.info[1])
        book_slots = take("book", cfg.book[0], cfg.book[1])
        reqt_slots = take("reqt", cfg.reqt[0], cfg.reqt[1])

        constraint = [
            GoalEntry(d, "info", s, _sample_value(ontology, d, s, rng, cfg.dontcare_prob))
            for s in info_slots
        ] + [
            GoalEntry(d, "book", s, _sample_value(ontology, d, s, rng, 0.0))
            for s in book_slots
        ]
        rng.shuffle(constraint)
        requests = [GoalEntry(d, "reqt", s, "?") for s in reqt_slots]
        rng.shuffle(requests)
        entries.extend(constraint + requests)

    return UserGoal(entries=tuple(entries))


# -- JSON form ---------------------------------------------------------


def goal_to_json(goal: UserGoal) -> str:
    """Canonical goal JSON; round-trips byte-identically."""
    doc = {
        "entries": [
            {"domain": e.domain, "kind": e.kind, "slot": e.slot, "value": e.value, "status": e.status}
            for e in goal.entries
        ]
    }
    return json.dumps(doc, ensure_ascii=False)


def goal_from_json(text: str) -> UserGoal:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise GoalError(f"goal JSON is malformed: {e.msg}") from e
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise GoalError("goal JSON must be an object with an 'entries' list")
    entries = []
    for raw in doc["entries"]:
        if not isinstance(raw, dict):
            raise GoalError("goal entries must be objects")
        try:
            entries.append(
                GoalEntry(
                    domain=raw["domain"],
                    kind=raw["kind"],
                    slot=raw["slot"],
                    value=raw["value"],
                    status=raw.get("status", "not_mentioned"),
                )
            )
        except KeyError as e:
            raise GoalError(f"goal entry missing field {e}") from None
    return UserGoal(entries=tuple(entries))


def validate_goal(goal: UserGoal, ontology: Ontology) -> list[str]:
    """Legality report of a goal against an ontology; empty list means legal."""
    problems = []
    for e in goal.entries:
        if not ontology.has_slot(e.domain, e.slot):
            problems.append(f"unknown slot {e.domain}.{e.slot}")
            continue
        schema = ontology.slot(e.domain, e.slot)
        if e.kind not in schema.kinds:
            problems.append(f"{e.domain}.{e.slot} does not allow kind {e.kind}")
        if e.kind != "reqt" and e.value != "dontcare" and not schema.open_valued:
            if e.value not in schema.values:
                problems.append(f"{e.domain}.{e.slot}: value {e.value!r} not in vocabulary")
    return problems
