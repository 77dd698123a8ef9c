"""Ontology loading, validation, and queries.

The ontology is a plain JSON document describing every intent, domain, slot
and value a dialogue may range over.  It is data, never code: swapping the
document swaps the whole universe of legal actions without touching the
package.  Decoding semantics attach to *role tags* carried by each intent,
so datasets with entirely different intent names load without code changes.

An :class:`Ontology` is immutable after load and safe to share across
threads.  All randomness is taken from caller-supplied ``random.Random``
instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from random import Random

USER_ROLES = ("general", "bye", "inform", "request", "other")
SYSTEM_ROLES = ("general", "inform", "request", "select", "failure", "book_confirm", "other")
KINDS = ("info", "reqt", "book")

# Tokens with fixed meaning in goals/actions; a slot vocabulary may not use them.
RESERVED_VALUES = ("?", "none", "dontcare")


class OntologyError(ValueError):
    """Unparseable or invariant-violating ontology document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnreplaceableValueError(LookupError):
    """No alternative value exists for a slot; the caller keeps the old one."""


@dataclass(frozen=True)
class SlotSchema:
    """One slot: its closed vocabulary, or an open-valued candidate pool."""

    values: tuple[str, ...]
    open_valued: bool = False
    kinds: tuple[str, ...] = ("info",)
    candidates: tuple[str, ...] = ()


@dataclass(frozen=True)
class DomainSchema:
    slots: dict[str, SlotSchema]


@dataclass(frozen=True)
class Ontology:
    """Validated, immutable view of one ontology document.

    Intent maps preserve document order and map intent name -> role tag.
    """

    name: str
    user_general_intents: dict[str, str]
    user_domain_intents: dict[str, str]
    system_intents: dict[str, str]
    domains: dict[str, DomainSchema]

    # -- intent queries -------------------------------------------------

    @property
    def user_intents(self) -> dict[str, str]:
        merged = dict(self.user_general_intents)
        merged.update(self.user_domain_intents)
        return merged

    def user_intents_with_role(self, role: str) -> list[str]:
        return [n for n, r in self.user_intents.items() if r == role]

    def system_intents_with_role(self, role: str) -> list[str]:
        return [n for n, r in self.system_intents.items() if r == role]

    def system_role(self, intent: str) -> str:
        try:
            return self.system_intents[intent]
        except KeyError:
            raise OntologyError(f"unknown system intent {intent!r}") from None

    def user_role(self, intent: str) -> str:
        merged = self.user_intents
        try:
            return merged[intent]
        except KeyError:
            raise OntologyError(f"unknown user intent {intent!r}") from None

    # -- slot queries ---------------------------------------------------

    def slot(self, domain: str, slot: str) -> SlotSchema:
        try:
            dom = self.domains[domain]
        except KeyError:
            raise OntologyError(f"unknown domain {domain!r}") from None
        try:
            return dom.slots[slot]
        except KeyError:
            raise OntologyError(f"unknown slot {slot!r} in domain {domain!r}") from None

    def has_slot(self, domain: str, slot: str) -> bool:
        dom = self.domains.get(domain)
        return dom is not None and slot in dom.slots

    def legal_values(self, domain: str, slot: str) -> list[str]:
        """Closed vocabulary of a slot; empty exactly when the slot is open-valued."""
        return list(self.slot(domain, slot).values)

    def random_alternative(self, domain: str, slot: str, exclude: str, rng: Random) -> str:
        """Uniform draw from the slot's legal values (or candidate pool) minus ``exclude``.

        Raises :class:`UnreplaceableValueError` when no alternative exists;
        the caller is expected to keep the old value in that case.
        """
        schema = self.slot(domain, slot)
        pool = schema.candidates if schema.open_valued else schema.values
        alternatives = [v for v in pool if v != exclude]
        if not alternatives:
            raise UnreplaceableValueError(
                f"no alternative to {exclude!r} for {domain}.{slot}"
            )
        return rng.choice(alternatives)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise OntologyError(message)


def _parse_intent_list(raw: object, side: str, roles: tuple[str, ...], label: str) -> dict[str, str]:
    _require(isinstance(raw, list), f"{label} must be a list of {{name, role}} objects")
    intents: dict[str, str] = {}
    for item in raw:
        _require(isinstance(item, dict), f"{label} entries must be objects")
        name = item.get("name")
        role = item.get("role", "other")
        _require(isinstance(name, str) and name != "", f"{label}: intent name must be a non-empty string")
        _require(role in roles, f"{label}: intent {name!r} has unknown {side} role {role!r}")
        _require(name not in intents, f"{label}: duplicate intent {name!r}")
        intents[name] = role
    return intents


def _parse_slot(domain: str, name: str, raw: object) -> SlotSchema:
    _require(isinstance(raw, dict), f"slot {domain}.{name} must be an object")
    values = raw.get("values", [])
    open_valued = raw.get("open_valued", False)
    kinds = raw.get("kinds", ["info"])
    candidates = raw.get("candidates", [])
    _require(
        isinstance(values, list) and all(isinstance(v, str) for v in values),
        f"slot {domain}.{name}: values must be a list of strings",
    )
    _require(isinstance(open_valued, bool), f"slot {domain}.{name}: open_valued must be a boolean")
    _require(
        isinstance(kinds, list) and kinds and all(k in KINDS for k in kinds),
        f"slot {domain}.{name}: kinds must be a non-empty subset of {KINDS}",
    )
    _require(
        isinstance(candidates, list) and all(isinstance(v, str) for v in candidates),
        f"slot {domain}.{name}: candidates must be a list of strings",
    )
    _require(
        open_valued == (len(values) == 0),
        f"slot {domain}.{name}: values must be empty exactly when open_valued",
    )
    for v in list(values) + list(candidates):
        _require(v not in RESERVED_VALUES, f"slot {domain}.{name}: value {v!r} is reserved")
    _require(len(set(values)) == len(values), f"slot {domain}.{name}: duplicate values")
    return SlotSchema(
        values=tuple(values),
        open_valued=open_valued,
        kinds=tuple(kinds),
        candidates=tuple(candidates),
    )


def load_ontology(text: str) -> Ontology:
    """Parse and validate an ontology document (UTF-8 JSON text).

    Raises :class:`OntologyError` with line/column on parse errors, or with
    the violated invariant on validation errors.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise OntologyError(f"not valid JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    _require(isinstance(raw, dict), "ontology document must be a JSON object")
    name = raw.get("name")
    _require(isinstance(name, str) and name != "", "ontology name must be a non-empty string")

    general = _parse_intent_list(
        raw.get("user_general_intents", []), "user", USER_ROLES, "user_general_intents"
    )
    domain_specific = _parse_intent_list(
        raw.get("user_domain_intents", []), "user", USER_ROLES, "user_domain_intents"
    )
    system = _parse_intent_list(raw.get("system_intents", []), "system", SYSTEM_ROLES, "system_intents")

    _require(len(general) > 0, "user_general_intents must be non-empty")
    _require(len(domain_specific) > 0, "user_domain_intents must be non-empty")
    _require(len(system) > 0, "system_intents must be non-empty")
    overlap = set(general) & set(domain_specific)
    _require(not overlap, f"user general and domain intents overlap: {sorted(overlap)}")

    raw_domains = raw.get("domains")
    _require(isinstance(raw_domains, dict) and raw_domains, "domains map must be non-empty")
    domains: dict[str, DomainSchema] = {}
    for dname, draw in raw_domains.items():
        _require(isinstance(draw, dict), f"domain {dname!r} must be an object")
        raw_slots = draw.get("slots")
        _require(
            isinstance(raw_slots, dict) and raw_slots,
            f"domain {dname!r} must declare at least one slot",
        )
        slots = {sname: _parse_slot(dname, sname, sraw) for sname, sraw in raw_slots.items()}
        domains[dname] = DomainSchema(slots=slots)

    return Ontology(
        name=name,
        user_general_intents=general,
        user_domain_intents=domain_specific,
        system_intents=system,
        domains=domains,
    )


def load_ontology_file(path: str) -> Ontology:
    with open(path, encoding="utf-8") as f:
        return load_ontology(f.read())


def serialize_ontology(o: Ontology) -> str:
    """Canonical document form; ``load -> serialize -> load`` is a fixpoint."""
    doc = {
        "name": o.name,
        "user_general_intents": [{"name": n, "role": r} for n, r in o.user_general_intents.items()],
        "user_domain_intents": [{"name": n, "role": r} for n, r in o.user_domain_intents.items()],
        "system_intents": [{"name": n, "role": r} for n, r in o.system_intents.items()],
        "domains": {
            d: {
                "slots": {
                    s: {
                        "values": list(sc.values),
                        "open_valued": sc.open_valued,
                        "kinds": list(sc.kinds),
                        "candidates": list(sc.candidates),
                    }
                    for s, sc in dom.slots.items()
                }
            }
            for d, dom in o.domains.items()
        },
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
