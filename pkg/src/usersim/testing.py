"""Randomised fixtures: ontologies, goals and system actions for property tests.

Nothing here is used by the runtime pipeline; the generators exist so that
soundness/completeness oracles can range over many ontologies rather than
the two shipped example files.
"""

from __future__ import annotations

from random import Random

from .goals import GoalSamplerConfig, UserGoal, sample_goal
from .ontology import Ontology, load_ontology, serialize_ontology
from .semact import SemanticAction


def random_ontology(rng: Random, max_domains: int = 4, max_slots: int = 5) -> Ontology:
    """A small random ontology with at least one intent of every role the
    decoding semantics care about."""
    n_general = rng.randint(1, 2)
    general = [{"name": f"chat{i}", "role": "general"} for i in range(n_general)]
    general.append({"name": "finish", "role": "bye"})
    domain_intents = [{"name": f"give{i}", "role": "inform"} for i in range(rng.randint(1, 2))]
    domain_intents += [{"name": f"ask{i}", "role": "request"} for i in range(rng.randint(1, 2))]
    if rng.random() < 0.5:
        domain_intents.append({"name": "mumble", "role": "other"})

    system = [
        {"name": "hello", "role": "general"},
        {"name": "state", "role": "inform"},
        {"name": "query", "role": "request"},
        {"name": "propose", "role": "select"},
        {"name": "refuse", "role": "failure"},
        {"name": "confirmed", "role": "book_confirm"},
    ]

    domains = {}
    for d in range(rng.randint(1, max_domains)):
        slots = {}
        n_slots = rng.randint(2, max_slots)
        for s in range(n_slots):
            open_valued = rng.random() < 0.25
            if open_valued:
                values: list[str] = []
                candidates = [f"c{d}{s}{k}" for k in range(rng.randint(0, 3))]
            else:
                values = [f"v{d}{s}{k}" for k in range(rng.randint(1, 5))]
                candidates = []
            kinds = [k for k in ("info", "reqt", "book") if rng.random() < 0.55]
            if not kinds:
                kinds = ["info"]
            slots[f"slot{d}{s}"] = {
                "values": values,
                "open_valued": open_valued,
                "kinds": kinds,
                "candidates": candidates,
            }
        # every domain can host at least one constraint and one request
        slots["slot_base"] = {
            "values": [f"b{d}0", f"b{d}1"],
            "open_valued": False,
            "kinds": ["info", "reqt"],
            "candidates": [],
        }
        domains[f"domain{d}"] = {"slots": slots}

    import json

    doc = {
        "name": f"random{rng.randint(0, 10**6)}",
        "user_general_intents": general,
        "user_domain_intents": domain_intents,
        "system_intents": system,
        "domains": domains,
    }
    return load_ontology(json.dumps(doc))


def random_goal(ontology: Ontology, rng: Random, max_entries: int = 12) -> UserGoal:
    cfg = GoalSamplerConfig(
        domains=(1, min(2, len(ontology.domains))),
        info=(1, 3),
        reqt=(0, 2),
        book=(0, 1),
        dontcare_prob=0.05,
    )
    goal = sample_goal(ontology, cfg, rng)
    if len(goal.entries) > max_entries:
        goal = UserGoal(entries=goal.entries[:max_entries])
    return goal


def random_system_action(ontology: Ontology, goal: UserGoal, rng: Random) -> list[SemanticAction]:
    """A plausible system action list: requests, informs, offers, failures."""
    actions: list[SemanticAction] = []
    domains = goal.domains() or list(ontology.domains)
    for _ in range(rng.randint(0, 3)):
        d = rng.choice(domains)
        slots = list(ontology.domains[d].slots)
        s = rng.choice(slots)
        kind = rng.random()
        if kind < 0.4:
            actions.append(SemanticAction(rng.choice(ontology.system_intents_with_role("request")), d, s, "?"))
        elif kind < 0.7:
            schema = ontology.slot(d, s)
            pool = list(schema.values or schema.candidates) or ["something"]
            actions.append(SemanticAction(rng.choice(ontology.system_intents_with_role("inform")), d, s, rng.choice(pool)))
        elif kind < 0.85:
            schema = ontology.slot(d, s)
            pool = list(schema.values or schema.candidates) or ["something"]
            actions.append(SemanticAction(rng.choice(ontology.system_intents_with_role("select")), d, s, rng.choice(pool)))
        else:
            actions.append(SemanticAction(rng.choice(ontology.system_intents_with_role("failure")), d, "none", "none"))
    return actions


def perturb_action(action: SemanticAction, rng: Random) -> SemanticAction:
    """Damage one field so the action is (very likely) illegal."""
    field = rng.randrange(4)
    fields = list(action)
    fields[field] = fields[field] + "-bogus"
    return SemanticAction(*fields)
