import json
import math
from collections import Counter
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usersim.ontology import (
    OntologyError,
    UnreplaceableValueError,
    load_ontology,
    serialize_ontology,
)
from usersim.testing import random_ontology


def test_multiwoz_counts(multiwoz):
    assert len(multiwoz.user_general_intents) == 3
    assert len(multiwoz.user_domain_intents) == 2
    assert len(multiwoz.user_intents) == 5
    assert len(multiwoz.domains) == 7


def test_sgd_counts(sgd):
    assert len(sgd.user_intents) == 11
    assert len(sgd.domains) == 20


def test_empty_domains_rejected():
    doc = {
        "name": "broken",
        "user_general_intents": [{"name": "bye", "role": "bye"}],
        "user_domain_intents": [{"name": "inform", "role": "inform"}],
        "system_intents": [{"name": "inform", "role": "inform"}],
        "domains": {},
    }
    with pytest.raises(OntologyError, match="domains"):
        load_ontology(json.dumps(doc))


def test_parse_error_carries_position():
    with pytest.raises(OntologyError) as exc:
        load_ontology('{"name": "x",\n  broken}')
    assert exc.value.line == 2
    assert exc.value.column is not None


def test_overlapping_user_intents_rejected():
    doc = {
        "name": "broken",
        "user_general_intents": [{"name": "inform", "role": "general"}],
        "user_domain_intents": [{"name": "inform", "role": "inform"}],
        "system_intents": [{"name": "inform", "role": "inform"}],
        "domains": {"d": {"slots": {"s": {"values": ["a"], "open_valued": False, "kinds": ["info"]}}}},
    }
    with pytest.raises(OntologyError, match="overlap"):
        load_ontology(json.dumps(doc))


def test_reserved_values_rejected():
    doc = {
        "name": "broken",
        "user_general_intents": [{"name": "bye", "role": "bye"}],
        "user_domain_intents": [{"name": "inform", "role": "inform"}],
        "system_intents": [{"name": "inform", "role": "inform"}],
        "domains": {"d": {"slots": {"s": {"values": ["dontcare"], "open_valued": False, "kinds": ["info"]}}}},
    }
    with pytest.raises(OntologyError, match="reserved"):
        load_ontology(json.dumps(doc))


def test_legal_values_fixture(multiwoz):
    assert multiwoz.legal_values("hotel", "area") == ["north", "south", "east", "west", "centre"]


def test_legal_values_unknown_slot(multiwoz):
    with pytest.raises(OntologyError, match="unknown slot"):
        multiwoz.legal_values("hotel", "altitude")
    with pytest.raises(OntologyError, match="unknown domain"):
        multiwoz.legal_values("casino", "area")


def test_open_valued_slot_has_empty_vocabulary(multiwoz):
    assert multiwoz.legal_values("taxi", "leaveat") == []
    assert multiwoz.slot("taxi", "leaveat").open_valued


def test_random_alternative_excludes(multiwoz):
    rng = Random(7)
    for _ in range(200):
        v = multiwoz.random_alternative("hotel", "area", "north", rng)
        assert v in {"south", "east", "west", "centre"}


def test_random_alternative_unreplaceable():
    doc = {
        "name": "tiny",
        "user_general_intents": [{"name": "bye", "role": "bye"}],
        "user_domain_intents": [{"name": "inform", "role": "inform"}],
        "system_intents": [{"name": "inform", "role": "inform"}],
        "domains": {"d": {"slots": {"s": {"values": ["only"], "open_valued": False, "kinds": ["info"]}}}},
    }
    o = load_ontology(json.dumps(doc))
    with pytest.raises(UnreplaceableValueError):
        o.random_alternative("d", "s", "only", Random(0))


def test_random_alternative_open_valued_uses_candidates(multiwoz):
    rng = Random(3)
    v = multiwoz.random_alternative("taxi", "leaveat", "8:00", rng)
    assert v in {"09:15", "11:30", "13:45"}


def test_random_alternative_uniform(multiwoz):
    # 10 000 draws over the 4 alternatives to "north": each within 3 sigma
    # of 2500, sigma = sqrt(n * p * (1-p)).
    rng = Random(123)
    counts = Counter(
        multiwoz.random_alternative("hotel", "area", "north", rng) for _ in range(10_000)
    )
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    for alt in ("south", "east", "west", "centre"):
        assert abs(counts[alt] - 2500) <= 3 * sigma


def test_roundtrip_fixpoint(multiwoz, sgd):
    for o in (multiwoz, sgd):
        text = serialize_ontology(o)
        o2 = load_ontology(text)
        assert o2 == o
        assert serialize_ontology(o2) == text


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_random_alternative_never_returns_excluded(seed):
    rng = Random(seed)
    o = random_ontology(rng)
    for d, dom in o.domains.items():
        for s, schema in dom.slots.items():
            pool = schema.candidates if schema.open_valued else schema.values
            if not pool:
                continue
            exclude = rng.choice(list(pool))
            try:
                got = o.random_alternative(d, s, exclude, rng)
            except UnreplaceableValueError:
                assert len([v for v in pool if v != exclude]) == 0
                continue
            assert got != exclude


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_random_ontology_roundtrip(seed):
    o = random_ontology(Random(seed))
    assert load_ontology(serialize_ontology(o)) == o
