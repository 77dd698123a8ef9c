import os

import pytest

from usersim.ontology import load_ontology_file

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "usersim", "data")


def data_path(name: str) -> str:
    return os.path.abspath(os.path.join(DATA_DIR, name))


@pytest.fixture(scope="session")
def multiwoz():
    return load_ontology_file(data_path("multiwoz.json"))


@pytest.fixture(scope="session")
def sgd():
    return load_ontology_file(data_path("sgd.json"))
