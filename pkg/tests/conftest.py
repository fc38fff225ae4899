from pathlib import Path
from typing import Generator

import pytest
from fastapi.testclient import TestClient

from app.constants import CORPUS_DIR
from app.main import app
from app.parser import Problem, parse_problem

EXTENSIONALITY = """
sort i
const P : i > o
const Q : i > o
goal (all x:i. (P(x) <-> Q(x))) -> (eps x:i. P(x)) = (eps x:i. Q(x))
"""

DONKEY = """
sort i
const Male : i > o
const Female : i > o
const Loves : i > i > o
var x1^g : i
var y1^g : i
goal (ex y:i. (Male(y) /\\ (ex x:i. (Female(x) /\\ Loves(y, x))))) -> Female(x1^g) /\\ Loves(x1^g, y1^g) /\\ Male(y1^g)
"""  # noqa: E501

TWO = """
universe i = {a, b}
"""


@pytest.fixture
def corpus_dir() -> Path:
    """The bundled corpus directory."""
    return CORPUS_DIR


@pytest.fixture
def extensionality_text() -> str:
    """A goal with explicit epsilon-terms over two predicates."""
    return EXTENSIONALITY


@pytest.fixture
def donkey_text() -> str:
    """A goal with nested quantifiers and two gamma-variables."""
    return DONKEY


@pytest.fixture
def two_text() -> str:
    """A structure with two individuals and nothing else fixed."""
    return TWO


@pytest.fixture
def donkey() -> Problem:
    return parse_problem(DONKEY, 'donkey')


@pytest.fixture
def client() -> Generator[TestClient, None, None]:
    with TestClient(app) as test_client:
        yield test_client
