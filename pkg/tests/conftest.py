from fractions import Fraction

import pytest

from weightedgen import normalize
from weightedgen.cli import motzkin_grammar

MOTZKIN_TEXT = """\
# Motzkin words: dots and balanced parentheses
axiom S
terminal (
terminal )
terminal .
S -> ( S ) S | . S | _
"""


@pytest.fixture(scope="session")
def motzkin():
    return motzkin_grammar()


@pytest.fixture(scope="session")
def motzkin_norm(motzkin):
    return normalize(motzkin)


@pytest.fixture(scope="session")
def motzkin_h2(motzkin):
    return motzkin.with_weights({".": Fraction(2)})


@pytest.fixture(scope="session")
def motzkin_h2_norm(motzkin_h2):
    return normalize(motzkin_h2)
