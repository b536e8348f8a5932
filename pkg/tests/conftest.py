import glob
import os
import random

import pytest

from gastrs.automata import read_automaton
from gastrs.systemfile import read_system

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, "corpus")


def corpus_path(*parts):
    return os.path.join(CORPUS, *parts)


def corpus_automata():
    return sorted(glob.glob(corpus_path("automata", "*.aut")))


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def s1():
    return read_system(corpus_path("systems", "s1.g")), read_automaton(corpus_path("automata", "s1_target.aut"))


@pytest.fixture
def s2():
    return read_system(corpus_path("systems", "s2.g")), read_automaton(corpus_path("automata", "s2_target.aut"))
