import numpy as np
import pytest

from entrokit.models import Alphabet, HMMModel, MarkovModel, SymbolSequence

A2 = Alphabet(("0", "1"))
A3 = Alphabet(("a", "b", "c"))


def binseq(bits: str) -> SymbolSequence:
    return SymbolSequence(A2, np.array([int(b) for b in bits], dtype=np.int64))


def make_bern25() -> MarkovModel:
    """iid with P(1) = 1/4."""
    return MarkovModel.iid([0.75, 0.25], A2)


def make_uniform2() -> MarkovModel:
    return MarkovModel.iid([0.5, 0.5], A2)


def make_sym_chain() -> MarkovModel:
    """Symmetric binary chain with flip probability 0.1."""
    return MarkovModel(A2, 1, np.array([[0.9, 0.1], [0.1, 0.9]]))


def make_asym_chain() -> MarkovModel:
    return MarkovModel(A2, 1, np.array([[0.9, 0.1], [0.5, 0.5]]))


def make_ternary_chain() -> MarkovModel:
    rng = np.random.default_rng(424242)
    rows = rng.dirichlet(np.ones(3) * 4.0, size=3) * 0.9 + 0.1 / 3.0
    rows /= rows.sum(axis=1, keepdims=True)
    return MarkovModel(A3, 1, rows)


def make_order2_chain() -> MarkovModel:
    rng = np.random.default_rng(99)
    rows = rng.dirichlet(np.ones(2) * 2.0, size=4) * 0.8 + 0.1
    rows /= rows.sum(axis=1, keepdims=True)
    return MarkovModel(A2, 2, rows)


def make_small_hmm() -> HMMModel:
    q = np.array([[0.8, 0.2], [0.3, 0.7]])
    g = np.array([[0.9, 0.1], [0.25, 0.75]])
    return HMMModel(q, g, A2)


@pytest.fixture(scope="session")
def bern25() -> MarkovModel:
    return make_bern25()


@pytest.fixture(scope="session")
def uniform2() -> MarkovModel:
    return make_uniform2()


@pytest.fixture(scope="session")
def sym_chain() -> MarkovModel:
    return make_sym_chain()


@pytest.fixture(scope="session")
def asym_chain() -> MarkovModel:
    return make_asym_chain()


@pytest.fixture(scope="session")
def ternary_chain() -> MarkovModel:
    return make_ternary_chain()


@pytest.fixture(scope="session")
def order2_chain() -> MarkovModel:
    return make_order2_chain()


@pytest.fixture(scope="session")
def small_hmm() -> HMMModel:
    return make_small_hmm()
