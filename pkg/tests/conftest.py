import numpy as np
import pytest
from hypothesis import strategies as st

from bifree.component import MatrixModel, random_model, schmidt_state
from bifree.ncpoly import GeneratorRef, Letter, NCPoly
from bifree.product import BiFreeSystem

ALPHABET = [Letter(GeneratorRef(i, j), r) for i in range(2) for j in range(2) for r in (False, True)]


def random_poly(rng, n_terms=4, max_len=3, alphabet=ALPHABET):
    terms = {}
    for _ in range(n_terms):
        n = int(rng.integers(0, max_len + 1))
        w = tuple(alphabet[k] for k in rng.integers(0, len(alphabet), size=n))
        terms[w] = complex(rng.standard_normal(), rng.standard_normal())
    return NCPoly(terms)


coefficients = st.complex_numbers(min_magnitude=0.01, max_magnitude=3, allow_nan=False, allow_infinity=False)
letters = st.sampled_from(ALPHABET)
words = st.lists(letters, max_size=3).map(tuple)
polys = st.dictionaries(words, coefficients, max_size=5).map(NCPoly)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_schmidt(rng):
    return [random_model(rng, 2, 2), random_model(rng, 2, 2)]


@pytest.fixture
def two_generic(rng):
    return [random_model(rng, 2, 2, state="generic"), random_model(rng, 2, 2, state="generic")]


@pytest.fixture
def system(two_schmidt):
    return BiFreeSystem(two_schmidt)


def negative_component():
    """d=2, one nilpotent generator, state (e1e1 - e2e2)/sqrt2: tau(theta(g) g) = -1/2."""
    r = 1 / np.sqrt(2)
    return MatrixModel([np.array([[0, 1], [0, 0]])], np.array([r, 0, 0, -r]))


def randomized_systems(seed, count):
    """Reflection-positive products: Schmidt-state components, d <= 3, two or three of them."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, 4))
        models = [random_model(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3))) for _ in range(n)]
        out.append(BiFreeSystem(models))
    return out
