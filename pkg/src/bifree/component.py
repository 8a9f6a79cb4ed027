"""Matrix realizations of a single reflection-positivity quadruple plus its state.

A component acts on C^d (x) C^d. A positive-face generator ``g`` acts as
``g (x) I`` and its reflection as ``I (x) conj(g)``; the two legs commute and
the reflection is anti-linear, multiplicative and involutive. The state is
the vector functional of a unit vector ``xi``.
"""

from __future__ import annotations

import itertools
from typing import Optional, Protocol, Sequence

import numpy as np

from .gram import DEFAULT_BASIS_CAP, DEFAULT_PSD_TOL, BasisCapExceeded, GramReport, certify
from .ncpoly import GeneratorRef, Letter, Word

LocalWord = tuple[int, ...]

UNIT_TOL = 1e-9


class MomentOracle(Protocol):
    """Monomial pairing ``tau_i(theta(a) b)`` of one component."""

    n_generators: int

    def moment(self, neg_word: Sequence[int], pos_word: Sequence[int]) -> complex: ...


class MatrixModel:
    """Finite-dimensional component: generators on the left leg and a unit state vector.

    ``state`` has length ``dim**2`` and is read in row-major order, i.e.
    ``xi = sum_{k,l} X[k, l] e_k (x) e_l`` with ``X = state.reshape(dim, dim)``.
    """

    def __init__(self, generators: Sequence[np.ndarray], state: np.ndarray):
        gens = [np.array(g, dtype=complex) for g in generators]
        state = np.array(state, dtype=complex).ravel()
        d = int(round(np.sqrt(state.size)))
        if d < 1 or d * d != state.size:
            raise ValueError(f"state length {state.size} is not a square")
        for k, g in enumerate(gens):
            if g.shape != (d, d):
                raise ValueError(f"generator {k} has shape {g.shape}, expected {(d, d)}")
            if not np.all(np.isfinite(g)):
                raise ValueError(f"generator {k} has non-finite entries")
        if not np.all(np.isfinite(state)):
            raise ValueError("state has non-finite entries")
        norm = float(np.linalg.norm(state))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"state must be a unit vector, got norm {norm:.12g}")
        self.dim = d
        self.generators = tuple(gens)
        self.state = state
        self._X = state.reshape(d, d)
        self._products: dict[LocalWord, np.ndarray] = {(): np.eye(d, dtype=complex)}
        for g in self.generators:
            g.setflags(write=False)
        self.state.setflags(write=False)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def word_matrix(self, word: Sequence[int]) -> np.ndarray:
        word = tuple(word)
        m = self._products.get(word)
        if m is None:
            for j in word:
                if not 0 <= j < self.n_generators:
                    raise IndexError(f"generator index {j} out of range (have {self.n_generators})")
            m = self.word_matrix(word[:-1]) @ self.generators[word[-1]]
            self._products[word] = m
        return m

    def moment(self, neg_word: Sequence[int], pos_word: Sequence[int]) -> complex:
        """``<xi, (I (x) conj(a)) (b (x) I) xi>`` with ``a``, ``b`` the word products."""
        a = self.word_matrix(neg_word)
        b = self.word_matrix(pos_word)
        X = self._X
        # (b (x) conj(a)) vec(X) = vec(b X a^*), and <vec(X), vec(Y)> = tr(X^* Y)
        return complex(np.vdot(X, b @ X @ a.conj().T))

    # explicit operators on C^d (x) C^d, used for cross-checks and the Fock oracle
    def positive_operator(self, local_id: int) -> np.ndarray:
        return np.kron(self.generators[local_id], np.eye(self.dim))

    def reflected_operator(self, local_id: int) -> np.ndarray:
        return np.kron(np.eye(self.dim), self.generators[local_id].conj())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixModel):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.n_generators == other.n_generators
            and all(np.array_equal(a, b) for a, b in zip(self.generators, other.generators))
            and np.array_equal(self.state, other.state)
        )

    def __repr__(self) -> str:
        return f"MatrixModel(dim={self.dim}, n_generators={self.n_generators})"


def eval_local_moment(m: MomentOracle, neg_word: Sequence[int], pos_word: Sequence[int]) -> complex:
    return m.moment(tuple(neg_word), tuple(pos_word))


def schmidt_state(weights: Sequence[float]) -> np.ndarray:
    """``sum_k sqrt(p_k) e_k (x) e_k`` with ``p`` the normalized weights."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-d sequence")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    p = w / total
    d = w.size
    xi = np.zeros(d * d, dtype=complex)
    xi[np.arange(d) * (d + 1)] = np.sqrt(p)
    return xi


def local_words(n_generators: int, max_len: int) -> list[LocalWord]:
    words: list[LocalWord] = []
    for n in range(max_len + 1):
        words.extend(itertools.product(range(n_generators), repeat=n))
    return words


def check_component_rp(
    m: MomentOracle,
    max_len: int,
    tol: float = DEFAULT_PSD_TOL,
    *,
    algebra_id: int = 0,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> GramReport:
    """Gram matrix ``tau(theta(w_k) w_l)`` over positive local words of length <= max_len."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    n = m.n_generators
    size = sum(n**k for k in range(max_len + 1))
    if size > basis_cap:
        raise BasisCapExceeded(f"basis of {size} words exceeds cap {basis_cap}")
    words = local_words(n, max_len)
    G = np.array([[m.moment(u, v) for v in words] for u in words], dtype=complex)
    basis: list[Word] = [tuple(Letter(GeneratorRef(algebra_id, j)) for j in w) for w in words]
    return certify(G, basis, tol)


def random_matrix(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2 * d)


def random_model(
    rng: np.random.Generator,
    dim: int,
    n_generators: int,
    *,
    state: str = "schmidt",
    weights: Optional[Sequence[float]] = None,
) -> MatrixModel:
    """Random generators with a Schmidt (reflection-positive) or a generic unit state."""
    gens = [random_matrix(rng, dim) for _ in range(n_generators)]
    if state == "schmidt":
        if weights is None:
            weights = rng.uniform(0.05, 1.0, size=dim)
        xi = schmidt_state(weights)
    elif state == "generic":
        xi = rng.standard_normal(dim * dim) + 1j * rng.standard_normal(dim * dim)
        xi = xi / np.linalg.norm(xi)
    else:
        raise ValueError(f"unknown state kind {state!r}")
    return MatrixModel(gens, xi)
