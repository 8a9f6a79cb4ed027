"""The bipartite bi-free product functional.

Every element of the positive face is a linear combination of alternating
products ``b_n ... b_1`` of centered local elements. For two such products the
functional is

    tau(theta(a_m) ... theta(a_1) b_n ... b_1)
        = [m == n] * prod_k [i(k) == j(k)] * tau_{i(k)}(theta(a_k) b_k),

and a general element of the product algebra is a combination of words
``theta(a) b`` with ``a``, ``b`` positive, so this pins down ``tau`` everywhere.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .component import LocalWord, MomentOracle
from .ncpoly import (
    DEFAULT_TERM_CAP,
    DROP_TOL,
    GeneratorRef,
    Letter,
    NCPoly,
    TermCapExceeded,
    Word,
    split_faces,
    unreflect,
)

CENTER_TOL = 1e-11


@dataclass(frozen=True)
class LocalElement:
    """An element of one component's positive face: local words with coefficients."""

    algebra_id: int
    coeffs: Mapping[LocalWord, complex]

    @classmethod
    def word(cls, algebra_id: int, word: Sequence[int], coeff: complex = 1) -> "LocalElement":
        return cls(algebra_id, {tuple(word): complex(coeff)})

    def __mul__(self, other: "LocalElement") -> "LocalElement":
        if other.algebra_id != self.algebra_id:
            raise ValueError("local product across different components")
        acc: dict[LocalWord, complex] = {}
        for u, c in self.coeffs.items():
            for v, e in other.coeffs.items():
                acc[u + v] = acc.get(u + v, 0j) + c * e
        return LocalElement(self.algebra_id, {w: c for w, c in acc.items() if abs(c) >= DROP_TOL})

    def shifted(self, c: complex) -> "LocalElement":
        """``self + c * 1``."""
        acc = dict(self.coeffs)
        acc[()] = acc.get((), 0j) + c
        return LocalElement(self.algebra_id, {w: z for w, z in acc.items() if abs(z) >= DROP_TOL})

    def to_poly(self) -> NCPoly:
        return NCPoly({tuple(Letter(GeneratorRef(self.algebra_id, j)) for j in w): c for w, c in self.coeffs.items()})

    def __hash__(self) -> int:
        return hash((self.algebra_id, frozenset(self.coeffs.items())))


@dataclass(frozen=True)
class CenteredTerm:
    """``coefficient * factors[0] ... factors[-1]`` with alternating, centered factors."""

    coefficient: complex
    factors: tuple[LocalElement, ...] = ()

    @property
    def pattern(self) -> tuple[int, ...]:
        return tuple(f.algebra_id for f in self.factors)

    def to_poly(self) -> NCPoly:
        p = NCPoly.constant(self.coefficient)
        for f in self.factors:
            p = p * f.to_poly()
        return p


def reassemble(terms: Iterable[CenteredTerm]) -> NCPoly:
    total = NCPoly.zero()
    for t in terms:
        total = total + t.to_poly()
    return total


def _runs(word: Word) -> list[LocalElement]:
    """Group maximal same-component runs of a positive word into local monomials."""
    out: list[tuple[int, list[int]]] = []
    for letter in word:
        if letter.reflected:
            raise ValueError("expected a positive-face word")
        if out and out[-1][0] == letter.algebra_id:
            out[-1][1].append(letter.local_id)
        else:
            out.append((letter.algebra_id, [letter.local_id]))
    return [LocalElement.word(i, w) for i, w in out]


@dataclass
class BiFreeSystem:
    """Bi-free product of the registered components, indexed ``0 .. len(components) - 1``."""

    components: Sequence[MomentOracle]
    term_cap: int = DEFAULT_TERM_CAP
    center_tol: float = CENTER_TOL
    _pairing_cache: dict = field(default_factory=dict, init=False, repr=False)
    _decomp_cache: dict = field(default_factory=dict, init=False, repr=False)
    _value_cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self) -> None:
        self.components = tuple(self.components)
        if not self.components:
            raise ValueError("need at least one component")

    def __len__(self) -> int:
        return len(self.components)

    def generators(self) -> list[GeneratorRef]:
        return [GeneratorRef(i, j) for i, c in enumerate(self.components) for j in range(c.n_generators)]

    def validate(self, p: NCPoly) -> None:
        for letter in p.letters():
            i, j = letter.gen
            if not 0 <= i < len(self.components):
                raise IndexError(f"unknown component {i}")
            if not 0 <= j < self.components[i].n_generators:
                raise IndexError(f"component {i} has no generator {j}")

    # local data ---------------------------------------------------------
    def local_moment(self, algebra_id: int, neg_word: LocalWord, pos_word: LocalWord) -> complex:
        key = (algebra_id, neg_word, pos_word)
        val = self._pairing_cache.get(key)
        if val is None:
            val = complex(self.components[algebra_id].moment(neg_word, pos_word))
            with self._lock:
                self._pairing_cache[key] = val
        return val

    def mean(self, x: LocalElement) -> complex:
        """``tau_i(x)``."""
        return sum((c * self.local_moment(x.algebra_id, (), w) for w, c in x.coeffs.items()), 0j)

    def reflected_mean(self, x: LocalElement) -> complex:
        """``conj(tau_i(theta(x)))``: the constant that centers ``theta(x)`` on the negative face."""
        return sum((c * self.local_moment(x.algebra_id, w, ()).conjugate() for w, c in x.coeffs.items()), 0j)

    def local_pairing(self, a: LocalElement, b: LocalElement) -> complex:
        """``tau_i(theta(a) b)``, anti-linear in ``a``."""
        if a.algebra_id != b.algebra_id:
            raise ValueError("pairing across different components")
        i = a.algebra_id
        total = 0j
        for u, c in a.coeffs.items():
            cc = c.conjugate()
            for v, e in b.coeffs.items():
                total += cc * e * self.local_moment(i, u, v)
        return total

    # centering ------------------------------------------------------------
    def center_decompose(self, p: NCPoly, *, reflected: bool = False) -> list[CenteredTerm]:
        """Write a positive-face polynomial as a sum of centered alternating terms.

        With ``reflected=True`` factors are centered so that their reflections
        have zero mean instead; for components whose pairing is Hermitian the
        two centerings coincide.
        """
        if not p.is_positive():
            raise ValueError("center_decompose needs a positive-face polynomial")
        out: list[CenteredTerm] = []
        for word, c in p.items():
            for t in self._decompose_word(word, reflected):
                out.append(CenteredTerm(c * t.coefficient, t.factors))
            if len(out) > self.term_cap:
                raise TermCapExceeded(f"centered expansion exceeds cap {self.term_cap}")
        return out

    def _decompose_word(self, word: Word, reflected: bool) -> list[CenteredTerm]:
        key = (word, reflected)
        hit = self._decomp_cache.get(key)
        if hit is None:
            hit = self.decompose_factors(_runs(word), reflected=reflected)
            with self._lock:
                self._decomp_cache[key] = hit
        return hit

    def decompose_factors(self, factors: Sequence[LocalElement], *, reflected: bool = False) -> list[CenteredTerm]:
        """Centered expansion of the product ``factors[0] ... factors[-1]``.

        Folds from the right: the tail is already a sum of centered alternating
        terms, and multiplying by a new head either prepends a factor (different
        component) or merges into the tail's first factor (same component).
        Each step re-centers exactly one factor, so no recursion is needed.
        """
        mean = self.reflected_mean if reflected else self.mean
        terms: list[CenteredTerm] = [CenteredTerm(1 + 0j, ())]
        for x in reversed(factors):
            new: list[CenteredTerm] = []
            for t in terms:
                if t.factors and t.factors[0].algebra_id == x.algebra_id:
                    y, rest = x * t.factors[0], t.factors[1:]
                else:
                    y, rest = x, t.factors
                self._split(y, rest, t.coefficient, mean, new)
            terms = new
            if len(terms) > self.term_cap:
                raise TermCapExceeded(f"centered expansion exceeds cap {self.term_cap}")
        return terms

    def _split(self, y: LocalElement, rest: tuple, coeff: complex, mean, out: list) -> None:
        mu = mean(y)
        if abs(mu) <= self.center_tol:
            if y.coeffs:
                out.append(CenteredTerm(coeff, (y,) + rest))
            return
        centered = y.shifted(-mu)
        if centered.coeffs:
            out.append(CenteredTerm(coeff, (centered,) + rest))
        if abs(coeff * mu) >= DROP_TOL:
            out.append(CenteredTerm(coeff * mu, rest))

    # the product functional ---------------------------------------------
    def pair_eq1(self, a_term: CenteredTerm, b_term: CenteredTerm) -> complex:
        """``tau(theta(a) b)`` for centered alternating ``a``, ``b``; anti-linear in ``a``."""
        if len(a_term.factors) != len(b_term.factors):
            return 0j
        if a_term.pattern != b_term.pattern:
            return 0j
        val = a_term.coefficient.conjugate() * b_term.coefficient
        for a_k, b_k in zip(a_term.factors, b_term.factors):
            if val == 0:
                break
            val *= self.local_pairing(a_k, b_k)
        return val

    def monomial_value(self, neg_word: Word, pos_word: Word) -> complex:
        """``tau(theta(a) b)`` for positive words ``a`` and ``b``."""
        key = (neg_word, pos_word)
        val = self._value_cache.get(key)
        if val is None:
            a_terms = self._decompose_word(neg_word, True)
            b_terms = self._decompose_word(pos_word, False)
            val = 0j
            for s in a_terms:
                for t in b_terms:
                    val += self.pair_eq1(s, t)
            with self._lock:
                self._value_cache[key] = val
        return val

    def evaluate_tau(self, p: NCPoly) -> complex:
        self.validate(p)
        total = 0j
        for neg_word, pos_word, c in split_faces(p):
            total += c * self.monomial_value(unreflect(neg_word), pos_word)
        return total

    # sampling -----------------------------------------------------------
    def random_local_element(
        self, algebra_id: int, rng: np.random.Generator, max_len: int = 2, n_terms: int = 3
    ) -> LocalElement:
        n = self.components[algebra_id].n_generators
        coeffs: dict[LocalWord, complex] = {}
        for _ in range(n_terms):
            length = int(rng.integers(1, max_len + 1)) if n else 0
            w = tuple(int(j) for j in rng.integers(0, n, size=length)) if n else ()
            coeffs[w] = coeffs.get(w, 0j) + complex(rng.standard_normal(), rng.standard_normal())
        return LocalElement(algebra_id, coeffs)

    def random_centered(
        self, algebra_id: int, rng: np.random.Generator, max_len: int = 2, *, reflected: bool = False
    ) -> LocalElement:
        x = self.random_local_element(algebra_id, rng, max_len)
        mu = self.reflected_mean(x) if reflected else self.mean(x)
        return x.shifted(-mu)

    def random_centered_term(
        self, pattern: Sequence[int], rng: np.random.Generator, max_len: int = 2
    ) -> CenteredTerm:
        _check_alternating(pattern)
        return CenteredTerm(1 + 0j, tuple(self.random_centered(i, rng, max_len) for i in pattern))

    def verify_freeness(
        self, pattern: Sequence[int], trials: int, rng: Optional[np.random.Generator] = None, tol: float = 1e-9
    ) -> bool:
        """Random centered alternating products along ``pattern`` must have zero expectation."""
        rng = rng if rng is not None else np.random.default_rng(0)
        for _ in range(trials):
            term = self.random_centered_term(pattern, rng)
            if abs(self.evaluate_tau(term.to_poly())) > tol:
                return False
        return True


def _check_alternating(pattern: Sequence[int]) -> None:
    for u, v in zip(pattern, pattern[1:]):
        if u == v:
            raise ValueError(f"pattern {tuple(pattern)} is not alternating")
