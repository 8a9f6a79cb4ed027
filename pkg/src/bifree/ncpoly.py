"""Sparse noncommutative polynomials over positive-face generators and their reflections.

A word is a tuple of :class:`Letter` kept in bipartite normal form: every
reflected letter (an element of the negative face) sits to the left of every
unreflected one. Opposite faces commute, so this form is unique; letters of
the same face are never reordered.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Tuple, Union

DROP_TOL = 1e-12
DEFAULT_TERM_CAP = 200_000

Scalar = complex
Number = Union[int, float, complex]


class TermCapExceeded(RuntimeError):
    """Raised when a polynomial would grow past the configured term cap."""


class GeneratorRef(NamedTuple):
    algebra_id: int
    local_id: int


class Letter(NamedTuple):
    gen: GeneratorRef
    reflected: bool = False

    @property
    def algebra_id(self) -> int:
        return self.gen.algebra_id

    @property
    def local_id(self) -> int:
        return self.gen.local_id

    def flip(self) -> "Letter":
        return Letter(self.gen, not self.reflected)

    def __str__(self) -> str:
        prefix = "~" if self.reflected else ""
        return f"{prefix}{self.gen.algebra_id}.{self.gen.local_id}"


def pos(algebra_id: int, local_id: int) -> Letter:
    return Letter(GeneratorRef(algebra_id, local_id), False)


def neg(algebra_id: int, local_id: int) -> Letter:
    return Letter(GeneratorRef(algebra_id, local_id), True)


Word = Tuple[Letter, ...]
EMPTY: Word = ()


def normalize(letters: Iterable[Letter]) -> Word:
    """Stable partition: reflected letters first, each face keeping its order."""
    letters = tuple(letters)
    return tuple(l for l in letters if l.reflected) + tuple(l for l in letters if not l.reflected)


def face_boundary(word: Word) -> int:
    """Index of the first unreflected letter of a normal-form word."""
    for k, letter in enumerate(word):
        if not letter.reflected:
            return k
    return len(word)


def concat(left: Word, right: Word) -> Word:
    # fast path: no unreflected letter of `left` has to pass a reflected one of `right`
    if not left or not right or left[-1].reflected or not right[0].reflected:
        return left + right
    return normalize(left + right)


def word_str(word: Word) -> str:
    return " ".join(str(l) for l in word) if word else "1"


def _check_scalar(c: complex) -> complex:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"non-finite coefficient {c!r}")
    return c


class NCPoly:
    """Immutable sparse polynomial: a map from normal-form words to complex scalars."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Sequence[Letter], Number] | None = None, *, term_cap: int = DEFAULT_TERM_CAP):
        acc: dict[Word, complex] = {}
        if terms:
            for word, c in terms.items():
                w = normalize(word)
                acc[w] = acc.get(w, 0j) + _check_scalar(c)
        self._terms = _pruned(acc, term_cap)

    @classmethod
    def _wrap(cls, terms: dict[Word, complex]) -> "NCPoly":
        p = cls.__new__(cls)
        p._terms = terms
        return p

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls) -> "NCPoly":
        return cls._wrap({})

    @classmethod
    def constant(cls, c: Number) -> "NCPoly":
        return cls({EMPTY: c})

    @classmethod
    def one(cls) -> "NCPoly":
        return cls.constant(1)

    @classmethod
    def monomial(cls, letters: Iterable[Letter], coeff: Number = 1) -> "NCPoly":
        return cls({tuple(letters): coeff})

    @classmethod
    def generator(cls, algebra_id: int, local_id: int, reflected: bool = False) -> "NCPoly":
        return cls.monomial([Letter(GeneratorRef(algebra_id, local_id), reflected)])

    # mapping-like access ------------------------------------------------
    @property
    def terms(self) -> Mapping[Word, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Word, complex]]:
        return iter(self._terms.items())

    def coeff(self, word: Sequence[Letter]) -> complex:
        return self._terms.get(normalize(word), 0j)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Word]:
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def max_degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def letters(self) -> set[Letter]:
        return {l for w in self._terms for l in w}

    def is_positive(self) -> bool:
        """True when no word contains a reflected letter."""
        return all(not l.reflected for w in self._terms for l in w)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: "NCPoly | Number") -> "NCPoly":
        other = _coerce(other)
        acc = dict(self._terms)
        for w, c in other._terms.items():
            acc[w] = acc.get(w, 0j) + c
        return NCPoly._wrap(_pruned(acc))

    __radd__ = __add__

    def __neg__(self) -> "NCPoly":
        return NCPoly._wrap({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "NCPoly | Number") -> "NCPoly":
        return self + (-_coerce(other))

    def __rsub__(self, other: Number) -> "NCPoly":
        return _coerce(other) - self

    def scale(self, lam: Number) -> "NCPoly":
        lam = _check_scalar(lam)
        return NCPoly._wrap(_pruned({w: lam * c for w, c in self._terms.items()}))

    def __mul__(self, other: "NCPoly | Number") -> "NCPoly":
        if isinstance(other, NCPoly):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other: Number) -> "NCPoly":
        return self.scale(other)

    # comparison ---------------------------------------------------------
    def max_abs_diff(self, other: "NCPoly") -> float:
        keys = self._terms.keys() | other._terms.keys()
        return max((abs(self._terms.get(w, 0j) - other._terms.get(w, 0j)) for w in keys), default=0.0)

    def almost_equal(self, other: "NCPoly", tol: float = 1e-9) -> bool:
        return self.max_abs_diff(other) <= tol

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float, complex)):
            other = NCPoly.constant(other)
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.almost_equal(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        if not self._terms:
            return "NCPoly(0)"
        parts = [f"({c.real:.6g}{c.imag:+.6g}j)*[{word_str(w)}]" for w, c in sorted(self._terms.items(), key=_sort_key)]
        return "NCPoly(" + " + ".join(parts) + ")"


def _sort_key(item: tuple[Word, complex]):
    w = item[0]
    return (len(w), [(l.reflected is False, l.gen) for l in w])


def _coerce(x: "NCPoly | Number") -> NCPoly:
    return x if isinstance(x, NCPoly) else NCPoly.constant(x)


def _pruned(acc: dict[Word, complex], term_cap: int = DEFAULT_TERM_CAP) -> dict[Word, complex]:
    out = {w: c for w, c in acc.items() if abs(c) >= DROP_TOL}
    if len(out) > term_cap:
        raise TermCapExceeded(f"{len(out)} terms exceeds cap {term_cap}")
    return out


def mul(p: NCPoly, q: NCPoly, term_cap: int = DEFAULT_TERM_CAP) -> NCPoly:
    """Bilinear product: concatenate words, renormalize, combine like terms."""
    acc: dict[Word, complex] = {}
    for w1, c1 in p._terms.items():
        for w2, c2 in q._terms.items():
            w = concat(w1, w2)
            acc[w] = acc.get(w, 0j) + c1 * c2
        if len(acc) > 2 * term_cap:
            raise TermCapExceeded(f"product exceeds cap {term_cap}")
    return NCPoly._wrap(_pruned(acc, term_cap))


def theta(p: NCPoly) -> NCPoly:
    """The reflection: toggle every letter's face and conjugate coefficients.

    Letter order is kept since theta is multiplicative, not an anti-homomorphism.
    """
    acc: dict[Word, complex] = {}
    for w, c in p._terms.items():
        nw = normalize(l.flip() for l in w)
        acc[nw] = acc.get(nw, 0j) + c.conjugate()
    return NCPoly._wrap(acc)


def split_faces(p: NCPoly) -> list[tuple[Word, Word, complex]]:
    """Split each term at the face boundary into (negative word, positive word, coefficient)."""
    out = []
    for w, c in p._terms.items():
        k = face_boundary(w)
        out.append((w[:k], w[k:], c))
    return out


def unreflect(word: Word) -> Word:
    """Map a word of reflected letters to the positive word ``a`` with ``theta(a)`` equal to it."""
    if any(not l.reflected for l in word):
        raise ValueError("word contains unreflected letters")
    return tuple(l.flip() for l in word)
