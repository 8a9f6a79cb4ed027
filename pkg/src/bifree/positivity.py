"""Gram matrices of the product functional, Schur products, and the theorem harness."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .component import check_component_rp
from .gram import DEFAULT_BASIS_CAP, DEFAULT_PSD_TOL, BasisCapExceeded, GramReport, certify
from .ncpoly import Letter, NCPoly, Word, theta
from .product import BiFreeSystem, CenteredTerm

IMAG_TOL = 1e-9


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("BIFREE_THREADS", "1")))
    except ValueError:
        return 1


def word_sort_key(word: Word):
    return (len(word), tuple(l.algebra_id for l in word), tuple(l.local_id for l in word))


def positive_words(sys: BiFreeSystem, max_len: int, basis_cap: int = DEFAULT_BASIS_CAP) -> list[Word]:
    """All positive words of length <= max_len, sorted by (length, components, generators)."""
    gens = sys.generators()
    size = sum(len(gens) ** k for k in range(max_len + 1))
    if size > basis_cap:
        raise BasisCapExceeded(f"basis of {size} words exceeds cap {basis_cap}")
    letters = [Letter(g) for g in gens]
    words = [w for n in range(max_len + 1) for w in itertools.product(letters, repeat=n)]
    return sorted(words, key=word_sort_key)


def build_gram(
    sys: BiFreeSystem,
    basis: Sequence[Word],
    tol: float = DEFAULT_PSD_TOL,
    workers: Optional[int] = None,
) -> GramReport:
    """``G[k, l] = tau(theta(w_k) w_l)``, certified by a dense Hermitian eigensolve."""
    for w in basis:
        if any(l.reflected for l in w):
            raise ValueError("Gram basis must consist of positive words")
    basis = list(basis)
    workers = worker_count() if workers is None else workers

    def row(k: int) -> list[complex]:
        return [sys.monomial_value(basis[k], w) for w in basis]

    if workers > 1 and len(basis) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(len(basis))))
    else:
        rows = [row(k) for k in range(len(basis))]
    return certify(np.array(rows, dtype=complex).reshape(len(basis), len(basis)), basis, tol)


def poly_from_coeffs(basis: Sequence[Word], coeffs: Sequence[complex]) -> NCPoly:
    return NCPoly({w: c for w, c in zip(basis, coeffs)})


def reflected_square(sys: BiFreeSystem, a: NCPoly) -> complex:
    """``tau(theta(a) a)``, evaluated on the expanded product polynomial."""
    return sys.evaluate_tau(theta(a) * a)


def hadamard(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return A * B


def min_eig(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=complex)
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])


@dataclass
class SchurReport:
    pattern: tuple[int, ...]
    block_min_eigs: list[float]
    product_min_eig: float
    factorization_defect: float

    @property
    def min_eig(self) -> float:
        return min([self.product_min_eig, *self.block_min_eigs])


def schur_factorization(sys: BiFreeSystem, terms: Sequence[CenteredTerm]) -> SchurReport:
    """Compare the Gram of same-pattern centered terms with the Schur product of local Grams."""
    if not terms:
        raise ValueError("need at least one term")
    pattern = terms[0].pattern
    if any(t.pattern != pattern for t in terms):
        raise ValueError("all terms must share one alternation pattern")
    p = len(terms)
    direct = np.array([[sys.pair_eq1(s, t) for t in terms] for s in terms], dtype=complex)
    coeff = np.array([[s.coefficient.conjugate() * t.coefficient for t in terms] for s in terms])
    blocks = []
    prod = coeff
    for m in range(len(pattern)):
        B = np.array(
            [[sys.local_pairing(terms[k].factors[m], terms[l].factors[m]) for l in range(p)] for k in range(p)],
            dtype=complex,
        )
        blocks.append(B)
        prod = hadamard(prod, B)
    return SchurReport(
        pattern=pattern,
        block_min_eigs=[min_eig(B) for B in blocks],
        product_min_eig=min_eig(prod),
        factorization_defect=float(np.max(np.abs(prod - direct))),
    )


def alternating_patterns(n_components: int, max_len: int) -> list[tuple[int, ...]]:
    out = []
    for n in range(1, max_len + 1):
        for pat in itertools.product(range(n_components), repeat=n):
            if all(u != v for u, v in zip(pat, pat[1:])):
                out.append(pat)
    return out


@dataclass
class TheoremReport:
    verdict: str  # "pass" | "theorem-failure" | "hypothesis-failure"
    component_reports: list[GramReport]
    gram: GramReport
    trials: int
    min_real: float
    max_abs_imag: float
    random_ok: bool
    schur: list[SchurReport] = field(default_factory=list)
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def hypothesis_ok(self) -> bool:
        return all(r.psd for r in self.component_reports)

    @property
    def schur_min_eig(self) -> float:
        return min((s.min_eig for s in self.schur), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "hypothesis": {
                "ok": self.hypothesis_ok,
                "components": [r.to_dict() for r in self.component_reports],
            },
            "gram": self.gram.to_dict(),
            "random_check": {
                "trials": self.trials,
                "min_real": self.min_real,
                "max_abs_imag": self.max_abs_imag,
                "ok": self.random_ok,
            },
            "schur": {
                "patterns": len(self.schur),
                "min_eig": self.schur_min_eig,
                "max_factorization_defect": max((s.factorization_defect for s in self.schur), default=0.0),
            },
            "options": self.options,
        }


def verify_theorem(
    sys: BiFreeSystem,
    max_len: int,
    trials: int,
    tol: float = DEFAULT_PSD_TOL,
    *,
    seed: int = 42,
    imag_tol: float = IMAG_TOL,
    schur_samples: int = 6,
    basis_cap: int = DEFAULT_BASIS_CAP,
) -> TheoremReport:
    """Check reflection positivity of the product up to words of length ``max_len``.

    The components are checked first; if any fails, the verdict is
    ``hypothesis-failure`` (the product checks still run, so a failing Gram
    can be inspected).
    """
    rng = np.random.default_rng(seed)
    comp_reports = [
        check_component_rp(c, max_len, tol, algebra_id=i, basis_cap=basis_cap) for i, c in enumerate(sys.components)
    ]
    basis = positive_words(sys, max_len, basis_cap)
    gram = build_gram(sys, basis, tol)

    min_real, max_imag = np.inf, 0.0
    for _ in range(trials):
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        c /= np.linalg.norm(c)
        val = reflected_square(sys, poly_from_coeffs(basis, c))
        min_real = min(min_real, val.real)
        max_imag = max(max_imag, abs(val.imag))
    if trials == 0:
        min_real = 0.0
    random_ok = bool(min_real >= -tol and max_imag <= imag_tol)

    schur = []
    if schur_samples > 0:
        for pattern in alternating_patterns(len(sys), max_len):
            terms = [sys.random_centered_term(pattern, rng, max(1, max_len)) for _ in range(schur_samples)]
            schur.append(schur_factorization(sys, terms))

    if not all(r.psd for r in comp_reports):
        verdict = "hypothesis-failure"
    elif gram.psd and random_ok:
        verdict = "pass"
    else:
        verdict = "theorem-failure"
    return TheoremReport(
        verdict=verdict,
        component_reports=comp_reports,
        gram=gram,
        trials=trials,
        min_real=float(min_real),
        max_abs_imag=float(max_imag),
        random_ok=random_ok,
        schur=schur,
        options={"max_len": max_len, "trials": trials, "psd_tol": tol, "imag_tol": imag_tol, "seed": seed},
    )
