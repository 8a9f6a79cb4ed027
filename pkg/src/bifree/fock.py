"""Truncated free product of the component Hilbert spaces.

Positive-face letters act on the leftmost tensor slot, reflected letters on
the rightmost one. The product functional is the vacuum expectation. This
module shares no code path with :mod:`bifree.product` beyond the component
matrices, so it serves as an independent check of the evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .component import MatrixModel
from .ncpoly import Letter, NCPoly

DIM_CAP = 50_000


class DimensionCapExceeded(RuntimeError):
    pass


class DepthOverflow(RuntimeError):
    pass


def complement_basis(xi: np.ndarray) -> np.ndarray:
    """Unitary whose first column is ``xi``; the rest span its orthogonal complement.

    Gram-Schmidt against ``xi`` over the standard basis in index order.
    """
    n = xi.size
    cols = [xi / np.linalg.norm(xi)]
    for k in range(n):
        v = np.zeros(n, dtype=complex)
        v[k] = 1.0
        for q in cols:
            v = v - np.vdot(q, v) * q
        for q in cols:  # second pass for stability
            v = v - np.vdot(q, v) * q
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
        if len(cols) == n:
            break
    return np.column_stack(cols)


Slot = tuple[int, int]  # (component, index into the complement basis, starting at 1)


@dataclass
class FreeProductSpace:
    models: Sequence[MatrixModel]
    depth: int
    dim_cap: int = DIM_CAP
    bases: list = field(init=False, repr=False)
    basis: list = field(init=False, repr=False)
    index: dict = field(init=False, repr=False)
    _ops: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        self.models = tuple(self.models)
        self.bases = [complement_basis(m.state) for m in self.models]
        count = expected_dimension([m.dim for m in self.models], self.depth)
        if count > self.dim_cap:
            raise DimensionCapExceeded(f"dimension {count} exceeds cap {self.dim_cap}")
        basis: list[tuple[Slot, ...]] = [()]
        layer: list[tuple[Slot, ...]] = [()]
        for _ in range(self.depth):
            nxt = []
            for s in layer:
                for i, m in enumerate(self.models):
                    if s and s[-1][0] == i:
                        continue
                    for r in range(1, m.dim * m.dim):
                        nxt.append(s + ((i, r),))
            basis.extend(nxt)
            layer = nxt
        self.basis = basis
        self.index = {s: k for k, s in enumerate(basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def _local_matrix(self, letter: Letter) -> np.ndarray:
        m = self.models[letter.algebra_id]
        T = m.reflected_operator(letter.local_id) if letter.reflected else m.positive_operator(letter.local_id)
        Q = self.bases[letter.algebra_id]
        return Q.conj().T @ T @ Q

    def operator(self, letter: Letter):
        """Sparse matrix of the letter's action, plus data for overflow detection."""
        hit = self._ops.get(letter)
        if hit is not None:
            return hit
        i = letter.algebra_id
        if not 0 <= i < len(self.models) or not 0 <= letter.local_id < self.models[i].n_generators:
            raise IndexError(f"unknown generator {letter}")
        M = self._local_matrix(letter)
        D = M.shape[0]
        right = letter.reflected
        rows, cols, vals = [], [], []
        top = np.zeros(self.dim, dtype=bool)
        for col, s in enumerate(self.basis):
            edge = (s[-1] if right else s[0]) if s else None
            if edge is not None and edge[0] == i:
                rest = s[:-1] if right else s[1:]
                r = edge[1]
                # annihilate back to rest, or stay in the slot
                if M[0, r] != 0:
                    rows.append(self.index[rest]); cols.append(col); vals.append(M[0, r])
                for r2 in range(1, D):
                    if M[r2, r] != 0:
                        t = rest + ((i, r2),) if right else ((i, r2),) + rest
                        rows.append(self.index[t]); cols.append(col); vals.append(M[r2, r])
            else:
                if M[0, 0] != 0:
                    rows.append(col); cols.append(col); vals.append(M[0, 0])
                if len(s) == self.depth:
                    top[col] = True
                    continue
                for r2 in range(1, D):
                    if M[r2, 0] != 0:
                        t = s + ((i, r2),) if right else ((i, r2),) + s
                        rows.append(self.index[t]); cols.append(col); vals.append(M[r2, 0])
        mat = sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)
        creation = float(np.linalg.norm(M[1:, 0]))
        hit = (mat, top, creation)
        self._ops[letter] = hit
        return hit

    def act(self, letter: Letter, v: np.ndarray) -> np.ndarray:
        mat, top, creation = self.operator(letter)
        if creation > 0 and np.any(top):
            lost = creation * float(np.linalg.norm(v[top]))
            if lost > 1e-12:
                raise DepthOverflow(f"{letter} would create beyond depth {self.depth}")
        return mat @ v

    def dense_operator(self, letter: Letter) -> np.ndarray:
        return self.operator(letter)[0].toarray()


def expected_dimension(dims: Sequence[int], depth: int) -> int:
    """``1 + sum over alternating index strings of prod(d_i^2 - 1)``, by dynamic programming."""
    sizes = [d * d - 1 for d in dims]
    # ending[i]: total dimension of strings of the current length ending in component i
    ending = list(sizes)
    total = 1 + sum(ending)
    for _ in range(depth - 1):
        s = sum(ending)
        ending = [(s - e) * sizes[i] for i, e in enumerate(ending)]
        total += sum(ending)
    return total


def build_space(models: Sequence[MatrixModel], depth: int, dim_cap: int = DIM_CAP) -> FreeProductSpace:
    return FreeProductSpace(models, depth, dim_cap)


def oracle_tau(space: FreeProductSpace, p: NCPoly) -> complex:
    """``sum coeff * <Omega, L_1 ... L_n Omega>`` with letters applied right to left."""
    total = 0j
    omega = space.vacuum()
    for word, c in p.items():
        if len(word) > space.depth:
            raise DepthOverflow(f"word of length {len(word)} exceeds depth {space.depth}")
        v = omega
        for letter in reversed(word):
            v = space.act(letter, v)
        total += c * v[0]
    return total


def fock_tau(models: Sequence[MatrixModel], p: NCPoly, dim_cap: int = DIM_CAP) -> complex:
    """Oracle value with depth set to the longest word, which makes truncation exact."""
    space = build_space(models, max(1, p.max_degree()), dim_cap)
    return oracle_tau(space, p)
