"""Gram matrix reports: Hermitian defect, spectrum bound, PSD verdict and witness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .ncpoly import Word, word_str

DEFAULT_PSD_TOL = 1e-8
DEFAULT_BASIS_CAP = 2_000


class BasisCapExceeded(RuntimeError):
    pass


@dataclass
class GramReport:
    basis: list[Word]
    matrix: np.ndarray
    min_eig: float
    psd: bool
    hermitian_defect: float
    tol: float
    witness: Optional[np.ndarray] = None
    eigenvalues: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def quadratic_form(self, c: Sequence[complex]) -> complex:
        c = np.asarray(c, dtype=complex)
        return complex(np.conj(c) @ self.matrix @ c)

    def to_dict(self, include_matrix: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {
            "size": len(self.basis),
            "min_eig": float(self.min_eig),
            "psd": bool(self.psd),
            "hermitian_defect": float(self.hermitian_defect),
            "tol": self.tol,
        }
        if self.witness is not None:
            out["witness"] = {
                "basis": [word_str(w) for w in self.basis],
                "coeffs": [[float(z.real), float(z.imag)] for z in self.witness],
                "value": float(self.quadratic_form(self.witness).real),
            }
        if include_matrix:
            out["basis"] = [word_str(w) for w in self.basis]
            out["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        return out


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v).round(12)))
    if abs(v[k]) > 0:
        v = v * (abs(v[k]) / v[k])
    return v / np.linalg.norm(v)


def certify(matrix: np.ndarray, basis: Sequence[Word], tol: float = DEFAULT_PSD_TOL) -> GramReport:
    """Eigen-certify a Gram matrix; PSD needs min eigenvalue >= -tol and Hermitian defect <= tol."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (len(basis), len(basis)):
        raise ValueError(f"matrix shape {matrix.shape} does not match basis size {len(basis)}")
    defect = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    herm = (matrix + matrix.conj().T) / 2
    evals, evecs = np.linalg.eigh(herm)
    min_eig = float(evals[0])
    psd = min_eig >= -tol and defect <= tol
    witness = None
    # a pure Hermitian-defect failure has no negative direction to report
    if min_eig < -tol:
        witness = _fix_phase(evecs[:, 0].copy())
    return GramReport(
        basis=list(basis),
        matrix=matrix,
        min_eig=min_eig,
        psd=psd,
        hermitian_defect=defect,
        tol=tol,
        witness=witness,
        eigenvalues=evals,
    )
