"""Bi-free products of reflection-positive two-faced systems."""

__version__ = "0.1.0"

from .component import MatrixModel, check_component_rp, eval_local_moment, random_model, schmidt_state
from .fock import build_space, fock_tau, oracle_tau
from .gram import GramReport
from .ncpoly import GeneratorRef, Letter, NCPoly, mul, neg, normalize, pos, split_faces, theta
from .positivity import build_gram, hadamard, positive_words, verify_theorem
from .product import BiFreeSystem, CenteredTerm, LocalElement

__all__ = [
    "BiFreeSystem",
    "CenteredTerm",
    "GeneratorRef",
    "GramReport",
    "Letter",
    "LocalElement",
    "MatrixModel",
    "NCPoly",
    "build_gram",
    "build_space",
    "check_component_rp",
    "eval_local_moment",
    "fock_tau",
    "hadamard",
    "mul",
    "neg",
    "normalize",
    "oracle_tau",
    "pos",
    "positive_words",
    "random_model",
    "schmidt_state",
    "split_faces",
    "theta",
    "verify_theorem",
]
