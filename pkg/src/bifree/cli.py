"""Command-line driver.

Exit codes: 0 success, 1 check failed, 2 bad input, 3 hypothesis failure
(a component is not reflection positive).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .component import check_component_rp
from .fock import DepthOverflow, DimensionCapExceeded, fock_tau
from .gram import BasisCapExceeded
from .modelfile import ModelError, ModelFile, Options, load_model, parse_word
from .ncpoly import Letter, NCPoly, TermCapExceeded, word_str
from .positivity import build_gram, positive_words, verify_theorem
from .product import BiFreeSystem

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2, 3
ORACLE_TOL = 1e-8


def format_complex(z: complex) -> str:
    re, im = z.real + 0.0, z.imag + 0.0  # drop negative zeros
    sign = "-" if im < 0 else "+"
    return f"{re:.12g}{sign}{abs(im):.12g}i"


def _resolve(model: ModelFile, args: argparse.Namespace) -> Options:
    opts = model.options
    overrides = {}
    for name, key in (("max_len", "max_word_len"), ("seed", "seed"), ("psd_tol", "psd_tol")):
        value = getattr(args, name, None)
        if value is not None:
            overrides[key] = value
    return replace(opts, **overrides)


def _report(command: str, opts: Options, body: dict[str, Any]) -> dict[str, Any]:
    return {"tool": "bifree", "version": __version__, "command": command, "options": asdict(opts), **body}


def _emit(args: argparse.Namespace, report: dict[str, Any], text: str) -> None:
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print(text)


def cmd_check_rp(args: argparse.Namespace, model: ModelFile) -> int:
    opts = _resolve(model, args)
    models = model.models()
    if args.component is not None:
        if not 0 <= args.component < len(models):
            raise ModelError(f"unknown component {args.component}")
        ids = [args.component]
    else:
        ids = list(range(len(models)))
    results = {}
    lines = []
    ok = True
    for i in ids:
        rep = check_component_rp(models[i], opts.max_word_len, opts.psd_tol, algebra_id=i)
        results[str(i)] = rep.to_dict()
        ok &= rep.psd
        lines.append(f"component {i}: {'RP' if rep.psd else 'NOT RP'} (min eig {rep.min_eig:.3e}, size {len(rep.basis)})")
    _emit(args, _report("check-rp", opts, {"components": results, "ok": ok}), "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_moment(args: argparse.Namespace, model: ModelFile) -> int:
    opts = model.options
    models = model.models()
    word = parse_word(args.word, models)
    p = NCPoly.monomial(word)
    system = BiFreeSystem(models, term_cap=opts.term_cap)
    value = system.evaluate_tau(p)
    body: dict[str, Any] = {"word": word_str(word), "value": [value.real, value.imag]}
    lines = [format_complex(value)]
    code = EXIT_OK
    if args.verify:
        oracle = fock_tau(models, p)
        diff = abs(value - oracle)
        body["oracle"] = [oracle.real, oracle.imag]
        body["abs_diff"] = diff
        lines.append(f"oracle {format_complex(oracle)} (|diff| {diff:.3e})")
        if diff > ORACLE_TOL:
            code = EXIT_FAIL
    _emit(args, _report("moment", opts, body), "\n".join(lines))
    return code


def cmd_gram(args: argparse.Namespace, model: ModelFile) -> int:
    opts = _resolve(model, args)
    system = BiFreeSystem(model.models(), term_cap=opts.term_cap)
    rep = build_gram(system, positive_words(system, opts.max_word_len), opts.psd_tol)
    text = f"gram size {len(rep.basis)}: {'PSD' if rep.psd else 'NOT PSD'} (min eig {rep.min_eig:.3e})"
    _emit(args, _report("gram", opts, {"gram": rep.to_dict(include_matrix=args.matrix)}), text)
    return EXIT_OK if rep.psd else EXIT_FAIL


def cmd_verify_theorem(args: argparse.Namespace, model: ModelFile) -> int:
    opts = _resolve(model, args)
    system = BiFreeSystem(model.models(), term_cap=opts.term_cap)
    rep = verify_theorem(system, opts.max_word_len, args.trials, opts.psd_tol, seed=opts.seed, imag_tol=opts.moment_tol)
    text = "\n".join(
        [
            f"verdict: {rep.verdict}",
            f"components RP: {rep.hypothesis_ok}",
            f"gram: size {len(rep.gram.basis)}, min eig {rep.gram.min_eig:.3e}",
            f"random: {rep.trials} trials, min Re {rep.min_real:.3e}, max |Im| {rep.max_abs_imag:.3e}",
            f"schur: {len(rep.schur)} patterns, min eig {rep.schur_min_eig:.3e}",
        ]
    )
    _emit(args, _report("verify-theorem", opts, rep.to_dict()), text)
    return {"pass": EXIT_OK, "theorem-failure": EXIT_FAIL, "hypothesis-failure": EXIT_HYPOTHESIS}[rep.verdict]


def cmd_oracle_compare(args: argparse.Namespace, model: ModelFile) -> int:
    opts = _resolve(model, args)
    models = model.models()
    system = BiFreeSystem(models, term_cap=opts.term_cap)
    rng = np.random.default_rng(opts.seed)
    letters = [Letter(g, r) for g in system.generators() for r in (False, True)]
    if not letters:
        raise ModelError("model has no generators")
    length = args.length
    worst = 0.0
    for _ in range(args.count):
        n = int(rng.integers(0, length + 1))
        p = NCPoly.monomial([letters[k] for k in rng.integers(0, len(letters), size=n)])
        worst = max(worst, abs(system.evaluate_tau(p) - fock_tau(models, p)))
    worst = float(worst)
    ok = bool(worst <= args.tol)
    body = {"count": args.count, "length": length, "max_abs_diff": worst, "tol": args.tol, "ok": ok}
    _emit(args, _report("oracle-compare", opts, body), f"{args.count} words, max |diff| {worst:.3e}: {'OK' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bifree", description="Bi-free products and reflection positivity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="model JSON file")
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-rp", parents=[common], help="reflection positivity of components")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--component", type=int)
    group.add_argument("--all", action="store_true")
    p.add_argument("--max-len", dest="max_len", type=int)
    p.set_defaults(func=cmd_check_rp)

    p = sub.add_parser("moment", parents=[common], help="evaluate tau on a word")
    p.add_argument("--word", required=True, help="e.g. '~0.1 1.0'; empty string is the unit")
    p.add_argument("--verify", action="store_true", help="also evaluate with the Fock-space oracle")
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("gram", parents=[common], help="Gram matrix of the product over positive words")
    p.add_argument("--max-len", dest="max_len", type=int)
    p.add_argument("--matrix", action="store_true", help="include the matrix in the JSON report")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("verify-theorem", parents=[common], help="reflection positivity of the product")
    p.add_argument("--max-len", dest="max_len", type=int)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify_theorem)

    p = sub.add_parser("oracle-compare", parents=[common], help="evaluator vs Fock-space oracle")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--length", type=int, default=4)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, default=ORACLE_TOL)
    p.set_defaults(func=cmd_oracle_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("max_len", "trials", "count", "length"):
        if getattr(args, name, None) is not None and getattr(args, name) < 0:
            parser.error(f"--{name.replace('_', '-')} must be >= 0")
    try:
        model = load_model(args.model)
        return args.func(args, model)
    except (ModelError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (TermCapExceeded, BasisCapExceeded, DimensionCapExceeded, DepthOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
