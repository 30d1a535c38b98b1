"""Command-line front end: one JSON document per invocation.

Exit codes: 0 success, 2 invalid input, 3 computation failure.  Nothing is
written to stdout on an error path; the message goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import ce_homology, correlators, formal_geometry, quantization_checks as qc
from . import vacuum_module, vertex_engine, virasoro_pbw
from .exact_arith import TruncLaurent, as_rat, rat_str
from .vacuum_module import StateVector

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3


class InputError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return as_rat(text.strip())
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rat_list(text: str) -> tuple[Fraction, ...]:
    return tuple(_rational(p) for p in text.split(",") if p.strip())


def _state(ket: tuple[int, ...]) -> StateVector:
    try:
        return StateVector.ket(*ket)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _series_json(s: TruncLaurent) -> dict:
    return {
        "order": s.order,
        "coefficients": {str(k): str(v) if not isinstance(v, Fraction) else rat_str(v) for k, v in sorted(s.coeffs.items())},
    }


# ---------------------------------------------------------------------------
# handlers: each returns the "result" payload


def cmd_bracket(a):
    x = virasoro_pbw.vir_bracket(virasoro_pbw.VirElement.L(a.n), virasoro_pbw.VirElement.L(a.m), a.convention)
    out = {f"L{k}": str(v) for k, v in sorted(x.modes.items())}
    if x.central:
        out["C"] = str(x.central)
    return out


def cmd_straighten(a):
    v = virasoro_pbw.straighten(a.word, a.strategy, a.convention)
    return [
        {"word": list(w), "coefficient": str(c)}
        for w, c in sorted(v.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]


def cmd_act(a):
    v = vacuum_module.act(a.n, _state(a.ket))
    if a.c is None:
        return v.to_json()
    return [
        {"ket": list(k), "coefficient": rat_str(x)}
        for k, x in sorted(v.specialize(a.c).items(), key=lambda kv: (sum(kv[0]), kv[0]))
    ]


def cmd_character(a):
    ch = vacuum_module.character(a.order)
    return {
        "coefficients": [rat_str(ch.coeff(k)) for k in range(a.order)],
        "dimensions": [vacuum_module.graded_dimension(k) for k in range(a.order)],
    }


def cmd_ope(a):
    terms = vertex_engine.ope_singular(_state(a.a), _state(a.b))
    return [{"pole": p, "state": s.to_json()} for p, s in terms]


def cmd_locality(a):
    bad = vertex_engine.locality_witnesses(_state(a.a), _state(a.b), a.N, a.level_cap, a.mode_cap)
    return {
        "local": not bad,
        "witness_count": len(bad),
        "witnesses": [{"m": m, "n": n, "ket": list(k)} for m, n, k in bad[:10]],
    }


def cmd_translation(a):
    defects = vertex_engine.check_translation(_state(a.ket), a.order, a.level_cap)
    failing = sorted(k for k, d in defects.items() if not d.is_zero())
    return {"holds": not failing, "kets_checked": len(defects), "failing_kets": [list(k) for k in failing]}


def _correlator_form(convention: str) -> str:
    return correlators.PAPER_PRINTED if convention == "paper-printed" else correlators.WARD


def cmd_correlator(a):
    F = correlators.npoint(a.n, _correlator_form(a.convention))
    out = {"terms": F.to_json()}
    closed = {2: correlators.two_point_closed_form, 3: correlators.three_point_closed_form}.get(a.n)
    if closed is not None:
        out["equals_closed_form"] = correlators.corr_equal(F, closed())
    return out


def cmd_ward(a):
    F = correlators.npoint(a.n, _correlator_form(a.convention))
    names = ("translation", "dilation", "special_conformal")
    return {name: correlators.is_zero(d) for name, d in zip(names, correlators.ward_defects(F))}


def cmd_ce_betti(a):
    if a.file is not None:
        try:
            table = ce_homology.LieTable.from_json(Path(a.file))
        except OSError as exc:
            raise InputError(f"cannot read {a.file}: {exc.strerror}") from None
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"malformed Lie table: {exc}") from None
    else:
        algebras = {L.name: L for L in ce_homology.corpus()}
        if a.algebra not in algebras:
            raise InputError(f"unknown algebra {a.algebra!r}; choose from {sorted(algebras)}")
        table = algebras[a.algebra]
    C = ce_homology.build_ce(table)
    b = ce_homology.betti(C)
    return {
        "algebra": table.name,
        "betti": b,
        "euler_characteristic": ce_homology.euler_characteristic(b),
        "boundary_squared_zero": not C.square_defects(),
    }


def cmd_genus_table(a):
    return ce_homology.genus_table(a.g)


def cmd_gf_cocycle(a):
    X, Y = formal_geometry.LaurentVF.mode(a.n), formal_geometry.LaurentVF.mode(a.m)
    return {
        "value": rat_str(formal_geometry.gelfand_fuks(X, Y)),
        "central_coefficient": rat_str(virasoro_pbw.central_coefficient(a.n, a.m)),
    }


def cmd_schwarzian(a):
    if (a.coeffs is None) == (a.mobius is None):
        raise InputError("give exactly one of --coeffs or --mobius")
    if a.mobius is not None:
        if len(a.mobius) != 4:
            raise InputError("--mobius needs four rationals a,b,c,d")
        f = formal_geometry.mobius_series(*a.mobius, order=a.order)
    else:
        f = formal_geometry.FormalMap(TruncLaurent.from_list(a.coeffs, a.order))
    return _series_json(formal_geometry.schwarzian(f))


def cmd_anomaly(a):
    value = qc.anomaly_integral_exact(a.eps, a.L)
    defect = qc.anomaly_limit_defect(a.eps, a.L)
    bound = qc.anomaly_defect_bound(a.eps, a.L)
    out = {
        "value": rat_str(value),
        "limit": rat_str(qc.anomaly_limit(a.L)),
        "defect": rat_str(defect),
        "defect_bound": rat_str(bound),
        "defect_bound_ok": defect <= bound,
    }
    if a.numeric:
        out["numeric"] = qc.anomaly_integral_numeric(a.eps, a.L).to_json()
    return out


def cmd_annulus(a):
    b = qc.BumpSpec(a.inner, a.outer, a.family)
    return {"bump": b.to_json(), "moment": qc.annulus_moment(b, a.k, a.tol).to_json()}


def cmd_central_term(a):
    bumps = qc.default_nested_bumps(a.family)
    return qc.central_term_quadrature(a.m, a.n, bumps, a.tol).to_json()


def cmd_charge(a):
    out = qc.beta_gamma_central_charge(a.n)
    out["cocycle_coefficient"] = rat_str(out["cocycle_coefficient"])
    return out


# ---------------------------------------------------------------------------
# parser


def _add(sub, name, handler, help_):
    p = sub.add_parser(name, help=help_)
    p.set_defaults(handler=handler, command=name)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="virasoro-engine", description="Exact Virasoro and vertex-algebra computations.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def lie_convention(p):
        p.add_argument("--convention", choices=virasoro_pbw.CONVENTIONS, default=virasoro_pbw.RESIDUE)

    def corr_convention(p):
        p.add_argument("--convention", choices=(correlators.WARD, correlators.PAPER_PRINTED), default=correlators.WARD)

    p = _add(sub, "bracket", cmd_bracket, "[L_n, L_m] in the Virasoro algebra")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    lie_convention(p)

    p = _add(sub, "straighten", cmd_straighten, "PBW normal form of a word L_n1 ... L_nk")
    p.add_argument("--word", type=_int_list, required=True, help="comma-separated modes, e.g. --word=1,-1")
    p.add_argument("--strategy", choices=("leftmost", "rightmost"), default="leftmost")
    lie_convention(p)

    ket_help = "comma-separated partition with parts >= 2; empty for the vacuum"
    p = _add(sub, "act", cmd_act, "L_n on a vacuum-module basis ket")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ket", type=_int_list, default=(), help=ket_help)
    p.add_argument("--c", type=_rational, default=None, help="specialize the central charge")

    p = _add(sub, "character", cmd_character, "graded character of the vacuum module")
    p.add_argument("--order", type=int, default=13)

    p = _add(sub, "ope", cmd_ope, "singular part of Y(a, z) b")
    p.add_argument("--a", type=_int_list, default=(2,), help=ket_help)
    p.add_argument("--b", type=_int_list, default=(2,), help=ket_help)

    p = _add(sub, "locality", cmd_locality, "(z - w)^N [Y(a, z), Y(b, w)] = 0 at caps")
    p.add_argument("--a", type=_int_list, default=(2,), help=ket_help)
    p.add_argument("--b", type=_int_list, default=(2,), help=ket_help)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--level-cap", type=int, default=6)
    p.add_argument("--mode-cap", type=int, default=6)

    p = _add(sub, "translation", cmd_translation, "translation axiom for Y(ket, z)")
    p.add_argument("--ket", type=_int_list, default=(2,), help=ket_help)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--level-cap", type=int, default=4)

    p = _add(sub, "correlator", cmd_correlator, "n-point stress-tensor correlator on the sphere")
    p.add_argument("--n", type=int, required=True)
    corr_convention(p)

    p = _add(sub, "ward", cmd_ward, "global conformal Ward identities of the n-point function")
    p.add_argument("--n", type=int, required=True)
    corr_convention(p)

    p = _add(sub, "ce-betti", cmd_ce_betti, "Chevalley-Eilenberg Betti numbers")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", help="Lie table JSON file")
    src.add_argument("--algebra", help="name of a built-in algebra")

    p = _add(sub, "genus-table", cmd_genus_table, "global sections presentation at genus g")
    p.add_argument("--g", type=int, required=True)

    p = _add(sub, "gf-cocycle", cmd_gf_cocycle, "residue cocycle on the fields of L_n, L_m")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = _add(sub, "schwarzian", cmd_schwarzian, "Schwarzian derivative of a formal map")
    p.add_argument("--coeffs", type=_rat_list, help="power-series coefficients from z^0, e.g. 0,1,1/2")
    p.add_argument("--mobius", type=_rat_list, help="a,b,c,d of (az + b)/(cz + d)")
    p.add_argument("--order", type=int, default=8)

    p = _add(sub, "anomaly", cmd_anomaly, "one-loop t-integral I(eps, L)")
    p.add_argument("--eps", type=_rational, required=True)
    p.add_argument("--L", type=_rational, required=True)
    p.add_argument("--numeric", action="store_true", help="also run adaptive quadrature")

    families = sorted(qc.BUMP_FAMILIES)
    p = _add(sub, "annulus", cmd_annulus, "moment int f(|z|^2) z^k d^2z of an annulus bump")
    p.add_argument("--inner", type=float, default=1.0)
    p.add_argument("--outer", type=float, default=2.0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--family", choices=families, default="exp")
    p.add_argument("--tol", type=float, default=None)

    p = _add(sub, "central-term", cmd_central_term, "central term from nested annuli")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", choices=families, default="exp")
    p.add_argument("--tol", type=float, default=None)

    p = _add(sub, "charge", cmd_charge, "central charge of n beta-gamma pairs")
    p.add_argument("--n", type=int, required=True)

    return parser


def _echo(args: argparse.Namespace) -> dict:
    out = {}
    for k, v in vars(args).items():
        if k in ("handler", "command"):
            continue
        if isinstance(v, Fraction):
            v = rat_str(v)
        elif isinstance(v, tuple):
            v = [rat_str(x) if isinstance(x, Fraction) else x for x in v]
        out[k] = v
    return out


def _resolve_tolerance(args: argparse.Namespace) -> None:
    if hasattr(args, "tol"):
        if args.tol is None:
            args.tol = qc.default_tolerance()
        elif not args.tol > 0:
            raise InputError("--tol must be positive")


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Parse and dispatch; returns ``(exit code, stdout text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code in (0, None) else EXIT_INPUT), ""
    try:
        _resolve_tolerance(args)
        result = args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, ""
    except ArithmeticError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE, ""
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, ""
    doc = {"command": args.command, "input": _echo(args), "result": result}
    if hasattr(args, "convention"):
        doc["convention"] = args.convention
    return EXIT_OK, json.dumps(doc, sort_keys=True, ensure_ascii=False) + "\n"


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    if text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
