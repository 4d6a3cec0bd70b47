"""Command-line front end.

Exit status: 0 on success, 1 on domain/usage errors, 2 on scope errors
(non-inert input), 3 on internal consistency failures.  Errors are reported
on stderr as JSON objects with a machine-readable ``code``.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from .eigen import certify_eisenstein, eigen_check
from .errors import ConsistencyError, DomainError, HeckeError, ScopeError
from .field import frac_str, make_field
from .fourier import (
    FourierExpansion,
    cusp_tests,
    delta_q_expansion,
    eisenstein_q_expansion,
    hecke_act,
    siegel_phi,
)
from .hecke import DEFAULT_CAP, HeckeElement, enumerate_right_cosets, hecke_product, phi_map
from .ideals import class_representatives, default_avoid_prime, find_inert_prime, inert_search_hypotheses
from .serialize import (
    atomic_write,
    cosets_from_json,
    cosets_to_json,
    dumps,
    element_from_json,
    element_to_json,
    key_from_json,
    load_json,
)

log = logging.getLogger("hermhecke")

GLOBAL_DEFAULTS = {"seed": 0, "cap": DEFAULT_CAP, "workers": 1}


class UsageError(DomainError):
    code = "usage_error"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config(path) -> dict:
    """key = value lines (no section header needed)."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[defaults]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for name, value in cp["defaults"].items():
        name = name.replace("-", "_")
        if name in ("seed", "cap", "workers"):
            try:
                out[name] = int(value)
            except ValueError:
                raise UsageError(f"config key {name} needs an integer, got {value!r}") from None
        elif name == "json":
            out[name] = value.strip().lower() in ("1", "true", "yes", "on")
        else:
            raise UsageError(f"unknown config key {name!r}")
    return out


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be positive")
    return v


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None


def _global_options(default) -> argparse.ArgumentParser:
    # the copy attached to subcommands uses SUPPRESS so it never clobbers
    # a value given before the subcommand name
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--json", action="store_true", default=default, help="print JSON on stdout")
    g.add_argument("--seed", type=_int, default=default, help="seed recorded in every artifact")
    g.add_argument("--cap", type=_positive, default=default, help="enumeration size cap")
    g.add_argument("--workers", type=_positive, default=default, help="processes for coset enumeration")
    g.add_argument("--out", default=default, help="write the JSON artifact to this file")
    g.add_argument("--config", default=default, help="key=value file with defaults for the global options")
    g.add_argument("-v", "--verbose", action="store_true", default=default)
    return common


def build_parser() -> argparse.ArgumentParser:
    top = _global_options(None)
    common = _global_options(argparse.SUPPRESS)

    p = _Parser(prog="hermhecke", description="Hecke theory of the Hermitian modular group, exactly.",
                parents=[top])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("field", parents=[common], help="field data for Q(sqrt(-m))")
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--primes", type=_positive, default=30, help="classify primes up to this bound")
    s.set_defaults(func=cmd_field)

    s = sub.add_parser("classgroup", parents=[common], help="reduced forms, class representatives, N")
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--avoid-p", type=_positive, default=None)
    s.set_defaults(func=cmd_classgroup)

    s = sub.add_parser("find-prime", parents=[common], help="smallest inert prime = 1 mod modulus")
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--modulus", type=_positive, default=1)
    s.add_argument("--search-bound", type=_positive, default=10**6)
    s.set_defaults(func=cmd_find_prime)

    hk = sub.add_parser("hecke", help="double cosets in the inert Hecke algebra")
    hsub = hk.add_subparsers(dest="hecke_command", required=True, parser_class=_Parser)
    s = hsub.add_parser("cosets", parents=[common], help="enumerate right cosets of a double coset")
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--key", required=True, help="a1,..,an,d1,..,dn")
    s.add_argument("--no-closure", action="store_true", help="skip the closure check")
    s.set_defaults(func=cmd_cosets)
    s = hsub.add_parser("product", parents=[common], help="product of two Hecke elements")
    s.add_argument("--lhs", required=True)
    s.add_argument("--rhs", required=True)
    s.set_defaults(func=cmd_product)
    s = hsub.add_parser("phi", parents=[common], help="image under the phi_k homomorphism")
    s.add_argument("--k", type=_int, required=True)
    s.add_argument("--in", dest="infile", required=True)
    s.set_defaults(func=cmd_hecke_phi)

    fm = sub.add_parser("forms", help="Fourier expansions")
    fsub = fm.add_subparsers(dest="forms_command", required=True, parser_class=_Parser)
    s = fsub.add_parser("eisenstein", parents=[common], help="elliptic Eisenstein q-expansion")
    s.add_argument("--k", type=_int, required=True)
    s.add_argument("--terms", type=_positive, default=30)
    s.add_argument("--m", type=_positive, default=1)
    s.set_defaults(func=cmd_eisenstein)
    s = fsub.add_parser("delta", parents=[common], help="q-expansion of the weight 12 cusp form")
    s.add_argument("--terms", type=_positive, default=30)
    s.add_argument("--m", type=_positive, default=1)
    s.set_defaults(func=cmd_delta)
    s = fsub.add_parser("act", parents=[common], help="apply a coset set or Hecke element")
    s.add_argument("--form", required=True)
    s.add_argument("--coset", required=True, help="coset JSON or Hecke element JSON")
    s.add_argument("--k", type=_int, default=None)
    s.set_defaults(func=cmd_act)
    s = fsub.add_parser("phi", parents=[common], help="Siegel Phi operator")
    s.add_argument("--form", required=True)
    s.set_defaults(func=cmd_forms_phi)
    s = fsub.add_parser("cusp-test", parents=[common], help="direct and twisted-Phi cusp tests")
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--form", required=True)
    s.add_argument("--avoid-p", type=_positive, default=None)
    s.set_defaults(func=cmd_cusp_test)

    s = sub.add_parser("eigen", parents=[common], help="eigenvalue of f under T_n(p)")
    s.add_argument("--form", required=True)
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--k", type=_int, default=None)
    s.set_defaults(func=cmd_eigen)

    s = sub.add_parser("certify", parents=[common], help="Eisenstein certificate")
    s.add_argument("--form", required=True)
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--k", type=_int, required=True)
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--terms", type=_positive, default=None, help="use only q^0 .. q^(terms-1)")
    s.set_defaults(func=cmd_certify)
    return p


# --------------------------------------------------------------------------
# commands: each returns (json payload, human-readable text)


def cmd_field(args):
    from .field import classify_prime
    from sympy import primerange

    K = make_field(args.m)
    primes = {str(p): classify_prime(K, p) for p in primerange(2, args.primes + 1)}
    omega = "(1+sqrt(-m))/2" if K.omega_kind == "half" else "sqrt(-m)"
    data = {"m": K.m, "d": K.d, "omega": omega, "h": K.h, "primes": primes}
    text = f"Q(sqrt(-{K.m})): d_K = {K.d}, omega = {omega}, h = {K.h}\n" + "\n".join(
        f"  {p}: {c}" for p, c in primes.items())
    return data, text


def cmd_classgroup(args):
    K = make_field(args.m)
    reps = class_representatives(K, args.avoid_p)
    data = {
        "m": K.m,
        "h": reps.h,
        "forms": [list(f.as_tuple()) for _, f in reps.reps],
        "reps": [u.to_json() for u in reps.u],
        "N": reps.N,
        "avoid_p": args.avoid_p,
    }
    lines = [f"h = {reps.h}, N = {reps.N}"]
    lines += [f"  form {f.as_tuple()}: u = {u!r}" for u, f in reps.reps]
    return data, "\n".join(lines)


def cmd_find_prime(args):
    K = make_field(args.m)
    p = find_inert_prime(K, args.modulus, args.search_bound)
    data = {"m": K.m, "modulus": args.modulus, "p": p, "hypotheses": inert_search_hypotheses(K, args.modulus)}
    return data, str(p)


def cmd_cosets(args):
    K = make_field(args.m)
    key = key_from_json(args.n, args.key)
    cs = enumerate_right_cosets(K, key, args.cap, not args.no_closure, args.workers)
    data = cosets_to_json(cs)
    return data, f"{len(cs)} right cosets in {key!r} ({cs.candidates} candidates)"


def cmd_product(args):
    e1 = element_from_json(load_json(args.lhs))
    e2 = element_from_json(load_json(args.rhs))
    prod = hecke_product(e1, e2, args.cap)
    return element_to_json(prod), repr(prod)


def cmd_hecke_phi(args):
    e = element_from_json(load_json(args.infile))
    total = None
    for key, c in e.sorted_terms():
        scalar, img = phi_map(e.K, key, args.k, args.cap)
        part = img.scale(scalar * c)
        total = part if total is None else total + part
    if len(total.terms) == 1:
        (key, c), = total.terms.items()
        scalar, element = c, HeckeElement.from_key(e.K, key)
    else:
        scalar, element = Fraction(1), total
    data = {"k": args.k, "scalar": frac_str(scalar), "element": element_to_json(element)}
    return data, f"{scalar} * {element!r}"


def _load_form(path) -> FourierExpansion:
    return FourierExpansion.from_json(load_json(path))


def cmd_eisenstein(args):
    f = eisenstein_q_expansion(args.k, args.terms, make_field(args.m))
    return f.to_json(), " ".join(str(c) for c in f.q_coefficients()[:8]) + " ..."


def cmd_delta(args):
    f = delta_q_expansion(args.terms, make_field(args.m))
    return f.to_json(), " ".join(str(c) for c in f.q_coefficients()[:8]) + " ..."


def cmd_act(args):
    f = _load_form(args.form)
    obj = load_json(args.coset)
    target = element_from_json(obj) if "terms" in obj else cosets_from_json(obj)
    if target.K.m != f.K.m:
        if f.n > 1:
            raise DomainError("form and coset set live over different fields")
        f = f.with_field(target.K)
    g = hecke_act(f, target, args.k, args.cap)
    return g.to_json(), f"{len(g.coeffs)} coefficients certified up to trace {g.trunc}"


def cmd_forms_phi(args):
    g = siegel_phi(_load_form(args.form))
    return g.to_json(), f"degree {g.n}, {len(g.coeffs)} coefficients"


def cmd_cusp_test(args):
    K = make_field(args.m)
    f = _load_form(args.form)
    if f.K.m != K.m:
        f = f.with_field(K)
    avoid = args.avoid_p if args.avoid_p is not None else default_avoid_prime(K)
    report = cusp_tests(f, class_representatives(K, avoid), strict=False)
    data = report.to_json()
    data["cusp"] = report.direct and report.twisted
    return data, f"direct: {report.direct}, twisted Phi: {report.twisted}"


def cmd_eigen(args):
    f = _load_form(args.form)
    rep = eigen_check(f, HeckeElement.from_key(f.K, _t_key(f.n, args.p, f.K)), args.k)
    return rep.to_json(), f"lambda = {rep.value}"


def _t_key(n, p, K):
    from .field import is_inert
    from .hecke import t_key

    if not is_inert(K, p):
        raise ScopeError(f"{p} is not inert in Q(sqrt(-{K.m}))")
    return t_key(n, p)


def cmd_certify(args):
    K = make_field(args.m)
    f = _load_form(args.form)
    if args.terms is not None:
        f = f.restrict(args.terms - 1)
    cert = certify_eisenstein(f, K, args.k, args.p)
    lines = [f"{'pass' if h.ok else 'FAIL'}  {h.name}: {h.witness}" for h in cert.hypotheses]
    lines.append(f"conclusion: {cert.conclusion}")
    return cert.to_json(), "\n".join(lines)


# --------------------------------------------------------------------------


def _exit_code(exc: HeckeError) -> int:
    if isinstance(exc, ScopeError):
        return 2
    if isinstance(exc, ConsistencyError):
        return 3
    return 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        settings = dict(GLOBAL_DEFAULTS, json=False)
        if args.config:
            settings.update(read_config(args.config))
        for name in ("seed", "cap", "workers", "json"):
            if getattr(args, name, None) is not None:
                settings[name] = getattr(args, name)
        for name, value in settings.items():
            setattr(args, name, value)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        data, text = args.func(args)
        data = dict(data)
        data["seed"] = args.seed
        if args.out:
            atomic_write(args.out, dumps(data))
        if args.json:
            sys.stdout.write(dumps(data))
        else:
            print(text)
        return 0
    except HeckeError as exc:
        err = {"error": exc.code, "message": str(exc)}
        hyp = getattr(exc, "hypothesis", None)
        if hyp:
            err["hypothesis"] = hyp
        sys.stderr.write(json.dumps(err) + "\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
