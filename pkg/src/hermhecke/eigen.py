"""Hecke eigenvalues, the cusp-form eigenvalue bound and the Eisenstein certificate."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional

from .errors import HeckeError, ScopeError
from .field import QuadField, chi, classify_prime, frac_str, is_inert
from .fourier import FourierExpansion, HermIndex, eisenstein_q_expansion, hecke_act
from .hecke import HeckeElement, t_key
from .ideals import class_representatives, default_avoid_prime, inert_primes


def eigenvalue_formula(n: int, k: int, p: int, K: QuadField | None = None) -> Fraction:
    """prod_{j=1}^n (p^(2j-1-k) + 1), the T_n(p) eigenvalue of E_k^(n)."""
    if K is not None and not is_inert(K, p):
        raise ScopeError(f"{p} is not inert in Q(sqrt(-{K.m}))")
    out = Fraction(1)
    for j in range(1, n + 1):
        out *= Fraction(p) ** (2 * j - 1 - k) + 1
    return out


def coset_count(n: int, p: int) -> int:
    out = 1
    for j in range(1, n + 1):
        out *= p ** (2 * j - 1) + 1
    return out


def cusp_bound_squared(n: int, k: int, p: int) -> Fraction:
    """(p^(-kn/2) prod (p^(2j-1)+1))^2, always rational."""
    return Fraction(p) ** (-k * n) * coset_count(n, p) ** 2


def cusp_bound(n: int, k: int, p: int):
    """p^(-kn/2) prod_{j=1}^n (p^(2j-1)+1).

    For odd k*n the value is irrational; the pair (p^(-kn), prod^2) is
    returned instead, whose product is the squared bound.
    """
    if (k * n) % 2:
        return Fraction(p) ** (-k * n), Fraction(coset_count(n, p) ** 2)
    return Fraction(p) ** (-(k * n) // 2) * coset_count(n, p)


def within_cusp_bound(lam, n: int, k: int, p: int) -> bool:
    """|lam| <= cusp bound, compared through squares."""
    lam = Fraction(lam)
    return lam * lam <= cusp_bound_squared(n, k, p)


def degree_chain(n: int, k: int, p: int) -> list[dict]:
    """For j = 1..n: cusp bound at degree n-j+1 stays below 1, the Eisenstein eigenvalue above 1."""
    rows = []
    for j in range(1, n + 1):
        m = n - j + 1
        bound_sq = cusp_bound_squared(m, k, p)
        lam = eigenvalue_formula(m, k, p)
        rows.append({
            "j": j,
            "degree": m,
            "cusp_bound_squared": bound_sq,
            "eigenvalue": lam,
            "ok": bound_sq < 1 < lam,
        })
    return rows


def admissible_primes(K: QuadField, n: int, count: int, search_bound: int = 10**6) -> list[int]:
    """The first ``count`` inert primes p = 1 mod N^(2n-2)."""
    modulus = class_N(K) ** (2 * n - 2)
    out = []
    for p in inert_primes(K, modulus, search_bound):
        out.append(p)
        if len(out) == count:
            break
    return out


def class_N(K: QuadField) -> int:
    return class_representatives(K, default_avoid_prime(K)).N


# --------------------------------------------------------------------------
# eigen relation on truncated expansions


@dataclass
class EigenReport:
    lam: Optional[Fraction]
    consistent: bool
    checked_indices: int
    certified_bound: int
    mismatch: Optional[HermIndex] = None

    @property
    def value(self):
        return self.lam if self.consistent else "inconsistent"

    def to_json(self) -> dict:
        return {
            "lambda": frac_str(self.lam) if self.consistent and self.lam is not None else "inconsistent",
            "checked_indices": self.checked_indices,
            "certified_bound": self.certified_bound,
        }


def eigen_check(f: FourierExpansion, e: HeckeElement, k: int | None = None) -> EigenReport:
    """Solve g = lambda*f for g = f|_k e and verify it on every certified index."""
    k = f.k if k is None else k
    g = hecke_act(f, e, k)
    bound = min(g.trunc, f.trunc)
    idx = sorted(
        {T for T in list(f.coeffs) + list(g.coeffs) if T.trace() <= bound},
        key=HermIndex.sort_key,
    )
    pivot = next((T for T in idx if f[T] != 0), None)
    if pivot is None:
        raise HeckeError("f vanishes on the certified range; no eigenvalue can be read off")
    lam = g[pivot] / f[pivot]
    for T in idx:
        if g[T] != lam * f[T]:
            return EigenReport(None, False, len(idx), bound, T)
    return EigenReport(lam, True, len(idx), bound)


# --------------------------------------------------------------------------
# the Eisenstein certificate


@dataclass
class Hypothesis:
    name: str
    ok: bool
    witness: str

    def to_json(self) -> dict:
        return {"name": self.name, "pass": self.ok, "witness": self.witness}


@dataclass
class EisensteinCertificate:
    hypotheses: list = dc_field(default_factory=list)
    eigen: Optional[EigenReport] = None

    @property
    def conclusion(self) -> bool:
        return bool(self.hypotheses) and all(h.ok for h in self.hypotheses)

    @property
    def failed(self) -> list[str]:
        return [h.name for h in self.hypotheses if not h.ok]

    @property
    def first_failure(self) -> Optional[str]:
        failed = self.failed
        return failed[0] if failed else None

    def get(self, name: str) -> Hypothesis:
        for h in self.hypotheses:
            if h.name == name:
                return h
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "conclusion": self.conclusion,
            "eigen": None if self.eigen is None else self.eigen.to_json(),
        }


H_WEIGHT = "k > 2n"
H_DISC = "d_K not in {-3,-4}"
H_INERT = "p inert"
H_CONGRUENCE = "p = 1 mod N^(2n-2)"
H_CONSTANT = "alpha_f(0) = 1"
H_EIGEN = "f|T_n(p) = lambda f with lambda = prod (p^(2j-1-k)+1)"
H_QEXP = "agrees with the E_k q-expansion"


def certify_eisenstein(f: FourierExpansion, K: QuadField, k: int, p: int,
                       reps=None) -> EisensteinCertificate:
    """Check the hypotheses of the Eisenstein characterization on a truncated f.

    Nothing is raised for a failing hypothesis; every check is recorded.
    """
    n = f.n
    cert = EisensteinCertificate()
    add = lambda name, ok, witness: cert.hypotheses.append(Hypothesis(name, bool(ok), witness))

    if f.K.m != K.m:
        f = f.with_field(K)
    f = f.with_weight(k)

    add(H_WEIGHT, k > 2 * n, f"k={k}, n={n}")
    add(H_DISC, K.d not in (-3, -4), f"d_K={K.d}")
    try:
        kind = classify_prime(K, p)
    except HeckeError as exc:
        kind = f"invalid ({exc})"
    inert = kind == "inert"
    add(H_INERT, inert, f"p={p} is {kind}")

    if reps is None:
        reps = class_representatives(K, default_avoid_prime(K))
    modulus = reps.N ** (2 * n - 2)
    add(H_CONGRUENCE, p % modulus == 1 % modulus, f"N={reps.N}, p mod {modulus} = {p % modulus}")

    c0 = f.constant_term()
    add(H_CONSTANT, c0 == 1, f"alpha_f(0)={frac_str(c0)}")

    expected = eigenvalue_formula(n, k, p)
    if not inert:
        add(H_EIGEN, False, "not evaluated: p is not inert")
    else:
        try:
            rep = eigen_check(f, HeckeElement.from_key(K, t_key(n, p)), k)
        except HeckeError as exc:
            add(H_EIGEN, False, f"not evaluated: {exc}")
        else:
            cert.eigen = rep
            if not rep.consistent:
                add(H_EIGEN, False, f"no common eigenvalue; first mismatch at {rep.mismatch}")
            else:
                add(H_EIGEN, rep.lam == expected,
                    f"lambda={frac_str(rep.lam)}, expected {frac_str(expected)}, "
                    f"{rep.checked_indices} indices up to trace {rep.certified_bound}")

    if n == 1:
        if k >= 4 and k % 2 == 0:
            ref = eisenstein_q_expansion(k, f.trunc + 1, K)
            bad = next((t for t, (x, y) in enumerate(zip(f.q_coefficients(), ref.q_coefficients()))
                        if x != y), None)
            add(H_QEXP, bad is None,
                "all coefficients agree" if bad is None else f"first difference at q^{bad}")
        else:
            add(H_QEXP, False, f"no Eisenstein series of weight {k}")
    return cert
