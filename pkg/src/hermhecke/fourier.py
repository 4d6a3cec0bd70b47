"""Formal Fourier expansions indexed by Hermitian matrices and the Hecke action on them.

An index T is a Hermitian n x n matrix over K with rational diagonal.  It is
stored by its diagonal and by mu_ij = t_ij * sqrt(d_K) for i < j, so that
T lies in Lambda_n exactly when the diagonal is integral and every mu_ij lies
in O_K.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product
from math import floor, gcd, isqrt
from typing import Iterable, Iterator, Mapping

from sympy import bernoulli, divisor_sigma

from .cyclo import CycSum
from .errors import ConsistencyError, DomainError
from .field import QuadElt, QuadField, elem_from_json, frac_str, make_field, parse_frac
from .hecke import HeckeElement, RightCosetSet, enumerate_right_cosets
from .ideals import ClassRepSet, fractional_ideal_class_index, reduced_forms
from .matrices import MatK

log = logging.getLogger(__name__)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# --------------------------------------------------------------------------
# indices


@dataclass(frozen=True)
class HermIndex:
    """A Hermitian index matrix: diag t_jj (rational), mu_ij = t_ij*sqrt(d_K) for i < j."""

    diag: tuple
    mu: tuple

    @property
    def n(self) -> int:
        return len(self.diag)

    @classmethod
    def zero(cls, K: QuadField, n: int) -> HermIndex:
        return cls(tuple(Fraction(0) for _ in range(n)), tuple(K.zero for _ in range(n * (n - 1) // 2)))

    @classmethod
    def from_matrix(cls, T: MatK) -> HermIndex:
        n = T.nrows
        sd = T.K.sqrt_d
        diag = []
        for i in range(n):
            x = T[i, i]
            if not x.is_rational():
                raise DomainError("index matrix must have a rational diagonal")
            diag.append(x.to_fraction())
        mu = []
        for i, j in combinations(range(n), 2):
            if T[j, i] != T[i, j].conj():
                raise DomainError("index matrix must be Hermitian")
            mu.append(T[i, j] * sd)
        return cls(tuple(diag), tuple(mu))

    @classmethod
    def from_entries(cls, K: QuadField, diag, upper=()) -> HermIndex:
        """diag rationals, upper = off-diagonal entries t_ij (as field elements)."""
        sd = K.sqrt_d
        n = len(diag)
        upper = list(upper)
        if not upper:
            upper = [0] * (n * (n - 1) // 2)
        if len(upper) != n * (n - 1) // 2:
            raise DomainError("wrong number of off-diagonal entries")
        return cls(tuple(Fraction(x) for x in diag), tuple(K.coerce(t) * sd for t in upper))

    def matrix(self, K: QuadField) -> MatK:
        n = self.n
        rows = [[K.zero] * n for _ in range(n)]
        inv = K.sqrt_d.inverse()
        for i in range(n):
            rows[i][i] = K.coerce(self.diag[i])
        for (i, j), m in zip(combinations(range(n), 2), self.mu):
            t = m * inv
            rows[i][j] = t
            rows[j][i] = t.conj()
        return MatK(K, rows)

    def trace(self) -> Fraction:
        return sum(self.diag, Fraction(0))

    def in_lambda(self) -> bool:
        return all(x.denominator == 1 for x in self.diag) and all(m.is_integral() for m in self.mu)

    def denominator(self) -> int:
        """Least s >= 1 with s*T in Lambda_n."""
        s = 1
        for x in self.diag:
            s = _lcm(s, x.denominator)
        for m in self.mu:
            s = _lcm(s, m.den)
        return s

    def sort_key(self):
        return (self.trace(), self.diag, tuple((m.a, m.b, m.den) for m in self.mu))

    def is_last_zero(self) -> bool:
        """Last row and column vanish."""
        n = self.n
        if n == 0 or self.diag[-1] != 0:
            return False
        return all(m.is_zero() for (i, j), m in zip(combinations(range(n), 2), self.mu) if j == n - 1)

    def drop_last(self) -> HermIndex:
        n = self.n
        mu = tuple(m for (i, j), m in zip(combinations(range(n), 2), self.mu) if j < n - 1)
        return HermIndex(self.diag[:-1], mu)

    def to_json(self, scale: int = 1) -> dict:
        diag = []
        for x in self.diag:
            y = x * scale
            if y.denominator != 1:
                raise DomainError(f"scale {scale} does not clear the diagonal")
            diag.append(y.numerator)
        upper = []
        for m in self.mu:
            y = m * scale
            if not y.is_integral():
                raise DomainError(f"scale {scale} does not clear off-diagonal entries")
            upper.append([y.a, y.b])
        return {"diag": diag, "upper": upper}

    @classmethod
    def from_json(cls, K: QuadField, obj, scale: int = 1) -> HermIndex:
        diag = tuple(Fraction(int(x), scale) for x in obj["diag"])
        mu = tuple(elem_from_json(K, u) * Fraction(1, scale) for u in obj.get("upper", []))
        n = len(diag)
        if len(mu) != n * (n - 1) // 2:
            raise DomainError("wrong number of off-diagonal entries")
        return cls(diag, mu)


# LambdaIndex is the same type restricted to Lambda_n
LambdaIndex = HermIndex


def _principal_minors(T: MatK) -> dict:
    n = T.nrows
    out = {}
    for r in range(1, n + 1):
        for S in combinations(range(n), r):
            out[S] = T.sub(S, S).det().to_fraction()
    return out


def psd_rank(T) -> tuple[bool, bool, int]:
    """(positive semidefinite, positive definite, rank) of a Hermitian index."""
    if isinstance(T, HermIndex):
        if T.n == 0:
            return True, True, 0
        raise TypeError("pass the matrix, or use index_psd_rank(K, T)")
    n = T.nrows
    if n == 0:
        return True, True, 0
    minors = _principal_minors(T)
    psd = all(v >= 0 for v in minors.values())
    pd = all(minors[tuple(range(r))] > 0 for r in range(1, n + 1))
    rank = 0
    for S, v in minors.items():
        if v != 0:
            rank = max(rank, len(S))
    return psd, pd, rank


def index_psd_rank(K: QuadField, T: HermIndex) -> tuple[bool, bool, int]:
    if T.n == 0:
        return True, True, 0
    return psd_rank(T.matrix(K))


def _elements_of_norm_at_most(K: QuadField, bound) -> list[QuadElt]:
    """All x in O_K with N(x) <= bound."""
    bound = Fraction(bound)
    if bound < 0:
        return []
    out = []
    D = -K.d
    bmax = isqrt(floor(4 * bound / D)) + 1
    amax = isqrt(floor(bound)) + bmax + 1
    for b in range(-bmax, bmax + 1):
        for a in range(-amax, amax + 1):
            x = K(a, b)
            if x.norm() <= bound:
                out.append(x)
    return out


def lambda_indices(K: QuadField, n: int, trace_bound: int, psd: bool = True) -> list[HermIndex]:
    """Positive semidefinite T in Lambda_n with trace(T) <= trace_bound, sorted."""
    out = []
    if n == 0:
        return [HermIndex((), ())]
    D = -K.d
    pairs = list(combinations(range(n), 2))
    for diag in product(range(trace_bound + 1), repeat=n):
        if sum(diag) > trace_bound:
            continue
        pools = [_elements_of_norm_at_most(K, D * diag[i] * diag[j]) for i, j in pairs]
        for mus in product(*pools):
            idx = HermIndex(tuple(Fraction(x) for x in diag), tuple(mus))
            if n > 2 or not psd:
                ok = index_psd_rank(K, idx)[0]
                if psd and not ok:
                    continue
            out.append(idx)
    out.sort(key=HermIndex.sort_key)
    return out


# --------------------------------------------------------------------------
# expansions


@dataclass
class FourierExpansion:
    """sum_T alpha(T) e(trace(T Z)); coefficients certified complete for trace(T) <= trunc."""

    K: QuadField
    n: int
    k: int
    coeffs: dict = dc_field(default_factory=dict)
    trunc: int = 0
    scale: int | None = None
    intermediate: bool = False

    def __post_init__(self):
        clean = {}
        for T, c in self.coeffs.items():
            if T.n != self.n:
                raise DomainError(f"index of size {T.n} in a degree-{self.n} expansion")
            if isinstance(c, QuadElt) and c.is_rational():
                c = c.to_fraction()
            elif isinstance(c, CycSum) and c.is_rational():
                c = c.to_fraction()
            elif isinstance(c, int):
                c = Fraction(c)
            if c == 0:
                continue
            if T.trace() > self.trunc:
                continue
            clean[T] = c
        self.coeffs = clean
        s = 1
        for T in clean:
            s = _lcm(s, T.denominator())
        if self.scale is None:
            self.scale = s
        elif self.scale % s:
            raise DomainError(f"declared scale {self.scale} does not clear the support")

    def __getitem__(self, T: HermIndex):
        return self.coeffs.get(T, Fraction(0))

    def constant_term(self):
        return self[HermIndex.zero(self.K, self.n)]

    def is_finalized(self) -> bool:
        return not self.intermediate and all(isinstance(c, Fraction) for c in self.coeffs.values())

    def support(self) -> list[HermIndex]:
        return sorted(self.coeffs, key=HermIndex.sort_key)

    def restrict(self, bound: int) -> FourierExpansion:
        bound = min(bound, self.trunc)
        return FourierExpansion(self.K, self.n, self.k,
                                {T: c for T, c in self.coeffs.items() if T.trace() <= bound},
                                bound, None, self.intermediate)

    def scaled(self, s) -> FourierExpansion:
        return FourierExpansion(self.K, self.n, self.k,
                                {T: c * s for T, c in self.coeffs.items()}, self.trunc, None,
                                self.intermediate)

    def __add__(self, other: FourierExpansion) -> FourierExpansion:
        if (self.K.m, self.n, self.k) != (other.K.m, other.n, other.k):
            raise DomainError("adding expansions of different type")
        coeffs = dict(self.coeffs)
        for T, c in other.coeffs.items():
            coeffs[T] = coeffs.get(T, 0) + c
        return FourierExpansion(self.K, self.n, self.k, coeffs, min(self.trunc, other.trunc),
                                None, self.intermediate or other.intermediate)

    def __eq__(self, other):
        return (
            isinstance(other, FourierExpansion)
            and (self.K.m, self.n, self.k, self.trunc) == (other.K.m, other.n, other.k, other.trunc)
            and self.coeffs == other.coeffs
        )

    def with_field(self, K: QuadField) -> FourierExpansion:
        """Move a degree-0/1 expansion to another field (the indices do not involve K)."""
        if self.n > 1 and K.m != self.K.m:
            raise DomainError("only degree <= 1 expansions are field independent")
        return FourierExpansion(K, self.n, self.k, dict(self.coeffs), self.trunc, self.scale,
                                self.intermediate)

    def with_weight(self, k: int) -> FourierExpansion:
        return FourierExpansion(self.K, self.n, k, dict(self.coeffs), self.trunc, self.scale,
                                self.intermediate)

    def q_coefficients(self) -> list[Fraction]:
        """alpha(0), alpha(1), ..., alpha(trunc) for n = 1."""
        if self.n != 1:
            raise DomainError("q-coefficients only exist for degree 1")
        return [self[HermIndex((Fraction(t),), ())] for t in range(self.trunc + 1)]

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        if not self.is_finalized():
            raise DomainError("only finalized expansions are serialized")
        return {
            "m": self.K.m,
            "n": self.n,
            "k": self.k,
            "scale": self.scale,
            "trunc": self.trunc,
            "coeffs": [
                {"T": T.to_json(self.scale), "c": frac_str(self.coeffs[T])} for T in self.support()
            ],
        }

    @classmethod
    def from_json(cls, obj) -> FourierExpansion:
        try:
            K = make_field(int(obj["m"]))
            n, k = int(obj["n"]), int(obj["k"])
            scale, trunc = int(obj.get("scale", 1)), int(obj["trunc"])
            coeffs = {}
            for entry in obj["coeffs"]:
                T = HermIndex.from_json(K, entry["T"], scale)
                coeffs[T] = coeffs.get(T, 0) + parse_frac(entry["c"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed expansion JSON: {exc}") from exc
        return cls(K, n, k, coeffs, trunc, scale)


def expansion_from_q_series(coeffs: Iterable, k: int, K: QuadField | None = None) -> FourierExpansion:
    K = K or make_field(1)
    coeffs = list(coeffs)
    return FourierExpansion(
        K, 1, k, {HermIndex((Fraction(t),), ()): Fraction(c) for t, c in enumerate(coeffs)},
        len(coeffs) - 1,
    )


def eisenstein_q_expansion(k: int, terms: int, K: QuadField | None = None) -> FourierExpansion:
    """Normalized elliptic Eisenstein series 1 - (2k/B_k) sum sigma_{k-1}(t) q^t, t < terms."""
    if k < 4 or k % 2:
        raise DomainError(f"weight must be even and >= 4, got {k}")
    if terms < 1:
        raise DomainError("need at least one term")
    b = bernoulli(k)
    factor = -Fraction(2 * k) / Fraction(int(b.p), int(b.q))
    coeffs = [Fraction(1)] + [factor * int(divisor_sigma(t, k - 1)) for t in range(1, terms)]
    return expansion_from_q_series(coeffs, k, K)


def delta_q_expansion(terms: int, K: QuadField | None = None) -> FourierExpansion:
    """q * prod (1 - q^m)^24, truncated to q^0 .. q^(terms-1)."""
    poly = [0] * terms
    if terms > 1:
        poly[1] = 1
    for m in range(1, terms):
        for _ in range(24):
            for i in range(terms - 1, m - 1, -1):
                poly[i] -= poly[i - m]
    return expansion_from_q_series(poly, 12, K)


# --------------------------------------------------------------------------
# slash operators


@dataclass
class _CosetData:
    AH: MatK
    A: MatK
    X: MatK
    weight: Fraction
    q: int
    gram: MatK


def _coset_data(L: MatK, k: int) -> _CosetData:
    n = L.nrows // 2
    A, B, C, D = L.blocks()
    if not C.is_zero() or any(not D[i, j].is_zero() for i in range(n) for j in range(i)):
        raise DomainError("coset representative must have the shape (A B; 0 D), D upper triangular")
    detD = D.det()
    if not detD.is_rational() or detD.to_fraction() <= 0:
        raise DomainError("det D must be a positive rational")
    AHD = A.H * D
    q = AHD[0, 0]
    if AHD != MatK.identity(L.K, n) * q or not q.is_rational():
        raise DomainError("representative is not a unitary similitude")
    return _CosetData(A.H, A, B * D.inverse(), detD.to_fraction() ** (-k),
                      int(q.to_fraction()), D.H * D)


def _max_eigen_at_most(G: MatK, c: Fraction) -> bool:
    """lambda_max(G) <= c for Hermitian G, decided exactly via cI - G >= 0."""
    n = G.nrows
    return psd_rank(MatK.identity(G.K, n) * c - G)[0]


def _trace_bound(trunc: int, scale: int, G: MatK) -> int:
    """Largest b >= 0 with b * lambda_max(G) <= trunc * scale."""
    top = Fraction(trunc * scale)
    hi = floor(top / max(G[i, i].to_fraction() for i in range(G.nrows)))
    lo = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _max_eigen_at_most(G, top / mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _image_bound(trunc: int, data: Iterable[_CosetData]) -> int:
    """Largest b with trace(T') <= b  =>  trace of every preimage D T' D^H / q <= trunc."""
    b = None
    seen = {}
    for c in data:
        v = seen.get(c.gram)
        if v is None:
            v = seen[c.gram] = _trace_bound(trunc, c.q, c.gram)
        b = v if b is None else min(b, v)
    return trunc if b is None else b


def _index_matrices(f: FourierExpansion) -> list:
    return [(T.matrix(f.K), alpha) for T, alpha in f.coeffs.items()]


def _slash_terms(mats: list, c: _CosetData, acc: dict) -> None:
    """acc[T'][phase] += coefficient for one representative."""
    inv_q = Fraction(1, c.q)
    for M, alpha in mats:
        img = HermIndex.from_matrix((c.AH * M * c.A) * inv_q)
        tr = _trace(M * c.X)
        if not tr.is_rational():
            raise ConsistencyError("phase trace(T B D^-1) is not rational")
        phase = tr.to_fraction() % 1
        slot = acc.setdefault(img, {})
        slot[phase] = slot.get(phase, 0) + alpha * c.weight


def _trace(M: MatK) -> QuadElt:
    out = M.K.zero
    for i in range(M.nrows):
        out = out + M[i, i]
    return out


def slash_coset(f: FourierExpansion, L: MatK, k: int | None = None) -> FourierExpansion:
    """f |_k L for one triangular representative; coefficients are CycSums."""
    k = f.k if k is None else k
    if not f.is_finalized():
        raise DomainError("slash_coset needs a finalized expansion")
    c = _coset_data(L, k)
    acc: dict = {}
    _slash_terms(_index_matrices(f), c, acc)
    bound = _image_bound(f.trunc, [c])
    coeffs = {T: CycSum.from_phases(ph) for T, ph in acc.items()}
    return FourierExpansion(f.K, f.n, k, coeffs, bound, None, intermediate=True)


def _act_cosets(f: FourierExpansion, reps: Iterable[MatK], k: int, check: bool = True):
    data = [_coset_data(L, k) for L in reps]
    acc: dict = {}
    mats = _index_matrices(f)
    for c in data:
        _slash_terms(mats, c, acc)
    coeffs = {}
    for T in sorted(acc, key=HermIndex.sort_key):
        val = CycSum.from_phases(acc[T])
        if not val.is_rational():
            raise ConsistencyError(f"coefficient at {T} is not rational: {val!r}")
        x = val.to_fraction()
        if x == 0:
            continue
        if check and not T.in_lambda():
            raise ConsistencyError(f"surviving index {T} lies outside Lambda_n")
        coeffs[T] = x
    return coeffs, _image_bound(f.trunc, data)


def hecke_act(f: FourierExpansion, e, k: int | None = None, cap: int | None = None) -> FourierExpansion:
    """f |_k e for a HeckeElement or RightCosetSet e (sum over right cosets)."""
    k = f.k if k is None else k
    if not f.is_finalized():
        raise DomainError("hecke_act needs a finalized expansion")
    if isinstance(e, RightCosetSet):
        parts = [(Fraction(1), e)]
    elif isinstance(e, HeckeElement):
        if e.K.m != f.K.m or e.n != f.n:
            raise DomainError("Hecke element and expansion differ in field or degree")
        kw = {} if cap is None else {"cap": cap}
        parts = [(c, enumerate_right_cosets(f.K, key, **kw)) for key, c in e.sorted_terms()]
    else:
        raise TypeError("expected a HeckeElement or RightCosetSet")
    total: dict = defaultdict(Fraction)
    bound = f.trunc
    for c, cs in parts:
        coeffs, b = _act_cosets(f, cs.reps, k)
        bound = min(bound, b)
        for T, x in coeffs.items():
            total[T] += c * x
    return FourierExpansion(f.K, f.n, k, dict(total), bound)


def siegel_phi(f: FourierExpansion) -> FourierExpansion:
    """Keep the indices with vanishing last row and column; degree drops by one."""
    if f.n < 1:
        raise DomainError("Phi needs degree >= 1")
    coeffs = {T.drop_last(): c for T, c in f.coeffs.items() if T.is_last_zero()}
    return FourierExpansion(f.K, f.n - 1, f.k, coeffs, f.trunc, None, f.intermediate)


def slash_RU(f: FourierExpansion, U: MatK, k: int | None = None) -> FourierExpansion:
    """f |_k R_U with R_U = (conj(U)^tr 0; 0 U^-1): T -> U T conj(U)^tr, times det(U)^k."""
    k = f.k if k is None else k
    if U.nrows != f.n or U.ncols != f.n:
        raise DomainError("U has the wrong size")
    det = U.det()
    if det.is_zero():
        raise DomainError("U is singular")
    factor = det ** k
    UH = U.H
    coeffs = {}
    for T, c in f.coeffs.items():
        img = HermIndex.from_matrix(U * T.matrix(f.K) * UH)
        val = factor * c
        coeffs[img] = coeffs.get(img, 0) + val
    # preimage U^-1 T' U^-H has trace <= lambda_max(U^-H U^-1) trace(T')
    Uinv = U.inverse()
    bound = _trace_bound(f.trunc, 1, Uinv.H * Uinv) if f.n else f.trunc
    return FourierExpansion(f.K, f.n, k, coeffs, bound, None, f.intermediate)


def twist_matrix(K: QuadField, n: int, u: QuadElt) -> MatK:
    """Lower unitriangular U_j with conj(u_j) in position (n, n-1)."""
    U = [[K.one if i == j else K.zero for j in range(n)] for i in range(n)]
    if n >= 2:
        U[n - 1][n - 2] = K.coerce(u).conj()
    return MatK(K, U)


# --------------------------------------------------------------------------
# cusp diagnostics


@dataclass
class CuspReport:
    """Both cusp criteria on a truncated expansion.

    ``certified_bound`` is the largest trace b such that every index of trace
    at most b is still visible to the twisted test after R_{U_j} and Phi.
    """

    direct: bool
    twisted: bool
    per_class: list
    certified_bound: int
    witness: object = None

    @property
    def agree(self) -> bool:
        if self.twisted == self.direct:
            return True
        if self.direct:
            # a boundary coefficient after the twist always comes from a
            # singular coefficient of f
            return False
        return self.witness.trace() > self.certified_bound

    def to_json(self) -> dict:
        return {
            "direct": self.direct,
            "twisted": self.twisted,
            "agree": self.agree,
            "per_class": self.per_class,
            "certified_bound": self.certified_bound,
            "witness": None if self.witness is None else self.witness.to_json(_witness_scale(self.witness)),
        }


def _witness_scale(T: HermIndex) -> int:
    return T.denominator()


def cusp_tests(f: FourierExpansion, reps: ClassRepSet, strict: bool = True) -> CuspReport:
    """Direct positive-definiteness test and the R_{U_j} + Phi test, j = 1..h.

    The twisted test presumes the unimodular invariance of a genuine form; on
    an arbitrary formal expansion the two may disagree, which ``strict`` turns
    into a ConsistencyError.
    """
    if not f.is_finalized():
        raise DomainError("cusp_tests needs a finalized expansion")
    K = f.K
    witness = None
    for T in f.support():
        if not index_psd_rank(K, T)[1]:
            witness = T
            break
    direct = witness is None
    per_class = []
    bound = f.trunc
    if f.n == 1:
        # U_j = (1) for every j, so every class gives alpha_f(0)
        g = siegel_phi(f)
        per_class = [{"j": j + 1, "zero": not g.coeffs} for j in range(reps.h)]
    else:
        for j, u in enumerate(reps.u, 1):
            U = twist_matrix(K, f.n, u)
            g = siegel_phi(slash_RU(f, U))
            bound = min(bound, _trace_bound(g.trunc, 1, U.H * U))
            per_class.append({"j": j, "zero": not g.coeffs, "bound": g.trunc})
    twisted = all(c["zero"] for c in per_class)
    report = CuspReport(direct, twisted, per_class, bound, witness)
    if strict and not report.agree:
        raise ConsistencyError(
            f"direct cusp test ({direct}) and the R_U test ({twisted}) disagree on the certified range"
        )
    return report


def rank_profile(f: FourierExpansion) -> tuple[int | None, dict]:
    """(minimal rank over the support, {rank: number of indices})."""
    hist: dict = defaultdict(int)
    for T in f.coeffs:
        hist[index_psd_rank(f.K, T)[2]] += 1
    hist = dict(sorted(hist.items()))
    return (min(hist) if hist else None), hist


def kernel_class(K: QuadField, T: HermIndex, forms=None) -> int | None:
    """Ideal class of <g_1, ..., g_n> for a kernel vector g of a rank n-1 index (n = 2 only)."""
    if T.n != 2:
        raise DomainError("kernel_class is implemented for n = 2")
    M = T.matrix(K)
    g = [-M[0, 1], M[0, 0]]
    if all(x.is_zero() for x in g):
        g = [-M[1, 1], M[1, 0]]
    if all(x.is_zero() for x in g):
        return None
    nonzero = [x for x in g if not x.is_zero()]
    return fractional_ideal_class_index(K, nonzero, forms)
