"""The inert part of the Hecke algebra of the Hermitian modular group.

Double cosets Gamma_n M Gamma_n with inert similitude factor q are indexed by
their elementary divisors (:class:`DoubleCosetKey`).  Right cosets are
enumerated in block upper triangular shape (A B; 0 D) with D in Hermite
normal form, which makes the enumeration a bijection onto Gamma_n \\ Delta_n(q).
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Sequence

from .errors import ConsistencyError, DomainError, EnumerationOverflow, ScopeError
from .field import QuadField, is_inert, is_inert_product, make_field, prime_factors
from .ideals import IdealHNF
from .lattice import hnf
from .matrices import (
    MatK,
    detdiv_chain,
    gamma_generators,
    hermitian_basis,
    row_lattice_key,
    similitude_factor,
)

log = logging.getLogger(__name__)

DEFAULT_CAP = 10**6


@dataclass(frozen=True, order=True)
class DoubleCosetKey:
    """diag(a_1..a_n, d_1..d_n) with a_1|...|a_n|d_n|...|d_1 and a_j*d_j = q."""

    n: int
    q: int
    divisors: tuple[int, ...]

    def __post_init__(self):
        n, dv = self.n, self.divisors
        if len(dv) != 2 * n or any(x < 1 for x in dv):
            raise DomainError(f"need {2 * n} positive divisors, got {dv}")
        a, d = dv[:n], dv[n:]
        if any(x * y != self.q for x, y in zip(a, d)):
            raise DomainError(f"a_j * d_j must equal q={self.q} in {dv}")
        chain = self.elementary_divisors
        if any(y % x for x, y in zip(chain, chain[1:])):
            raise DomainError(f"divisibility chain fails for {dv}")

    @classmethod
    def from_divisors(cls, n: int, divisors: Sequence[int]) -> DoubleCosetKey:
        divisors = tuple(int(x) for x in divisors)
        if len(divisors) != 2 * n:
            raise DomainError(f"need {2 * n} divisors for n={n}")
        return cls(n, divisors[0] * divisors[n], divisors)

    @classmethod
    def from_elementary(cls, n: int, elem: Sequence[int]) -> DoubleCosetKey:
        a = tuple(elem[:n])
        d = tuple(reversed(elem[n:]))
        return cls(n, a[0] * d[0], a + d)

    @property
    def a(self) -> tuple[int, ...]:
        return self.divisors[: self.n]

    @property
    def d(self) -> tuple[int, ...]:
        return self.divisors[self.n:]

    @property
    def elementary_divisors(self) -> tuple[int, ...]:
        """e_1 | e_2 | ... | e_2n, i.e. a_1..a_n, d_n..d_1."""
        return self.a + tuple(reversed(self.d))

    def detdiv_generators(self) -> list[int]:
        out, acc = [], 1
        for e in self.elementary_divisors:
            acc *= e
            out.append(acc)
        return out

    def matrix(self, K: QuadField) -> MatK:
        return MatK.diag(K, list(self.divisors))

    def check_inert(self, K: QuadField) -> None:
        if not is_inert_product(K, self.q):
            raise ScopeError(
                f"similitude {self.q} has non-inert prime factors in Q(sqrt(-{K.m}))"
            )

    def label(self) -> str:
        return ",".join(str(x) for x in self.divisors)

    def __repr__(self):
        a = ",".join(map(str, self.a))
        d = ",".join(map(str, self.d))
        return f"Key({a}; {d})"


def identity_key(n: int) -> DoubleCosetKey:
    return DoubleCosetKey(n, 1, (1,) * (2 * n))


def t_key(n: int, p: int) -> DoubleCosetKey:
    """Key of T_n(p) = Gamma_n diag(I, pI) Gamma_n."""
    return DoubleCosetKey(n, p, (1,) * n + (p,) * n)


def t2_key(n: int, j: int, p: int) -> DoubleCosetKey:
    """Key of T_{n,j}(p^2) = Gamma_n diag(1^j, p^(n-j), (p^2)^j, p^(n-j)) Gamma_n."""
    if not 0 <= j < n:
        raise DomainError(f"j={j} outside 0..{n - 1}")
    return DoubleCosetKey(
        n, p * p, (1,) * j + (p,) * (n - j) + (p * p,) * j + (p,) * (n - j)
    )


def keys_for(n: int, q: int) -> list[DoubleCosetKey]:
    """All double-coset keys of degree n and similitude q."""
    divs = [x for x in range(1, q + 1) if q % x == 0]
    out = []

    def rec(prefix):
        if len(prefix) == n:
            a = tuple(prefix)
            if a[-1] and (q // a[-1]) % a[-1] == 0:
                out.append(DoubleCosetKey(n, q, a + tuple(q // x for x in a)))
            return
        for x in divs:
            if not prefix or x % prefix[-1] == 0:
                rec(prefix + [x])

    rec([])
    return out


# --------------------------------------------------------------------------
# canonical forms


def canonical_form(M: MatK) -> DoubleCosetKey:
    """Elementary-divisor key of Gamma_n M Gamma_n for inert M."""
    if not M.is_integral():
        raise DomainError("canonical_form needs an integral matrix")
    q = similitude_factor(M)
    if q is None:
        raise DomainError("matrix is not a unitary similitude")
    if not is_inert_product(M.K, q):
        raise ScopeError(
            f"similitude {q} has non-inert prime factors in Q(sqrt(-{M.K.m}))"
        )
    return _key_from_chain(M, q)


def _key_from_chain(M: MatK, q: int) -> DoubleCosetKey:
    n = M.nrows // 2
    chain = detdiv_chain(M)
    gens = []
    for k, ideal in enumerate(chain, 1):
        r = ideal.rational_generator()
        if r is None:
            raise ConsistencyError(f"d_{k} = {ideal} is not generated by a rational integer")
        gens.append(r)
    if len(gens) != 2 * n:
        raise ConsistencyError("similitude matrix is singular")
    elem, prev = [], 1
    for r in gens:
        if r % prev:
            raise ConsistencyError("determinantal divisors do not form a chain")
        elem.append(r // prev)
        prev = r
    key = DoubleCosetKey.from_elementary(n, elem)
    if key.q != q:
        raise ConsistencyError(f"a_j d_j = {key.q} differs from similitude {q}")
    return key


# --------------------------------------------------------------------------
# Hecke elements


@dataclass
class HeckeElement:
    K: QuadField
    n: int
    terms: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.terms = {k: Fraction(c) for k, c in self.terms.items() if c != 0}

    @classmethod
    def from_key(cls, K: QuadField, key: DoubleCosetKey, coeff=1) -> HeckeElement:
        return cls(K, key.n, {key: Fraction(coeff)})

    @classmethod
    def identity(cls, K: QuadField, n: int) -> HeckeElement:
        return cls.from_key(K, identity_key(n))

    def _check(self, other: HeckeElement):
        if self.K.m != other.K.m or self.n != other.n:
            raise DomainError("Hecke elements over different fields or degrees")

    def __add__(self, other: HeckeElement) -> HeckeElement:
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return HeckeElement(self.K, self.n, terms)

    def scale(self, s) -> HeckeElement:
        return HeckeElement(self.K, self.n, {k: c * s for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, HeckeElement):
            return hecke_product(self, other)
        return self.scale(Fraction(other))

    __rmul__ = scale

    def __eq__(self, other):
        return (
            isinstance(other, HeckeElement)
            and self.K.m == other.K.m
            and self.n == other.n
            and self.terms == other.terms
        )

    def degree(self) -> Fraction:
        """sum_j c_j * #(right cosets of term j)."""
        return sum(c * len(enumerate_right_cosets(self.K, k).reps) for k, c in self.terms.items())

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __repr__(self):
        body = " + ".join(f"{c}*{k!r}" for k, c in self.sorted_terms()) or "0"
        return f"HeckeElement[m={self.K.m}, n={self.n}]({body})"


def generators(K: QuadField, n: int, p: int) -> list[HeckeElement]:
    """T_n(p) and T_{n,j}(p^2), j = 0..n-1, for an inert prime p."""
    if not is_inert(K, p):
        raise ScopeError(f"{p} is not inert in Q(sqrt(-{K.m}))")
    keys = [t_key(n, p)] + [t2_key(n, j, p) for j in range(n)]
    return [HeckeElement.from_key(K, k) for k in keys]


# --------------------------------------------------------------------------
# right coset enumeration


@dataclass
class RightCosetSet:
    K: QuadField
    key: DoubleCosetKey
    reps: list[MatK]
    row_keys: list[tuple] = dc_field(default_factory=list, repr=False)
    candidates: int = 0

    def __len__(self):
        return len(self.reps)

    def __iter__(self):
        return iter(self.reps)

    def index_of(self, M: MatK) -> int:
        """Position of the rep whose right coset contains M."""
        rk = row_lattice_key(M, self.key.q)
        try:
            return self._lookup()[rk]
        except KeyError:
            raise DomainError("matrix is not in this double coset") from None

    def _lookup(self):
        cache = getattr(self, "_lookup_cache", None)
        if cache is None:
            cache = {rk: i for i, rk in enumerate(self.row_keys)}
            self._lookup_cache = cache
        return cache


def _residues(K: QuadField, d: int):
    for a in range(d):
        for b in range(d):
            yield K(a, b)


def hnf_d_matrices(K: QuadField, n: int, q: int) -> Iterator[MatK]:
    """Upper triangular D, diag d_j | q, entries above d_j reduced mod d_j, with q*D^-1 integral."""
    divs = [x for x in range(1, q + 1) if q % x == 0]
    positions = [(i, j) for j in range(n) for i in range(j)]
    for diag in product(divs, repeat=n):
        pools = [list(_residues(K, diag[j])) for (_, j) in positions]
        for offs in product(*pools):
            rows = [[K.zero] * n for _ in range(n)]
            for i in range(n):
                rows[i][i] = K(diag[i])
            for (i, j), x in zip(positions, offs):
                rows[i][j] = x
            D = MatK(K, rows)
            if _q_inverse_integral(D, q):
                yield D


def _q_inverse_integral(D: MatK, q: int) -> bool:
    return (D.inverse() * q).is_integral()


def _hermitian_solutions(K: QuadField, D: MatK, q: int) -> list[MatK]:
    """Integral Hermitian Y modulo q*Herm with Y*D = 0 (mod q)."""
    n = D.nrows
    basis = hermitian_basis(K, n)
    N = len(basis)
    width = 2 * n * n
    rows = []
    for i, h in enumerate(basis):
        v = []
        for r in (h * D).pairs():
            for a, b in r:
                v += (a, b)
        rows.append(v + [1 if t == i else 0 for t in range(N)])
    for t in range(width):
        rows.append([q if s == t else 0 for s in range(width)] + [0] * N)
    H = hnf(rows, width + N)
    kernel = [r[width:] for r in H if not any(r[:width])]
    if len(kernel) != N:
        raise ConsistencyError("kernel lattice is not of full rank")
    ranges = [range(q // kernel[i][i]) for i in range(N)]
    out = []
    for ts in product(*ranges):
        coeffs = [0] * N
        for t, s in zip(ts, kernel):
            if t:
                for c in range(N):
                    coeffs[c] += t * s[c]
        Y = MatK.zeros(K, n)
        for c, h in zip(coeffs, basis):
            c %= q
            if c:
                Y = Y + h * c
        out.append(Y)
    return out


def _cosets_for_D(args):
    m, key, D_rows = args
    K = make_field(m)
    D = MatK.from_pairs(K, D_rows)
    q, n = key.q, key.n
    A = (D.inverse() * q).H
    zero = MatK.zeros(K, n)
    found, cand = [], 0
    for Y in _hermitian_solutions(K, D, q):
        cand += 1
        B = (Y * D) * Fraction(1, q)
        M = MatK.block(A, B, zero, D)
        if _key_from_chain(M, q) == key:
            found.append(M)
    return found, cand


def enumerate_right_cosets(
    K: QuadField,
    key: DoubleCosetKey,
    cap: int = DEFAULT_CAP,
    verify_closure: bool = True,
    workers: int | None = None,
) -> RightCosetSet:
    """Right coset representatives (A B; 0 D) of Gamma_n diag(key) Gamma_n."""
    return _enumerate_cached(K.m, key, cap, verify_closure, workers)


@lru_cache(maxsize=64)
def _enumerate_cached(m, key, cap, verify_closure, workers) -> RightCosetSet:
    K = make_field(m)
    key.check_inert(K)
    q, n = key.q, key.n
    if q == 1:
        one = MatK.identity(K, 2 * n)
        return RightCosetSet(K, key, [one], [row_lattice_key(one, 1)], 1)
    g = key.a[0]
    if g > 1:
        # every entry is divisible by a_1, and Gamma g M' Gamma = g * (Gamma M' Gamma)
        inner = DoubleCosetKey(n, q // (g * g), tuple(x // g for x in key.divisors))
        sub = _enumerate_cached(m, inner, cap, verify_closure, workers)
        reps = [R * g for R in sub.reps]
        return RightCosetSet(K, key, reps, [row_lattice_key(R, q, check=False) for R in reps],
                             sub.candidates)
    Ds = list(hnf_d_matrices(K, n, q))
    jobs = [(m, key, tuple(tuple((x.a, x.b) for x in r) for r in D.rows)) for D in Ds]
    total = len(Ds)
    if total > cap:
        raise EnumerationOverflow(f"{total} D-matrices exceed cap {cap}")
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_cosets_for_D, jobs, chunksize=8))
    else:
        results = []
        for job in jobs:
            results.append(_cosets_for_D(job))
            total += results[-1][1]
            if total > cap:
                raise EnumerationOverflow(f"more than {cap} candidate matrices")
    total = len(Ds) + sum(c for _, c in results)
    if total > cap:
        raise EnumerationOverflow(f"{total} candidate matrices exceed cap {cap}")
    # deterministic merge in D order
    reps, row_keys, seen = [], [], set()
    for found, _ in results:
        for M in found:
            rk = row_lattice_key(M, q, check=False)
            if rk in seen:
                raise ConsistencyError("two triangular normal forms in one right coset")
            seen.add(rk)
            reps.append(M)
            row_keys.append(rk)
    out = RightCosetSet(K, key, reps, row_keys, total)
    if verify_closure:
        check_closure(out)
    log.debug("enumerated %d right cosets of %r from %d candidates", len(reps), key, total)
    return out


def check_closure(cs: RightCosetSet) -> None:
    """Every rep times every Gamma_n generator lands in a listed right coset."""
    keys = set(cs.row_keys)
    q = cs.key.q
    for g in gamma_generators(cs.K, cs.key.n):
        for R in cs.reps:
            if row_lattice_key(R * g, q, check=False) not in keys:
                raise ConsistencyError(f"right coset set of {cs.key!r} is not closed")


def coset_count_formula(n: int, p: int) -> int:
    """#(Gamma_n \\ T_n(p)) = prod_{j=1}^n (p^(2j-1) + 1)."""
    out = 1
    for j in range(1, n + 1):
        out *= p ** (2 * j - 1) + 1
    return out


# --------------------------------------------------------------------------
# products


def hecke_product(e1: HeckeElement, e2: HeckeElement, cap: int = DEFAULT_CAP) -> HeckeElement:
    """Product in the inert Hecke algebra via right-coset decomposition."""
    e1._check(e2)
    K, n = e1.K, e1.n
    terms: dict = defaultdict(Fraction)
    for k1, c1 in e1.terms.items():
        for k2, c2 in e2.terms.items():
            for key, mult in double_coset_product(K, k1, k2, cap).items():
                terms[key] += c1 * c2 * mult
    return HeckeElement(K, n, dict(terms))


@lru_cache(maxsize=256)
def _double_coset_product_cached(m, k1, k2, cap):
    K = make_field(m)
    R1 = enumerate_right_cosets(K, k1, cap)
    R2 = enumerate_right_cosets(K, k2, cap)
    if len(R1) * len(R2) > cap:
        raise EnumerationOverflow(f"{len(R1) * len(R2)} products exceed cap {cap}")
    q = k1.q * k2.q
    hits: Counter = Counter()
    sample = {}
    for M in R1.reps:
        for N in R2.reps:
            P = M * N
            rk = row_lattice_key(P, q, check=False)
            hits[rk] += 1
            if rk not in sample:
                sample[rk] = P
    per_key: dict = defaultdict(list)
    for rk, P in sample.items():
        per_key[_key_from_chain(P, q)].append(hits[rk])
    out = {}
    for key, counts in sorted(per_key.items()):
        if len(set(counts)) != 1:
            raise ConsistencyError(f"non-uniform right-coset multiplicities in {key!r}")
        total = sum(counts)
        mult, rem = divmod(total, len(counts))
        if rem:
            raise ConsistencyError(f"non-integral multiplicity for {key!r}")
        out[key] = (mult, len(counts))
    return out


def double_coset_product(K, k1, k2, cap=DEFAULT_CAP) -> dict:
    """{Z: c_Z} with Gamma M Gamma * Gamma N Gamma = sum_Z c_Z Z."""
    return {k: v[0] for k, v in _double_coset_product_cached(K.m, k1, k2, cap).items()}


def product_degrees(K, k1, k2, cap=DEFAULT_CAP) -> dict:
    """{Z: number of distinct right cosets of Z reached by the product}."""
    return {k: v[1] for k, v in _double_coset_product_cached(K.m, k1, k2, cap).items()}


# --------------------------------------------------------------------------
# the phi homomorphism


def phi_map(K: QuadField, key: DoubleCosetKey, k: int, cap: int = DEFAULT_CAP):
    """phi_k(Gamma_n M Gamma_n) as (scalar, element of degree n-1).

    Each triangular right coset contributes delta^-k * Gamma_{n-1} M_1 where
    delta is the last diagonal entry of D and M_1 keeps the leading (n-1)
    blocks.  When the image is a single double coset the scalar is its
    coefficient and the element has coefficient 1; otherwise the scalar is 1.
    """
    element, _ = phi_image(K, key, k, cap)
    if len(element.terms) == 1:
        (lk, c), = element.terms.items()
        return c, HeckeElement.from_key(K, lk)
    return Fraction(1), element


def phi_image(K: QuadField, key: DoubleCosetKey, k: int, cap: int = DEFAULT_CAP):
    """(image element, total weight) of phi_k applied to the double coset."""
    n = key.n
    if n < 2:
        raise DomainError("phi_k needs degree n >= 2")
    cs = enumerate_right_cosets(K, key, cap)
    q = key.q
    weights: dict = defaultdict(Fraction)
    sample = {}
    for R in cs.reps:
        A, B, C, D = R.blocks()
        if not C.is_zero() or any(not D[i, j].is_zero() for i in range(n) for j in range(i)):
            raise DomainError("representative is not in triangular shape")
        delta = D[n - 1, n - 1]
        if not delta.is_rational():
            raise DomainError("last diagonal entry of D is not rational")
        head = range(n - 1)
        M1 = MatK.block(A.sub(head, head), B.sub(head, head), C.sub(head, head), D.sub(head, head))
        rk = row_lattice_key(M1, q)
        weights[rk] += delta.to_fraction() ** (-k)
        sample.setdefault(rk, M1)
    per_key: dict = defaultdict(list)
    for rk, M1 in sample.items():
        per_key[_key_from_chain(M1, q)].append(weights[rk])
    terms = {}
    for lk, ws in per_key.items():
        if len(set(ws)) != 1:
            raise ConsistencyError(f"phi weights are not constant on {lk!r}")
        deg = len(enumerate_right_cosets(K, lk, cap))
        if len(ws) != deg:
            raise ConsistencyError(f"phi image misses right cosets of {lk!r}")
        terms[lk] = ws[0]
    return HeckeElement(K, n - 1, terms), sum(weights.values())


# --------------------------------------------------------------------------
# splitting determinantal chains into inert and complementary parts


def inert_rational_part(ideal: IdealHNF) -> tuple[int, IdealHNF]:
    """(a, I) with ideal = a*I, a a positive integer built from inert primes, maximal."""
    K = ideal.K
    a = 1
    rest = ideal
    for p in prime_factors(ideal.norm):
        if not is_inert(K, p):
            continue
        while rest.a % p == 0 and rest.b % p == 0 and rest.c % p == 0:
            rest = rest.div_int(p)
            a *= p
    return a, rest


def split_inert_rational(chain: Iterable[IdealHNF]) -> tuple[list[int], list[IdealHNF]]:
    inert, rest = [], []
    for ideal in chain:
        a, I = inert_rational_part(ideal)
        inert.append(a)
        rest.append(I)
    return inert, rest


def detdiv_multiplicative(A1: MatK, A2: MatK) -> bool:
    """d_k(A1 A2) == d_k(A1) * d_k(A2) for every k."""
    c12 = detdiv_chain(A1 * A2)
    c1, c2 = detdiv_chain(A1), detdiv_chain(A2)
    return len(c12) == len(c1) == len(c2) and all(x == y * z for x, y, z in zip(c12, c1, c2))
