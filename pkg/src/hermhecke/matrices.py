"""Exact matrices over K, unitary similitudes and right-coset invariants."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ConsistencyError, DomainError
from .field import QuadElt, QuadField, elem_from_json
from .ideals import IdealHNF, ideal_from_pairs
from .lattice import hnf_mod


class MatK:
    """A rectangular matrix with entries in a common QuadField (immutable)."""

    __slots__ = ("K", "rows", "nrows", "ncols", "_hash")

    def __init__(self, K: QuadField, rows: Iterable[Iterable]):
        self.K = K
        co = K.coerce
        self.rows = tuple(tuple(co(x) for x in r) for r in rows)
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.ncols for r in self.rows):
            raise DomainError("ragged matrix")
        self._hash = None

    @classmethod
    def _raw(cls, K, rows):
        self = object.__new__(cls)
        self.K = K
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        self._hash = None
        return self

    # constructors ---------------------------------------------------------
    @classmethod
    def identity(cls, K: QuadField, n: int) -> MatK:
        return cls.diag(K, [1] * n)

    @classmethod
    def zeros(cls, K: QuadField, r: int, c: int | None = None) -> MatK:
        return cls(K, [[0] * (r if c is None else c) for _ in range(r)])

    @classmethod
    def diag(cls, K: QuadField, entries: Sequence) -> MatK:
        n = len(entries)
        return cls(K, [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_pairs(cls, K: QuadField, rows) -> MatK:
        return cls._raw(K, tuple(tuple(QuadElt(K, a, b) for a, b in r) for r in rows))

    @classmethod
    def block(cls, A: MatK, B: MatK, C: MatK, D: MatK) -> MatK:
        top = [ra + rb for ra, rb in zip(A.rows, B.rows)]
        bot = [rc + rd for rc, rd in zip(C.rows, D.rows)]
        return cls._raw(A.K, tuple(top + bot))

    # basic protocol -------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, MatK) and self.K == other.K and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        body = "; ".join(", ".join(repr(x) for x in r) for r in self.rows)
        return f"MatK[{body}]"

    @property
    def shape(self):
        return self.nrows, self.ncols

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_integral(self) -> bool:
        return all(x.den == 1 for r in self.rows for x in r)

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.rows for x in r)

    # arithmetic -----------------------------------------------------------
    def _check_same(self, other):
        if not isinstance(other, MatK):
            raise TypeError("expected MatK")
        if self.K.m != other.K.m:
            raise DomainError("mixed-field matrices")

    def __add__(self, other: MatK) -> MatK:
        self._check_same(other)
        if self.shape != other.shape:
            raise DomainError("dimension mismatch")
        return MatK._raw(self.K, tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> MatK:
        return MatK._raw(self.K, tuple(tuple(-x for x in r) for r in self.rows))

    def __sub__(self, other: MatK) -> MatK:
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MatK):
            s = self.K.coerce(other)
            return MatK._raw(self.K, tuple(tuple(x * s for x in r) for r in self.rows))
        self._check_same(other)
        if self.ncols != other.nrows:
            raise DomainError(f"dimension mismatch {self.shape} x {other.shape}")
        cols = list(zip(*other.rows))
        zero = self.K.zero
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = zero
                for x, y in zip(r, c):
                    if x.a or x.b:
                        acc = acc + x * y
                row.append(acc)
            out.append(tuple(row))
        return MatK._raw(self.K, tuple(out))

    def __rmul__(self, s):
        return self * s

    def conj(self) -> MatK:
        return MatK._raw(self.K, tuple(tuple(x.conj() for x in r) for r in self.rows))

    @property
    def T(self) -> MatK:
        return MatK._raw(self.K, tuple(zip(*self.rows)))

    @property
    def H(self) -> MatK:
        """Conjugate transpose."""
        return self.conj().T

    def sub(self, rows: Sequence[int], cols: Sequence[int]) -> MatK:
        return MatK._raw(self.K, tuple(tuple(self.rows[i][j] for j in cols) for i in rows))

    def blocks(self) -> tuple[MatK, MatK, MatK, MatK]:
        """(A, B, C, D) for a 2n x 2n matrix."""
        if not self.is_square() or self.nrows % 2:
            raise DomainError("block decomposition needs an even square matrix")
        n = self.nrows // 2
        lo, hi = range(n), range(n, 2 * n)
        return self.sub(lo, lo), self.sub(lo, hi), self.sub(hi, lo), self.sub(hi, hi)

    def det(self) -> QuadElt:
        """Determinant by fraction-free (Bareiss) elimination."""
        if not self.is_square():
            raise DomainError("determinant of a non-square matrix")
        n = self.nrows
        if n == 0:
            return self.K.one
        a = [list(r) for r in self.rows]
        sign = 1
        prev = self.K.one
        for k in range(n - 1):
            if a[k][k].is_zero():
                for i in range(k + 1, n):
                    if not a[i][k].is_zero():
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return self.K.zero
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            prev = a[k][k]
        return a[n - 1][n - 1] * sign

    def inverse(self) -> MatK:
        if not self.is_square():
            raise DomainError("inverse of a non-square matrix")
        n = self.nrows
        K = self.K
        a = [list(r) + [K.one if i == j else K.zero for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            piv = next((i for i in range(c, n) if not a[i][c].is_zero()), None)
            if piv is None:
                raise DomainError("singular matrix")
            a[c], a[piv] = a[piv], a[c]
            inv = a[c][c].inverse()
            a[c] = [x * inv for x in a[c]]
            for i in range(n):
                if i != c and not a[i][c].is_zero():
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return MatK(K, [r[n:] for r in a])

    def pairs(self) -> list[list[tuple[int, int]]]:
        """Integer coordinates (a, b) of every entry; the matrix must be integral."""
        out = []
        for r in self.rows:
            row = []
            for x in r:
                if x.den != 1:
                    raise DomainError("matrix is not integral")
                row.append((x.a, x.b))
            out.append(row)
        return out

    def to_json(self, q: int | None = None) -> dict:
        n = self.nrows // 2 if self.nrows == self.ncols else None
        out = {"n": n, "q": q, "entries": [[x.to_json() for x in r] for r in self.rows]}
        return out


def mat_from_json(K: QuadField, obj) -> MatK:
    return MatK(K, [[elem_from_json(K, x) for x in r] for r in obj["entries"]])


# --------------------------------------------------------------------------
# the symplectic-type form J and similitudes


def J_matrix(K: QuadField, n: int) -> MatK:
    rows = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        rows[i][n + i] = -1
        rows[n + i][i] = 1
    return MatK(K, rows)


def J_bracket(M: MatK) -> MatK:
    """J[M] = conj(M)^tr * J * M."""
    n = M.nrows // 2
    return M.H * J_matrix(M.K, n) * M


def similitude_factor(M: MatK) -> int | None:
    """q with J[M] = q*J, or None if M is not an integral unitary similitude."""
    if not M.is_square() or M.nrows % 2:
        raise DomainError("similitude needs an even square matrix")
    if not M.is_integral():
        raise DomainError("similitude factor requires an integral matrix")
    n = M.nrows // 2
    JM = J_bracket(M)
    q = JM.rows[n][0]
    if not q.is_rational() or q.to_fraction() <= 0 or q.den != 1:
        return None
    q = q.a
    if JM != J_matrix(M.K, n) * q:
        return None
    if M.det().norm() != q ** (2 * n):
        raise ConsistencyError("norm(det M) != q^(2n) for a similitude")
    return q


def in_gamma(M: MatK, level: int | None = None) -> bool:
    """Membership in Gamma_n, or in Gamma_n[level] when level is given."""
    if not M.is_square() or M.nrows % 2 or not M.is_integral():
        return False
    if similitude_factor(M) != 1:
        return False
    if level is None or level == 1:
        return True
    n = M.nrows
    for i, r in enumerate(M.rows):
        for j, x in enumerate(r):
            a = x.a - (1 if i == j else 0)
            if a % level or x.b % level:
                return False
    return True


def translation(K: QuadField, H: MatK) -> MatK:
    """(I H; 0 I) for Hermitian integral H."""
    n = H.nrows
    return MatK.block(MatK.identity(K, n), H, MatK.zeros(K, n), MatK.identity(K, n))


def rotation(U: MatK) -> MatK:
    """R_U = (conj(U)^tr 0; 0 U^-1)."""
    K, n = U.K, U.nrows
    return MatK.block(U.H, MatK.zeros(K, n), MatK.zeros(K, n), U.inverse())


def hermitian_basis(K: QuadField, n: int) -> list[MatK]:
    """A Z-basis of the integral Hermitian n x n matrices."""
    out = []
    w = K.omega
    for i in range(n):
        rows = [[0] * n for _ in range(n)]
        rows[i][i] = 1
        out.append(MatK(K, rows))
    for i, j in combinations(range(n), 2):
        for x in (K.one, w):
            rows = [[0] * n for _ in range(n)]
            rows[i][j] = x
            rows[j][i] = x.conj()
            out.append(MatK(K, rows))
    return out


def elementary_unimodular(K: QuadField, n: int) -> list[MatK]:
    """Elementary and diagonal-unit matrices in GL_n(O_K)."""
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                for x in (K.one, K.omega):
                    rows = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
                    rows[i][j] = x
                    out.append(MatK(K, rows))
    for u in K.units():
        if u != 1:
            for i in range(n):
                out.append(MatK.diag(K, [u if a == i else 1 for a in range(n)]))
    return out


def gamma_generators(K: QuadField, n: int) -> list[MatK]:
    """Translations, rotations R_U for elementary U, and the inversion J."""
    gens = [translation(K, H) for H in hermitian_basis(K, n)]
    gens += [rotation(U) for U in elementary_unimodular(K, n)]
    gens.append(J_matrix(K, n))
    return gens


def random_gamma(K: QuadField, n: int, rng: random.Random, length: int = 8) -> MatK:
    """A random word in the generators of Gamma_n and their inverses."""
    gens = gamma_generators(K, n)
    M = MatK.identity(K, 2 * n)
    for _ in range(length):
        g = rng.choice(gens)
        if rng.random() < 0.5:
            g = gamma_inverse(g)
        M = M * g
    return M


def gamma_inverse(L: MatK) -> MatK:
    """L^-1 = J^-1 conj(L)^tr J for L in Gamma_n."""
    n = L.nrows // 2
    J = J_matrix(L.K, n)
    return -(J * L.H * J)


def random_unimodular(K: QuadField, n: int, rng: random.Random, length: int = 8) -> MatK:
    gens = elementary_unimodular(K, n)
    M = MatK.identity(K, n)
    for _ in range(length):
        g = rng.choice(gens)
        if rng.random() < 0.5:
            g = g.inverse()
        M = M * g
    return M


# --------------------------------------------------------------------------
# determinantal divisors


def _pair_mul(x, y, t, nm):
    a, b = x
    c, d = y
    bd = b * d
    return (a * c - bd * nm, a * d + b * c + bd * t)


def minors_by_size(M: MatK, up_to: int | None = None) -> list[list[tuple[int, int]]]:
    """All k x k minors (as coordinate pairs) for k = 1..up_to of an integral matrix."""
    P = M.pairs()
    t, nm = M.K.tr_w, M.K.nm_w
    r, c = M.nrows, M.ncols
    kmax = min(r, c) if up_to is None else up_to
    if kmax > min(r, c):
        raise DomainError(f"k={kmax} exceeds the matrix dimensions {M.shape}")
    prev = {((), ()): (1, 0)}
    out = []
    for k in range(1, kmax + 1):
        cur = {}
        for rows in combinations(range(r), k):
            last = rows[-1]
            head = rows[:-1]
            for cols in combinations(range(c), k):
                acc_a = acc_b = 0
                for pos, j in enumerate(cols):
                    x = P[last][j]
                    if x == (0, 0):
                        continue
                    sub = prev.get((head, cols[:pos] + cols[pos + 1:]))
                    if sub is None or sub == (0, 0):
                        continue
                    pa, pb = _pair_mul(x, sub, t, nm)
                    if (k - 1 - pos) % 2:
                        pa, pb = -pa, -pb
                    acc_a += pa
                    acc_b += pb
                cur[(rows, cols)] = (acc_a, acc_b)
        out.append(list(cur.values()))
        prev = cur
    return out


def detdiv_chain(M: MatK, up_to: int | None = None) -> list[IdealHNF]:
    """[d_1, ..., d_k]: d_j is the ideal generated by all j x j minors of M."""
    chain = []
    for minors in minors_by_size(M, up_to):
        if not any(x != (0, 0) for x in minors):
            break
        chain.append(ideal_from_pairs(M.K, minors))
    for lo, hi in zip(chain, chain[1:]):
        if not lo.divides(hi):
            raise ConsistencyError("determinantal chain is not divisibility-ordered")
    return chain


# --------------------------------------------------------------------------
# right cosets Gamma_n M


def _row_vectors(P, t, nm) -> list[list[int]]:
    vecs = []
    for row in P:
        v, wv = [], []
        for a, b in row:
            v += (a, b)
            wv += (-b * nm, a + b * t)  # omega * (a + b*omega)
        vecs.append(v)
        vecs.append(wv)
    return vecs


def row_lattice_key(M: MatK, q: int | None = None, check: bool = True) -> tuple:
    """Canonical invariant of the right coset Gamma_n M.

    The HNF of the Z-lattice spanned by the rows of M and omega times the rows,
    written in Z^{4n}.  Since q*O_K^{2n} lies in that lattice, the HNF is taken
    modulo q.
    """
    if check or q is None:
        sq = similitude_factor(M)
        if sq is None:
            raise DomainError("row_lattice_key needs a unitary similitude")
        if q is not None and q != sq:
            raise DomainError(f"similitude factor is {sq}, not {q}")
        q = sq
    vecs = _row_vectors(M.pairs(), M.K.tr_w, M.K.nm_w)
    return hnf_mod(vecs, q, 2 * M.ncols)


def right_coset_equal(M1: MatK, M2: MatK) -> bool:
    """Gamma_n M1 == Gamma_n M2, decided by M1 * M2^-1 in Gamma_n."""
    q1, q2 = similitude_factor(M1), similitude_factor(M2)
    if q1 is None or q2 is None:
        raise DomainError("right_coset_equal needs unitary similitudes")
    if q1 != q2:
        raise DomainError(f"mismatched similitude factors {q1} != {q2}")
    return _quotient_in_gamma(M1, M2, q1)


def _quotient_in_gamma(M1: MatK, M2: MatK, q: int) -> bool:
    # M2^-1 = q^-1 J^-1 conj(M2)^tr J, so M1 M2^-1 is in Gamma_n iff the
    # integral matrix M1 J^-1 conj(M2)^tr J vanishes mod q.
    n = M1.nrows // 2
    J = J_matrix(M1.K, n)
    P = M1 * (-J) * M2.H * J
    return all(x.a % q == 0 and x.b % q == 0 for r in P.rows for x in r)


def is_unimodular(U: MatK) -> bool:
    return U.is_square() and U.is_integral() and U.det().norm() == 1


def frac_entries(M: MatK) -> list[list[Fraction]]:
    return [[x.to_fraction() for x in r] for r in M.rows]
