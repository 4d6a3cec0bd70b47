"""Row-style Hermite normal form for integer lattices.

Both routines return the unique upper-triangular basis with positive pivots
and entries above each pivot reduced into ``[0, pivot)``.
"""

from __future__ import annotations


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _reduce_above(basis: list[list[int]], pivots: list[int]) -> None:
    for i in range(len(basis)):
        col = pivots[i]
        piv = basis[i][col]
        for r in range(i):
            f = basis[r][col] // piv
            if f:
                row, src = basis[r], basis[i]
                for j in range(col, len(row)):
                    row[j] -= f * src[j]


def hnf(rows, ncols: int | None = None) -> list[list[int]]:
    """HNF of the Z-span of ``rows``; zero rows are dropped."""
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    ncols = len(work[0]) if ncols is None else ncols
    basis, pivots = [], []
    for c in range(ncols):
        cand = [r for r in work if r[c]]
        if not cand:
            continue
        rest = [r for r in work if not r[c]]
        piv = cand[0]
        for r in cand[1:]:
            g, x, y = _xgcd(piv[c], r[c])
            a, b = piv[c] // g, r[c] // g
            new_piv = [x * u + y * v for u, v in zip(piv, r)]
            other = [b * u - a * v for u, v in zip(piv, r)]
            piv = new_piv
            if any(other):
                rest.append(other)
        if piv[c] < 0:
            piv = [-u for u in piv]
        basis.append(piv)
        pivots.append(c)
        work = rest
    _reduce_above(basis, pivots)
    return basis


def hnf_mod(rows, modulus: int, ncols: int) -> tuple[tuple[int, ...], ...]:
    """HNF of span(rows) + modulus * Z^ncols (a full-rank lattice).

    Working modulo ``modulus`` keeps entries bounded; the result is square
    with every pivot dividing ``modulus``.
    """
    m = modulus
    work = []
    for r in rows:
        v = [x % m for x in r]
        if any(v):
            work.append(v)
    basis = []
    for c in range(ncols):
        piv = None
        rest = []
        for r in work:
            if r[c] == 0:
                rest.append(r)
            elif piv is None:
                piv = r
            else:
                g, x, y = _xgcd(piv[c], r[c])
                a, b = piv[c] // g, r[c] // g
                new_piv = [(x * u + y * v) % m for u, v in zip(piv, r)]
                other = [(b * u - a * v) % m for u, v in zip(piv, r)]
                # column c of new_piv is g (mod m); keep it exact
                new_piv[c] = g
                piv = new_piv
                if any(other):
                    rest.append(other)
        # fold in the implicit generator m * e_c
        if piv is None:
            piv = [0] * ncols
            piv[c] = m
        else:
            g, x, _ = _xgcd(piv[c], m)
            # (m/g) * piv - (piv[c]/g) * m * e_c has a zero in column c
            other = [((m // g) * u) % m for u in piv]
            other[c] = 0
            if g != piv[c]:
                piv = [(x * u) % m for u in piv]
                piv[c] = g
            if any(other):
                rest.append(other)
        basis.append(piv)
        # rows below stay reduced mod m; later columns of piv are reduced too
        work = rest
    for i in range(ncols):
        for j in range(i + 1, ncols):
            basis[i][j] %= m
    _reduce_above(basis, list(range(ncols)))
    return tuple(tuple(r) for r in basis)
