from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hermhecke.cyclo import CycSum
from hermhecke.errors import ConsistencyError, DomainError
from hermhecke.field import make_field
from hermhecke.fourier import (
    FourierExpansion,
    HermIndex,
    cusp_tests,
    delta_q_expansion,
    eisenstein_q_expansion,
    expansion_from_q_series,
    hecke_act,
    index_psd_rank,
    kernel_class,
    lambda_indices,
    psd_rank,
    rank_profile,
    siegel_phi,
    slash_coset,
    slash_RU,
    twist_matrix,
)
from hermhecke.hecke import HeckeElement, enumerate_right_cosets, generators, t2_key, t_key
from hermhecke.ideals import class_representatives
from hermhecke.matrices import MatK, hermitian_basis, random_unimodular
from oracles import eisenstein_reference, small_elements, tau_reference


def idx1(t) -> HermIndex:
    return HermIndex((Fraction(t),), ())


# ----------------------------------------------------------------- indices


def test_psd_rank_examples():
    K = make_field(1)
    assert psd_rank(MatK.zeros(K, 2)) == (True, False, 0)
    half = Fraction(1, 2)
    T = MatK(K, [[1, K(1, 1) * half], [K(1, -1) * half, 1]])
    assert T.det() == half
    assert psd_rank(T) == (True, True, 2)
    t = K(2, 1)
    assert psd_rank(MatK(K, [[1, t], [t.conj(), t.norm()]])) == (True, False, 1)
    assert psd_rank(MatK.diag(K, [1, -1]))[0] is False
    # psd needs all principal minors, not only leading ones
    assert psd_rank(MatK.diag(K, [0, -1])) == (False, False, 1)


def test_index_membership():
    K = make_field(5)
    T = HermIndex.from_entries(K, [1, 2], [K(1, 1) / K.sqrt_d])
    assert T.in_lambda()
    assert not HermIndex.from_entries(K, [1, 2], [Fraction(1, 3)]).in_lambda()
    assert HermIndex.from_entries(K, [Fraction(1, 2), 2]).denominator() == 2
    assert HermIndex.from_matrix(T.matrix(K)) == T
    with pytest.raises(DomainError):
        HermIndex.from_matrix(MatK(K, [[1, 1], [2, 1]]))


def brute_psd_count(K, trace_bound):
    """PSD Lambda_2 indices with trace <= bound: t11 t22 |d_K| >= N(mu)."""
    D = -K.d
    count = 0
    for t11 in range(trace_bound + 1):
        for t22 in range(trace_bound + 1 - t11):
            for mu in small_elements(K, 2 * trace_bound + 2):
                if mu.norm() <= D * t11 * t22:
                    count += 1
    return count


@pytest.mark.parametrize("m", [1, 2, 3, 5, 11])
def test_lambda_indices_against_enumeration(m):
    K = make_field(m)
    idx = lambda_indices(K, 2, 3)
    assert len(idx) == brute_psd_count(K, 3)
    assert len(set(idx)) == len(idx)
    for T in idx:
        assert T.in_lambda() and T.trace() <= 3 and index_psd_rank(K, T)[0]


def _random_hermitian_integral(K, n, rng, size=4):
    S = MatK.zeros(K, n)
    for B in hermitian_basis(K, n):
        S = S + B * rng.randint(-size, size)
    return S


@pytest.mark.parametrize("m", [1, 2, 3, 7, 15])
def test_lambda_duality_and_congruence(m):
    K = make_field(m)
    rng = random.Random(m)
    pool = lambda_indices(K, 2, 5, psd=False)
    for _ in range(200):
        T = rng.choice(pool)
        S = _random_hermitian_integral(K, 2, rng)
        P = T.matrix(K) * S
        tr = P[0, 0] + P[1, 1]
        assert tr.is_rational() and tr.to_fraction().denominator == 1
        A = MatK(K, [[K(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(2)] for _ in range(2)])
        assert HermIndex.from_matrix(A.H * T.matrix(K) * A).in_lambda()


def test_lambda_dual_rejects_outside():
    # a non-Lambda index pairs non-integrally with some integral Hermitian S
    K = make_field(1)
    T = HermIndex.from_entries(K, [Fraction(1, 2), 0])
    S = hermitian_basis(K, 2)[0]
    P = T.matrix(K) * S
    assert (P[0, 0] + P[1, 1]).to_fraction().denominator != 1


# ----------------------------------------------------------------- expansions


@pytest.mark.parametrize("k", [4, 6, 8, 10, 12])
def test_eisenstein_matches_oracle(k):
    f = eisenstein_q_expansion(k, 25)
    assert f.q_coefficients() == eisenstein_reference(k, 25)
    assert f.constant_term() == 1


def test_eisenstein_examples_and_errors():
    assert eisenstein_q_expansion(4, 3).q_coefficients() == [1, 240, 2160]
    assert eisenstein_q_expansion(6, 3).q_coefficients() == [1, -504, -16632]
    for k in (2, 5, 0):
        with pytest.raises(DomainError):
            eisenstein_q_expansion(k, 5)


def test_delta_matches_oracle():
    assert delta_q_expansion(30).q_coefficients() == [Fraction(t) for t in tau_reference(30)]


def test_truncation_prunes():
    f = FourierExpansion(make_field(1), 1, 4, {idx1(0): 1, idx1(5): 2, idx1(3): 0}, 4)
    assert f.support() == [idx1(0)]


def test_json_round_trip():
    K = make_field(5)
    f = eisenstein_q_expansion(4, 10, K)
    assert FourierExpansion.from_json(f.to_json()) == f
    T = HermIndex.from_entries(K, [Fraction(1, 2), Fraction(3, 2)], [K(1, 1) / 2])
    g = FourierExpansion(K, 2, 6, {T: Fraction(-7, 3), HermIndex.zero(K, 2): 1}, 4)
    assert g.scale % 2 == 0
    assert FourierExpansion.from_json(g.to_json()) == g


# ----------------------------------------------------------------- slash operators


def test_slash_identity():
    K = make_field(1)
    f = eisenstein_q_expansion(4, 10, K)
    g = slash_coset(f, MatK.identity(K, 2))
    assert g.coeffs == f.coeffs


def test_slash_diag_3_1():
    K = make_field(1)
    f = eisenstein_q_expansion(4, 10, K)
    g = slash_coset(f, MatK.diag(K, [3, 1]))
    for t in range(10):
        assert g[idx1(3 * t)] == f[idx1(t)]


def test_slash_upper_translation():
    K = make_field(1)
    f = eisenstein_q_expansion(4, 10, K)
    g = slash_coset(f, MatK(K, [[1, 1], [0, 3]]))
    for t in range(1, 10):
        expected = CycSum.from_phases({Fraction(t, 3): f[idx1(t)] * Fraction(1, 3 ** 4)})
        c = g.coeffs[HermIndex((Fraction(t, 3),), ())]
        assert c == expected
        assert isinstance(c, Fraction) == (t % 3 == 0)


def test_slash_rejects_bad_shapes():
    K = make_field(1)
    f = eisenstein_q_expansion(4, 5, K)
    with pytest.raises(DomainError):
        slash_coset(f, MatK(K, [[1, 0], [1, 3]]))


@pytest.mark.parametrize("k", [4, 6, 8])
@pytest.mark.parametrize("p", [3, 7])
def test_eisenstein_hecke_image(k, p):
    K = make_field(1)
    f = eisenstein_q_expansion(k, 30, K)
    g = hecke_act(f, HeckeElement.from_key(K, t_key(1, p)))
    lam = Fraction(p) ** (1 - k) + 1
    ref = eisenstein_reference(k, 30)
    assert g.trunc >= 1
    for t in range(g.trunc + 1):
        assert g[idx1(t)] == lam * ref[t]


def test_delta_hecke_image_matches_tau():
    K = make_field(1)
    f = delta_q_expansion(30, K)
    g = hecke_act(f, HeckeElement.from_key(K, t_key(1, 3)))
    tau = tau_reference(30)
    for t in range(g.trunc + 1):
        assert g[idx1(t)] == Fraction(tau[3], 3 ** 11) * tau[t]


def test_hecke_identity_element():
    K = make_field(11)
    f = eisenstein_q_expansion(4, 10, K)
    assert hecke_act(f, HeckeElement.identity(K, 1)) == f


def test_hecke_act_linear():
    K = make_field(11)
    f = eisenstein_q_expansion(6, 30, K)
    a, b = generators(K, 1, 2)
    lhs = hecke_act(f, a + b.scale(3))
    ra, rb = hecke_act(f, a), hecke_act(f, b)
    bound = min(lhs.trunc, ra.trunc, rb.trunc)
    assert lhs.restrict(bound) == (ra + rb.scaled(3)).restrict(bound)


def test_hecke_act_type_errors():
    K = make_field(11)
    f = eisenstein_q_expansion(4, 10, K)
    with pytest.raises(DomainError):
        hecke_act(f, HeckeElement.identity(K, 2))
    with pytest.raises(TypeError):
        hecke_act(f, "T(2)")


def _random_degree2(K, rng, pd_only, trunc=4):
    pool = lambda_indices(K, 2, trunc)
    if pd_only:
        pool = [T for T in pool if index_psd_rank(K, T)[1]]
    support = rng.sample(pool, min(len(pool), 6))
    return FourierExpansion(K, 2, 10, {T: Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 5))
                                       for T in support}, trunc)


@pytest.mark.parametrize("m, p", [(11, 2), (1, 3)])
def test_hecke_preserves_cusp_support(m, p):
    K = make_field(m)
    rng = random.Random(8)
    for e in generators(K, 2, p):
        cs = enumerate_right_cosets(K, next(iter(e.terms)))
        for _ in range(3):
            f = _random_degree2(K, rng, pd_only=True)
            g = hecke_act(f, cs)
            assert all(index_psd_rank(K, T)[1] for T in g.support())
    for k in (12,):
        f = delta_q_expansion(30, K)
        for e in generators(K, 1, p):
            g = hecke_act(f, e, k)
            assert g.constant_term() == 0


def test_degree2_slash_sum_is_rational():
    K = make_field(11)
    rng = random.Random(3)
    cs = enumerate_right_cosets(K, t2_key(2, 1, 2))
    f = _random_degree2(K, rng, pd_only=False, trunc=6)
    g = hecke_act(f, cs)
    assert all(isinstance(c, Fraction) and T.in_lambda() for T, c in g.coeffs.items())


# ----------------------------------------------------------------- Phi and R_U


def test_siegel_phi():
    K = make_field(1)
    e4 = eisenstein_q_expansion(4, 10, K)
    phi = siegel_phi(e4)
    assert phi.n == 0 and phi.constant_term() == 1
    assert not siegel_phi(delta_q_expansion(10, K)).coeffs


def test_phi_power_is_constant_term():
    K = make_field(7)
    rng = random.Random(2)
    for _ in range(5):
        f = _random_degree2(K, rng, pd_only=False)
        assert siegel_phi(siegel_phi(f)).constant_term() == f.constant_term()


def test_slash_RU_identity_and_unimodular():
    K = make_field(5)
    rng = random.Random(1)
    f = _random_degree2(K, rng, pd_only=False)
    assert slash_RU(f, MatK.identity(K, 2)).coeffs == f.coeffs
    for _ in range(5):
        U = random_unimodular(K, 2, rng, 4)
        g = slash_RU(f, U)
        assert g.scale == 1
        assert all(T.in_lambda() for T in g.coeffs)
        factor = (U.det() ** 10).to_fraction()
        for T, c in f.coeffs.items():
            img = HermIndex.from_matrix(U * T.matrix(K) * U.H)
            if img.trace() <= g.trunc:
                assert g.coeffs[img] == c * factor
    with pytest.raises(DomainError):
        slash_RU(f, MatK.zeros(K, 2))


def test_twist_matrix_scale():
    K = make_field(5)
    reps = class_representatives(K)
    u2 = reps.u[1]
    assert u2 == (1 + K.sqrt_d / 2) / 2
    U = twist_matrix(K, 2, u2)
    assert U[1, 0] == u2.conj() and U[0, 1] == 0
    f = FourierExpansion(K, 2, 6, {HermIndex.from_entries(K, [1, 1]): 1}, 20)
    g = slash_RU(f, U)
    assert g.scale % 2 == 0


@settings(max_examples=25)
@given(st.integers(0, 2**32), st.booleans())
def test_vanishing_constant_chain(seed, zero_constant):
    # a full-depth chain of R_U twists and Phi reaches a multiple of alpha_f(0)
    K = make_field(5)
    rng = random.Random(seed)
    f = _random_degree2(K, rng, pd_only=False)
    c0 = Fraction(0) if zero_constant else Fraction(rng.randint(1, 9))
    coeffs = dict(f.coeffs)
    coeffs[HermIndex.zero(K, 2)] = c0
    f = FourierExpansion(K, 2, 10, coeffs, f.trunc)
    U = random_unimodular(K, 2, rng, 4)
    V = twist_matrix(K, 2, rng.choice(class_representatives(K).u))
    h = siegel_phi(siegel_phi(slash_RU(slash_RU(f, U), V)))
    assert (h.constant_term() == 0) == (c0 == 0)


# ----------------------------------------------------------------- cusp diagnostics


def test_cusp_tests_degree_one():
    K = make_field(5)
    reps = class_representatives(K)
    r = cusp_tests(delta_q_expansion(20, K), reps)
    assert r.direct and r.twisted
    r = cusp_tests(eisenstein_q_expansion(4, 20, K), reps)
    assert not r.direct and not r.twisted and r.witness == idx1(0)
    r = cusp_tests(FourierExpansion(K, 1, 4, {}, 10), reps)
    assert r.direct and r.twisted


def test_cusp_tests_class_number_two_fixture():
    # a rank-one index whose kernel lies in the non-principal class: only the
    # twist by U_2 moves it to the boundary
    K = make_field(5)
    s = K.sqrt_d / 2
    M = MatK(K, [[2, -(1 + s)], [-(1 - s), 3]])
    T = HermIndex.from_matrix(M)
    assert T.in_lambda() and index_psd_rank(K, T) == (True, False, 1)
    assert kernel_class(K, T) == 2
    reps = class_representatives(K)
    f = FourierExpansion(K, 2, 10, {T: 1}, 10)
    r = cusp_tests(f, reps)
    assert not r.direct and not r.twisted and r.agree
    assert [c["zero"] for c in r.per_class] == [True, False]
    U2 = twist_matrix(K, 2, reps.u[1])
    img = HermIndex.from_matrix(U2 * M * U2.H)
    assert img == HermIndex.from_entries(K, [2, 0])


def test_cusp_tests_positive_definite_fixture():
    K = make_field(5)
    rng = random.Random(4)
    f = _random_degree2(K, rng, pd_only=True)
    r = cusp_tests(f, class_representatives(K))
    assert r.direct and r.twisted and r.agree


def test_cusp_tests_principal_kernel():
    # diag(1, 0) together with its image under U_1^-1, as a unimodular-invariant
    # form would carry it
    K = make_field(5)
    reps = class_representatives(K)
    T = HermIndex.from_entries(K, [1, 0])
    V = twist_matrix(K, 2, reps.u[0]).inverse()
    T2 = HermIndex.from_matrix(V * T.matrix(K) * V.H)
    f = FourierExpansion(K, 2, 10, {T: 3, T2: 3}, 60)
    r = cusp_tests(f, reps)
    assert not r.direct and not r.twisted and r.agree
    assert r.per_class[0]["zero"] is False


def test_cusp_tests_strict_disagreement():
    # a lone singular coefficient is not unimodular-invariant, so no twist
    # reaches it although it lies well inside the certified range
    K = make_field(5)
    f = FourierExpansion(K, 2, 10, {HermIndex.from_entries(K, [1, 0]): 1}, 300)
    reps = class_representatives(K)
    with pytest.raises(ConsistencyError):
        cusp_tests(f, reps)
    r = cusp_tests(f, reps, strict=False)
    assert not r.agree and r.certified_bound >= 1


def test_cusp_tests_short_truncation_is_not_a_contradiction():
    K = make_field(5)
    f = FourierExpansion(K, 2, 10, {HermIndex.from_entries(K, [1, 0]): 1}, 4)
    r = cusp_tests(f, class_representatives(K))
    assert not r.direct and r.twisted and r.agree
    assert r.witness.trace() > r.certified_bound


def test_rank_profile():
    K = make_field(1)
    assert rank_profile(expansion_from_q_series([5], 4, K)) == (0, {0: 1})
    assert rank_profile(eisenstein_q_expansion(4, 10, K)) == (0, {0: 1, 1: 9})
    rng = random.Random(6)
    f = _random_degree2(K, rng, pd_only=True)
    assert rank_profile(f)[0] == 2
    assert rank_profile(FourierExpansion(K, 2, 4, {}, 3)) == (None, {})


@pytest.mark.parametrize("seed", range(6))
def test_rank_profile_under_random_twists(seed):
    # min-rank above n - j forces f|R_V|Phi^j to vanish for every sampled V
    K = make_field(5)
    rng = random.Random(seed)
    f = _random_degree2(K, rng, pd_only=bool(seed % 2), trunc=6)
    r, _ = rank_profile(f)
    for _ in range(5):
        g = slash_RU(f, random_unimodular(K, 2, rng, 3))
        rg = rank_profile(g)[0]
        assert rg is None or rg >= r
        for j in (1, 2):
            h = g
            for _ in range(j):
                h = siegel_phi(h)
            if r > 2 - j:
                assert not h.coeffs
