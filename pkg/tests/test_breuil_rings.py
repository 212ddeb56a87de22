import random

import pytest
from hypothesis import given, settings, strategies as st

from breuilkit.breuil_rings import (
    Fil,
    IdealTag,
    NotDivisible,
    SBarElem,
    divide_by_E,
    frobenius_r,
    gamma_to_delta,
    get_ring,
    ideal_member,
    modp_ring,
    monodromy_s,
    sbar_frobenius,
    split_p_power,
)
from breuilkit.coeff import Fq, NonUnit, PrimeCtx

from oracles import Honest, E_coeffs, frac_mod, gamma_delta_coeffs, phi_E_delta_coeffs, reduce_E, relem_to_t, t_to_E, vp

CTX = PrimeCtx(13, (0, 4, 8))
P = 13
RING = get_ring(CTX, 8, 11)


def relems(ring=RING):
    return st.lists(st.integers(0, ring.mod - 1), min_size=ring.M, max_size=ring.M).map(ring.elem)


def _as_E(h, ring):
    g = t_to_E(h.f, ring.p, ring.mod)[: ring.M]
    return g + [0] * (ring.M - len(g))


# -- divided powers of u^e --------------------------------------------------


@pytest.mark.parametrize("i", range(3, 11))
def test_gamma_matches_exact_expansion(i):
    ring = get_ring(CTX, 8, P)
    lib = gamma_to_delta(i, CTX, 8, P)
    exact = gamma_delta_coeffs(i, P, P)
    assert list(lib.coeffs) == [frac_mod(c, ring.mod) for c in exact]


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("i", range(3, 11))
def test_gamma_low_coefficients_divisible(i, n):
    """``u^{ie}/i!`` lies in ``sum_{k<n} p^{n-k} E^k + E^n R``."""
    exact = gamma_delta_coeffs(i, P, P)
    for k in range(n):
        assert vp(exact[k], P) >= n - k
    lib = gamma_to_delta(i, CTX, 8, P)
    for k in range(n):
        assert lib.coeffs[k] % P ** (n - k) == 0


@given(st.integers(3, 60))
def test_gamma_for_larger_i(i):
    exact = gamma_delta_coeffs(i, P, P)
    for n in (1, 2, 3):
        assert all(vp(exact[k], P) >= n - k for k in range(n))


@pytest.mark.parametrize("i", range(3, 11))
def test_gamma_in_J_plus_pI_plus_p3(i):
    c = gamma_to_delta(i, CTX, 8, P).coeffs
    # p^3 O_E on delta_0, p I = p^2 Fil^1 on delta_1, p Fil^2 on delta_2
    assert c[0] % P**3 == 0 and c[1] % P**2 == 0 and c[2] % P == 0


def test_low_divided_powers():
    g1 = gamma_to_delta(1, CTX, 8, 11)
    g2 = gamma_to_delta(2, CTX, 8, 11)
    assert g1 == RING.ue
    assert g2 == RING.ue * RING.ue * pow(2, -1, RING.mod)
    # u^{2e} in O E^2 + I + p^2 O_E,  u^e in O E + p O_E
    assert g2.coeffs[0] % P**2 == 0 and g2.coeffs[1] % P == 0
    assert g1.coeffs[0] % P == 0


# -- Frobenius --------------------------------------------------------------


@pytest.mark.parametrize("N,M", [(8, 11), (4, 7), (1, 13), (6, 13)])
def test_phi_E_is_p_times_unit(N, M):
    ring = get_ring(CTX, N, M)
    f = ring.phi_E
    assert list(f.coeffs) == [c % ring.mod for c in phi_E_delta_coeffs(M, P)]
    assert all(c % P == 0 for c in f.coeffs)
    if N > 1:
        assert (f.c0 // P) % P != 0


@settings(max_examples=60)
@given(relems())
def test_frobenius_matches_substitution(x):
    h = reduce_E(Honest(0, relem_to_t(x), CTX.e, RING.mod).frob(), RING.M, P)
    assert _as_E(h, RING) == E_coeffs(frobenius_r(x), RING.M)


@settings(max_examples=60)
@given(relems(), relems())
def test_frobenius_is_multiplicative(x, y):
    assert frobenius_r(x * y) == frobenius_r(x) * frobenius_r(y)


# -- ring laws ---------------------------------------------------------------


@settings(max_examples=100)
@given(relems(), relems())
def test_product_matches_polynomial_product(x, y):
    hx = Honest(0, relem_to_t(x), CTX.e, RING.mod)
    hy = Honest(0, relem_to_t(y), CTX.e, RING.mod)
    assert _as_E(reduce_E(hx * hy, RING.M, P), RING) == E_coeffs(x * y, RING.M)


@settings(max_examples=60)
@given(relems())
def test_inverse(x):
    if x.is_unit():
        assert x * x.inverse() == RING.one
    else:
        with pytest.raises(NonUnit):
            x.inverse()


@settings(max_examples=60)
@given(relems(), st.integers(1, 3))
def test_divide_by_E(x, k):
    Ek = RING.one
    for _ in range(k):
        Ek = Ek * RING.E
    q = divide_by_E(x * Ek, k)
    assert q.eq_upto(x, RING.M - k)


def test_divide_by_E_rejects():
    with pytest.raises(NotDivisible):
        divide_by_E(RING.one + RING.E, 1)


def test_ue_relation():
    assert RING.ue == RING.E - P
    assert RING.ue_power(3) == RING.ue * RING.ue * RING.ue


# -- ideals -----------------------------------------------------------------


def test_ideal_membership_examples():
    E, p = RING.E, P
    assert ideal_member(E * p, IdealTag("I"))
    assert not ideal_member(E, IdealTag("I"))
    assert ideal_member(E * E * p, IdealTag("J"))
    assert ideal_member(RING.delta(3), IdealTag("J"))
    assert not ideal_member(RING.delta(2), IdealTag("J"))
    assert ideal_member(RING.const(p), IdealTag("pFil", 0))
    assert ideal_member(E, IdealTag("pFil", 0))
    assert not ideal_member(RING.one, IdealTag("pFil", 0))
    assert ideal_member(RING.delta(2) * p**3, Fil(2, 3))
    assert not ideal_member(RING.delta(2) * p**2, Fil(2, 3))
    assert ideal_member(RING.const(p), IdealTag("IJp"))


@settings(max_examples=40)
@given(relems())
def test_split_p_power(x):
    y = x * P**2
    c, i, j = split_p_power(y, 1)
    assert c + i + j == y
    assert c.is_constant() and c.c0 % P**2 == 0
    assert ideal_member(i, IdealTag("I", n=1))
    assert ideal_member(j, IdealTag("J", n=1))


# -- mod p ------------------------------------------------------------------


def test_modp_ring_is_truncated_polynomials():
    ring = modp_ring(CTX)
    assert ring.is_modp
    t = ring.from_t_poly([0, 1])
    assert t == ring.ue == ring.E
    rng = random.Random(3)
    for _ in range(20):
        f = [rng.randrange(P) for _ in range(P)]
        g = [rng.randrange(P) for _ in range(P)]
        prod = [0] * P
        for a in range(P):
            for b in range(P - a):
                prod[a + b] = (prod[a + b] + f[a] * g[b]) % P
        assert ring.to_t_poly(ring.from_t_poly(f) * ring.from_t_poly(g)) == prod
        # Frobenius mod p keeps only the constant term
        assert frobenius_r(ring.from_t_poly(f)) == ring.const(f[0])


def sbar():
    return st.dictionaries(st.integers(0, CTX.e * P - 1), st.integers(1, P - 1), max_size=6).map(
        lambda d: SBarElem(CTX, d)
    )


@settings(max_examples=60)
@given(sbar(), sbar())
def test_sbar_leibniz_and_frobenius(x, y):
    assert monodromy_s(x * y) == monodromy_s(x) * y + x * monodromy_s(y)
    assert sbar_frobenius(x * y) == sbar_frobenius(x) * sbar_frobenius(y)


def test_sbar_truncation():
    u = SBarElem.monomial(CTX, 1)
    x = SBarElem.monomial(CTX, CTX.e * P - 1, Fq(3, P))
    assert not (x * u)
