"""Certified expansion arithmetic: convolution, powers, composition,
constant-shift, and the remainder identities, with exact rational oracles."""

import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from carleman import expansion as xp
from carleman import sector as sec
from carleman import weight_seq as ws
from carleman.basis_fn import EvaluableFunction
from carleman.errors import (NonzeroConstantTermError, SectorMismatchError,
                             SequenceMismatchError)

S1 = sec.bisected(1)
G1 = ws.gevrey(1, 25)
ONES = ws.gevrey(0, 25)


def expand(coeffs, seq=G1, A=1, h=1, sector=S1):
    return xp.CertifiedExpansion(tuple(coeffs), seq, A, h, sector)


def fr(*vals):
    return tuple(Fraction(v) for v in vals)


# ---------------------------------------------------------------------------
# product
# ---------------------------------------------------------------------------

def test_product_all_ones_gives_n_plus_one():
    e = expand([Fraction(1)] * 16)
    p = xp.product(e, e, 1)
    assert list(p.coeffs) == [n + 1 for n in range(16)]


def test_product_with_constant_one_is_identity():
    e = expand(fr(2, -3, "1/2", 5, 0, 1), A=4, h=2)
    one = expand(fr(1, 0, 0, 0, 0, 0))
    p = xp.product(e, one, 1)
    assert p.coeffs == e.coeffs


def test_product_certificate_paper_constants():
    e = expand([Fraction(1)] * 8)
    p = xp.product(e, e, 1)
    assert (p.A, p.h) == (2, 2)


def test_product_requires_matching_seq_and_sector():
    e1 = expand(fr(1, 1))
    e2 = xp.CertifiedExpansion(fr(1, 1), ONES, 1, 1, S1)
    with pytest.raises(SequenceMismatchError):
        xp.product(e1, e2, 1)
    e3 = xp.CertifiedExpansion(fr(1, 1), G1, 1, 1, sec.bisected(2))
    with pytest.raises(SectorMismatchError):
        xp.product(e1, e3, 1)


def test_product_commutativity_and_associativity_exact():
    a = expand(fr(1, -2, 3, "5/7", 11, "-1/3", 2, 1), A=12, h=2)
    b = expand(fr("1/2", 4, -1, 2, "3/5", 7, -2, 1), A=12, h=2)
    c = expand(fr(3, 0, 1, -1, 2, 0, 1, 4), A=12, h=2)
    assert xp.product(a, b, 1).coeffs == xp.product(b, a, 1).coeffs
    ab_c = xp.product(xp.product(a, b, 1), c, 1)
    a_bc = xp.product(a, xp.product(b, c, 1), 1)
    assert ab_c.coeffs == a_bc.coeffs


def test_product_commutativity_float_lane():
    with mp.workdps(50):
        ca = tuple(mp.sin(mp.mpf(3) * k + 1) for k in range(10))
        cb = tuple(mp.cos(mp.mpf(2) * k + 1) for k in range(10))
    a = expand(ca, A=2, h=3)
    b = expand(cb, A=2, h=3)
    with mp.workdps(50):
        pab = xp.product(a, b, 1).coeffs
        pba = xp.product(b, a, 1).coeffs
        for x, y in zip(pab, pba):
            assert abs(x - y) <= max(abs(x), mp.mpf("1e-30")) * mp.mpf(10) ** (-42)


# ---------------------------------------------------------------------------
# powers
# ---------------------------------------------------------------------------

def test_power_coeffs_examples():
    z = expand(fr(0, 1, 0, 0, 0, 0, 0))
    assert list(xp.power_coeffs(z, 3)) == [0, 0, 0, 1, 0, 0, 0]
    zz2 = expand(fr(0, 1, 1, 0, 0, 0, 0), h=2)
    assert list(xp.power_coeffs(zz2, 2)) == [0, 0, 1, 2, 1, 0, 0]
    anyf = expand(fr(0, 3, -1, "1/2", 2, 0, 1), h=4)
    assert xp.power_coeffs(anyf, 1) == anyf.coeffs


def test_power_coeffs_match_tuple_enumeration():
    # sum over ordered tuples m_1+...+m_k = j of products of coefficients
    coeffs = fr(0, 2, -1, "1/3", 5, -2, 1, 0, 3, "7/2")
    e = expand(coeffs, h=8)
    N = len(coeffs)
    for k in range(1, 6):
        got = xp.power_coeffs(e, k)
        for j in range(N):
            brute = Fraction(0)
            for tup in itertools.product(range(N), repeat=k):
                if sum(tup) == j:
                    prod = Fraction(1)
                    for m in tup:
                        prod *= coeffs[m]
                    brute += prod
            assert got[j] == brute


def test_power_certificate_reduces_to_input_at_j_one():
    e = expand(fr(0, 1, "1/2", "1/6", "1/24", 0, 0), seq=G1, A=3, h=2)
    tab = xp.power_certificate(e, 1)
    for n in range(1, e.order + 1):
        assert tab.bound_at(n) == 3 * Fraction(2) ** n * Fraction(G1.values[n])


def test_power_certificate_boundary_case_n_equals_j():
    e = expand(fr(0, 1, -1, "1/2", 1, 0, 0), seq=G1, A=2, h=3)
    for j in (1, 2, 3, 4):
        tab = xp.power_certificate(e, j)
        assert tab.bound_at(j) == (Fraction(2) * 3 * G1.values[1]) ** j


def test_power_certificate_constant_sequence_counts_compositions():
    e = xp.CertifiedExpansion(fr(0, 1, 1, 1, 1, 1, 1, 1, 1, 1), ONES, 1, 1, S1)
    for j in (1, 2, 3, 4):
        tab = xp.power_certificate(e, j)
        for n in range(j, e.order + 1):
            assert tab.bound_at(n) == math.comb(n - 1, j - 1)


def test_power_certificate_requires_zero_constant():
    e = expand(fr(1, 1, 0, 0))
    with pytest.raises(NonzeroConstantTermError):
        xp.power_certificate(e, 2)


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def test_compose_geometric_with_itself_doubles_rate():
    N = 21
    geo = expand([Fraction(0)] + [Fraction(1)] * (N - 1), seq=ws.gevrey(1, N + 1))
    comp = xp.compose(geo, geo, 1, 1)
    assert list(comp.coeffs) == [0] + [2 ** (n - 1) for n in range(1, N)]
    assert (comp.A, comp.h) == (1, 2)


def test_compose_degree_one_chain_rule():
    g = expand(fr(5, 3, "1/2", 1, 0, 0), A=5, h=6)
    f = expand(fr(0, -2, 1, "1/3", 0, 0), A=2, h=6)
    comp = xp.compose(g, f, 1, 1)
    assert comp.coeffs[0] == g.coeffs[0]
    assert comp.coeffs[1] == g.coeffs[1] * f.coeffs[1]


def test_compose_matches_polynomial_oracle():
    # g(f(z)) for small polynomials, coefficients via exact expansion
    gc = fr(1, 2, -1, "1/2", 0, 0, 0, 0)
    fc = fr(0, 1, 1, 0, -2, 0, 0, 0)
    g = expand(gc, h=4)
    f = expand(fc, h=4)
    comp = xp.compose(g, f, 1, 1)
    # oracle: expand g(f(z)) as a polynomial and truncate
    N = len(fc)
    prod = [Fraction(1)] + [Fraction(0)] * (N - 1)   # f^0
    acc = [Fraction(0)] * N
    acc[0] = gc[0]
    for j in range(1, N):
        prod = list(xp.convolve(prod, fc, N))
        for n in range(N):
            acc[n] += gc[j] * prod[n]
    assert list(comp.coeffs) == acc


def test_compose_rejects_nonzero_inner_constant():
    g = expand(fr(1, 1, 0, 0))
    f = expand(fr("1/2", 1, 0, 0))
    with pytest.raises(NonzeroConstantTermError):
        xp.compose(g, f, 1, 1)


def test_compose_certificate_paper_shape():
    g = expand(fr(0, 1, 0, 0, 0), seq=G1)
    f = expand(fr(0, 1, 0, 0, 0), seq=G1)
    comp = xp.compose(g, f, 1, 1)
    assert (comp.A, comp.h) == (1, 2)    # C A2 = 1, B h1 (1 + A1 h2) = 2


# ---------------------------------------------------------------------------
# certificate maps: monotonicity and Beurling limits
# ---------------------------------------------------------------------------

def test_product_map_monotone_and_vanishing():
    C = Fraction(3, 2)
    hs = [Fraction(1, 2 ** k) for k in range(40)]
    values = [xp.product_certificate_map(1, d, 1, d, C)[1] for d in hs]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < Fraction(1, 10 ** 10)
    # strict monotonicity in each argument separately
    _, h_lo = xp.product_certificate_map(1, Fraction(1, 4), 1, Fraction(1), C)
    _, h_hi = xp.product_certificate_map(1, Fraction(1, 2), 1, Fraction(1), C)
    assert h_lo < h_hi
    _, h_lo2 = xp.product_certificate_map(1, 1, 1, Fraction(1, 4), C)
    _, h_hi2 = xp.product_certificate_map(1, 1, 1, Fraction(1, 2), C)
    assert h_lo2 < h_hi2


def test_compose_map_monotone_and_vanishing():
    B, C = Fraction(2), Fraction(3)
    A1 = Fraction(5)
    # increasing in the inner and outer rates
    _, a = xp.compose_certificate_map(A1, Fraction(1, 4), 1, 1, C, B)
    _, b = xp.compose_certificate_map(A1, Fraction(1, 2), 1, 1, C, B)
    assert a < b
    _, c = xp.compose_certificate_map(A1, 1, 1, Fraction(1, 4), C, B)
    _, d = xp.compose_certificate_map(A1, 1, 1, Fraction(1, 2), C, B)
    assert c < d
    # Beurling re-parametrization: h2 = h1/A1 gives h3 = B h1 (1 + h1) -> 0
    h3s = []
    for k in range(1, 60):
        h1 = Fraction(1, 2 ** k)
        _, h3 = xp.compose_certificate_map(A1, h1, 1, h1 / A1, C, B)
        assert h3 == B * h1 * (1 + h1)
        h3s.append(h3)
    assert all(x > y for x, y in zip(h3s, h3s[1:]))
    assert h3s[-1] < Fraction(1, 10 ** 15)


# ---------------------------------------------------------------------------
# shift-subtract
# ---------------------------------------------------------------------------

def test_shift_subtract_examples():
    e = expand(fr(1, -1, 1))
    s = xp.shift_subtract(e)
    assert list(s.coeffs) == [0, 1, -1]
    s2 = xp.shift_subtract(s)
    assert list(s2.coeffs) == [0, -1, 1]
    e2 = expand(fr("1/2", "-1/6"))
    assert xp.shift_subtract(e2).A == Fraction(3, 2)
    assert xp.shift_subtract(e2).h == e2.h


# ---------------------------------------------------------------------------
# coefficient-bound invariant
# ---------------------------------------------------------------------------

def test_constructor_rejects_badly_bounded_coefficients():
    with pytest.raises(ValueError):
        expand(fr(1, 100))
    # survives after every operation on valid inputs
    e = expand(fr(0, 1, -2, 6, -24, 0), A=1, h=2)
    for result in (xp.product(e, e, 1), xp.compose(e, e, 1, 1),
                   xp.shift_subtract(e)):
        assert not xp.coefficient_bound_violations(result)


def test_constructor_requires_deep_enough_sequence():
    with pytest.raises(ValueError):
        xp.CertifiedExpansion(fr(*([0] * 25)), ws.gevrey(1, 10), 1, 1, S1)


# ---------------------------------------------------------------------------
# remainder identities (exact-rational oracle)
# ---------------------------------------------------------------------------

def _poly_fn(coeffs, domain=S1):
    coeffs = fr(*coeffs)

    def ev(p, precision):
        z = xp._point_value(p, precision)
        return sum(c * z ** k for k, c in enumerate(coeffs))

    def coeff(j, precision=50):
        return coeffs[j] if j < len(coeffs) else Fraction(0)

    return EvaluableFunction("poly", domain, ev, coeff, uniform_bound=mp.mpf(100))


def test_product_remainder_formula_n_zero_gives_product():
    fc = (1, -2, "1/2", 3)
    gc = (2, 1, 0, "1/4")
    f, g = _poly_fn(fc), _poly_fn(gc)
    e1, e2 = expand(fr(*fc), A=4, h=4), expand(fr(*gc), A=4, h=4)
    p = sec.LogPoint(Fraction(3, 4), 0)     # dyadic: survives mpf storage
    z = xp.as_fraction(p.r)
    assert z == Fraction(3, 4)
    got = xp.product_remainder_formula(e1, e2, f, g, p, 0)
    fv = sum(fr(*fc)[k] * z ** k for k in range(4))
    gv = sum(fr(*gc)[k] * z ** k for k in range(4))
    assert got == fv * gv


def test_product_remainder_formula_constant_g_returns_rf():
    fc = (1, -2, "1/2", 3, 0, 0)
    one = (1, 0, 0, 0, 0, 0)
    f, g = _poly_fn(fc), _poly_fn(one)
    e1, e2 = expand(fr(*fc), A=4, h=4), expand(fr(*one))
    z = Fraction(3, 8)
    p = sec.LogPoint(z, 0)
    for n in range(0, 5):
        got = xp.product_remainder_formula(e1, e2, f, g, p, n)
        fv = sum(fr(*fc)[k] * z ** k for k in range(len(fc)))
        rf = fv - sum(fr(*fc)[k] * z ** k for k in range(n))
        assert got == rf


def test_product_remainder_formula_matches_direct_remainder():
    fc = fr(1, -2, "1/2", 3, "1/5", -1)
    gc = fr("1/2", 1, -3, "2/7", 0, 2)
    f, g = _poly_fn(fc), _poly_fn(gc)
    e1 = expand(fc, A=4, h=4)
    e2 = expand(gc, A=4, h=4)
    full = xp.convolve(fc, gc, 2 * len(fc) - 1)
    for z in (Fraction(1, 8), Fraction(5, 8), Fraction(9, 8)):
        p = sec.LogPoint(z, 0)
        hv = sum(c * z ** k for k, c in enumerate(full))
        for n in range(0, 7):
            direct = hv - sum(full[k] * z ** k for k in range(n))
            via_formula = xp.product_remainder_formula(e1, e2, f, g, p, n)
            assert via_formula == direct


def test_power_remainder_recursion_identity():
    # r_{f^j}(z,n) = sum_i c_i z^i r_{f^{j-1}}(z,n-i) + r_f(z,n-j+1) f(z)^{j-1}
    fc = fr(0, 2, -1, "1/3", 1)
    deg = len(fc) - 1

    def poly_pow(k, length):
        out = [Fraction(1)] + [Fraction(0)] * (length - 1)
        for _ in range(k):
            out = list(xp.convolve(out, fc, length))
        return out

    def r_power(j, z, n):
        length = deg * j + 1
        cj = poly_pow(j, length)
        fz = sum(c * z ** k for k, c in enumerate(cj))
        return fz - sum(cj[k] * z ** k for k in range(min(n, length)))

    for z in (Fraction(1, 5), Fraction(4, 3)):
        fz = sum(c * z ** k for k, c in enumerate(fc))
        for j in range(2, 5):
            for n in range(j + 1, 9):
                lhs = r_power(j, z, n)
                rhs = sum(fc[i] * z ** i * r_power(j - 1, z, n - i)
                          for i in range(1, min(n - j, deg) + 1))
                rhs += r_power(1, z, n - j + 1) * fz ** (j - 1)
                assert lhs == rhs


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_expansion_json_roundtrip():
    e = expand(fr(1, "-1/2", "1/3", 0, 2), A="3/2", h=2)
    back = xp.from_json_dict(xp.to_json_dict(e))
    assert back.coeffs == e.coeffs
    assert back.A == e.A and back.h == e.h
    assert back.seq == e.seq
    assert back.order == e.order


def test_expansion_json_roundtrip_complex():
    with mp.workdps(50):
        c = (Fraction(1), mp.mpc(mp.mpf("0.25"), mp.mpf("-0.5")), Fraction(0))
    e = xp.CertifiedExpansion(c, ws.gevrey(1, 4), 2, 1, S1)
    back = xp.from_json_dict(xp.to_json_dict(e))
    from carleman.numeric import to_mpc
    with mp.workdps(50):
        assert all(abs(to_mpc(a) - to_mpc(b)) == 0
                   for a, b in zip(back.coeffs, e.coeffs))
