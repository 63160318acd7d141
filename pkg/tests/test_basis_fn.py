"""Basic-function evaluators: gamma, the Mittag-Leffler series, the
log kernel, and the ray-integral family."""

import math
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from carleman import basis_fn as bf
from carleman import sector as sec
from carleman.errors import DomainError, PrecisionBudgetError, RayAngleError
from carleman.numeric import to_mpf


def pt(r, theta=0):
    with mp.workdps(sec.GRID_DPS):
        return sec.LogPoint(r, theta)


# ---------------------------------------------------------------------------
# gamma
# ---------------------------------------------------------------------------

def test_gamma_integer_values():
    assert bf.gamma_real(1, 40) == 1
    assert bf.gamma_real(3, 40) == 2
    assert bf.gamma_real(6, 40) == 120


def test_gamma_half_matches_sqrt_pi():
    g = bf.gamma_real(Fraction(1, 2), 60)
    with mp.workdps(60):
        assert abs(g - mp.sqrt(mp.pi)) <= mp.sqrt(mp.pi) * mp.mpf("1e-55")


def test_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        bf.gamma_real(0, 30)
    with pytest.raises(ValueError):
        bf.gamma_real(-2.5, 30)


# ---------------------------------------------------------------------------
# Mittag-Leffler
# ---------------------------------------------------------------------------

def test_ml_at_zero_is_reciprocal_gamma():
    for B in (1, 3, 4.5):
        v = bf.mittag_leffler(1.5, B, 0, 35)
        with mp.workdps(45):
            expect = 1 / mpmath.gamma(mp.mpf(B))
            assert abs(v - expect) <= abs(expect) * mp.mpf("1e-33")


def test_ml_exponential_case():
    v = bf.mittag_leffler(1, 1, 1, 40)
    with mp.workdps(50):
        assert abs(v - mp.e) <= mp.e * mp.mpf("1e-38")


def test_ml_e_tilde_one_at_origin_limit():
    v = bf.mittag_leffler(1, 3, 0, 30)
    assert abs(v - Fraction(1, 2)) == 0


def test_ml_rejects_nonpositive_first_parameter():
    with pytest.raises(ValueError):
        bf.mittag_leffler(0, 1, 1, 30)


def test_ml_escalation_agrees_with_deep_reference():
    # moderate cancellation: E_{1,3}(-z) at z = 60 loses ~26 digits
    v = bf.mittag_leffler(1, 3, -60, 30)
    ref = bf._ml_raw(1, 3, -60, 200)
    with mp.workdps(60):
        assert abs(v - ref) <= abs(ref) * mp.mpf("1e-28")


def test_escalation_cap_raises():
    calls = []

    def never_agrees(dps):
        calls.append(dps)
        with mp.workdps(dps):
            return 1 + mp.mpf(dps) / 1000      # drifts at every level

    with pytest.raises(PrecisionBudgetError):
        bf._escalate(never_agrees, 60)
    assert len(calls) >= 3


# ---------------------------------------------------------------------------
# the log kernel
# ---------------------------------------------------------------------------

def test_krs_coefficients():
    assert bf.krs_coefficient(0) == Fraction(1, 2)
    assert bf.krs_coefficient(1) == Fraction(-1, 6)
    assert bf.krs_coefficient(2) == Fraction(1, 12)


def test_krs_value_at_one():
    v = bf.k_rs(pt(1), 50)
    with mp.workdps(50):
        assert abs(v - (2 * mp.log(2) - 1)) <= mp.mpf("1e-45")


def test_krs_tends_to_half_at_origin():
    for r in ("1e-6", "1e-10"):
        v = bf.k_rs(pt(r), 40)
        with mp.workdps(40):
            assert abs(v - Fraction(1, 2)) <= mp.mpf("1e-5")


def test_krs_outside_slit_plane_rejected():
    with pytest.raises(DomainError):
        bf.k_rs(pt(1, 3.2), 30)


def test_krs_dual_evaluation_overlap_annulus():
    # closed form vs Taylor series on 0.4 <= r <= 0.5, |theta| <= 0.95 pi
    P = 45
    with mp.workdps(P + 20):
        for r in ("0.4", "0.45", "0.5"):
            for frac_th in ("-0.95", "-0.5", "0", "0.6", "0.95"):
                th = mp.mpf(frac_th) * mp.pi
                zc = mp.mpc(mp.mpf(r) * mp.cos(th), mp.mpf(r) * mp.sin(th))
                a = bf._krs_closed(zc, P)
                b = bf._krs_series_tail(zc, 0, P)
                assert abs(a - b) <= mp.mpf(10) ** (-(P - 10))


def test_krs_fn_uniform_bound_is_paper_constant():
    fn = bf.k_rs_fn()
    assert fn.uniform_bound == 4
    g = sec.sample_grid(fn.domain, 16, 9, "1e-4", "1e3", "0.02")
    with mp.workdps(30):
        assert all(abs(fn.evaluate(p, 25)) <= 4 for p in g)


def test_krs_remainder_tail_matches_subtraction():
    fn = bf.k_rs_fn()
    p = pt("0.3", 0.5)
    tail = fn.remainder(p, 5, 40)            # series-tail path (r < 1/2)
    direct = bf._subtract_remainder(fn, p, 5, 40)
    with mp.workdps(40):
        assert abs(tail - direct) <= abs(direct) * mp.mpf("1e-35")


# ---------------------------------------------------------------------------
# e_tilde
# ---------------------------------------------------------------------------

def test_etilde_alpha_one_first_coefficient():
    et = bf.e_tilde(1)
    assert et.coefficient(0, 30) == Fraction(1, 2)
    assert et.coefficient(2, 30) == Fraction(1, 24)


def test_etilde_signs_alternate():
    for alpha in ("0.5", 1, "1.5"):
        et = bf.e_tilde(alpha)
        for j in range(25):
            c = et.coefficient(j, 30)
            v = c if isinstance(c, Fraction) else c
            assert ((-1) ** j) * v > 0


def test_etilde_alpha_range_validated():
    for bad in (0, 2, -1, 2.5):
        with pytest.raises(ValueError):
            bf.e_tilde(bad)


def test_etilde_matches_partial_sum_near_origin():
    # 30-term partial sum pins the value far below 1e-20 at z = 0.1
    for alpha in ("0.5", 1, "1.5"):
        et = bf.e_tilde(alpha)
        v = et.evaluate(pt("0.1"), 40)
        with mp.workdps(70):
            z = mp.mpf("0.1")
            partial = mpmath.fsum(to_mpf(et.coefficient(j, 70)) * z ** j
                                  for j in range(30))
            assert abs(v - partial) <= mp.mpf("1e-20")


def test_etilde_alpha_one_dual_evaluation_at_switch():
    ser = bf._EtildeSeries(1)
    with mp.workdps(70):
        for r in ("0.8", "1.0", "1.3"):
            for th in ("-0.4", "0", "0.45"):
                ang = mp.mpf(th) * mp.pi
                zc = mp.mpc(mp.mpf(r) * mp.cos(ang), mp.mpf(r) * mp.sin(ang))
                a = bf._etilde_closed_1(zc, 45)
                b = ser.tail_raw(zc, 0, 70)[0]
                assert abs(a - b) <= mp.mpf("1e-40")


def test_etilde_closed_form_handles_huge_arguments():
    # the transform scales arguments far beyond the series comfort zone
    et = bf.e_tilde(1)
    v = et.evaluate(pt(20000, "0.7"), 30)
    with mp.workdps(40):
        zc = mp.mpc(20000 * mp.cos(mp.mpf("0.7")), 20000 * mp.sin(mp.mpf("0.7")))
        expect = (mp.exp(-zc) - 1 + zc) / (zc * zc)
        assert abs(v - expect) <= abs(expect) * mp.mpf("1e-25")


def test_etilde_remainder_modes_consistent():
    et = bf.e_tilde("1.5")
    p = pt(2, "0.3")
    r3 = et.remainder(p, 3, 35)
    with mp.workdps(90):
        zc = sec.to_plane(p)
        direct = bf._EtildeSeries("1.5").tail_raw(zc, 0, 90)[0] - \
            mpmath.fsum(to_mpf(et.coefficient(j, 90)) * zc ** j for j in range(3))
        assert abs(r3 - direct) <= abs(direct) * mp.mpf("1e-30")


def test_etilde_uniform_bound_prescan_covers_samples():
    et = bf.e_tilde(1)
    ub = et.uniform_bound
    g = sec.sample_grid(et.domain, 10, 7, "1e-3", 30, "0.05")
    with mp.workdps(30):
        assert all(abs(et.evaluate(p, 25)) <= ub for p in g)


def test_etilde_domain_checked():
    et = bf.e_tilde(1)
    with pytest.raises(DomainError):
        et.evaluate(pt(1, 2.0), 30)          # |theta| >= pi/2


# ---------------------------------------------------------------------------
# ray-integral family
# ---------------------------------------------------------------------------

FA = bf.f_alpha_alphaprime(3, 4, tol="1e-14")


def test_falpha_coefficients():
    assert FA.coefficient(0, 30) == Fraction(1, 2)
    assert FA.coefficient(1, 30) == Fraction(-1, 3)   # -Gamma(3)/6
    assert FA.coefficient(2, 30) == Fraction(math.factorial(4), 12)


def test_falpha_parameter_validation():
    with pytest.raises(ValueError):
        bf.f_alpha_alphaprime(2, 3)
    with pytest.raises(ValueError):
        bf.f_alpha_alphaprime(3, 3)


def _krs_oracle(w, dps=40):
    if abs(w) < mp.mpf("1e-6"):
        return mp.mpf(1) / 2 - w / 6 + w * w / 12
    return bf._krs_closed(mp.mpc(w), dps)


def test_falpha_matches_independent_quadrature_real_axis():
    with mp.workdps(40):
        z = mp.mpf("0.05")
        oracle = mpmath.quad(lambda t: _krs_oracle(z * t * t) * mp.exp(-t),
                             [0, 2, 10, 40])
    v = FA.evaluate(pt("0.05"), 22)
    with mp.workdps(30):
        assert abs(v - oracle) <= mp.mpf("1e-13")


def test_falpha_matches_independent_quadrature_complex():
    with mp.workdps(40):
        th = mp.mpf("0.3")
        zc = mp.mpc(mp.cos(th), mp.sin(th))
        phi = th / 2

        def integrand(t):
            w = zc * (t * mp.exp(-1j * phi)) ** 2
            return _krs_oracle(w) * mp.exp(-t * mp.exp(-1j * phi)) * mp.exp(-1j * phi)

        oracle = mpmath.quad(integrand, [0, 2, 10, 40])
    v = FA.evaluate(pt(1, "0.3"), 22)
    with mp.workdps(30):
        assert abs(v - oracle) <= mp.mpf("1e-13")


def test_falpha_quadrature_convergence_under_tolerance():
    loose = bf.f_alpha_alphaprime(3, 4, tol="1e-10")
    tight = bf.f_alpha_alphaprime(3, 4, tol="1e-16")
    p = pt("0.2", "0.1")
    a = loose.evaluate(p, 20)
    b = tight.evaluate(p, 22)
    with mp.workdps(30):
        assert abs(a - b) <= mp.mpf("1e-10")


def test_falpha_small_z_remainder_within_fitted_bound():
    # measure |f - partial_3| at small real z against the module's own
    # fitted constants for the n = 3 scale Gamma(2n+1) |z|^n
    zs = ("0.01", "0.03")
    diffs = []
    with mp.workdps(30):
        for r in zs:
            v = FA.evaluate(pt(r), 20)
            z = mp.mpf(r)
            partial = mpmath.fsum(to_mpf(FA.coefficient(j, 30)) * z ** j
                                  for j in range(3))
            diffs.append(abs(v - partial))
        scale3 = mp.mpf(math.factorial(6))
        ratios = [d / (scale3 * mp.mpf(r) ** 3) for d, r in zip(diffs, zs)]
        # C A^3 with C, A of order one: the ratio stays of moderate size
        assert all(q < 10 for q in ratios)


def test_falpha_ray_angle_infeasible_near_boundary():
    with pytest.raises(RayAngleError):
        FA.evaluate(pt(1, mp.mpf("1.49") * mp.pi), 20)


def test_falpha_quadrature_spec_constraints():
    spec = bf.quadrature_spec(FA, 0.5, 25)
    with mp.workdps(30):
        gamma = (mp.mpf(3) - 2) / 2 * mp.pi / 2
        assert abs(spec.phi) <= mp.mpf("0.95") * gamma + mp.mpf("1e-20")
        assert abs(mp.mpf("0.5") - 2 * spec.phi) < mp.mpf("0.95") * mp.pi
        assert spec.truncation > 0 and spec.panel_order == 16


def test_falpha_uniform_bound_formula():
    with mp.workdps(40):
        gamma = (mp.mpf(3) - 2) / (mp.mpf(4) - 2) * mp.pi / 2
        expect = 4 / mp.cos(mp.mpf("0.95") * gamma)
        assert abs(FA.uniform_bound - expect) <= expect * mp.mpf("1e-20")


# ---------------------------------------------------------------------------
# combinators and registry
# ---------------------------------------------------------------------------

def test_constant_minus_shifts_and_negates():
    fn = bf.k_rs_fn()
    shifted = bf.constant_minus(fn, Fraction(1, 2))
    assert shifted.coefficient(0, 30) == 0
    assert shifted.coefficient(1, 30) == Fraction(1, 6)
    p = pt("0.2", "0.4")
    with mp.workdps(40):
        lhs = shifted.evaluate(p, 35)
        rhs = Fraction(1, 2) - fn.evaluate(p, 35)
        assert abs(lhs - rhs) <= mp.mpf("1e-33")
        # remainder for n >= 1 is minus the inner remainder
        assert abs(shifted.remainder(p, 3, 35) + fn.remainder(p, 3, 35)) \
            <= mp.mpf("1e-33")
        # n = 0 remainder is -r_f(z, 1)
        assert abs(shifted.remainder(p, 0, 35) + fn.remainder(p, 1, 35)) \
            <= mp.mpf("1e-33")
    with mp.workdps(30):
        assert abs(shifted.uniform_bound - mp.mpf("4.5")) <= mp.mpf("1e-9")


def test_registry_tags():
    assert bf.registry_get("krs").kind == "krs"
    assert bf.registry_get("etilde:1").kind == "etilde:1"
    assert bf.registry_get("falpha:3:4").kind == "falpha:3:4"
    for bad in ("nope", "etilde", "falpha:3", "krs:1"):
        with pytest.raises(ValueError):
            bf.registry_get(bad)
