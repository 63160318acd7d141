"""Precision-adaptive evaluators for the basic sector functions.

Three families, each holomorphic on an unbounded sector bisected by the
positive real axis and bounded there, with explicitly known expansion
coefficients of alternating sign:

* ``e_tilde(alpha)``, 0 < alpha < 2: the two-parametric Mittag-Leffler
  function E_{2-alpha, 4-alpha}(-z), coefficients (-1)^j / G((2-alpha)(j+1)+2),
  defined on the sector of opening alpha*pi.
* ``k_rs_fn()``: K(z) = ((1+z) log(1+z) - z)/z^2 on the slit plane,
  coefficients (-z)^j/((j+1)(j+2)), uniformly bounded by 4.
* ``f_alpha_alphaprime(alpha, alphaprime)``, 2 < alpha < alphaprime: the
  ray integral of K(z v^(alphaprime-2)) e^(-v) along a direction chosen
  per evaluation point, coefficients (-1)^j G((alphaprime-2)j+1)/((j+1)(j+2)).

Series evaluation uses plain power-series summation with a stopping rule
(40 consecutive terms below 1e-(P+10) of the running maximum term) and
precision escalation: re-evaluate at doubled precision until two levels
agree at the requested tolerance, hard-capped at 4096 bits.  Cancellation
is handled by precision, not by algorithm switching; asymptotics of
E_{A,B} at large |z| are deliberately out of scope.  The one exception is
alpha = 1, where E_{1,3}(-z) = (e^(-z) - 1 + z)/z^2 is evaluated in closed
form for |z| >= 1 (the series would exceed the precision cap at the large
scaled arguments the characteristic transform produces).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import mpmath
from mpmath import mp

from .errors import DomainError, PrecisionBudgetError, RayAngleError
from .numeric import as_fraction, to_mpf
from .sector import LogPoint, Sector, bisected, contains, sample_grid, to_plane

DEFAULT_PRECISION = 50
ML_CAP_BITS = 4096          # precision-escalation hard cap
_ML_RUN = 40                # consecutive negligible terms before stopping
_MAX_TERMS = 200_000

KRS_BOUND = 4               # |K(z)| <= 4 on the slit plane (n = 0 bound)


def _dps_bits(dps: int) -> int:
    return mpmath.libmp.libmpf.dps_to_prec(dps)


def _agree(a, b, precision: int) -> bool:
    tol = mp.mpf(10) ** (-precision)
    diff = abs(a - b)
    return diff <= tol * max(abs(b), tol)


def _escalate(eval_at_dps: Callable[[int], mpmath.mpc], precision: int,
              what: str = "series"):
    """Evaluate at increasing precision until two successive levels agree
    to 1e-precision (relative), starting from (P, 2P)."""
    prev = eval_at_dps(precision + 10)
    work = 2 * precision
    while True:
        if _dps_bits(work + 10) > ML_CAP_BITS:
            raise PrecisionBudgetError(
                f"{what}: escalation exceeded {ML_CAP_BITS} bits before "
                f"two levels agreed at 1e-{precision}")
        cur = eval_at_dps(work + 10)
        if _agree(cur, prev, precision):
            with mp.workdps(precision):
                return +cur
        prev = cur
        work *= 2


# ---------------------------------------------------------------------------
# evaluator wrapper
# ---------------------------------------------------------------------------

class EvaluableFunction:
    """Precision-aware evaluator on a sector, with exact coefficient access.

    ``tail_fn(p, n, precision)`` may return the remainder r(z, n) directly
    (series tail) or None where a direct tail is unavailable; callers fall
    back to evaluate-minus-partial-sum with guard digits in that case.
    ``uniform_bound`` is a finite bound for |f| on the domain, computed
    lazily when a closed-form bound is not known.
    """

    def __init__(self, kind: str, domain: Sector,
                 eval_fn: Callable[[LogPoint, int], mpmath.mpc],
                 coeff_fn: Callable[[int, int], object],
                 uniform_bound=None,
                 bound_fn: Optional[Callable[[], mpmath.mpf]] = None,
                 tail_fn=None):
        self.kind = kind
        self.domain = domain
        self._eval = eval_fn
        self._coeff = coeff_fn
        self._bound = uniform_bound
        self._bound_fn = bound_fn
        self._tail = tail_fn

    @property
    def uniform_bound(self):
        if self._bound is None:
            if self._bound_fn is None:
                raise ValueError(f"{self.kind}: no uniform bound available")
            self._bound = self._bound_fn()
        return self._bound

    def evaluate(self, p: LogPoint, precision: int = DEFAULT_PRECISION):
        if not contains(self.domain, p):
            raise DomainError(f"{self.kind}: point (r={mpmath.nstr(p.r, 8)}, "
                              f"theta={mpmath.nstr(p.theta, 8)}) outside domain")
        # ambient working precision at least the request, so evaluators
        # that lean on the context cannot silently round to fewer digits
        with mp.workdps(max(mp.dps, precision + 5)):
            return self._eval(p, precision)

    def coefficient(self, j: int, precision: int = DEFAULT_PRECISION):
        return self._coeff(j, precision)

    def remainder(self, p: LogPoint, n: int, precision: int = DEFAULT_PRECISION):
        """r(z, n) = f(z) - sum_{k<n} c_k z^k, accurate to ~1e-precision
        relative.  Uses the series tail where available, otherwise guarded
        subtraction."""
        if not contains(self.domain, p):
            raise DomainError(f"{self.kind}: point outside domain")
        if self._tail is not None:
            v = self._tail(p, n, precision)
            if v is not None:
                return v
        return _subtract_remainder(self, p, n, precision)


def _point_pow(zc, k: int):
    p = mp.mpc(1)
    for _ in range(k):
        p = p * zc
    return p


def _subtract_remainder(f: EvaluableFunction, p: LogPoint, n: int,
                        precision: int):
    """f(z) minus its degree-(n-1) partial sum, escalating the working
    precision until the subtraction retains ~precision relative digits."""
    guard = 15
    prev_ratio = None
    prev_work = None
    for _ in range(8):
        work = precision + guard
        with mp.workdps(work):
            zc = to_plane(p)
            fz = mp.mpc(f.evaluate(p, work))
            total = fz
            biggest = abs(fz)
            zpow = mp.mpc(1)
            for k in range(n):
                t = f.coefficient(k, work) * zpow
                total = total - t
                biggest = max(biggest, abs(t))
                zpow = zpow * zc
            if total == 0 or biggest == 0:
                # exact cancellation at working precision: measured zero
                return mp.mpc(0)
            ratio = abs(total) / biggest
            loss = -mp.log10(ratio)
            if loss + precision + 5 <= work:
                return total
            if (prev_ratio is not None
                    and ratio <= prev_ratio * mp.mpf(10) ** (-(work - prev_work) + 5)):
                # the residue shrinks one-for-one with the working
                # precision: a structural zero, not a small remainder
                return mp.mpc(0)
            prev_ratio, prev_work = ratio, work
            guard = int(mp.ceil(loss)) + precision // 4 + 15
    raise PrecisionBudgetError(
        f"{f.kind}: remainder subtraction at n={n} did not stabilize")


def constant_minus(f: EvaluableFunction, c) -> EvaluableFunction:
    """The function c - f on the same domain (used with c = c_0 to produce
    a vanishing constant term).  Remainders for n >= 1 are -r_f(z, n); the
    n = 0 remainder is -r_f(z, 1) when c is f's own constant term."""
    c_frac = as_fraction(c)

    def ev(p, precision):
        with mp.workdps(precision + 5):
            return to_mpf(c_frac) - f.evaluate(p, precision + 5)

    def coeff(j, precision):
        if j == 0:
            return Fraction(0)
        cj = f.coefficient(j, precision)
        return -cj

    def tail(p, n, precision):
        if n == 0:
            inner = f.remainder(p, 1, precision)
        else:
            inner = f.remainder(p, n, precision)
        return -inner

    def bound():
        with mp.workdps(30):
            return abs(to_mpf(c_frac)) + to_mpf(f.uniform_bound)

    return EvaluableFunction(f"shift:{f.kind}", f.domain, ev, coeff,
                             bound_fn=bound, tail_fn=tail)


def _prescan_bound(f_eval, domain: Sector, r_max, n_r=32, n_theta=11,
                   headroom=2) -> mpmath.mpf:
    """Grid pre-scan estimate of sup |f| with multiplicative headroom for
    off-grid points."""
    grid = sample_grid(domain, n_r, n_theta, mp.mpf("1e-6"), r_max, "0.02")
    with mp.workdps(30):
        best = mp.mpf(0)
        for p in grid:
            best = max(best, abs(f_eval(p, 25)))
        return headroom * best


# ---------------------------------------------------------------------------
# gamma
# ---------------------------------------------------------------------------

def gamma_real(x, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Gamma(x) for real x > 0 with relative error below 1e-(precision-5)."""
    with mp.workdps(precision + 10):
        xv = to_mpf(as_fraction(x)) if isinstance(x, (int, Fraction, str)) else mp.mpf(x)
        if not xv > 0:
            raise ValueError("gamma_real requires a positive argument")
        v = mpmath.gamma(xv)
    with mp.workdps(precision):
        return +v


# ---------------------------------------------------------------------------
# Mittag-Leffler
# ---------------------------------------------------------------------------

def _ml_raw(A, B, z, dps: int) -> mpmath.mpc:
    """Single fixed-precision pass of the defining series
    sum_j z^j / Gamma(A j + B)."""
    with mp.workdps(dps):
        Av, Bv = mp.mpf(A), mp.mpf(B)
        zc = mp.mpc(z)
        thresh_scale = mp.mpf(10) ** (-(dps + 10))
        total = mp.mpc(0)
        zpow = mp.mpc(1)
        maxterm = mp.mpf(0)
        run = 0
        for j in range(_MAX_TERMS):
            term = zpow * mpmath.rgamma(Av * j + Bv)
            total += term
            at = abs(term)
            maxterm = max(maxterm, at)
            run = run + 1 if (maxterm > 0 and at <= maxterm * thresh_scale) else 0
            if run >= _ML_RUN:
                return total
            zpow = zpow * zc
        raise PrecisionBudgetError("Mittag-Leffler series did not terminate "
                                   f"within {_MAX_TERMS} terms")


def mittag_leffler(A, B, z, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
    """E_{A,B}(z) = sum_j z^j / Gamma(A j + B) for real A > 0, by adaptive
    truncation plus precision escalation (two successive precision levels
    must agree at the requested tolerance)."""
    if not mp.mpf(A) > 0:
        raise ValueError("first Mittag-Leffler parameter must be positive")
    return _escalate(lambda d: _ml_raw(A, B, z, d), precision,
                     what=f"E_{{{A},{B}}}")


# ---------------------------------------------------------------------------
# K(z) = ((1+z) log(1+z) - z)/z^2
# ---------------------------------------------------------------------------

_KRS_SWITCH = Fraction(1, 2)     # closed form at r >= 1/2, series below


def krs_coefficient(j: int) -> Fraction:
    return Fraction((-1) ** j, (j + 1) * (j + 2))


def _krs_closed(zc: mpmath.mpc, dps: int) -> mpmath.mpc:
    """Closed form with the principal log branch; 1+z avoids the cut for
    |arg z| < pi.  Guard digits cover the ~log10(1/|z|) cancellation of
    (1+z)log(1+z) - z near the origin."""
    r = abs(zc)
    guard = 12
    if r < 1:
        guard += int(mp.ceil(-mp.log10(r))) + 3
    with mp.workdps(dps + guard):
        z = mp.mpc(zc)
        w = 1 + z
        v = (w * mp.log(w) - z) / (z * z)
    with mp.workdps(dps):
        return +v


def _krs_series_tail(zc: mpmath.mpc, n: int, dps: int) -> mpmath.mpc:
    """sum_{j>=n} (-1)^j z^j / ((j+1)(j+2)) for |z| < 1, with the geometric
    tail bound r^J/((J+1)(J+2)(1-r)) driving the truncation."""
    with mp.workdps(dps + 10):
        z = mp.mpc(zc)
        r = abs(z)
        total = mp.mpc(0)
        zpow = _point_pow(z, n)
        target = mp.mpf(10) ** (-(dps + 5))
        j = n
        while True:
            term = zpow / ((j + 1) * (j + 2))
            if j % 2:
                total -= term
            else:
                total += term
            zpow = zpow * z
            tail_bound = abs(zpow) / ((j + 2) * (j + 3) * (1 - r))
            if tail_bound <= target:
                break
            j += 1
            if j > _MAX_TERMS:
                raise PrecisionBudgetError("K series did not converge")
    with mp.workdps(dps):
        return +total


def k_rs(z: LogPoint, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
    """Pointwise evaluation on the slit plane |arg z| < pi: closed form for
    r >= 1/2, Taylor series below."""
    if not abs(z.theta) < mp.pi:
        raise DomainError("K requires |arg z| < pi")
    with mp.workdps(precision + 10):
        zc = to_plane(z)
    if as_fraction(z.r) >= _KRS_SWITCH:
        return _krs_closed(zc, precision)
    return _krs_series_tail(zc, 0, precision)


def k_rs_fn() -> EvaluableFunction:
    """K as an evaluator on the full slit plane, uniform bound 4."""
    domain = bisected(2)

    def ev(p, precision):
        return k_rs(p, precision)

    def coeff(j, precision=DEFAULT_PRECISION):
        return krs_coefficient(j)

    def tail(p, n, precision):
        if as_fraction(p.r) >= _KRS_SWITCH:
            return None            # fall back to guarded subtraction
        with mp.workdps(precision + 10):
            zc = to_plane(p)
        return _krs_series_tail(zc, n, precision)

    return EvaluableFunction("krs", domain, ev, coeff,
                             uniform_bound=mp.mpf(KRS_BOUND), tail_fn=tail)


# ---------------------------------------------------------------------------
# e_tilde
# ---------------------------------------------------------------------------

class _EtildeSeries:
    """Coefficient cache and series summation for E_{2-a, 4-a}(-z)."""

    def __init__(self, alpha):
        self.alpha = as_fraction(alpha)
        self.exact = (self.alpha == 1)
        self._cache: dict = {}        # dps level -> list of |c_j| as mpf
        self._frac_cache: list = []   # exact |c_j| for alpha = 1

    def abs_coeff(self, j: int, dps: int):
        """|c_j| = 1/Gamma((2-a)(j+1)+2) > 0."""
        if self.exact:
            while len(self._frac_cache) <= j:
                k = len(self._frac_cache)
                self._frac_cache.append(Fraction(1, math.factorial(k + 2)))
            return self._frac_cache[j]
        level = 20 * ((dps + 19) // 20)     # quantize cache levels
        col = self._cache.setdefault(level, [])
        while len(col) <= j:
            k = len(col)
            with mp.workdps(level + 10):
                arg = (2 - to_mpf(self.alpha)) * (k + 1) + 2
                col.append(mpmath.rgamma(arg))
        return col[j]

    def signed_coeff(self, j: int, dps: int):
        c = self.abs_coeff(j, dps)
        return -c if j % 2 else c

    def tail_raw(self, zc, n: int, dps: int) -> mpmath.mpc:
        """sum_{j>=n} (-z)^j |c_j| at fixed precision (stopping rule as in
        the Mittag-Leffler evaluator).  Returns (value, maxterm)."""
        with mp.workdps(dps):
            x = -mp.mpc(zc)
            total = mp.mpc(0)
            xpow = _point_pow(x, n)
            thresh_scale = mp.mpf(10) ** (-(dps + 10))
            maxterm = mp.mpf(0)
            run = 0
            for j in range(n, _MAX_TERMS):
                term = xpow * to_mpf(self.abs_coeff(j, dps))
                total += term
                at = abs(term)
                maxterm = max(maxterm, at)
                run = run + 1 if (maxterm > 0 and at <= maxterm * thresh_scale) else 0
                if run >= _ML_RUN:
                    return total, maxterm
                xpow = xpow * x
            raise PrecisionBudgetError("e_tilde series did not terminate")

    def tail_measured(self, zc, n: int, precision: int) -> mpmath.mpc:
        """Tail value to ~1e-precision relative, sizing the second pass
        from the cancellation observed in the first (maxterm/|total|)."""
        dps = precision + 15
        total, maxterm = self.tail_raw(zc, n, dps)
        if total == 0 or maxterm == 0:
            return total
        with mp.workdps(20):
            loss = max(0, int(mp.ceil(mp.log10(maxterm / abs(total)))))
        if loss <= 5:
            return total
        dps2 = precision + loss + 20
        if _dps_bits(dps2) > ML_CAP_BITS:
            raise PrecisionBudgetError("e_tilde tail cancellation exceeds "
                                       "the precision cap")
        total2, maxterm2 = self.tail_raw(zc, n, dps2)
        if total2 == 0:
            return total2
        with mp.workdps(20):
            loss2 = max(0, int(mp.ceil(mp.log10(maxterm2 / abs(total2)))))
        if loss2 > loss + 5:
            # first estimate was itself noise; one more properly sized pass
            dps3 = precision + loss2 + 20
            if _dps_bits(dps3) > ML_CAP_BITS:
                raise PrecisionBudgetError("e_tilde tail cancellation "
                                           "exceeds the precision cap")
            total2, _ = self.tail_raw(zc, n, dps3)
        with mp.workdps(precision):
            return +total2


def _etilde_closed_1(zc: mpmath.mpc, dps: int) -> mpmath.mpc:
    """alpha = 1: E_{1,3}(-z) = (e^(-z) - 1 + z)/z^2."""
    r = abs(zc)
    guard = 12
    if r < 1:
        guard += int(mp.ceil(-mp.log10(r))) + 3
    with mp.workdps(dps + guard):
        z = mp.mpc(zc)
        v = (mp.exp(-z) - 1 + z) / (z * z)
    with mp.workdps(dps):
        return +v


def e_tilde(alpha, prescan_r_max=None) -> EvaluableFunction:
    """Evaluator for E_{2-alpha,4-alpha}(-z) on the sector of opening
    alpha*pi, with coefficient access (-1)^j/Gamma((2-alpha)(j+1)+2).

    The uniform bound is obtained lazily by grid pre-scan (2x headroom);
    no closed-form constant is available for this family.
    """
    a = to_mpf(as_fraction(alpha))
    if not 0 < a < 2:
        raise ValueError("e_tilde requires 0 < alpha < 2")
    series = _EtildeSeries(alpha)
    domain = bisected(alpha)
    closed_ok = series.exact
    if prescan_r_max is None:
        # series-only evaluation loses ~|z| digits to cancellation at
        # large radii; keep the pre-scan inside the precision cap
        prescan_r_max = "1e4" if closed_ok else "20"

    def ev(p, precision):
        with mp.workdps(precision + 10):
            zc = to_plane(p)
        if closed_ok and as_fraction(p.r) >= 1:
            return _etilde_closed_1(zc, precision)
        return _escalate(lambda d: series.tail_raw(zc, 0, d)[0], precision,
                         what="e_tilde")

    def coeff(j, precision=DEFAULT_PRECISION):
        return series.signed_coeff(j, precision)

    def tail(p, n, precision):
        if closed_ok and as_fraction(p.r) >= 1:
            return None            # closed form + subtraction path
        with mp.workdps(precision + 10):
            zc = to_plane(p)
        return series.tail_measured(zc, n, precision)

    def bound():
        return _prescan_bound(ev, domain, mp.mpf(prescan_r_max))

    return EvaluableFunction(f"etilde:{alpha}", domain, ev, coeff,
                             bound_fn=bound, tail_fn=tail)


# ---------------------------------------------------------------------------
# ray-integral family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Ray direction and panel layout for one evaluation of the integral
    family: integrate over v = t e^(-i phi), t in (0, T], 16-point
    Gauss-Legendre panels, geometrically subdivided near t = 0."""

    phi: mpmath.mpf
    panel_order: int
    truncation: mpmath.mpf
    tol: mpmath.mpf
    geometric_levels: int

    def breakpoints(self):
        """0 < T 2^-K < ... < T/2 < T/2+1-ish unit panels up to T."""
        pts = [self.truncation * mp.mpf(2) ** (-k)
               for k in range(self.geometric_levels, -1, -1)]
        t = pts[-1]
        while t < self.truncation:
            t = min(t + 1, self.truncation)
            pts.append(t)
        return pts


_PHI_DELTA = Fraction(1, 20)     # 5% margin off sector/ray constraints


class _RayIntegral:
    def __init__(self, alpha, alphaprime, tol):
        self.alpha = to_mpf(as_fraction(alpha))
        self.alphaprime = to_mpf(as_fraction(alphaprime))
        self.s = self.alphaprime - 2          # power scaling exponent
        self.tol = mp.mpf(tol)
        self.sfrac = as_fraction(alphaprime) - 2
        self.exact_coeffs = self.sfrac.denominator == 1

    def gamma_angle(self):
        return (self.alpha - 2) / self.s * mp.pi / 2

    def choose_phi(self, theta):
        """phi = clamp(theta/s, +-(1-delta)*gamma); the K argument then has
        |arg| < (1-delta)*pi, else the ray is infeasible."""
        with mp.workdps(40):
            delta = to_mpf(_PHI_DELTA)
            gamma = self.gamma_angle()
            lim = (1 - delta) * gamma
            phi = theta / self.s
            phi = max(-lim, min(lim, phi))
            if not abs(theta - self.s * phi) < (1 - delta) * mp.pi:
                raise RayAngleError(
                    f"no admissible ray angle at arg={mpmath.nstr(theta, 8)}")
            return phi

    def spec(self, theta, precision, n: int = 0, r=1) -> QuadratureSpec:
        """Ray and panel layout; for the order-n remainder kernel the
        truncation grows to cover the algebraic factor |z v^s|^n in the
        integrand tail bound 4 |z| (t^s)^n e^(-t cos phi)."""
        with mp.workdps(precision + 10):
            phi = self.choose_phi(theta)
            tol = min(self.tol, mp.mpf(10) ** (-precision))
            c = mp.cos(phi)
            T = mp.log(8 / (tol * c)) / c
            if n > 0:
                rv = mp.mpf(r)
                extra = self.s * n * mp.log(T + self.s * n + 3)
                if rv > 1:
                    extra += n * mp.log(rv)
                T = T + extra / c + 5
            K = int(mp.ceil(mp.log(8 / tol, 2))) + 4
            return QuadratureSpec(phi, 16, T, tol, K)

    def integrand(self, zp: LogPoint, phi, t, dps, kernel=None):
        """kernel(z v^s) e^(-v) e^(-i phi) with v = t e^(-i phi); the kernel
        argument is the surface point (r t^s, theta - s phi).  The default
        kernel is the log kernel itself; remainder kernels reuse the same
        ray (the remainder of the integral is the integral of the kernel
        remainder)."""
        with mp.workdps(dps):
            arg_r = zp.r * t ** self.s
            arg_th = zp.theta - self.s * phi
            w = LogPoint(arg_r, arg_th)
            kval = k_rs(w, dps) if kernel is None else kernel(w, dps)
            v = t * mp.exp(-1j * phi)
            return kval * mp.exp(-v) * mp.exp(-1j * phi)

    def value(self, zp: LogPoint, precision, kernel=None,
              n: int = 0) -> mpmath.mpc:
        from .numeric import gauss_legendre_nodes
        spec = self.spec(zp.theta, precision, n=n, r=zp.r)
        dps = precision + 15
        nodes, weights = gauss_legendre_nodes(spec.panel_order, dps)
        base = spec.breakpoints()

        def level_value(splits: int) -> mpmath.mpc:
            with mp.workdps(dps):
                total = mp.mpc(0)
                for a, b in zip(base[:-1], base[1:]):
                    width = (b - a) / splits
                    half = width / 2
                    for s_i in range(splits):
                        mid = a + s_i * width + half
                        acc = mp.mpc(0)
                        for x, w in zip(nodes, weights):
                            acc += w * self.integrand(zp, spec.phi,
                                                      mid + half * x, dps,
                                                      kernel=kernel)
                        total += acc * half
                return total

        prev = level_value(1)
        for level in range(1, 7):
            cur = level_value(2 ** level)
            if abs(cur - prev) <= spec.tol / 2:
                with mp.workdps(precision):
                    return +cur
            prev = cur
        raise PrecisionBudgetError("ray quadrature did not converge to the "
                                   "requested tolerance")


def f_alpha_alphaprime(alpha, alphaprime, tol="1e-25") -> EvaluableFunction:
    """Ray-integral evaluator on the sector of opening alpha*pi (alpha > 2),
    coefficients (-1)^j Gamma((alphaprime-2)j+1)/((j+1)(j+2)).

    The uniform bound 4/cos((1-delta)*gamma) follows from the kernel bound
    and exponential decay along every admissible ray.
    """
    a, ap = to_mpf(as_fraction(alpha)), to_mpf(as_fraction(alphaprime))
    if not (a > 2 and ap > a):
        raise ValueError("need 2 < alpha < alphaprime")
    ray = _RayIntegral(alpha, alphaprime, tol)
    domain = bisected(alpha)
    kernel_fn = k_rs_fn()

    def ev(p, precision):
        return ray.value(p, precision)

    def tail(p, n, precision):
        # r_f(z, n) = integral of r_K(z v^s, n) e^(-v) dv along the ray
        if n == 0:
            return ray.value(p, precision)
        return ray.value(p, precision,
                         kernel=lambda w, d: kernel_fn.remainder(w, n, d),
                         n=n)

    def coeff(j, precision=DEFAULT_PRECISION):
        if ray.exact_coeffs:
            s = ray.sfrac.numerator
            return Fraction((-1) ** j * math.factorial(s * j),
                            (j + 1) * (j + 2))
        g = gamma_real(ray.sfrac * j + 1, precision)
        sign = -1 if j % 2 else 1
        with mp.workdps(precision):
            return sign * g / ((j + 1) * (j + 2))

    def bound():
        with mp.workdps(40):
            delta = to_mpf(_PHI_DELTA)
            return KRS_BOUND / mp.cos((1 - delta) * ray.gamma_angle())

    return EvaluableFunction(f"falpha:{alpha}:{alphaprime}", domain, ev,
                             coeff, bound_fn=bound, tail_fn=tail)


def quadrature_spec(f: EvaluableFunction, theta,
                    precision: int = DEFAULT_PRECISION) -> QuadratureSpec:
    """Expose the ray/panel layout the integral evaluator would use at a
    given argument (for tests and reports)."""
    if not f.kind.startswith("falpha:"):
        raise ValueError("quadrature_spec applies to the ray-integral family")
    _, a, ap = f.kind.split(":")
    ray = _RayIntegral(a, ap, "1e-25")
    return ray.spec(mp.mpf(theta), precision)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def registry_get(tag: str) -> EvaluableFunction:
    """Function registry by kind tag: "krs", "etilde:<alpha>",
    "falpha:<alpha>:<alphaprime>"."""
    parts = tag.split(":")
    if parts[0] == "krs" and len(parts) == 1:
        return k_rs_fn()
    if parts[0] == "etilde" and len(parts) == 2:
        return e_tilde(parts[1])
    if parts[0] == "falpha" and len(parts) == 3:
        return f_alpha_alphaprime(parts[1], parts[2])
    raise ValueError(f"unknown function tag {tag!r}")
