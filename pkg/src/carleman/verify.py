"""Numerical verification harness: remainder sups, constant fitting, and
the necessity experiments.

The central measurement is, for a function f with expansion coefficients
(c_k) and a weight sequence M, the grid sup

    W_n = sup_grid |r(z, n)| / (M_n |z|^n),    r(z, n) = f(z) - sum_{k<n} c_k z^k,

for n = 0..Nmax, followed by an FR1 fit of constants (A, h) with
W_n <= A h^n.  Remainders are obtained from the deepest order by the exact
downward recurrence r(z, n) = c_n z^n + r(z, n+1), starting from a series
tail where the evaluator provides one and from guarded subtraction
otherwise; the working precision adds enough digits to cover the gap
between the largest partial-sum term and the smallest scale M_n |z|^n, so
cancellation never eats into the reported values.

Grid sups understate true sups.  Acceptance thresholds therefore test
paper-provided constants as upper bounds, and fitted constants only for
stability under grid refinement, never for equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
from mpmath import mp

from .basis_fn import EvaluableFunction, constant_minus
from .errors import (DomainError, NonRealCoefficientError,
                     ZeroCoefficientError)
from .expansion import (CertifiedExpansion, _abs_upper, convolve,
                        shift_subtract)
from .numeric import as_fraction, decimal_str, log_value, to_mpf
from .sector import (LogPoint, Sector, contains, grid_info, sample_grid,
                     to_plane)
from .weight_seq import (EquivalenceFit, TwoParamFit, WeightSequence,
                         check_fdb, fit_fr1, partition_product_max)

_WORK_CAP_DPS = 1500


@dataclass(frozen=True)
class RemainderReport:
    """Measured sups W_n with their FR1 fit and provenance."""

    W: tuple
    fit: TwoParamFit
    grid: dict
    precision: int
    sequence: str
    function: str

    def max_W(self):
        return max(self.W)

    def to_json_dict(self) -> dict:
        return {
            "W": [decimal_str(w) for w in self.W],
            "fit": {"A": decimal_str(self.fit.A_fit),
                    "h": decimal_str(self.fit.h_fit)},
            "grid": self.grid,
            "precision": self.precision,
            "sequence": self.sequence,
            "function": self.function,
        }


def _coeff_list(f: EvaluableFunction, coeffs, Nmax: int, precision: int):
    if coeffs is not None:
        if len(coeffs) < Nmax + 1:
            raise ValueError("need coefficients c_0..c_Nmax")
        return list(coeffs[:Nmax + 1]), False
    return [f.coefficient(k, precision + 20) for k in range(Nmax + 1)], True


def _guard_digits(r, coeff_mags, M: Optional[WeightSequence], Nmax: int,
                  ub) -> int:
    """Digits separating the largest term |c_k| r^k (and |f|) from the
    smallest measurement scale M_n r^n."""
    with mp.workdps(30):
        logr = mp.log10(r)
        top = mp.log10(ub) if ub is not None else mp.mpf("-inf")
        run = mp.mpf("-inf")
        scale_min = mp.inf
        for n in range(Nmax + 1):
            if M is not None:
                scale = M.log_values[n] / mp.log(10) + n * logr
            else:
                scale = n * logr
            scale_min = min(scale_min, scale)
            if coeff_mags[n] is not None:
                run = max(run, coeff_mags[n] + n * logr)
            top = max(top, run)
        if not mpmath.isfinite(top) or not mpmath.isfinite(scale_min):
            return 15
        g = int(mp.ceil(top - scale_min))
        return max(0, min(g, _WORK_CAP_DPS))


def _deep_remainder(f: EvaluableFunction, coeffs, own: bool, p: LogPoint,
                    Nmax: int, work: int):
    with mp.workdps(work):
        if own:
            return mp.mpc(f.remainder(p, Nmax, work))
        zc = to_plane(p)
        fz = mp.mpc(f.evaluate(p, work))
        zpow = mp.mpc(1)
        total = fz
        for k in range(Nmax):
            total = total - coeffs[k] * zpow
            zpow = zpow * zc
        return total


def measure_remainders(f: EvaluableFunction, coeffs, M: WeightSequence,
                       grid: Sequence[LogPoint], Nmax: int,
                       precision: int = 50) -> RemainderReport:
    """Per-order grid sups W_n = sup |r(z,n)|/(M_n |z|^n) for n <= Nmax,
    plus the FR1 fit.  ``coeffs=None`` measures f against its own
    coefficients (enabling series-tail remainders)."""
    if Nmax + 1 > len(M):
        raise ValueError("sequence too short for requested Nmax")
    cs, own = _coeff_list(f, coeffs, Nmax, precision)
    with mp.workdps(precision + 20):
        mags = []
        for c in cs:
            m = _abs_upper(c)
            mags.append(None if m == 0 else log_value(m) / mp.log(10))
    try:
        ub = to_mpf(f.uniform_bound)
    except ValueError:
        ub = None
    W = [mp.mpf(0)] * (Nmax + 1)
    for p in grid:
        if not contains(f.domain, p):
            raise DomainError(
                f"grid point (r={mpmath.nstr(p.r, 8)}, "
                f"theta={mpmath.nstr(p.theta, 8)}) outside {f.kind} domain")
        guard = _guard_digits(p.r, mags, M, Nmax, ub)
        work = precision + guard + 15
        rn = _deep_remainder(f, cs, own, p, Nmax, work)
        with mp.workdps(work):
            zc = to_plane(p)
            zpows = [mp.mpc(1)]
            for _ in range(Nmax):
                zpows.append(zpows[-1] * zc)
            rpow = mp.power(p.r, Nmax)
            for n in range(Nmax, -1, -1):
                w = abs(rn) / (to_mpf(M.values[n]) * rpow)
                if w > W[n]:
                    W[n] = w
                if n > 0:
                    rn = cs[n - 1] * zpows[n - 1] + rn
                    rpow = rpow / p.r
    with mp.workdps(precision):
        log_ratios = [(n, mp.log(w)) for n, w in enumerate(W) if w > 0]
        A, h = fit_fr1(log_ratios, 0)
        fit = TwoParamFit(tuple(W), 0, A, h, Nmax, label="remainder")
    return RemainderReport(tuple(W), fit, {}, precision, "", f.kind)


def ctilde_estimate(f: EvaluableFunction, coeffs, grid, n: int,
                    precision: int = 50):
    """Grid sup of |z^-n r(z, n)|."""
    cs, own = _coeff_list(f, coeffs, n, precision)
    with mp.workdps(precision + 20):
        mags = [None if _abs_upper(c) == 0 else log_value(_abs_upper(c)) / mp.log(10)
                for c in cs]
    try:
        ub = to_mpf(f.uniform_bound)
    except ValueError:
        ub = None
    best = mp.mpf(0)
    for p in grid:
        if not contains(f.domain, p):
            raise DomainError("grid point outside domain")
        guard = _guard_digits(p.r, mags, None, n, ub)
        work = precision + guard + 15
        rn = _deep_remainder(f, cs, own, p, n, work)
        with mp.workdps(work):
            v = abs(rn) / mp.power(p.r, n)
            if v > best:
                best = v
    return best


def coefficient_equivalence(coeffs, M: WeightSequence, window) -> EquivalenceFit:
    """Window constants b_low/b_high with
    b_low^j M_j <= |c_j| <= b_high^j M_j on j0 <= j <= j1."""
    j0, j1 = window
    if j0 < 1 or j1 + 1 > len(M) or j1 + 1 > len(coeffs):
        raise ValueError("window out of range")
    diffs = []
    with mp.workdps(M.dps + 10):
        for j in range(j0, j1 + 1):
            mag = _abs_upper(coeffs[j])
            if mag == 0:
                raise ZeroCoefficientError(f"c_{j} = 0 on the window")
            diffs.append((as_fraction(log_value(mag))
                          - as_fraction(M.log_values[j])) / j)
    lo, hi = min(diffs), max(diffs)
    with mp.workdps(M.dps):
        log_lo, log_hi = to_mpf(lo), to_mpf(hi)
        return EquivalenceFit(mp.exp(log_lo), mp.exp(log_hi),
                              log_lo, log_hi, j1)


def sign_pattern(coeffs, imag_tol="1e-25") -> bool:
    """True iff the coefficients are real (within tolerance) and satisfy
    c_j = (-1)^j |c_j| with strict alternation starting positive."""
    tol = mp.mpf(imag_tol)
    with mp.workdps(40):
        for j, c in enumerate(coeffs):
            if isinstance(c, (mpmath.mpc, complex)):
                z = mp.mpc(c)
                if abs(z.imag) > tol * max(1, abs(z)):
                    raise NonRealCoefficientError(f"c_{j} has imaginary part "
                                                  f"{mpmath.nstr(z.imag, 8)}")
                c = z.real
            sign = -1 if j % 2 else 1
            if not (sign * c > 0):
                return False
    return True


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductNecessityReport:
    """f*f coefficient chain: signs, super-multiplicativity of |c|, and the
    (alg) constant the chain implies."""

    depth: int
    sign_ok: bool
    inequalities_ok: bool
    first_violation: Optional[tuple]
    C_implied: mpmath.mpf
    C_reference: mpmath.mpf
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "sign_ok": self.sign_ok,
            "inequalities_ok": self.inequalities_ok,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "C_implied": decimal_str(self.C_implied),
            "C_reference": decimal_str(self.C_reference),
            "passed": self.passed,
        }


def product_necessity_experiment(M: WeightSequence, alpha, N: int,
                                 alphaprime=None,
                                 precision: int = 50) -> ProductNecessityReport:
    """Builds the characteristic function f for (M, alpha), convolves its
    coefficient list with itself, and checks the chain that forces (alg):
    alternating signs of c^{ff}, |c^{ff}_{j+k}| >= |c^f_j| |c^f_k|, and the
    implied constant C with M_j M_k <= C^{j+k} M_{j+k}."""
    from .char_transform import characteristic_for
    from .weight_seq import check_alg
    tr = characteristic_for(M, alpha, alphaprime=alphaprime, order=N + 1)
    c = tr.expansion.coeffs
    h = convolve(c, c, N + 1)
    sign_ok = sign_pattern(h)
    first = None
    for n in range(N + 1):
        for j in range(n + 1):
            lhs = _abs_upper(h[n])
            rhs = _abs_upper(c[j]) * _abs_upper(c[n - j])
            if lhs < rhs:
                first = (j, n - j)
                break
        if first:
            break
    inequalities_ok = first is None
    # chain constants: upper fit of |c^{ff}| against M, lower fit of |c^f|
    with mp.workdps(precision):
        upper = [(n, log_value(_abs_upper(h[n])) - M.log_values[n])
                 for n in range(N + 1) if _abs_upper(h[n]) != 0]
        A1, d1 = fit_fr1(upper, 0)
        eq = coefficient_equivalence(c, M, (1, N))
        C_implied = d1 / eq.b_low
        ref = check_alg(M, N).A_fit
    passed = sign_ok and inequalities_ok
    return ProductNecessityReport(N, sign_ok, inequalities_ok, first,
                                  C_implied, ref, passed)


@dataclass(frozen=True)
class SectorImageReport:
    """Image-geometry sweep for f_0 = c_0 - f on shrinking sectors
    S_{beta, r}: argument deviation |arg f_0(z) - arg z| and containment
    of the image in the target sector."""

    alpha: mpmath.mpf
    beta: mpmath.mpf
    epsilon: mpmath.mpf
    levels: tuple
    r_found: Optional[mpmath.mpf]
    max_deviation: Optional[mpmath.mpf]
    contained: bool
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "alpha": decimal_str(self.alpha),
            "beta": decimal_str(self.beta),
            "epsilon": decimal_str(self.epsilon),
            "levels": [
                {"r": decimal_str(lv["r"]),
                 "max_deviation": decimal_str(lv["max_deviation"]),
                 "contained": lv["contained"],
                 "ok": lv["ok"]} for lv in self.levels
            ],
            "r_found": decimal_str(self.r_found) if self.r_found is not None else None,
            "max_deviation": decimal_str(self.max_deviation) if self.max_deviation is not None else None,
            "contained": self.contained,
            "passed": self.passed,
        }


def sector_image_check(f0: EvaluableFunction, beta=None, r=None, alpha=None,
                       epsilon=None, n_r: int = 12, n_theta: int = 7,
                       precision: int = 30,
                       sweep_levels: int = 8) -> SectorImageReport:
    """Measures max |arg f_0(z) - arg z| over grids in S_{beta, r} and flags
    whether f_0(S_{beta,r}) stays inside S_alpha.  With r=None, sweeps
    r = 1, 1/2, 1/4, ... and reports the first radius where the epsilon
    bound and containment both hold (the empirical threshold)."""
    if alpha is None:
        raise ValueError("target opening alpha is required")
    with mp.workdps(40):
        alpha = to_mpf(as_fraction(alpha))
        beta = to_mpf(as_fraction(beta)) if beta is not None else alpha / 2
        epsilon = (to_mpf(as_fraction(epsilon)) if epsilon is not None
                   else mp.pi / 4 * (alpha - beta))
        if not (0 < epsilon < mp.pi / 2 * (alpha - beta)):
            raise ValueError("need 0 < epsilon < (pi/2)(alpha - beta)")
        half_target = alpha * mp.pi / 2
    radii = ([to_mpf(as_fraction(r))] if r is not None
             else [mp.mpf(2) ** (-k) for k in range(sweep_levels + 1)])
    levels = []
    r_found = None
    dev_found = None
    contained_found = False
    for rk in radii:
        sec_k = Sector(0, beta * mp.pi / 2, rk)
        grid = sample_grid(sec_k, n_r, n_theta, rk * mp.mpf("1e-4"), rk,
                           "0.02")
        max_dev = mp.mpf(0)
        contained = True
        for p in grid:
            fv = f0.evaluate(p, precision)
            with mp.workdps(precision):
                ang = mpmath.arg(fv)
                dev = abs(ang - p.theta)
                max_dev = max(max_dev, dev)
                if not abs(ang) < half_target:
                    contained = False
        ok = bool(max_dev <= epsilon and contained)
        levels.append({"r": rk, "max_deviation": max_dev,
                       "contained": contained, "ok": ok})
        if ok:
            r_found, dev_found, contained_found = rk, max_dev, contained
            break
    passed = r_found is not None
    return SectorImageReport(alpha, beta, epsilon, tuple(levels), r_found,
                             dev_found, contained_found, passed)


@dataclass(frozen=True)
class CompositionClosureReport:
    """Coefficient-level composition experiment: signs of c^phi, the
    partition lower bound, and the (FdB) constants the chain implies."""

    depth: int
    sign_ok: bool
    lower_ok: bool
    first_violation: Optional[int]
    implied_C: mpmath.mpf
    implied_h: mpmath.mpf
    reference_C: mpmath.mpf
    reference_h: mpmath.mpf
    sector_report: SectorImageReport
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "sign_ok": self.sign_ok,
            "lower_ok": self.lower_ok,
            "first_violation": self.first_violation,
            "implied_C": decimal_str(self.implied_C),
            "implied_h": decimal_str(self.implied_h),
            "reference_C": decimal_str(self.reference_C),
            "reference_h": decimal_str(self.reference_h),
            "sector_check": self.sector_report.to_json_dict(),
            "passed": self.passed,
        }


def composition_closure_experiment(M: WeightSequence, alpha, N: int,
                                   alphaprime=None,
                                   precision: int = 50) -> CompositionClosureReport:
    """phi = f o (c_0 - f) for the characteristic f of (M, alpha): checks
    the sign identity c^phi_n = (-1)^n |c^phi_n|, the lower bound
    |c^phi_n| >= A B^n max_partitions M_l M_{m_1}...M_{m_l}, and compares
    the implied (FdB) constants with the direct partition search."""
    from .char_transform import characteristic_for
    from .expansion import compose
    from .numeric import fraction_below
    tr = characteristic_for(M, alpha, alphaprime=alphaprime, order=N + 1)
    e_f = tr.expansion
    f0 = shift_subtract(e_f)
    fdb_here = check_fdb(e_f.seq, min(N, 25))
    phi = compose(e_f, f0, fdb_here.A_fit, fdb_here.h_fit)
    sign_ok = sign_pattern(phi.coeffs)
    # lower-equivalence witnesses |c^f_j| >= A2 B^j M_j, taken exactly
    eq = coefficient_equivalence(e_f.coeffs, M, (1, N))
    B = fraction_below(eq.b_low)
    A2 = None
    exact = e_f.is_rational and M.is_rational
    for j in range(1, N + 1):
        mag = _abs_upper(e_f.coeffs[j])
        q = (Fraction(mag) / (B ** j * Fraction(M.values[j]))) if exact else \
            to_mpf(mag) / (to_mpf(B) ** j * to_mpf(M.values[j]))
        A2 = q if A2 is None or q < A2 else A2
    A2 = min(A2, _abs_upper(e_f.coeffs[0]))
    if A2 * B >= 1:
        A_eff, B_eff = A2, B
    else:
        A_eff, B_eff = A2, A2 * B * B
    first = None
    for n in range(1, N + 1):
        maxpart = partition_product_max(M, n)
        lhs = _abs_upper(phi.coeffs[n])
        rhs = A_eff * B_eff ** n * maxpart
        if exact:
            bad = Fraction(lhs) < rhs
        else:
            with mp.workdps(40):
                bad = to_mpf(lhs) < to_mpf(rhs) * (1 - mp.mpf("1e-20"))
        if bad:
            first = n
            break
    lower_ok = first is None
    with mp.workdps(precision):
        upper = [(n, log_value(_abs_upper(phi.coeffs[n])) - M.log_values[n])
                 for n in range(N + 1) if _abs_upper(phi.coeffs[n]) != 0]
        A1, h1 = fit_fr1(upper, 0)
        implied_C = A1 / to_mpf(A_eff)
        implied_h = h1 / to_mpf(B_eff)
        ref = check_fdb(M, min(N, 25))
    f0_fn = constant_minus(tr.result, e_f.coeffs[0])
    sec_rep = sector_image_check(f0_fn, alpha=alpha, n_r=8, n_theta=5,
                                 precision=25, sweep_levels=6)
    passed = sign_ok and lower_ok and sec_rep.passed
    return CompositionClosureReport(N, sign_ok, lower_ok, first, implied_C,
                                    implied_h, ref.A_fit, ref.h_fit,
                                    sec_rep, passed)
