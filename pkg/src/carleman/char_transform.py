"""The characteristic transform and characteristic-function construction.

For a log-convex sequence M with quotients m_j, the transform of a bounded
function f on an unbounded sector is the weighted superposition

    T_M(f)(z) = sum_j 2^-j (M_j / m_j^j) f(m_j z),

which multiplies the expansion coefficient c_j by

    R_j = sum_n 2^-n (M_n / m_n^n) m_n^j,   with 2^-j M_j <= R_j <= 2 M_j.

Log-convexity gives M_j <= m_j^j, so every transform term is bounded by
2^-j sup|f| and every R_j term by 2^-n M_j; both series truncate with the
certified geometric tail 2^(-N+1).

A truncated transform pairs naturally with the same-depth truncation of
the R_j: writing T~ and R~ for the depth-N truncations,

    T~(f)(z) - sum_{k<n} R~_k c_k z^k = sum_{j<N} 2^-j (M_j/m_j^j) r_f(m_j z, n)

exactly, so the propagated certificate (2 A, h) over the product sequence
holds for the computed objects at every order and radius, and remainders
of the transform are computable term by term at full relative precision.
``characteristic_for`` builds on this: it picks the basic function and the
log-convex carrier L for a target sequence M and opening, and returns the
transform with its certified expansion, whose coefficients R_j c_j inherit
alternating signs and window-equivalence to the class sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
from mpmath import mp

from .basis_fn import EvaluableFunction, e_tilde, f_alpha_alphaprime, k_rs_fn
from .errors import DomainError, NotLogConvexError, WitnessError
from .expansion import CertifiedExpansion
from .numeric import (as_fraction, decimal_str, dyadic_round,
                      fraction_above, log_value, to_mpf)
from .sector import LogPoint
from .weight_seq import (WeightSequence, equivalence_fit, gevrey,
                         is_log_convex, pointwise_product, power_gevrey,
                         quotients)

RSEQ_TOL = Fraction(1, 2**40)       # default relative tail for R_j
EVAL_TOL_FLOOR = Fraction(1, 10**30)  # deepest default transform truncation

KRS_CERT = (Fraction(4), Fraction(1))   # paper constant for the kernel


def _require_lc(M: WeightSequence, who: str) -> None:
    ok, j = is_log_convex(M)
    if not ok:
        raise NotLogConvexError(f"{who} requires a log-convex sequence "
                                f"(violation at index {j})")


def _term_count_for_tol(tol) -> int:
    """Smallest N with 2^(-N+1) <= tol."""
    t = as_fraction(tol)
    N = 1
    p = Fraction(1)          # 2^(-N+1) at N = 1
    while p > t:
        N += 1
        p = p / 2
    return N


_DYADIC_BITS = 240      # enclosure resolution for non-integer quotients


def _integral_quotients(M: WeightSequence) -> bool:
    if not M.is_rational:
        return False
    return all(Fraction(v).denominator == 1 for v in quotients(M).values)


def _partial_r_sum(M: WeightSequence, j: int, N: int):
    """(lower, slack) for sum_{n<N} 2^-n M_n m_n^(j-n).

    Three lanes: exact Fractions when all quotients are integers (cheap,
    no gcd blowup); directed dyadic rounding for other rational sequences
    (certified enclosure, slack = upper - lower); mpf with a rounding
    cushion otherwise.
    """
    m = quotients(M)
    if _integral_quotients(M):
        total = Fraction(0)
        for n in range(N):
            total += Fraction(M.values[n] * m.values[n] ** (j - n), 2 ** n)
        return total, Fraction(0)
    if M.is_rational:
        lo = Fraction(0)
        hi = Fraction(0)
        for n in range(N):
            t = Fraction(M.values[n]) * Fraction(m.values[n]) ** (j - n) / 2 ** n
            lo = dyadic_round(lo + t, _DYADIC_BITS, up=False)
            hi = dyadic_round(hi + t, _DYADIC_BITS, up=True)
        return lo, hi - lo
    with mp.workdps(M.dps + 15):
        total = mpmath.fsum(
            mp.exp(-n * mp.log(2) + M.log_values[n] + (j - n) * m.log_values[n])
            for n in range(N))
        cushion = abs(total) * mp.mpf(10) ** (-(M.dps - 5))
        return +total, +cushion


def r_seq(M: WeightSequence, j: int, tol=RSEQ_TOL):
    """Certified enclosure of R_j = sum_n 2^-n M_n m_n^(j-n).

    Every term is bounded by 2^-n M_j (log-convexity, both for n < j and
    n >= j), so truncating after N terms leaves at most 2^(-N+1) M_j; the
    tolerance is relative to M_j.  N is clamped to the available depth and
    always covers the n = j term, so value >= 2^-j M_j holds by
    construction.  Returns (value, error_bound) with value a certified
    lower bound for R_j and value + error_bound a certified upper bound;
    both are exact rationals for rational sequences.
    """
    if j < 0:
        raise ValueError("j >= 0 required")
    _require_lc(M, "r_seq")
    N = max(j + 1, _term_count_for_tol(tol))
    N = min(N, len(M) - 1)
    if N < j + 1:
        raise ValueError(f"sequence too short: need M_0..M_{j + 1} for R_{j}")
    value, slack = _partial_r_sum(M, j, N)
    if M.is_rational:
        tail = 2 * Fraction(1, 2 ** N) * Fraction(M.values[j])
        return value, tail + slack
    with mp.workdps(M.dps + 10):
        tail = mp.mpf(2) ** (-N + 1) * to_mpf(M.values[j])
        return value, +(tail + slack)


def _truncated_r(M: WeightSequence, j: int, N: int):
    """Depth-N truncation of R_j (evaluator-aligned): certified lower value."""
    return _partial_r_sum(M, j, N)[0]


def _weights(M: WeightSequence, N: int) -> list:
    """w_j = 2^-j M_j / m_j^j as mpf (evaluation lane)."""
    m = quotients(M)
    with mp.workdps(M.dps + 10):
        return [mp.exp(-j * mp.log(2) + M.log_values[j] - j * m.log_values[j])
                for j in range(N)]


def transform_eval(M: WeightSequence, f: EvaluableFunction, p: LogPoint,
                   tol="1e-25", precision: int = 50):
    """One-shot numeric value of the transform at p, truncated so the tail
    is below uniform_bound(f) * 2^(-N+1) <= tol.  Requires a log-convex M
    and an unbounded domain (the scaled arguments m_j z must stay inside)."""
    _require_lc(M, "transform_eval")
    if not f.domain.is_unbounded:
        raise DomainError("transform requires an unbounded domain sector")
    ub = to_mpf(f.uniform_bound)
    with mp.workdps(30):
        N = _term_count_for_tol(as_fraction(mp.mpf(tol) / ub))
    if N > len(M) - 1:
        raise ValueError(f"sequence too short: transform needs {N} terms, "
                         f"depth allows {len(M) - 1}")
    w = _weights(M, N)
    m = quotients(M)
    with mp.workdps(precision + 10):
        total = mp.mpc(0)
        for j in range(N):
            scaled = LogPoint(to_mpf(m.values[j]) * p.r, p.theta)
            total += w[j] * mp.mpc(f.evaluate(scaled, precision + 10))
        return +total


def transform_fn(M: WeightSequence, f: EvaluableFunction, tol=None,
                 precision: int = 50) -> EvaluableFunction:
    """The transform as an evaluator: value, coefficients R~_j c_j, and
    remainders via the exact per-term identity (see module notes).  The
    truncation depth N is fixed at construction (tol=None uses all
    available depth down to a 1e-30 tail) and shared by values and
    coefficients, so certificates hold for the computed pair."""
    _require_lc(M, "transform")
    if not f.domain.is_unbounded:
        raise DomainError("transform requires an unbounded domain sector")
    ub = to_mpf(f.uniform_bound)
    target = as_fraction(EVAL_TOL_FLOOR) if tol is None else as_fraction(tol)
    N_needed = _term_count_for_tol(target / fraction_above(ub))
    N = min(N_needed, len(M) - 1)
    if tol is not None and N < N_needed:
        raise ValueError(f"sequence too short: transform needs {N_needed} "
                         f"terms for tol={tol}, depth allows {len(M) - 1}")
    w = _weights(M, N)
    m = quotients(M)
    with mp.workdps(30):
        achieved = 2 * ub * mp.mpf(2) ** (-N)
    r_cache: dict = {}

    def r_trunc(j: int):
        if j not in r_cache:
            r_cache[j] = _truncated_r(M, j, N)
        return r_cache[j]

    def ev(p, prec):
        with mp.workdps(prec + 10):
            total = mp.mpc(0)
            for j in range(N):
                scaled = LogPoint(to_mpf(m.values[j]) * p.r, p.theta)
                total += w[j] * mp.mpc(f.evaluate(scaled, prec + 10))
            return +total

    def coeff(j, prec):
        return r_trunc(j) * f.coefficient(j, prec)

    def tail(p, n, prec):
        with mp.workdps(prec + 10):
            total = mp.mpc(0)
            for j in range(N):
                scaled = LogPoint(to_mpf(m.values[j]) * p.r, p.theta)
                total += w[j] * mp.mpc(f.remainder(scaled, n, prec + 10))
            return +total

    def bound():
        with mp.workdps(30):
            return 2 * ub

    fn = EvaluableFunction(f"transform[{M.generator}]:{f.kind}", f.domain,
                           ev, coeff, bound_fn=bound, tail_fn=tail)
    fn.term_count = N
    fn.truncation_tol = achieved
    fn.r_truncated = r_trunc
    return fn


def transform_expansion(M: WeightSequence,
                        e: CertifiedExpansion) -> CertifiedExpansion:
    """Coefficient-level transform: c_j -> R_j c_j over the product
    sequence, certificate (2A, h) with h unchanged.

    R_j carries the r_seq default tail (relative 2^-40); the induced slack
    in the stored certificate is orders of magnitude below measurement
    resolution and the coefficient bound R_j <= 2 M_j is unaffected
    (partial sums only undershoot)."""
    _require_lc(M, "transform_expansion")
    if len(M) != len(e.seq):
        raise ValueError("sequence lengths must match for the product class")
    coeffs = []
    for j, c in enumerate(e.coeffs):
        val, _err = r_seq(M, j)
        coeffs.append(val * c)
    seq = pointwise_product(e.seq, M)
    return CertifiedExpansion(tuple(coeffs), seq, 2 * e.A, e.h, e.sector)


# ---------------------------------------------------------------------------
# characteristic functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformResult:
    """A characteristic-function construction: the basic function, the
    log-convex carrier L, the truncated R_j values with error bounds, the
    transform evaluator, and its certified expansion over the product
    sequence (equivalent to the target class sequence)."""

    base: EvaluableFunction
    lc_seq: WeightSequence
    r_values: tuple
    result: EvaluableFunction
    expansion: CertifiedExpansion
    alpha: object
    base_certificate: tuple

    def to_json_dict(self) -> dict:
        from .expansion import to_json_dict as exp_to_json
        return {
            "alpha": str(self.alpha),
            "base": self.base.kind,
            "lc_seq": self.lc_seq.generator,
            "base_certificate": [decimal_str(Fraction(self.base_certificate[0])),
                                 decimal_str(Fraction(self.base_certificate[1]))],
            "r_values": [[decimal_str(v), decimal_str(e)]
                         for v, e in self.r_values],
            "expansion": exp_to_json(self.expansion),
        }


def _fit_base_certificate(base: EvaluableFunction, base_seq: WeightSequence,
                          order: int, h_pinned=None, n_r: int = 14,
                          n_theta: int = 7, nmax: int = 12, r_min="1e-6",
                          r_max="10", margin="0.02") -> tuple:
    """Grid-fit (A, h) for the base function against its shape sequence.
    A gets 25% headroom over the grid fit and is floored so the
    coefficient bound |c_j| <= A h^j (base_seq)_j holds up to ``order``."""
    from .sector import sample_grid
    from .verify import measure_remainders
    grid = sample_grid(base.domain, n_r, n_theta, mp.mpf(r_min),
                       mp.mpf(r_max), margin)
    rep = measure_remainders(base, None, base_seq, grid,
                             min(nmax, len(base_seq) - 1), precision=25)
    with mp.workdps(30):
        if h_pinned is not None:
            h = to_mpf(h_pinned)
            A = max(w / h ** n for n, w in enumerate(rep.W))
        else:
            A, h = rep.fit.A_fit, rep.fit.h_fit
        A = A * mp.mpf("1.25")
        logh = mp.log(h)
        needed = mp.mpf(0)
        for j in range(order):
            c = base.coefficient(j, 30)
            mag = abs(mp.mpc(to_mpf(c) if isinstance(c, (int, Fraction)) else c))
            if mag == 0:
                continue
            needed = max(needed, mp.exp(mp.log(mag) - j * logh
                                        - base_seq.log_values[j]))
        A = max(A, needed * (1 + mp.mpf("1e-12")))
        return fraction_above(A), fraction_above(h)


def _window_stable(L0: WeightSequence, W: WeightSequence, depth: int) -> bool:
    """Window-equivalence admissibility for a supplied lc witness: the
    spread b_high/b_low at full depth must not blow up against the spread
    at half depth (trend stability)."""
    d = min(depth, len(L0) - 1, len(W) - 1)
    eq_full = equivalence_fit(L0, W, d)
    eq_half = equivalence_fit(L0, W, max(2, d // 2))
    with mp.workdps(30):
        spread_full = eq_full.b_high / eq_full.b_low
        spread_half = eq_half.b_high / eq_half.b_low
        return bool(mpmath.isfinite(spread_full)
                    and spread_full <= 2 * spread_half + mp.mpf("0.5"))


def characteristic_for(M: WeightSequence, alpha, alphaprime=None,
                       lc_witness: Optional[WeightSequence] = None,
                       order: Optional[int] = None,
                       precision: int = 50, base_tol="1e-14",
                       fit_grid: Optional[tuple] = None,
                       base_certificate: Optional[tuple] = None) -> TransformResult:
    """Characteristic-function construction for the class of M on the
    sector of opening alpha*pi.

    Builds the carrier L (the entrywise product of M with the power-scale
    sequence j^((2-alpha)j), resp. j^((2-alpha')j) for alpha > 2, resp. M
    itself at alpha = 2), verifies log-convexity of L at full depth (or
    falls back to a supplied window-equivalent lc witness), applies the
    transform to the matching basic function, and certifies the resulting
    expansion over the product sequence, which is entrywise equivalent to
    M.  Coefficients keep the alternating-sign pattern of the base.
    """
    a = to_mpf(as_fraction(alpha))
    depth = M.depth
    fit_margin = "0.02"
    fit_rmin, fit_rmax = "1e-6", "10"
    if order is None:
        order = min(40, depth - 2)
    if order < 2 or order + 2 > len(M):
        raise ValueError("order must satisfy 2 <= order <= len(M) - 2")
    if a <= 0:
        raise ValueError("alpha must be positive")
    if a < 2:
        scale = power_gevrey(2 - as_fraction(alpha), depth, dps=M.dps)
        L0 = pointwise_product(scale, M)
        base = e_tilde(alpha)
        base_seq = power_gevrey(as_fraction(alpha) - 2, depth, dps=M.dps)
        base_cert = None
        with mp.workdps(60):
            h_pin = fraction_above(+mp.e)
    elif a == 2:
        L0 = M
        base = k_rs_fn()
        base_seq = gevrey(0, depth, dps=M.dps)
        base_cert = KRS_CERT
        h_pin = None
    else:
        if alphaprime is None:
            raise WitnessError("alpha > 2 requires an alphaprime > alpha")
        if not to_mpf(as_fraction(alphaprime)) > a:
            raise WitnessError("alphaprime must exceed alpha")
        scale = power_gevrey(2 - as_fraction(alphaprime), depth, dps=M.dps)
        L0 = pointwise_product(scale, M)
        base = f_alpha_alphaprime(alpha, alphaprime, tol=base_tol)
        base_seq = power_gevrey(as_fraction(alphaprime) - 2, depth, dps=M.dps)
        # closed-form certificate: the kernel bound 4 and the ray-tail
        # integral give |r(z,n)| <= (4/c) (s^s/c^s)^n n^(sn) |z|^n with
        # c = cos of the worst admissible ray angle (Gamma(sn+1) <= (sn)^sn)
        with mp.workdps(60):
            sexp = mp.mpf(alphaprime) - 2
            worst = mp.cos(mp.mpf("0.95") * (mp.mpf(alpha) - 2) / sexp
                           * mp.pi / 2)
            base_cert = (fraction_above(4 / worst),
                         fraction_above(mp.power(sexp, sexp)
                                        / mp.power(worst, sexp)))
        h_pin = None

    ok, viol = is_log_convex(L0)
    if ok:
        L = L0
    else:
        if lc_witness is None:
            raise WitnessError(
                f"carrier sequence is not log-convex (violation at index "
                f"{viol}) and no lc witness was supplied")
        okw, violw = is_log_convex(lc_witness)
        if not okw:
            raise WitnessError(f"supplied witness is not log-convex "
                               f"(violation at index {violw})")
        if not _window_stable(L0, lc_witness, 40):
            raise WitnessError("witness fails the window-equivalence "
                               "stability check against the carrier")
        L = lc_witness

    if base_certificate is not None:
        base_cert = (fraction_above(base_certificate[0]),
                     fraction_above(base_certificate[1]))
    if base_cert is None:
        n_r, n_theta, nmax = fit_grid if fit_grid is not None else (14, 7, 12)
        base_cert = _fit_base_certificate(base, base_seq, order,
                                          h_pinned=h_pin, n_r=n_r,
                                          n_theta=n_theta, nmax=nmax,
                                          r_min=fit_rmin, r_max=fit_rmax,
                                          margin=fit_margin)
    A_b, h_b = base_cert

    result = transform_fn(L, base, tol=None, precision=precision)
    N_terms = result.term_count
    if N_terms < order + 1:
        raise ValueError(f"sequence depth supports only {N_terms} transform "
                         f"terms; need at least order + 1 = {order + 1}")
    coeffs = []
    r_values = []
    for j in range(order):
        rj, slack = _partial_r_sum(L, j, N_terms)
        if L.is_rational:
            err = 2 * Fraction(1, 2 ** N_terms) * Fraction(L.values[j]) + slack
        else:
            with mp.workdps(L.dps):
                err = +(mp.mpf(2) ** (-N_terms + 1) * to_mpf(L.values[j]) + slack)
        r_values.append((rj, err))
        coeffs.append(rj * base.coefficient(j, precision + 20))
    result_seq = pointwise_product(base_seq, L)
    expansion = CertifiedExpansion(tuple(coeffs), result_seq, 2 * A_b, h_b,
                                   base.domain)
    return TransformResult(base, L, tuple(r_values), result, expansion,
                           alpha, (A_b, h_b))
