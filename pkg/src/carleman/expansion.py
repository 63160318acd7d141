"""Remainder-certified truncated asymptotic expansions.

A ``CertifiedExpansion`` stores coefficients c_0..c_{N-1} together with a
certificate (A, h, M, sector) asserting

    |r(z, n)| <= A h^n M_n |z|^n   on the sector, for 0 <= n <= N,

where r(z, n) = f(z) - sum_{j<n} c_j z^j.  The operations below propagate
certificates through point-wise products, powers and composition with the
explicit constant bookkeeping

    product:      A' = 2 A1 A2,        h' = C (h1 + h2)     (C from (alg))
    composition:  A' = C A_outer,      h' = B h_inner (1 + A_inner h_outer)
                                                       (C, B from (FdB))

and through the constant-shift f -> c_0 - f.  Certificates are exact
rationals internally, so propagation never rounds; fitted witnesses passed
in as floats are bumped up by one part in 2^120 before use, keeping stored
certificates valid over-approximations.

Coefficients live in the exact lane (int/Fraction) whenever both operands
do; this rational mode is the oracle behind the property tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
from mpmath import mp

from .errors import (DomainError, NonzeroConstantTermError,
                     SectorMismatchError, SequenceMismatchError)
from .numeric import (as_fraction, decimal_str, exact_str, fraction_above,
                      is_exact, log_value, parse_exact, to_mpf)
from .sector import LogPoint, Sector, contains, sector_from_json, to_plane
from .weight_seq import WeightSequence, from_json_dict as seq_from_json_dict
from .weight_seq import to_json_dict as seq_to_json_dict

TAU_ZERO = Fraction(1, 10**30)      # tolerance for the c_0 = 0 precondition
_BOUND_SLACK = "1e-9"               # relative slack for the |c_n| invariant


def _is_exact_scalar(c) -> bool:
    return isinstance(c, (int, Fraction))


def _abs_upper(c) -> Fraction:
    """Exact upper bound for |c| as a Fraction."""
    if _is_exact_scalar(c):
        return abs(Fraction(c))
    if isinstance(c, mpmath.mpf):
        return abs(as_fraction(c))
    with mp.workdps(60):
        return fraction_above(abs(mpmath.mpc(c)))


@dataclass(frozen=True)
class CertifiedExpansion:
    """Truncated expansion with certificate |r(z,n)| <= A h^n M_n |z|^n."""

    coeffs: tuple
    seq: WeightSequence
    A: Fraction
    h: Fraction
    sector: Sector

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        object.__setattr__(self, "A", fraction_above(self.A))
        object.__setattr__(self, "h", fraction_above(self.h))
        if not (self.A > 0 and self.h > 0):
            raise ValueError("certificate constants must be positive")
        if len(self.seq) < len(self.coeffs) + 1:
            raise ValueError("sequence must cover orders 0..N (need M_N)")
        bad = coefficient_bound_violations(self)
        if bad:
            raise ValueError(f"coefficient bound |c_n| <= A h^n M_n violated "
                             f"at n in {bad}")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def is_rational(self) -> bool:
        return all(_is_exact_scalar(c) for c in self.coeffs)


def coefficient_bound_violations(e: CertifiedExpansion,
                                 rel_slack=_BOUND_SLACK) -> list:
    """Indices with |c_n| > A h^n M_n (1 + rel_slack), checked in log space."""
    bad = []
    with mp.workdps(40):
        slack = mp.log(1 + mp.mpf(rel_slack))
        logA = log_value(e.A)
        logh = log_value(e.h)
        for n, c in enumerate(e.coeffs):
            mag = _abs_upper(c)
            if mag == 0:
                continue
            lhs = log_value(mag)
            rhs = logA + n * logh + e.seq.log_values[n]
            if lhs > rhs + slack:
                bad.append(n)
    return bad


@dataclass(frozen=True)
class PowerBoundTable:
    """Per-order remainder bounds for f^j: |r_{f^j}(z,n)| <= b(n) |z|^n,
    b(n) = A^j h^n S(j, n) with S the ordered-composition sum."""

    j: int
    n_start: int
    bounds: tuple

    def bound_at(self, n: int):
        return self.bounds[n - self.n_start]


# ---------------------------------------------------------------------------
# certificate maps (exposed for the monotonicity/limit property tests)
# ---------------------------------------------------------------------------

def product_certificate_map(A1, h1, A2, h2, C):
    """(A', h') for a point-wise product: A' = 2 A1 A2, h' = C (h1 + h2)."""
    A1, h1, A2, h2, C = map(fraction_above, (A1, h1, A2, h2, C))
    return 2 * A1 * A2, C * (h1 + h2)


def compose_certificate_map(A_inner, h_inner, A_outer, h_outer, C, B):
    """(A', h') for composition: A' = C A_outer,
    h' = B h_inner (1 + A_inner h_outer)."""
    A1, h1, A2, h2, C, B = map(fraction_above,
                               (A_inner, h_inner, A_outer, h_outer, C, B))
    return C * A2, B * h1 * (1 + A1 * h2)


# ---------------------------------------------------------------------------
# coefficient algebra
# ---------------------------------------------------------------------------

def convolve(a: Sequence, b: Sequence, N: int) -> tuple:
    """First N coefficients of the Cauchy product of two coefficient lists."""
    out = []
    for n in range(N):
        lo = max(0, n - len(b) + 1)
        hi = min(n, len(a) - 1)
        acc = 0
        for i in range(lo, hi + 1):
            acc = acc + a[i] * b[n - i]
        out.append(acc)
    return tuple(out)


def _same_sector(s: Sector, t: Sector) -> bool:
    if s.is_unbounded != t.is_unbounded:
        return False
    radii_eq = s.is_unbounded or as_fraction(s.radius) == as_fraction(t.radius)
    return (radii_eq
            and as_fraction(s.bisector) == as_fraction(t.bisector)
            and as_fraction(s.half_opening) == as_fraction(t.half_opening))


def product(e1: CertifiedExpansion, e2: CertifiedExpansion,
            alg_C) -> CertifiedExpansion:
    """Point-wise product: Cauchy convolution of the coefficients up to the
    smaller order, certificate (2 A1 A2, C (h1 + h2)) with C an (alg)
    witness for the common sequence."""
    if not e1.seq == e2.seq:
        raise SequenceMismatchError("product requires a common weight sequence")
    if not _same_sector(e1.sector, e2.sector):
        raise SectorMismatchError("product requires a common sector")
    N = min(e1.order, e2.order)
    coeffs = convolve(e1.coeffs, e2.coeffs, N)
    A, h = product_certificate_map(e1.A, e1.h, e2.A, e2.h, alg_C)
    return CertifiedExpansion(coeffs, e1.seq, A, h, e1.sector)


def power_coeffs(e: CertifiedExpansion, k: int) -> tuple:
    """Coefficients of f^k up to the input order, by iterated convolution
    (equals the sum over ordered index tuples m_1+...+m_k = j)."""
    if k < 1:
        raise ValueError("k >= 1 required")
    N = e.order
    acc = e.coeffs
    for _ in range(k - 1):
        acc = convolve(acc, e.coeffs, N)
    return tuple(acc)


def _check_zero_constant(c0, tau) -> None:
    if _abs_upper(c0) > tau:
        raise NonzeroConstantTermError(
            f"constant term {decimal_str(c0, 8)} exceeds tolerance {tau}")


def power_certificate(e: CertifiedExpansion, j: int,
                      tau_zero=TAU_ZERO) -> PowerBoundTable:
    """Certified remainder bounds for f^j when c_0 = 0:
    b(n) = A^j h^n S(j, n) for j <= n <= N."""
    from .weight_seq import composition_sum
    if j < 1:
        raise ValueError("j >= 1 required")
    _check_zero_constant(e.coeffs[0], as_fraction(tau_zero))
    N = e.order
    if j > N:
        raise ValueError("power exceeds available order")
    bounds = []
    Aj = e.A ** j
    for n in range(j, N + 1):
        S = composition_sum(e.seq, j, n)
        bounds.append(Aj * e.h ** n * S)
    return PowerBoundTable(j, j, tuple(bounds))


def compose(g: CertifiedExpansion, f: CertifiedExpansion, fdb_C, fdb_B,
            tau_zero=TAU_ZERO) -> CertifiedExpansion:
    """Composition g(f(z)) for inner f with c_0 = 0:

        c_0 = c^g_0,   c_n = sum_{j=1..n} c^g_j c^{f^j}_n,

    certificate (C A_g, B h_f (1 + A_f h_g)) with (C, B) an (FdB) witness
    for the common sequence.  The result lives on f's sector; the caller
    is responsible for the range condition g must satisfy on f's image.
    """
    if not g.seq == f.seq:
        raise SequenceMismatchError("compose requires a common weight sequence")
    _check_zero_constant(f.coeffs[0], as_fraction(tau_zero))
    N = min(g.order, f.order)
    zero = Fraction(0) if f.is_rational and g.is_rational else mp.mpf(0)
    out = [zero] * N
    out[0] = g.coeffs[0]
    fj = tuple(f.coeffs[:N])
    for j in range(1, N):
        cgj = g.coeffs[j]
        if not (_is_exact_scalar(cgj) and cgj == 0):
            for n in range(j, N):
                out[n] = out[n] + cgj * fj[n]
        if j + 1 < N:
            fj = convolve(fj, f.coeffs[:N], N)
    A, h = compose_certificate_map(f.A, f.h, g.A, g.h, fdb_C, fdb_B)
    return CertifiedExpansion(tuple(out), f.seq, A, h, f.sector)


def shift_subtract(e: CertifiedExpansion) -> CertifiedExpansion:
    """The expansion of c_0 - f: coefficients (0, -c_1, ..., -c_{N-1}),
    certificate (A + |c_0|, h).  For n >= 1 the remainder is -r_f(z, n);
    for n = 0 the uniform bound is |c_0| + A."""
    c0 = e.coeffs[0]
    zero = Fraction(0) if _is_exact_scalar(c0) else mp.mpf(0)
    coeffs = (zero,) + tuple(-c for c in e.coeffs[1:])
    A0 = e.A + _abs_upper(c0)
    return CertifiedExpansion(coeffs, e.seq, A0, e.h, e.sector)


# ---------------------------------------------------------------------------
# remainder cross-check formula
# ---------------------------------------------------------------------------

def _point_value(z: LogPoint, precision: int):
    """Value of z as a scalar: exact Fraction on the positive real axis,
    mpc otherwise."""
    if z.theta == 0:
        return as_fraction(z.r)
    with mp.workdps(precision):
        return to_plane(z)


def product_remainder_formula(e1: CertifiedExpansion, e2: CertifiedExpansion,
                              f_eval, g_eval, z: LogPoint, n: int,
                              precision: int = 50):
    """Right-hand side of the product remainder identity

        r_h(z,n) = r_f(z,n) g(z) + sum_{k<n} c^f_k z^k r_g(z, n-k),

    for cross-checking against the directly measured remainder of f*g.
    Exact when evaluators and coefficients are rational and z is a
    positive real point.
    """
    if not (contains(f_eval.domain, z) and contains(g_eval.domain, z)):
        raise DomainError("evaluation point outside an operand's domain")
    if n > min(e1.order, e2.order):
        raise ValueError("n exceeds the stored expansion orders")
    work = precision + 25
    fz = f_eval.evaluate(z, work)
    gz = g_eval.evaluate(z, work)
    zv = _point_value(z, work)
    with mp.workdps(work):
        zpow = []
        p = 1 if isinstance(zv, Fraction) else mp.mpf(1)
        for _ in range(n + 1):
            zpow.append(p)
            p = p * zv
        r_f = fz - sum(e1.coeffs[k] * zpow[k] for k in range(n))
        total = r_f * gz
        for k in range(n):
            r_g = gz - sum(e2.coeffs[i] * zpow[i] for i in range(n - k))
            total = total + e1.coeffs[k] * zpow[k] * r_g
        return total


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _coeff_pair(c) -> list:
    if _is_exact_scalar(c):
        return [exact_str(Fraction(c)), "0"]
    if isinstance(c, mpmath.mpf):
        return [exact_str(c), "0"]
    z = mpmath.mpc(c)
    return [exact_str(z.real), exact_str(z.imag)]


def to_json_dict(e: CertifiedExpansion) -> dict:
    return {
        "coeffs": [_coeff_pair(c) for c in e.coeffs],
        "seq_id": f"{e.seq.generator}:depth={e.seq.depth}",
        "seq": seq_to_json_dict(e.seq),
        "A": exact_str(e.A),
        "h": exact_str(e.h),
        "sector": e.sector.to_json_dict(),
        "order": e.order,
    }


def from_json_dict(d: dict, seq: WeightSequence | None = None) -> CertifiedExpansion:
    seq = seq if seq is not None else seq_from_json_dict(d["seq"])
    coeffs = []
    for re_s, im_s in d["coeffs"]:
        re_f, im_f = parse_exact(re_s), parse_exact(im_s)
        if im_f == 0:
            coeffs.append(re_f)
        else:
            with mp.workdps(60):
                coeffs.append(mp.mpc(to_mpf(re_f), to_mpf(im_f)))
    return CertifiedExpansion(tuple(coeffs), seq, parse_exact(d["A"]),
                              parse_exact(d["h"]), sector_from_json(d["sector"]))
