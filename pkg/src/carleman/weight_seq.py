"""Weight sequences and finite-depth growth-condition checks.

A weight sequence is a positive sequence M_0..M_N with M_0 = 1, carried
together with its quotients m_j = M_{j+1}/M_j.  This module constructs the
standard families

    gevrey(a):        M_j = (j!)^a
    power_gevrey(a):  M_j = j^(j a)   (0^0 := 1)

checks log-convexity, and fits finite-depth constants for the growth
conditions used downstream:

    (alg)  M_j M_k   <= C^(j+k) M_{j+k}
    (FdB)  M_l M_{j_1} ... M_{j_l} <= C h^k M_k   over partitions of k
    (dc)   m_j       <= D^(j+1)
    (mg)   M_{j+k}   <= A^(j+k) M_j M_k

All condition checks are finite-depth evidence, never proofs; fits report
the trend at depth N/2 next to the fit at depth N so that divergence (as
for M_j = e^(-j^2) under (alg)) is visible.

Values are stored exactly (int/Fraction) whenever the generator permits,
otherwise as mpf at the construction precision; logs are stored alongside
and every ratio computation runs in log space, so entries like (150!)^2
never overflow.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import mpmath
from mpmath import mp

from .errors import NotLogConvexError, PartitionBudgetError
from .numeric import (DEFAULT_DPS, as_fraction, decimal_str, exact_str,
                      is_exact, log_value, parse_exact, to_mpf)

LC_REL_TOL = 1e-12           # tolerance for log-convexity (see module notes)
PARTITION_BUDGET_K = 40      # p(40) = 37338 partitions
FIT_FLOOR = "1e-300"         # keeps fitted constants strictly positive

_LOG_GUARD_DPS = 10


@dataclass(frozen=True)
class WeightSequence:
    """Positive sequence M_0..M_N with M_0 = 1, plus cached logs.

    ``values`` holds exact numbers (int/Fraction) when available, mpf
    otherwise; ``log_values`` always holds mpf logs at construction
    precision + guard.
    """

    values: tuple
    log_values: tuple
    generator: str
    dps: int = DEFAULT_DPS

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError("need at least M_0 and M_1 (N >= 1)")
        if not self.values[0] == 1:
            raise ValueError("M_0 must equal 1")
        for j, v in enumerate(self.values):
            if not v > 0:
                raise ValueError(f"M_{j} must be positive")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int):
        return self.values[j]

    @property
    def depth(self) -> int:
        return len(self.values) - 1

    @property
    def is_rational(self) -> bool:
        return all(is_exact(v) for v in self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightSequence):
            return NotImplemented
        return len(self) == len(other) and all(
            a == b for a, b in zip(self.values, other.values))

    def __hash__(self):
        return hash((self.generator, len(self.values)))


@dataclass(frozen=True)
class QuotientSequence:
    """m_j = M_{j+1}/M_j for j = 0..N-1."""

    values: tuple
    log_values: tuple

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int):
        return self.values[j]


@dataclass(frozen=True)
class TwoParamFit:
    """Measured worst-case ratios plus constants with ratio(n) <= A h^n.

    ``ratios[i]`` is the ratio at index n = n_start + i.  Single-constant
    conditions ((alg), (dc), (mg)) store their constant in both slots.
    ``A_half``/``h_half`` repeat the fit using only indices up to depth/2,
    exposing the per-depth trend.
    """

    ratios: tuple
    n_start: int
    A_fit: mpmath.mpf
    h_fit: mpmath.mpf
    depth: int
    A_half: Optional[mpmath.mpf] = None
    h_half: Optional[mpmath.mpf] = None
    label: str = ""

    def ratio_at(self, n: int):
        return self.ratios[n - self.n_start]

    def bound_holds(self) -> bool:
        """ratio(n) <= A h^n for every measured index (FR1 guarantee)."""
        with mp.workdps(30):
            return all(
                r <= self.A_fit * self.h_fit ** (self.n_start + i) * (1 + mp.mpf("1e-20"))
                for i, r in enumerate(self.ratios))

    def to_json_dict(self) -> dict:
        d = {
            "label": self.label,
            "n_start": self.n_start,
            "depth": self.depth,
            "A_fit": decimal_str(self.A_fit),
            "h_fit": decimal_str(self.h_fit),
            "ratios": [decimal_str(r) for r in self.ratios],
        }
        if self.A_half is not None:
            d["A_half"] = decimal_str(self.A_half)
            d["h_half"] = decimal_str(self.h_half)
        return d


@dataclass(frozen=True)
class EquivalenceFit:
    """Window constants with b_low^j M_j <= L_j <= b_high^j M_j on 1..depth.

    The log fields are the primary computed quantities (exact rational
    extrema of (log L_j - log M_j)/j, rounded once); the b fields are their
    exponentials.  log_b_low(M, L) == -log_b_high(L, M) holds exactly.
    """

    b_low: mpmath.mpf
    b_high: mpmath.mpf
    log_b_low: mpmath.mpf
    log_b_high: mpmath.mpf
    depth: int

    def to_json_dict(self) -> dict:
        return {
            "b_low": decimal_str(self.b_low),
            "b_high": decimal_str(self.b_high),
            "depth": self.depth,
        }


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _build(values, generator: str, dps: int) -> WeightSequence:
    with mp.workdps(dps + _LOG_GUARD_DPS):
        logs = tuple(log_value(v) for v in values)
    return WeightSequence(tuple(values), logs, generator, dps)


def _exact_exponent(a) -> Optional[int]:
    try:
        f = as_fraction(a)
    except (TypeError, ValueError):
        return None
    return f.numerator if f.denominator == 1 else None


def gevrey(a, N: int, dps: int = DEFAULT_DPS) -> WeightSequence:
    """M_j = (j!)^a for j = 0..N.  Exact for integer a."""
    if N < 1:
        raise ValueError("N >= 1 required")
    ia = _exact_exponent(a)
    if ia is not None:
        values = [Fraction(math.factorial(j)) ** ia for j in range(N + 1)]
    else:
        with mp.workdps(dps + _LOG_GUARD_DPS):
            av = to_mpf(as_fraction(a)) if isinstance(a, Fraction) else mp.mpf(a)
            values = [mp.exp(av * mpmath.loggamma(j + 1))
                      for j in range(N + 1)]
            values[0] = mp.mpf(1)
    return _build(values, f"gevrey:{a}", dps)


def power_gevrey(a, N: int, dps: int = DEFAULT_DPS) -> WeightSequence:
    """M_j = j^(j a) with the convention 0^0 = 1.  Exact for integer a."""
    if N < 1:
        raise ValueError("N >= 1 required")
    ia = _exact_exponent(a)
    if ia is not None:
        values = [Fraction(1)] + [Fraction(j) ** (j * ia) for j in range(1, N + 1)]
    else:
        with mp.workdps(dps + _LOG_GUARD_DPS):
            av = to_mpf(as_fraction(a)) if isinstance(a, Fraction) else mp.mpf(a)
            values = [mp.mpf(1)] + [mp.exp(av * j * mp.log(j))
                                    for j in range(1, N + 1)]
    return _build(values, f"power_gevrey:{a}", dps)


def from_values(values: Sequence, generator: str = "custom",
                dps: int = DEFAULT_DPS) -> WeightSequence:
    """Wrap externally supplied values (exact strings/Fractions kept exact)."""
    converted = []
    for v in values:
        if isinstance(v, str):
            converted.append(parse_exact(v))
        elif is_exact(v):
            converted.append(v)
        else:
            with mp.workdps(dps):
                converted.append(mp.mpf(v))
    return _build(converted, generator, dps)


def pointwise_product(M: WeightSequence, L: WeightSequence) -> WeightSequence:
    """Entrywise product M_j L_j (equal lengths required)."""
    if len(M) != len(L):
        raise ValueError("pointwise_product requires equal lengths")
    dps = max(M.dps, L.dps)
    with mp.workdps(dps + _LOG_GUARD_DPS):
        values = [a * b for a, b in zip(M.values, L.values)]
    return _build(values, "pointwise_product", dps)


def log_convex_minorant(M: WeightSequence) -> WeightSequence:
    """The largest log-convex sequence below M: the lower convex envelope
    of j -> log M_j (linear interpolation between hull vertices).

    A standard witness candidate when a carrier sequence fails
    log-convexity only through a local dip: the minorant is log-convex by
    construction, touches M on the hull, and window-equivalence to M is
    checkable with ``equivalence_fit``.
    """
    ys = [as_fraction(v) for v in M.log_values]
    hull = []                      # lower convex hull, monotone chain
    for j, y in enumerate(ys):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or above the chord
            if (y2 - y1) * (j - x1) >= (y - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((j, y))
    env = [None] * len(ys)
    for (x1, y1), (x2, y2) in zip(hull[:-1], hull[1:]):
        for j in range(x1, x2 + 1):
            t = Fraction(j - x1, x2 - x1)
            env[j] = y1 + t * (y2 - y1)
    env[hull[-1][0]] = hull[-1][1]
    with mp.workdps(M.dps + _LOG_GUARD_DPS):
        values = [mp.exp(to_mpf(y)) for y in env]
        values[0] = Fraction(1) if env[0] == 0 else values[0]
    return _build(values, "lc_minorant", M.dps)


# ---------------------------------------------------------------------------
# quotients and log-convexity
# ---------------------------------------------------------------------------

def quotients(M: WeightSequence) -> QuotientSequence:
    """m_j = M_{j+1}/M_j."""
    with mp.workdps(M.dps + _LOG_GUARD_DPS):
        vals = []
        for j in range(len(M) - 1):
            a, b = M.values[j + 1], M.values[j]
            if is_exact(a) and is_exact(b):
                vals.append(Fraction(a) / Fraction(b))
            else:
                vals.append(to_mpf(a) / to_mpf(b))
        logs = tuple(M.log_values[j + 1] - M.log_values[j]
                     for j in range(len(M) - 1))
    return QuotientSequence(tuple(vals), logs)


def is_log_convex(M: WeightSequence,
                  rel_tol: float = LC_REL_TOL) -> tuple[bool, Optional[int]]:
    """True iff the quotients are nondecreasing up to relative ``rel_tol``;
    otherwise returns the first violating index j (m_j > m_{j+1})."""
    logs = M.log_values
    with mp.workdps(30):
        tol = mp.mpf(rel_tol)
        for j in range(len(M) - 2):
            lm_j = logs[j + 1] - logs[j]
            lm_next = logs[j + 2] - logs[j + 1]
            if lm_j - lm_next > tol:
                return False, j + 1
    return True, None


def _require_depth(M: WeightSequence, N: int, need: int) -> None:
    if N > need:
        raise ValueError(f"depth {N} exceeds available length "
                         f"(sequence has M_0..M_{need})")


# ---------------------------------------------------------------------------
# fit rules
# ---------------------------------------------------------------------------

def fit_fr1(log_ratios: list, n_start: int):
    """Fit rule FR1 on (n, log ratio) data.

    A = max(ratio(0), ratio(1), floor); h = max_{n>=1} (ratio(n)/A)^(1/n),
    floored as well.  Returns (A, h) as mpf at the ambient precision.
    Guarantees ratio(n) <= A h^n for every measured n.
    """
    floor_log = mp.log(mp.mpf(FIT_FLOOR))
    head = [lr for n, lr in log_ratios if n <= 1]
    logA = max(head) if head else floor_log
    logA = max(logA, floor_log)
    tail = [(lr - logA) / n for n, lr in log_ratios if n >= 1]
    logh = max(tail) if tail else floor_log
    logh = max(logh, floor_log)
    return mp.exp(logA), mp.exp(logh)


def _single_param_fit(log_ratios: list):
    """C = max_n ratio(n)^(1/exponent) in log space; pairs are
    (exponent, log ratio)."""
    floor_log = mp.log(mp.mpf(FIT_FLOOR))
    best = max((lr / e for e, lr in log_ratios), default=floor_log)
    return mp.exp(max(best, floor_log))


def _half_fit(log_ratios: list, n_start: int, depth: int, single: bool,
              single_exp=None):
    half = depth // 2
    sub = [(n, lr) for n, lr in log_ratios if n <= half]
    if not sub:
        return None, None
    if single:
        c = _single_param_fit([(single_exp(n), lr) for n, lr in sub])
        return c, c
    return fit_fr1(sub, n_start)


# ---------------------------------------------------------------------------
# condition checks
# ---------------------------------------------------------------------------

def check_alg(M: WeightSequence, N: int) -> TwoParamFit:
    """Worst ratios M_j M_k / M_{j+k} over j+k = n <= N and the single
    constant C with ratio(n) <= C^n.  Log-convex sequences give C = 1."""
    _require_depth(M, N, M.depth)
    logs = M.log_values
    with mp.workdps(M.dps + _LOG_GUARD_DPS):
        log_ratios = []
        for n in range(1, N + 1):
            best = max(logs[j] + logs[n - j] - logs[n]
                       for j in range(0, n // 2 + 1))
            log_ratios.append((n, best))
        C = _single_param_fit(log_ratios)
        Ch, _ = _half_fit(log_ratios, 1, N, True, single_exp=lambda n: n)
        ratios = tuple(mp.exp(lr) for _, lr in log_ratios)
    return TwoParamFit(ratios, 1, C, C, N, Ch, Ch, label="alg")


def check_fdb(M: WeightSequence, N: int,
              budget_k: int = PARTITION_BUDGET_K) -> TwoParamFit:
    """Worst ratios M_l M_{j_1}...M_{j_l} / M_k over integer partitions of
    each k <= N (partitions suffice: the product is order-invariant and
    M_l depends only on the part count), with (C, h) fitted by FR1."""
    _require_depth(M, N, M.depth)
    if N > budget_k:
        raise PartitionBudgetError(
            f"FdB partition search to k={N} exceeds budget k<={budget_k} "
            f"(p({budget_k}) = 37338); raise budget_k explicitly to proceed")
    logs = M.log_values
    with mp.workdps(M.dps + _LOG_GUARD_DPS):
        log_ratios = []
        for k in range(1, N + 1):
            best = None
            for part in iter_partitions(k):
                v = logs[len(part)] + mpmath.fsum(logs[p] for p in part) - logs[k]
                if best is None or v > best:
                    best = v
            log_ratios.append((k, best))
        A, h = fit_fr1(log_ratios, 1)
        Ah, hh = _half_fit(log_ratios, 1, N, False)
        ratios = tuple(mp.exp(lr) for _, lr in log_ratios)
    return TwoParamFit(ratios, 1, A, h, N, Ah, hh, label="fdb")


def check_dc(M: WeightSequence, N: int) -> TwoParamFit:
    """Derivation closedness: D = max_{j<=N} m_j^(1/(j+1))."""
    _require_depth(M, N, M.depth - 1)
    m = quotients(M)
    with mp.workdps(M.dps + _LOG_GUARD_DPS):
        log_ratios = [(j, m.log_values[j]) for j in range(N + 1)]
        D = _single_param_fit([(j + 1, lr) for j, lr in log_ratios])
        Dh = _single_param_fit([(j + 1, lr) for j, lr in log_ratios
                                if j <= N // 2])
        ratios = tuple(mp.exp(lr) for _, lr in log_ratios)
    return TwoParamFit(ratios, 0, D, D, N, Dh, Dh, label="dc")


def check_mg(M: WeightSequence, N: int) -> TwoParamFit:
    """Moderate growth: A = max over 1 <= j+k <= N of
    (M_{j+k}/(M_j M_k))^(1/(j+k))."""
    _require_depth(M, N, M.depth)
    logs = M.log_values
    with mp.workdps(M.dps + _LOG_GUARD_DPS):
        log_ratios = []
        for n in range(1, N + 1):
            best = max(logs[n] - logs[j] - logs[n - j]
                       for j in range(0, n // 2 + 1))
            log_ratios.append((n, best))
        A = _single_param_fit(log_ratios)
        Ah, _ = _half_fit(log_ratios, 1, N, True, single_exp=lambda n: n)
        ratios = tuple(mp.exp(lr) for _, lr in log_ratios)
    return TwoParamFit(ratios, 1, A, A, N, Ah, Ah, label="mg")


def equivalence_fit(M: WeightSequence, L: WeightSequence,
                    N: int) -> EquivalenceFit:
    """Window constants: b_low = min_{1<=j<=N} (L_j/M_j)^(1/j),
    b_high = max.  Extrema are taken in exact rational log space, so
    swapping the arguments negates the logs exactly."""
    if len(M) < N + 1 or len(L) < N + 1:
        raise ValueError("sequences shorter than requested window")
    if not (M.values[0] == 1 and L.values[0] == 1):
        raise ValueError("M_0 = L_0 = 1 required")
    diffs = [(as_fraction(L.log_values[j]) - as_fraction(M.log_values[j]))
             / j for j in range(1, N + 1)]
    lo, hi = min(diffs), max(diffs)
    with mp.workdps(max(M.dps, L.dps)):
        log_lo, log_hi = to_mpf(lo), to_mpf(hi)
        return EquivalenceFit(mp.exp(log_lo), mp.exp(log_hi),
                              log_lo, log_hi, N)


# ---------------------------------------------------------------------------
# compositions and partitions
# ---------------------------------------------------------------------------

def iter_compositions(n: int, j: int) -> Iterator[tuple]:
    """Ordered tuples of j positive integers summing to n."""
    if j == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - j + 2):
        for rest in iter_compositions(n - first, j - 1):
            yield (first,) + rest


def iter_partitions(k: int, _min: int = 1) -> Iterator[tuple]:
    """Partitions of k into parts >= 1, nondecreasing order."""
    if k == 0:
        yield ()
        return
    for first in range(_min, k + 1):
        for rest in iter_partitions(k - first, first):
            yield (first,) + rest


def composition_sum(M: WeightSequence, j: int, n: int):
    """S(j, n) = sum over ordered compositions m_1+...+m_j = n (parts >= 1)
    of M_{m_1}...M_{m_j}, via the recursion

        S(1, n) = M_n,   S(j, n) = sum_{i=1}^{n-j+1} M_i S(j-1, n-i).

    Exact (Fraction) for rational sequences.
    """
    if j < 1:
        raise ValueError("j >= 1 required")
    if n < j:
        raise ValueError("n >= j required (no composition otherwise)")
    _require_depth(M, n, M.depth)
    exact = M.is_rational
    with mp.workdps(M.dps):
        vals = [Fraction(v) if exact else to_mpf(v) for v in M.values]
        prev = {m: vals[m] for m in range(1, n + 1)}          # S(1, .)
        for jj in range(2, j + 1):
            cur = {}
            for m in range(jj, n + 1):
                acc = sum(vals[i] * prev[m - i] for i in range(1, m - jj + 2))
                cur[m] = acc
            prev = cur
        return prev[n]


def partition_product_max(M: WeightSequence, k: int,
                          budget_k: int = PARTITION_BUDGET_K):
    """max over partitions j_1+...+j_l = k of M_l M_{j_1}...M_{j_l},
    exact for rational sequences."""
    if k > budget_k:
        raise PartitionBudgetError(f"k={k} exceeds partition budget {budget_k}")
    _require_depth(M, k, M.depth)
    exact = M.is_rational
    best = None
    with mp.workdps(M.dps):
        vals = [Fraction(v) if exact else to_mpf(v) for v in M.values]
        for part in iter_partitions(k):
            prod = vals[len(part)]
            for p in part:
                prod = prod * vals[p]
            if best is None or prod > best:
                best = prod
    return best


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def to_json_dict(M: WeightSequence) -> dict:
    return {
        "generator": M.generator,
        "dps": M.dps,
        "values": [exact_str(v) for v in M.values],
    }


def from_json_dict(d: dict) -> WeightSequence:
    return from_values(d["values"], generator=d.get("generator", "custom"),
                       dps=int(d.get("dps", DEFAULT_DPS)))


def to_json(M: WeightSequence) -> str:
    return json.dumps(to_json_dict(M), sort_keys=True, indent=2)


def from_json(s: str) -> WeightSequence:
    return from_json_dict(json.loads(s))


def to_csv(M: WeightSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "value"])
    for j, v in enumerate(M.values):
        w.writerow([j, exact_str(v)])
    return buf.getvalue()


def from_csv(text: str, generator: str = "custom",
             dps: int = DEFAULT_DPS) -> WeightSequence:
    rows = list(csv.reader(io.StringIO(text)))
    body = rows[1:] if rows and rows[0][:1] == ["index"] else rows
    values = [r[1] for r in body if r]
    return from_values(values, generator=generator, dps=dps)
