"""Shared numeric plumbing: exact/float interchange and deterministic formatting.

Two value lanes coexist throughout the package:

* exact values: ``int`` / ``fractions.Fraction`` (the oracle lane),
* high-precision floats: ``mpmath.mpf`` / ``mpmath.mpc``.

Helpers here convert between the lanes without silent precision loss:
an ``mpf`` is a dyadic rational, so the conversion to ``Fraction`` is
exact, and every ``Fraction`` renders to an exact string ("p/q" when the
decimal expansion does not terminate).
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
from mpmath import mp

DEFAULT_DPS = 50

Number = object  # int | Fraction | mpmath.mpf (documentation alias)


def is_exact(x) -> bool:
    """True for values carried in the exact (rational) lane."""
    return isinstance(x, (int, Fraction))


def as_fraction(x) -> Fraction:
    """Exact conversion to Fraction; raises TypeError if lossy/impossible."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot convert non-finite float {x!r}")
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise ValueError(f"cannot convert non-finite mpf {x!r}")
        p, q = mpmath.libmp.to_rational(x._mpf_)
        return Fraction(p, q)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction exactly")


def dyadic_round(x: Fraction, bits: int, up: bool) -> Fraction:
    """Round to the nearest dyadic p/2^bits toward +inf (up) or -inf.
    Keeps long positive-sum accumulations exact-certified without gcd
    blowup: denominators stay a fixed power of two."""
    scaled = x * (1 << bits)
    if up:
        num = -((-scaled.numerator) // scaled.denominator)
    else:
        num = scaled.numerator // scaled.denominator
    return Fraction(num, 1 << bits)


def fraction_below(x, slack_bits: int = 120) -> Fraction:
    """A Fraction guaranteed <= the real number approximated by ``x``
    (mirror of ``fraction_above``)."""
    f = as_fraction(x)
    if is_exact(x) or f == 0:
        return f
    bump = Fraction(1, 2**slack_bits)
    return f * (1 - bump) if f > 0 else f * (1 + bump)


def fraction_above(x, slack_bits: int = 120) -> Fraction:
    """A Fraction guaranteed >= the real number approximated by ``x``.

    For exact inputs this is the identity.  For an mpf computed by a
    correctly rounded operation the result may sit one ulp below the true
    value; the multiplicative bump covers that.
    """
    f = as_fraction(x)
    if is_exact(x):
        return f
    if f == 0:
        return f
    bump = Fraction(1, 2**slack_bits)
    return f * (1 + bump) if f > 0 else f * (1 - bump)


def to_mpf(x) -> mpmath.mpf:
    """Convert to mpf at the current working precision (single rounding)."""
    if isinstance(x, mpmath.mpf):
        return +x
    if isinstance(x, Fraction):
        return mp.make_mpf(
            mpmath.libmp.from_rational(x.numerator, x.denominator, mp.prec,
                                       mpmath.libmp.round_nearest))
    return mp.mpf(x)


def to_mpc(x) -> mpmath.mpc:
    if isinstance(x, mpmath.mpc):
        return +x
    if isinstance(x, complex):
        return mp.mpc(x)
    return mp.mpc(to_mpf(x))


def log_value(x) -> mpmath.mpf:
    """log(x) for a positive exact or mpf value, at current precision.

    Big integers and Fractions are handled without overflow by taking
    log(num) - log(den) on the integer parts.
    """
    if isinstance(x, Fraction):
        if x <= 0:
            raise ValueError("log of non-positive value")
        return mp.log(x.numerator) - mp.log(x.denominator)
    if isinstance(x, int):
        if x <= 0:
            raise ValueError("log of non-positive value")
        return mp.log(x)
    v = mp.mpf(x)
    if v <= 0:
        raise ValueError("log of non-positive value")
    return mp.log(v)


def decimal_str(x, sig: int = 25) -> str:
    """Deterministic decimal rendering for reports (not an exact format)."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        with mp.workdps(sig + 15):
            return mpmath.nstr(to_mpf(x), sig)
    if isinstance(x, (mpmath.mpc, complex)):
        z = to_mpc(x)
        return f"({decimal_str(z.real, sig)}, {decimal_str(z.imag, sig)})"
    return mpmath.nstr(mp.mpf(x), sig)


def _terminating_decimal(f: Fraction) -> str | None:
    """Exact decimal string when the expansion terminates, else None."""
    den = f.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    k = max(twos, fives)
    scaled = f.numerator * 10**k // f.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    if k == 0:
        return sign + digits
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def exact_str(x) -> str:
    """Exact round-trip string: terminating decimal where possible,
    "p/q" otherwise.  ``parse_exact`` inverts it."""
    f = as_fraction(x)
    dec = _terminating_decimal(f)
    return dec if dec is not None else f"{f.numerator}/{f.denominator}"


def parse_exact(s: str) -> Fraction:
    return Fraction(s)


_GL_CACHE: dict = {}


def gauss_legendre_nodes(n: int, dps: int):
    """Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1],
    computed by Newton iteration on the Legendre recurrence at ``dps``
    digits.  Cached per (n, dps)."""
    key = (n, dps)
    if key in _GL_CACHE:
        return _GL_CACHE[key]
    with mp.workdps(dps + 10):
        nodes = []
        weights = []
        for i in range(1, n // 2 + n % 2 + 1):
            x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
            for _ in range(120):
                p0, p1 = mp.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mp.mpf(10) ** (-dps - 5):
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(x)
            weights.append(w)
        # assemble symmetric rule in ascending order
        full_nodes = [-t for t in nodes]
        full_weights = list(weights)
        if n % 2 == 1:
            # the middle node is x=0, already produced as the last entry
            full_nodes = full_nodes[:-1] + [mp.mpf(0)] + [t for t in reversed(nodes[:-1])]
            full_weights = full_weights[:-1] + [weights[-1]] + list(reversed(weights[:-1]))
        else:
            full_nodes = full_nodes + list(reversed(nodes))
            full_weights = full_weights + list(reversed(weights))
        result = (tuple(full_nodes), tuple(full_weights))
    _GL_CACHE[key] = result
    return result
