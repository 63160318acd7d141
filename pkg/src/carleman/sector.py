"""Points and sectors on the Riemann surface of the logarithm.

A point is stored as (r, theta) with unbounded real argument, never as a
complex value, so openings beyond 2*pi lose no information; conversion to
a plane value is the consuming function's responsibility (each evaluator
declares its own branch rule).

Sampling grids are deterministic: log-spaced radii, equispaced arguments
on the open angular interval shrunk by ``margin * half_opening`` on each
side.  Interpolation parameters are exact rationals i/(n-1), so the
(2n-1)-point refinement of a grid contains the original grid bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .numeric import as_fraction, exact_str, parse_exact, to_mpf

GRID_DPS = 50                # grids are always built at this precision

DEFAULT_N_R = 120
DEFAULT_N_THETA = 33
DEFAULT_R_MIN = "1e-6"
DEFAULT_R_MAX = "1e2"
DEFAULT_MARGIN = "0.02"

_RADIUS_CLIP = "1e-9"        # keeps clipped grids strictly inside the arc


@dataclass(frozen=True)
class LogPoint:
    """Point r * e^(i theta) on the surface; r > 0, theta any real."""

    r: mpmath.mpf
    theta: mpmath.mpf

    def __post_init__(self):
        # non-mpf inputs are parsed at grid precision, never at the ambient
        # context, so a point means the same number everywhere
        with mp.workdps(GRID_DPS):
            if not isinstance(self.r, mpmath.mpf):
                object.__setattr__(self, "r", to_mpf(self.r) if isinstance(self.r, Fraction) else mp.mpf(self.r))
            if not isinstance(self.theta, mpmath.mpf):
                object.__setattr__(self, "theta", to_mpf(self.theta) if isinstance(self.theta, Fraction) else mp.mpf(self.theta))
        if not self.r > 0:
            raise ValueError("modulus must be positive")


def to_plane(p: LogPoint) -> mpmath.mpc:
    """r * e^(i theta) as a plane complex number at ambient precision.

    Callers are responsible for checking that their branch rule admits the
    argument (|theta| may exceed pi on the surface).
    """
    return mp.mpc(p.r * mp.cos(p.theta), p.r * mp.sin(p.theta))


@dataclass(frozen=True)
class Sector:
    """Open sector: |theta - bisector| < half_opening, 0 < r < radius."""

    bisector: mpmath.mpf
    half_opening: mpmath.mpf
    radius: mpmath.mpf = mpmath.inf

    def __post_init__(self):
        with mp.workdps(GRID_DPS):
            for name in ("bisector", "half_opening", "radius"):
                v = getattr(self, name)
                if not isinstance(v, mpmath.mpf):
                    object.__setattr__(self, name, to_mpf(v) if isinstance(v, Fraction) else mp.mpf(v))
        if not self.half_opening > 0:
            raise ValueError("half_opening must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def is_unbounded(self) -> bool:
        return mpmath.isinf(self.radius)

    def to_json_dict(self) -> dict:
        # exact dyadic strings: fields are built at GRID_DPS, so parsing
        # back at the same precision is lossless
        return {
            "bisector": exact_str(self.bisector),
            "half_opening": exact_str(self.half_opening),
            "radius": "inf" if self.is_unbounded else exact_str(self.radius),
        }


def bisected(alpha, radius=mpmath.inf) -> Sector:
    """S_alpha: bisected by the positive real direction with half-opening
    alpha*pi/2 (built at grid precision for determinism)."""
    with mp.workdps(GRID_DPS):
        a = to_mpf(alpha) if isinstance(alpha, Fraction) else mp.mpf(alpha)
        return Sector(mp.mpf(0), a * mp.pi / 2, radius)


def sector_from_json(d: dict) -> Sector:
    radius = mpmath.inf if d["radius"] == "inf" else parse_exact(d["radius"])
    return Sector(parse_exact(d["bisector"]), parse_exact(d["half_opening"]),
                  radius)


def contains(s: Sector, p: LogPoint) -> bool:
    """Strict membership (boundary rays and arc excluded).

    Comparisons run on exact rationals (an mpf is dyadic), so the result
    does not depend on the ambient working precision.
    """
    if abs(as_fraction(p.theta) - as_fraction(s.bisector)) >= as_fraction(s.half_opening):
        return False
    if s.is_unbounded:
        return True
    return as_fraction(p.r) < as_fraction(s.radius)


def is_proper_subsector(t: Sector, s: Sector) -> bool:
    """True iff the closure of t in the surface (vertex excluded) lies in
    the open sector s: strictly nested angles, and t's closed arc inside
    s's open one.  Exact comparisons, as in ``contains``."""
    tb, tw = as_fraction(t.bisector), as_fraction(t.half_opening)
    sb, sw = as_fraction(s.bisector), as_fraction(s.half_opening)
    angles_ok = (tb - tw > sb - sw) and (tb + tw < sb + sw)
    if not angles_ok:
        return False
    if s.is_unbounded:
        return True
    return (not t.is_unbounded) and as_fraction(t.radius) < as_fraction(s.radius)


def sample_grid(s: Sector, n_r: int, n_theta: int, r_min, r_max,
                margin) -> list[LogPoint]:
    """Deterministic grid: n_r log-spaced radii on [r_min, r_max], n_theta
    equispaced arguments on the interval shrunk by margin*half_opening per
    side.  Single-count axes collapse to the geometric/angular midpoint.
    r_max is clipped strictly below a finite sector radius so that every
    sampled point satisfies ``contains``.
    """
    if n_r < 1 or n_theta < 1:
        raise ValueError("counts must be >= 1")
    with mp.workdps(GRID_DPS):
        r_lo, r_hi = mp.mpf(r_min), mp.mpf(r_max)
        margin = mp.mpf(margin)
        if not 0 < r_lo < r_hi:
            raise ValueError("need 0 < r_min < r_max")
        if not 0 < margin < 1:
            raise ValueError("need 0 < margin < 1")
        if not s.is_unbounded:
            cap = s.radius * (1 - mp.mpf(_RADIUS_CLIP))
            if r_hi > cap:
                r_hi = cap
            if not r_lo < r_hi:
                raise ValueError("radial window collapsed by radius clip")
        if n_r == 1:
            radii = [mp.sqrt(r_lo * r_hi)]
        else:
            ratio = r_hi / r_lo
            radii = [r_lo * mp.power(ratio, to_mpf(Fraction(i, n_r - 1)))
                     for i in range(n_r)]
            radii[0], radii[-1] = r_lo, r_hi
        span = (1 - margin) * s.half_opening
        if n_theta == 1:
            thetas = [s.bisector]
        else:
            lo = s.bisector - span
            thetas = [lo + 2 * span * to_mpf(Fraction(k, n_theta - 1))
                      for k in range(n_theta)]
        return [LogPoint(r, th) for r in radii for th in thetas]


def default_grid(s: Sector, n_r: int = DEFAULT_N_R,
                 n_theta: int = DEFAULT_N_THETA, r_min=DEFAULT_R_MIN,
                 r_max=DEFAULT_R_MAX, margin=DEFAULT_MARGIN) -> list[LogPoint]:
    """The default verification grid (120 x 33 over [1e-6, 1e2], margin
    0.02), clipped by the sector radius."""
    return sample_grid(s, n_r, n_theta, r_min, r_max, margin)


def refined_counts(n: int) -> int:
    """Refinement that keeps the original nodes: n -> 2n - 1."""
    return 2 * n - 1


def grid_info(n_r: int, n_theta: int, r_min, r_max, margin) -> dict:
    return {
        "n_r": n_r,
        "n_theta": n_theta,
        "r_min": str(r_min),
        "r_max": str(r_max),
        "margin": str(margin),
    }
