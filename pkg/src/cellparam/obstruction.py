"""Hyperbolic distances and the log|log eps| obstruction for the hyperbola ``xy = eps``.

All metrics have curvature -4: the upper half-plane carries ``|dz| / (2 Im z)``,
so every closed form is half the usual curvature -1 value.  An annulus is
handled through its universal cover: the logarithm sends it to a vertical
strip, a rotation and the exponential send the strip onto the half-plane, and
the distance is minimized over deck translates.

The module is numeric (mpmath, 128-bit by default), not certified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import mpmath
from mpmath import mp, mpc, mpf

PRECISION = 128
THETA = mpf(1) / 4


class NonPositiveImaginaryPart(ValueError):
    pass


class PointOutsideAnnulus(ValueError):
    pass


@dataclass(frozen=True)
class HPoint:
    re: mpf
    im: mpf

    @classmethod
    def of(cls, z) -> "HPoint":
        z = mpc(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> mpc:
        return mpc(self.re, self.im)


@dataclass(frozen=True)
class AnnulusSpec:
    r_in: mpf
    r_out: mpf

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise ValueError("need 0 < r_in < r_out")

    @property
    def width(self) -> mpf:
        return mpmath.log(mpf(self.r_out) / self.r_in)

    def contains(self, z) -> bool:
        return self.r_in < abs(mpc(z)) < self.r_out


def _point(p) -> mpc:
    return p.z if isinstance(p, HPoint) else mpc(p)


def dist_halfplane(p, q, prec: int = PRECISION) -> mpf:
    """``(1/2) arccosh(1 + |p - q|^2 / (2 Im p Im q))``."""
    with mp.workprec(prec):
        p, q = _point(p), _point(q)
        if p.imag <= 0 or q.imag <= 0:
            raise NonPositiveImaginaryPart("points must lie in the upper half-plane")
        arg = 1 + abs(p - q) ** 2 / (2 * p.imag * q.imag)
        return mpmath.acosh(arg) / 2


def dist_disc(p, q, prec: int = PRECISION) -> mpf:
    """Distance in the unit disc with curvature -4: ``artanh |p - q| / |1 - conj(p) q|``."""
    with mp.workprec(prec):
        p, q = mpc(p), mpc(q)
        if abs(p) >= 1 or abs(q) >= 1:
            raise ValueError("points must lie in the unit disc")
        return mpmath.atanh(abs(p - q) / abs(1 - mpmath.conj(p) * q))


def _lift(z: mpc, A: AnnulusSpec) -> mpc:
    """Point of the strip ``0 < Im s < pi`` over ``z``; the deck group acts by real translation."""
    t = mpmath.log(z) - mpmath.log(A.r_in)
    return 1j * t * mpmath.pi / A.width


def dist_annulus(p, q, A: AnnulusSpec, prec: int = PRECISION, window: Optional[int] = None) -> mpf:
    """Distance in the annulus ``A``, minimized over deck translates.

    Without ``window`` the search walks outwards from the translate nearest in
    argument until the distance has increased for two consecutive translates on
    each side; the distance along the orbit is unimodal, so this is exact.
    """
    with mp.workprec(prec):
        p, q = mpc(p), mpc(q)
        for z in (p, q):
            if not A.contains(z):
                raise PointOutsideAnnulus(f"|z| = {mpmath.nstr(abs(z), 8)} outside ({A.r_in}, {A.r_out})")
        sp, sq = _lift(p, A), _lift(q, A)
        period = 2 * mpmath.pi ** 2 / A.width
        hp = mpmath.exp(sp)

        def at(n: int) -> mpf:
            return dist_halfplane(hp, mpmath.exp(sq + n * period), prec)

        if window is not None:
            return min(at(n) for n in range(-window, window + 1))
        best = at(0)
        for step in (1, -1):
            prev, rises, n = best, 0, 0
            while rises < 2:
                n += step
                d = at(n)
                best = min(best, d)
                rises = rises + 1 if d > prev else 0
                prev = d
        return best


def annulus_density(z, A: AnnulusSpec) -> mpf:
    """Conformal density of the annulus metric at ``z`` (distance element ``rho |dz|``)."""
    z = mpc(z)
    a = mpmath.log(abs(z) / A.r_in)
    return mpmath.pi / (2 * A.width * abs(z) * mpmath.sin(mpmath.pi * a / A.width))


def diam_interval_in_annulus(eps, prec: int = PRECISION) -> mpf:
    """Diameter of ``(eps, 1)`` in ``A(eps/2, 2)``: the distance between its ends."""
    with mp.workprec(prec):
        eps = mpf(eps)
        if not 0 < eps < mpf(1) / 2:
            raise ValueError("eps must lie in (0, 1/2)")
        return dist_annulus(eps, mpf(1), AnnulusSpec(eps / 2, mpf(2)), prec)


def diameter_bound(prec: int = PRECISION) -> mpf:
    """Upper bound ``ln 3`` for the diameter of ``(0,1)`` in its unit neighborhood.

    ``(0,1)`` lies in the disc ``D(1/2, 1)``, where the two ends are at distance
    ``2 artanh(1/2) = ln 3``; the neighborhood contains that disc.
    """
    with mp.workprec(prec):
        return 2 * mpmath.atanh(mpf(1) / 2)


def lower_bound_count(eps, prec: int = PRECISION) -> int:
    """Minimum number of holomorphic disc images needed to cover ``xy = eps`` by this argument."""
    with mp.workprec(prec):
        return int(mpmath.ceil(diam_interval_in_annulus(eps, prec) / diameter_bound(prec)))


@dataclass(frozen=True)
class AffineCoverMap:
    """``t -> center + radius * t`` in the logarithmic chart ``t = log x``."""

    center: mpf
    radius: mpf
    eps: mpf

    def chart(self, t) -> mpc:
        return self.center + self.radius * mpc(t)

    def point(self, t) -> Tuple[mpc, mpc]:
        """The induced point ``(x, eps / x)`` of the hyperbola."""
        x = mpmath.exp(self.chart(t))
        return x, self.eps / x

    def image(self) -> Tuple[mpf, mpf]:
        return self.center, self.center + self.radius


def _strip(eps) -> Tuple[mpf, mpf]:
    return mpmath.log(eps) - 1, mpf(1)


def _boundary_distance(c, lo, hi) -> mpf:
    return min(c - lo, hi - c)


def analytic_cover(eps, theta=THETA, prec: int = PRECISION) -> Tuple[List[AffineCoverMap], int]:
    """Chain of affine maps whose images of ``(0,1)`` cover ``(log eps, 0)``.

    Each radius is ``theta`` times the distance of the center to the edge of
    the strip ``log eps - 1 < Re t < 1``, so the radius-2 disc stays inside it
    for ``theta <= 1/2``.  Centers march from 0 down to ``log eps`` with a small
    overlap between consecutive images.
    """
    with mp.workprec(prec):
        eps, theta = mpf(eps), mpf(theta)
        if not 0 < eps < mpf(1) / 2:
            raise ValueError("eps must lie in (0, 1/2)")
        lo, hi = _strip(eps)
        target = mpmath.log(eps)
        maps: List[AffineCoverMap] = []
        right = mpf(0)
        while True:
            # image end c + theta * dist(c) is increasing in c; place it just past ``right``
            goal = right + theta * _boundary_distance(right, lo, hi) * mpf(10) ** -6
            a, b = lo, right
            for _ in range(prec):
                m = (a + b) / 2
                if m + theta * _boundary_distance(m, lo, hi) < goal:
                    a = m
                else:
                    b = m
            c = b
            maps.append(AffineCoverMap(c, theta * _boundary_distance(c, lo, hi), eps))
            if c <= target:
                break
            right = c
        if not verify_cover(maps, eps):
            raise RuntimeError("affine cover failed verification")
        return maps, len(maps)


def verify_cover(maps: List[AffineCoverMap], eps, slack=mpf(10) ** -9) -> bool:
    """Each radius-2 disc lies in the strip and the images of ``(0,1)`` cover ``(log eps, 0)``."""
    eps = mpf(eps)
    lo, hi = _strip(eps)
    for m in maps:
        if not (m.center - 2 * m.radius > lo - slack and m.center + 2 * m.radius < hi + slack):
            return False
    reach = mpmath.log(eps)
    for a, b in sorted(m.image() for m in maps):
        if a > reach:
            return False
        reach = max(reach, b)
    return reach > 0


@dataclass
class ScanRow:
    eps: mpf
    diam: mpf
    lower_bound: int
    cover_count: int

    @property
    def ratio(self) -> float:
        return self.cover_count / self.lower_bound


def scan(eps_values, prec: int = PRECISION) -> List[ScanRow]:
    rows = []
    for eps in eps_values:
        rows.append(ScanRow(mpf(eps), diam_interval_in_annulus(eps, prec), lower_bound_count(eps, prec),
                            analytic_cover(eps, prec=prec)[1]))
    return rows


def log_grid(lo, hi, points: int) -> List[mpf]:
    """``points`` values from ``hi`` down to ``lo``, equally spaced in ``log |log eps|``."""
    a, b = mpmath.log(-mpmath.log(mpf(hi))), mpmath.log(-mpmath.log(mpf(lo)))
    if points == 1:
        return [mpf(hi)]
    return [mpmath.exp(-mpmath.exp(a + (b - a) * k / (points - 1))) for k in range(points)]


__all__ = [
    "AffineCoverMap", "AnnulusSpec", "HPoint", "NonPositiveImaginaryPart", "PointOutsideAnnulus", "ScanRow",
    "THETA", "analytic_cover", "annulus_density", "diam_interval_in_annulus", "diameter_bound", "dist_annulus",
    "dist_disc", "dist_halfplane", "log_grid", "lower_bound_count", "scan", "verify_cover",
]
