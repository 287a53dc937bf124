import math
import random

import mpmath
import numpy as np
import pytest

from cellparam.obstruction import (AnnulusSpec, NonPositiveImaginaryPart, PointOutsideAnnulus, analytic_cover,
                                   diam_interval_in_annulus, diameter_bound, dist_annulus, dist_disc,
                                   dist_halfplane, lower_bound_count, verify_cover)
from oracles import annulus_oracle, geodesic, halfplane_density, halfplane_grad, strip_density


def test_vertical_segment_distance():
    assert float(dist_halfplane(1j, 2j)) == pytest.approx(math.log(2) / 2, abs=1e-15)
    assert dist_halfplane(0.3 + 0.2j, 0.3 + 0.2j) == 0


def test_horizontal_pair_matches_oracle():
    d = float(dist_halfplane(-1 + 1j, 1 + 1j))
    assert d == pytest.approx(math.acosh(3) / 2, abs=1e-15)
    graph, polished = geodesic(halfplane_density, halfplane_grad, (-1, 1), (1, 1), (-3, 0.05), (3, 4))
    assert abs(polished - d) < 1e-6
    assert abs(graph - d) < 5e-2


def test_halfplane_rejects_lower_points():
    with pytest.raises(NonPositiveImaginaryPart):
        dist_halfplane(1j, -1j)


def test_annulus_distance_basics():
    A = AnnulusSpec(mpmath.mpf(1) / 2, 2)
    assert dist_annulus(1, 1, A) == 0
    with pytest.raises(PointOutsideAnnulus):
        dist_annulus(1, 3, A)
    with pytest.raises(ValueError):
        AnnulusSpec(2, 1)


def test_annulus_symmetry_and_triangle_inequality():
    rng = random.Random(7)
    A = AnnulusSpec(mpmath.mpf(1) / 2, 2)

    def pt():
        return mpmath.exp(rng.uniform(math.log(0.52), math.log(1.9)) + 1j * rng.uniform(-math.pi, math.pi))

    for _ in range(100):
        a, b, c = pt(), pt(), pt()
        ab, ba = dist_annulus(a, b, A), dist_annulus(b, a, A)
        assert abs(ab - ba) < 1e-9
        assert ab <= dist_annulus(a, c, A) + dist_annulus(c, b, A) + 1e-9


def test_deck_window_is_sufficient():
    rng = random.Random(3)
    A = AnnulusSpec(mpmath.mpf(1) / 8, 4)
    for _ in range(20):
        a = mpmath.exp(rng.uniform(-2, 1.3) + 1j * rng.uniform(-3, 3))
        b = mpmath.exp(rng.uniform(-2, 1.3) + 1j * rng.uniform(-3, 3))
        d = dist_annulus(a, b, A)
        assert d == dist_annulus(a, b, A, window=6) == dist_annulus(a, b, A, window=12)


def test_annulus_matches_oracle_on_a_few_pairs():
    rng = random.Random(11)
    for _ in range(3):
        z = np.exp(rng.uniform(np.log(0.55), np.log(1.8)) + 1j * rng.uniform(-3, 3))
        w = np.exp(rng.uniform(np.log(0.55), np.log(1.8)) + 1j * rng.uniform(-3, 3))
        assert abs(annulus_oracle(z, w, 0.5, 2) - float(dist_annulus(z, w, AnnulusSpec(0.5, 2)))) < 1e-4


def test_interval_diameter_at_quarter_matches_integral():
    # the real segment is a geodesic, so the distance is the integral of the density along it
    eps = 0.25
    width = math.log(2 / (eps / 2))
    rho = strip_density(width)
    ts = np.linspace(math.log(eps) - math.log(eps / 2), -math.log(eps / 2), 200001)
    vals = rho(np.stack([ts, np.zeros_like(ts)], 1))
    integral = float(np.sum((vals[1:] + vals[:-1]) / 2 * np.diff(ts)))
    assert float(diam_interval_in_annulus(eps)) == pytest.approx(integral, abs=1e-4)


def test_diameter_grows_as_eps_shrinks():
    ds = [diam_interval_in_annulus(mpmath.mpf(10) ** -k) for k in range(2, 12)]
    assert all(a < b for a, b in zip(ds, ds[1:]))


def test_diameter_ratio_tracks_double_log():
    r = diam_interval_in_annulus(mpmath.mpf("1e-8")) / diam_interval_in_annulus(mpmath.mpf("1e-4"))
    want = math.log(8 * math.log(10)) / math.log(4 * math.log(10))
    assert abs(float(r) / want - 1) < 0.15


def test_diameter_constant():
    assert float(diameter_bound()) == pytest.approx(math.log(3), abs=1e-15)


def test_counts_non_decreasing():
    counts = [lower_bound_count(mpmath.mpf(10) ** -k) for k in range(2, 17)]
    assert counts == sorted(counts) and counts[0] >= 1


def test_cover_verifies_and_doubling_adds_constant():
    n = {k: analytic_cover(mpmath.mpf(10) ** -k)[1] for k in (4, 8, 16)}
    assert abs((n[8] - n[4]) - (n[16] - n[8])) <= 2
    maps, _ = analytic_cover(mpmath.mpf("1e-6"))
    assert verify_cover(maps, mpmath.mpf("1e-6"))
    assert not verify_cover(maps[:-1], mpmath.mpf("1e-6"))


def test_cover_map_lands_on_hyperbola():
    eps = mpmath.mpf("1e-5")
    m = analytic_cover(eps)[0][0]
    x, y = m.point(0.5)
    assert abs(x * y - eps) < mpmath.mpf(10) ** -30


def test_schwarz_pick_for_squaring():
    rng = random.Random(5)
    for _ in range(100):
        p = mpmath.sqrt(rng.random()) * 0.99 * mpmath.expjpi(2 * rng.random())
        q = mpmath.sqrt(rng.random()) * 0.99 * mpmath.expjpi(2 * rng.random())
        assert dist_disc(p ** 2, q ** 2) <= dist_disc(p, q) + 1e-9


def test_schwarz_pick_for_annulus_inclusion():
    rng = random.Random(6)
    small, big = AnnulusSpec(mpmath.mpf(1) / 4, 2), AnnulusSpec(mpmath.mpf(1) / 8, 4)
    for _ in range(100):
        a = mpmath.exp(rng.uniform(math.log(0.26), math.log(1.95)) + 1j * rng.uniform(-3.1, 3.1))
        b = mpmath.exp(rng.uniform(math.log(0.26), math.log(1.95)) + 1j * rng.uniform(-3.1, 3.1))
        assert dist_annulus(a, b, big) <= dist_annulus(a, b, small) + 1e-9
