"""Renormalization operator: fixed point, scalings, midpoint, residual."""

import numpy as np
import pytest

from tangleproof import renorm
from tangleproof.errors import SolveError
from tangleproof.genfunc import PolyBall
from tangleproof.interval import Interval

PAPER_LAM = Interval(-0.24887681, -0.24887376)
PAPER_MU = Interval(0.061107811, 0.061112465)


def test_approx_fixed_point_degree10():
    s = renorm.approx_fixed_point(degree=10)
    assert s.check_symmetric()
    sc = renorm.scalings_of(s)
    assert abs(sc.lam.mid - PAPER_LAM.mid) < 5e-4
    assert abs(sc.mu.mid - PAPER_MU.mid) < 5e-4


def test_scalings_certified_inside_paper_enclosures(s_star):
    sc = renorm.scalings_of(s_star)
    assert sc.lam.subset_of(PAPER_LAM)
    assert sc.mu.subset_of(PAPER_MU)
    # det of the scaling map, from the product of the enclosures
    assert Interval(-0.0153, -0.0152).contains(sc.det)


def test_committed_fixed_point_is_symmetric(s_star):
    assert s_star.check_symmetric()


def test_solve_midpoint_linear():
    # s(x,y) = x + y - 1:  z = 1 - lam (x+y)/2 exactly
    c = np.zeros((2, 2))
    c[0, 0] = 2 * 0.5 - 1.0
    c[1, 0] = 1.6
    c[0, 1] = 1.6
    s = PolyBall.from_point_coeffs(c)
    lam = Interval(-0.2489)
    mp = renorm.solve_midpoint(s, lam, degree=4)
    assert mp.residual < 1e-12
    for (x, y) in [(0.0, 0.0), (1.0, -0.5), (2.0, 1.0)]:
        want = 1.0 - lam.mid * (x + y) / 2.0
        got = mp.z.eval(x, y)
        assert abs(got.mid - want) < 1e-10


def test_midpoint_z_at_10_is_one(s_star):
    sc = renorm.scalings_of(s_star)
    mp = renorm.solve_midpoint(s_star, sc.lam, degree=24)
    assert abs(mp.z.eval(1.0, 0.0).mid - 1.0) < 1e-4


def test_midpoint_symmetry(s_star):
    sc = renorm.scalings_of(s_star)
    mp = renorm.solve_midpoint(s_star, sc.lam, degree=20)
    rng = np.random.default_rng(11)
    for _ in range(100):
        x, y = rng.uniform(-1.0, 2.0, size=2)
        a = mp.z.eval(x, y)
        b = mp.z.eval(y, x)
        assert a.inflate(1e-12).intersects(b)


def test_degenerate_lambda_rejected():
    c = np.zeros((2, 2))
    c[0, 0] = 0.0
    c[1, 0] = 1.6
    c[0, 1] = 1.6
    s = PolyBall.from_point_coeffs(c)  # s = x + y - 1: lambda root is 0
    with pytest.raises(SolveError):
        renorm.scalings_of(s)


def test_renormalize_normalizations(s_star):
    r, sc, mp = renorm.renormalize(s_star, 20)
    assert r.eval(1.0, 0.0).inflate(r.ball).contains(0.0)
    assert r.partial(1).eval(1.0, 0.0).inflate(16 * r.ball).contains(1.0)


def test_renormalize_fixed_point_consistency(s_star):
    # scalings of R[s*] match those of s* to 1e-3
    r, sc, _ = renorm.renormalize(s_star, 20)
    sc2 = renorm.scalings_of(PolyBall.from_point_coeffs(r.coeffs_mid))
    assert abs(sc2.lam.mid - sc.lam.mid) < 1e-3
    assert abs(sc2.mu.mid - sc.mu.mid) < 1e-3


def test_operator_residual_small_at_degree_12():
    s = renorm.approx_fixed_point(degree=12)
    assert renorm.operator_residual(s, degree=12) < 1e-5


def test_inflate_ball(s_star):
    assert renorm.inflate_ball(s_star, 0.0).ball == s_star.ball
    q = renorm.inflate_ball(s_star, 1e-9)
    assert q.ball >= s_star.ball + 0.999e-9


def test_nonconvergence_raises():
    with pytest.raises(SolveError):
        renorm.approx_fixed_point(degree=8, max_iters=1)
