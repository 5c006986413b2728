"""PolyBall: enclosure, derivatives, norm, symmetry, serialization."""

import numpy as np
import pytest

from tangleproof.errors import DomainError
from tangleproof.genfunc import DEFAULT_CENTER, DEFAULT_RHO, PolyBall
from tangleproof.interval import Interval

RNG = np.random.default_rng(7)


def random_polyball(degree=6, scale=1.0, ball=0.0):
    c = np.zeros((degree + 1, degree + 1))
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            c[i, j] = RNG.normal() * scale * 0.5 ** (i + j)
    return PolyBall.from_point_coeffs(c, ball=ball)


def horner_exact(c, X, Y):
    from fractions import Fraction

    N = c.shape[0] - 1
    res = Fraction(0)
    X, Y = Fraction(X), Fraction(Y)
    for i in range(N, -1, -1):
        row = Fraction(0)
        for j in range(N - i, -1, -1):
            row = row * Y + Fraction(c[i, j])
        res = res * X + row
    return res


def test_constant():
    pb = PolyBall.monomial(0, 0, 1.0, degree=3)
    for (x, y) in [(0.5, 0.5), (2.0, -1.0), (0.1, 1.9)]:
        assert pb.eval(x, y) == Interval(1.0)


def test_basis_normalization():
    # single c10 = 1: value at x = center + rho is exactly 1
    pb = PolyBall.monomial(1, 0, 1.0, degree=3)
    r = pb.eval(DEFAULT_CENTER + DEFAULT_RHO, 0.3)
    assert r == Interval(1.0)


def test_eval_contains_exact_horner():
    from fractions import Fraction

    pb = random_polyball(degree=6)
    c = pb.coeffs_mid
    for _ in range(300):
        x = RNG.uniform(DEFAULT_CENTER - DEFAULT_RHO, DEFAULT_CENTER + DEFAULT_RHO)
        y = RNG.uniform(DEFAULT_CENTER - DEFAULT_RHO, DEFAULT_CENTER + DEFAULT_RHO)
        X = (Fraction(x) - Fraction(0.5)) / Fraction(DEFAULT_RHO)
        Y = (Fraction(y) - Fraction(0.5)) / Fraction(DEFAULT_RHO)
        exact = horner_exact(c, X, Y)
        r = pb.eval(x, y)
        assert Fraction(r.lo) <= exact <= Fraction(r.hi)


def test_member_enclosure_with_ball():
    # any member g with ||g - p|| <= ball must be enclosed; perturb by a
    # constant within the ball radius
    pb = random_polyball(degree=4, ball=1e-3)
    shifted = pb.coeffs_mid.copy()
    shifted[0, 0] += 0.5e-3
    member = PolyBall.from_point_coeffs(shifted)
    for _ in range(100):
        x = RNG.uniform(-1.0, 2.0)
        y = RNG.uniform(-1.0, 2.0)
        val = member.eval(x, y)
        enc = pb.eval(x, y)
        assert enc.lo <= val.lo and val.hi <= enc.hi


def test_eval_outside_domain_raises():
    pb = random_polyball(degree=3)
    with pytest.raises(DomainError):
        pb.eval(3.0, 0.5)


def test_partial_of_constant_is_zero():
    pb = PolyBall.monomial(0, 0, 7.0, degree=4)
    d = pb.partial(1)
    assert d.eval(0.5, 0.5) == Interval(0.0)
    assert np.all(d.clo == 0) and np.all(d.chi == 0)


def test_partial_power_rule():
    # c20 X^2 -> d1 gives 2 c20 X / rho
    pb = PolyBall.monomial(2, 0, 3.0, degree=4)
    d = pb.partial(1)
    x = 1.3
    X = (x - 0.5) / DEFAULT_RHO
    expect = 2 * 3.0 * X / DEFAULT_RHO
    r = d.eval(x, 0.5)
    assert abs(r.mid - expect) < 1e-14
    assert r.contains(expect) or abs(r.mid - expect) < 1e-13


def test_partial_ball_cauchy_inflation():
    pb = random_polyball(degree=4, ball=1e-6)
    d = pb.partial(2)
    assert d.ball >= 1e-6 * 16.0 / DEFAULT_RHO * 0.999
    assert d.valid_rho == pytest.approx(DEFAULT_RHO * 15 / 16)
    # point polynomial keeps full domain
    p2 = random_polyball(degree=4, ball=0.0).partial(1)
    assert p2.valid_rho == DEFAULT_RHO and p2.ball == 0.0


def test_partial_matches_finite_differences():
    pb = random_polyball(degree=6)
    d1 = pb.partial(1)
    h = 1e-6
    for _ in range(100):
        x = RNG.uniform(-0.5, 1.5)
        y = RNG.uniform(-0.5, 1.5)
        fd = (pb.eval_mid(x + h, y) - pb.eval_mid(x - h, y)) / (2 * h)
        assert abs(d1.eval(x, y).mid - fd) < 1e-6


def test_norm_zero_and_single():
    assert PolyBall.zeros(3).norm() == Interval(0.0)
    pb = PolyBall.monomial(1, 1, 2.0, degree=3)
    assert pb.norm().contains(2.0)
    assert pb.norm().width < 1e-15


def test_norm_dominates_sup():
    pb = random_polyball(degree=5)
    bound = pb.norm().hi
    for _ in range(300):
        x = RNG.uniform(-1.0, 2.0)
        y = RNG.uniform(-1.0, 2.0)
        assert abs(pb.eval_mid(x, y)) <= bound + 1e-12


def test_check_symmetric():
    # s(x,y) = x + y  ->  d1 s = 1 symmetric
    c = np.zeros((3, 3))
    c[0, 0] = 2 * DEFAULT_CENTER
    c[1, 0] = DEFAULT_RHO
    c[0, 1] = DEFAULT_RHO
    assert PolyBall.from_point_coeffs(c).check_symmetric()
    # d1 of X^2 Y is 2XY, which IS symmetric (self-paired identity)
    c = np.zeros((4, 4))
    c[2, 1] = 1.0
    assert PolyBall.from_point_coeffs(c).check_symmetric()
    # s = X^3: d1 = 3X^2 vs 3Y^2, genuinely asymmetric
    c = np.zeros((4, 4))
    c[3, 0] = 1.0
    assert not PolyBall.from_point_coeffs(c).check_symmetric()


def test_serialization_roundtrip():
    pb = random_polyball(degree=5, ball=1.25e-7)
    text = pb.to_text()
    back = PolyBall.from_text(text)
    assert np.array_equal(back.clo, pb.clo)
    assert np.array_equal(back.chi, pb.chi)
    assert back.rho == pb.rho and back.center == pb.center
    assert back.ball == pb.ball and back.valid_rho == pb.valid_rho
    assert back.degree == pb.degree


def test_range_on_bidisk_bounds_samples():
    pb = random_polyball(degree=5)
    lo, hi = pb.range_on_bidisk(subdivision=12)
    for _ in range(300):
        x = RNG.uniform(-1.0, 2.0)
        y = RNG.uniform(-1.0, 2.0)
        v = pb.eval_mid(x, y)
        assert lo - 1e-12 <= v <= hi + 1e-12


def test_inflate():
    pb = random_polyball(degree=3)
    assert pb.inflate(0.0).ball == pb.ball
    q = pb.inflate(1e-9)
    assert q.ball >= pb.ball + 1e-9 * 0.999
