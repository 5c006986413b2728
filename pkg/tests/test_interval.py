"""Interval substrate: containment, directed rounding, Newton verdicts."""

import math

import numpy as np
import pytest

from tangleproof import interval as iv
from tangleproof.errors import DomainError, SolveError
from tangleproof.interval import (IMat2, Interval, IVec2, VerdictKind, eig2_real,
                                  mat2_solve, newton_refine, newton_step)

RNG = np.random.default_rng(20260810)


def rand_interval(scale=10.0):
    a, b = sorted(RNG.normal(scale=scale, size=2))
    return Interval(a, b)


def test_exact_add():
    assert Interval(1, 2) + Interval(3, 4) == Interval(4, 6)


def test_exact_mul_symmetric():
    assert Interval(-1, 1) * Interval(-1, 1) == Interval(-1, 1)


def test_div_strict_enclosure():
    from fractions import Fraction

    r = Interval(1) / Interval(3)
    third = Fraction(1, 3)
    assert Fraction(r.lo) < third < Fraction(r.hi)
    assert r.hi - r.lo <= 2 * math.ulp(1.0 / 3.0)


def test_div_exact_quotient_stays_exact():
    assert Interval(6) / Interval(2) == Interval(3)
    assert Interval(1.6) / Interval(1.6) == Interval(1)


def test_div_by_zero_interval():
    with pytest.raises(DomainError):
        Interval(1) / Interval(-1, 1)


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
def test_point_containment_random(op):
    # interval result must contain the extended-precision point result
    from fractions import Fraction

    fn = {"add": lambda a, b: a + b, "sub": lambda a, b: a - b,
          "mul": lambda a, b: a * b, "div": lambda a, b: a / b}[op]
    n = 0
    while n < 2000:
        a, b = RNG.normal(scale=100.0, size=2)
        if op == "div" and abs(b) < 1e-8:
            continue
        exact = fn(Fraction(a), Fraction(b))
        r = iv.arith(op, Interval(a), Interval(b))
        assert Fraction(r.lo) <= exact <= Fraction(r.hi)
        n += 1


def test_inclusion_monotonicity_random():
    for _ in range(800):
        A, B = rand_interval(), rand_interval()
        A2 = A.inflate(abs(RNG.normal()) + 1e-12)
        B2 = B.inflate(abs(RNG.normal()) + 1e-12)
        for op in ("add", "sub", "mul"):
            assert iv.arith(op, A, B).subset_of(iv.arith(op, A2, B2))


def test_pow_even_odd():
    x = Interval(-2, 3)
    assert x ** 2 == Interval(0, 9)
    p = x ** 3
    assert p.lo <= -8 <= p.hi and p.contains(27)
    assert (Interval(-2, -1) ** 2).contains(Interval(1, 4))
    assert (x ** 0) == Interval(1, 1)


def test_pow_contains_sampled_values():
    for _ in range(200):
        x = rand_interval(2.0)
        n = int(RNG.integers(1, 7))
        t = RNG.uniform(x.lo, x.hi)
        assert (x ** n).contains(float(t) ** n) or abs(t) > max(abs(x.lo), abs(x.hi))


def test_sqrt():
    r = Interval(2).sqrt()
    assert r.lo < math.sqrt(2) < r.hi
    with pytest.raises(DomainError):
        Interval(-1, 1).sqrt()


def test_log_exp_enclose():
    for v in (0.1, 1.0, 2.5, 47.8):
        assert Interval(v).log().contains(math.log(v))
        assert Interval(v).exp().contains(math.exp(v))


def test_from_decimal_contains_value():
    r = Interval.from_decimal("0.1")
    assert r.lo < 0.1 < r.hi or r.contains(0.1)


# -- batched kernels agree with scalar ops -----------------------------------

def test_array_kernels_match_scalar():
    n = 500
    alo = RNG.normal(size=n)
    ahi = alo + np.abs(RNG.normal(size=n))
    blo = RNG.normal(size=n)
    bhi = blo + np.abs(RNG.normal(size=n))
    for name, arr_fn, sc_fn in [
        ("add", iv.arr_add, lambda a, b: a + b),
        ("sub", iv.arr_sub, lambda a, b: a - b),
        ("mul", iv.arr_mul, lambda a, b: a * b),
    ]:
        lo, hi = arr_fn(alo, ahi, blo, bhi)
        for k in range(n):
            r = sc_fn(Interval(alo[k], ahi[k]), Interval(blo[k], bhi[k]))
            assert lo[k] == r.lo and hi[k] == r.hi, name


def test_array_div_and_sqrt_match_scalar():
    n = 300
    alo = RNG.normal(size=n)
    ahi = alo + np.abs(RNG.normal(size=n))
    blo = np.abs(RNG.normal(size=n)) + 0.5
    bhi = blo + np.abs(RNG.normal(size=n))
    lo, hi = iv.arr_div(alo, ahi, blo, bhi)
    for k in range(n):
        r = Interval(alo[k], ahi[k]) / Interval(blo[k], bhi[k])
        assert lo[k] == r.lo and hi[k] == r.hi
    slo, shi = iv.arr_sqrt(blo, bhi)
    for k in range(n):
        r = Interval(blo[k], bhi[k]).sqrt()
        assert slo[k] == r.lo and shi[k] == r.hi


def test_array_sqr_matches_pow2():
    n = 300
    alo = RNG.normal(size=n)
    ahi = alo + np.abs(RNG.normal(size=n))
    lo, hi = iv.arr_sqr(alo, ahi)
    for k in range(n):
        r = Interval(alo[k], ahi[k]) ** 2
        assert lo[k] == r.lo and hi[k] == r.hi


# -- linear algebra ------------------------------------------------------------

def test_mat2_solve_identity():
    A = IMat2.identity()
    b = IVec2.of(Interval(1), Interval(2))
    r = mat2_solve(A, b)
    assert r.x.contains(1) and r.u.contains(2)


def test_mat2_solve_diagonal():
    A = IMat2.of(2, 0, 0, 4)
    b = IVec2.of(2, 4)
    r = mat2_solve(A, b)
    assert r.x.contains(1) and r.u.contains(1)


def test_mat2_solve_against_dense_oracle():
    for _ in range(200):
        M = RNG.normal(size=(2, 2))
        if abs(np.linalg.det(M)) < 0.3:
            continue
        v = RNG.normal(size=2)
        sol = np.linalg.solve(M, v)
        A = IMat2.of(*M.ravel())
        r = mat2_solve(A, IVec2.of(*v))
        # numpy's solution itself carries rounding error; compare midpoints
        assert abs(r.x.mid - sol[0]) < 1e-12 * (1 + abs(sol[0]))
        assert abs(r.u.mid - sol[1]) < 1e-12 * (1 + abs(sol[1]))
        assert r.x.inflate(1e-11 * (1 + abs(sol[0]))).contains(sol[0])
        assert r.u.inflate(1e-11 * (1 + abs(sol[1]))).contains(sol[1])


def test_mat2_solve_singular():
    from tangleproof.errors import SingularError

    with pytest.raises(SingularError):
        mat2_solve(IMat2.of(1, 2, 2, 4), IVec2.of(1, 1))


def test_eig2_real_diagonal():
    lam1, lam2 = eig2_real(IMat2.of(2, 0, 0, 0.5))
    assert lam1.contains(0.5) and lam2.contains(2.0)


def test_eig2_real_complex_is_inconclusive():
    with pytest.raises(SolveError):
        eig2_real(IMat2.of(0, -1, 1, 0))


def test_eig2_real_random_oracle():
    for _ in range(200):
        M = RNG.normal(size=(2, 2))
        w = np.linalg.eigvals(M)
        if np.iscomplexobj(w) and np.abs(w.imag).max() > 1e-12:
            continue
        w = np.sort(w.real)
        if w[1] - w[0] < 0.2:
            continue
        lam1, lam2 = eig2_real(IMat2.of(*M.ravel()))
        # numpy's eigenvalues are rounded; allow oracle slack of a few ulps
        tol = 1e-12 * (1 + np.abs(w).max())
        assert lam1.inflate(tol).contains(w[0]) and lam2.inflate(tol).contains(w[1])


# -- interval Newton -----------------------------------------------------------

def test_newton_linear_exact():
    v = newton_step(lambda x: x - 1.0, lambda x: Interval(1.0), Interval(0, 2), 0.5)
    assert v.kind is VerdictKind.UNIQUE_ROOT
    assert v.enclosure.contains(1.0)


def test_newton_sqrt2():
    f = lambda x: x * x - 2.0
    df = lambda x: x * 2.0
    v = newton_refine(f, df, Interval(1, 2))
    assert v.is_unique
    import mpmath

    root2 = mpmath.mpf(2) ** mpmath.mpf("0.5")
    assert v.enclosure.lo <= root2 <= v.enclosure.hi
    assert v.enclosure.width < 1e-14


def test_newton_no_root():
    v = newton_step(lambda x: x * x + 1.0, lambda x: x * 2.0, Interval(0, 2), 1.0)
    assert v.kind is VerdictKind.NO_ROOT


def test_newton_unique_root_strictly_interior():
    f = lambda x: x * x - 2.0
    df = lambda x: x * 2.0
    X = Interval(1, 2)
    v = newton_step(f, df, X, 1.5)
    assert v.is_unique
    assert X.lo < v.enclosure.lo and v.enclosure.hi < X.hi
