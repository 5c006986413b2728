"""The implicit map: solver, derivative, iterates, fixed point, domain."""

import numpy as np
import pytest

from tangleproof.errors import MapDomainError
from tangleproof.genfunc import PolyBall
from tangleproof.interval import IMat2, Interval, IVec2
from tangleproof.maps import MapHandle

RNG = np.random.default_rng(2026)

PAPER_X0 = Interval(0.57761843, 0.57761989)
PAPER_EP = Interval(-2.05763559, -2.05759928)
PAPER_EM = Interval(-0.48601715, -0.48598084)


def linear_handle():
    # s(x, y) = x: u + s(y, x) = u + y = 0 gives y = -u, F(x, u) = (-u, x)
    c = np.zeros((2, 2))
    c[0, 0] = 0.5
    c[1, 0] = 1.6
    return MapHandle(PolyBall.from_point_coeffs(c))


def test_linear_solve_y():
    m = linear_handle()
    y, ok = m.solve_y(Interval(0.2), Interval(0.3))
    assert ok and abs(y.mid + 0.3) < 1e-12


def test_linear_apply():
    m = linear_handle()
    q = m.apply_F(IVec2.of(0.2, 0.3))
    assert abs(q.x.mid + 0.3) < 1e-12  # y = -u
    assert abs(q.u.mid - 0.2) < 1e-12  # v = s(x, y) = x


def test_linear_dF_closed_form():
    # s = y: s1 = 0 in the first slot? s1(y,x) means d/d(first arg) of s at
    # (y, x) = d/dy [x] ... with s(x,y) = y we have s1 = 0, so DF is singular;
    # use s(x,y) = x + y instead: s1 = 1, s2 = 1
    c = np.zeros((2, 2))
    c[0, 0] = 1.0
    c[1, 0] = 1.6
    c[0, 1] = 1.6
    m = MapHandle(PolyBall.from_point_coeffs(c))
    A = m.dF(IVec2.of(0.1, -0.2))
    # closed form: all entries from s1 = s2 = 1: a = -1, b = -1, c = 0, d = -1
    assert A.a11.contains(-1.0) and A.a12.contains(-1.0)
    assert A.a21.inflate(1e-12).contains(0.0) and A.a22.contains(-1.0)
    assert A.det().inflate(1e-12).contains(1.0)


@pytest.fixture(scope="module")
def fp(map_star):
    return map_star.fixed_point()


def test_fixed_point_location(fp):
    assert fp.p0.u.contains(0.0)
    assert abs(fp.p0.x.mid - PAPER_X0.mid) < 1e-4
    assert fp.p0.x.width < 1e-9


def test_fixed_point_eigenvalues(fp):
    assert abs(fp.eig_plus.mid - PAPER_EP.mid) < 1e-3
    assert abs(fp.eig_minus.mid - PAPER_EM.mid) < 1e-3
    assert (fp.eig_plus * fp.eig_minus).inflate(1e-9).contains(1.0)


def test_fixed_point_eigenvector_matches_tables(fp):
    # table spanning vector for the fixed point
    v = np.array([0.788578889012330, 0.614933602760558])
    got = np.array([fp.evec_u.x.mid, fp.evec_u.u.mid])
    got = got / np.linalg.norm(got) * np.sign(got[0])
    assert np.abs(got - v).max() < 1e-4


def test_apply_F_contains_fixed_point(fp, map_star):
    q = map_star.apply_F(fp.p0)
    assert q.intersects(fp.p0)


def test_reversibility(map_star, fp):
    # T o F o T o F = id on random domain points near the fixed point region
    pts = np.stack([RNG.uniform(0.4, 0.8, 50), RNG.uniform(-0.2, 0.2, 50)], axis=1)
    for p in pts[:10]:
        P = IVec2.of(Interval(p[0]).inflate(1e-9), Interval(p[1]).inflate(1e-9))
        try:
            q = map_star.apply_F(P)
            r = map_star.apply_F_inv(q)
        except MapDomainError:
            continue
        assert r.intersects(P)


def test_inverse_composition(map_star):
    p = IVec2.of(Interval(0.6).inflate(1e-10), Interval(0.05).inflate(1e-10))
    q = map_star.apply_F(p)
    back = map_star.apply_F_inv(q)
    assert back.x.contains(p.x) or back.x.intersects(p.x)
    assert back.u.contains(p.u) or back.u.intersects(p.u)


def test_unimodularity(map_star):
    pts = np.stack([RNG.uniform(0.45, 0.75, 100), RNG.uniform(-0.15, 0.15, 100)],
                   axis=1)
    count = 0
    for p in pts:
        P = IVec2.of(Interval(float(p[0])).inflate(1e-12),
                     Interval(float(p[1])).inflate(1e-12))
        try:
            A = map_star.dF(P)
        except MapDomainError:
            continue
        assert A.det().inflate(1e-10).contains(1.0)
        count += 1
    assert count > 50


def test_dG_unimodular_and_matches_fd(map_star):
    p = IVec2.of(Interval(0.62).inflate(1e-12), Interval(0.03).inflate(1e-12))
    A = map_star.dG(p)
    assert A.det().inflate(1e-8).contains(1.0)
    # finite-difference oracle at the midpoint
    h = 1e-6
    base = np.array([0.62, 0.03])
    cols = []
    for k in range(2):
        dp = np.zeros(2)
        dp[k] = h
        fp_ = map_star.apply_float((base + dp)[None, :])[0]
        fm_ = map_star.apply_float((base - dp)[None, :])[0]
        for _ in range(2):
            fp_ = map_star.apply_float(fp_[None, :])[0]
            fm_ = map_star.apply_float(fm_[None, :])[0]
        cols.append((fp_ - fm_) / (2 * h))
    J = np.stack(cols, axis=1)
    mids = np.array([[A.a11.mid, A.a12.mid], [A.a21.mid, A.a22.mid]])
    assert np.abs(J - mids).max() < 1e-5 * max(1.0, np.abs(J).max())


def test_period3_point(map_star):
    # the paper's period-three point near (-0.527156, 0): G(p1) ~ p1
    p1 = IVec2.of(Interval(-0.527156).inflate(1e-4), Interval(0.0).inflate(1e-4))
    q = map_star.apply_G(p1)
    assert q.intersects(p1)


def test_apply_iter_negative(map_star):
    p = IVec2.of(Interval(0.6).inflate(1e-11), Interval(0.02).inflate(1e-11))
    q = map_star.apply_iter(p, 2)
    r = map_star.apply_iter(q, -2)
    assert r.intersects(p)


def test_inclusion_monotonicity_apply(map_star):
    p_small = IVec2.of(Interval(0.6).inflate(1e-10), Interval(0.01).inflate(1e-10))
    p_big = IVec2.of(Interval(0.6).inflate(1e-6), Interval(0.01).inflate(1e-6))
    qs = map_star.apply_F(p_small)
    qb = map_star.apply_F(p_big)
    assert qb.contains(qs)


def test_find_domain_contains_key_boxes(map_star):
    boxes, ok = map_star.find_domain(x_range=(0.3, 0.9), u_range=(-0.3, 0.3),
                                     grid=(12, 12))
    assert ok.sum() > 0
    # fixed point cell certified
    p0 = (0.577619, 0.0)
    hit = ((boxes[:, 0] <= p0[0]) & (p0[0] <= boxes[:, 1]) &
           (boxes[:, 2] <= p0[1]) & (p0[1] <= boxes[:, 3]))
    assert hit.any()


def test_find_domain_empty_grid(map_star):
    boxes, ok = map_star.find_domain(grid=(0, 0))
    assert len(boxes) == 0


def test_jet_gradients_match_dF(map_star):
    xlo = np.array([0.6 - 1e-9])
    xhi = np.array([0.6 + 1e-9])
    ulo = np.array([0.02 - 1e-9])
    uhi = np.array([0.02 + 1e-9])
    jet = map_star.jet_F(xlo, xhi, ulo, uhi)
    (eight, _) = map_star.dF_batch(xlo, xhi, ulo, uhi)
    alo, ahi, blo, bhi, clo, chi_, dlo, dhi = eight
    gx = jet.d1[0][0]
    gu = jet.d1[0][1]
    vx = jet.d1[1][0]
    vu = jet.d1[1][1]
    assert abs(0.5 * (gx[0] + gx[1]) - 0.5 * (alo + ahi)) < 1e-9
    assert abs(0.5 * (gu[0] + gu[1]) - 0.5 * (blo + bhi)) < 1e-9
    assert abs(0.5 * (vx[0] + vx[1]) - 0.5 * (clo + chi_)) < 1e-9
    assert abs(0.5 * (vu[0] + vu[1]) - 0.5 * (dlo + dhi)) < 1e-9


def test_jet_hessian_matches_fd(map_star):
    base = np.array([0.62, 0.03])
    xlo = np.array([base[0]])
    jet = map_star.jet_F(xlo, xlo, np.array([base[1]]), np.array([base[1]]))
    h = 1e-5

    def Fm(p):
        return map_star.apply_float(np.asarray(p)[None, :])[0]

    for k in range(2):
        # d2 F_k / dx2
        fd = (Fm(base + [h, 0])[k] - 2 * Fm(base)[k] + Fm(base - [h, 0])[k]) / h ** 2
        got = 0.5 * (jet.d2[k][0][0][0][0] + jet.d2[k][0][0][1][0])
        assert abs(fd - got) < 1e-4 * max(1.0, abs(fd))
        # d2 F_k / dx du
        fd = (Fm(base + [h, h])[k] - Fm(base + [h, -h])[k]
              - Fm(base + [-h, h])[k] + Fm(base + [-h, -h])[k]) / (4 * h ** 2)
        got = 0.5 * (jet.d2[k][0][1][0][0] + jet.d2[k][0][1][1][0])
        assert abs(fd - got) < 1e-4 * max(1.0, abs(fd))
        # d2 F_k / du2
        fd = (Fm(base + [0, h])[k] - 2 * Fm(base)[k] + Fm(base - [0, h])[k]) / h ** 2
        got = 0.5 * (jet.d2[k][1][1][0][0] + jet.d2[k][1][1][1][0])
        assert abs(fd - got) < 1e-4 * max(1.0, abs(fd))
