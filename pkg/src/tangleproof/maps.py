"""The area-preserving map defined implicitly by a generating function.

A reversible generating function s defines the map

    F : (x, -s(y, x)) -> (y, s(x, y)),

so evaluating F at (x, u) means solving u + s(y, x) = 0 for y (the interval
Newton operator certifies local uniqueness) and returning (y, s(x, y)).  The
derivative comes from implicit differentiation:

    DF = [ -s2(y,x)/s1(y,x)                    -1/s1(y,x)          ]
         [ s1(x,y) - s2(x,y) s2(y,x)/s1(y,x)   -s2(x,y)/s1(y,x)    ],

with det DF = 1.  Reversibility T o F o T = F^{-1}, T(x,u) = (x,-u), supplies
the inverse, and the third iterate G = F o F o F is the map whose horseshoe is
certified downstream.

Everything is batched: boxes travel as (lo, hi) ndarray pairs so covering
checks can push thousands of edge segments through F at once.  Scalar wrappers
take IVec2.  Second-order jets (values, first and second derivatives as
intervals) propagate through compositions for the distortion estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import interval as iv
from .errors import MapDomainError, SingularError, SolveError
from .genfunc import PolyBall
from .interval import IMat2, Interval, IVec2, eig2_real, newton2_refine


@dataclass(frozen=True)
class FixedPointCert:
    """Certified hyperbolic fixed point on the symmetry line u = 0."""

    p0: IVec2
    eig_plus: Interval
    eig_minus: Interval
    evec_u: IVec2
    evec_s: IVec2

    def __post_init__(self):
        if not self.p0.u.contains(0.0):
            raise SolveError("reversibility pins the fixed point to u = 0")
        if not (self.eig_plus.mig > 1.0 and self.eig_minus.mag < 1.0
                and self.eig_minus.mig > 0.0):
            raise SolveError("eigenvalue enclosures are not hyperbolic")
        if self.eig_plus.intersects(self.eig_minus):
            raise SolveError("eigenvalue enclosures overlap")


class MapHandle:
    """A generating function together with its solver policy and cached
    partial derivatives up to second order."""

    def __init__(self, s: PolyBall, scan_points: int = 64, max_inflate: int = 8):
        if not s.check_symmetric():
            raise ValueError("generating function must lie in the symmetric "
                             "(reversible) subspace")
        self.s = s
        self.s1 = s.partial(1)
        self.s2 = s.partial(2)
        self.s11 = self.s1.partial(1)
        self.s12 = self.s1.partial(2)
        self.s22 = self.s2.partial(2)
        self.scan_points = scan_points
        self.max_inflate = max_inflate
        self._cmid = s.coeffs_mid

    # -- float fast paths ----------------------------------------------------

    def y_float(self, x, u, y0=None):
        """Non-rigorous y with u + s(y, x) = 0, vectorized; scan + bisection
        seeds Newton when no starting guess is supplied."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if y0 is None:
            y0 = self._scan_seed(x, u)
        y = np.array(np.broadcast_to(y0, np.broadcast(x, u).shape), dtype=float)
        for _ in range(80):
            h = u + self.s.eval_mid(y, x)
            hp = self.s1.eval_mid(y, x)
            step = h / hp
            y -= step
            if np.max(np.abs(step)) < 1e-15:
                break
        return y

    def _scan_seed(self, x, u):
        lo = self.s.center - self.s.valid_rho
        hi = self.s.center + self.s.valid_rho
        ys = np.linspace(lo, hi, self.scan_points + 1)
        shape = np.broadcast(x, u).shape
        h = u[..., None] + self.s.eval_mid(ys, x[..., None])
        sign_flip = (h[..., :-1] * h[..., 1:]) <= 0.0
        first = np.argmax(sign_flip, axis=-1)
        found = np.take_along_axis(sign_flip, first[..., None], axis=-1)[..., 0]
        if not np.all(found):
            raise MapDomainError("no sign change of u + s(y, x) along the y-slice")
        a = ys[first]
        b = ys[first + 1]
        for _ in range(40):  # bisection, vectorized
            mid = 0.5 * (a + b)
            hm = u + self.s.eval_mid(mid, x)
            ha = u + self.s.eval_mid(a, x)
            left = (ha * hm) <= 0.0
            b = np.where(left, mid, b)
            a = np.where(left, a, mid)
        out = 0.5 * (a + b)
        return out.reshape(shape)

    def apply_float(self, pts):
        """Non-rigorous F for (n, 2) arrays of points."""
        pts = np.asarray(pts, dtype=float)
        y = self.y_float(pts[..., 0], pts[..., 1])
        v = self.s.eval_mid(pts[..., 0], y)
        return np.stack([y, v], axis=-1)

    def apply_float_inv(self, pts):
        pts = np.asarray(pts, dtype=float)
        flipped = pts * np.array([1.0, -1.0])
        out = self.apply_float(flipped)
        return out * np.array([1.0, -1.0])

    def df_float(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, u = pts[..., 0], pts[..., 1]
        y = self.y_float(x, u)
        s1yx = self.s1.eval_mid(y, x)
        s2yx = self.s2.eval_mid(y, x)
        s1xy = self.s1.eval_mid(x, y)
        s2xy = self.s2.eval_mid(x, y)
        a = -s2yx / s1yx
        b = -1.0 / s1yx
        c = s1xy - s2xy * s2yx / s1yx
        d = -s2xy / s1yx
        return np.stack([np.stack([a, b], axis=-1),
                         np.stack([c, d], axis=-1)], axis=-2)

    # -- rigorous y-solver -----------------------------------------------------

    def solve_y_batch(self, xlo, xhi, ulo, uhi, y_hint=None):
        """Certified enclosures of the y-branch over boxes (vectorized).

        For each input box, an interval Newton step around a float hint is
        inflated until it contracts: N(Y) strictly inside Y certifies, for
        every (x, u) in the box and every member of the generating-function
        ball, a unique solution of u + s(y, x) = 0 in Y.  Returns
        (ylo, yhi, ok).
        """
        xlo = np.asarray(xlo, dtype=float)
        xhi = np.asarray(xhi, dtype=float)
        ulo = np.asarray(ulo, dtype=float)
        uhi = np.asarray(uhi, dtype=float)
        if y_hint is None:
            y_hint = self.y_float(0.5 * (xlo + xhi), 0.5 * (ulo + uhi))
        y_hint = np.asarray(y_hint, dtype=float)
        shape = y_hint.shape
        ok = np.zeros(shape, dtype=bool)
        ylo = np.array(y_hint, copy=True)
        yhi = np.array(y_hint, copy=True)
        box_w = np.maximum(xhi - xlo, uhi - ulo)
        delta = np.maximum(4.0 * box_w, 1e-12)
        for _ in range(self.max_inflate):
            todo = ~ok
            if not np.any(todo):
                break
            Ylo = y_hint - delta
            Yhi = y_hint + delta
            nlo, nhi, good = self._newton_once(xlo, xhi, ulo, uhi, y_hint, Ylo, Yhi)
            inside = good & (Ylo < nlo) & (nhi < Yhi)
            newly = todo & inside
            ylo = np.where(newly, np.maximum(nlo, Ylo), ylo)
            yhi = np.where(newly, np.minimum(nhi, Yhi), yhi)
            ok = ok | newly
            delta = np.where(todo, delta * 8.0, delta)
        # refine certified enclosures a couple of times
        for _ in range(2):
            mid = 0.5 * (ylo + yhi)
            nlo, nhi, good = self._newton_once(xlo, xhi, ulo, uhi, mid, ylo, yhi)
            better = ok & good & (nlo >= ylo) & (nhi <= yhi)
            ylo = np.where(better, np.maximum(nlo, ylo), ylo)
            yhi = np.where(better, np.minimum(nhi, yhi), yhi)
        return ylo, yhi, ok

    def _newton_once(self, xlo, xhi, ulo, uhi, yhat, Ylo, Yhi):
        limit = self.s.center + self.s.valid_rho
        Ylo_c = np.clip(Ylo, self.s.center - self.s.valid_rho, limit)
        Yhi_c = np.clip(Yhi, self.s.center - self.s.valid_rho, limit)
        try:
            dlo, dhi = self.s1.eval_batch(Ylo_c, Yhi_c, xlo, xhi)
        except Exception:
            return Ylo, Yhi, np.zeros(np.shape(yhat), dtype=bool)
        good = ~((dlo <= 0.0) & (dhi >= 0.0))
        dlo_s = np.where(good, dlo, 1.0)
        dhi_s = np.where(good, dhi, 1.0)
        flo, fhi = self.s.eval_batch(yhat, yhat, xlo, xhi)
        flo, fhi = iv.arr_add(flo, fhi, ulo, uhi)
        qlo, qhi = iv.arr_div(flo, fhi, dlo_s, dhi_s)
        nlo, nhi = iv.arr_sub(yhat, yhat, qhi, qlo)
        nlo, nhi = np.minimum(nlo, nhi), np.maximum(nlo, nhi)
        return nlo, nhi, good

    def solve_y(self, x: Interval, u: Interval, y_hint=None):
        """Scalar rigorous y-solve; returns (Interval, ok)."""
        ylo, yhi, ok = self.solve_y_batch(np.float64(x.lo), np.float64(x.hi),
                                          np.float64(u.lo), np.float64(u.hi),
                                          y_hint=None if y_hint is None
                                          else np.float64(y_hint))
        return Interval(float(ylo), float(yhi)), bool(ok)

    # -- rigorous map ----------------------------------------------------------

    def apply_F_batch(self, xlo, xhi, ulo, uhi, y_hint=None):
        ylo, yhi, ok = self.solve_y_batch(xlo, xhi, ulo, uhi, y_hint)
        if not np.all(ok):
            raise MapDomainError("y-solve failed on some boxes")
        vlo, vhi = self.s.eval_batch(xlo, xhi, ylo, yhi)
        return ylo, yhi, vlo, vhi

    def apply_F(self, p: IVec2) -> IVec2:
        ylo, yhi, vlo, vhi = self.apply_F_batch(
            np.float64(p.x.lo), np.float64(p.x.hi),
            np.float64(p.u.lo), np.float64(p.u.hi))
        return IVec2(Interval(float(ylo), float(yhi)),
                     Interval(float(vlo), float(vhi)))

    def apply_F_inv(self, p: IVec2) -> IVec2:
        q = self.apply_F(IVec2(p.x, -p.u))
        return IVec2(q.x, -q.u)

    def dF_batch(self, xlo, xhi, ulo, uhi, y=None):
        """Interval entries (a, b, c, d) of DF over boxes; y may be passed to
        reuse a certified enclosure."""
        if y is None:
            ylo, yhi, ok = self.solve_y_batch(xlo, xhi, ulo, uhi)
            if not np.all(ok):
                raise MapDomainError("y-solve failed on some boxes")
        else:
            ylo, yhi = y
        s1yx_lo, s1yx_hi = self.s1.eval_batch(ylo, yhi, xlo, xhi)
        if np.any((s1yx_lo <= 0.0) & (s1yx_hi >= 0.0)):
            raise SingularError("s1(y, x) enclosure contains zero")
        s2yx = self.s2.eval_batch(ylo, yhi, xlo, xhi)
        s1xy = self.s1.eval_batch(xlo, xhi, ylo, yhi)
        s2xy = self.s2.eval_batch(xlo, xhi, ylo, yhi)
        alo, ahi = iv.arr_div(*iv.arr_neg(*s2yx), s1yx_lo, s1yx_hi)
        one = np.ones_like(s1yx_lo)
        blo, bhi = iv.arr_div(-one, -one, s1yx_lo, s1yx_hi)
        tlo, thi = iv.arr_mul(*s2xy, alo, ahi)
        clo, chi = iv.arr_add(*s1xy, tlo, thi)
        dlo, dhi = iv.arr_div(*iv.arr_neg(*s2xy), s1yx_lo, s1yx_hi)
        return (alo, ahi, blo, bhi, clo, chi, dlo, dhi), (ylo, yhi)

    def dF(self, p: IVec2) -> IMat2:
        (alo, ahi, blo, bhi, clo, chi, dlo, dhi), _ = self.dF_batch(
            np.float64(p.x.lo), np.float64(p.x.hi),
            np.float64(p.u.lo), np.float64(p.u.hi))
        return IMat2(Interval(float(alo), float(ahi)),
                     Interval(float(blo), float(bhi)),
                     Interval(float(clo), float(chi)),
                     Interval(float(dlo), float(dhi)))

    def apply_iter(self, p: IVec2, k: int) -> IVec2:
        """F^k for k != 0 (negative k through the involution)."""
        if k == 0:
            return p
        if k < 0:
            q = self.apply_iter(IVec2(p.x, -p.u), -k)
            return IVec2(q.x, -q.u)
        q = p
        for _ in range(k):
            q = self.apply_F(q)
        return q

    def d_iter(self, p: IVec2, k: int) -> IMat2:
        """Chain-rule derivative of F^k with intermediate enclosures."""
        if k == 0:
            return IMat2.identity()
        if k < 0:
            # D(F^-k at p) via T o F^k o T
            T = IMat2.of(1.0, 0.0, 0.0, -1.0)
            inner = self.d_iter(IVec2(p.x, -p.u), -k)
            return T.matmul(inner).matmul(T)
        q = p
        M = IMat2.identity()
        for _ in range(k):
            M = self.dF(q).matmul(M)
            q = self.apply_F(q)
        return M

    def apply_G(self, p: IVec2) -> IVec2:
        return self.apply_iter(p, 3)

    def dG(self, p: IVec2) -> IMat2:
        return self.d_iter(p, 3)

    # -- fixed point and domain -------------------------------------------------

    def fixed_point(self, x_guess: float = 0.5776, half_width: float = 5e-4,
                    ) -> FixedPointCert:
        """2D interval Newton on F(p) - p around the symmetry line."""
        def f(p: IVec2) -> IVec2:
            q = self.apply_F(p)
            return q - p

        def df(p: IVec2) -> IMat2:
            return self.dF(p) - IMat2.identity()

        X = IVec2(Interval(x_guess).inflate(half_width),
                  Interval(0.0).inflate(half_width))
        v = newton2_refine(f, df, X)
        if not v.is_unique:
            raise SolveError("interval Newton for the fixed point inconclusive")
        p0 = v.enclosure
        A = self.dF(p0)
        lam1, lam2 = eig2_real(A)
        # order: eig_plus expanding, eig_minus contracting
        if lam1.mag > 1.0 and lam2.mag < 1.0:
            ep, em = lam1, lam2
        else:
            ep, em = lam2, lam1
        evu = self._eigvec(A, ep)
        evs = IVec2(evu.x, -evu.u)  # reversibility: stable = T(unstable)
        return FixedPointCert(p0, ep, em, evu, evs)

    @staticmethod
    def _eigvec(A: IMat2, lam: Interval) -> IVec2:
        # direction (1, t) with (a11 - lam) + a12 t = 0
        t = (lam - A.a11) / A.a12
        n = (Interval(1.0) + t ** 2).sqrt()
        return IVec2(Interval(1.0) / n, t / n)

    def find_domain(self, x_range=(-1.1, 2.1), u_range=(-2.0, 2.0),
                    grid=(64, 64), iterate: int = 1):
        """Boxes certified inside the real slice of the domain of F^iterate.

        Returns (boxes, ok): boxes is an (n, 4) array of rows
        [x_lo, x_hi, u_lo, u_hi]; ok marks which grid cells certified.  Cells
        whose y-solve (at any of the `iterate` steps) fails are excluded.
        """
        nx, nu = grid
        if nx == 0 or nu == 0:
            return np.zeros((0, 4)), np.zeros((0,), dtype=bool)
        xe = np.linspace(*x_range, nx + 1)
        ue = np.linspace(*u_range, nu + 1)
        xlo = np.repeat(xe[:-1], nu)
        xhi = np.repeat(xe[1:], nu)
        ulo = np.tile(ue[:-1], nx)
        uhi = np.tile(ue[1:], nx)
        cells = np.stack([xlo, xhi, ulo, uhi], axis=1)
        ok = np.ones(len(cells), dtype=bool)
        clo, chi_, dlo, dhi = xlo, xhi, ulo, uhi
        for _ in range(iterate):
            with np.errstate(all="ignore"):
                try:
                    ylo, yhi, good = self.solve_y_batch(clo, chi_, dlo, dhi)
                except MapDomainError:
                    good = np.zeros(len(clo), dtype=bool)
                    ylo = yhi = np.zeros(len(clo))
            # seed failures (no float sign change) are handled cellwise
            if not np.all(good):
                for k in np.where(~good)[0]:
                    if not ok[k]:
                        continue
                    try:
                        y, okk = self.solve_y(Interval(clo[k], chi_[k]),
                                              Interval(dlo[k], dhi[k]))
                        good[k] = okk
                        ylo[k], yhi[k] = y.lo, y.hi
                    except Exception:
                        good[k] = False
            ok &= good
            safe = np.where(ok)
            vlo = np.zeros_like(clo)
            vhi = np.zeros_like(clo)
            if len(safe[0]):
                vv = self.s.eval_batch(clo[safe], chi_[safe], ylo[safe], yhi[safe])
                vlo[safe], vhi[safe] = vv
            clo, chi_, dlo, dhi = ylo, yhi, vlo, vhi
            bad_dom = (np.abs(clo - self.s.center) > self.s.valid_rho) | \
                      (np.abs(chi_ - self.s.center) > self.s.valid_rho)
            ok &= ~bad_dom
        return cells[ok], ok

    # -- second-order jets -------------------------------------------------------

    def jet_F(self, xlo, xhi, ulo, uhi, y=None):
        """Second-order jet of F over boxes: a Jet2Map with interval entries.

        Components (y, v) with value, gradient and Hessian, from implicit
        differentiation of u + s(y, x) = 0 and v = s(x, y).
        """
        if y is None:
            ylo, yhi, ok = self.solve_y_batch(xlo, xhi, ulo, uhi)
            if not np.all(ok):
                raise MapDomainError("y-solve failed on some boxes")
        else:
            ylo, yhi = y
        A1 = self.s1.eval_batch(ylo, yhi, xlo, xhi)
        A2 = self.s2.eval_batch(ylo, yhi, xlo, xhi)
        A11 = self.s11.eval_batch(ylo, yhi, xlo, xhi)
        A12 = self.s12.eval_batch(ylo, yhi, xlo, xhi)
        A22 = self.s22.eval_batch(ylo, yhi, xlo, xhi)
        B1 = self.s1.eval_batch(xlo, xhi, ylo, yhi)
        B2 = self.s2.eval_batch(xlo, xhi, ylo, yhi)
        B11 = self.s11.eval_batch(xlo, xhi, ylo, yhi)
        B12 = self.s12.eval_batch(xlo, xhi, ylo, yhi)
        B22 = self.s22.eval_batch(xlo, xhi, ylo, yhi)
        J = _JetArithmetic()
        a1, a2 = A1, A2
        yx = J.neg(J.div(a2, a1))
        yu = J.neg(J.div(J.one_like(a1), a1))
        # d/dx s2(y,x) = A12 yx + A22 ; d/du s2(y,x) = A12 yu  (s21 = s12)
        da2x = J.add(J.mul(A12, yx), A22)
        da2u = J.mul(A12, yu)
        da1x = J.add(J.mul(A11, yx), A12)
        da1u = J.mul(A11, yu)
        a1sq = J.mul(a1, a1)
        yxx = J.neg(J.div(J.sub(J.mul(da2x, a1), J.mul(a2, da1x)), a1sq))
        yxu = J.neg(J.div(J.sub(J.mul(da2u, a1), J.mul(a2, da1u)), a1sq))
        yuu = J.div(J.mul(da1u, yu), a1)  # d/du (-1/a1) = da1u/a1^2 * ... see below
        # careful: yu = -1/a1, d yu/du = (da1u)/a1^2 = -yu * da1u / a1
        yuu = J.neg(J.div(J.mul(yu, da1u), a1))
        vx = J.add(B1, J.mul(B2, yx))
        vu = J.mul(B2, yu)
        vxx = J.add(J.add(B11, J.mul(J.two(), J.mul(B12, yx))),
                    J.add(J.mul(B22, J.mul(yx, yx)), J.mul(B2, yxx)))
        vxu = J.add(J.add(J.mul(B12, yu), J.mul(B22, J.mul(yx, yu))),
                    J.mul(B2, yxu))
        vuu = J.add(J.mul(B22, J.mul(yu, yu)), J.mul(B2, yuu))
        vlo, vhi = self.s.eval_batch(xlo, xhi, ylo, yhi)
        return Jet2Map(
            val=((ylo, yhi), (vlo, vhi)),
            d1=((yx, yu), (vx, vu)),
            d2=(((yxx, yxu), (yxu, yuu)), ((vxx, vxu), (vxu, vuu))),
        )


class _JetArithmetic:
    """Tiny helpers for (lo, hi) pair arithmetic in jet formulas."""

    @staticmethod
    def add(a, b):
        return iv.arr_add(a[0], a[1], b[0], b[1])

    @staticmethod
    def sub(a, b):
        return iv.arr_sub(a[0], a[1], b[0], b[1])

    @staticmethod
    def mul(a, b):
        return iv.arr_mul(a[0], a[1], b[0], b[1])

    @staticmethod
    def div(a, b):
        return iv.arr_div(a[0], a[1], b[0], b[1])

    @staticmethod
    def neg(a):
        return iv.arr_neg(a[0], a[1])

    @staticmethod
    def one_like(a):
        o = np.ones_like(a[0])
        return (o, o.copy())

    @staticmethod
    def two():
        return (np.float64(2.0), np.float64(2.0))


@dataclass
class Jet2Map:
    """Second-order jet of a planar map over (batched) boxes.

    val: ((ylo,yhi), (vlo,vhi)) component enclosures;
    d1:  component gradients d1[k][j] = d(component k)/d(arg j);
    d2:  component Hessians d2[k][i][j].
    """

    val: tuple
    d1: tuple
    d2: tuple

    def compose(self, outer: "Jet2Map") -> "Jet2Map":
        """Jet of (outer o self); outer must be evaluated at self.val."""
        J = _JetArithmetic()
        f1 = self.d1
        f2 = self.d2
        g1 = outer.d1
        g2 = outer.d2
        d1 = []
        for k in range(2):
            row = []
            for j in range(2):
                acc = J.mul(g1[k][0], f1[0][j])
                acc = J.add(acc, J.mul(g1[k][1], f1[1][j]))
                row.append(acc)
            d1.append(tuple(row))
        d2 = []
        for k in range(2):
            rows = []
            for i in range(2):
                cols = []
                for j in range(2):
                    acc = None
                    for m in range(2):
                        for n in range(2):
                            t = J.mul(g2[k][m][n], J.mul(f1[m][i], f1[n][j]))
                            acc = t if acc is None else J.add(acc, t)
                    for m in range(2):
                        t = J.mul(g1[k][m], f2[m][i][j])
                        acc = J.add(acc, t)
                    cols.append(acc)
                rows.append(tuple(cols))
            d2.append(tuple(rows))
        return Jet2Map(val=outer.val, d1=tuple(d1), d2=tuple(d2))
