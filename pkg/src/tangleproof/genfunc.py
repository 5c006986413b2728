"""Generating functions as polynomial balls.

A generating function s lives in the space of functions analytic on the
bidisk |x - center| <= rho, |y - center| <= rho (center 0.5, rho 1.6) with
finite weighted-l1 norm.  We store coefficients against the shifted-scaled
monomials

    X^i Y^j,   X = (x - center)/rho,  Y = (y - center)/rho,

so that the norm reduces to sum_ij |c_ij| (+ ball radius) and dominates the
sup norm on the bidisk.  A :class:`PolyBall` is the polynomial part plus a
remainder radius ``ball``: every analytic g with ||g - p|| <= ball is a
member, and every evaluation encloses every member's value.

Derivatives of the ball part cost a Cauchy estimate: ``partial`` shrinks the
validity radius by 15/16 and inflates the ball by 16/valid_rho.  Polynomials
with ball 0 differentiate exactly and keep their full domain.
"""

from __future__ import annotations

import io
import math

import numpy as np

from . import interval as iv
from .errors import DomainError, NumericalError
from .interval import Interval

DEFAULT_RHO = 1.6
DEFAULT_CENTER = 0.5
# Cauchy estimate parameters for ball derivatives
_SHRINK = 15.0 / 16.0


class PolyBall:
    """Bivariate polynomial with interval coefficients plus a norm-ball
    remainder, in the shifted-scaled monomial basis."""

    __slots__ = ("clo", "chi", "rho", "center", "valid_rho", "ball", "degree")

    def __init__(self, clo, chi, rho=DEFAULT_RHO, center=DEFAULT_CENTER,
                 ball=0.0, valid_rho=None, degree=None):
        clo = np.asarray(clo, dtype=float)
        chi = np.asarray(chi, dtype=float)
        if clo.shape != chi.shape or clo.ndim != 2 or clo.shape[0] != clo.shape[1]:
            raise ValueError("coefficient arrays must be square and congruent")
        if np.any(clo > chi):
            raise NumericalError("coefficient lower bounds exceed upper bounds")
        if not (rho > 0.0 and ball >= 0.0):
            raise ValueError("need rho > 0 and ball >= 0")
        self.clo = clo
        self.chi = chi
        self.rho = float(rho)
        self.center = float(center)
        self.valid_rho = float(valid_rho) if valid_rho is not None else float(rho)
        self.ball = float(ball)
        self.degree = int(degree) if degree is not None else clo.shape[0] - 1
        if self.valid_rho > self.rho:
            raise ValueError("valid_rho cannot exceed rho")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zeros(degree, rho=DEFAULT_RHO, center=DEFAULT_CENTER) -> "PolyBall":
        n = degree + 1
        return PolyBall(np.zeros((n, n)), np.zeros((n, n)), rho, center)

    @staticmethod
    def from_point_coeffs(c, rho=DEFAULT_RHO, center=DEFAULT_CENTER,
                          ball=0.0) -> "PolyBall":
        c = np.asarray(c, dtype=float)
        return PolyBall(c.copy(), c.copy(), rho, center, ball=ball)

    @staticmethod
    def monomial(i, j, coeff=1.0, degree=None, rho=DEFAULT_RHO,
                 center=DEFAULT_CENTER) -> "PolyBall":
        d = degree if degree is not None else max(i, j)
        pb = PolyBall.zeros(d, rho, center)
        pb.clo[i, j] = pb.chi[i, j] = float(coeff)
        return pb

    def copy(self) -> "PolyBall":
        return PolyBall(self.clo.copy(), self.chi.copy(), self.rho, self.center,
                        self.ball, self.valid_rho, self.degree)

    def coeff(self, i, j) -> Interval:
        return Interval(self.clo[i, j], self.chi[i, j])

    @property
    def coeffs_mid(self):
        return 0.5 * (self.clo + self.chi)

    # -- evaluation ----------------------------------------------------------

    def _sigma(self, tlo, thi):
        lo, hi = iv.arr_sub(tlo, thi, np.float64(self.center), np.float64(self.center))
        return iv.arr_div(lo, hi, np.float64(self.rho), np.float64(self.rho))

    def _check_domain(self, tlo, thi):
        slack = 4.0 * math.ulp(self.valid_rho)
        bad = (np.asarray(tlo) < self.center - self.valid_rho - slack) | \
              (np.asarray(thi) > self.center + self.valid_rho + slack)
        if np.any(bad):
            raise DomainError("argument outside the valid bidisk "
                              f"(|t - {self.center}| <= {self.valid_rho})")

    def eval_batch(self, xlo, xhi, ylo, yhi, with_ball=True):
        """Interval Horner evaluation over arrays of interval arguments."""
        xlo = np.asarray(xlo, dtype=float)
        xhi = np.asarray(xhi, dtype=float)
        ylo = np.asarray(ylo, dtype=float)
        yhi = np.asarray(yhi, dtype=float)
        self._check_domain(xlo, xhi)
        self._check_domain(ylo, yhi)
        Xlo, Xhi = self._sigma(xlo, xhi)
        Ylo, Yhi = self._sigma(ylo, yhi)
        shape = np.broadcast(Xlo, Ylo).shape
        rlo = np.zeros(shape)
        rhi = np.zeros(shape)
        N = self.degree
        for i in range(N, -1, -1):
            # row_i(Y) = sum_j c[i, j] Y^j, Horner over j
            jmax = N - i
            wlo = np.full(shape, self.clo[i, jmax])
            whi = np.full(shape, self.chi[i, jmax])
            for j in range(jmax - 1, -1, -1):
                wlo, whi = iv.arr_mul(wlo, whi, Ylo, Yhi)
                wlo, whi = iv.arr_add(wlo, whi, np.float64(self.clo[i, j]),
                                      np.float64(self.chi[i, j]))
            rlo, rhi = iv.arr_mul(rlo, rhi, Xlo, Xhi)
            rlo, rhi = iv.arr_add(rlo, rhi, wlo, whi)
        if with_ball and self.ball > 0.0:
            rlo, rhi = iv.arr_add(rlo, rhi, np.float64(-self.ball),
                                  np.float64(self.ball))
        if not (np.all(np.isfinite(rlo)) and np.all(np.isfinite(rhi))):
            raise NumericalError("non-finite polynomial evaluation")
        return rlo, rhi

    def eval(self, x, y, with_ball=True) -> Interval:
        x = Interval._coerce(x)
        y = Interval._coerce(y)
        lo, hi = self.eval_batch(np.float64(x.lo), np.float64(x.hi),
                                 np.float64(y.lo), np.float64(y.hi),
                                 with_ball=with_ball)
        return Interval(float(lo), float(hi))

    def eval_mid(self, x, y):
        """Fast non-rigorous evaluation of the midpoint polynomial."""
        X = (np.asarray(x, dtype=float) - self.center) / self.rho
        Y = (np.asarray(y, dtype=float) - self.center) / self.rho
        c = self.coeffs_mid
        N = self.degree
        res = np.zeros(np.broadcast(X, Y).shape)
        for i in range(N, -1, -1):
            row = np.full(res.shape, c[i, N - i])
            for j in range(N - i - 1, -1, -1):
                row = row * Y + c[i, j]
            res = res * X + row
        return res

    # -- calculus ------------------------------------------------------------

    def partial(self, which: int) -> "PolyBall":
        """Formal partial derivative (which = 1 or 2).

        The ball part follows a Cauchy estimate: valid on a bidisk shrunk by
        15/16 with the radius inflated by 16/valid_rho.  Point polynomials
        (ball 0) keep their full domain.
        """
        if which not in (1, 2):
            raise ValueError("which must be 1 or 2")
        n = self.degree + 1
        clo = np.zeros((n, n))
        chi = np.zeros((n, n))
        rho_iv = Interval(self.rho)
        for i in range(n):
            for j in range(n - i):
                if which == 1 and i + 1 < n and (self.clo[i + 1, j] or self.chi[i + 1, j]):
                    c = Interval(self.clo[i + 1, j], self.chi[i + 1, j]) * (i + 1) / rho_iv
                    clo[i, j], chi[i, j] = c.lo, c.hi
                if which == 2 and j + 1 < n and (self.clo[i, j + 1] or self.chi[i, j + 1]):
                    c = Interval(self.clo[i, j + 1], self.chi[i, j + 1]) * (j + 1) / rho_iv
                    clo[i, j], chi[i, j] = c.lo, c.hi
        if self.ball > 0.0:
            new_ball = iv.mul_up(self.ball, iv.div_up(16.0, self.valid_rho))
            new_valid = iv.mul_down(self.valid_rho, _SHRINK)
        else:
            new_ball, new_valid = 0.0, self.valid_rho
        return PolyBall(clo, chi, self.rho, self.center, ball=new_ball,
                        valid_rho=new_valid, degree=max(self.degree - 1, 0))

    def norm(self) -> Interval:
        """The weighted-l1 norm: sum |c_ij| plus the ball radius."""
        lo, hi = 0.0, 0.0
        n = self.degree + 1
        for i in range(n):
            for j in range(n - i):
                a = self.coeff(i, j).abs()
                lo = iv.add_down(lo, a.lo)
                hi = iv.add_up(hi, a.hi)
        hi = iv.add_up(hi, self.ball)
        return Interval(max(lo, 0.0), hi)

    def check_symmetric(self) -> bool:
        """True iff (i+1) c[i+1,j] overlaps (j+1) c[j+1,i] for all i, j,
        the coefficient form of d1 s(x,y) = d1 s(y,x)."""
        n = self.degree + 1
        for i in range(n):
            for j in range(n):
                a = self.coeff(i + 1, j) * (i + 1) if i + 1 < n and j <= self.degree - i - 1 else Interval(0.0)
                b = self.coeff(j + 1, i) * (j + 1) if j + 1 < n and i <= self.degree - j - 1 else Interval(0.0)
                if not a.intersects(b):
                    return False
        return True

    def inflate(self, r: float) -> "PolyBall":
        if r < 0.0:
            raise ValueError("inflation radius must be nonnegative")
        out = self.copy()
        out.ball = iv.add_up(out.ball, r)
        return out

    # -- range helpers -------------------------------------------------------

    def sup_abs(self, subdivision: int = 16) -> float:
        """Upper bound of sup |s| over the valid bidisk (members included)."""
        lo, hi = self.range_on_bidisk(subdivision)
        return max(abs(lo), abs(hi))

    def range_on_bidisk(self, subdivision: int = 16):
        """Rigorous (lo, hi) bounds of the range over the valid bidisk."""
        edges = np.linspace(self.center - self.valid_rho,
                            self.center + self.valid_rho, subdivision + 1)
        xlo = np.repeat(edges[:-1], subdivision)
        xhi = np.repeat(edges[1:], subdivision)
        ylo = np.tile(edges[:-1], subdivision)
        yhi = np.tile(edges[1:], subdivision)
        rlo, rhi = self.eval_batch(xlo, xhi, ylo, yhi)
        return float(rlo.min()), float(rhi.max())

    # -- serialization -------------------------------------------------------

    def to_text(self) -> str:
        out = io.StringIO()
        out.write("tangleproof-polyball v1\n")
        out.write(f"degree {self.degree}\n")
        out.write(f"rho {self.rho.hex()}\n")
        out.write(f"center {self.center.hex()}\n")
        out.write(f"valid_rho {self.valid_rho.hex()}\n")
        out.write(f"ball {self.ball.hex()}\n")
        n = self.degree + 1
        for i in range(n):
            for j in range(n - i):
                if self.clo[i, j] or self.chi[i, j]:
                    out.write(f"{i} {j} {self.clo[i, j].hex()} {self.chi[i, j].hex()}\n")
        return out.getvalue()

    @staticmethod
    def from_text(text: str) -> "PolyBall":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("tangleproof-polyball"):
            raise ValueError("not a polyball file")
        header = {}
        body_at = 1
        for ln in lines[1:]:
            key = ln.split()[0]
            if key in ("degree", "rho", "center", "valid_rho", "ball"):
                header[key] = ln.split()[1]
                body_at += 1
            else:
                break
        degree = int(header["degree"])
        n = degree + 1
        clo = np.zeros((n, n))
        chi = np.zeros((n, n))
        for ln in lines[body_at:]:
            i_s, j_s, lo_s, hi_s = ln.split()
            clo[int(i_s), int(j_s)] = float.fromhex(lo_s)
            chi[int(i_s), int(j_s)] = float.fromhex(hi_s)
        return PolyBall(clo, chi,
                        rho=float.fromhex(header["rho"]),
                        center=float.fromhex(header["center"]),
                        ball=float.fromhex(header["ball"]),
                        valid_rho=float.fromhex(header["valid_rho"]),
                        degree=degree)

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_text())

    @staticmethod
    def load(path) -> "PolyBall":
        with open(path) as f:
            return PolyBall.from_text(f.read())

    def __repr__(self):
        return (f"PolyBall(degree={self.degree}, rho={self.rho}, "
                f"center={self.center}, ball={self.ball:.3e})")


def eval_pb(s: PolyBall, x, y) -> Interval:
    """Module-level alias for PolyBall.eval."""
    return s.eval(x, y)
