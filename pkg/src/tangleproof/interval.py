"""Outward-rounded interval arithmetic on IEEE doubles.

Every operation returns an interval that contains the exact real-arithmetic
image of its operands.  Directed rounding is realized portably, without
touching the FPU rounding mode:

* addition/subtraction use Knuth's two-sum to recover the exact rounding
  error, so an endpoint is nudged by one ulp only when the rounded result
  actually lies on the wrong side (exact sums stay exact);
* multiplication uses a Veltkamp/Dekker split for the same purpose;
* division, sqrt, log, exp nudge unconditionally (one ulp for the correctly
  rounded operations, two for libm's log/exp).

The module provides a scalar :class:`Interval`, 2D vector/matrix wrappers
(:class:`IVec2`, :class:`IMat2`), the interval Newton operator in one and two
dimensions, and batched kernels (``arr_*``) operating on ``(lo, hi)`` pairs of
numpy arrays for the hot paths (polynomial evaluation over many boxes at
once).  All values are immutable; every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalError, SingularError

_INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp splitting constant
# below this magnitude the Dekker product error term may itself round;
# fall back to an unconditional nudge
_TINY = 1e-290


# ---------------------------------------------------------------------------
# scalar directed-rounding primitives
# ---------------------------------------------------------------------------

def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a: float):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def add_down(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    return math.nextafter(s, -_INF) if e < 0.0 else s


def add_up(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    return math.nextafter(s, _INF) if e > 0.0 else s


def mul_down(a: float, b: float) -> float:
    p = a * b
    if abs(p) < _TINY:
        return p if (a == 0.0 or b == 0.0) else math.nextafter(p, -_INF)
    _, e = _two_prod(a, b)
    return math.nextafter(p, -_INF) if e < 0.0 else p


def mul_up(a: float, b: float) -> float:
    p = a * b
    if abs(p) < _TINY:
        return p if (a == 0.0 or b == 0.0) else math.nextafter(p, _INF)
    _, e = _two_prod(a, b)
    return math.nextafter(p, _INF) if e > 0.0 else p


def _div_residual(a: float, b: float, q: float):
    """Sign of the exact residual a - q*b, or None when not computable exactly
    (magnitude guards fail).  q = fl(a/b) implies fl(q*b) is within a factor
    (1 +- 3 eps) of a, so the subtraction a - fl(q*b) is exact by Sterbenz."""
    p, e = _two_prod(q, b)
    if not math.isfinite(p) or abs(p) < _TINY or abs(a) < _TINY:
        return None
    return (a - p) - e


def div_down(a: float, b: float) -> float:
    q = a / b
    if not math.isfinite(q) or abs(q) < _TINY:
        return math.nextafter(q, -_INF)
    r = _div_residual(a, b, q)
    if r is None:
        return math.nextafter(q, -_INF)
    # true quotient = q + r/b
    return q if (r == 0.0 or (r > 0.0) == (b > 0.0)) else math.nextafter(q, -_INF)


def div_up(a: float, b: float) -> float:
    q = a / b
    if not math.isfinite(q) or abs(q) < _TINY:
        return math.nextafter(q, _INF)
    r = _div_residual(a, b, q)
    if r is None:
        return math.nextafter(q, _INF)
    return q if (r == 0.0 or (r > 0.0) != (b > 0.0)) else math.nextafter(q, _INF)


def sqrt_down(a: float) -> float:
    return math.nextafter(math.sqrt(a), -_INF) if a > 0.0 else 0.0


def sqrt_up(a: float) -> float:
    return math.nextafter(math.sqrt(a), _INF) if a > 0.0 else 0.0


def _nudge2(x: float, direction: float) -> float:
    return math.nextafter(math.nextafter(x, direction), direction)


def _pow_mag_down(x: float, n: int) -> float:
    """Lower bound on x**n for x >= 0, by square-and-multiply rounded down."""
    r, base = 1.0, x
    while n:
        if n & 1:
            r = mul_down(r, base)
        n >>= 1
        if n:
            base = mul_down(base, base)
    return r


def _pow_mag_up(x: float, n: int) -> float:
    r, base = 1.0, x
    while n:
        if n & 1:
            r = mul_up(r, base)
        n >>= 1
        if n:
            base = mul_up(base, base)
    return r


# ---------------------------------------------------------------------------
# scalar intervals
# ---------------------------------------------------------------------------

class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo, hi = float(lo), float(hi)
        if not (lo <= hi):  # also rejects NaN
            raise NumericalError(f"invalid interval endpoints [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, *a):
        raise AttributeError("Interval is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(v) -> "Interval":
        return Interval(float(v))

    @staticmethod
    def from_decimal(text: str) -> "Interval":
        """Enclosure of a decimal literal (one ulp each side unless exact)."""
        v = float(text)
        return Interval(math.nextafter(v, -_INF), math.nextafter(v, _INF))

    @staticmethod
    def hull_of(*items) -> "Interval":
        its = [it if isinstance(it, Interval) else Interval(float(it)) for it in items]
        return Interval(min(i.lo for i in its), max(i.hi for i in its))

    # -- queries -----------------------------------------------------------

    @property
    def mid(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def width(self) -> float:
        return add_up(self.hi, -self.lo)

    @property
    def mag(self) -> float:
        """max |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        """min |x| over the interval."""
        if self.lo > 0.0:
            return self.lo
        if self.hi < 0.0:
            return -self.hi
        return 0.0

    def contains(self, v) -> bool:
        if isinstance(v, Interval):
            return self.lo <= v.lo and v.hi <= self.hi
        return self.lo <= v <= self.hi

    __contains__ = contains

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def inside(self, other: "Interval") -> bool:
        """Strict subset of the interior of `other`."""
        return other.lo < self.lo and self.hi < other.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Interval"):
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def inflate(self, r: float) -> "Interval":
        return Interval(add_down(self.lo, -r), add_up(self.hi, r))

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(v):
        return v if isinstance(v, Interval) else Interval(float(v))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        o = Interval._coerce(other)
        return Interval(add_down(self.lo, o.lo), add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = Interval._coerce(other)
        return Interval(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))

    def __rsub__(self, other):
        return Interval._coerce(other) - self

    def __mul__(self, other):
        o = Interval._coerce(other)
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        lo = min(mul_down(a, c), mul_down(a, d), mul_down(b, c), mul_down(b, d))
        hi = max(mul_up(a, c), mul_up(a, d), mul_up(b, c), mul_up(b, d))
        return Interval(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Interval._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise DomainError(f"division by interval containing zero: {o}")
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        lo = min(div_down(a, c), div_down(a, d), div_down(b, c), div_down(b, d))
        hi = max(div_up(a, c), div_up(a, d), div_up(b, c), div_up(b, d))
        return Interval(lo, hi)

    def recip(self) -> "Interval":
        return Interval(1.0) / self

    def __rtruediv__(self, other):
        return Interval._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise DomainError("interval power requires a non-negative integer exponent")
        if n == 0:
            return Interval(1.0, 1.0)
        if n % 2 == 0:
            return Interval(_pow_mag_down(self.mig, n), _pow_mag_up(self.mag, n))
        lo = -_pow_mag_up(-self.lo, n) if self.lo < 0.0 else _pow_mag_down(self.lo, n)
        hi = -_pow_mag_down(-self.hi, n) if self.hi < 0.0 else _pow_mag_up(self.hi, n)
        return Interval(lo, hi)

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise DomainError(f"sqrt of interval with negative part: {self}")
        return Interval(sqrt_down(self.lo), sqrt_up(self.hi))

    def abs(self) -> "Interval":
        return Interval(self.mig, self.mag)

    def exp(self) -> "Interval":
        # libm exp is faithful to < 1 ulp; two ulps of slack are sound
        return Interval(_nudge2(math.exp(self.lo), -_INF), _nudge2(math.exp(self.hi), _INF))

    def log(self) -> "Interval":
        if self.lo <= 0.0:
            raise DomainError(f"log of interval reaching 0: {self}")
        return Interval(_nudge2(math.log(self.lo), -_INF), _nudge2(math.log(self.hi), _INF))

    # -- misc ----------------------------------------------------------------

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    def __eq__(self, other):
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))


def arith(op: str, a: Interval, b: Interval) -> Interval:
    """Named dispatch for the basic operations (add/sub/mul/div/pow)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow":
        if not (b.lo == b.hi and float(b.lo).is_integer()):
            raise DomainError("pow exponent must be a point integer interval")
        return a ** int(b.lo)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# batched kernels: intervals as (lo, hi) ndarray pairs
# ---------------------------------------------------------------------------

def _arr_two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _arr_two_prod(a, b):
    p = a * b
    c = _SPLITTER * a
    ahi = c - (c - a)
    alo = a - ahi
    c = _SPLITTER * b
    bhi = c - (c - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def _arr_add_down(a, b):
    s, e = _arr_two_sum(a, b)
    return np.where(e < 0.0, np.nextafter(s, -np.inf), s)


def _arr_add_up(a, b):
    s, e = _arr_two_sum(a, b)
    return np.where(e > 0.0, np.nextafter(s, np.inf), s)


def _arr_mul_down(a, b):
    p, e = _arr_two_prod(a, b)
    exact_zero = (a == 0.0) | (b == 0.0)
    bad = ((e < 0.0) | (np.abs(p) < _TINY)) & ~exact_zero
    return np.where(bad, np.nextafter(p, -np.inf), p)


def _arr_mul_up(a, b):
    p, e = _arr_two_prod(a, b)
    exact_zero = (a == 0.0) | (b == 0.0)
    bad = ((e > 0.0) | (np.abs(p) < _TINY)) & ~exact_zero
    return np.where(bad, np.nextafter(p, np.inf), p)


def arr_add(alo, ahi, blo, bhi):
    return _arr_add_down(alo, blo), _arr_add_up(ahi, bhi)


def arr_neg(alo, ahi):
    return -ahi, -alo


def arr_sub(alo, ahi, blo, bhi):
    return _arr_add_down(alo, -bhi), _arr_add_up(ahi, -blo)


def arr_mul(alo, ahi, blo, bhi):
    p1d = _arr_mul_down(alo, blo)
    p2d = _arr_mul_down(alo, bhi)
    p3d = _arr_mul_down(ahi, blo)
    p4d = _arr_mul_down(ahi, bhi)
    p1u = _arr_mul_up(alo, blo)
    p2u = _arr_mul_up(alo, bhi)
    p3u = _arr_mul_up(ahi, blo)
    p4u = _arr_mul_up(ahi, bhi)
    lo = np.minimum(np.minimum(p1d, p2d), np.minimum(p3d, p4d))
    hi = np.maximum(np.maximum(p1u, p2u), np.maximum(p3u, p4u))
    return lo, hi


def _arr_div_down(a, b):
    q = a / b
    p, e = _arr_two_prod(q, b)
    r = (a - p) - e
    guard = ~np.isfinite(q) | (np.abs(q) < _TINY) | (np.abs(p) < _TINY) | (np.abs(a) < _TINY)
    keep = (r == 0.0) | ((r > 0.0) == (b > 0.0))
    return np.where(~guard & keep, q, np.nextafter(q, -np.inf))


def _arr_div_up(a, b):
    q = a / b
    p, e = _arr_two_prod(q, b)
    r = (a - p) - e
    guard = ~np.isfinite(q) | (np.abs(q) < _TINY) | (np.abs(p) < _TINY) | (np.abs(a) < _TINY)
    keep = (r == 0.0) | ((r > 0.0) != (b > 0.0))
    return np.where(~guard & keep, q, np.nextafter(q, np.inf))


def arr_div(alo, ahi, blo, bhi):
    if np.any((blo <= 0.0) & (bhi >= 0.0)):
        raise DomainError("batched division by interval containing zero")
    q1d = _arr_div_down(alo, blo)
    q2d = _arr_div_down(alo, bhi)
    q3d = _arr_div_down(ahi, blo)
    q4d = _arr_div_down(ahi, bhi)
    q1u = _arr_div_up(alo, blo)
    q2u = _arr_div_up(alo, bhi)
    q3u = _arr_div_up(ahi, blo)
    q4u = _arr_div_up(ahi, bhi)
    lo = np.minimum(np.minimum(q1d, q2d), np.minimum(q3d, q4d))
    hi = np.maximum(np.maximum(q1u, q2u), np.maximum(q3u, q4u))
    return lo, hi


def arr_abs(alo, ahi):
    lo = np.where(alo > 0.0, alo, np.where(ahi < 0.0, -ahi, 0.0))
    hi = np.maximum(np.abs(alo), np.abs(ahi))
    return lo, hi


def arr_sqrt(alo, ahi):
    if np.any(alo < 0.0):
        raise DomainError("batched sqrt of interval with negative part")
    lo = np.where(alo > 0.0, np.nextafter(np.sqrt(alo), -np.inf), 0.0)
    hi = np.where(ahi > 0.0, np.nextafter(np.sqrt(ahi), np.inf), 0.0)
    return np.maximum(lo, 0.0), hi


def arr_sqr(alo, ahi):
    mig_lo = np.where(alo > 0.0, alo, np.where(ahi < 0.0, -ahi, 0.0))
    mag_hi = np.maximum(np.abs(alo), np.abs(ahi))
    return _arr_mul_down(mig_lo, mig_lo), _arr_mul_up(mag_hi, mag_hi)


def arr_hull(alo, ahi, blo, bhi):
    return np.minimum(alo, blo), np.maximum(ahi, bhi)


def arr_contains_point(alo, ahi, v):
    return (alo <= v) & (v <= ahi)


# ---------------------------------------------------------------------------
# 2D vectors and matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IVec2:
    """Interval vector (x, u) in the phase plane."""

    x: Interval
    u: Interval

    @staticmethod
    def of(x, u) -> "IVec2":
        return IVec2(Interval._coerce(x), Interval._coerce(u))

    def __add__(self, other: "IVec2") -> "IVec2":
        return IVec2(self.x + other.x, self.u + other.u)

    def __sub__(self, other: "IVec2") -> "IVec2":
        return IVec2(self.x - other.x, self.u - other.u)

    def __neg__(self) -> "IVec2":
        return IVec2(-self.x, -self.u)

    def scale(self, c) -> "IVec2":
        return IVec2(self.x * c, self.u * c)

    def dot(self, other: "IVec2") -> Interval:
        return self.x * other.x + self.u * other.u

    def norm(self) -> Interval:
        return (self.x ** 2 + self.u ** 2).sqrt()

    def contains(self, other: "IVec2") -> bool:
        return other.x.subset_of(self.x) and other.u.subset_of(self.u)

    def inside(self, other: "IVec2") -> bool:
        return self.x.inside(other.x) and self.u.inside(other.u)

    def intersects(self, other: "IVec2") -> bool:
        return self.x.intersects(other.x) and self.u.intersects(other.u)

    def hull(self, other: "IVec2") -> "IVec2":
        return IVec2(self.x.hull(other.x), self.u.hull(other.u))

    def inflate(self, r: float) -> "IVec2":
        return IVec2(self.x.inflate(r), self.u.inflate(r))

    @property
    def mid(self):
        return (self.x.mid, self.u.mid)


@dataclass(frozen=True)
class IMat2:
    """2x2 interval matrix [[a11, a12], [a21, a22]]."""

    a11: Interval
    a12: Interval
    a21: Interval
    a22: Interval

    @staticmethod
    def of(a11, a12, a21, a22) -> "IMat2":
        c = Interval._coerce
        return IMat2(c(a11), c(a12), c(a21), c(a22))

    @staticmethod
    def identity() -> "IMat2":
        return IMat2.of(1.0, 0.0, 0.0, 1.0)

    def matvec(self, v: IVec2) -> IVec2:
        return IVec2(self.a11 * v.x + self.a12 * v.u,
                     self.a21 * v.x + self.a22 * v.u)

    def matmul(self, o: "IMat2") -> "IMat2":
        return IMat2(self.a11 * o.a11 + self.a12 * o.a21,
                     self.a11 * o.a12 + self.a12 * o.a22,
                     self.a21 * o.a11 + self.a22 * o.a21,
                     self.a21 * o.a12 + self.a22 * o.a22)

    def det(self) -> Interval:
        return self.a11 * self.a22 - self.a12 * self.a21

    def trace(self) -> Interval:
        return self.a11 + self.a22

    def transpose(self) -> "IMat2":
        return IMat2(self.a11, self.a21, self.a12, self.a22)

    def __sub__(self, o: "IMat2") -> "IMat2":
        return IMat2(self.a11 - o.a11, self.a12 - o.a12,
                     self.a21 - o.a21, self.a22 - o.a22)

    def __add__(self, o: "IMat2") -> "IMat2":
        return IMat2(self.a11 + o.a11, self.a12 + o.a12,
                     self.a21 + o.a21, self.a22 + o.a22)

    def inverse(self) -> "IMat2":
        d = self.det()
        if 0.0 in d:
            raise SingularError(f"interval determinant contains zero: {d}")
        return IMat2(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)

    def norm_bound(self) -> float:
        """Upper bound on the operator sup-norm (max row sum of magnitudes)."""
        r1 = add_up(self.a11.mag, self.a12.mag)
        r2 = add_up(self.a21.mag, self.a22.mag)
        return max(r1, r2)


def mat2_solve(A: IMat2, b: IVec2) -> IVec2:
    """Enclosure of A^{-1} b via Cramer's rule; requires 0 not in det(A)."""
    d = A.det()
    if 0.0 in d:
        raise SingularError(f"interval determinant contains zero: {d}")
    return IVec2((b.x * A.a22 - b.u * A.a12) / d,
                 (A.a11 * b.u - A.a21 * b.x) / d)


def eig2_real(A: IMat2):
    """Disjoint enclosures of the two real eigenvalues of every member matrix.

    Uses the interval quadratic formula on the characteristic polynomial;
    raises SolveError when the discriminant enclosure is not strictly positive
    (complex or borderline eigenvalues) or the enclosures overlap.
    """
    from .errors import SolveError

    tr, det = A.trace(), A.det()
    disc = tr ** 2 - det * 4.0
    if disc.lo <= 0.0:
        raise SolveError(f"discriminant enclosure not positive: {disc}")
    rt = disc.sqrt()
    half = Interval(0.5)
    lam1 = (tr - rt) * half
    lam2 = (tr + rt) * half
    if lam1.intersects(lam2):
        raise SolveError("eigenvalue enclosures overlap; matrix too wide")
    return lam1, lam2


# ---------------------------------------------------------------------------
# interval Newton operator
# ---------------------------------------------------------------------------

class VerdictKind(Enum):
    UNIQUE_ROOT = "unique_root"
    NO_ROOT = "no_root"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class NewtonVerdict:
    kind: VerdictKind
    enclosure: Interval | None = None

    @property
    def is_unique(self) -> bool:
        return self.kind is VerdictKind.UNIQUE_ROOT


def newton_step(f: Callable[[Interval], Interval],
                df: Callable[[Interval], Interval],
                X: Interval, xhat: float) -> NewtonVerdict:
    """One step of the interval Newton operator N = xhat - f(xhat)/df(X).

    N inside int(X)  ->  unique root, enclosed in N (intersected with X);
    N disjoint from X -> no root in X; otherwise inconclusive.
    """
    if not (X.lo <= xhat <= X.hi):
        raise DomainError("xhat must lie in X")
    fX = f(X)
    if not (math.isfinite(fX.lo) and math.isfinite(fX.hi)):
        raise NumericalError("non-finite evaluation in newton_step")
    if 0.0 not in fX:
        return NewtonVerdict(VerdictKind.NO_ROOT)
    dfx = df(X)
    if 0.0 in dfx:
        return NewtonVerdict(VerdictKind.INCONCLUSIVE)
    fx = f(Interval.point(xhat))
    if not (math.isfinite(fx.lo) and math.isfinite(fx.hi)):
        raise NumericalError("non-finite evaluation in newton_step")
    N = Interval.point(xhat) - fx / dfx
    if N.inside(X):
        return NewtonVerdict(VerdictKind.UNIQUE_ROOT, N.intersect(X))
    if not N.intersects(X):
        return NewtonVerdict(VerdictKind.NO_ROOT)
    return NewtonVerdict(VerdictKind.INCONCLUSIVE)


def newton_refine(f, df, X: Interval, iters: int = 30) -> NewtonVerdict:
    """Iterate the interval Newton operator; refinement is monotone once a
    unique root is certified."""
    verdict = newton_step(f, df, X, X.mid)
    if not verdict.is_unique:
        return verdict
    enc = verdict.enclosure
    for _ in range(iters):
        dfx = df(enc)
        if 0.0 in dfx:
            break
        N = Interval.point(enc.mid) - f(Interval.point(enc.mid)) / dfx
        nxt = N.intersect(enc)
        if nxt is None:
            break
        if nxt.width >= enc.width:
            break
        enc = nxt
    return NewtonVerdict(VerdictKind.UNIQUE_ROOT, enc)


@dataclass(frozen=True)
class NewtonVerdict2:
    kind: VerdictKind
    enclosure: IVec2 | None = None

    @property
    def is_unique(self) -> bool:
        return self.kind is VerdictKind.UNIQUE_ROOT


def newton2_step(f: Callable[[IVec2], IVec2],
                 df: Callable[[IVec2], IMat2],
                 X: IVec2) -> NewtonVerdict2:
    """Two-dimensional interval Newton step on the box X."""
    xhat = IVec2.of(Interval.point(X.x.mid), Interval.point(X.u.mid))
    A = df(X)
    try:
        corr = mat2_solve(A, f(xhat))
    except SingularError:
        return NewtonVerdict2(VerdictKind.INCONCLUSIVE)
    N = xhat - corr
    if N.inside(X):
        enc = IVec2(N.x.intersect(X.x), N.u.intersect(X.u))
        return NewtonVerdict2(VerdictKind.UNIQUE_ROOT, enc)
    if not N.intersects(X):
        return NewtonVerdict2(VerdictKind.NO_ROOT)
    return NewtonVerdict2(VerdictKind.INCONCLUSIVE)


def newton2_refine(f, df, X: IVec2, iters: int = 20) -> NewtonVerdict2:
    verdict = newton2_step(f, df, X)
    if not verdict.is_unique:
        return verdict
    enc = verdict.enclosure
    for _ in range(iters):
        v = newton2_step(f, df, enc)
        if not v.is_unique:
            break
        nxt = v.enclosure
        if nxt.x.width >= enc.x.width and nxt.u.width >= enc.u.width:
            break
        enc = nxt
    return NewtonVerdict2(VerdictKind.UNIQUE_ROOT, enc)
