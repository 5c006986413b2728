"""H-sets, covering relations, and verified covering chains.

An h-set is an oriented parallelogram: center c, spanning half-edge vectors
v_u (exit direction) and v_s (entry direction).  Its model map sends the
support onto [-1,1]^2; the exit set is the pair of edges where the unstable
model coordinate is +-1 (these edges are parallel to v_s), the entry set the
other pair.

A covering N => M under f is verified through the planar sufficient
conditions: the image of one exit edge of N lies strictly beyond the unstable
model coordinate +1 of M, the image of the other strictly beyond -1, and the
image of the boundary of N avoids the two closed corner strips
Q+- = {|p| <= 1, |q| >= 1} (so it can only leave the unit square past the
exit sides).  These imply the covering homotopy to the linear model: contract
the stable coordinate first (no point with |p| <= 1 ever meets the entry
edges, points with |p| > 1 stay off the square), then straighten.  The
boundary controls the whole box: the corner strips are connected and
unbounded, so a compact image meeting them would meet them with its boundary,
and f is a homeomorphism onto its image.  Edges are subdivided into interval
segments; a segment whose image enclosure straddles a decision boundary is
reported as inconclusive (refine), one certainly inside a forbidden region as
a hard failure.

Closed chains of coverings carry periodic points; mixed forward/backward
chains (back-covering = covering of the inverse with roles swapped) carry
arbitrary finite itineraries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import interval as iv
from .errors import MapDomainError, TangleproofError
from .interval import IMat2, Interval, IVec2
from .maps import MapHandle


class NotCoveredError(TangleproofError):
    """A covering condition failed; .failures lists (edge, segment, kind),
    kind 'false' for a certified violation, 'inconclusive' for an enclosure
    straddling the boundary."""

    def __init__(self, message, failures=None, inconclusive=False):
        super().__init__(message)
        self.failures = failures or []
        self.inconclusive = inconclusive


@dataclass(frozen=True)
class HSet:
    """Oriented parallelogram with exit direction vu and entry direction vs
    (full half-edge vectors; support = center + [-1,1] vu + [-1,1] vs)."""

    center: tuple
    vu: tuple
    vs: tuple
    name: str = ""

    @staticmethod
    def from_span(center, e_u, e_s, l_u, l_s, name="") -> "HSet":
        vu = (l_u * e_u[0], l_u * e_u[1])
        vs = (l_s * e_s[0], l_s * e_s[1])
        return HSet(tuple(map(float, center)), vu, vs, name)

    @staticmethod
    def from_dual(center, e_u, e_s, a, b, name="") -> "HSet":
        """H-set cut out by |(p-c).e_u| <= a, |(p-c).e_s| <= b; the spanning
        vectors are the scaled dual basis (exit = where the e_u functional
        saturates)."""
        E = np.array([[e_u[0], e_u[1]], [e_s[0], e_s[1]]], dtype=float)
        D = np.linalg.inv(E)
        vu = tuple(D[:, 0] * a)
        vs = tuple(D[:, 1] * b)
        return HSet(tuple(map(float, center)), vu, vs, name)

    # -- geometry -------------------------------------------------------------

    @property
    def span_matrix(self):
        return np.array([[self.vu[0], self.vs[0]], [self.vu[1], self.vs[1]]])

    def model_inverse(self) -> IMat2:
        """Interval inverse of the span matrix (model = Minv (p - c))."""
        M = IMat2.of(self.vu[0], self.vs[0], self.vu[1], self.vs[1])
        return M.inverse()

    def corners(self):
        c = np.array(self.center)
        vu = np.array(self.vu)
        vs = np.array(self.vs)
        return np.array([c + su * vu + ss * vs
                         for su in (-1, 1) for ss in (-1, 1)])

    def hull_box(self):
        """Axis-aligned interval hull [xlo, xhi, ulo, uhi]."""
        cs = self.corners()
        return (cs[:, 0].min(), cs[:, 0].max(), cs[:, 1].min(), cs[:, 1].max())

    def contains_point(self, p, slack=0.0) -> bool:
        Minv = self.model_inverse()
        d = IVec2.of(Interval(p[0]) - self.center[0], Interval(p[1]) - self.center[1])
        m = Minv.matvec(d)
        return m.x.mag <= 1.0 + slack and m.u.mag <= 1.0 + slack

    def transposed(self) -> "HSet":
        """Same support with exit and entry roles swapped (N^T)."""
        return HSet(self.center, self.vs, self.vu, self.name + "^T")

    def edge_segments(self, which: str, subdivision: int):
        """Interval boxes covering one edge; which in {u+, u-, s+, s-}.

        u+ / u- are the exit edges (unstable model coordinate fixed at +-1,
        running along vs); s+ / s- the entry edges.
        """
        c = np.array(self.center)
        vu = np.array(self.vu)
        vs = np.array(self.vs)
        t = np.linspace(-1.0, 1.0, subdivision + 1)
        if which in ("u+", "u-"):
            base = c + (1.0 if which == "u+" else -1.0) * vu
            run = vs
        else:
            base = c + (1.0 if which == "s+" else -1.0) * vs
            run = vu
        p0 = base[None, :] + t[:-1, None] * run[None, :]
        p1 = base[None, :] + t[1:, None] * run[None, :]
        xlo = np.minimum(p0[:, 0], p1[:, 0])
        xhi = np.maximum(p0[:, 0], p1[:, 0])
        ulo = np.minimum(p0[:, 1], p1[:, 1])
        uhi = np.maximum(p0[:, 1], p1[:, 1])
        return xlo, xhi, ulo, uhi

    def grid_boxes(self, n: int):
        """n x n interval boxes covering the support (hulls of model cells)."""
        c = np.array(self.center)
        vu = np.array(self.vu)
        vs = np.array(self.vs)
        t = np.linspace(-1.0, 1.0, n + 1)
        su0, ss0 = np.meshgrid(t[:-1], t[:-1], indexing="ij")
        su1, ss1 = np.meshgrid(t[1:], t[1:], indexing="ij")
        corners = []
        for a, b in ((su0, ss0), (su0, ss1), (su1, ss0), (su1, ss1)):
            corners.append(c[None, None, :] + a[..., None] * vu[None, None, :]
                           + b[..., None] * vs[None, None, :])
        P = np.stack(corners)  # (4, n, n, 2)
        xlo = P[..., 0].min(axis=0).ravel()
        xhi = P[..., 0].max(axis=0).ravel()
        ulo = P[..., 1].min(axis=0).ravel()
        uhi = P[..., 1].max(axis=0).ravel()
        return xlo, xhi, ulo, uhi


# ---------------------------------------------------------------------------
# box maps
# ---------------------------------------------------------------------------

class BoxMap:
    """Protocol: a certified map acting on batched boxes."""

    name = "map"

    def map_batch(self, xlo, xhi, ulo, uhi):
        raise NotImplementedError

    def dmap_batch(self, xlo, xhi, ulo, uhi):
        """Interval entries (a, b, c, d) of the derivative over boxes."""
        raise NotImplementedError

    def map_float(self, pts):
        raise NotImplementedError

    def inverse(self) -> "BoxMap":
        raise NotImplementedError


class IterMap(BoxMap):
    """F^k for the generating-function map (negative k via reversibility)."""

    def __init__(self, m: MapHandle, k: int):
        if k == 0:
            raise ValueError("iterate must be nonzero")
        self.m = m
        self.k = k
        self.name = f"F^{k}"

    def inverse(self) -> "IterMap":
        return IterMap(self.m, -self.k)

    def _conj(self, ulo, uhi):
        return -uhi, -ulo

    def map_batch(self, xlo, xhi, ulo, uhi):
        k = self.k
        if k < 0:
            ulo, uhi = self._conj(ulo, uhi)
        for _ in range(abs(k)):
            xlo, xhi, ulo, uhi = self.m.apply_F_batch(xlo, xhi, ulo, uhi)
        if k < 0:
            ulo, uhi = self._conj(ulo, uhi)
        return xlo, xhi, ulo, uhi

    def map_float(self, pts):
        pts = np.asarray(pts, dtype=float)
        k = self.k
        if k < 0:
            pts = pts * np.array([1.0, -1.0])
        for _ in range(abs(k)):
            pts = self.m.apply_float(pts)
        if k < 0:
            pts = pts * np.array([1.0, -1.0])
        return pts

    def dmap_batch(self, xlo, xhi, ulo, uhi):
        k = self.k
        sgn = 1.0
        if k < 0:
            ulo, uhi = self._conj(ulo, uhi)
        one = np.ones_like(np.asarray(xlo, dtype=float))
        zero = np.zeros_like(one)
        acc = [one.copy(), one.copy(), zero.copy(), zero.copy(),
               zero.copy(), zero.copy(), one.copy(), one.copy()]
        for _ in range(abs(k)):
            (entries, yenc) = self.m.dF_batch(xlo, xhi, ulo, uhi)
            acc = _mat_chain(entries, acc)
            vlo, vhi = self.m.s.eval_batch(xlo, xhi, *yenc)
            xlo, xhi = yenc
            ulo, uhi = vlo, vhi
        if k < 0:
            # D(T o F^|k| o T) = T D T with T = diag(1, -1)
            alo, ahi, blo, bhi, clo, chi_, dlo, dhi = acc
            acc = [alo, ahi, -bhi, -blo, -chi_, -clo, dlo, dhi]
        return tuple(acc)


def _mat_chain(new, acc):
    """Interval 2x2 product new @ acc for batched entry arrays."""
    nal, nah, nbl, nbh, ncl, nch, ndl, ndh = new
    aal, aah, abl, abh, acl, ach, adl, adh = acc
    def mul(p, q):
        return iv.arr_mul(p[0], p[1], q[0], q[1])
    def add(p, q):
        return iv.arr_add(p[0], p[1], q[0], q[1])
    a = add(mul((nal, nah), (aal, aah)), mul((nbl, nbh), (acl, ach)))
    b = add(mul((nal, nah), (abl, abh)), mul((nbl, nbh), (adl, adh)))
    c = add(mul((ncl, nch), (aal, aah)), mul((ndl, ndh), (acl, ach)))
    d = add(mul((ncl, nch), (abl, abh)), mul((ndl, ndh), (adl, adh)))
    return [a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1]]


class AffineBoxMap(BoxMap):
    """Toy linear map (x, u) -> (ax, du), for model tests."""

    def __init__(self, a, d):
        self.a = float(a)
        self.d = float(d)
        self.name = f"diag({a},{d})"

    def inverse(self):
        return AffineBoxMap(1.0 / self.a, 1.0 / self.d)

    def map_batch(self, xlo, xhi, ulo, uhi):
        xl, xh = iv.arr_mul(np.asarray(xlo, float), np.asarray(xhi, float),
                            np.float64(self.a), np.float64(self.a))
        ul, uh = iv.arr_mul(np.asarray(ulo, float), np.asarray(uhi, float),
                            np.float64(self.d), np.float64(self.d))
        return xl, xh, ul, uh

    def map_float(self, pts):
        return np.asarray(pts, float) * np.array([self.a, self.d])

    def dmap_batch(self, xlo, xhi, ulo, uhi):
        one = np.ones_like(np.asarray(xlo, float))
        return (self.a * one, self.a * one, 0.0 * one, 0.0 * one,
                0.0 * one, 0.0 * one, self.d * one, self.d * one)


# ---------------------------------------------------------------------------
# covering verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverCert:
    from_name: str
    to_name: str
    direction: str  # "forward" | "backward"
    iterate: int
    margin: float  # worst-case clearance over all conditions
    exit_margin: float  # clearance of the exit-edge crossing alone
    subdivision: int


def _model_coords_batch(M: HSet, xlo, xhi, ulo, uhi):
    """Model coordinates of boxes w.r.t. the h-set M (interval affine map)."""
    Minv = M.model_inverse()
    dxl, dxh = iv.arr_add(xlo, xhi, np.float64(-M.center[0]), np.float64(-M.center[0]))
    dul, duh = iv.arr_add(ulo, uhi, np.float64(-M.center[1]), np.float64(-M.center[1]))
    def ent(e):
        return np.float64(e.lo), np.float64(e.hi)
    p1 = iv.arr_mul(dxl, dxh, *ent(Minv.a11))
    p2 = iv.arr_mul(dul, duh, *ent(Minv.a12))
    q1 = iv.arr_mul(dxl, dxh, *ent(Minv.a21))
    q2 = iv.arr_mul(dul, duh, *ent(Minv.a22))
    plo, phi = iv.arr_add(p1[0], p1[1], p2[0], p2[1])
    qlo, qhi = iv.arr_add(q1[0], q1[1], q2[0], q2[1])
    return plo, phi, qlo, qhi


def _check_covering_once(f: BoxMap, N: HSet, M: HSet, subdivision: int):
    failures = []
    margin = np.inf
    exit_margin = np.inf
    exit_sides = {}
    for which in ("u+", "u-", "s+", "s-"):
        xlo, xhi, ulo, uhi = N.edge_segments(which, subdivision)
        try:
            ixlo, ixhi, iulo, iuhi = f.map_batch(xlo, xhi, ulo, uhi)
        except MapDomainError as e:
            raise NotCoveredError(f"map not certified on edge {which}: {e}",
                                  [(which, -1, "inconclusive")], True)
        plo, phi, qlo, qhi = _model_coords_batch(M, ixlo, ixhi, iulo, iuhi)
        # avoid the corner strips Q+- = {|p| <= 1, |q| >= 1}: each segment
        # must be strictly right of p=1, left of p=-1, or inside |q| < 1
        absq = np.maximum(np.abs(qlo), np.abs(qhi))
        clear = np.maximum(np.maximum(plo - 1.0, -1.0 - phi), 1.0 - absq)
        bad = clear <= 0.0
        if np.any(bad):
            for k in np.where(bad)[0]:
                inside_p = (plo[k] >= -1.0) and (phi[k] <= 1.0)
                inside_q = (qlo[k] >= 1.0) or (qhi[k] <= -1.0)
                kind = "false" if (inside_p and inside_q) else "inconclusive"
                failures.append((which, int(k), kind))
        else:
            margin = min(margin, float(clear.min()))
        if which in ("u+", "u-"):
            if np.all(plo > 1.0):
                side = +1
                exit_margin = min(exit_margin, float(plo.min() - 1.0))
            elif np.all(phi < -1.0):
                side = -1
                exit_margin = min(exit_margin, float(-1.0 - phi.max()))
            else:
                side = 0
                for k in range(len(plo)):
                    if not (plo[k] > 1.0 or phi[k] < -1.0):
                        kind = ("false" if (-1.0 <= plo[k] and phi[k] <= 1.0)
                                else "inconclusive")
                        failures.append((which, int(k), kind))
            exit_sides[which] = side
    if exit_sides.get("u+", 0) * exit_sides.get("u-", 0) != -1:
        if not failures:
            failures.append(("u+", -1, "false"))
    if failures:
        inconclusive = any(kind == "inconclusive" for (_, _, kind) in failures)
        raise NotCoveredError(
            f"{N.name} => {M.name} under {f.name} failed on "
            f"{len(failures)} segment(s)", failures, inconclusive)
    return float(min(margin, exit_margin)), float(exit_margin)


def check_covering(f: BoxMap, N: HSet, M: HSet, subdivision: int = 64,
                   max_subdivision: int = 1024, direction: str = "forward",
                   iterate: int | None = None) -> CoverCert:
    """Verify N => M under f; inconclusive segments trigger automatic
    subdivision doubling up to max_subdivision."""
    sub = subdivision
    while True:
        try:
            margin, exit_margin = _check_covering_once(f, N, M, sub)
            return CoverCert(N.name, M.name, direction,
                             iterate if iterate is not None else getattr(f, "k", 0),
                             margin, exit_margin, sub)
        except NotCoveredError as e:
            if e.inconclusive and sub < max_subdivision:
                sub *= 2
                continue
            raise


def check_backcovering(f: BoxMap, N: HSet, M: HSet, subdivision: int = 64,
                       max_subdivision: int = 1024) -> CoverCert:
    """N back-covers M under f iff M^T covers N^T under f^{-1}."""
    cert = check_covering(f.inverse(), M.transposed(), N.transposed(),
                          subdivision, max_subdivision, direction="backward",
                          iterate=getattr(f, "k", 0))
    return CoverCert(N.name, M.name, "backward", cert.iterate, cert.margin,
                     cert.subdivision)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def transform_hset(N: HSet, op: str, k: int = 1, lam: Interval | None = None,
                   mu: Interval | None = None) -> HSet:
    """T-involution or diagonal scaling image of an h-set.

    For the scaling, centres and spanning vectors are scaled by the interval
    midpoints and the half-lengths are inflated so that the reported
    parallelogram contains the image for every member scaling.
    """
    if op == "T":
        return HSet((N.center[0], -N.center[1]),
                    (N.vu[0], -N.vu[1]), (N.vs[0], -N.vs[1]),
                    f"T({N.name})" if N.name else "")
    if op != "Lambda":
        raise ValueError(f"unknown transform {op!r}")
    if lam is None or mu is None:
        raise ValueError("Lambda transform needs lam and mu enclosures")
    if k < 0 and (lam.contains(0.0) or mu.contains(0.0)):
        raise ValueError("negative scaling power requires invertible scalings")

    def pw(c: Interval, n: int) -> Interval:
        if n >= 0:
            return c ** n
        return (Interval(1.0) / c) ** (-n)

    sx, su = pw(lam, k), pw(mu, k)
    cx = Interval(N.center[0]) * sx
    cu = Interval(N.center[1]) * su
    vux = Interval(N.vu[0]) * sx
    vuu = Interval(N.vu[1]) * su
    vsx = Interval(N.vs[0]) * sx
    vsu = Interval(N.vs[1]) * su
    center = (cx.mid, cu.mid)
    vu = (vux.mid, vuu.mid)
    vs = (vsx.mid, vsu.mid)
    out = HSet(center, vu, vs, f"Lam^{k}({N.name})" if N.name else "")
    # inflate to cover every member image: bound the model-coordinate slack
    Minv = out.model_inverse()
    dev = IVec2.of(
        Interval(-cx.width - vux.width - vsx.width, cx.width + vux.width + vsx.width),
        Interval(-cu.width - vuu.width - vsu.width, cu.width + vuu.width + vsu.width))
    slack = Minv.matvec(dev)
    eta = max(slack.x.mag, slack.u.mag)
    if eta > 0.0:
        out = HSet(center, ((1 + eta) * vu[0], (1 + eta) * vu[1]),
                   ((1 + eta) * vs[0], (1 + eta) * vs[1]), out.name)
    return out


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

@dataclass
class ChainLink:
    src: HSet
    dst: HSet
    iterate: int
    direction: str = "forward"  # or "backward"


@dataclass
class ChainCert:
    certs: list
    closed: bool

    @property
    def min_margin(self):
        return min(c.margin for c in self.certs) if self.certs else np.inf


def verify_chain(m: MapHandle, links: list, subdivision: int = 64,
                 max_subdivision: int = 1024) -> ChainCert:
    """Verify all covering links; raises NotCoveredError at the first failing
    link (annotated with the link index)."""
    certs = []
    for idx, link in enumerate(links):
        f = IterMap(m, link.iterate)
        try:
            if link.direction == "forward":
                cert = check_covering(f, link.src, link.dst, subdivision,
                                      max_subdivision)
            else:
                cert = check_backcovering(f, link.src, link.dst, subdivision,
                                          max_subdivision)
        except NotCoveredError as e:
            raise NotCoveredError(
                f"link {idx} ({link.src.name} => {link.dst.name}, "
                f"iterate {link.iterate}, {link.direction}): {e}",
                e.failures, e.inconclusive) from e
        certs.append(cert)
    closed = bool(links) and links[0].src.name == links[-1].dst.name
    return ChainCert(certs, closed)


def _orbit_deviation(m: MapHandle, links: list, start):
    """Float orbit from `start` through the chain; returns (points, objective)
    where the objective is the worst model-coordinate magnitude over the
    visited target boxes (the last box weighs like the others)."""
    p = np.array(start, dtype=float)
    pts = [p]
    worst = 0.0
    for link in links:
        f = IterMap(m, link.iterate)
        try:
            p = f.map_float(p[None, :])[0]
        except (MapDomainError, FloatingPointError):
            return pts, np.inf
        if not np.all(np.isfinite(p)):
            return pts, np.inf
        pts.append(p)
        Minv = np.linalg.inv(link.dst.span_matrix)
        mc = Minv @ (p - np.array(link.dst.center))
        worst = max(worst, float(np.abs(mc).max()))
    return pts, worst


def shoot_recenter(m: MapHandle, links: list, n_scan: int = 33,
                   rounds: int = 20, max_shift: float = 1e-3):
    """Re-centering fallback: scan a one-parameter family of start points
    along the exit direction of the first box, zoom toward the orbit that
    stays deepest inside the chain, and re-centre the intermediate boxes on
    it.  Non-rigorous (proposal only): callers re-verify the recentered chain.

    Returns (new_links, shifts, objective); raises when a proposed centre
    moves further than max_shift or no orbit threads the chain.
    """
    first = links[0].src
    c1 = np.array(first.center, dtype=float)
    vu = np.array(first.vu, dtype=float)
    lo, hi = -1.0, 1.0
    best_t, best_obj = 0.0, np.inf
    for _ in range(rounds):
        ts = np.linspace(lo, hi, n_scan)
        objs = []
        for t in ts:
            _, obj = _orbit_deviation(m, links, c1 + t * vu)
            objs.append(obj)
        k = int(np.argmin(objs))
        if objs[k] < best_obj:
            best_obj, best_t = objs[k], ts[k]
        span = (hi - lo) / (n_scan - 1)
        lo, hi = best_t - span, best_t + span
        if span < 1e-17:
            break
    if not np.isfinite(best_obj):
        raise TangleproofError("no orbit threads the chain (shooting failed)")
    pts, _ = _orbit_deviation(m, links, c1 + best_t * vu)
    shifts = [abs(best_t) * float(np.linalg.norm(vu))]
    new_links = []
    prev = first
    for idx, link in enumerate(links):
        if idx == len(links) - 1:
            moved = link.dst  # keep the terminal anchor box
            shifts.append(0.0)
        else:
            p = pts[idx + 1]
            shift = float(np.hypot(p[0] - link.dst.center[0],
                                   p[1] - link.dst.center[1]))
            if shift > max_shift:
                raise TangleproofError(
                    f"re-centering shift {shift:.2e} for {link.dst.name} "
                    f"exceeds {max_shift:.1e}")
            shifts.append(shift)
            moved = HSet((float(p[0]), float(p[1])), link.dst.vu, link.dst.vs,
                         link.dst.name)
        new_links.append(ChainLink(prev, moved, link.iterate, link.direction))
        prev = moved
    return new_links, shifts, best_obj
