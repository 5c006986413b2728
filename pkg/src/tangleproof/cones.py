"""Cone conditions via quadratic forms.

An h-set with cones carries Q(p, q) = alpha p^2 - beta q^2 in model
coordinates (p unstable, q stable); sqrt(beta/alpha) is the Lipschitz bound of
the invariant manifolds threading the set.  A covering link N => M upgrades
from existence to uniqueness when, for every member B of the derivative
enclosure of the model map f_c = c_M o f o c_N^{-1},

    V(x) = Q_M(B x) - Q_N(x)

is positive definite (interval Sylvester criterion); the certified lower
bound on the smallest eigenvalue of V is the separation constant epsilon.  A
complete family of covering + cone certificates over a transition matrix
turns every admissible symbol sequence into exactly one orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import interval as iv
from .errors import IncompleteError, TangleproofError
from .hsets import BoxMap, HSet, _mat_chain
from .interval import Interval


class ConeFailure(TangleproofError):
    """Sylvester criterion failed; .minor reports which leading minor."""

    def __init__(self, message, minor):
        super().__init__(message)
        self.minor = minor


@dataclass(frozen=True)
class QuadraticForm:
    """Q(p, q) = alpha p^2 - beta q^2 with alpha, beta > 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError("quadratic form needs alpha, beta > 0")

    @staticmethod
    def from_lipschitz(lip: float, alpha: float = 1.0) -> "QuadraticForm":
        """Cone with manifold Lipschitz constant lip: beta = lip^2 alpha."""
        return QuadraticForm(alpha, lip * lip * alpha)


def manifold_lipschitz(Q: QuadraticForm) -> float:
    return math.sqrt(Q.beta / Q.alpha)


@dataclass(frozen=True)
class ConeCert:
    from_name: str
    to_name: str
    direction: str
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("separation constant must be positive")


def _posdef_min_eig(V11: Interval, V12: Interval, V22: Interval) -> float:
    """Certified lower bound of the least eigenvalue of the symmetric matrix
    [[V11, V12], [V12, V22]] over all members; raises ConeFailure when the
    Sylvester criterion cannot be verified."""
    if not V11.lo > 0.0:
        raise ConeFailure(f"leading minor not positive: V11 = {V11}", 1)
    det = V11 * V22 - V12 ** 2
    if not det.lo > 0.0:
        raise ConeFailure(f"determinant minor not positive: det = {det}", 2)
    # Gershgorin bound, with the exact interval eigenvalue as backup
    g = min(V11.lo, V22.lo) - V12.mag
    tr = V11 + V22
    disc = (V11 - V22) ** 2 + (V12 ** 2) * 4.0
    lam_min = (tr - disc.sqrt()) * Interval(0.5)
    eps = max(g, lam_min.lo)
    if not eps > 0.0:
        raise ConeFailure("positive definite but eigenvalue bound collapsed", 2)
    return eps


def cone_matrix_entries(dfc_entries, QN: QuadraticForm, QM: QuadraticForm):
    """Entries of V(x) = Q_M(Bx) - Q_N(x) for batched interval B entries."""
    alo, ahi, blo, bhi, clo, chi_, dlo, dhi = dfc_entries
    aM, bM = np.float64(QM.alpha), np.float64(QM.beta)
    aN, bN = np.float64(QN.alpha), np.float64(QN.beta)

    def mul(p, q):
        return iv.arr_mul(p[0], p[1], q[0], q[1])

    def sc(p, c):
        return iv.arr_mul(p[0], p[1], c, c)

    def sub(p, q):
        return iv.arr_sub(p[0], p[1], q[0], q[1])

    a2 = iv.arr_sqr(alo, ahi)
    c2 = iv.arr_sqr(clo, chi_)
    b2 = iv.arr_sqr(blo, bhi)
    d2 = iv.arr_sqr(dlo, dhi)
    V11 = sub(sc(a2, aM), sc(c2, bM))
    V11 = iv.arr_add(V11[0], V11[1], np.float64(-aN), np.float64(-aN))
    V22 = sub(sc(b2, aM), sc(d2, bM))
    V22 = iv.arr_add(V22[0], V22[1], np.float64(bN), np.float64(bN))
    ab = mul((alo, ahi), (blo, bhi))
    cd = mul((clo, chi_), (dlo, dhi))
    V12 = sub(sc(ab, aM), sc(cd, bM))
    return V11, V12, V22


def check_cone_condition(df_model, QN: QuadraticForm, QM: QuadraticForm,
                         from_name: str = "", to_name: str = "",
                         direction: str = "forward") -> ConeCert:
    """Certify positive definiteness of V for an interval derivative
    enclosure (an IMat2 or batched entry arrays) of the model map."""
    from .interval import IMat2

    if isinstance(df_model, IMat2):
        entries = tuple(np.float64(v) for e in
                        (df_model.a11, df_model.a12, df_model.a21, df_model.a22)
                        for v in (e.lo, e.hi))
    else:
        entries = df_model
    V11, V12, V22 = cone_matrix_entries(entries, QN, QM)
    eps = np.inf
    v11 = np.broadcast_arrays(*V11)
    v12 = np.broadcast_arrays(*V12)
    v22 = np.broadcast_arrays(*V22)
    flat = [np.ravel(a) for a in (*v11, *v12, *v22)]
    for k in range(flat[0].size):
        e = _posdef_min_eig(Interval(flat[0][k], flat[1][k]),
                            Interval(flat[2][k], flat[3][k]),
                            Interval(flat[4][k], flat[5][k]))
        eps = min(eps, e)
    return ConeCert(from_name, to_name, direction, float(eps))


def link_cone_condition(f: BoxMap, N: HSet, M: HSet, QN: QuadraticForm,
                        QM: QuadraticForm, subdivision: int = 8,
                        direction: str = "forward") -> ConeCert:
    """Cone condition for a covering link: the derivative of the model map
    c_M o f o c_N^{-1} is enclosed per subbox of N (chain rule through the
    affine h-set coordinates) and V is checked on every cell.

    For a backward link the condition is Q_M(x) - Q_N(B'x) > 0 for every
    member B' of the inverse model derivative over M.
    """
    if direction == "backward":
        cert = link_cone_condition(f.inverse(), M.transposed(), N.transposed(),
                                   _swap(QM), _swap(QN), subdivision, "forward")
        return ConeCert(N.name, M.name, "backward", cert.epsilon)
    xlo, xhi, ulo, uhi = N.grid_boxes(subdivision)
    entries = f.dmap_batch(xlo, xhi, ulo, uhi)
    AN = N.span_matrix
    Minv = M.model_inverse()
    dfc = _conjugate_entries(Minv, entries, AN)
    return check_cone_condition(dfc, QN, QM, N.name, M.name, "forward")


def _swap(Q: QuadraticForm) -> QuadraticForm:
    """Quadratic form of the transposed h-set: roles (and sign) swap."""
    return QuadraticForm(Q.beta, Q.alpha)


def _conjugate_entries(Minv, entries, AN):
    """Batched interval product Minv @ entries @ AN with point matrix AN and
    interval matrix Minv."""
    point = [np.float64(AN[0, 0]), np.float64(AN[0, 0]),
             np.float64(AN[0, 1]), np.float64(AN[0, 1]),
             np.float64(AN[1, 0]), np.float64(AN[1, 0]),
             np.float64(AN[1, 1]), np.float64(AN[1, 1])]
    step1 = _mat_chain(entries, point)
    left = [np.float64(Minv.a11.lo), np.float64(Minv.a11.hi),
            np.float64(Minv.a12.lo), np.float64(Minv.a12.hi),
            np.float64(Minv.a21.lo), np.float64(Minv.a21.hi),
            np.float64(Minv.a22.lo), np.float64(Minv.a22.hi)]
    return tuple(_mat_chain(left, step1))


@dataclass
class UniquenessCert:
    """Every admissible symbol sequence is realized by a unique orbit."""

    names: list
    transitions: np.ndarray
    epsilon: float
    covers: dict
    cones: dict


def markov_uniqueness(names, transitions, covers: dict, cones: dict
                      ) -> UniquenessCert:
    """Assemble the uniqueness certificate for a topological Markov chain.

    covers / cones map (i, j) index pairs to certificates; every allowed
    transition must carry both.
    """
    A = np.asarray(transitions)
    k = len(names)
    if A.shape != (k, k):
        raise ValueError("transition matrix shape mismatch")
    eps = np.inf
    for i in range(k):
        for j in range(k):
            if not A[i, j]:
                continue
            if (i, j) not in covers:
                raise IncompleteError(f"missing covering certificate {names[i]} "
                                      f"=> {names[j]}")
            if (i, j) not in cones:
                raise IncompleteError(f"missing cone certificate {names[i]} "
                                      f"=> {names[j]}")
            eps = min(eps, cones[(i, j)].epsilon)
    return UniquenessCert(list(names), A.copy(), float(eps), dict(covers),
                          dict(cones))
