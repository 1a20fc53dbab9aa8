"""Hill intervals, x-periods, holonomy increments and the weighted inner product.

All integrals over a regular Hill interval [x0, x1] have the form

    integral_I g(x) dx / sqrt(1 - ||F(x)||^2).

Writing 1 - ||F||^2 = (x - x0)(x1 - x) q(x) and x = m + r cos(phi) turns them
into integral_0^pi g(x(phi)) / sqrt(q(x(phi))) dphi with an analytic,
even, 2*pi-periodic integrand. The midpoint rule in phi (Gauss-Chebyshev
nodes in x) then converges geometrically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from math import comb
from math import factorial

import numpy as np
import numpy.polynomial.polynomial as npoly
import scipy.linalg

from .errors import (ConstantAboveOne, CriticalEndpoint, DeflationError, NoHillInterval,
                     NotPositiveDefinite, UnboundedInterval)
from .polyvec import ZERO_TOL, PolyVec, hill_function, isolate_roots, trim

DEFAULT_N = 64
GRID_POINTS = 1024
Q_FLOOR = 1e-12
ENDPOINT_TOL = 1e-9


class Endpoint(enum.Enum):
    REGULAR = "Regular"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class HillInterval:
    x0: float
    x1: float
    end0: Endpoint = Endpoint.REGULAR
    end1: Endpoint = Endpoint.REGULAR

    @classmethod
    def unbounded(cls) -> "HillInterval":
        return cls(-math.inf, math.inf)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.x0) and math.isfinite(self.x1)

    @property
    def regular(self) -> bool:
        """Bounded with both endpoints regular (the x-periodic case)."""
        return self.bounded and self.end0 is Endpoint.REGULAR and self.end1 is Endpoint.REGULAR

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x0 + self.x1)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.x1 - self.x0)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.x0 - tol <= x <= self.x1 + tol

    def to_dict(self) -> dict:
        if not self.bounded:
            return {"kind": "Unbounded"}
        return {"kind": "Bounded", "x0": self.x0, "x1": self.x1,
                "end0": self.end0.value, "end1": self.end1.value}

    @classmethod
    def from_dict(cls, data: dict) -> "HillInterval":
        if data.get("kind") == "Unbounded":
            return cls.unbounded()
        return cls(float(data["x0"]), float(data["x1"]),
                   Endpoint(data.get("end0", "Regular")), Endpoint(data.get("end1", "Regular")))


@dataclass(frozen=True)
class PeriodData:
    L: float
    delta_theta: np.ndarray  # shape (k+1, n)
    N: int = DEFAULT_N
    richardson: float = 0.0  # |L_N - L_2N|

    def to_dict(self) -> dict:
        return {"L": self.L, "delta_theta": self.delta_theta.T.tolist()}


@dataclass(frozen=True)
class GramMatrix:
    """Monomial Gram matrix ``G`` and its interval-local twin.

    ``local`` is the Gram matrix of y^i with y = (x - m)/r, and ``basis``
    the triangular map S taking y-coefficients to x-coefficients, so that
    G = S^-T local S^-1. Solves and the eigenvalue estimate go through the
    well-conditioned ``local``.
    """

    G: np.ndarray
    lambda_min: float
    local: np.ndarray = field(repr=False, default=None)
    basis: np.ndarray = field(repr=False, default=None)

    def solve(self, v: np.ndarray) -> np.ndarray:
        """Solve G c = v (v may hold several right-hand sides as columns)."""
        rhs = self.basis.T @ v
        fac = scipy.linalg.cho_factor(self.local)
        return self.basis @ scipy.linalg.cho_solve(fac, rhs)

    def to_dict(self) -> dict:
        return {"G": self.G.tolist(), "lambda_min": self.lambda_min}


def hill_intervals(F: PolyVec) -> list[HillInterval]:
    """Every Hill interval of ``F``, ordered left to right."""
    if F.is_constant():
        if float(np.sum(F.coeffs[:, 0] ** 2)) > 1.0:
            raise ConstantAboveOne("constant F with ||F|| > 1 has no Hill interval")
        return [HillInterval.unbounded()]
    p = hill_function(F)
    roots = isolate_roots(p)
    out = []
    for left, right in zip(roots, roots[1:]):
        mid = 0.5 * (left.location + right.location)
        if npoly.polyval(mid, p) > 0:
            out.append(HillInterval(
                left.location, right.location,
                Endpoint.REGULAR if left.multiplicity == 1 else Endpoint.CRITICAL,
                Endpoint.REGULAR if right.multiplicity == 1 else Endpoint.CRITICAL,
            ))
    if not out:
        raise NoHillInterval("||F(x)||^2 >= 1 everywhere; no Hill interval exists")
    return out


def interval_containing(F: PolyVec, x: float, tol: float = ENDPOINT_TOL) -> HillInterval:
    """The Hill interval of ``F`` that contains ``x``."""
    for interval in hill_intervals(F):
        if interval.contains(x, tol):
            return interval
    raise NoHillInterval(f"x = {x} lies in no Hill interval")


def _require_regular(I: HillInterval) -> None:
    if not I.bounded:
        raise UnboundedInterval("the period integrals need a bounded Hill interval")
    if not I.regular:
        raise CriticalEndpoint("a critical endpoint makes the x-period infinite")


def deflate(F: PolyVec, I: HillInterval) -> np.ndarray:
    """The cofactor q with 1 - ||F||^2 = (x - x0)(x1 - x) q(x)."""
    _require_regular(I)
    p = trim(hill_function(F), ZERO_TOL)
    if len(p) < 3:
        raise DeflationError("1 - ||F||^2 has degree < 2; nothing to deflate")
    q = _synthetic_div(_synthetic_div(p, I.x0), I.x1)
    q = -q  # (x1 - x) = -(x - x1)
    grid = np.linspace(I.x0, I.x1, GRID_POINTS)
    if np.min(npoly.polyval(grid, q)) <= Q_FLOOR:
        raise DeflationError("deflated cofactor is not positive on the Hill interval")
    return q


def _synthetic_div(c: np.ndarray, r: float) -> np.ndarray:
    """Quotient of c(x) by (x - r); the remainder is dropped."""
    d = len(c) - 1
    out = np.zeros(d)
    acc = 0.0
    for i in range(d, 0, -1):
        acc = c[i] + r * acc
        out[i - 1] = acc
    return out


def cheb_nodes(F: PolyVec, I: HillInterval, N: int = DEFAULT_N) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights with sum(w * g(x)) ~ integral_I g / sqrt(1 - ||F||^2)."""
    q = deflate(F, I)
    phi = (np.arange(N) + 0.5) * math.pi / N
    x = I.midpoint + I.half_width * np.cos(phi)
    w = (math.pi / N) / np.sqrt(npoly.polyval(x, q))
    return x, w


def period_L(F: PolyVec, I: HillInterval, N: int = DEFAULT_N) -> float:
    """x-period 2 * integral_I dx / sqrt(1 - ||F||^2)."""
    _, w = cheb_nodes(F, I, N)
    return 2.0 * float(np.sum(w))


def inner_product(P1, P2, F: PolyVec, I: HillInterval, N: int = DEFAULT_N) -> float:
    """<P1, P2>_F for scalar polynomials given as ascending coefficients."""
    x, w = cheb_nodes(F, I, N)
    return float(np.sum(w * npoly.polyval(x, P1) * npoly.polyval(x, P2)))


def delta_theta(F: PolyVec, I: HillInterval, N: int = DEFAULT_N) -> PeriodData:
    """x-period and the change of every theta_i^j over one period."""
    x, w = cheb_nodes(F, I, N)
    Fx = F.eval(x)  # (n, N)
    dt = np.empty((F.k + 1, F.n))
    for i in range(F.k + 1):
        dt[i] = (2.0 / factorial(i)) * (Fx * (w * x**i)).sum(axis=1)
    L = 2.0 * float(np.sum(w))
    L2 = period_L(F, I, 2 * N)
    return PeriodData(L, dt, N, abs(L - L2))


def local_basis(I: HillInterval, k: int) -> np.ndarray:
    """S with S[l, i] the x^l coefficient of ((x - m)/r)^i."""
    m, r = I.midpoint, I.half_width
    S = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        for l in range(i + 1):
            S[l, i] = comb(i, l) * (-m) ** (i - l) / r**i
    return S


def gram(F: PolyVec, I: HillInterval, N: int = DEFAULT_N) -> GramMatrix:
    """Gram matrix of the monomials 1, x, ..., x^k under <., .>_F.

    Positive-definiteness is certified by a Cholesky factorization of the
    congruent interval-local Gram matrix; ``lambda_min`` is 1/||G^-1||_2
    with G^-1 assembled from that factorization.
    """
    x, w = cheb_nodes(F, I, N)
    size = F.k + 1
    y = (x - I.midpoint) / I.half_width
    G = np.empty((size, size))
    local = np.empty((size, size))
    for i in range(size):
        for m in range(i, size):
            G[i, m] = G[m, i] = float(np.sum(w * x ** (i + m)))
            local[i, m] = local[m, i] = float(np.sum(w * y ** (i + m)))
    S = local_basis(I, F.k)
    try:
        fac = scipy.linalg.cho_factor(local)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Gram matrix failed Cholesky factorization") from exc
    inv = S @ scipy.linalg.cho_solve(fac, S.T)
    lam_inv = float(np.linalg.eigvalsh(0.5 * (inv + inv.T))[-1])
    if not lam_inv > 0:
        raise NotPositiveDefinite("Gram matrix inverse is not positive")
    return GramMatrix(G, 1.0 / lam_inv, local, S)


def tanh_sinh(f, a: float, b: float, level: int = 7, h0: float = 1.0) -> float:
    """Double-exponential quadrature of ``f`` on [a, b].

    ``f`` receives the node and its distances to both ends, ``f(x, x - a,
    b - x)``, so endpoint-singular integrands can be evaluated without
    cancellation.
    """
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    h = h0 / 2**level
    t = np.arange(-int(6.0 / h), int(6.0 / h) + 1) * h
    u = 0.5 * math.pi * np.sinh(t)
    # 1 - tanh(u) and 1 + tanh(u) computed without cancellation
    em = 2.0 / (np.exp(2.0 * u) + 1.0)
    ep = 2.0 / (np.exp(-2.0 * u) + 1.0)
    keep = (em > 0) & (ep > 0)
    t, u, em, ep = t[keep], u[keep], em[keep], ep[keep]
    dist_a, dist_b = r * ep, r * em
    x = np.where(dist_a < dist_b, a + dist_a, b - dist_b)
    wt = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    return float(h * r * np.sum(wt * f(x, dist_a, dist_b)))


def period_L_tanh_sinh(F: PolyVec, I: HillInterval, level: int = 7) -> float:
    """Diagnostic x-period by tanh-sinh on the undeflated singular integrand.

    1 - ||F||^2 is re-expanded about each endpoint, with the constant term
    dropped, and evaluated in the distance to the nearer endpoint.
    """
    _require_regular(I)
    p = npoly.Polynomial(hill_function(F))
    at0 = p(npoly.Polynomial([I.x0, 1.0])).coef.copy()
    at1 = p(npoly.Polynomial([I.x1, -1.0])).coef.copy()
    at0[0] = at1[0] = 0.0

    def f(x, da, db):
        val = np.where(da < db, npoly.polyval(da, at0), npoly.polyval(db, at1))
        return 1.0 / np.sqrt(val)

    return 2.0 * tanh_sinh(f, I.x0, I.x1, level)
