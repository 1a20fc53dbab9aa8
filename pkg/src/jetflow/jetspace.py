"""Chart layer of the jet space J^k(R, R^n).

Two coordinate systems are used. The derivative coordinates
``(x, u[0..k])`` satisfy du_i = u_{i+1} dx along horizontal curves. The
exponential coordinates ``(x, theta[0..k])`` make the frame and Hamiltonian
independent of theta. Matrices indexed ``[i][j]`` have shape ``(k + 1, n)``:
``i`` is the jet order and ``j`` the component.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import InvalidSpec, TooFewSamples


def _matrix(a, name: str) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim == 1:
        a = a[:, np.newaxis]
    if a.ndim != 2:
        raise InvalidSpec(f"{name} must be a (k+1) x n matrix")
    if not np.all(np.isfinite(a)):
        raise InvalidSpec(f"{name} entries must be finite")
    return a


def taylor_weights(x: float, k: int) -> np.ndarray:
    """The vector ``x**i / i!`` for i = 0..k."""
    return np.array([x**i / factorial(i) for i in range(k + 1)])


@dataclass(frozen=True)
class JetPoint:
    x: float
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "theta", _matrix(self.theta, "theta"))

    @property
    def k(self) -> int:
        return self.theta.shape[0] - 1

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    def to_dict(self) -> dict:
        return {"x": self.x, "theta": self.theta.T.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "JetPoint":
        return cls(data["x"], np.array(data["theta"], dtype=float).T)


@dataclass(frozen=True)
class JetPointU:
    x: float
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "u", _matrix(self.u, "u"))

    @property
    def k(self) -> int:
        return self.u.shape[0] - 1

    def to_dict(self) -> dict:
        return {"x": self.x, "u": self.u.T.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "JetPointU":
        return cls(data["x"], np.array(data["u"], dtype=float).T)


@dataclass(frozen=True)
class CotangentState:
    point: JetPoint
    p_x: float
    p_theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_x", float(self.p_x))
        p = _matrix(self.p_theta, "p_theta")
        if p.shape != self.point.theta.shape:
            raise InvalidSpec("p_theta must have the same shape as theta")
        object.__setattr__(self, "p_theta", p)


def _alternating_weights(x: float, k: int) -> np.ndarray:
    """W[i, m] = (-1)**m x**(i-m) / (i-m)! for m <= i, else 0."""
    w = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        for m in range(i + 1):
            w[i, m] = (-1) ** m * x ** (i - m) / factorial(i - m)
    return w


def theta_from_u(q: JetPointU) -> JetPoint:
    """theta_i = sum_{m<=i} (-1)^m x^(i-m)/(i-m)! u_{k-m}."""
    k = q.k
    w = _alternating_weights(q.x, k)
    return JetPoint(q.x, w @ q.u[::-1])


def u_from_theta(q: JetPoint) -> JetPointU:
    """Inverse of :func:`theta_from_u` by forward substitution over the jet order."""
    k = q.k
    w = _alternating_weights(q.x, k)
    rev = np.zeros_like(q.theta)  # rev[m] = u_{k-m}
    for i in range(k + 1):
        acc = q.theta[i] - w[i, :i] @ rev[:i]
        rev[i] = acc / w[i, i]
    return JetPointU(q.x, rev[::-1])


def frame(q: JetPoint) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal frame at ``q`` as coefficient arrays on (d/dx, d/dtheta).

    Returns ``(X0, Xj)`` where ``X0`` is a pair ``(1.0, zeros)`` packed as an
    array of length ``1 + (k+1)n`` and ``Xj[j]`` the same layout for the
    field ``X_0^j``. Theta components are flattened i-major.
    """
    k, n = q.k, q.n
    dim = 1 + (k + 1) * n
    x0 = np.zeros(dim)
    x0[0] = 1.0
    w = taylor_weights(q.x, k)
    xj = np.zeros((n, dim))
    for j in range(n):
        block = np.zeros((k + 1, n))
        block[:, j] = w
        xj[j, 1:] = block.ravel()
    return x0, xj


def momentum_functions(s: CotangentState) -> tuple[float, np.ndarray]:
    """Left-invariant momenta ``(P0, P)`` with ``P[i, j]`` the momentum of X_i^j.

    P[i, j] = sum_{m >= i} x^(m-i)/(m-i)! p_theta[m, j]; the row ``P[0]`` is
    the momentum of the horizontal field X_0^j.
    """
    p = s.p_theta
    k = p.shape[0] - 1
    w = taylor_weights(s.point.x, k)
    P = np.empty_like(p)
    for i in range(k + 1):
        P[i] = w[: k + 1 - i] @ p[i:]
    return s.p_x, P


def horizontality_residual(t, x, u) -> float:
    """Largest violation of du_i = u_{i+1} dx along a sampled curve.

    ``u`` has shape ``(N, k+1, n)``; time derivatives are central differences
    on the (possibly non-uniform) grid ``t``.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if len(t) < 3:
        raise TooFewSamples("need at least three samples")
    if np.any(np.diff(t) <= 0):
        raise InvalidSpec("timestamps must be strictly increasing")
    if u.shape[1] < 2:
        return 0.0
    xdot = np.gradient(x, t)
    udot = np.gradient(u, t, axis=0)
    res = udot[:, :-1, :] - u[:, 1:, :] * xdot[:, None, None]
    return float(np.max(np.abs(res[1:-1])))


def sr_speed(v_x: float, v_theta0) -> float:
    """Sub-Riemannian speed of a horizontal vector from its (x, theta_0) parts."""
    return float(np.sqrt(v_x**2 + np.sum(np.square(v_theta0))))
