"""Geodesic synthesis from a pair (F, I) and the full cotangent-bundle flow.

The reduced system is the one-degree-of-freedom Hamiltonian
H_F = p_x^2/2 + ||F(x)||^2/2 on the level H_F = 1/2; theta is recovered by
quadrature along x(t). The full flow integrates Hamilton's equations of the
sub-Riemannian Hamiltonian directly and serves as an independent check.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from math import factorial
from typing import Iterator, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (BadEnergyLevel, IntegrationError, InvalidSpec, MalformedTrajectory,
                     MaxStepsExceeded, TooFewSamples)
from .jetspace import CotangentState, JetPoint, taylor_weights, u_from_theta
from .periods import HillInterval
from .polyvec import PolyVec

DEFAULT_TOL = 1e-10
ENERGY_TOL = 1e-9
MAX_STEPS = 2_000_000
METHOD = "DOP853"
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class ReducedState(NamedTuple):
    t: float
    x: float
    p_x: float


def force(F: PolyVec, x):
    """-(dF/dx, F(x)), the x-component of -grad of the potential ||F||^2/2."""
    return -np.sum(F.derivative(1).eval(x) * F.eval(x), axis=0)


def reduced_energy(F: PolyVec, x, p_x):
    return 0.5 * np.square(p_x) + 0.5 * np.sum(np.square(F.eval(x)), axis=0)


def initial_momentum(F: PolyVec, x0: float, sign: float = 1.0) -> float:
    """p_x(0) on the level H_F = 1/2 with the requested sign."""
    gap = 1.0 - float(np.sum(F.eval(x0) ** 2))
    if gap < -ENERGY_TOL:
        raise BadEnergyLevel(f"||F(x0)||^2 = {1 - gap} > 1: x0 is outside every Hill interval")
    return math.copysign(math.sqrt(max(gap, 0.0)), sign)


class _Counted:
    """Right-hand side wrapper enforcing a budget on evaluations."""

    def __init__(self, fun, limit: int):
        self.fun, self.limit, self.calls = fun, limit, 0

    def __call__(self, t, y):
        self.calls += 1
        if self.calls > self.limit:
            raise MaxStepsExceeded(f"more than {self.limit} right-hand side evaluations")
        return self.fun(t, y)


def _solve(fun, T: float, y0, tol: float, step: float | None, max_steps: int, events=None,
           times=None):
    if not T > 0:
        raise InvalidSpec("integration time T must be positive")
    rhs = _Counted(fun, 12 * max_steps)
    sol = solve_ivp(rhs, (0.0, T), y0, method=METHOD, rtol=tol, atol=tol,
                    dense_output=True, events=events)
    if sol.status != 0:
        raise IntegrationError(sol.message)
    if times is not None:
        t = np.asarray(times, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > T:
            raise InvalidSpec("output times must increase strictly inside [0, T]")
        y = sol.sol(t)
    elif step is not None:
        m = int(round(T / step))
        t = np.linspace(0.0, T, m + 1)
        y = sol.sol(t)
    else:
        t, y = sol.t, sol.y
    return t, y, sol


@dataclass
class ReducedPath:
    """Samples of (x(t), p_x(t)) plus the integrator's dense interpolant."""

    F: PolyVec
    t: np.ndarray
    x: np.ndarray
    p_x: np.ndarray
    dense: object = field(default=None, repr=False)
    events: list = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[ReducedState]:
        for row in zip(self.t, self.x, self.p_x):
            yield ReducedState(*map(float, row))

    def __getitem__(self, i) -> ReducedState:
        return ReducedState(float(self.t[i]), float(self.x[i]), float(self.p_x[i]))

    def energy(self) -> np.ndarray:
        return reduced_energy(self.F, self.x, self.p_x)

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy() - 0.5)))

    def x_at(self, t):
        if self.dense is None:
            raise ValueError("this path carries no dense interpolant")
        return self.dense(t)[0]


def integrate_reduced(F: PolyVec, x0: float, px0: float, T: float, tol: float = DEFAULT_TOL,
                      step: float | None = None, max_steps: int = MAX_STEPS,
                      turning_points: bool = False, times=None) -> ReducedPath:
    """Integrate x' = p_x, p_x' = -(dF/dx, F) on [0, T].

    Samples are the accepted steps, a uniform grid when ``step`` is given,
    or exactly ``times``. With ``turning_points`` the times where p_x changes sign are
    recorded in ``events``.
    """
    energy = float(reduced_energy(F, x0, px0))
    if abs(energy - 0.5) > ENERGY_TOL:
        raise BadEnergyLevel(f"H_F(x0, px0) = {energy!r}, expected 1/2")
    dF = F.derivative(1)

    def rhs(t, y):
        x, p = y
        return [p, -float(np.dot(dF.eval(x), F.eval(x)))]

    events = None
    if turning_points:
        def turn(t, y):
            return y[1]
        events = [turn]
    t, y, sol = _solve(rhs, T, [x0, px0], tol, step, max_steps, events, times)
    ev = list(sol.t_events[0]) if turning_points else []
    return ReducedPath(F, t, y[0], y[1], sol.sol, ev)


def turning_times(F: PolyVec, x0: float, px0: float, T: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Times in (0, T] at which the reduced flow turns (p_x = 0)."""
    path = integrate_reduced(F, x0, px0, T, tol, turning_points=True)
    return np.array([e for e in path.events if e > 0])


@dataclass
class Trajectory:
    """Time-ordered samples of a geodesic; ``theta`` has shape (N, k+1, n)."""

    F: PolyVec
    t: np.ndarray
    x: np.ndarray
    p_x: np.ndarray
    theta: np.ndarray
    interval: HillInterval | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def k(self) -> int:
        return self.theta.shape[1] - 1

    @property
    def n(self) -> int:
        return self.theta.shape[2]

    def point(self, idx: int) -> JetPoint:
        return JetPoint(self.x[idx], self.theta[idx])

    def u(self) -> np.ndarray:
        """Samples in derivative coordinates, shape (N, k+1, n)."""
        return np.array([u_from_theta(self.point(i)).u for i in range(len(self))])

    def energy_drift(self) -> float:
        return float(np.max(np.abs(reduced_energy(self.F, self.x, self.p_x) - 0.5)))

    def arclength_defect(self) -> float:
        return arclength_defect(self)

    def diagnostics(self) -> dict:
        out = {"samples": len(self), "energy_drift": self.energy_drift()}
        if len(self) >= 3:
            out["arclength_defect"] = self.arclength_defect()
        return out

    def time_scaled(self, factor: float) -> "Trajectory":
        """Same curve traversed ``factor`` times faster."""
        return Trajectory(self.F, self.t / factor, self.x, self.p_x * factor, self.theta, self.interval)

    # -- export ---------------------------------------------------------------

    def header(self) -> list[str]:
        names = ["t", "x", "p_x"]
        names += [f"theta_{i}_{j + 1}" for i in range(self.k + 1) for j in range(self.n)]
        return names

    def rows(self) -> np.ndarray:
        return np.column_stack([self.t, self.x, self.p_x, self.theta.reshape(len(self), -1)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for row in self.rows():
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "F": self.F.to_dict(),
            "interval": self.interval.to_dict() if self.interval else None,
            "t": self.t.tolist(), "x": self.x.tolist(), "p_x": self.p_x.tolist(),
            "theta": [th.T.tolist() for th in self.theta],
            "diagnostics": self.diagnostics(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Trajectory":
        try:
            F = PolyVec.from_dict(data["F"])
            theta = np.array(data["theta"], dtype=float).transpose(0, 2, 1)
            interval = HillInterval.from_dict(data["interval"]) if data.get("interval") else None
            traj = cls(F, np.array(data["t"], float), np.array(data["x"], float),
                       np.array(data["p_x"], float), theta, interval)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedTrajectory(f"bad trajectory JSON: {exc}") from exc
        _check_samples(traj)
        return traj


def _check_samples(traj: Trajectory) -> None:
    m = len(traj.t)
    if m == 0:
        raise MalformedTrajectory("trajectory has no samples")
    if not (len(traj.x) == len(traj.p_x) == traj.theta.shape[0] == m):
        raise MalformedTrajectory("sample columns have different lengths")
    if np.any(np.diff(traj.t) <= 0):
        raise MalformedTrajectory("timestamps must be strictly increasing")


def read_csv(text: str, F: PolyVec | None = None) -> Trajectory:
    """Parse the trajectory CSV layout written by :meth:`Trajectory.to_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise MalformedTrajectory("empty trajectory file")
    head = rows[0]
    if head[:3] != ["t", "x", "p_x"] or len(head) < 4:
        raise MalformedTrajectory("trajectory header must start with t,x,p_x,theta_0_1")
    try:
        last = head[-1].split("_")
        k, n = int(last[1]), int(last[2])
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(head))
    except (IndexError, ValueError) as exc:
        raise MalformedTrajectory(f"unreadable trajectory CSV: {exc}") from exc
    if len(head) != 3 + (k + 1) * n:
        raise MalformedTrajectory("theta columns do not match their labels")
    if F is None:
        F = PolyVec(np.zeros((n, k + 1)))
    traj = Trajectory(F, data[:, 0], data[:, 1], data[:, 2], data[:, 3:].reshape(-1, k + 1, n))
    _check_samples(traj)
    return traj


def lift(F: PolyVec, reduced: ReducedPath, theta0=None, interval: HillInterval | None = None) -> Trajectory:
    """Recover theta(t) from x(t): theta_i^j' = x^i/i! F^j(x).

    Every integrator step (split further at the sample times) is a panel of
    8-point Gauss-Legendre on the integrator's dense output, so the lift
    keeps the accuracy of the reduced solution.
    """
    if len(reduced) == 0:
        raise TooFewSamples("cannot lift an empty path")
    shape = (F.k + 1, F.n)
    theta0 = np.zeros(shape) if theta0 is None else np.asarray(theta0, dtype=float).reshape(shape)
    t = reduced.t
    # panels never straddle an integrator step, where the interpolant has kinks
    steps = getattr(reduced.dense, "ts", np.empty(0))
    grid = np.union1d(t, steps[(steps > t[0]) & (steps < t[-1])])
    a, b = grid[:-1], grid[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES[None, :]  # (M-1, 8)
    xs = reduced.x_at(nodes.ravel())
    Fx = F.eval(xs)  # (n, P)
    powers = np.array([xs**i / factorial(i) for i in range(F.k + 1)])  # (k+1, P)
    integrand = (powers[:, None, :] * Fx[None, :, :]).reshape(F.k + 1, F.n, len(a), len(_GL_NODES))
    incr = np.einsum("ijsq,q,s->sij", integrand, _GL_WEIGHTS, half)
    theta = np.concatenate([theta0[None], theta0[None] + np.cumsum(incr, axis=0)])
    theta = theta[np.searchsorted(grid, t)]
    return Trajectory(F, t.copy(), reduced.x.copy(), reduced.p_x.copy(), theta, interval)


def synthesize(F: PolyVec, x_init: float, px_sign: float, T: float, theta0=None,
               tol: float = DEFAULT_TOL, step: float | None = None,
               interval: HillInterval | None = None, times=None) -> Trajectory:
    """Arclength geodesic of the pair (F, I) through x_init."""
    px0 = initial_momentum(F, x_init, px_sign)
    reduced = integrate_reduced(F, x_init, px0, T, tol, step, times=times)
    return lift(F, reduced, theta0, interval)


@dataclass
class FullPath:
    """Samples of the canonical flow; ``theta`` and ``p_theta`` are (N, k+1, n)."""

    t: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    p_x: np.ndarray
    p_theta: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def state(self, idx: int) -> CotangentState:
        return CotangentState(JetPoint(self.x[idx], self.theta[idx]), self.p_x[idx], self.p_theta[idx])

    def momenta(self) -> tuple[np.ndarray, np.ndarray]:
        """P0(t) and P(t) with P of shape (N, k+1, n)."""
        k = self.p_theta.shape[1] - 1
        W = np.array([self.x**r / factorial(r) for r in range(k + 1)]).T  # (N, k+1)
        P = np.empty_like(self.p_theta)
        for i in range(k + 1):
            P[:, i] = np.einsum("sm,smj->sj", W[:, : k + 1 - i], self.p_theta[:, i:])
        return self.p_x.copy(), P

    def hamiltonian(self) -> np.ndarray:
        P0, P = self.momenta()
        return 0.5 * (P0**2 + np.sum(P[:, 0, :] ** 2, axis=1))

    def hamiltonian_drift(self) -> float:
        H = self.hamiltonian()
        return float(np.max(np.abs(H - H[0])))

    def p_theta_drift(self) -> float:
        return float(np.max(np.abs(self.p_theta - self.p_theta[0])))


def integrate_full(s0: CotangentState, T: float, tol: float = DEFAULT_TOL,
                   step: float | None = None, max_steps: int = MAX_STEPS, times=None) -> FullPath:
    """Hamilton's equations of H = (P0^2 + sum_j P_{X_0^j}^2) / 2 in (x, theta, p)."""
    k, n = s0.point.k, s0.point.n
    size = (k + 1) * n

    def rhs(t, y):
        x = y[0]
        p_theta = y[2 + size:].reshape(k + 1, n)
        w = taylor_weights(x, k)
        P0j = w @ p_theta
        P1j = w[:k] @ p_theta[1:] if k else np.zeros(n)
        out = np.zeros_like(y)
        out[0] = y[1 + size]
        out[1:1 + size] = np.outer(w, P0j).ravel()
        out[1 + size] = -float(P0j @ P1j)
        return out

    y0 = np.concatenate([[s0.point.x], s0.point.theta.ravel(), [s0.p_x], s0.p_theta.ravel()])
    t, y, _ = _solve(rhs, T, y0, tol, step, max_steps, times=times)
    m = len(t)
    return FullPath(t, y[0], y[1:1 + size].T.reshape(m, k + 1, n), y[1 + size],
                    y[2 + size:].T.reshape(m, k + 1, n))


def cotangent_from_pair(F: PolyVec, x0: float, px0: float, theta0=None) -> CotangentState:
    """Initial covector whose momentum P_{X_0^j} equals F^j: p_theta[i, j] = i! a_i^j."""
    p_theta = np.array([[factorial(i) * F.coeffs[j, i] for j in range(F.n)] for i in range(F.k + 1)])
    theta0 = np.zeros((F.k + 1, F.n)) if theta0 is None else theta0
    return CotangentState(JetPoint(x0, theta0), px0, p_theta)


def _central_velocity(t: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, slice]:
    """Central-difference dy/dt and the slice of samples where it is interior.

    Uniform grids with at least five samples use the fourth-order stencil,
    anything else falls back to the second-order one.
    """
    h = np.diff(t)
    if len(t) >= 5 and np.all(np.abs(h - h.mean()) <= 1e-9 * abs(h.mean())):
        d = np.full_like(y, np.nan)
        d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h.mean())
        return d, slice(2, -2)
    return np.gradient(y, t, axis=0), slice(1, -1)


def arclength_defect(traj: Trajectory) -> float:
    """max |x'^2 + sum_j (theta_0^j)'^2 - 1| by central differences."""
    if len(traj) < 3:
        raise TooFewSamples("need at least three samples")
    xdot, inner = _central_velocity(traj.t, traj.x)
    thdot, _ = _central_velocity(traj.t, traj.theta[:, 0, :])
    speed2 = xdot**2 + np.sum(thdot**2, axis=1)
    return float(np.max(np.abs(speed2[inner] - 1.0)))
