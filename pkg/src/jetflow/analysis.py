"""Geodesic classification and non-periodicity certificates."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline

from .dynamics import Trajectory
from .errors import CriticalEndpoint, InvalidSpec, NotPositiveDefinite, SpanTooShort
from .periods import (DEFAULT_N, Endpoint, HillInterval, cheb_nodes, hill_intervals,
                      interval_containing, period_L)
from .polyvec import PolyVec

DELTA_THRESHOLD = 1e-10
RECON_TOL = 1e-6
SIGNIFICANT = 1e-9
CERT_DPS = 40
SAMPLE_GRID = np.linspace(-2.0, 2.0, 81)


class Kind(enum.Enum):
    LINE = "Line"
    X_PERIODIC = "XPeriodic"
    CRITICAL = "Critical"
    EQUILIBRIUM = "Equilibrium"


@dataclass(frozen=True)
class GeodesicClass:
    kind: Kind
    L: float | None = None
    end0: bool = False
    end1: bool = False

    def to_dict(self) -> dict:
        out = {"class": self.kind.value}
        if self.kind is Kind.X_PERIODIC:
            out["L"] = self.L
        if self.kind is Kind.CRITICAL:
            out["end0"], out["end1"] = self.end0, self.end1
        return out


def classify(F: PolyVec, I: HillInterval, x_init: float | None = None,
             N: int = DEFAULT_N, tol: float = 1e-9) -> GeodesicClass:
    """Line, x-periodic, or critical; Equilibrium when x_init sits on a critical endpoint."""
    if F.is_constant():
        return GeodesicClass(Kind.LINE)
    if not I.bounded:
        raise InvalidSpec("a non-constant F has only bounded Hill intervals")
    crit0, crit1 = I.end0 is Endpoint.CRITICAL, I.end1 is Endpoint.CRITICAL
    if x_init is not None and ((crit0 and abs(x_init - I.x0) <= tol) or
                               (crit1 and abs(x_init - I.x1) <= tol)):
        return GeodesicClass(Kind.EQUILIBRIUM)
    if not (crit0 or crit1):
        return GeodesicClass(Kind.X_PERIODIC, period_L(F, I, N))
    return GeodesicClass(Kind.CRITICAL, end0=crit0, end1=crit1)


class Verdict(enum.Enum):
    NOT_PERIODIC = "NotPeriodic"
    INCONCLUSIVE = "NumericallyInconclusive"


@dataclass(frozen=True)
class Certificate:
    F: PolyVec
    interval: HillInterval
    N: int
    gram_lambda_min: float
    delta_inf_norm: float
    reconstructed: PolyVec
    reconstruction_error: float
    verdict: Verdict
    L: float = math.nan
    delta_theta: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "F": self.F.to_dict(),
            "interval": self.interval.to_dict(),
            "N": self.N,
            "L": self.L,
            "delta_theta": self.delta_theta.T.tolist(),
            "gram_lambda_min": self.gram_lambda_min,
            "delta_inf_norm": self.delta_inf_norm,
            "reconstructed": self.reconstructed.to_dict(),
            "reconstruction_error": self.reconstruction_error,
            "verdict": self.verdict.value,
        }


def reconstruction_error(a: np.ndarray, c: np.ndarray) -> float:
    """Relative coefficient error; entries with |a| <= 1e-9 are compared against max|a|."""
    a, c = np.asarray(a), np.asarray(c)
    scale = float(np.max(np.abs(a)))
    big = np.abs(a) > SIGNIFICANT
    err = np.abs(c - a)
    rel = err[big] / np.abs(a[big]) if np.any(big) else np.zeros(0)
    small = err[~big] / scale if np.any(~big) else np.zeros(0)
    return float(np.max(np.concatenate([rel, small, [0.0]])))


def certify_not_periodic(F: PolyVec, I: HillInterval, N: int = DEFAULT_N,
                         dps: int = CERT_DPS) -> Certificate:
    """Numerical certificate that the x-periodic geodesic of (F, I) is not periodic.

    The holonomy increments determine the moments v[i] = <x^i, F^j>;
    inverting the Gram matrix recovers F. A vanishing holonomy would force
    F = 0, so a nonzero holonomy together with a faithful reconstruction
    certifies the pair.

    The N-point rule (nodes and weights in double precision) is taken as
    exact and the moments, the solve and the eigenvalue bound are carried
    out with ``dps`` significant digits: the monomial Gram matrix of a
    narrow interval away from the origin can have condition number ~1e16.
    """
    if F.is_constant():
        raise InvalidSpec("certificates need a non-constant F")
    if not I.regular:
        raise CriticalEndpoint("certificates need a Hill interval with regular endpoints")
    x, w = cheb_nodes(F, I, N)
    size = F.k + 1
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(float(v)) for v in x]
        ws = [mpmath.mpf(float(v)) for v in w]
        moments = [mpmath.fsum(wl * xl**e for xl, wl in zip(xs, ws)) for e in range(2 * size - 1)]
        G = mpmath.matrix(size, size)
        for i in range(size):
            for m in range(size):
                G[i, m] = moments[i + m]
        fx = [[mpmath.fsum(mpmath.mpf(float(a)) * xl**i for i, a in enumerate(row)) for xl in xs]
              for row in F.coeffs]
        dtheta = mpmath.matrix(size, F.n)
        for i in range(size):
            for j in range(F.n):
                dtheta[i, j] = 2 * mpmath.fsum(wl * xl**i * f for xl, wl, f in zip(xs, ws, fx[j])) \
                    / mpmath.factorial(i)
        lam = min(mpmath.eigsy(G, eigvals_only=True))
        if not lam > 0:
            raise NotPositiveDefinite(f"Gram matrix has smallest eigenvalue {lam}")
        try:
            mpmath.cholesky(G)
        except (ValueError, ZeroDivisionError) as exc:
            raise NotPositiveDefinite("Gram matrix failed Cholesky factorization") from exc
        coeffs = np.empty((F.n, size))
        for j in range(F.n):
            v = mpmath.matrix([mpmath.factorial(i) * dtheta[i, j] / 2 for i in range(size)])
            c = mpmath.cholesky_solve(G, v)
            coeffs[j] = [float(ci) for ci in c]
        dt = np.array([[float(dtheta[i, j]) for j in range(F.n)] for i in range(size)])
        lam = float(lam)
    rec = PolyVec(coeffs)
    err = reconstruction_error(F.coeffs, rec.coeffs)
    dinf = float(np.max(np.abs(dt)))
    ok = dinf > DELTA_THRESHOLD and err <= RECON_TOL and lam > 0
    return Certificate(F, I, N, lam, dinf, rec, err,
                       Verdict.NOT_PERIODIC if ok else Verdict.INCONCLUSIVE,
                       period_L(F, I, N), dt)


def periodicity_residual(traj: Trajectory, L: float, t0: float | None = None) -> tuple[float, float]:
    """(x-part, theta-part) of |gamma(t0 + L) - gamma(t0)|.

    Values between samples come from cubic splines through the samples.
    """
    t = traj.t
    t0 = float(t[0]) if t0 is None else float(t0)
    if t0 < t[0] or t0 + L > t[-1] + 1e-12 * max(1.0, abs(t[-1])):
        raise SpanTooShort(f"trajectory spans [{t[0]}, {t[-1]}], need [{t0}, {t0 + L}]")
    t1 = min(t0 + L, float(t[-1]))
    xs = CubicSpline(t, traj.x)
    ths = CubicSpline(t, traj.theta.reshape(len(t), -1), axis=0)
    x_part = abs(float(xs(t1) - xs(t0)))
    theta_part = float(np.max(np.abs(ths(t1) - ths(t0))))
    return x_part, theta_part


def random_pair(rng: np.random.Generator, kmax: int = 4, nmax: int = 3,
                max_tries: int = 100) -> tuple[PolyVec, HillInterval]:
    """Random non-constant F with a regular Hill interval.

    Coefficients are uniform in [-1, 1]; F is shrunk when needed so that
    ||F||^2 < 1 somewhere on a coarse grid over [-2, 2], and the Hill interval
    containing the grid minimiser is returned. Draws without a regular
    interval there are rejected.
    """
    for _ in range(max_tries):
        k = int(rng.integers(1, kmax + 1))
        n = int(rng.integers(1, nmax + 1))
        F = PolyVec(rng.uniform(-1.0, 1.0, size=(n, k + 1)))
        if F.is_constant():
            continue
        norms = np.sum(F.eval(SAMPLE_GRID) ** 2, axis=0)
        best = int(np.argmin(norms))
        if norms[best] >= 1.0:
            F = F.scaled(0.9 / math.sqrt(norms[best]))
        try:
            I = interval_containing(F, float(SAMPLE_GRID[best]))
        except Exception:
            continue
        if I.regular:
            return F, I
    raise RuntimeError("could not draw a regular pair")


def translation_invariant(F: PolyVec, shift: float, N: int = DEFAULT_N) -> list[tuple[GeodesicClass, GeodesicClass]]:
    """Classes of each Hill interval before and after x -> x - shift."""
    G = F.translate(shift)
    return [(classify(F, a, N=N), classify(G, b, N=N))
            for a, b in zip(hill_intervals(F), hill_intervals(G))]
