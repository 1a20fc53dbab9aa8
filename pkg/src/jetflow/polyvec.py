"""Polynomial vectors F(x) = (F^1(x), ..., F^n(x)) and real-root isolation.

Scalar polynomials are plain 1-D float arrays of coefficients in ascending
order (``c[i]`` multiplies ``x**i``), the same convention as
``numpy.polynomial.polynomial``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import IdenticallyZero, InvalidSpec

ZERO_TOL = 1e-13
GCD_TOL = 1e-10
POLISH_DPS = 40
VALID_TOL = 1e-9
ROOT_WIDTH = 1e-12


@dataclass(frozen=True, eq=False)
class PolyVec:
    """Polynomial vector with coefficient matrix ``coeffs[j, i]``.

    Row ``j`` holds component ``F^j`` and column ``i`` the coefficient of
    ``x**i``, so ``coeffs`` has shape ``(n, k + 1)``.
    """

    coeffs: np.ndarray
    zero_tol: float = field(default=ZERO_TOL, compare=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[np.newaxis, :]
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise InvalidSpec(f"coefficient matrix must be n x (k+1), got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidSpec("polynomial coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_components(cls, *components: Sequence[float], k: int | None = None) -> "PolyVec":
        """Build from per-component ascending coefficient lists, zero-padded to a common k."""
        width = max(len(c) for c in components)
        if k is not None:
            width = max(width, k + 1)
        rows = [list(c) + [0.0] * (width - len(c)) for c in components]
        return cls(np.array(rows, dtype=float))

    def __eq__(self, other):
        if not isinstance(other, PolyVec):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    __hash__ = None

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def k(self) -> int:
        return self.coeffs.shape[1] - 1

    def degree(self) -> int:
        big = np.nonzero(np.any(np.abs(self.coeffs) > self.zero_tol, axis=0))[0]
        return int(big[-1]) if big.size else 0

    def is_constant(self) -> bool:
        return self.degree() == 0

    def eval(self, x):
        """Evaluate every component at ``x``; shape ``(n,)`` or ``(n,) + x.shape``."""
        return npoly.polyval(x, self.coeffs.T)

    __call__ = eval

    def derivative(self, order: int = 1) -> "PolyVec":
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        out = np.zeros_like(self.coeffs)
        if order <= self.k:
            d = npoly.polyder(self.coeffs, m=order, axis=1) if order else self.coeffs
            out[:, : d.shape[1]] = d
        return PolyVec(out, self.zero_tol)

    def component(self, j: int) -> np.ndarray:
        """Ascending coefficients of ``F^j`` (0-based ``j``)."""
        return np.array(self.coeffs[j])

    def translate(self, shift: float) -> "PolyVec":
        """The polynomial vector x -> F(x - shift)."""
        rows = []
        for row in self.coeffs:
            c = npoly.Polynomial(row)(npoly.Polynomial([-shift, 1.0])).coef
            rows.append(np.pad(c, (0, self.k + 1 - len(c))))
        return PolyVec(np.array(rows), self.zero_tol)

    def scaled(self, factor: float) -> "PolyVec":
        return PolyVec(self.coeffs * factor, self.zero_tol)

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "PolyVec":
        try:
            coeffs = np.array(data["coeffs"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"bad PolyVec encoding: {exc}") from exc
        if coeffs.ndim != 2:
            raise InvalidSpec("PolyVec coeffs must be a list of n rows of k+1 numbers")
        n, k = data.get("n", coeffs.shape[0]), data.get("k", coeffs.shape[1] - 1)
        if coeffs.shape != (n, k + 1):
            raise InvalidSpec(f"PolyVec coeffs shape {coeffs.shape} does not match n={n}, k={k}")
        return cls(coeffs)


def sq_norm_poly(F: PolyVec) -> np.ndarray:
    """Coefficients of ||F(x)||^2, length 2k + 1."""
    out = np.zeros(2 * F.k + 1)
    for row in F.coeffs:
        sq = npoly.polymul(row, row)
        out[: len(sq)] += sq
    return out


def hill_function(F: PolyVec) -> np.ndarray:
    """Coefficients of 1 - ||F(x)||^2."""
    p = -sq_norm_poly(F)
    p[0] += 1.0
    return p


# -- scalar polynomial helpers ----------------------------------------------

def trim(c, tol: float = 0.0) -> np.ndarray:
    """Drop trailing coefficients with magnitude <= tol (keeps at least one)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    last = len(c) - 1
    while last > 0 and abs(c[last]) <= tol:
        last -= 1
    return c[: last + 1].copy()


def _is_zero(c, tol: float = 0.0) -> bool:
    return bool(np.all(np.abs(c) <= tol))


def _normalized(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    scale = np.max(np.abs(c))
    return c / scale if scale > 0 else c


def _conv_matrix(c, cols: int) -> np.ndarray:
    """Matrix of v -> c * v for v with ``cols`` coefficients."""
    m = np.zeros((len(c) + cols - 1, cols))
    for j in range(cols):
        m[j:j + len(c), j] = c
    return m


def _unit(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    return c / np.linalg.norm(c)


def gcd_degree(a, b, tol: float = GCD_TOL) -> int:
    """Numerical gcd degree: the number of relatively tiny singular values of
    the Sylvester matrix of ``a`` and ``b``."""
    a, b = _unit(trim(a)), _unit(trim(b))
    da, db = len(a) - 1, len(b) - 1
    if da < 1 or db < 1:
        return 0
    s = np.linalg.svd(np.hstack([_conv_matrix(a, db), _conv_matrix(b, da)]), compute_uv=False)
    return int(np.sum(s <= tol * s[0]))


def cofactors(a, b, e: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(g, a/g, b/g)`` for a gcd ``g`` of known degree ``e``.

    The cofactors span the null space of the degree-``e`` subresultant
    matrix; ``g`` then follows from a joint least-squares deconvolution.
    """
    a, b = _unit(trim(a)), _unit(trim(b))
    da, db = len(a) - 1, len(b) - 1
    if e == 0:
        return np.ones(1), a, b
    S = np.hstack([_conv_matrix(a, db - e + 1), -_conv_matrix(b, da - e + 1)])
    null = np.linalg.svd(S)[2][-1]
    v, u = null[:db - e + 1], null[db - e + 1:]
    M = np.vstack([_conv_matrix(u, e + 1), _conv_matrix(v, e + 1)])
    g = np.linalg.lstsq(M, np.concatenate([a, b]), rcond=None)[0]
    return g / g[-1], u, v


def poly_gcd(a, b, tol: float = GCD_TOL) -> np.ndarray:
    """Approximate monic gcd of two polynomials."""
    a, b = trim(_normalized(a)), trim(_normalized(b))
    if _is_zero(b):
        return a / a[-1]
    if _is_zero(a):
        return b / b[-1]
    return cofactors(a, b, gcd_degree(a, b, tol))[0]


def exact_div(a, b) -> np.ndarray:
    """Quotient of a by b, discarding the (assumed negligible) remainder."""
    return npoly.polydiv(trim(a), trim(b))[0]


def squarefree_chain(p, tol: float = GCD_TOL) -> list[np.ndarray]:
    """Square-free polynomials ``s_1, s_2, ...`` whose roots are the roots of
    ``p`` of multiplicity at least 1, 2, ...

    With g_0 = p and g_j = gcd(g_{j-1}, g_{j-1}'), s_j = g_{j-1} / g_j.
    """
    g = trim(_normalized(p))
    out = []
    while len(g) > 1:
        dg = npoly.polyder(g)
        e = gcd_degree(g, dg, tol)
        nxt, s, _ = cofactors(g, dg, e)
        out.append(trim(s / s[-1]))
        g = nxt
    return out


def squarefree_decomposition(p, tol: float = GCD_TOL) -> list[tuple[np.ndarray, int]]:
    """Factors ``(f_m, m)`` with p ~ c * prod f_m**m.

    Only factors of positive degree are returned; each is monic and
    square-free.
    """
    chain = squarefree_chain(p, tol)
    out = []
    for m, s in enumerate(chain, start=1):
        nxt = chain[m] if m < len(chain) else np.ones(1)
        f = exact_div(s, nxt)
        if len(f) > 1:
            out.append((f / f[-1], m))
    return out


def sturm_sequence(f, tol: float = GCD_TOL) -> list[np.ndarray]:
    f = trim(_normalized(f))
    seq = [f, trim(_normalized(npoly.polyder(f)))]
    while len(seq[-1]) > 1:
        quo, rem = npoly.polydiv(seq[-2], seq[-1])
        scale = max(1.0, float(np.max(np.abs(quo))))
        rem = trim(-rem, tol * scale * 1e-3)
        if _is_zero(rem, tol * scale * 1e-3):
            break
        seq.append(trim(_normalized(rem)))
    return seq


def sign_variations(seq: Iterable[np.ndarray], x: float) -> int:
    signs = [s for s in (np.sign(npoly.polyval(x, c)) for c in seq) if s != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def root_bound(f) -> float:
    """Cauchy bound: all complex roots satisfy |z| < bound."""
    f = trim(f)
    return 1.0 + float(np.max(np.abs(f[:-1] / f[-1])))


@dataclass(frozen=True)
class RealRoot:
    location: float
    multiplicity: int
    enclosure: tuple[float, float]


def _split_point(f, a: float, b: float) -> float:
    for frac in (0.5, 0.4142135623730951, 0.5857864376269049, 0.3090169943749474):
        m = a + (b - a) * frac
        if npoly.polyval(m, f) != 0.0:
            return m
    return a + (b - a) * 0.5


def _refine(f, a: float, b: float, width: float) -> tuple[float, float]:
    """Shrink (a, b] around the single simple root of f it contains."""
    fa, fb = npoly.polyval(a, f), npoly.polyval(b, f)
    if fb == 0.0:
        return b, b
    sa = math.copysign(1.0, fa)
    if sa * fb > 0:
        # root numerically invisible to f's sign; keep the Sturm enclosure
        return a, b
    while b - a > max(width, 4 * np.spacing(max(abs(a), abs(b)))):
        m = 0.5 * (a + b)
        fm = npoly.polyval(m, f)
        if fm == 0.0:
            return m, m
        if math.copysign(1.0, fm) == sa:
            a = m
        else:
            b = m
    return a, b


def _isolate_squarefree(f, width: float, tol: float) -> list[tuple[float, float]]:
    seq = sturm_sequence(f, tol)
    bound = root_bound(seq[0])
    lo, hi = -bound, bound
    if npoly.polyval(lo, f) == 0.0:
        lo -= 1.0
    count = lambda a, b: sign_variations(seq, a) - sign_variations(seq, b)
    stack = [(lo, hi, count(lo, hi))]
    found = []
    while stack:
        a, b, c = stack.pop()
        if c <= 0:
            continue
        if c == 1:
            found.append(_refine(f, a, b, width))
            continue
        if b - a <= max(width, 4 * np.spacing(max(abs(a), abs(b)))):
            # cluster below resolution: report once
            found.append((a, b))
            continue
        m = _split_point(f, a, b)
        left = count(a, m)
        stack.append((m, b, c - left))
        stack.append((a, m, left))
    return sorted(found)


def _affine(c, h: float, rho: float) -> np.ndarray:
    """Coefficients of c(h + rho z), scaled to unit max norm."""
    q = npoly.Polynomial(c)(npoly.Polynomial([h, rho])).coef
    q = np.concatenate([q, np.zeros(len(c) - len(q))])
    return q / np.max(np.abs(q))


def charts(c) -> list[tuple[float, float]]:
    """Affine changes of variable x = h + rho z to try, in order.

    The identity comes first. Centering on the mean of the complex roots
    makes the Sylvester matrices far better conditioned when roots cluster
    away from the origin; the last chart also rescales by a root-radius
    estimate of the centered polynomial.
    """
    c = trim(c)
    d = len(c) - 1
    h = float(-c[d - 1] / (d * c[d]))
    q = _affine(c, h, 1.0)
    ratios = [abs(q[i] / q[d]) ** (1.0 / (d - i)) for i in range(d) if q[i] != 0.0]
    rho = max(ratios) if ratios else 1.0
    return [(0.0, 1.0), (h, 1.0), (h, float(rho))]


def _residual(c, r: float, m: int, dps: int = POLISH_DPS) -> float:
    """max over j < m of |c^(j)(r)| relative to the absolute-value bound."""
    worst = 0.0
    with mpmath.workdps(dps):
        d = [mpmath.mpf(float(v)) for v in c]
        x = mpmath.mpf(r)
        for _ in range(m):
            num = abs(mpmath.polyval(d[::-1], x))
            den = mpmath.fsum(abs(v) * abs(x) ** i for i, v in enumerate(d))
            if den:
                worst = max(worst, float(num / den))
            d = [i * v for i, v in enumerate(d)][1:]
    return worst


def _polish(p, m: int, lo: float, hi: float, width: float, dps: int = POLISH_DPS):
    """Bisect on p^(m-1), where a root of multiplicity m is simple.

    Evaluation runs in extended precision on the given coefficients; the
    result is None when p^(m-1) shows no sign change on [lo, hi].
    """
    with mpmath.workdps(dps):
        d = [mpmath.mpf(float(v)) for v in p]
        for _ in range(m - 1):
            d = [i * v for i, v in enumerate(d)][1:]
        d = d[::-1]
        f = lambda x: mpmath.polyval(d, mpmath.mpf(x))
        fa, fb = f(lo), f(hi)
        if fa == 0:
            return lo, lo
        if fb == 0:
            return hi, hi
        if mpmath.sign(fa) == mpmath.sign(fb):
            return None
        sa = mpmath.sign(fa)
        while hi - lo > max(width, 4 * np.spacing(max(abs(lo), abs(hi)))):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0:
                return mid, mid
            if mpmath.sign(fm) == sa:
                lo = mid
            else:
                hi = mid
        return lo, hi


def _roots_in_chart(c, h: float, rho: float, width: float, tol: float) -> list[RealRoot]:
    chain = squarefree_chain(_affine(c, h, rho), tol)
    to_x = lambda z: h + rho * z
    base = [(to_x(a), to_x(b)) for a, b in _isolate_squarefree(chain[0], width / rho, tol)]
    locs = np.array([0.5 * (a + b) for a, b in base])
    mult = np.ones(len(base), dtype=int)
    for s in chain[1:]:
        for a, b in _isolate_squarefree(s, width / rho, tol):
            mult[int(np.argmin(np.abs(locs - to_x(0.5 * (a + b)))))] += 1
    gaps = np.diff(locs)
    roots = []
    for i, ((a, b), r, m) in enumerate(zip(base, locs, mult)):
        reach = 1e-6 * max(1.0, abs(r))
        if i > 0:
            reach = min(reach, 0.25 * gaps[i - 1])
        if i < len(gaps):
            reach = min(reach, 0.25 * gaps[i])
        enc = _polish(c, int(m), min(a, r - reach), max(b, r + reach), width)
        if enc is None:
            enc = (a, b)
        roots.append(RealRoot(0.5 * (enc[0] + enc[1]), int(m), enc))
    return roots


def isolate_roots(p, window: tuple[float, float] | None = None, width: float = ROOT_WIDTH,
                  tol: float = GCD_TOL, zero_tol: float = ZERO_TOL) -> list[RealRoot]:
    """All distinct real roots of ``p`` with multiplicities and enclosures.

    The roots of each square-free part ``s_j`` (roots of multiplicity at
    least j) are isolated with Sturm sequences. Every root of ``s_j``
    raises the multiplicity of the nearest distinct root by one. Locations
    are then refined by bisection on p^(m-1), where a root of
    multiplicity m is simple, until the enclosure is at most ``width``
    wide. The gcd rank decisions depend on the chart, so the result of
    each chart in :func:`charts` is checked in extended precision: every
    reported root must annihilate p, ..., p^(m-1) up to ``VALID_TOL``.
    The first chart passing the check wins.

    ``window=(lo, hi)`` restricts the result to roots inside the closed
    window; ``None`` means the whole line.
    """
    c = np.atleast_1d(np.asarray(p, dtype=float))
    if _is_zero(c, zero_tol):
        raise IdenticallyZero("cannot isolate the roots of the zero polynomial")
    c = trim(c, zero_tol * np.max(np.abs(c)))
    if len(c) < 2:
        return []
    roots = None
    for h, rho in charts(c):
        roots = _roots_in_chart(c, h, rho, width, tol)
        if all(_residual(c, r.location, r.multiplicity) <= VALID_TOL for r in roots):
            break
    if window is not None:
        lo, hi = window
        roots = [r for r in roots if lo <= r.location <= hi]
    return roots
