"""Independent oracles shared by the unit and acceptance tests."""
from fractions import Fraction

import numpy as np
import sympy


def dyadic_poly(rng):
    """Exactly representable polynomial with known roots, degree <= 8."""
    x = sympy.symbols("x")
    grid = [sympy.Rational(m, 8) for m in range(-24, 25)]
    picks = rng.choice(len(grid), size=rng.integers(0, 5), replace=False)
    expr = sympy.Integer(int(rng.choice([-2, -1, 1, 2])))
    degree = 0
    for idx in picks:
        m = int(rng.integers(1, 4))
        if degree + m > 8:
            break
        expr *= (x - grid[idx]) ** m
        degree += m
    if degree <= 6 and rng.random() < 0.5:
        expr *= x**2 + sympy.Rational(int(rng.integers(-4, 5)), 4) * x + 2
        degree += 2
    if degree == 0:
        expr *= x - grid[int(rng.integers(len(grid)))]
    return x, sympy.expand(expr)


def coefficients(x, expr):
    """Ascending float coefficients (exact for dyadic input)."""
    return np.array([float(v) for v in reversed(sympy.Poly(expr, x).all_coeffs())])


def exact_roots(x, expr):
    """Sorted (location, multiplicity) from sympy's exact square-free decomposition."""
    out = []
    for f, m in sympy.sqf_list(expr)[1]:
        for (lo, hi), _ in sympy.Poly(f, x).intervals(eps=sympy.Rational(1, 10**13)):
            out.append((float((lo + hi) / 2), m))
    return sorted(out)


def sign_change_cells(c, lo, hi, points=10_001, offset=1.234e-5):
    """Grid cells [g_i, g_{i+1}] over which the polynomial changes sign.

    Samples whose floating-point value is within the rounding bound are
    re-evaluated exactly, so flat multiple roots do not produce noise crossings.
    """
    grid = np.linspace(lo, hi, points) + offset
    vals = np.polynomial.polynomial.polyval(grid, c)
    bound = 4 * len(c) * np.finfo(float).eps * np.polynomial.polynomial.polyval(np.abs(grid), np.abs(c))
    signs = np.sign(vals)
    exact = [Fraction(float(ci)) for ci in c]
    for i in np.nonzero(np.abs(vals) <= bound)[0]:
        g, acc = Fraction(float(grid[i])), Fraction(0)
        for ci in reversed(exact):
            acc = acc * g + ci
        signs[i] = (acc > 0) - (acc < 0)
    idx = np.nonzero(signs[:-1] != signs[1:])[0]
    return [(grid[i], grid[i + 1]) for i in idx]
