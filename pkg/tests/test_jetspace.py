import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetflow.errors import TooFewSamples
from jetflow.jetspace import (CotangentState, JetPoint, JetPointU, frame, horizontality_residual,
                              momentum_functions, sr_speed, theta_from_u, u_from_theta)


def test_theta_from_u_examples():
    # u is indexed by jet order: u[0] = u_0, u[1] = u_1
    q = theta_from_u(JetPointU(2.0, [[1.0], [3.0]]))
    np.testing.assert_allclose(q.theta[:, 0], [3.0, 5.0])
    u = np.arange(1.0, 5.0).reshape(4, 1)
    q = theta_from_u(JetPointU(0.0, u))
    np.testing.assert_allclose(q.theta[:, 0], [(-1) ** i * u[3 - i, 0] for i in range(4)])
    q = theta_from_u(JetPointU(1.7, [[0.3, -0.2]]))
    np.testing.assert_allclose(q.theta, [[0.3, -0.2]])


def test_u_from_theta_examples():
    back = u_from_theta(JetPoint(2.0, [[3.0], [5.0]]))
    np.testing.assert_allclose(back.u[:, 0], [1.0, 3.0])
    theta = np.array([[1.0], [2.0], [-4.0]])
    back = u_from_theta(JetPoint(0.0, theta))
    np.testing.assert_allclose(back.u[:, 0], [(-1) ** (2 - i) * theta[2 - i, 0] for i in range(3)])


def test_round_trip_random_points(rng):
    worst = 0.0
    for _ in range(1000):
        k, n = int(rng.integers(0, 6)), int(rng.integers(1, 4))
        q = JetPointU(rng.uniform(-2, 2), rng.uniform(-1, 1, size=(k + 1, n)))
        back = u_from_theta(theta_from_u(q))
        worst = max(worst, float(np.max(np.abs(back.u - q.u))))
        th = JetPoint(q.x, rng.uniform(-1, 1, size=(k + 1, n)))
        again = theta_from_u(u_from_theta(th))
        worst = max(worst, float(np.max(np.abs(again.theta - th.theta))))
    assert worst <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.integers(0, 4))
def test_inverse_is_triangular_solve(x, k):
    # theta_i only sees u_k, ..., u_{k-i}
    u = np.zeros((k + 1, 1))
    u[0, 0] = 1.0
    th = theta_from_u(JetPointU(x, u)).theta
    assert np.all(th[:k, 0] == 0.0)


def test_json_round_trip():
    q = JetPoint(0.25, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    d = q.to_dict()
    assert d["theta"] == [[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]]
    back = JetPoint.from_dict(d)
    assert back.x == q.x and np.array_equal(back.theta, q.theta)
    u = JetPointU(1.0, [[1.0], [2.0]])
    assert JetPointU.from_dict(u.to_dict()).u.tolist() == u.u.tolist()


def test_frame_examples():
    x0, xj = frame(JetPoint(0.0, np.zeros((3, 2))))
    assert x0[0] == 1.0 and np.all(x0[1:] == 0)
    block = xj[1, 1:].reshape(3, 2)
    np.testing.assert_array_equal(block[:, 1], [1, 0, 0])
    assert np.all(block[:, 0] == 0)
    _, xj = frame(JetPoint(1.0, np.zeros((3, 1))))
    np.testing.assert_allclose(xj[0, 1:], [1.0, 1.0, 0.5])
    assert xj[0, 0] == 0.0
    a, _ = frame(JetPoint(5.0, np.ones((3, 1))))
    np.testing.assert_array_equal(a, x0[: len(a)])


def test_momentum_examples():
    s = CotangentState(JetPoint(0.5, np.zeros((2, 1))), 0.3, [[0.0], [1.0]])
    P0, P = momentum_functions(s)
    assert P0 == 0.3
    np.testing.assert_allclose(P[:, 0], [0.5, 1.0])
    p = np.arange(6.0).reshape(3, 2)
    _, P = momentum_functions(CotangentState(JetPoint(0.0, np.zeros((3, 2))), 0.0, p))
    np.testing.assert_array_equal(P, p)


def test_momentum_matches_derivatives_of_polynomial(rng):
    # with p_theta[i] = i! a_i the momenta are the derivatives of F at x
    from jetflow import PolyVec
    for _ in range(20):
        k, n = int(rng.integers(0, 5)), int(rng.integers(1, 4))
        F = PolyVec(rng.uniform(-1, 1, size=(n, k + 1)))
        p = np.array([[math.factorial(i) * F.coeffs[j, i] for j in range(n)] for i in range(k + 1)])
        x = rng.uniform(-2, 2)
        _, P = momentum_functions(CotangentState(JetPoint(x, np.zeros((k + 1, n))), 0.0, p))
        for i in range(k + 1):
            np.testing.assert_allclose(P[i], F.derivative(i).eval(x), atol=1e-12)


def _harmonic_u(t):
    # lift of x = sin t for F = (x), k = 1: theta_0 = 1 - cos t, theta_1 = t/2 - sin 2t / 4
    x = np.sin(t)
    theta = np.stack([1 - np.cos(t), t / 2 - np.sin(2 * t) / 4], axis=1)[:, :, None]
    u = np.array([u_from_theta(JetPoint(xi, th)).u for xi, th in zip(x, theta)])
    return x, u


def test_horizontality_converges_on_lifted_geodesic():
    res = []
    for m in (100, 200, 400, 800):
        t = np.linspace(0, 2 * math.pi, m + 1)
        x, u = _harmonic_u(t)
        res.append(horizontality_residual(t, x, u))
    rates = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert res[-1] < 1e-4
    assert min(rates) >= 1.9


def test_horizontality_detects_non_horizontal_line():
    t = np.linspace(0, 1, 201)
    x = t.copy()
    u = np.stack([t, np.full_like(t, 5.0)], axis=1)[:, :, None]  # du_0/dx = 1 but u_1 = 5
    assert horizontality_residual(t, x, u) == pytest.approx(4.0)


def test_horizontality_constant_and_errors():
    t = np.array([0.0, 0.5, 1.0, 2.0])
    u = np.ones((4, 3, 2))
    assert horizontality_residual(t, np.full(4, 0.7), u) <= 1e-15
    with pytest.raises(TooFewSamples):
        horizontality_residual(t[:2], t[:2], u[:2])


def test_frame_form_of_horizontal_velocity():
    # theta_i' = x^i/i! theta_0' along a horizontal curve
    t = np.linspace(0, 2 * math.pi, 4001)
    x = np.sin(t)
    theta = np.stack([1 - np.cos(t), t / 2 - np.sin(2 * t) / 4], axis=1)
    d = np.gradient(theta, t, axis=0)
    assert np.max(np.abs(d[1:-1, 1] - x[1:-1] * d[1:-1, 0])) < 1e-5


def test_sr_speed_examples():
    assert sr_speed(1.0, [0.0, 0.0]) == 1.0
    assert sr_speed(0.0, [1.0, 0.0]) == 1.0
    for a in np.linspace(0, 2 * math.pi, 7):
        assert sr_speed(math.cos(a), [math.sin(a)]) == pytest.approx(1.0, abs=1e-15)
