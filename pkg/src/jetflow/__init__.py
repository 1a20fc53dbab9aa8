"""Sub-Riemannian geodesics of the jet space J^k(R, R^n).

Geodesics are built from a polynomial vector F of degree <= k and a Hill
interval I; the package integrates them, computes their x-periods and
holonomy, classifies them, and certifies that none is periodic.
"""
from .analysis import (Certificate, GeodesicClass, Kind, Verdict, certify_not_periodic, classify,
                       periodicity_residual, random_pair)
from .dynamics import (FullPath, ReducedPath, ReducedState, Trajectory, arclength_defect,
                       cotangent_from_pair, integrate_full, integrate_reduced, lift, synthesize)
from .jetspace import (CotangentState, JetPoint, JetPointU, frame, horizontality_residual,
                       momentum_functions, sr_speed, theta_from_u, u_from_theta)
from .periods import (Endpoint, GramMatrix, HillInterval, PeriodData, deflate, delta_theta, gram,
                      hill_intervals, inner_product, period_L)
from .polyvec import PolyVec, RealRoot, isolate_roots, sq_norm_poly

__version__ = "0.1.0"
SCHEMA_VERSION = "1"
