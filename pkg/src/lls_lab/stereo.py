"""Stereographic projection between sphere-valued magnetization and the
complex Ginzburg-Landau variable.

Chart: u = (m1 + i m2) / (1 + m3), undefined at the south pole (0,0,-1).
Inverse: m = ((u+conj(u))/(1+|u|^2), -i(u-conj(u))/(1+|u|^2), (1-|u|^2)/(1+|u|^2)).
"""

import numpy as np

from .core import PHYSICAL, ComplexField, MagnetizationField
from .errors import PoleProximityError, SphereViolationError

DEFAULT_POLE_GUARD = 1e-3


def project(m, pole_guard=DEFAULT_POLE_GUARD):
    """Map a magnetization field to the complex chart variable.

    The field is renormalized to exact unit length pointwise before the
    formula is applied (removes O(sphere_tol) bias).  Raises
    PoleProximityError naming the worst grid point if 1 + m3 drops below
    pole_guard: the chart Jacobian blows up like 1/(1+m3) there.
    """
    dev = m.sphere_deviation()
    if dev > m.sphere_tol:
        raise SphereViolationError(
            f"|m| deviates from 1 by {dev:.3e} > sphere_tol {m.sphere_tol:.1e}"
        )
    vals = m.values / m.norms()
    denom = 1.0 + vals[2]
    worst_flat = int(np.argmin(denom))
    worst = float(denom.ravel()[worst_flat])
    if worst < pole_guard:
        idx = np.unravel_index(worst_flat, m.grid.shape)
        raise PoleProximityError(
            f"1 + m3 = {worst:.3e} < pole_guard {pole_guard:.1e} at grid point {idx}",
            worst_index=idx,
            worst_value=worst,
        )
    u = (vals[0] + 1j * vals[1]) / denom
    return ComplexField(m.grid, u, PHYSICAL)


def unproject(u):
    """Inverse stereographic map; total, and lands on the unit sphere
    to rounding for any input."""
    vals = u.in_physical().values
    rho = 1.0 + np.abs(vals) ** 2
    m = np.stack(
        [
            2.0 * vals.real / rho,
            2.0 * vals.imag / rho,
            (2.0 - rho) / rho,  # (1 - |u|^2) / (1 + |u|^2)
        ]
    )
    return MagnetizationField(u.grid, m, check=False)


def project_trajectory(states, pole_guard=DEFAULT_POLE_GUARD):
    """Project a list of LLS states into a SpaceTimeField of chart values."""
    from .core import SpaceTimeField

    if len(states) < 2:
        raise ValueError("need at least two states to form a trajectory")
    dt = states[1].time - states[0].time
    slices = [project(s.m, pole_guard=pole_guard) for s in states]
    return SpaceTimeField.from_slices(slices, dt, t0=states[0].time)
