"""Derivative complex Ginzburg-Landau dynamics:

    du/dt = (eps + i) Lap(u) + J(u),
    J = J1 + J2 + J3,
    J1 = -(1+i)(v.grad)u,
    J2 = -2(eps+i) conj(u) (grad u)^2 / (1+|u|^2),
    J3 = -(Im F - i Re H) / (1+|u|^2),
    H  = 4 (v.grad)u (conj(u)^2 + |u|^2) / (1+|u|^2),
    F  = 2 (1+conj(u)^2)(1-|u|^2) (v.grad)X / (1+|u|^2),

with X = u under the "section4" convention and X = conj(u) under
"section1" (the source text displays both; neither is reconciled there,
so both are selectable).  A third convention, "geometric", drops J3
entirely: direct computation shows the stereographically projected
Landau-Lifshitz flow satisfies the equation with J = J1 + J2 exactly,
which is what the residual certification uses by default.

(grad u)^2 means sum_i (du/dx_i)^2 -- the complex square, not a modulus.
1/(1+|u|^2) is always evaluated pointwise, never by series.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .core import (
    PHYSICAL,
    ComplexField,
    SpaceTimeField,
)
from .errors import BlowupError, GridMismatchError, ResolutionError, UnsupportedExponentError

CONVENTIONS = ("section4", "section1", "geometric")
DEFAULT_BLOWUP_CAP = 10.0
MARCH_SCHEMES = ("etd1", "etd_rk2")


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def gl_nonlinearity(u, grad_u, v, eps, convention="section4", t=0.0):
    """Pointwise nonlinearity J(u) from a field and its (consistent) gradient.

    v may be None (treated as zero current); time-dependent currents are
    sampled with zero-order hold at t.
    """
    _check_convention(convention)
    grid = u.grid
    uv = u.in_physical().values
    grads = [g.in_physical().values for g in grad_u]
    if len(grads) != grid.dim:
        raise ValueError(f"grad_u must have {grid.dim} components")
    rho = 1.0 + np.abs(uv) ** 2
    grad_sq = sum(g * g for g in grads)
    out = -2.0 * (eps + 1j) * np.conj(uv) * grad_sq / rho
    if v is not None and not v.is_zero:
        if v.grid != grid:
            raise GridMismatchError("current field grid mismatch")
        vs = v.at_time(t)
        v_dot_grad_u = sum(vs[i] * grads[i] for i in range(grid.dim))
        out -= (1.0 + 1.0j) * v_dot_grad_u
        if convention != "geometric":
            if convention == "section4":
                v_dot_grad_x = v_dot_grad_u
            else:  # section1: gradient acts on the conjugate
                v_dot_grad_x = np.conj(v_dot_grad_u)
            cu2 = np.conj(uv) ** 2
            f_term = 2.0 * (1.0 + cu2) * (1.0 - np.abs(uv) ** 2) * v_dot_grad_x / rho
            h_term = 4.0 * v_dot_grad_u * (cu2 + np.abs(uv) ** 2) / rho
            out -= (f_term.imag - 1j * h_term.real) / rho
    return ComplexField(grid, out, PHYSICAL)


def _nonlinearity_stack(values, grid, v, eps, convention, t):
    """J(u) on a raw physical array, with 2/3-dealiased u and grad-u factors."""
    hat = np.fft.fftn(values, norm="ortho")
    keep = grid.dealias_keep & grid.non_nyquist
    ud = ComplexField(grid, np.fft.ifftn(hat * keep, norm="ortho"), PHYSICAL)
    grads = [
        ComplexField(
            grid, np.fft.ifftn(hat * (1j * grid.xi[ax]) * keep, norm="ortho"), PHYSICAL
        )
        for ax in range(grid.dim)
    ]
    return gl_nonlinearity(ud, grads, v, eps, convention=convention, t=t).values


def evaluate_nonlinearity(u, v, eps, convention="section4", t=0.0):
    """J(u) with the package-standard dealiased spectral gradients."""
    vals = _nonlinearity_stack(u.in_physical().values, u.grid, v, eps, convention, t)
    return ComplexField(u.grid, vals, PHYSICAL)


# ---------------------------------------------------------------------------
# residual operators


def _residual(traj, v, eps, convention, sign):
    if traj.num_slices < 3:
        raise ResolutionError("residual needs >= 3 slices for centered differencing")
    grid = traj.grid
    vals = traj.values
    dtdt = 2.0 * traj.dt
    dudt = (vals[2:] - vals[:-2]) / dtdt
    times = traj.times()
    rhs = np.empty_like(dudt)
    lap_mult = -grid.xi_sq_sum * grid.non_nyquist
    for j in range(1, traj.num_slices - 1):
        hat = np.fft.fftn(vals[j], norm="ortho")
        lap = np.fft.ifftn(hat * lap_mult, norm="ortho")
        nl = _nonlinearity_stack(vals[j], grid, v, eps, convention, times[j])
        rhs[j - 1] = sign * ((eps + 1j) * lap + nl)
    num = np.linalg.norm((dudt - rhs).ravel())
    den = np.linalg.norm(dudt.ravel())
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(num / den)


def gl_residual(traj, v, eps, convention="geometric", direction="forward"):
    """Relative space-time L2 residual of the trajectory against the GL
    equation.  direction="forward" checks du/dt = (eps+i)Lap u + J(u);
    "reversed" checks the all-signs-flipped equation (equivalently, apply
    time_reverse first and check forward)."""
    if direction not in ("forward", "reversed"):
        raise ValueError(f"direction must be 'forward' or 'reversed', got {direction!r}")
    return _residual(traj, v, eps, convention, +1.0 if direction == "forward" else -1.0)


def gl_residual_preflip(traj, v, eps, convention="geometric"):
    """Certify that a pointwise-projected LLS trajectory solves the
    transformed equation in its own (forward) time variable.

    The default "geometric" convention is the exact image of the LLS flow
    under the chart; the section1/section4 conventions add the displayed
    current-coupling correction, which is cubic-small.
    """
    return gl_residual(traj, v, eps, convention=convention, direction="forward")


# ---------------------------------------------------------------------------
# exponential time differencing march


def _phi1(z):
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs ** 2 / 6.0 + zs ** 3 / 24.0
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _phi2(z):
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs ** 2 / 24.0 + zs ** 3 / 120.0
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl ** 2
    return out


def gl_march(
    u0,
    v,
    eps,
    dt,
    t_end,
    scheme="etd_rk2",
    convention="section4",
    blowup_cap=DEFAULT_BLOWUP_CAP,
    store_every=1,
):
    """Integrate the forward GL equation by exponential time differencing.

    The linear semigroup is applied exactly as a spectral multiplier; the
    nonlinearity uses the selected ETD order.  Aborts with BlowupError when
    sup|u| crosses blowup_cap (expected for large data).
    """
    if scheme not in MARCH_SCHEMES:
        raise ValueError(f"scheme must be one of {MARCH_SCHEMES}, got {scheme!r}")
    _check_convention(convention)
    grid = u0.grid
    num_steps = int(round(t_end / dt))
    if num_steps < 1 or abs(num_steps * dt - t_end) > 1e-9 * max(t_end, dt):
        raise ValueError(f"t_end = {t_end!r} must be a positive multiple of dt = {dt!r}")
    if num_steps % store_every != 0:
        raise ValueError("store_every must divide the step count")

    z = -(eps + 1j) * dt * grid.xi_sq_sum
    exp_full = np.exp(z)
    f1 = dt * _phi1(z)
    f2 = dt * _phi2(z)

    u = u0.in_physical().values.copy()
    stored = [u.copy()]
    t = 0.0
    for step in range(1, num_steps + 1):
        n0 = _nonlinearity_stack(u, grid, v, eps, convention, t)
        uh = np.fft.fftn(u, norm="ortho")
        n0h = np.fft.fftn(n0, norm="ortho")
        ah = exp_full * uh + f1 * n0h
        if scheme == "etd_rk2":
            a = np.fft.ifftn(ah, norm="ortho")
            n1 = _nonlinearity_stack(a, grid, v, eps, convention, t + dt)
            n1h = np.fft.fftn(n1, norm="ortho")
            ah = ah + f2 * (n1h - n0h)
        u = np.fft.ifftn(ah, norm="ortho")
        t = step * dt
        sup = float(np.max(np.abs(u)))
        if not np.isfinite(sup) or sup > blowup_cap:
            raise BlowupError(
                f"sup|u| = {sup:.3e} exceeded blow-up cap {blowup_cap:g} at t = {t:g}",
                time=t,
                sup_norm=sup,
            )
        if step % store_every == 0:
            stored.append(u.copy())
    return SpaceTimeField(grid, dt * store_every, np.stack(stored))


# ---------------------------------------------------------------------------
# Duhamel map and Picard iteration


def semigroup_trajectory(u0, eps, dt, num_slices):
    """Free evolution e^{(eps+i)t Lap} u0 sampled at 0, dt, ..., (T-1) dt."""
    grid = u0.grid
    step = np.exp(-(eps + 1j) * dt * grid.xi_sq_sum)
    hat = u0.in_spectral().values.copy()
    out = [np.fft.ifftn(hat, norm="ortho")]
    for _ in range(num_slices - 1):
        hat = hat * step
        out.append(np.fft.ifftn(hat, norm="ortho"))
    return SpaceTimeField(grid, dt, np.stack(out))


def _duhamel_prefix(source_hats, step_mult, dt):
    """Trapezoid Duhamel integrals I_m = int_0^{t_m} e^{(t_m - s)L} J(s) ds."""
    out = [np.zeros_like(source_hats[0])]
    acc = out[0]
    for m in range(1, len(source_hats)):
        acc = step_mult * acc + 0.5 * dt * (step_mult * source_hats[m - 1] + source_hats[m])
        out.append(acc)
    return out


def duhamel_solve(u0, source, eps):
    """Solve du/dt - (eps+i)Lap u = J for a given sampled source by the
    exact semigroup plus trapezoid quadrature (the march with the cubic
    terms disabled)."""
    grid = u0.grid
    if source.grid != grid:
        raise GridMismatchError("source grid mismatch")
    dt = source.dt
    step = np.exp(-(eps + 1j) * dt * grid.xi_sq_sum)
    hats = [np.fft.fftn(source.values[j], norm="ortho") for j in range(source.num_slices)]
    integrals = _duhamel_prefix(hats, step, dt)
    free = u0.in_spectral().values
    out = []
    acc = free.copy()
    for m in range(source.num_slices):
        if m > 0:
            acc = acc * step
        out.append(np.fft.ifftn(acc + integrals[m], norm="ortho"))
    return SpaceTimeField(grid, dt, np.stack(out))


def picard_map(u_traj, u0, v, eps, convention="section4"):
    """One application of the Duhamel solution map

        Psi_{u0}(u)(t) = e^{(eps+i)t Lap} u0 + int_0^t e^{(eps+i)(t-s) Lap} J(u(s)) ds

    sampled at the trajectory's own times; Psi(u)(0) = u0 exactly."""
    _check_convention(convention)
    grid = u_traj.grid
    if u0.grid != grid:
        raise GridMismatchError("u0 grid mismatch")
    times = u_traj.times()
    sources = np.stack(
        [
            _nonlinearity_stack(u_traj.values[j], grid, v, eps, convention, times[j])
            for j in range(u_traj.num_slices)
        ]
    )
    return duhamel_solve(u0, SpaceTimeField(grid, u_traj.dt, sources), eps)


@dataclass
class PicardReport:
    """Convergence record of the fixed-point iteration."""

    iterate_count: int
    converged: bool
    diff_fz: list = field(default_factory=list)
    diff_linf_l2: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    tracked_norm: str = "fz"
    tolerance: float = 0.0
    convention: str = "section4"
    notes: str = ""

    def to_dict(self):
        return {
            "iterate_count": self.iterate_count,
            "converged": self.converged,
            "diff_fz": self.diff_fz,
            "diff_linf_l2": self.diff_linf_l2,
            "ratios": self.ratios,
            "tracked_norm": self.tracked_norm,
            "tolerance": self.tolerance,
            "convention": self.convention,
            "notes": self.notes,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _tracked_norms(diff_traj, s):
    """(approximate F^s cap Z^s, L^inf_t L^2_x) of a difference trajectory;
    falls back to the mixed norm alone when the dyadic norm is out of reach."""
    from .dyadic import fz_norm, norm_mixed

    d_l2 = norm_mixed(diff_traj, np.inf, 2)
    try:
        d_fz = fz_norm(diff_traj, s)
        tracked = "fz"
    except (ResolutionError, UnsupportedExponentError):
        d_fz = d_l2
        tracked = "linf_l2"
    return d_fz, d_l2, tracked


def picard_solve(
    u0,
    v,
    eps,
    dt,
    t_end,
    max_iters=12,
    tol=1e-12,
    convention="section4",
):
    """Iterate the Duhamel map from the free evolution until the tracked
    difference norm drops below tol or divergence is detected.

    Divergence (tracked ratio >= 1 three times in a row, or a non-finite
    norm) is reported through converged=False, never an exception: it is
    data for the smallness sweep.
    """
    _check_convention(convention)
    grid = u0.grid
    num_slices = int(round(t_end / dt)) + 1
    if num_slices < 2:
        raise ValueError("window must contain at least one step")
    s = grid.dim / 2.0
    current = semigroup_trajectory(u0, eps, dt, num_slices)
    report = PicardReport(
        iterate_count=0,
        converged=False,
        tolerance=tol,
        convention=convention,
    )
    bad_streak = 0
    for _ in range(max_iters):
        candidate = picard_map(current, u0, v, eps, convention=convention)
        diff = SpaceTimeField(grid, dt, candidate.values - current.values)
        d_fz, d_l2, tracked = _tracked_norms(diff, s)
        report.tracked_norm = tracked
        report.iterate_count += 1
        report.diff_fz.append(d_fz)
        report.diff_linf_l2.append(d_l2)
        if len(report.diff_fz) >= 2:
            prev = report.diff_fz[-2]
            report.ratios.append(d_fz / prev if prev > 0 else 0.0)
        current = candidate
        if not np.isfinite(d_fz) or not np.isfinite(d_l2):
            report.notes = "non-finite difference norm"
            return current, report
        if d_fz < tol:
            report.converged = True
            return current, report
        if report.ratios and report.ratios[-1] >= 1.0:
            bad_streak += 1
            if bad_streak >= 3:
                report.notes = "ratios >= 1 for 3 consecutive iterations"
                return current, report
        else:
            bad_streak = 0
    report.notes = "max_iters reached"
    return current, report
