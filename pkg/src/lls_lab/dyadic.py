"""Littlewood-Paley / modulation projectors and the dyadic function-space norms.

Numerical conventions (recorded in every NormReport):

* Shell sums run over the grid's resolvable dyadic range only.
* Space-time (modulation) quantities are computed on a time-tapered copy
  of the trajectory (smooth cosine ramp over the outer 10% of each end of
  the window) with uniform-in-time quadrature; trajectories are not
  time-periodic, so the taper stands in for the extension-by-zero of the
  "+" spaces.
* Modulation shells below the tau-resolution floor are lumped into one
  bottom shell so the family still sums to one on all of (tau, xi).
* The split infima inside the Y_k and N_k norms are replaced by the
  minimum over pure assignments (all mass to one summand), a certified
  upper bound; the winning slot is recorded.
* The directional projector P_{k,e_i} multiplies by the widened shell
  chi~_k (half-width 9n shells) in the single coordinate xi_i.
* Intersection norms (F cap Z) are evaluated as the sum of the two norms.
"""

import json
import warnings

import numpy as np

from .core import PHYSICAL, ComplexField, SpaceTimeField
from .errors import ResolutionError, UnsupportedExponentError

INNER_RADIUS = 1.25  # 5/4
OUTER_RADIUS = 1.6   # 8/5
TAPER_FRACTION = 0.1
DIRECTIONAL_WINDOW = 20  # sup over |j - k| <= 20 in the F_k norm


class BumpProfile:
    """Smooth radial bump: 1 on r <= 5/4, 0 on r >= 8/5, monotone between.

    Transition uses the standard glue g(s) = exp(-1/s), normalized so the
    band argument runs over order one.
    """

    def __init__(self, sharpness=1.0 / (OUTER_RADIUS - INNER_RADIUS)):
        self.sharpness = sharpness

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=np.float64))
        out = np.zeros_like(r)
        out[r <= INNER_RADIUS] = 1.0
        band = (r > INNER_RADIUS) & (r < OUTER_RADIUS)
        if np.any(band):
            rb = r[band]
            with np.errstate(over="ignore", under="ignore"):
                ga = _glue((OUTER_RADIUS - rb) * self.sharpness)
                gb = _glue((rb - INNER_RADIUS) * self.sharpness)
                out[band] = ga / (ga + gb)
        return out if out.shape else float(out)


def _glue(s):
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


_ETA = BumpProfile()


def chi_shell(r, k):
    """chi_k(r) = eta(|r|/2^k) - eta(|r|/2^(k-1))."""
    return _ETA(np.abs(r) / 2.0 ** k) - _ETA(np.abs(r) / 2.0 ** (k - 1))


def chi_leq(r, k):
    return _ETA(np.abs(r) / 2.0 ** k)


def chi_shell_widened(r, k, half_width):
    """Widened shell sum_{l=-w}^{w} chi_{k+l}, telescoped."""
    return chi_leq(r, k + half_width) - chi_leq(r, k - half_width - 1)


def resolvable_shells(grid):
    """Dyadic shells k with nonzero support on the grid's nonzero modes."""
    xi = grid.abs_xi[grid.abs_xi > 0]
    if xi.size == 0:
        return []
    lo = int(np.floor(np.log2(xi.min()))) - 1
    hi = int(np.ceil(np.log2(xi.max()))) + 1
    return [k for k in range(lo, hi + 1) if np.max(chi_shell(xi, k)) > 1e-12]


def resolvable_axis_shells(grid, axis):
    xi = np.abs(grid.xi[axis]).ravel()
    xi = xi[xi > 0]
    lo = int(np.floor(np.log2(xi.min()))) - 1
    hi = int(np.ceil(np.log2(xi.max()))) + 1
    return [k for k in range(lo, hi + 1) if np.max(chi_shell(xi, k)) > 1e-12]


# ---------------------------------------------------------------------------
# projectors


def _project_values(values, grid, multiplier, spatial_axes):
    fh = np.fft.fftn(values, axes=spatial_axes, norm="ortho")
    fh *= multiplier
    return np.fft.ifftn(fh, axes=spatial_axes, norm="ortho")


def lp_project(field, k):
    """Littlewood-Paley shell projector P_k (spatial frequencies |xi| ~ 2^k).

    Accepts a ComplexField or a SpaceTimeField (applied slice-wise).
    Out-of-range k returns the zero field with a warning.
    """
    grid = field.grid
    shells = resolvable_shells(grid)
    mult = chi_shell(grid.abs_xi, k)
    if shells and not (shells[0] <= k <= shells[-1]):
        warnings.warn(f"shell k={k} outside resolvable range [{shells[0]}, {shells[-1]}]")
        mult = np.zeros_like(mult)
    return _apply_spatial_multiplier(field, mult)


def lp_project_leq(field, k):
    """Low-pass projector P_{<=k}, multiplier eta(|xi|/2^k)."""
    return _apply_spatial_multiplier(field, chi_leq(field.grid.abs_xi, k))


def lp_project_directional(field, k, axis, half_width=None):
    """Directional projector: widened shell multiplier in the single
    coordinate xi_axis (convention recorded in reports)."""
    grid = field.grid
    if not (0 <= axis < grid.dim):
        raise ValueError(f"axis {axis} out of range for dim {grid.dim}")
    if half_width is None:
        half_width = 9 * grid.dim
    mult = chi_shell_widened(grid.xi[axis], k, half_width)
    return _apply_spatial_multiplier(field, mult)


def _apply_spatial_multiplier(field, mult):
    grid = field.grid
    if isinstance(field, SpaceTimeField):
        axes = tuple(range(1, grid.dim + 1))
        vals = _project_values(field.values, grid, mult[np.newaxis], axes)
        return SpaceTimeField(grid, field.dt, vals, t0=field.t0)
    axes = tuple(range(grid.dim))
    if field.representation == PHYSICAL:
        vals = _project_values(field.values, grid, mult, axes)
        return ComplexField(grid, vals, PHYSICAL)
    return ComplexField(grid, field.values * mult, "spectral")


class DyadicDecomposition:
    """The family {P_k u} over the grid's resolvable shells."""

    def __init__(self, field):
        self.grid = field.grid
        self.shells = resolvable_shells(field.grid)
        self.pieces = {k: lp_project(field, k) for k in self.shells}

    def partition_defect(self, safe_only=True):
        """max |sum_k chi_k(xi) - 1| over nonzero resolved frequencies
        (restricted to the safely-covered annulus by default)."""
        xi = self.grid.abs_xi
        total = sum(chi_shell(xi, k) for k in self.shells)
        mask = xi > 0
        if safe_only:
            lo = OUTER_RADIUS * 2.0 ** (self.shells[0] - 1)
            hi = INNER_RADIUS * 2.0 ** self.shells[-1]
            mask &= (xi >= lo) & (xi <= hi)
        if not np.any(mask):
            return 0.0
        return float(np.max(np.abs(total[mask] - 1.0)))


# ---------------------------------------------------------------------------
# time taper and modulation analysis


def taper_weights(num_slices, fraction=TAPER_FRACTION):
    """Cosine ramp over the outer `fraction` of each end of the window."""
    t = np.arange(num_slices, dtype=np.float64)
    w = np.ones(num_slices)
    ramp = max(int(np.floor(fraction * num_slices)), 1)
    up = 0.5 * (1.0 - np.cos(np.pi * (t[: ramp + 1]) / ramp))
    w[: ramp + 1] = up
    w[-(ramp + 1):] = up[::-1]
    return w


TAU_FLOOR_FACTOR = 2.0  # tapering broadens the main lobe to ~2 bins


class ModulationContext:
    """Tapered space-time spectrum of a trajectory plus shell bookkeeping.

    s = tau + |xi|^2 measures distance from the free dispersion relation;
    shells below the tau resolution floor (one bin widened by the taper's
    main-lobe broadening) are lumped into the bottom shell.
    """

    def __init__(self, traj, taper_fraction=TAPER_FRACTION, precomputed_hat=None):
        if traj.num_slices < 8:
            raise ResolutionError(
                f"modulation analysis needs >= 8 time slices, got {traj.num_slices}"
            )
        grid = traj.grid
        self.traj = traj
        self.grid = grid
        self.taper = taper_weights(traj.num_slices, taper_fraction)
        if precomputed_hat is not None:
            self.hat = precomputed_hat
        else:
            shaped = self.taper.reshape((-1,) + (1,) * grid.dim)
            self.hat = np.fft.fftn(traj.values * shaped, norm="ortho")
        tau = 2.0 * np.pi * np.fft.fftfreq(traj.num_slices, d=traj.dt)
        self.tau = tau
        self.s = np.abs(tau.reshape((-1,) + (1,) * grid.dim) + grid.xi_sq_sum)
        self.tau_floor = TAU_FLOOR_FACTOR * 2.0 * np.pi / (traj.num_slices * traj.dt)
        self.j_bottom = int(np.floor(np.log2(self.tau_floor)))
        s_max = float(np.max(self.s))
        self.j_top = max(int(np.ceil(np.log2(max(s_max, self.tau_floor)))), self.j_bottom + 1)
        self.shells = list(range(self.j_bottom, self.j_top + 1))
        # quadrature weight for L2(t, x) via unitary FFT, uniform in time
        self.l2_weight = (grid.cell_volume * traj.dt) ** 0.5
        self._masses = None

    def shell_multiplier(self, j):
        if j == self.j_bottom:
            return chi_leq(self.s, self.j_bottom)
        return chi_shell(self.s, j)

    def _ensure_masses(self):
        """All shell masses in one bucketed pass.

        At most one dyadic shell is fractional at any s (the transition
        band spans 0.356 octaves), so chi_j(s) is nonzero for exactly the
        shells j* (weight eta) and j*+1 (weight 1-eta); points below the
        bottom lump carry weight one there.
        """
        if self._masses is not None:
            return
        energy = (np.abs(self.hat) ** 2).ravel()
        s = self.s.ravel()
        lg = np.log2(np.maximum(s, np.finfo(float).tiny))
        j_star = np.ceil(lg - np.log2(OUTER_RADIUS)).astype(np.int64)
        w_star = _ETA(s / np.exp2(j_star.astype(np.float64)))
        below = j_star < self.j_bottom
        j_a = np.where(below, self.j_bottom, j_star)
        w_a = np.where(below, 1.0, w_star)
        w_b = np.where(below, 0.0, 1.0 - w_star)
        j_b = np.clip(j_star + 1, self.j_bottom, self.j_top)
        count = self.j_top - self.j_bottom + 1
        m2 = np.bincount(
            np.clip(j_a, self.j_bottom, self.j_top) - self.j_bottom,
            weights=w_a ** 2 * energy,
            minlength=count,
        )
        m2 += np.bincount(j_b - self.j_bottom, weights=w_b ** 2 * energy, minlength=count)
        self._masses = np.sqrt(m2) * self.l2_weight

    def shell_mass(self, j):
        """L2(t,x) norm of the modulation piece Q_j (tapered field)."""
        self._ensure_masses()
        if j < self.j_bottom or j > self.j_top:
            return 0.0
        return float(self._masses[j - self.j_bottom])

    def tapered_l2(self):
        return float(np.linalg.norm(self.hat.ravel())) * self.l2_weight


def mod_project(traj, j, taper_fraction=TAPER_FRACTION):
    """Modulation projector Q_j: multiplier chi_j(tau + |xi|^2) on the
    tapered trajectory.  The bottom resolvable shell is lumped (chi_{<=j})."""
    ctx = ModulationContext(traj, taper_fraction)
    if j < ctx.j_bottom:
        warnings.warn(f"modulation shell j={j} below resolution floor {ctx.j_bottom}")
        return SpaceTimeField(traj.grid, traj.dt, np.zeros_like(traj.values), t0=traj.t0)
    vals = np.fft.ifftn(ctx.shell_multiplier(j) * ctx.hat, norm="ortho")
    return SpaceTimeField(traj.grid, traj.dt, vals, t0=traj.t0)


def modulation_energy_profile(traj, taper_fraction=TAPER_FRACTION):
    """Per-shell fractions of sum_j ||Q_j u||^2 (the X^0 mass distribution)."""
    ctx = ModulationContext(traj, taper_fraction)
    masses = np.array([ctx.shell_mass(j) ** 2 for j in ctx.shells])
    total = masses.sum()
    if total == 0.0:
        return ctx.shells, masses, ctx.j_bottom
    return ctx.shells, masses / total, ctx.j_bottom


# ---------------------------------------------------------------------------
# mixed and anisotropic Lebesgue norms

_ALLOWED_P = (1, 2, np.inf)


def _check_spatial_exponent(q, dim):
    if q in _ALLOWED_P:
        return
    if q == 6 and dim == 3:
        return
    raise UnsupportedExponentError(f"spatial exponent q={q} unsupported on dim={dim}")


def _trapezoid_weights(num, dt):
    w = np.full(num, dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def norm_mixed(traj, p, q):
    """L^p_t L^q_x norm: Riemann sum in x, trapezoid in t, max for infinity."""
    if p not in _ALLOWED_P:
        raise UnsupportedExponentError(f"time exponent p={p} unsupported")
    grid = traj.grid
    _check_spatial_exponent(q, grid.dim)
    a = np.abs(traj.values)
    sp_axes = tuple(range(1, grid.dim + 1))
    if q == np.inf:
        per_slice = a.max(axis=sp_axes)
    else:
        per_slice = (np.sum(a ** q, axis=sp_axes) * grid.cell_volume) ** (1.0 / q)
    if p == np.inf:
        return float(per_slice.max())
    w = _trapezoid_weights(traj.num_slices, traj.dt)
    return float(np.sum(w * per_slice ** p) ** (1.0 / p))


def norm_anisotropic(traj, p, q, axis):
    """Anisotropic norm L^{p,q}_{e_axis}: outer p-norm along x_axis of the
    inner q-norm over (remaining axes, t)."""
    if p not in _ALLOWED_P or q not in _ALLOWED_P:
        raise UnsupportedExponentError(f"anisotropic exponents (p={p}, q={q}) unsupported")
    grid = traj.grid
    if not (0 <= axis < grid.dim):
        raise ValueError(f"axis {axis} out of range")
    a = np.abs(np.moveaxis(traj.values, 1 + axis, 0))  # (x_axis, t, rest...)
    inner_axes = tuple(range(1, a.ndim))
    if q == np.inf:
        inner = a.max(axis=inner_axes)
    else:
        w = _trapezoid_weights(traj.num_slices, traj.dt).reshape((1, -1) + (1,) * (grid.dim - 1))
        cell = grid.cell_volume / grid.spacing  # hyperplane cell measure
        inner = (np.sum(w * a ** q, axis=inner_axes) * cell) ** (1.0 / q)
    if p == np.inf:
        return float(inner.max())
    return float(np.sum(grid.spacing * inner ** p) ** (1.0 / p))


def norm_xsbq(traj, b, q, taper_fraction=TAPER_FRACTION, context=None):
    """Dyadic modulation norm (sum_j (2^{jb} ||Q_j u||_2)^q)^{1/q} over the
    resolvable shell range of the tapered field."""
    if q not in (1, 2):
        raise UnsupportedExponentError(f"X^{{0,b,q}} supports q in {{1,2}}, got {q}")
    ctx = context if context is not None else ModulationContext(traj, taper_fraction)
    if len(ctx.shells) < 4:
        raise ResolutionError(
            f"only {len(ctx.shells)} modulation shells resolvable; need >= 4"
        )
    total = 0.0
    for j in ctx.shells:
        total += (2.0 ** (j * b) * ctx.shell_mass(j)) ** q
    return float(total ** (1.0 / q))


# ---------------------------------------------------------------------------
# composite dyadic norms


def _localized(traj, k, localize):
    return lp_project(traj, k) if localize else traj


def _directional_term(traj, k, grid):
    """2^{k/2} sup_{|j-k|<=20} sup_axes ||P_{j,e} u||_{L^{inf,2}_e}.

    The widened multipliers coincide for most resolvable j on desk-scale
    grids, so distinct multipliers are deduplicated before transforming.
    """
    best = 0.0
    for axis in range(grid.dim):
        mults = {}
        for j in resolvable_axis_shells(grid, axis):
            if abs(j - k) > DIRECTIONAL_WINDOW:
                continue
            mult = chi_shell_widened(grid.xi[axis], k=j, half_width=9 * grid.dim)
            mults[mult.tobytes()] = mult
        if not mults:
            continue
        vals_hat = np.fft.fft(traj.values, axis=1 + axis, norm="ortho")
        for mult in mults.values():
            proj = np.fft.ifft(vals_hat * mult[np.newaxis], axis=1 + axis, norm="ortho")
            piece = SpaceTimeField(grid, traj.dt, proj, t0=traj.t0)
            best = max(best, norm_anisotropic(piece, np.inf, 2, axis))
    return 2.0 ** (0.5 * k) * best


def _lebesgue_block(traj, k, grid):
    """The shared L^inf_t L^2_x + L^2_t L^{2n/(n-2)}_x + weighted L^{2,inf}
    block of F_k and Y_k.  The L^6 piece exists only in dimension 3."""
    out = norm_mixed(traj, np.inf, 2)
    if grid.dim == 3:
        out += norm_mixed(traj, 2, 6)
    aniso = max(norm_anisotropic(traj, 2, np.inf, ax) for ax in range(grid.dim))
    out += 2.0 ** (-(grid.dim - 1) * k / 2.0) * aniso
    return out


def norm_Fk(traj, k, localize=True, context=None):
    """F_k norm of u (P_k-localized first unless localize=False)."""
    grid = traj.grid
    u = _localized(traj, k, localize)
    ctx = ModulationContext(u) if context is None else context
    out = norm_xsbq(u, 0.5, 1, context=ctx)
    out += _lebesgue_block(u, k, grid)
    out += _directional_term(u, k, grid)
    return out


def norm_Zk(traj, k, localize=True, context=None):
    u = _localized(traj, k, localize)
    ctx = ModulationContext(u) if context is None else context
    return 2.0 ** (-k) * norm_xsbq(u, 1, 2, context=ctx)


def norm_Yk(traj, k, localize=True, context=None):
    """Y_k norm; the split infimum is the pure-assignment upper bound
    (equals the Z_k piece)."""
    grid = traj.grid
    u = _localized(traj, k, localize)
    ctx = ModulationContext(u) if context is None else context
    return _lebesgue_block(u, k, grid) + 2.0 ** (-k) * norm_xsbq(u, 1, 2, context=ctx)


def norm_Nk(traj, k, localize=True, context=None, return_choice=False):
    """N_k norm with the three-way infimum replaced by the pure-assignment
    minimum (certified upper bound); optionally reports the winning slot."""
    grid = traj.grid
    u = _localized(traj, k, localize)
    ctx = ModulationContext(u) if context is None else context
    candidates = {
        "l1_t_l2_x": norm_mixed(u, 1, 2),
        "anisotropic_l12": 2.0 ** (-k / 2.0)
        * max(norm_anisotropic(u, 1, 2, ax) for ax in range(grid.dim)),
        "x_minus_half": norm_xsbq(u, -0.5, 1, context=ctx),
    }
    slot = min(candidates, key=candidates.get)
    value = candidates[slot] + 2.0 ** (-k) * norm_mixed(u, 2, 2)
    if return_choice:
        return value, slot
    return value


def norm_besov(field, s):
    """Homogeneous Besov norm: sum_k 2^{ks} ||P_k f||_{L^2} over resolvable
    shells (the zero mode is annihilated by every P_k)."""
    fh = field.in_spectral()
    total = 0.0
    for k in resolvable_shells(field.grid):
        piece = lp_project(fh, k)
        total += 2.0 ** (k * s) * piece.l2_norm()
    return float(total)


def besov_of_vector(grid, components, s):
    """Besov norm of a real vector field, shells measured in the vector L2."""
    total = 0.0
    hats = [np.fft.fftn(np.asarray(c, dtype=np.complex128), norm="ortho") for c in components]
    for k in resolvable_shells(grid):
        mult = chi_shell(grid.abs_xi, k)
        mass = np.sqrt(sum(np.sum(np.abs(mult * h) ** 2) for h in hats)) * grid.cell_volume ** 0.5
        total += 2.0 ** (k * s) * float(mass)
    return total


_SPACE_FUNCS = {"F": norm_Fk, "Y": norm_Yk, "Z": norm_Zk, "N": norm_Nk}


def shell_pieces(traj, shells=None, taper_fraction=TAPER_FRACTION):
    """Yield (k, P_k u, ModulationContext) sharing one pair of transforms.

    The spatial projector commutes with the time FFT and the taper, so the
    per-shell tapered space-time spectrum is just a mask on one precomputed
    full transform.
    """
    grid = traj.grid
    if shells is None:
        shells = resolvable_shells(grid)
    sp_axes = tuple(range(1, grid.dim + 1))
    spatial_hat = np.fft.fftn(traj.values, axes=sp_axes, norm="ortho")
    taper = taper_weights(traj.num_slices, taper_fraction)
    full_hat = np.fft.fft(
        spatial_hat * taper.reshape((-1,) + (1,) * grid.dim), axis=0, norm="ortho"
    )
    for k in shells:
        mult = chi_shell(grid.abs_xi, k)[np.newaxis]
        vals = np.fft.ifftn(spatial_hat * mult, axes=sp_axes, norm="ortho")
        piece = SpaceTimeField(grid, traj.dt, vals, t0=traj.t0)
        ctx = ModulationContext(piece, taper_fraction, precomputed_hat=full_hat * mult)
        yield k, piece, ctx


def norm_space(traj, space, s, shells=None):
    """ell^1 dyadic sum: sum_k 2^{ks} ||P_k u||_{space_k}."""
    if space not in _SPACE_FUNCS:
        raise ValueError(f"space must be one of {sorted(_SPACE_FUNCS)}, got {space!r}")
    func = _SPACE_FUNCS[space]
    total = 0.0
    for k, piece, ctx in shell_pieces(traj, shells):
        total += 2.0 ** (k * s) * func(piece, k, localize=False, context=ctx)
    return float(total)


def fz_norm(traj, s, shells=None):
    """The working solution-space norm: ||u||_{F^s} + ||u||_{Z^s}."""
    total = 0.0
    for k, piece, ctx in shell_pieces(traj, shells):
        fk = norm_Fk(piece, k, localize=False, context=ctx)
        zk = norm_Zk(piece, k, localize=False, context=ctx)
        total += 2.0 ** (k * s) * (fk + zk)
    return float(total)


# ---------------------------------------------------------------------------
# reporting


class NormReport:
    """Named norm values plus shell-resolved breakdown and conventions."""

    def __init__(self, entries, shell_table=None, metadata=None):
        self.entries = dict(entries)
        self.shell_table = {int(k): dict(v) for k, v in (shell_table or {}).items()}
        self.metadata = dict(metadata or {})
        for name, value in self.entries.items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"norm entry {name} = {value} is not finite and nonnegative")

    def to_dict(self):
        return {
            "entries": self.entries,
            "shell_table": {str(k): v for k, v in self.shell_table.items()},
            "metadata": self.metadata,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_shell_csv(self, path):
        names = sorted({name for row in self.shell_table.values() for name in row})
        with open(path, "w") as fh:
            fh.write("shell," + ",".join(names) + "\n")
            for k in sorted(self.shell_table):
                row = self.shell_table[k]
                fh.write(str(k) + "," + ",".join(repr(row.get(n, "")) for n in names) + "\n")


def standard_metadata(grid, traj=None):
    shells = resolvable_shells(grid)
    meta = {
        "period": grid.period,
        "points_per_axis": grid.points_per_axis,
        "dim": grid.dim,
        "shell_range": [shells[0], shells[-1]] if shells else None,
        "taper_fraction": TAPER_FRACTION,
        "infimum_convention": "pure-assignment upper bound",
        "directional_multiplier": "widened shell (9n) in single coordinate",
        "intersection_norm": "sum of component norms",
    }
    if traj is not None:
        meta["dt"] = traj.dt
        meta["num_slices"] = traj.num_slices
    return meta


def compute_norm_report(traj, names, s=None):
    """Evaluate a list of named norms on a trajectory.

    Recognized names: besov (on the first slice), mixed:p:q, aniso:p:q:axis,
    xsbq:b:q, F, Y, Z, N (dyadic sums at exponent s, default dim/2).
    """
    grid = traj.grid
    if s is None:
        s = grid.dim / 2.0
    entries = {}
    shell_table = {}
    parse = {"inf": np.inf}
    for name in names:
        parts = name.split(":")
        kind = parts[0]
        if kind == "besov":
            entries[name] = norm_besov(traj.slice(0), s)
        elif kind == "mixed":
            p = parse.get(parts[1], None) or float(parts[1])
            q = parse.get(parts[2], None) or float(parts[2])
            entries[name] = norm_mixed(traj, p, q)
        elif kind == "aniso":
            p = parse.get(parts[1], None) or float(parts[1])
            q = parse.get(parts[2], None) or float(parts[2])
            entries[name] = norm_anisotropic(traj, p, q, int(parts[3]))
        elif kind == "xsbq":
            entries[name] = norm_xsbq(traj, float(parts[1]), int(parts[2]))
        elif kind in _SPACE_FUNCS:
            func = _SPACE_FUNCS[kind]
            total = 0.0
            for k, piece, ctx in shell_pieces(traj):
                val = func(piece, k, localize=False, context=ctx)
                shell_table.setdefault(k, {})[kind] = val
                total += 2.0 ** (k * s) * val
            entries[name] = total
        else:
            raise ValueError(f"unknown norm name {name!r}")
    return NormReport(entries, shell_table, standard_metadata(grid, traj))
