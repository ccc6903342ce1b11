"""Periodic-torus discretization and spectral operators.

Conventions used throughout the package:

* FFTs are unitary (``norm="ortho"``), so Plancherel holds without
  correction factors.
* The Nyquist mode +N/2 is stored once (as -N/2, numpy layout) and is
  zeroed after every derivative so real fields stay real.
* Products of fields are formed in physical space after 2/3-rule
  dealiasing of the factors.
* The discrete L2 norm carries the quadrature weight (L/N)^(n/2), so it
  approximates the continuum integral.
"""

import numpy as np

from .errors import GridMismatchError, RepresentationError

PHYSICAL = "physical"
SPECTRAL = "spectral"

DEFAULT_SPHERE_TOL = 1e-9


class TorusGrid:
    """Uniform periodic grid on [0, L)^dim with N points per axis.

    N must be a power of two and dim one of 1, 2, 3.  Wavenumbers are
    xi = (2*pi/L) * k with integer k in {-N/2, ..., N/2 - 1}.
    """

    def __init__(self, dim, points_per_axis, period):
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
        n = int(points_per_axis)
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 2, got {points_per_axis}")
        if not (period > 0):
            raise ValueError(f"period must be positive, got {period}")
        self.dim = dim
        self.points_per_axis = n
        self.period = float(period)
        self.spacing = self.period / n
        self.shape = (n,) * dim

        k1 = 2.0 * np.pi * np.fft.fftfreq(n, d=self.spacing)
        # per-axis wavenumbers broadcastable over the grid
        self.xi = []
        for axis in range(dim):
            shape = [1] * dim
            shape[axis] = n
            self.xi.append(k1.reshape(shape))
        self.xi_sq_sum = sum(x ** 2 for x in self.xi)
        self.abs_xi = np.sqrt(self.xi_sq_sum)

        nyq = np.abs(k1) >= (2.0 * np.pi / self.period) * (n // 2) - 1e-12
        keep = ~nyq
        self.non_nyquist = self._outer_and(keep, n)

        # 2/3 rule: keep |k| <= N/3 on every axis
        cutoff = (2.0 * np.pi / self.period) * (n // 3)
        self.dealias_keep = self._outer_and(np.abs(k1) <= cutoff + 1e-12, n)

    def _outer_and(self, axis_mask, n):
        out = np.ones(self.shape, dtype=bool)
        for axis in range(self.dim):
            shape = [1] * self.dim
            shape[axis] = n
            out &= axis_mask.reshape(shape)
        return out

    @property
    def cell_volume(self):
        return self.spacing ** self.dim

    @property
    def volume(self):
        return self.period ** self.dim

    def axis_coordinates(self):
        return np.arange(self.points_per_axis) * self.spacing

    def meshgrid(self):
        x = self.axis_coordinates()
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def min_nonzero_wavenumber(self):
        return 2.0 * np.pi / self.period

    def max_wavenumber(self):
        return (2.0 * np.pi / self.period) * (self.points_per_axis // 2) * np.sqrt(self.dim)

    def __eq__(self, other):
        return (
            isinstance(other, TorusGrid)
            and self.dim == other.dim
            and self.points_per_axis == other.points_per_axis
            and self.period == other.period
        )

    def __repr__(self):
        return f"TorusGrid(dim={self.dim}, N={self.points_per_axis}, L={self.period:g})"


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


class ComplexField:
    """Scalar complex field on a TorusGrid, in physical or spectral form."""

    def __init__(self, grid, values, representation=PHYSICAL):
        if representation not in (PHYSICAL, SPECTRAL):
            raise RepresentationError(f"unknown representation {representation!r}")
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self.values = values
        self.representation = representation

    def copy(self):
        return ComplexField(self.grid, self.values.copy(), self.representation)

    def in_physical(self):
        if self.representation == PHYSICAL:
            return self
        return ComplexField(self.grid, np.fft.ifftn(self.values, norm="ortho"), PHYSICAL)

    def in_spectral(self):
        if self.representation == SPECTRAL:
            return self
        return ComplexField(self.grid, np.fft.fftn(self.values, norm="ortho"), SPECTRAL)

    def l2_norm(self):
        # unitary FFT: same value in either representation
        return float(np.linalg.norm(self.values.ravel())) * self.grid.cell_volume ** 0.5

    def sup_norm(self):
        return float(np.max(np.abs(self.in_physical().values)))


def fft_forward(field):
    """Unitary forward FFT of a physical-representation field."""
    if field.representation != PHYSICAL:
        raise RepresentationError("fft_forward expects a physical-representation field")
    return ComplexField(field.grid, np.fft.fftn(field.values, norm="ortho"), SPECTRAL)


def fft_inverse(field):
    """Unitary inverse FFT of a spectral-representation field."""
    if field.representation != SPECTRAL:
        raise RepresentationError("fft_inverse expects a spectral-representation field")
    return ComplexField(field.grid, np.fft.ifftn(field.values, norm="ortho"), PHYSICAL)


def _spectral_values(field):
    return field.in_spectral().values


def apply_multiplier(field, multiplier, zero_nyquist=False):
    """Apply a Fourier multiplier, returning a field in the input representation."""
    grid = field.grid
    fh = _spectral_values(field) * multiplier
    if zero_nyquist:
        fh = fh * grid.non_nyquist
    out = ComplexField(grid, fh, SPECTRAL)
    return out if field.representation == SPECTRAL else out.in_physical()


def gradient(field):
    """Spectral gradient; returns a tuple of fields, one per axis.

    Nyquist modes are zeroed so derivatives of real fields stay real.
    """
    grid = field.grid
    fh = _spectral_values(field)
    out = []
    for axis in range(grid.dim):
        dh = (1j * grid.xi[axis]) * fh * grid.non_nyquist
        comp = ComplexField(grid, dh, SPECTRAL)
        out.append(comp if field.representation == SPECTRAL else comp.in_physical())
    return tuple(out)


def laplacian(field):
    """Spectral Laplacian, multiplier -|xi|^2 (Nyquist zeroed for consistency
    with gradient-of-gradient)."""
    return apply_multiplier(field, -field.grid.xi_sq_sum, zero_nyquist=True)


def semigroup_apply(field, t, eps):
    """Apply the dissipative Schroedinger semigroup, multiplier exp(-(eps+i)t|xi|^2).

    t must be nonnegative (the backward flow blows up for eps > 0); eps in
    [0, 1], where eps = 0 gives the free unitary group.
    """
    if t < 0:
        raise ValueError(f"semigroup_apply requires t >= 0, got {t}")
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    mult = np.exp(-(eps + 1j) * t * field.grid.xi_sq_sum)
    return apply_multiplier(field, mult)


def dealias(field):
    """Zero every mode outside the 2/3 band (applied to product factors)."""
    return apply_multiplier(field, field.grid.dealias_keep)


def multiply_dealiased(f, g):
    """Pointwise product computed in physical space with dealiased factors."""
    _require_same_grid(f, g)
    fd = dealias(f).in_physical()
    gd = dealias(g).in_physical()
    return ComplexField(f.grid, fd.values * gd.values, PHYSICAL)


# ---------------------------------------------------------------------------
# vector-valued fields


class MagnetizationField:
    """Unit-sphere-valued 3-vector field m(x); values shape (3,) + grid.shape."""

    def __init__(self, grid, values, sphere_tol=DEFAULT_SPHERE_TOL, check=True):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (3,) + grid.shape:
            raise ValueError(f"values shape {values.shape}, expected {(3,) + grid.shape}")
        self.grid = grid
        self.values = values
        self.sphere_tol = sphere_tol
        if check:
            dev = self.sphere_deviation()
            if dev > sphere_tol:
                from .errors import SphereViolationError

                raise SphereViolationError(
                    f"|m| deviates from 1 by {dev:.3e} > sphere_tol {sphere_tol:.1e}"
                )

    def norms(self):
        return np.sqrt(np.sum(self.values ** 2, axis=0))

    def sphere_deviation(self):
        return float(np.max(np.abs(self.norms() - 1.0)))

    def renormalized(self):
        return MagnetizationField(
            self.grid, self.values / self.norms(), sphere_tol=self.sphere_tol, check=False
        )

    def component(self, i):
        return ComplexField(self.grid, self.values[i].astype(np.complex128), PHYSICAL)

    def copy(self):
        return MagnetizationField(self.grid, self.values.copy(), self.sphere_tol, check=False)


class CurrentField:
    """Spin-polarized current density v(t, x): an n-vector field.

    Optionally time dependent via a list of (time, slice) pairs; sampling
    between stored slices is zero-order hold.  The sup norm over all stored
    samples is cached at construction.
    """

    def __init__(self, grid, slices, times=None):
        # slices: array (n,)+shape for static v, or list of such arrays
        if isinstance(slices, np.ndarray) and slices.ndim == grid.dim + 1:
            slices = [slices]
        self.grid = grid
        self.slices = [np.asarray(s, dtype=np.float64) for s in slices]
        for s in self.slices:
            if s.shape != (grid.dim,) + grid.shape:
                raise ValueError(f"current slice shape {s.shape}, expected {(grid.dim,) + grid.shape}")
        if times is None:
            times = [0.0] * len(self.slices) if len(self.slices) == 1 else list(
                np.arange(len(self.slices), dtype=float)
            )
        if len(times) != len(self.slices):
            raise ValueError("times and slices length mismatch")
        self.times = [float(t) for t in times]
        self.sup_norm = max(
            float(np.max(np.sqrt(np.sum(s ** 2, axis=0)))) for s in self.slices
        )
        if not np.isfinite(self.sup_norm):
            raise ValueError("current field has non-finite entries")

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    @classmethod
    def constant(cls, grid, vector):
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (grid.dim,):
            raise ValueError(f"constant current needs a {grid.dim}-vector")
        vals = np.broadcast_to(vector.reshape((grid.dim,) + (1,) * grid.dim), (grid.dim,) + grid.shape)
        return cls(grid, np.array(vals))

    @property
    def is_zero(self):
        return all(not np.any(s) for s in self.slices)

    def at_time(self, t):
        """Zero-order hold: slice stored at the largest time <= t."""
        idx = 0
        for i, ti in enumerate(self.times):
            if ti <= t + 1e-15:
                idx = i
        return self.slices[idx]


class SpaceTimeField:
    """Time-sampled complex field u(t, x): uniformly spaced slices.

    values has shape (T,) + grid.shape with T >= 2, slice j at time
    t0 + j*dt (t0 defaults to 0).
    """

    def __init__(self, grid, dt, values, t0=0.0):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim != grid.dim + 1 or values.shape[1:] != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        if values.shape[0] < 2:
            raise ValueError("SpaceTimeField needs at least 2 slices")
        if not (dt > 0):
            raise ValueError("dt must be positive")
        self.grid = grid
        self.dt = float(dt)
        self.values = values
        self.t0 = float(t0)

    @property
    def num_slices(self):
        return self.values.shape[0]

    @property
    def duration(self):
        return self.dt * (self.num_slices - 1)

    def times(self):
        return self.t0 + self.dt * np.arange(self.num_slices)

    def slice(self, j):
        return ComplexField(self.grid, self.values[j], PHYSICAL)

    @classmethod
    def from_slices(cls, slices, dt, t0=0.0):
        grid = slices[0].grid
        vals = np.stack([s.in_physical().values for s in slices])
        return cls(grid, dt, vals, t0=t0)

    def copy(self):
        return SpaceTimeField(self.grid, self.dt, self.values.copy(), self.t0)


def time_reverse(traj):
    """Reverse the time axis of a trajectory (slice order flipped, dt kept)."""
    return SpaceTimeField(traj.grid, traj.dt, traj.values[::-1].copy(), t0=traj.t0)
