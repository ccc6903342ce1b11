"""Seeded random data families used by tests, the estimate harness and the CLI.

All randomness flows through numpy's PCG64 generator; the generator name
and seed are recorded in every report and manifest.
"""

import numpy as np

from .core import PHYSICAL, ComplexField, MagnetizationField
from .dyadic import chi_shell, resolvable_shells

GENERATOR_NAME = "numpy-pcg64"


def make_rng(seed):
    return np.random.default_rng(int(seed))


def _complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _normalize(field, normalize, amplitude):
    if normalize is None:
        return field
    if normalize == "linf":
        scale = field.sup_norm()
    elif normalize == "l2":
        scale = field.l2_norm()
    elif normalize == "besov":
        from .dyadic import norm_besov

        scale = norm_besov(field, field.grid.dim / 2.0)
    else:
        raise ValueError(f"unknown normalization {normalize!r}")
    if scale == 0.0:
        return field
    return ComplexField(field.grid, field.values * (amplitude / scale), field.representation)


def gaussian_band_field(grid, seed, shells=None, normalize="linf", amplitude=1.0):
    """Band-limited complex Gaussian field with a flat spectrum per shell.

    Each requested dyadic shell carries roughly equal expected L2 mass.
    """
    rng = make_rng(seed)
    if shells is None:
        avail = resolvable_shells(grid)
        shells = avail[: max(len(avail) - 1, 1)]
    coeffs = _complex_gaussian(rng, grid.shape)
    weight = np.zeros(grid.shape)
    for k in shells:
        mask = chi_shell(grid.abs_xi, k)
        cell_count = float(np.sum(mask ** 2))
        if cell_count > 0:
            weight += mask / np.sqrt(cell_count)
    hat = coeffs * weight * grid.dealias_keep
    field = ComplexField(grid, hat, "spectral").in_physical()
    return _normalize(field, normalize, amplitude)


def shell_localized_field(grid, k, seed, normalize="l2", amplitude=1.0):
    """Random Gaussian data localized to the single dyadic shell k."""
    rng = make_rng(seed)
    hat = _complex_gaussian(rng, grid.shape) * chi_shell(grid.abs_xi, k)
    field = ComplexField(grid, hat, "spectral").in_physical()
    return _normalize(field, normalize, amplitude)


def single_mode_field(grid, mode, amplitude=1.0):
    """amplitude * exp(i (2 pi / L) mode . x)."""
    mode = np.atleast_1d(np.asarray(mode, dtype=np.int64))
    if mode.size != grid.dim:
        raise ValueError(f"mode must have {grid.dim} components")
    xs = grid.meshgrid()
    phase = sum((2.0 * np.pi / grid.period) * int(mode[i]) * xs[i] for i in range(grid.dim))
    return ComplexField(grid, amplitude * np.exp(1j * phase), PHYSICAL)


def smooth_real_field(grid, rng, max_mode=2):
    """Smooth random real field, modes bounded by max_mode per axis, sup = 1."""
    n = grid.points_per_axis
    hat = np.zeros(grid.shape, dtype=np.complex128)
    idx = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    keep = np.abs(idx) <= max_mode
    mask = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = n
        mask &= keep.reshape(shape)
    hat[mask] = _complex_gaussian(rng, (int(mask.sum()),))
    vals = np.fft.ifftn(hat, norm="ortho").real
    peak = np.max(np.abs(vals))
    return vals / peak if peak > 0 else vals


def sphere_perturbation(grid, amplitude, seed, max_mode=2, sphere_tol=1e-9):
    """Unit field near the north pole: normalize((a g1, a g2, 1 + a g3))."""
    rng = make_rng(seed)
    g = np.stack([smooth_real_field(grid, rng, max_mode) for _ in range(3)])
    raw = np.stack(
        [amplitude * g[0], amplitude * g[1], 1.0 + amplitude * g[2]]
    )
    raw /= np.sqrt(np.sum(raw ** 2, axis=0))
    return MagnetizationField(grid, raw, sphere_tol=sphere_tol, check=False)


def random_unit_field(grid, seed, max_mode=2, tilt=0.6, sphere_tol=1e-9):
    """Random smooth sphere-valued field staying away from the south pole."""
    rng = make_rng(seed)
    g = np.stack([smooth_real_field(grid, rng, max_mode) for _ in range(3)])
    raw = np.stack([tilt * g[0], tilt * g[1], 1.0 + tilt * g[2]])
    raw[2] = np.maximum(raw[2], 0.25)  # keep m3 comfortably above -0.9 after normalizing
    raw /= np.sqrt(np.sum(raw ** 2, axis=0))
    return MagnetizationField(grid, raw, sphere_tol=sphere_tol, check=False)
