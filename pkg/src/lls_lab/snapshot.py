"""Field snapshot file format.

Little-endian binary, shared repo-wide:

    magic   "LLSF"            4 bytes
    version u32               (currently 1)
    dim     u32
    N       u32               points per axis
    L       f64               period
    ncomp   u32               component count
    repr    u8                0 = physical, 1 = spectral
    payload ncomp * N^dim * 2 f64, row-major, interleaved (re, im)

A JSON sidecar ``<file>.json`` mirrors the header for human inspection.
"""

import json
import struct

import numpy as np

from .core import PHYSICAL, SPECTRAL, ComplexField, MagnetizationField, CurrentField, TorusGrid

MAGIC = b"LLSF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdIB")


def write_snapshot(path, grid, components, representation=PHYSICAL):
    """Write a list of complex component arrays to an LLSF file + sidecar."""
    rep_flag = {PHYSICAL: 0, SPECTRAL: 1}[representation]
    comps = [np.asarray(c, dtype=np.complex128) for c in components]
    for c in comps:
        if c.shape != grid.shape:
            raise ValueError(f"component shape {c.shape} does not match grid {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC, VERSION, grid.dim, grid.points_per_axis, grid.period, len(comps), rep_flag
            )
        )
        for c in comps:
            inter = np.empty(c.size * 2, dtype="<f8")
            inter[0::2] = c.real.ravel(order="C")
            inter[1::2] = c.imag.ravel(order="C")
            fh.write(inter.tobytes())
    sidecar = {
        "magic": MAGIC.decode(),
        "version": VERSION,
        "dim": grid.dim,
        "points_per_axis": grid.points_per_axis,
        "period": grid.period,
        "component_count": len(comps),
        "representation": representation,
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_snapshot(path):
    """Read an LLSF file; returns (grid, components, representation)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, dim, n, period, ncomp, rep_flag = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        grid = TorusGrid(dim, n, period)
        count = n ** dim
        comps = []
        for _ in range(ncomp):
            raw = np.frombuffer(fh.read(count * 16), dtype="<f8")
            if raw.size != count * 2:
                raise ValueError(f"{path}: truncated payload")
            comps.append((raw[0::2] + 1j * raw[1::2]).reshape(grid.shape))
    representation = {0: PHYSICAL, 1: SPECTRAL}[rep_flag]
    return grid, comps, representation


def write_complex_field(path, field):
    write_snapshot(path, field.grid, [field.values], field.representation)


def read_complex_field(path):
    grid, comps, rep = read_snapshot(path)
    if len(comps) != 1:
        raise ValueError(f"{path}: expected 1 component, found {len(comps)}")
    return ComplexField(grid, comps[0], rep)


def write_magnetization(path, m):
    write_snapshot(path, m.grid, [m.values[i] for i in range(3)], PHYSICAL)


def read_magnetization(path, sphere_tol=None):
    grid, comps, rep = read_snapshot(path)
    if rep != PHYSICAL or len(comps) != 3:
        raise ValueError(f"{path}: not a magnetization snapshot")
    values = np.stack([c.real for c in comps])
    kwargs = {} if sphere_tol is None else {"sphere_tol": sphere_tol}
    return MagnetizationField(grid, values, **kwargs)


def read_current(path):
    grid, comps, rep = read_snapshot(path)
    if rep != PHYSICAL or len(comps) != grid.dim:
        raise ValueError(f"{path}: not a current snapshot (needs {grid.dim} components)")
    return CurrentField(grid, np.stack([c.real for c in comps]))


def write_trajectory(directory, traj, prefix="slice"):
    """Write one snapshot per slice plus a manifest listing slice times."""
    import os

    os.makedirs(directory, exist_ok=True)
    files = []
    for j in range(traj.num_slices):
        name = f"{prefix}_{j:05d}.llsf"
        write_snapshot(os.path.join(directory, name), traj.grid, [traj.values[j]], PHYSICAL)
        files.append(name)
    manifest = {
        "dt": traj.dt,
        "t0": traj.t0,
        "times": [float(t) for t in traj.times()],
        "files": files,
    }
    path = os.path.join(directory, "trajectory.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
