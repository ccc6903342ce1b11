"""Empirical verification harness for the linear/nonlinear estimate ratios,
the Picard contraction factor, and the (eps, amplitude) smallness sweep.

Uniformity claims are asserted as spread bounds (max/min of the per-group
median ratio across the swept variable), never as specific constant
values.  RHS = 0 samples are skipped and counted; reports never contain
NaN or infinity.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import SpaceTimeField, TorusGrid
from .dyadic import fz_norm, norm_anisotropic, norm_besov, norm_mixed, norm_space
from .errors import UnsupportedExponentError
from .generators import (
    GENERATOR_NAME,
    gaussian_band_field,
    make_rng,
    shell_localized_field,
)
from .gl import (
    duhamel_solve,
    evaluate_nonlinearity,
    picard_map,
    picard_solve,
    semigroup_trajectory,
)

DEFAULT_K_SPREAD = 100.0
DEFAULT_EPS_SPREAD = 10.0


def thread_count():
    try:
        return max(int(os.environ.get("LLS_LAB_THREADS", "1")), 1)
    except ValueError:
        return 1


def _map_jobs(func, jobs):
    """Deterministic map: results are assembled in submission order."""
    workers = thread_count()
    if workers == 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


@dataclass
class RatioReport:
    estimate_id: str
    samples: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    aggregates: dict = field(default_factory=dict)

    def record(self, **sample):
        ratio = sample.get("ratio")
        if ratio is None or not np.isfinite(ratio):
            self.skipped.append({**sample, "reason": "non-finite ratio"})
            return
        self.samples.append(sample)

    def skip(self, reason, **descr):
        self.skipped.append({**descr, "reason": reason})

    def ratios(self, component=None):
        return [
            s["ratio"]
            for s in self.samples
            if component is None or s.get("component") == component
        ]

    def components(self):
        return sorted({s.get("component", "ratio") for s in self.samples})

    def grouped_spread(self, group_key, component=None):
        """max/min across groups of the per-group median ratio."""
        groups = {}
        for s in self.samples:
            if component is not None and s.get("component") != component:
                continue
            groups.setdefault(s[group_key], []).append(s["ratio"])
        if not groups:
            return None
        medians = [float(np.median(v)) for v in groups.values()]
        lo = min(medians)
        return float("inf") if lo == 0 else max(medians) / lo

    def finalize(self, k_bound=DEFAULT_K_SPREAD, eps_bound=DEFAULT_EPS_SPREAD):
        agg = {"num_samples": len(self.samples), "num_skipped": len(self.skipped)}
        allr = self.ratios()
        if allr:
            agg["max_ratio"] = max(allr)
            agg["min_ratio"] = min(allr)
        for comp in self.components():
            sk = self.grouped_spread("k", component=comp)
            se = self.grouped_spread("eps", component=comp)
            agg[f"spread_k[{comp}]"] = sk
            agg[f"spread_eps[{comp}]"] = se
        agg["k_spread_bound"] = k_bound
        agg["eps_spread_bound"] = eps_bound
        agg["k_spread_ok"] = all(
            v is None or v <= k_bound
            for key, v in agg.items()
            if isinstance(key, str) and key.startswith("spread_k[")
        )
        agg["eps_spread_ok"] = all(
            v is None or v <= eps_bound
            for key, v in agg.items()
            if isinstance(key, str) and key.startswith("spread_eps[")
        )
        self.aggregates = agg
        return self

    def to_dict(self):
        return {
            "estimate_id": self.estimate_id,
            "generator": GENERATOR_NAME,
            "config": self.config,
            "samples": self.samples,
            "skipped": self.skipped,
            "aggregates": self.aggregates,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        keys = sorted({k for s in self.samples for k in s})
        with open(path, "w") as fh:
            fh.write(",".join(keys) + "\n")
            for s in self.samples:
                fh.write(",".join(repr(s.get(k, "")) for k in keys) + "\n")


def default_grid_for_shell(k, dim=3):
    """Cheapest grid resolving shell k: period 4*pi, N grows with k."""
    n = 16 if k <= 3 else 32
    return TorusGrid(dim, n, 4.0 * np.pi)


def _grid_tag(grid):
    return f"dim{grid.dim}/N{grid.points_per_axis}/L{grid.period:.6g}"


# ---------------------------------------------------------------------------
# Strichartz-type ratios


def check_strichartz(
    k_range,
    eps_list,
    samples,
    window=1.0,
    num_slices=17,
    base_seed=0,
    k_spread_bound=DEFAULT_K_SPREAD,
    eps_spread_bound=DEFAULT_EPS_SPREAD,
    strict=False,
):
    """Ratios for the dispersive-decay estimates of the (dissipative)
    Schroedinger group on shell-localized Gaussian data.

    Components: "lebesgue" (L2_t L6_x + Linf_t L2_x vs L2), "l2inf"
    (smoothing-type anisotropic, weight 2^{(n-1)k/2}) and "linf2"
    (directional local smoothing, weight 2^{-k/2}).  Requires dim 3.
    """
    report = RatioReport(
        "strichartz",
        config={
            "k_range": list(k_range),
            "eps_list": list(eps_list),
            "samples": samples,
            "window": window,
            "num_slices": num_slices,
            "base_seed": base_seed,
        },
    )
    dt = window / (num_slices - 1)
    for ik, k in enumerate(k_range):
        grid = default_grid_for_shell(k)
        if grid.dim != 3:
            raise UnsupportedExponentError("strichartz ratios need dim 3 (L6 exponent)")
        n = grid.dim
        for ie, eps in enumerate(eps_list):
            for s in range(samples):
                seed = base_seed + 10000 * ik + 100 * ie + s
                f = shell_localized_field(grid, k, seed)
                rhs = f.l2_norm()
                descr = {"k": k, "eps": eps, "seed": seed, "grid": _grid_tag(grid)}
                if rhs < 1e-300:
                    report.skip("empty shell (RHS = 0)", **descr)
                    continue
                traj = semigroup_trajectory(f, eps, dt, num_slices)
                leb = norm_mixed(traj, 2, 6) + norm_mixed(traj, np.inf, 2)
                report.record(component="lebesgue", lhs=leb, rhs=rhs, ratio=leb / rhs, **descr)
                aniso = max(norm_anisotropic(traj, 2, np.inf, ax) for ax in range(n))
                w = 2.0 ** ((n - 1) * k / 2.0) * rhs
                report.record(component="l2inf", lhs=aniso, rhs=w, ratio=aniso / w, **descr)
                from .dyadic import lp_project_directional

                best = 0.0
                for ax in range(n):
                    fd = lp_project_directional(f, k, ax)
                    if fd.l2_norm() < 1e-300:
                        continue
                    td = semigroup_trajectory(fd, eps, dt, num_slices)
                    best = max(best, norm_anisotropic(td, np.inf, 2, ax))
                w2 = 2.0 ** (-k / 2.0) * rhs
                report.record(component="linf2", lhs=best, rhs=w2, ratio=best / w2, **descr)
    report.finalize(k_spread_bound, eps_spread_bound)
    if strict and not (report.aggregates["k_spread_ok"] and report.aggregates["eps_spread_ok"]):
        raise ValueError(f"strichartz spread bounds violated: {report.aggregates}")
    return report


# ---------------------------------------------------------------------------
# linear estimate (solution norm vs data + forcing)


def _time_envelope(rng, num_slices, modes=3):
    t = np.linspace(0.0, 1.0, num_slices)
    env = np.zeros(num_slices)
    for m in range(1, modes + 1):
        a, b = rng.standard_normal(2)
        env += a * np.cos(2 * np.pi * m * t) + b * np.sin(2 * np.pi * m * t)
    peak = np.max(np.abs(env))
    return env / peak if peak > 0 else env + 1.0


def check_linear_estimate(
    eps_list,
    k_range,
    samples,
    window=0.5,
    base_seed=0,
    k_spread_bound=DEFAULT_K_SPREAD,
    eps_spread_bound=DEFAULT_EPS_SPREAD,
    strict=False,
):
    """Ratio of the solution's F cap Z norm to Besov data plus N-norm forcing
    for manufactured (u0, J) pairs solved by the exact-semigroup Duhamel
    quadrature (the march with cubic terms disabled)."""
    report = RatioReport(
        "linear",
        config={
            "k_range": list(k_range),
            "eps_list": list(eps_list),
            "samples": samples,
            "window": window,
            "base_seed": base_seed,
        },
    )

    def one(job):
        ik, k, ie, eps, s = job
        grid = default_grid_for_shell(k)
        snd = grid.dim / 2.0
        # keep the time axis fine enough to resolve the fastest modulation
        max_xi_sq = float(np.max(grid.xi_sq_sum))
        num_slices = max(17, int(np.ceil(window * max_xi_sq / np.pi)) + 1)
        dt = window / (num_slices - 1)
        seed = base_seed + 10000 * ik + 100 * ie + s
        rng = make_rng(seed + 777)
        u0 = shell_localized_field(grid, k, seed)
        jx = shell_localized_field(grid, k, seed + 31)
        env = _time_envelope(rng, num_slices)
        source = SpaceTimeField(
            grid, dt, env.reshape((-1,) + (1,) * grid.dim) * jx.values[np.newaxis]
        )
        descr = {"k": k, "eps": eps, "seed": seed, "grid": _grid_tag(grid)}
        rhs = norm_besov(u0, snd) + norm_space(source, "N", snd)
        if rhs < 1e-300:
            return ("skip", "RHS = 0", descr)
        u = duhamel_solve(u0, source, eps)
        lhs = fz_norm(u, snd)
        return ("ok", {"component": "linear", "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs, **descr})

    jobs = [
        (ik, k, ie, eps, s)
        for ik, k in enumerate(k_range)
        for ie, eps in enumerate(eps_list)
        for s in range(samples)
    ]
    for kind, payload, *rest in _map_jobs(one, jobs):
        if kind == "ok":
            report.record(**payload)
        else:
            report.skip(payload, **rest[0])
    report.finalize(k_spread_bound, eps_spread_bound)
    if strict and not (report.aggregates["k_spread_ok"] and report.aggregates["eps_spread_ok"]):
        raise ValueError(f"linear estimate spread bounds violated: {report.aggregates}")
    return report


# ---------------------------------------------------------------------------
# nonlinear estimate (forcing norm vs the small-data bracket)


def _nonlinearity_trajectory(u_traj, v, eps, convention="section4"):
    vals = np.stack(
        [
            evaluate_nonlinearity(u_traj.slice(j), v, eps, convention=convention, t=t).values
            for j, t in enumerate(u_traj.times())
        ]
    )
    return SpaceTimeField(u_traj.grid, u_traj.dt, vals)


def nonlinear_bracket(u_norm, v_sup):
    """The small-data bound's bracket in ||u||_{F cap Z} and ||v||_inf;
    valid for u_norm^2 < 1."""
    u2 = u_norm ** 2
    return (
        v_sup * u_norm
        + (u_norm ** 3 + v_sup * u_norm + v_sup * u_norm ** 3) / (1.0 - u2)
        + v_sup * u_norm ** 3 / (1.0 - u2) ** 2
    )


def check_nonlinear_estimate(
    eps_list,
    amplitude_list,
    samples,
    grid=None,
    v_sup=0.05,
    window=0.25,
    num_slices=17,
    base_seed=0,
    convention="section4",
):
    """Finiteness and boundedness of ||J(u)||_{N^{n/2}} against the bracket,
    on freely-evolved random trajectories.

    Amplitudes are targets for the computed F cap Z norm itself (the free
    evolution is linear in the data, so the rescaling is exact); samples
    with ||u||^2 >= 0.5 fall outside the series-bound validity region and
    are skipped and counted.
    """
    from .core import CurrentField

    if grid is None:
        grid = TorusGrid(3, 16, 4.0 * np.pi)
    snd = grid.dim / 2.0
    dt = window / (num_slices - 1)
    vec = np.zeros(grid.dim)
    vec[0] = v_sup
    v = CurrentField.constant(grid, vec) if v_sup > 0 else CurrentField.zero(grid)
    report = RatioReport(
        "nonlinear",
        config={
            "eps_list": list(eps_list),
            "amplitude_list": list(amplitude_list),
            "samples": samples,
            "amplitude_units": "F cap Z norm of the free trajectory",
            "v_sup": v_sup,
            "window": window,
            "num_slices": num_slices,
            "base_seed": base_seed,
            "convention": convention,
        },
    )
    for ie, eps in enumerate(eps_list):
        for s in range(samples):
            seed = base_seed + 10000 * ie + s
            base0 = gaussian_band_field(grid, seed, normalize="linf", amplitude=1.0)
            base = semigroup_trajectory(base0, eps, dt, num_slices)
            base_norm = fz_norm(base, snd)
            for amp in amplitude_list:
                descr = {
                    "k": 0,
                    "eps": eps,
                    "amplitude": amp,
                    "seed": seed,
                    "grid": _grid_tag(grid),
                }
                if base_norm < 1e-300:
                    report.skip("degenerate sample (zero norm)", **descr)
                    continue
                u_norm = amp
                if u_norm ** 2 >= 0.5:
                    report.skip("outside series-bound validity (||u||^2 >= 0.5)", **descr)
                    continue
                scale = amp / base_norm
                traj = SpaceTimeField(grid, dt, scale * base.values)
                j_traj = _nonlinearity_trajectory(traj, v, eps, convention)
                lhs = norm_space(j_traj, "N", snd)
                rhs = nonlinear_bracket(u_norm, v.sup_norm)
                if rhs < 1e-300:
                    report.skip("RHS = 0", **descr)
                    continue
                report.record(component="nonlinear", lhs=lhs, rhs=rhs, ratio=lhs / rhs, **descr)
    return report.finalize()


def scaling_exponent(
    grid,
    eps,
    v,
    lambdas,
    seed=0,
    window=0.25,
    num_slices=17,
    convention="section4",
):
    """Fitted power of ||J(lambda u)||_{N^{n/2}} over a lambda range
    (log-log least squares)."""
    snd = grid.dim / 2.0
    dt = window / (num_slices - 1)
    base = gaussian_band_field(grid, seed, normalize="linf", amplitude=1.0)
    traj = semigroup_trajectory(base, eps, dt, num_slices)
    norms = []
    for lam in lambdas:
        scaled = SpaceTimeField(grid, dt, lam * traj.values)
        j_traj = _nonlinearity_trajectory(scaled, v, eps, convention)
        norms.append(norm_space(j_traj, "N", snd))
    logs = np.log(np.asarray(norms))
    logl = np.log(np.asarray(lambdas, dtype=float))
    slope = np.polyfit(logl, logs, 1)[0]
    return float(slope), norms


# ---------------------------------------------------------------------------
# contraction measurement


def measure_contraction(
    u0_a,
    u0_shared,
    v,
    eps,
    iters,
    dt,
    t_end,
    convention="section4",
    floor=1e-13,
):
    """Per-iteration ratios ||Psi(u1) - Psi(u2)|| / ||u1 - u2|| in the
    approximate F cap Z norm, for two starting trajectories driven through
    the Duhamel map with the shared initial datum.

    Ratios whose denominator sits at the rounding floor are skipped (the
    u1 = u2 case has difference zero by construction).
    """
    grid = u0_shared.grid
    snd = grid.dim / 2.0
    num_slices = int(round(t_end / dt)) + 1
    traj1 = semigroup_trajectory(u0_shared, eps, dt, num_slices)
    traj2 = semigroup_trajectory(u0_a, eps, dt, num_slices)
    scale = max(fz_norm(traj1, snd), fz_norm(traj2, snd), 1e-300)
    report = RatioReport(
        "contraction",
        config={
            "eps": eps,
            "iters": iters,
            "dt": dt,
            "t_end": t_end,
            "convention": convention,
            "floor": floor,
        },
    )
    diff = SpaceTimeField(grid, dt, traj1.values - traj2.values)
    d_prev = fz_norm(diff, snd)
    for it in range(iters):
        traj1 = picard_map(traj1, u0_shared, v, eps, convention=convention)
        traj2 = picard_map(traj2, u0_shared, v, eps, convention=convention)
        diff = SpaceTimeField(grid, dt, traj1.values - traj2.values)
        d_new = fz_norm(diff, snd)
        if d_prev <= floor * scale:
            report.skip("difference at rounding floor", iteration=it, k=0, eps=eps)
        else:
            report.record(
                component="contraction",
                iteration=it,
                k=0,
                eps=eps,
                lhs=d_new,
                rhs=d_prev,
                ratio=d_new / d_prev,
            )
        d_prev = d_new
    report.finalize()
    valid = report.ratios()
    report.aggregates["asymptotic_ratio"] = valid[-1] if valid else None
    report.aggregates["smallest_ratio"] = min(valid) if valid else None
    return report


# ---------------------------------------------------------------------------
# smallness sweep


@dataclass
class SweepReport:
    eps_list: list
    amplitudes: list
    v_amps: list
    cells: list = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    monotone: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def finalize(self):
        for eps in self.eps_list:
            for va in self.v_amps:
                col = sorted(
                    (c for c in self.cells if c["eps"] == eps and c["v_amp"] == va),
                    key=lambda c: c["amplitude"],
                )
                flags = [c["converged"] for c in col]
                # down-closed: no converged cell above a diverged one
                monotone = True
                seen_diverged = False
                threshold = 0.0
                for cell, ok in zip(col, flags):
                    if ok and seen_diverged:
                        monotone = False
                    if not ok:
                        seen_diverged = True
                    if ok and not seen_diverged:
                        threshold = cell["amplitude"]
                key = f"eps={eps:g}/v={va:g}"
                self.thresholds[key] = threshold
                self.monotone[key] = monotone
        return self

    def to_dict(self):
        return {
            "generator": GENERATOR_NAME,
            "config": self.config,
            "eps_list": self.eps_list,
            "amplitudes": self.amplitudes,
            "v_amps": self.v_amps,
            "cells": self.cells,
            "thresholds": self.thresholds,
            "monotone": self.monotone,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_phase_csv(self, path, v_amp=None):
        """CSV matrix: rows are amplitudes, columns eps; 1 converged, 0 not."""
        if v_amp is None:
            v_amp = self.v_amps[0]
        lookup = {
            (c["eps"], c["amplitude"]): int(c["converged"])
            for c in self.cells
            if c["v_amp"] == v_amp
        }
        with open(path, "w") as fh:
            fh.write("amplitude," + ",".join(f"eps={e:g}" for e in self.eps_list) + "\n")
            for a in self.amplitudes:
                row = [repr(a)] + [str(lookup.get((e, a), "")) for e in self.eps_list]
                fh.write(",".join(row) + "\n")


def smallness_sweep(
    eps_list,
    amplitude_grid,
    v_amp_list=(0.0,),
    grid=None,
    window=1.0,
    num_slices=49,
    base_seed=0,
    max_iters=12,
    tol=1e-12,
    convention="section4",
    data_shells=None,
):
    """Convergence phase diagram of picard_solve over (eps, amplitude, |v|).

    A cell is converged when the tracked difference norm reaches tol
    within the iteration budget; its status records whether the budget ran
    out, the ratio test fired, or norms left the finite range.  The
    initial-data shape (upper dyadic shells by default, where the gradient
    nonlinearity bites) is drawn once per (eps, v) column and rescaled
    across amplitudes, so the converged set along each column is
    meaningfully monotone.  Per-cell failures are recorded in-cell.
    """
    from .core import CurrentField
    from .dyadic import resolvable_shells

    if grid is None:
        grid = TorusGrid(3, 16, 2.0 * np.pi)
    if data_shells is None:
        avail = resolvable_shells(grid)
        data_shells = avail[-3:-1] if len(avail) > 3 else avail
    dt = window / (num_slices - 1)
    report = SweepReport(
        eps_list=list(eps_list),
        amplitudes=list(amplitude_grid),
        v_amps=list(v_amp_list),
        config={
            "grid": _grid_tag(grid),
            "window": window,
            "num_slices": num_slices,
            "base_seed": base_seed,
            "max_iters": max_iters,
            "tol": tol,
            "convention": convention,
            "data_shells": list(data_shells),
            "amplitude_units": "sup norm of u0",
        },
    )

    def one(job):
        ie, eps, iv, v_amp, ia, amp = job
        seed = base_seed + 100 * ie + 10 * iv
        base = gaussian_band_field(grid, seed, shells=data_shells, normalize="linf", amplitude=1.0)
        u0 = type(base)(grid, amp * base.values, base.representation)
        if v_amp > 0:
            vec = np.zeros(grid.dim)
            vec[0] = v_amp
            v = CurrentField.constant(grid, vec)
        else:
            v = CurrentField.zero(grid)
        cell = {"eps": eps, "v_amp": v_amp, "amplitude": amp, "seed": seed}
        try:
            _, prep = picard_solve(
                u0, v, eps, dt, window, max_iters=max_iters, tol=tol, convention=convention
            )
            cell["converged"] = bool(prep.converged)
            cell["iterations"] = prep.iterate_count
            if prep.converged:
                cell["status"] = "converged"
            elif "ratios" in prep.notes:
                cell["status"] = "diverged (ratio >= 1)"
            elif "non-finite" in prep.notes:
                cell["status"] = "diverged (non-finite)"
            else:
                cell["status"] = "not converged (budget)"
            ratios = [r for r in prep.ratios if np.isfinite(r)]
            cell["final_ratio"] = ratios[-1] if ratios else None
        except Exception as exc:  # recorded, never aborts the sweep
            cell["converged"] = False
            cell["iterations"] = 0
            cell["final_ratio"] = None
            cell["status"] = "error"
            cell["error"] = f"{type(exc).__name__}: {exc}"
        return cell

    jobs = [
        (ie, eps, iv, v_amp, ia, amp)
        for ie, eps in enumerate(eps_list)
        for iv, v_amp in enumerate(v_amp_list)
        for ia, amp in enumerate(amplitude_grid)
    ]
    report.cells = _map_jobs(one, jobs)
    return report.finalize()
