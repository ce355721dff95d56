"""Scenario execution: experiment phases, file outputs, run manifests.

A run always follows the same skeleton: draw box-uniform initial
conditions, integrate a transient, start the measurement clock (t0),
evolve a homogeneous tangent to the horizon with checkpoints, then run
whatever noise protocol the scenario adds.  Two clocks are recorded:
absolute model time (t0 at `transient`) and the measurement clock used
in every output file (0 at t0); the noise clock restarts at the noise
onset.

Scenario protocols on top of the common part:

    incoherence / sync / partial / *_chimera
        outputs come from the deterministic tangent run
    uniform_noise
        a second run from the t0 state under uniform noise produces the
        spacetime, snapshot and incoherence outputs; the incoherence
        average starts at the first checkpoint
    localized_noise
        after the tangent run, a reference trajectory and one noise-
        kicked trajectory per extracted region measure how long the
        localized perturbation persists

The maximal-exponent reference for region extraction is the growth rate
at the final checkpoint of the run's own tangent evolution; the profile
defining the regions is the one at the first checkpoint.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..integrator import SamplingPlan, advance, advance_with_noise, advance_with_tangent
from ..lyapunov import identity_check, ils_profile, max_le_estimate
from ..model import DivergenceError, EnsembleState, NoiseSpec, random_initial_state
from ..tangent import init_homogeneous
from ..analysis import (
    PersistenceResult,
    RegionSpec,
    TrajectorySamples,
    boundary_zones,
    extract_regions,
    incoherence_from_sums,
    incoherent_arc,
    perturbation_persistence,
    stable_boundaries,
)
from .config import RunConfig, with_seeds
from .snapshots import fmt, save, write_csv

# protocol constants (runner policy, not config keys)
N_STABILITY_SNAPSHOTS = 10   # 1 time unit apart, ending at t0
DELTA_STRIDE = 0.1           # sampling stride of the incoherence average
PERSIST_HORIZON = 2000.0     # length of the paired persistence runs
PERSIST_STRIDE = 0.5         # sampling stride of the persistence runs
QUIET_WINDOW = 60.0          # ~10 orbit periods; decay needs this much quiet
NOISE_HALF_WIDTH = 10        # localized noise covers 21 oscillators
PERSIST_THRESHOLD_FRAC = 0.01  # of the attractor diameter (x extent)
DIFF_FIELD_STRIDE = 2.0      # output stride of the |perturbed - reference| field


@dataclass
class RunManifest:
    status: str
    scenario: str
    artifact_version: str
    runtime_seconds: float
    config: dict
    files: dict
    warnings: list
    diagnostics: dict
    clocks: dict
    error: str | None = None

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("status", "scenario", "artifact_version", "runtime_seconds",
                 "config", "files", "warnings", "diagnostics", "clocks", "error")}


def _json_safe(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_json_safe(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, Path):
        return str(v)
    return v


def _config_echo(cfg: RunConfig) -> dict:
    m, g, s = cfg.model, cfg.integration, cfg.seeds
    noise = None
    if cfg.noise is not None:
        noise = dict(d=cfg.noise.intensity, i1=cfg.noise.spatial_lo,
                     i2=cfg.noise.spatial_hi,
                     tn=None if cfg.noise.unbounded else cfg.noise.t_end,
                     unbounded=cfg.noise.unbounded, seed=cfg.noise.seed,
                     shared_component=cfg.noise.shared_component)
    return _json_safe(dict(
        scenario=cfg.scenario, a=m.a, b=m.b, c=m.c, n=m.n_osc, p=m.p_radius,
        sigma=m.sigma, dt=g.dt, dt_stochastic=g.dt_stochastic,
        scheme=g.scheme.value, divergence_bound=g.divergence_bound,
        transient=cfg.transient, t0_after_transient=cfg.t0_after_transient,
        horizon=cfg.horizon, checkpoints=list(cfg.checkpoints),
        seeds=dict(init_state=s.init_state, init_tangent=s.init_tangent,
                   noise=s.noise),
        noise=noise, output_dir=str(cfg.output_dir)))


def _round_stride(target, dt):
    return max(1, int(round(target / dt))) * dt


def _settle(cfg: RunConfig):
    """Transient integration; returns the t0 state and the stability snapshots."""
    rng = np.random.default_rng(cfg.seeds.init_state)
    s = random_initial_state(cfg.model, rng)
    if not cfg.t0_after_transient:
        return s, [s.copy()]
    n_walk = N_STABILITY_SNAPSHOTS - 1
    if cfg.transient < n_walk:
        n_walk = int(cfg.transient)
    s, _ = advance(s, cfg.model, cfg.integration, cfg.transient - n_walk)
    snaps = [s.copy()]
    for _ in range(n_walk):
        s, _ = advance(s, cfg.model, cfg.integration, 1.0)
        snaps.append(s.copy())
    return s, snaps


@dataclass
class IlsPhase:
    state_end: EnsembleState
    checkpoints: list
    profiles: dict
    le: object
    samples: object
    spacetime_stride: float


def _ils_phase(cfg: RunConfig, state: EnsembleState) -> IlsPhase:
    ts = init_homogeneous(cfg.model.n_osc, cfg.seeds.init_tangent, t0=state.t)
    dt = cfg.integration.dt
    st_stride = _round_stride(max(10 * dt, cfg.horizon / 1000.0), dt)
    plan = SamplingPlan(delta_every=_round_stride(DELTA_STRIDE, dt),
                        xrow_every=st_stride)
    state, ts_end, cks, samples = advance_with_tangent(
        state, ts, cfg.model, cfg.integration, cfg.horizon,
        checkpoint_times=cfg.checkpoints, plan=plan)
    profiles = {T: ils_profile(snap) for T, snap in cks}
    return IlsPhase(state, cks, profiles, max_le_estimate(cks), samples, st_stride)


def _clamped_window(center, n):
    """21-oscillator window around center, shifted to avoid wrapping (1-based)."""
    lo = center - NOISE_HALF_WIDTH
    hi = center + NOISE_HALF_WIDTH
    if lo < 0:
        hi -= lo
        lo = 0
    if hi > n - 1:
        lo -= hi - (n - 1)
        hi = n - 1
    return lo + 1, hi + 1


def _sampled_run(state, cfg, duration, stride, noise=None, rng=None):
    """Trajectory samples on a fixed stride grid, optionally noise-kicked.

    The returned TrajectorySamples includes the t=0 row (the shared
    state at the noise onset).  When noise is given, the stochastic leg
    covers [0, t_end] and sampling resumes on the stride grid afterwards
    (the stride must exceed the noise window).
    """
    m, g = cfg.model, cfg.integration
    rows = [np.stack([state.x, state.y, state.z])]
    times = [0.0]
    state = state.copy()
    if noise is not None and not noise.unbounded and noise.t_end > 0:
        if noise.t_end >= stride:
            raise ValueError("persistence stride must exceed the noise window")
        state.t = 0.0
        state, _ = advance_with_noise(state, m, noise, rng, g, noise.t_end)
        pad = stride - noise.t_end
        state, _ = advance(state, m, g, pad)
        rows.append(np.stack([state.x, state.y, state.z]))
        times.append(stride)
        remaining = duration - stride
    else:
        remaining = duration
    state, samples = advance(state, m, g, remaining,
                             SamplingPlan(traj_every=stride))
    base = times[-1]
    for k in range(samples.traj.shape[0]):
        times.append(base + (k + 1) * stride)
    xyz = np.concatenate([np.stack(rows), samples.traj]) if rows else samples.traj
    return TrajectorySamples(np.asarray(times), xyz), state


def run_scenario(cfg: RunConfig) -> RunManifest:
    """Execute one scenario end to end and write all outputs."""
    started = time.perf_counter()
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    warnings_log = []
    diag = {}
    clocks = {"t0_absolute": cfg.transient if cfg.t0_after_transient else 0.0}
    status, error = "completed", None

    try:
        state0, snaps = _settle(cfg)
        t0_abs = state0.t

        boundaries = stable_boundaries(snaps)
        zone_counts = [boundary_zones(s).size for s in snaps]
        diag["boundary_zone_counts"] = zone_counts
        diag["boundaries"] = None if boundaries is None \
            else [int(b) + 1 for b in boundaries]

        save(state0, None, outdir / "snapshot_t0.csv")
        files["snapshot_t0.csv"] = {"rows": cfg.model.n_osc}

        phase = _ils_phase(cfg, state0)
        lam_max = phase.le.lambda_max
        diag["lambda_max"] = lam_max
        diag["lambda_max_tail_fluctuation"] = phase.le.tail_fluctuation
        diag["identity_residuals"] = {fmt(T): identity_check(p)
                                      for T, p in phase.profiles.items()}

        prof0 = phase.profiles[cfg.checkpoints[0]]
        b_for_regions = boundaries if boundaries is not None \
            else boundary_zones(state0)
        region1, region2 = extract_regions(prof0, b_for_regions, lam_max)
        for label, reg in (("I", region1), ("II", region2)):
            diag[f"region_{label}"] = None if reg is None else \
                {"lo": reg.lo + 1, "hi": reg.hi + 1}
            if reg is None:
                warnings_log.append(f"regime lacks region {label}")

        rows = []
        for T in cfg.checkpoints:
            p = phase.profiles[T]
            for i in range(cfg.model.n_osc):
                rows.append((T, i + 1, p.lambda_i[i], p.s_i[i]))
        files["ils_profile.csv"] = {"rows": write_csv(
            outdir / "ils_profile.csv", ("T", "i", "lambda_i", "s_i"), rows)}
        files["le_series.csv"] = {"rows": write_csv(
            outdir / "le_series.csv", ("T", "lambda", "r_ils"),
            [(T, lam, phase.profiles[T].r_ils)
             for T, lam in phase.le.convergence_series])}

        # scenario-specific outputs
        if cfg.scenario == "uniform_noise":
            rng = np.random.default_rng(cfg.noise.seed)
            dt_s = cfg.integration.dt_stochastic
            st_stride = _round_stride(phase.spacetime_stride, dt_s)
            plan = SamplingPlan(delta_every=_round_stride(DELTA_STRIDE, dt_s),
                                delta_start=cfg.checkpoints[0],
                                xrow_every=st_stride)
            noisy_end, nsamp = advance_with_noise(
                state0, cfg.model, cfg.noise, rng, cfg.integration,
                cfg.horizon, plan)
            clocks["noise_onset_absolute"] = t0_abs
            inc = incoherence_from_sums(nsamp.delta_sum, nsamp.delta_count,
                                        (cfg.checkpoints[0], cfg.horizon),
                                        DELTA_STRIDE)
            spacetime_rows, spacetime_src = nsamp, "noisy run"
            end_state = noisy_end
            if region2 is not None:
                # the broad elevation: exclude the sharp boundary peaks
                mask = np.zeros(cfg.model.n_osc, dtype=bool)
                if b_for_regions is not None and len(b_for_regions):
                    for b in b_for_regions:
                        lo = np.arange(b - 10, b + 11) % cfg.model.n_osc
                        mask[lo] = True
                bulk = np.where(mask, -np.inf, inc.delta_i)
                diag["delta_bulk_argmax"] = int(np.argmax(bulk)) + 1
                diag["delta_bulk_argmax_in_region_II"] = \
                    bool(region2.contains(int(np.argmax(bulk))))
        else:
            inc = incoherence_from_sums(phase.samples.delta_sum,
                                        phase.samples.delta_count,
                                        (0.0, cfg.horizon), DELTA_STRIDE)
            spacetime_rows, spacetime_src = phase.samples, "tangent run"
            end_state = phase.state_end

        diag["delta_max"] = float(inc.delta_i.max())
        diag["delta_median"] = float(np.median(inc.delta_i))
        arc = incoherent_arc(inc.delta_i)
        diag["incoherent_arc"] = None if arc is None else \
            {"lo": arc.lo + 1, "hi": arc.hi + 1}
        files["delta_profile.csv"] = {"rows": write_csv(
            outdir / "delta_profile.csv", ("i", "delta_i"),
            [(i + 1, d) for i, d in enumerate(inc.delta_i)])}

        st_rows = []
        for k, t in enumerate(spacetime_rows.x_times):
            t_meas = t if cfg.scenario == "uniform_noise" else t - t0_abs
            for i in range(cfg.model.n_osc):
                st_rows.append((t_meas, i + 1, spacetime_rows.x_rows[k, i]))
        files["spacetime.csv"] = {"rows": write_csv(
            outdir / "spacetime.csv", ("t", "i", "x"), st_rows)}
        diag["spacetime_source"] = spacetime_src

        end_name = f"snapshot_t{cfg.horizon:g}.csv"
        save(end_state, None, outdir / end_name)
        files[end_name] = {"rows": cfg.model.n_osc}

        if cfg.scenario == "localized_noise":
            onset = phase.state_end
            clocks["noise_onset_absolute"] = onset.t
            ref, _ = _sampled_run(onset, cfg, PERSIST_HORIZON, PERSIST_STRIDE)
            diameter = float(ref.x.max() - ref.x.min())
            threshold = PERSIST_THRESHOLD_FRAC * diameter
            diag["persistence_threshold"] = threshold

            experiments = []
            if cfg.noise.spatial_lo is not None:
                center0 = (cfg.noise.spatial_lo - 1 + cfg.noise.spatial_hi - 1) // 2
                label, region = "custom", RegionSpec(
                    "custom", cfg.noise.spatial_lo - 1, cfg.noise.spatial_hi - 1,
                    cfg.model.n_osc)
                for lbl, reg in (("I", region1), ("II", region2)):
                    if reg is not None and reg.contains(center0):
                        label, region = lbl, reg
                experiments.append((label, cfg.noise, region))
            else:
                for label, reg in (("I", region1), ("II", region2)):
                    if reg is None:
                        continue
                    lo1, hi1 = _clamped_window(reg.center, cfg.model.n_osc)
                    experiments.append((label, replace(
                        cfg.noise, spatial_lo=lo1, spatial_hi=hi1), reg))

            pers_rows = []
            for label, nspec, region in experiments:
                rng = np.random.default_rng(nspec.seed)
                pert, _ = _sampled_run(onset, cfg, PERSIST_HORIZON,
                                       PERSIST_STRIDE, noise=nspec, rng=rng)
                res = perturbation_persistence(ref, pert, region, threshold,
                                               QUIET_WINDOW)
                pers_rows.append((label, nspec.seed, res.decay_time))
                diag[f"persistence_{label}"] = dict(
                    decay_time=res.decay_time, no_decay=res.no_decay,
                    window=[nspec.spatial_lo, nspec.spatial_hi])
                step = max(1, int(round(DIFF_FIELD_STRIDE / PERSIST_STRIDE)))
                drows = []
                for k in range(0, ref.times.size, step):
                    dx = np.abs(pert.x[k] - ref.x[k])
                    for i in range(cfg.model.n_osc):
                        drows.append((ref.times[k], i + 1, dx[i]))
                name = f"diff_spacetime_{label}.csv"
                files[name] = {"rows": write_csv(outdir / name,
                                                 ("t", "i", "dx"), drows)}
            files["persistence.csv"] = {"rows": write_csv(
                outdir / "persistence.csv", ("region", "seed", "decay_time"),
                pers_rows)}

    except (DivergenceError, AssertionError, ValueError, ZeroDivisionError) as e:
        status, error = "failed", f"{type(e).__name__}: {e}"

    manifest = RunManifest(
        status=status, scenario=cfg.scenario, artifact_version=__version__,
        runtime_seconds=time.perf_counter() - started,
        config=_config_echo(cfg), files=files, warnings=warnings_log,
        diagnostics=_json_safe(diag), clocks=_json_safe(clocks), error=error)
    tmp = outdir / "manifest.json.tmp"
    with open(tmp, "w") as f:
        json.dump(manifest.to_dict(), f, indent=1, default=float)
        f.write("\n")
    os.replace(tmp, outdir / "manifest.json")
    return manifest


def sweep(cfg: RunConfig, seeds, jobs: int = 1):
    """Independent runs for each seed, in isolated output subdirectories."""
    configs = []
    for k in seeds:
        sub = replace_output(cfg, Path(cfg.output_dir) / f"seed_{k}")
        configs.append(with_seeds(sub, init_state=k, init_tangent=k, noise=k))
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(run_scenario, configs))
    return [run_scenario(c) for c in configs]


def replace_output(cfg: RunConfig, output_dir) -> RunConfig:
    new = with_seeds(cfg)
    new.output_dir = Path(output_dir)
    return new


def find_regime(cfg: RunConfig, seeds, probe_horizon: float = 2000.0):
    """Scan state seeds and report which produce the scenario's regime.

    Each probe settles the transient, then measures a short tangent leg
    (growth-rate tail), the stability of the boundary structure, and the
    incoherence profile.  Qualification: the partial-coherence family
    needs a stable two-cluster profile with a positive tail growth rate;
    the chimera scenarios need coexistence of a rough arc with a smooth
    remainder.  Returns one dict per seed and writes regime_scan.csv.
    """
    rows = []
    for k in seeds:
        ck = with_seeds(cfg, init_state=k, init_tangent=k, noise=k)
        state, snaps = _settle(ck)
        boundaries = stable_boundaries(snaps)
        zone_counts = [int(boundary_zones(s).size) for s in snaps]
        ts = init_homogeneous(ck.model.n_osc, ck.seeds.init_tangent, t0=state.t)
        plan = SamplingPlan(delta_every=_round_stride(DELTA_STRIDE,
                                                      ck.integration.dt))
        _, _, cks, samples = advance_with_tangent(
            state, ts, ck.model, ck.integration, probe_horizon,
            checkpoint_times=[probe_horizon / 2, probe_horizon], plan=plan)
        l1 = cks[0][1].full_log_norm()
        l2 = cks[1][1].full_log_norm()
        lam_tail = (l2 - l1) / (probe_horizon / 2)
        delta = samples.delta_sum / max(1, samples.delta_count)
        arc = incoherent_arc(delta)
        coexist = False
        if arc is not None and delta.max() > 1e-2:
            outside = np.setdiff1d(np.arange(ck.model.n_osc), arc.indices)
            coexist = (10 <= arc.size <= ck.model.n_osc // 2
                       and outside.size > 0
                       and float(np.median(delta[outside])) < 0.05 * delta.max())
        two_cluster = boundaries is not None and lam_tail > 1e-3
        if cfg.scenario in ("phase_chimera", "amplitude_chimera"):
            qualifies = coexist
        else:
            qualifies = two_cluster
        rows.append(dict(
            seed=k, lam_tail=float(lam_tail), zone_counts=zone_counts,
            boundaries=None if boundaries is None else [int(b) + 1 for b in boundaries],
            delta_max=float(delta.max()),
            arc=None if arc is None else [arc.lo + 1, arc.hi + 1],
            two_cluster=bool(two_cluster), coexistence=bool(coexist),
            qualifies=bool(qualifies)))
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_csv(outdir / "regime_scan.csv",
              ("seed", "lam_tail", "two_cluster", "coexistence", "qualifies"),
              [(r["seed"], r["lam_tail"], int(r["two_cluster"]),
                int(r["coexistence"]), int(r["qualifies"])) for r in rows])
    return rows
