"""Fixed-step time integration for the ring, with optional tangent transport.

Two schemes are provided: a classical 4th-order Runge-Kutta step for
deterministic runs (the tangent, when present, is advanced through the
same intermediate stage states so state and tangent stay consistent),
and an Euler-Maruyama step for runs with additive noise.  Production
no-noise runs must use the deterministic scheme; the stochastic scheme
is order 1 and exists only for noise windows.

All long runs go through the advance_* drivers, which loop inside
compiled kernels and are bit-reproducible given identical inputs.
Random draws in the stochastic driver occur in a fixed, documented
order: one N x 3 block per step, oscillator-major, components x, y, z.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .model import DivergenceError, EnsembleState, ModelParams, NoiseSpec
from .tangent import TangentState


class Scheme(enum.Enum):
    RK4 = "rk4_deterministic"
    EULER_MARUYAMA = "euler_maruyama_stochastic"


@dataclass(frozen=True)
class IntegrationConfig:
    """Step sizes, scheme selection and the divergence guard.

    dt is the deterministic step; dt_stochastic the (smaller) step used
    inside noise-active windows.  Any component whose magnitude exceeds
    divergence_bound aborts the run with the offending step index.
    """

    dt: float = 0.01
    scheme: Scheme = Scheme.RK4
    divergence_bound: float = 1e6
    dt_stochastic: float = 0.001

    def __post_init__(self):
        if not (self.dt > 0) or not (self.dt_stochastic > 0):
            raise ValueError("step sizes must be positive")
        if not (self.divergence_bound > 0):
            raise ValueError("divergence_bound must be positive")


def windowed_coupling_sums(u, p_radius: int) -> np.ndarray:
    """O(N) circular window sums: S_i = sum_{k=i-P}^{i+P} u_k - (2P+1) u_i.

    Computed with circular prefix sums; agrees with the naive O(N*P)
    double loop to ~1e-13 absolute on O(1) data.
    """
    u = np.ascontiguousarray(u, dtype=float)
    n = u.shape[0]
    if p_radius < 1 or 2 * p_radius >= n:
        raise ValueError("need 1 <= P and 2P < N")
    return _kernels.coupling_sums(u, p_radius)


# ---------------------------------------------------------------------------
# sampling plumbing shared by the drivers

@dataclass(frozen=True)
class SamplingPlan:
    """What to record during a driver call, in time units (0 disables).

    delta_every    stride for accumulating the squared discrete curvature
                   of the x profile (running sum, O(N) memory)
    delta_start    earliest time (driver clock) that enters the average
    xrow_every     stride for storing x-profile rows (spacetime output)
    traj_every     stride for storing full (x, y, z) rows
    """

    delta_every: float = 0.0
    delta_start: float = 0.0
    xrow_every: float = 0.0
    traj_every: float = 0.0


@dataclass
class Samples:
    """Buffers filled by a driver call; times are on the caller's clock."""

    delta_sum: np.ndarray
    delta_count: int
    x_times: np.ndarray
    x_rows: np.ndarray
    traj_times: np.ndarray
    traj: np.ndarray


def _stride_steps(every, dt, what):
    if every <= 0:
        return 0
    steps = int(round(every / dt))
    if steps < 1 or abs(steps * dt - every) > 1e-9 * max(1.0, every):
        raise ValueError(f"{what} must be a positive multiple of dt")
    return steps


def _duration_steps(duration, dt):
    if duration < 0:
        raise ValueError("duration must be >= 0")
    steps = int(round(duration / dt))
    if abs(steps * dt - duration) > 1e-9 * max(1.0, duration):
        raise ValueError("duration must be a multiple of dt")
    return steps


class _Buffers:
    def __init__(self, n, nsteps, dt, plan: SamplingPlan):
        self.dt = dt
        self.delta_every = _stride_steps(plan.delta_every, dt, "delta_every")
        self.delta_start = _duration_steps(plan.delta_start, dt) if plan.delta_start else 0
        self.xrow_every = _stride_steps(plan.xrow_every, dt, "xrow_every")
        self.traj_every = _stride_steps(plan.traj_every, dt, "traj_every")
        self.delta_sum = np.zeros(n)
        self.delta_cnt = np.zeros(1, dtype=np.int64)
        nx = nsteps // self.xrow_every if self.xrow_every else 0
        nt = nsteps // self.traj_every if self.traj_every else 0
        self.x_rows = np.empty((nx, n))
        self.x_cnt = np.zeros(1, dtype=np.int64)
        self.traj = np.empty((nt, 3, n))
        self.traj_cnt = np.zeros(1, dtype=np.int64)

    def kernel_args(self):
        return (self.delta_every, self.delta_start, self.delta_sum, self.delta_cnt,
                self.xrow_every, self.x_rows, self.x_cnt,
                self.traj_every, self.traj, self.traj_cnt)

    def collect(self, t_start):
        nx = int(self.x_cnt[0])
        nt = int(self.traj_cnt[0])
        x_times = t_start + self.dt * self.xrow_every * np.arange(1, nx + 1)
        traj_times = t_start + self.dt * self.traj_every * np.arange(1, nt + 1)
        return Samples(self.delta_sum, int(self.delta_cnt[0]),
                       x_times, self.x_rows[:nx], traj_times, self.traj[:nt])


_NO_CK = (np.empty(0, dtype=np.int64), np.empty((0, 3, 0)), np.empty(0))


def _raise_for_status(status, step, osc, t_start, dt):
    if status == _kernels.OK:
        return
    t = t_start + (step + 1) * dt
    if status == _kernels.ZERO_TANGENT:
        raise ZeroDivisionError(f"tangent norm collapsed to zero at t={t}")
    kind = "non-finite value" if status == _kernels.NONFINITE else "divergence"
    raise DivergenceError(f"{kind} at oscillator {osc}, step {step}, t={t}",
                          oscillator=osc, t=t, step=step)


# ---------------------------------------------------------------------------
# single steps (the drivers below are these, looped in compiled code)

def step_deterministic(state: EnsembleState, tangent: TangentState | None,
                       params: ModelParams, cfg: IntegrationConfig):
    """One RK4 step of the state and, when given, the tangent.

    Returns (state', tangent'); tangent' is None when no tangent was
    supplied.  Requires cfg.scheme == Scheme.RK4.
    """
    if cfg.scheme is not Scheme.RK4:
        raise ValueError("step_deterministic requires the rk4_deterministic scheme")
    state, tangent, _, _ = _rk4_run(state, tangent, params, cfg, cfg.dt,
                                    SamplingPlan(), (), 0)
    return state, tangent


def step_stochastic(state: EnsembleState, params: ModelParams, noise: NoiseSpec,
                    rng, cfg: IntegrationConfig, *, drift: bool = True):
    """One Euler-Maruyama step with additive increments sqrt(2 D(i,t) dt) N(0,1).

    The noise clock is state.t.  Requires cfg.scheme ==
    Scheme.EULER_MARUYAMA.  drift=False freezes the deterministic part
    (test hook for pure-diffusion statistics).
    """
    if cfg.scheme is not Scheme.EULER_MARUYAMA:
        raise ValueError("step_stochastic requires the euler_maruyama_stochastic scheme")
    dt = cfg.dt_stochastic
    d_field = noise.intensity_field(state.n)
    if not noise.unbounded and not (0.0 <= state.t <= noise.t_end - dt / 2):
        d_field = np.zeros_like(d_field)
    amp = np.sqrt(2.0 * d_field * dt)
    cur = np.vstack([state.x, state.y, state.z])
    status, step, osc = _kernels.em_drive(
        cur, 1, dt, params.a, params.b, params.c, params.sigma, params.p_radius,
        cfg.divergence_bound, amp, noise.shared_component, rng, drift,
        *_Buffers(state.n, 1, dt, SamplingPlan()).kernel_args())
    _raise_for_status(status, step, osc, state.t, dt)
    return EnsembleState(state.t + dt, cur[0], cur[1], cur[2])


# ---------------------------------------------------------------------------
# long-run drivers

def _rk4_run(state, tangent, params, cfg, duration, plan, checkpoint_times,
             renorm_interval):
    dt = cfg.dt
    nsteps = _duration_steps(duration, dt)
    n = state.n
    if tangent is not None:
        if tangent.n != n:
            raise ValueError("tangent size does not match state")
        cur = np.vstack([state.x, state.y, state.z, tangent.xi.T])
        log_accum = tangent.log_accum
        renorm_every = _stride_steps(renorm_interval, dt, "renorm_interval") \
            if renorm_interval else 0
        ck_steps = np.array([_duration_steps(T, dt) for T in checkpoint_times],
                            dtype=np.int64)
        if ck_steps.size and (np.any(np.diff(ck_steps) <= 0) or ck_steps[0] < 1
                              or ck_steps[-1] > nsteps):
            raise ValueError("checkpoint times must be increasing, in (0, duration]")
        ck_xi = np.empty((ck_steps.size, 3, n))
        ck_la = np.empty(ck_steps.size)
    else:
        if checkpoint_times:
            raise ValueError("checkpoints need a tangent")
        cur = np.vstack([state.x, state.y, state.z])
        log_accum = 0.0
        renorm_every = 0
        ck_steps, ck_xi, ck_la = _NO_CK

    buf = _Buffers(n, nsteps, dt, plan)
    status, step, osc, log_out = _kernels.rk4_drive(
        cur, nsteps, dt, params.a, params.b, params.c, params.sigma,
        params.p_radius, cfg.divergence_bound, renorm_every, log_accum,
        ck_steps, ck_xi, ck_la, *buf.kernel_args())
    _raise_for_status(status, step, osc, state.t, dt)

    t_end = state.t + nsteps * dt
    new_state = EnsembleState(t_end, cur[0].copy(), cur[1].copy(), cur[2].copy())
    new_tangent = None
    checkpoints = []
    if tangent is not None:
        new_tangent = TangentState(cur[3:].T.copy(), log_out, tangent.t0,
                                   tangent.initial_full_norm, t_end)
        for j, s in enumerate(ck_steps):
            ts = TangentState(ck_xi[j].T.copy(), ck_la[j], tangent.t0,
                              tangent.initial_full_norm, state.t + s * dt)
            checkpoints.append((ts.t - ts.t0, ts))
    return (new_state, new_tangent, checkpoints, buf.collect(state.t))


def advance(state: EnsembleState, params: ModelParams, cfg: IntegrationConfig,
            duration: float, plan: SamplingPlan = SamplingPlan()):
    """Integrate the state deterministically for `duration` time units."""
    new_state, _, _, samples = _rk4_run(state, None, params, cfg, duration,
                                        plan, (), 0)
    return new_state, samples


def advance_with_tangent(state: EnsembleState, tangent: TangentState,
                         params: ModelParams, cfg: IntegrationConfig,
                         duration: float, checkpoint_times=(),
                         renorm_interval: float = 1.0,
                         plan: SamplingPlan = SamplingPlan()):
    """Joint state + tangent integration with periodic renormalization.

    checkpoint_times are horizons measured from the start of this call;
    at each one a snapshot of the tangent (with its log factors) is
    recorded before any renormalization due at the same step.  Returns
    (state', tangent', [(T, TangentState), ...], Samples).
    """
    return _rk4_run(state, tangent, params, cfg, duration, plan,
                    tuple(checkpoint_times), renorm_interval)


def advance_stochastic(state: EnsembleState, params: ModelParams,
                       noise: NoiseSpec, rng, cfg: IntegrationConfig,
                       duration: float, plan: SamplingPlan = SamplingPlan(),
                       *, drift: bool = True):
    """Euler-Maruyama integration over a noise-active window.

    The caller is responsible for restricting `duration` to the window
    where the noise acts (use advance_with_noise for the composed
    window-plus-tail protocol).  One N x 3 block of standard normals is
    consumed per step regardless of the spatial mask.
    """
    dt = cfg.dt_stochastic
    nsteps = _duration_steps(duration, dt)
    amp = np.sqrt(2.0 * noise.intensity_field(state.n) * dt)
    cur = np.vstack([state.x, state.y, state.z])
    buf = _Buffers(state.n, nsteps, dt, plan)
    status, step, osc = _kernels.em_drive(
        cur, nsteps, dt, params.a, params.b, params.c, params.sigma,
        params.p_radius, cfg.divergence_bound, amp, noise.shared_component,
        rng, drift, *buf.kernel_args())
    _raise_for_status(status, step, osc, state.t, dt)
    new_state = EnsembleState(state.t + nsteps * dt, cur[0].copy(),
                              cur[1].copy(), cur[2].copy())
    return new_state, buf.collect(state.t)


def advance_with_noise(state: EnsembleState, params: ModelParams,
                       noise: NoiseSpec, rng, cfg: IntegrationConfig,
                       duration: float, plan: SamplingPlan = SamplingPlan()):
    """Noise window followed by a deterministic tail.

    The noise clock starts at 0 on entry.  The stochastic scheme runs
    exactly over [0, min(t_end, duration)], switching to RK4 at the
    window boundary; for unbounded noise the whole call is stochastic.
    Sample buffers from the two legs are concatenated (delta sums add).
    """
    if noise.unbounded:
        window = duration
    else:
        window = min(noise.t_end, duration)
    state = state.copy()
    t_start = state.t
    state.t = 0.0

    parts = []
    if window > 0:
        state, s1 = advance_stochastic(state, params, noise, rng, cfg, window, plan)
        parts.append(s1)
    tail = duration - window
    if tail > 0:
        tail_plan = replace(plan, delta_start=max(0.0, plan.delta_start - window))
        state, s2 = advance(state, params, cfg, tail, tail_plan)
        parts.append(s2)

    state.t = t_start + duration
    if len(parts) == 1:
        return state, parts[0]
    merged = Samples(
        parts[0].delta_sum + parts[1].delta_sum,
        parts[0].delta_count + parts[1].delta_count,
        np.concatenate([p.x_times for p in parts]),
        np.concatenate([p.x_rows for p in parts]),
        np.concatenate([p.traj_times for p in parts]),
        np.concatenate([p.traj for p in parts]),
    )
    return state, merged
