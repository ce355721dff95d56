"""Ring of nonlocally coupled Roessler oscillators.

Each of the N oscillators carries three variables (x_i, y_i, z_i) and is
diffusively coupled, in all three components, to its p_radius nearest
neighbors on each side of a periodic ring:

    dx_i = -y_i - z_i            + (sigma / 2P) * sum_{k=i-P}^{i+P} (x_k - x_i)
    dy_i =  x_i + a y_i          + (sigma / 2P) * sum (y_k - y_i)
    dz_i =  b + z_i (x_i - c)    + (sigma / 2P) * sum (z_k - z_i)

with indices wrapping modulo N.  The functions here are the reference
(pure, rotation-equivariant) evaluations used for testing and occasional
calls; long integrations go through :mod:`ils_lab.integrator`, which
realizes the same coupling with O(N) prefix sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DivergenceError(RuntimeError):
    """A state component left the finite / bounded domain.

    Carries the oscillator index (0-based) and, when known, the model
    time and step index at which the problem appeared.
    """

    def __init__(self, message, oscillator=-1, t=None, step=None):
        super().__init__(message)
        self.oscillator = oscillator
        self.t = t
        self.step = step


@dataclass(frozen=True)
class ModelParams:
    """Structural and dynamical parameters of the ring.

    a, b, c are the single-oscillator parameters, n_osc the ring size,
    p_radius the one-sided coupling range and sigma the coupling
    strength.  The coupling window must not wrap onto itself
    (2 * p_radius < n_osc).
    """

    a: float
    b: float
    c: float
    n_osc: int
    p_radius: int
    sigma: float

    def __post_init__(self):
        if self.n_osc < 3:
            raise ValueError("n must be >= 3")
        if self.p_radius < 1:
            raise ValueError("p must be >= 1")
        if 2 * self.p_radius >= self.n_osc:
            raise ValueError("2P must be < N")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def coupling_gain(self):
        """sigma / (2 P), the prefactor of the coupling sum."""
        return self.sigma / (2.0 * self.p_radius)

    def fixed_point(self):
        """Inner fixed point of the uncoupled oscillator.

        Solves x^2 - c x + a b = 0 for the root closer to the origin;
        y* = -x*/a and z* = x*/a.
        """
        x = (self.c - math.sqrt(self.c * self.c - 4.0 * self.a * self.b)) / 2.0
        return x, -x / self.a, x / self.a


@dataclass
class EnsembleState:
    """Full ring state (x_i, y_i, z_i) at model time t.

    Components must be finite; indexing is circular (i + N is i).
    """

    t: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if not (self.x.shape == self.y.shape == self.z.shape) or self.x.ndim != 1:
            raise ValueError("x, y, z must be 1-d arrays of equal length")
        for comp in (self.x, self.y, self.z):
            bad = np.flatnonzero(~np.isfinite(comp))
            if bad.size:
                raise DivergenceError(
                    f"non-finite state component at oscillator {bad[0]}",
                    oscillator=int(bad[0]), t=self.t)

    @property
    def n(self):
        return self.x.shape[0]

    def copy(self):
        return EnsembleState(self.t, self.x.copy(), self.y.copy(), self.z.copy())


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian forcing field D(i, t).

    The intensity D applies to oscillators i in [spatial_lo, spatial_hi]
    (1-based, inclusive) for t in [0, t_end] on the noise clock, and is
    zero otherwise.  unbounded=True makes the temporal window infinite
    (the uniform-noise case is spatial_lo=1, spatial_hi=N, unbounded).
    spatial_lo/spatial_hi may be None, meaning placement is resolved
    later by the scenario runner.  shared_component reuses one draw per
    oscillator for all three components instead of three independent
    draws; intensity 0 leaves trajectories bit-identical to the
    deterministic path.
    """

    intensity: float
    spatial_lo: int | None
    spatial_hi: int | None
    t_end: float
    unbounded: bool
    seed: int
    shared_component: bool = False

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("noise intensity must be >= 0")
        if (self.spatial_lo is None) != (self.spatial_hi is None):
            raise ValueError("spatial_lo and spatial_hi must be set together")
        if self.spatial_lo is not None:
            if self.spatial_lo < 1 or self.spatial_hi < self.spatial_lo:
                raise ValueError("need 1 <= spatial_lo <= spatial_hi")
        if not self.unbounded and not (self.t_end >= 0):
            raise ValueError("t_end must be >= 0 when bounded")

    @classmethod
    def uniform(cls, intensity, n_osc, seed, shared_component=False):
        return cls(intensity, 1, n_osc, math.inf, True, seed, shared_component)

    @classmethod
    def localized(cls, intensity, spatial_lo, spatial_hi, t_end, seed,
                  shared_component=False):
        return cls(intensity, spatial_lo, spatial_hi, t_end, False, seed,
                   shared_component)

    def intensity_field(self, n_osc):
        """Per-oscillator intensities as a length-N array (0-based)."""
        if self.spatial_lo is None:
            raise ValueError("noise placement not resolved")
        if self.spatial_hi > n_osc:
            raise ValueError("spatial_hi exceeds ring size")
        d = np.zeros(n_osc)
        d[self.spatial_lo - 1:self.spatial_hi] = self.intensity
        return d


def noise_intensity_at(spec: NoiseSpec, i: int, t: float) -> float:
    """D(i, t) for 1-based oscillator index i and noise-clock time t."""
    if spec.spatial_lo is None:
        raise ValueError("noise placement not resolved")
    if i < 1:
        raise ValueError("i is 1-based")
    inside_space = spec.spatial_lo <= i <= spec.spatial_hi
    inside_time = spec.unbounded or (0.0 <= t <= spec.t_end)
    return spec.intensity if (inside_space and inside_time) else 0.0


def _ring_coupling(u, p):
    # Offset-order accumulation: every oscillator sums the same sequence
    # of neighbor differences, so rotating the ring commutes with the
    # evaluation bit for bit, and homogeneous input gives exact zeros.
    acc = np.zeros_like(u)
    for d in range(-p, p + 1):
        if d != 0:
            acc += np.roll(u, -d) - u
    return acc


def vector_field(state: EnsembleState, params: ModelParams):
    """Time derivative (dx, dy, dz) of the full ring.

    Raises DivergenceError on non-finite input (EnsembleState already
    guards construction; this re-checks because callers may mutate the
    arrays in place).
    """
    if state.n != params.n_osc:
        raise ValueError("state size does not match params.n_osc")
    for comp in (state.x, state.y, state.z):
        bad = np.flatnonzero(~np.isfinite(comp))
        if bad.size:
            raise DivergenceError(
                f"non-finite state component at oscillator {bad[0]}",
                oscillator=int(bad[0]), t=state.t)
    g = params.coupling_gain
    p = params.p_radius
    dx = -state.y - state.z + g * _ring_coupling(state.x, p)
    dy = state.x + params.a * state.y + g * _ring_coupling(state.y, p)
    dz = params.b + state.z * (state.x - params.c) + g * _ring_coupling(state.z, p)
    return dx, dy, dz


def jacobian_apply(state: EnsembleState, params: ModelParams, xi: np.ndarray):
    """Action of the flow Jacobian at `state` on a tangent vector.

    xi has shape (N, 3); the result is Df(state) @ xi with the
    per-oscillator blocks [[0, -1, -1], [1, a, 0], [z_i, 0, x_i - c]]
    plus the same diffusive coupling operator as vector_field applied to
    each tangent component.  Linear in xi.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (params.n_osc, 3):
        raise ValueError(f"xi must have shape ({params.n_osc}, 3)")
    if state.n != params.n_osc:
        raise ValueError("state size does not match params.n_osc")
    g = params.coupling_gain
    p = params.p_radius
    tx, ty, tz = xi[:, 0], xi[:, 1], xi[:, 2]
    out = np.empty_like(xi)
    out[:, 0] = -ty - tz + g * _ring_coupling(tx, p)
    out[:, 1] = tx + params.a * ty + g * _ring_coupling(ty, p)
    out[:, 2] = state.z * tx + (state.x - params.c) * tz + g * _ring_coupling(tz, p)
    return out


def random_initial_state(params: ModelParams, rng) -> EnsembleState:
    """Box-uniform initial conditions: x, y in [-4, 4], z in [0, 2].

    Draw order is x block, then y block, then z block from the given
    generator (or seed).
    """
    rng = np.random.default_rng(rng)
    n = params.n_osc
    x = rng.uniform(-4.0, 4.0, n)
    y = rng.uniform(-4.0, 4.0, n)
    z = rng.uniform(0.0, 2.0, n)
    return EnsembleState(0.0, x, y, z)
