"""Finite-time growth rates and the per-oscillator sensitivity profile.

Given a tangent vector evolved from a homogeneous initial perturbation,
this module extracts

  * the full-vector finite-time growth rate  L(T) = (1/T) ln(|xi(T)| / |xi(0)|),
  * the per-oscillator rates  L_i(T) = (1/T) ln(|xi_i(T)| / |xi_i(0)|)
    (the index of local sensitivity), which for a homogeneous start
    equal (1/T) ln( sqrt(N) |xi_i(T)| / |xi(0)| ),
  * the spatial range R = max_i L_i - min_i L_i and the rescaled profile
    S_i = (L_i - L) / R,
  * a long-horizon estimate of the maximal Lyapunov exponent from the
    same evolution.

With Euclidean norms the exact algebraic identity

    exp(2 L T) = (1/N) sum_i exp(2 L_i T)

holds (it is Pythagoras on the per-oscillator blocks), and every profile
is gated on it at construction.  All exponential means are evaluated in
log space; exp(2 L T) itself is never formed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .tangent import TangentState, per_oscillator_log_norms

IDENTITY_TOL = 1e-9


def _logsumexp(v):
    m = np.max(v)
    if not np.isfinite(m):
        return m
    return m + np.log(np.sum(np.exp(v - m)))


def finite_time_growth(ts: TangentState, T: float | None = None) -> float:
    """Full-vector growth rate over horizon T.

    T defaults to the tangent's own elapsed horizon; if given it must
    match.  Raises for T <= 0.
    """
    if T is None:
        T = ts.horizon
    elif abs(T - ts.horizon) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"T={T} does not match the tangent horizon {ts.horizon}")
    if T <= 0:
        raise ValueError("T must be positive")
    return (ts.full_log_norm() - np.log(ts.initial_full_norm)) / T


@dataclass
class IlsProfile:
    """Per-oscillator growth rates with range and rescaled shape.

    lambda_i[i] is the growth rate of the perturbation's projection on
    oscillator i, lambda_full the full-vector rate.  r_ils is the
    spatial range over the finite entries; s_i the profile shifted by
    lambda_full and rescaled by r_ils (zeros when r_ils is 0; -inf
    entries stay -inf).  Construction verifies the exponential-mean
    identity to IDENTITY_TOL and the implied sandwich bounds.
    """

    t0: float
    horizon: float
    lambda_i: np.ndarray
    lambda_full: float
    r_ils: float
    s_i: np.ndarray

    def __post_init__(self):
        resid = identity_check(self)
        if not resid < IDENTITY_TOL:
            raise AssertionError(
                f"exponential-mean identity violated: residual {resid:.3e}")
        n = self.lambda_i.shape[0]
        finite = self.lambda_i[np.isfinite(self.lambda_i)]
        hi = finite.max()
        lo = hi - np.log(n) / (2.0 * self.horizon)
        slack = 1e-9 * max(1.0, abs(hi))
        if not (lo - slack <= self.lambda_full <= hi + slack):
            raise AssertionError("sandwich bounds violated")


def ils_profile(ts: TangentState, T: float | None = None) -> IlsProfile:
    """Build the sensitivity profile from an evolved tangent snapshot."""
    if T is None:
        T = ts.horizon
    lam_full = finite_time_growth(ts, T)
    n = ts.n
    log_init_block = np.log(ts.initial_full_norm) - 0.5 * np.log(n)
    lam = (per_oscillator_log_norms(ts) - log_init_block) / T

    finite = np.isfinite(lam)
    if not finite.any():
        raise ValueError("every oscillator projection decayed to zero")
    if not finite.all():
        warnings.warn("fully decayed oscillator projections excluded from the range",
                      RuntimeWarning, stacklevel=2)
    r = float(lam[finite].max() - lam[finite].min())
    if r > 0:
        s = (lam - lam_full) / r
    else:
        s = np.zeros_like(lam)
    return IlsProfile(ts.t0, T, lam, lam_full, r, s)


def identity_check(profile: IlsProfile) -> float:
    """Relative residual of exp(2 L T) = (1/N) sum exp(2 L_i T), in log space."""
    T = profile.horizon
    n = profile.lambda_i.shape[0]
    lhs_log = 2.0 * profile.lambda_full * T
    rhs_log = _logsumexp(2.0 * profile.lambda_i * T) - np.log(n)
    return float(abs(1.0 - np.exp(rhs_log - lhs_log)))


@dataclass
class LeEstimate:
    """Maximal-exponent estimate from a single long tangent evolution.

    convergence_series holds (T, L(T)) at each checkpoint, increasing in
    T; lambda_max is the final value.  tail_fluctuation is the spread of
    L over the last three checkpoints (a stabilization diagnostic).
    """

    lambda_max: float
    horizon_used: float
    convergence_series: list
    tail_fluctuation: float

    def __post_init__(self):
        Ts = [T for T, _ in self.convergence_series]
        if any(b <= a for a, b in zip(Ts, Ts[1:])):
            raise ValueError("checkpoints must be increasing in T")
        if self.convergence_series and \
                self.lambda_max != self.convergence_series[-1][1]:
            raise ValueError("lambda_max must equal the final checkpoint value")


def max_le_estimate(checkpoints) -> LeEstimate:
    """Estimate the maximal exponent from checkpoint tangent snapshots.

    `checkpoints` is a sequence of (T, TangentState) from one evolution,
    as returned by advance_with_tangent.
    """
    series = [(float(T), finite_time_growth(ts, T)) for T, ts in checkpoints]
    if not series:
        raise ValueError("need at least one checkpoint")
    tail = [lam for _, lam in series[-3:]]
    return LeEstimate(series[-1][1], series[-1][0], series,
                      float(max(tail) - min(tail)))


def ils_range_series(checkpoints):
    """(T, R_ILS(T), S_i(T)) at each checkpoint of one evolution.

    All checkpoints share the initial profile and t0, so the series
    tracks how the spatial spread of the sensitivity profile contracts
    with the reference horizon.
    """
    out = []
    for T, ts in checkpoints:
        prof = ils_profile(ts, T)
        out.append((float(T), prof.r_ils, prof.s_i))
    return out
