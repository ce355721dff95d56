"""Perturbation-vector bookkeeping.

A TangentState holds the 3N-dimensional perturbation as an (N, 3) array
together with the accumulated log of all renormalization factors, so the
true (unrescaled) norm of any part of the vector is always
exp(log_accum) * stored_norm.  That reconstruction is what every growth
formula downstream consumes, which makes arbitrarily long horizons safe
from overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TangentState:
    """Perturbation vector plus growth-factor bookkeeping.

    xi            stored (N, 3) tangent components
    log_accum     sum of ln(c_k) over all renormalizations so far
    t0            measurement origin (time the vector was initialized)
    initial_full_norm   full 3N norm at t0, before any renormalization
    t             current time of the vector (t - t0 is the horizon)
    """

    xi: np.ndarray
    log_accum: float
    t0: float
    initial_full_norm: float
    t: float

    @property
    def n(self):
        return self.xi.shape[0]

    @property
    def horizon(self):
        return self.t - self.t0

    def copy(self):
        return TangentState(self.xi.copy(), self.log_accum, self.t0,
                            self.initial_full_norm, self.t)

    def stored_full_norm(self):
        return float(np.sqrt(np.sum(self.xi * self.xi)))

    def full_log_norm(self):
        """ln of the true full norm, exp-free."""
        return self.log_accum + float(np.log(self.stored_full_norm()))


def init_homogeneous(n_osc: int, seed, t0: float = 0.0) -> TangentState:
    """Homogeneous unit perturbation: one isotropic 3-vector on every oscillator.

    The full 3N vector is normalized to 1, so every per-oscillator block
    has norm 1/sqrt(N).  `seed` may be an int or a Generator; the stream
    is meant to be dedicated to initialization so it never interacts
    with noise draws.
    """
    if n_osc < 1:
        raise ValueError("n_osc must be >= 1")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(3)
    while np.linalg.norm(v) < 1e-12:
        v = rng.standard_normal(3)
    xi = np.tile(v, (n_osc, 1))
    xi /= np.sqrt(np.sum(xi * xi))
    return TangentState(xi, 0.0, t0, 1.0, t0)


def renormalize(ts: TangentState) -> TangentState:
    """Rescale to unit full norm, folding the factor into log_accum.

    The reconstructed true vector exp(log_accum) * xi is unchanged.
    Raises on a zero-norm tangent (degenerate perturbation).
    """
    c = ts.stored_full_norm()
    if c == 0.0:
        raise ZeroDivisionError("tangent norm collapsed to zero")
    return TangentState(ts.xi / c, ts.log_accum + float(np.log(c)),
                        ts.t0, ts.initial_full_norm, ts.t)


def per_oscillator_log_norms(ts: TangentState) -> np.ndarray:
    """ln of the true per-oscillator norms, length N.

    Entries are log_accum + ln ||xi_i||; a stored zero block yields -inf,
    which downstream formulas treat as total local decay.
    """
    norms = np.sqrt(np.sum(ts.xi * ts.xi, axis=1))
    with np.errstate(divide="ignore"):
        return ts.log_accum + np.log(norms)
