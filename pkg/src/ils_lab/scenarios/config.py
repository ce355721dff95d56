"""Run configuration: scenario presets and the plain-text config grammar.

A config file holds one ``key = value`` pair per line with ``#``
comments.  Recognized keys:

    scenario, a, b, c, n, p, sigma, dt, scheme, transient, horizon,
    checkpoints (comma list), noise_d, noise_i1, noise_i2, noise_tn,
    shared_component_noise, output_dir

The scenario preset is applied first and explicit keys override it
field by field, so every scenario resolves to a fully explicit
RunConfig.  Unknown keys are errors (with the line number).  Seeds are
not config-file keys; they come from the scenario preset or from the
command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..integrator import IntegrationConfig, Scheme
from ..model import ModelParams, NoiseSpec

SCENARIOS = ("incoherence", "sync", "partial", "uniform_noise",
             "localized_noise", "phase_chimera", "amplitude_chimera", "custom")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Seeds:
    init_state: int = 1
    init_tangent: int = 1
    noise: int = 1


@dataclass
class RunConfig:
    model: ModelParams
    integration: IntegrationConfig
    noise: NoiseSpec | None
    transient: float
    t0_after_transient: bool
    horizon: float
    checkpoints: tuple
    seeds: Seeds
    scenario: str
    output_dir: Path

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario '{self.scenario}'")
        if self.transient < 0:
            raise ConfigError("transient must be >= 0")
        if not self.checkpoints:
            raise ConfigError("need at least one checkpoint")
        cks = tuple(float(T) for T in self.checkpoints)
        if any(b <= a for a, b in zip(cks, cks[1:])) or cks[0] <= 0:
            raise ConfigError("checkpoints must be positive and increasing")
        if cks[-1] > self.horizon:
            raise ConfigError("checkpoints must not exceed the horizon")
        self.checkpoints = cks
        noisy = self.noise is not None and self.noise.intensity > 0
        if noisy and self.integration.scheme is not Scheme.EULER_MARUYAMA:
            raise ConfigError(
                "active noise requires scheme = euler_maruyama_stochastic")
        if not noisy and self.integration.scheme is not Scheme.RK4:
            raise ConfigError(
                "runs without noise require scheme = rk4_deterministic")


# Scenario presets.  The state seeds were found by a seed search over
# box-uniform initial conditions at paper scale (the find-regime command
# reproduces the search): the partial seed settles into a stable
# two-cluster profile whose rescaled sensitivity shape persists between
# horizons, the localized-noise seed into the chaotic two-cluster state
# with a pronounced high-sensitivity interior, and the chimera seeds
# into coexisting rough/smooth states of the respective flavor.  All of
# these regimes are multistable, so the seeds are regime-dependent
# defaults, not magic values.
_COMMON = dict(a=0.2, b=0.2, c=4.5, n=300, p=100, dt=0.01,
               scheme="rk4_deterministic", divergence_bound=1e6, transient=5000.0,
               noise_d=0.0, noise_i1=None, noise_i2=None, noise_tn=math.inf,
               shared_component_noise=False,
               seed_state=1, seed_tangent=1, seed_noise=1)

PRESETS = {
    "incoherence": dict(
        _COMMON, sigma=0.0, horizon=100000.0,
        checkpoints=(1000.0, 5000.0, 10000.0, 30000.0, 100000.0)),
    "sync": dict(
        _COMMON, sigma=2.0, horizon=10000.0,
        checkpoints=(1000.0, 5000.0, 10000.0)),
    "partial": dict(
        _COMMON, sigma=0.05, seed_state=7, horizon=70000.0,
        checkpoints=(5000.0, 10000.0, 20000.0, 40000.0, 70000.0)),
    "uniform_noise": dict(
        _COMMON, sigma=0.05, seed_state=5, scheme="euler_maruyama_stochastic",
        noise_d=1e-5, horizon=70000.0,
        checkpoints=(5000.0, 10000.0, 20000.0, 40000.0, 70000.0)),
    "localized_noise": dict(
        _COMMON, sigma=0.05, seed_state=4, scheme="euler_maruyama_stochastic",
        noise_d=0.05, noise_tn=0.1, horizon=20000.0,
        checkpoints=(5000.0, 20000.0)),
    "phase_chimera": dict(
        _COMMON, sigma=0.044, seed_state=2, horizon=20000.0,
        checkpoints=(5000.0, 10000.0, 20000.0)),
    "amplitude_chimera": dict(
        _COMMON, sigma=0.04, seed_state=16, horizon=20000.0,
        checkpoints=(5000.0, 10000.0, 20000.0)),
    "custom": dict(
        _COMMON, sigma=0.05, horizon=10000.0,
        checkpoints=(1000.0, 5000.0, 10000.0)),
}

_INT_KEYS = {"n", "p", "noise_i1", "noise_i2"}
_FLOAT_KEYS = {"a", "b", "c", "sigma", "dt", "transient", "horizon",
               "noise_d", "noise_tn", "divergence_bound"}
_ALL_KEYS = ({"scenario", "scheme", "checkpoints", "shared_component_noise",
              "output_dir"} | _INT_KEYS | _FLOAT_KEYS)


def _parse_value(key, raw, where):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "checkpoints":
            return tuple(float(v) for v in raw.split(","))
        if key == "shared_component_noise":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value '{raw}' for key '{key}'")


def resolve(scenario: str = "custom", overrides: dict | None = None,
            seeds: Seeds | None = None, output_dir=None) -> RunConfig:
    """Apply a scenario preset, then explicit overrides, and validate."""
    if scenario not in PRESETS:
        raise ConfigError(f"unknown scenario '{scenario}'")
    kv = dict(PRESETS[scenario])
    kv.update(overrides or {})

    try:
        model = ModelParams(kv["a"], kv["b"], kv["c"], kv["n"], kv["p"], kv["sigma"])
    except ValueError as e:
        raise ConfigError(str(e)) from e
    try:
        scheme = Scheme(kv["scheme"])
    except ValueError:
        raise ConfigError(f"unknown scheme '{kv['scheme']}'")
    integration = IntegrationConfig(dt=kv["dt"], scheme=scheme,
                                    divergence_bound=kv["divergence_bound"])

    noise = None
    if kv["noise_d"] > 0 or scheme is Scheme.EULER_MARUYAMA:
        i1, i2 = kv["noise_i1"], kv["noise_i2"]
        tn = kv["noise_tn"]
        unbounded = math.isinf(tn)
        if i1 is None and i2 is None and unbounded:
            i1, i2 = 1, kv["n"]  # uniform noise
        if i1 is not None and i2 is not None and i2 > kv["n"]:
            raise ConfigError("noise_i2 must be <= n")
        noise_seed = seeds.noise if seeds is not None else kv["seed_noise"]
        noise = NoiseSpec(kv["noise_d"], i1, i2, tn, unbounded, noise_seed,
                          kv["shared_component_noise"])

    if seeds is None:
        seeds = Seeds(kv["seed_state"], kv["seed_tangent"], kv["seed_noise"])
    out = output_dir if output_dir is not None else kv.get(
        "output_dir", f"runs/{scenario}")
    return RunConfig(model=model, integration=integration, noise=noise,
                     transient=kv["transient"], t0_after_transient=True,
                     horizon=kv["horizon"], checkpoints=tuple(kv["checkpoints"]),
                     seeds=seeds, scenario=scenario, output_dir=out)


def parse_config(path) -> RunConfig:
    """Read a config file into a fully resolved RunConfig."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    overrides = {}
    scenario = "custom"
    output_dir = None
    for ln, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown key '{key}'")
        value = _parse_value(key, raw, f"{path}:{ln}")
        if key == "scenario":
            if value not in SCENARIOS:
                raise ConfigError(f"{path}:{ln}: unknown scenario '{value}'")
            scenario = value
        elif key == "output_dir":
            output_dir = value
        else:
            overrides[key] = value
    return resolve(scenario, overrides, output_dir=output_dir)


def with_seeds(cfg: RunConfig, init_state=None, init_tangent=None, noise=None):
    """Copy of cfg with some seeds replaced (noise spec seed kept in sync)."""
    s = cfg.seeds
    new = Seeds(init_state if init_state is not None else s.init_state,
                init_tangent if init_tangent is not None else s.init_tangent,
                noise if noise is not None else s.noise)
    new_noise = cfg.noise
    if cfg.noise is not None and new.noise != cfg.noise.seed:
        new_noise = replace(cfg.noise, seed=new.noise)
    return RunConfig(model=cfg.model, integration=cfg.integration,
                     noise=new_noise, transient=cfg.transient,
                     t0_after_transient=cfg.t0_after_transient,
                     horizon=cfg.horizon, checkpoints=cfg.checkpoints,
                     seeds=new, scenario=cfg.scenario, output_dir=cfg.output_dir)
