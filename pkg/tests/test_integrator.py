import numpy as np
import pytest

from ils_lab import (
    DivergenceError,
    EnsembleState,
    IntegrationConfig,
    ModelParams,
    NoiseSpec,
    SamplingPlan,
    Scheme,
    advance,
    advance_stochastic,
    advance_with_noise,
    advance_with_tangent,
    init_homogeneous,
    step_deterministic,
    step_stochastic,
    windowed_coupling_sums,
)
from oracles import naive_coupling


def random_state(n, rng, t=0.0):
    return EnsembleState(t, rng.uniform(-4, 4, n), rng.uniform(-4, 4, n),
                         rng.uniform(0, 2, n))


class TestCouplingSums:
    def test_constant_input_vanishes(self):
        for n, p in [(5, 1), (30, 10), (300, 100)]:
            out = windowed_coupling_sums(np.full(n, 5.0), p)
            assert np.abs(out).max() < 1e-12

    def test_hand_case(self):
        out = windowed_coupling_sums(np.array([1.0, 2, 3, 4, 5]), 1)
        np.testing.assert_allclose(out, [5.0, 0.0, 0.0, 0.0, -5.0], atol=1e-12)

    @pytest.mark.parametrize("n,p", [(5, 1), (5, 2), (30, 10), (300, 100), (301, 97)])
    def test_matches_naive_loop(self, n, p, rng):
        for _ in range(25):
            u = rng.uniform(-10, 10, n)
            np.testing.assert_allclose(windowed_coupling_sums(u, p),
                                       naive_coupling(u, p), atol=1e-10)

    def test_window_constraint(self):
        with pytest.raises(ValueError):
            windowed_coupling_sums(np.zeros(10), 5)


class TestDeterministicStep:
    def test_fixed_point_stays(self, tiny_params, cfg):
        x, y, z = tiny_params.fixed_point()
        s = EnsembleState(0.0, np.full(3, x), np.full(3, y), np.full(3, z))
        s2, _ = step_deterministic(s, None, tiny_params, cfg)
        for a, b in ((s2.x, x), (s2.y, y), (s2.z, z)):
            assert np.abs(a - b).max() < 1e-12
        assert s2.t == cfg.dt

    def test_fourth_order_convergence(self, desk_params, rng):
        # Richardson self-convergence over a smooth segment
        s0 = random_state(30, rng)
        s0, _ = advance(s0, desk_params, IntegrationConfig(), 20.0)
        def endpoint(dt):
            s, _ = advance(s0, desk_params, IntegrationConfig(dt=dt), 1.0)
            return np.concatenate([s.x, s.y, s.z])
        ref = endpoint(0.0025)
        e1 = np.linalg.norm(endpoint(0.01) - ref)
        e2 = np.linalg.norm(endpoint(0.005) - ref)
        # error(dt)/error(dt/2) should be ~16 for an order-4 scheme
        # (reference at dt/4 biases the ratio toward ~17)
        assert 10.0 < e1 / e2 < 24.0

    def test_zero_tangent_stays_zero(self, desk_params, cfg, rng):
        s = random_state(30, rng)
        ts = init_homogeneous(30, 1, t0=0.0)
        ts.xi[:] = 0.0
        with pytest.raises(ZeroDivisionError):
            # renormalization must refuse a zero tangent
            advance_with_tangent(s, ts, desk_params, cfg, 2.0)
        s2, ts2, _, _ = advance_with_tangent(s, ts, desk_params, cfg, 2.0,
                                             renorm_interval=0)
        assert np.all(ts2.xi == 0.0)

    def test_bit_reproducibility(self, desk_params, cfg, rng):
        s = random_state(30, rng)
        a1, _ = advance(s.copy(), desk_params, cfg, 50.0)
        a2, _ = advance(s.copy(), desk_params, cfg, 50.0)
        assert np.array_equal(a1.x, a2.x)
        assert np.array_equal(a1.y, a2.y)
        assert np.array_equal(a1.z, a2.z)

    def test_divergence_abort_carries_position(self, desk_params, rng):
        s = random_state(30, rng)
        with pytest.raises(DivergenceError) as exc:
            advance(s, desk_params, IntegrationConfig(divergence_bound=3.0), 50.0)
        assert exc.value.step is not None
        assert 0 <= exc.value.oscillator < 30

    def test_scheme_guard(self, desk_params, cfg, rng):
        s = random_state(30, rng)
        em_cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA)
        with pytest.raises(ValueError):
            step_deterministic(s, None, desk_params, em_cfg)
        with pytest.raises(ValueError):
            step_stochastic(s, desk_params, NoiseSpec.uniform(0.1, 30, 1),
                            np.random.default_rng(0), cfg)

    def test_duration_must_align_with_dt(self, desk_params, cfg, rng):
        with pytest.raises(ValueError):
            advance(random_state(30, rng), desk_params, cfg, 0.005)

    def test_tangent_consistency_with_trajectory_difference(self, desk_params, cfg, rng):
        # tangent transport through shared stage states tracks the
        # difference quotient of two nearby nonlinear trajectories
        eps = 1e-8
        s = random_state(30, rng)
        s, _ = advance(s, desk_params, cfg, 100.0)
        ts = init_homogeneous(30, 7, t0=s.t)
        pert = EnsembleState(s.t, s.x + eps * ts.xi[:, 0],
                             s.y + eps * ts.xi[:, 1], s.z + eps * ts.xi[:, 2])
        sA, tsA, _, _ = advance_with_tangent(s, ts, desk_params, cfg, 1.0,
                                             renorm_interval=0)
        sB, _ = advance(pert, desk_params, cfg, 1.0)
        diff = np.column_stack([sB.x - sA.x, sB.y - sA.y, sB.z - sA.z]) / eps
        rel = np.linalg.norm(diff - tsA.xi) / np.linalg.norm(tsA.xi)
        assert rel < 1e-3


class TestStochasticStep:
    def test_zero_intensity_equals_euler_drift(self, desk_params, rng):
        s = random_state(30, rng)
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA, dt_stochastic=0.001)
        noise = NoiseSpec.uniform(0.0, 30, seed=5)
        out = step_stochastic(s, desk_params, noise, np.random.default_rng(5), cfg)
        dt = cfg.dt_stochastic
        g = desk_params.coupling_gain
        ex = s.x + dt * (-s.y - s.z + g * windowed_coupling_sums(s.x, 10))
        ey = s.y + dt * (s.x + desk_params.a * s.y + g * windowed_coupling_sums(s.y, 10))
        ez = s.z + dt * (desk_params.b + s.z * (s.x - desk_params.c)
                         + g * windowed_coupling_sums(s.z, 10))
        assert np.array_equal(out.x, ex)
        assert np.array_equal(out.y, ey)
        assert np.array_equal(out.z, ez)

    def test_seed_reproducibility(self, desk_params, rng):
        s = random_state(30, rng)
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA)
        noise = NoiseSpec.uniform(1e-4, 30, seed=9)
        a1, _ = advance_stochastic(s.copy(), desk_params, noise,
                                   np.random.default_rng(9), cfg, 1.0)
        a2, _ = advance_stochastic(s.copy(), desk_params, noise,
                                   np.random.default_rng(9), cfg, 1.0)
        assert np.array_equal(a1.x, a2.x)
        assert np.array_equal(a1.z, a2.z)

    def test_diffusion_variance_growth(self):
        # drift frozen: x(t) is a pure random walk with Var = 2 D t
        n = 3334  # 3 components each -> ~1e4 independent paths
        params = ModelParams(0.2, 0.2, 4.5, n, 1, 0.0)
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA, dt_stochastic=0.001)
        noise = NoiseSpec.uniform(0.05, n, seed=3)
        s = EnsembleState(0.0, np.zeros(n), np.zeros(n), np.zeros(n))
        out, _ = advance_stochastic(s, params, noise, np.random.default_rng(3),
                                    cfg, 0.1, drift=False)
        samples = np.concatenate([out.x, out.y, out.z])
        var = samples.var()
        assert abs(var - 2 * 0.05 * 0.1) < 0.05 * 2 * 0.05 * 0.1

    def test_shared_component_noise(self, desk_params):
        # one draw per oscillator: all three components move identically
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA, dt_stochastic=0.001)
        noise = NoiseSpec.uniform(0.5, 30, seed=11, shared_component=True)
        s = EnsembleState(0.0, np.zeros(30), np.zeros(30), np.zeros(30))
        out = step_stochastic(s, desk_params, noise, np.random.default_rng(11),
                              cfg, drift=False)
        assert np.array_equal(out.x, out.y)
        assert np.array_equal(out.x, out.z)
        assert out.x.std() > 0

    def test_draw_order_is_oscillator_major(self, desk_params):
        # the kernel consumes the same stream as one (N, 3) numpy block
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA, dt_stochastic=0.001)
        noise = NoiseSpec.uniform(0.5, 30, seed=13)
        s = EnsembleState(0.0, np.zeros(30), np.zeros(30), np.zeros(30))
        out = step_stochastic(s, desk_params, noise, np.random.default_rng(13),
                              cfg, drift=False)
        g = np.random.default_rng(13).standard_normal((30, 3))
        amp = np.sqrt(2 * 0.5 * 0.001)
        np.testing.assert_array_equal(out.x, amp * g[:, 0])
        np.testing.assert_array_equal(out.y, amp * g[:, 1])
        np.testing.assert_array_equal(out.z, amp * g[:, 2])


class TestNoiseWindowComposition:
    def test_switch_at_window_boundary(self, desk_params, rng):
        # after t_end the trajectory must follow the deterministic path
        s = random_state(30, rng)
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA)
        noise = NoiseSpec.localized(0.05, 5, 15, 0.1, seed=21)
        end, _ = advance_with_noise(s.copy(), desk_params, noise,
                                    np.random.default_rng(21), cfg, 10.0)
        mid, _ = advance_stochastic(
            EnsembleState(0.0, s.x, s.y, s.z), desk_params, noise,
            np.random.default_rng(21), cfg, 0.1)
        tail, _ = advance(mid, desk_params, cfg, 9.9)
        assert np.array_equal(end.x, tail.x)
        assert end.t == s.t + 10.0

    def test_sampling_merge(self, desk_params, rng):
        s = random_state(30, rng)
        cfg = IntegrationConfig(scheme=Scheme.EULER_MARUYAMA)
        noise = NoiseSpec.localized(0.05, 5, 15, 0.1, seed=2)
        _, samples = advance_with_noise(s, desk_params, noise,
                                        np.random.default_rng(2), cfg, 5.0,
                                        SamplingPlan(delta_every=0.1))
        # 1 sample per 0.1 over [0, 5]
        assert samples.delta_count == 50
