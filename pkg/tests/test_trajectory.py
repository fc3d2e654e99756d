import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SQRT8, preset_event, wavefields
from kgbohm import (
    PRESET,
    DomainError,
    ESingularity,
    IntegratorOptions,
    NodeProximity,
    TwoModeParams,
    WaveField,
    classify_causal,
    eta_reduced_rhs,
    evaluate_field,
    guidance_state,
    guidance_velocity,
    integrate,
    mean_two_mode_velocity,
    reduced_trajectory,
)
from kgbohm.trajectory import (
    COMPLETED,
    E_SINGULARITY,
    LIGHTLIKE,
    SPACELIKE,
    TIMELIKE,
    beat_phase,
    has_energy_collapse,
    phase_time,
    position_from_phase,
    two_mode_closed_form,
)


class TestGuidanceVelocity:
    def test_plane_wave(self):
        wf = WaveField.from_arrays(1.0, [1.0], [[math.sqrt(3)]])
        v = guidance_velocity(evaluate_field(wf, 0.2, [0.4]))
        assert v[0] == pytest.approx(math.sqrt(3) / 2, rel=1e-14)

    def test_preset_subluminal_instant(self, preset_field):
        v = guidance_velocity(evaluate_field(preset_field, *preset_event(0.0)))
        assert v[0] == pytest.approx(1.13137084989847 / 1.8, rel=1e-12)

    def test_preset_superluminal_instant(self, preset_field):
        v = guidance_velocity(evaluate_field(preset_field, *preset_event(math.pi)))
        assert v[0] == pytest.approx(2 * SQRT8 / 3, rel=1e-12)
        assert v[0] > 1

    def test_node_raises(self):
        wf = WaveField.from_arrays(1.0, [1.0, 1.0], [[1.0], [-1.0]])
        with pytest.raises(NodeProximity):
            guidance_velocity(evaluate_field(wf, 0.0, [math.pi / 2]))

    def test_energy_zero_raises(self, preset_field):
        # D(eta) = 7/3 + (8/3) cos(eta) vanishes at cos(eta) = -7/8
        eta = math.acos(-7 / 8)
        with pytest.raises(ESingularity):
            guidance_velocity(evaluate_field(preset_field, *preset_event(eta)))

    def test_velocity_is_gauge_invariant(self, preset_field):
        ev = (0.4, [1.7])
        v1 = guidance_state(preset_field, *ev).v
        v2 = guidance_state(preset_field.scaled(3.0 - 4.0j), *ev).v
        np.testing.assert_allclose(v2, v1, rtol=1e-12)


class TestClassifyCausal:
    @pytest.mark.parametrize(
        "E, P, expected",
        [
            (-3.0, -5.65685424949238, SPACELIKE),
            (1.8, 1.13137084989847, TIMELIKE),
            (1.0, 1.0, LIGHTLIKE),
            (1.0, [0.6, 0.8], LIGHTLIKE),
            (2.0, [0.0, 0.0, 0.0], TIMELIKE),
        ],
    )
    def test_examples(self, E, P, expected):
        assert classify_causal(E, P) == expected

    def test_preset_state_at_pi_is_spacelike(self, preset_field):
        st_ = guidance_state(preset_field, *preset_event(math.pi))
        assert st_.causal_class == SPACELIKE
        assert st_.E ** 2 - st_.P[0] ** 2 == pytest.approx(-23.0, rel=1e-12)


class TestBeatPhase:
    def test_closed_form_matches_field(self, preset):
        wf = preset.field()
        for eta in np.linspace(-3, 3, 13):
            t, x = preset_event(eta, t=0.8)
            s = evaluate_field(wf, t, x)
            R2, E, P, v = two_mode_closed_form(preset, eta)
            assert beat_phase(preset, t, x[0]) == pytest.approx(eta, abs=1e-12)
            assert (s.R2, s.E, s.P[0]) == pytest.approx((R2, E, P), rel=1e-11)

    def test_rhs_examples(self, preset):
        # d(eta)/dt = (m - w) + k v(eta)
        assert eta_reduced_rhs(0.0, preset) == pytest.approx(-2 + SQRT8 * 0.628539361054709, rel=1e-12)
        assert eta_reduced_rhs(math.pi, preset) == pytest.approx(-2 + SQRT8 * 2 * SQRT8 / 3, rel=1e-12)

    def test_rhs_without_boosted_mode_is_constant(self):
        p = TwoModeParams(1.0, 3.0, 0.0)
        for eta in (0.0, 1.0, 2.5):
            assert eta_reduced_rhs(eta, p) == -2.0

    def test_rhs_singular_where_energy_vanishes(self, preset):
        with pytest.raises(ESingularity):
            eta_reduced_rhs(math.acos(-7 / 8), preset)

    @settings(max_examples=100, deadline=None)
    @given(
        omega=st.floats(1.05, 10),
        A=st.floats(-3, 3).filter(lambda a: abs(abs(a) - 1) > 1e-3),
        eta=st.floats(-10, 10),
    )
    def test_rhs_chain_rule_form(self, omega, A, eta):
        p = TwoModeParams(1.0, omega, A)
        D = 1 + A * A * omega + A * (1 + omega) * math.cos(eta)
        if abs(D) < 1e-3:
            return
        expected = (1 - omega) * (1 - A * A) / D
        assert eta_reduced_rhs(eta, p) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        omega=st.floats(1.05, 10),
        A=st.floats(-0.9, 0.9),
        eta=st.floats(-10, 10),
        h=st.sampled_from([1e-4, 1e-5]),
    )
    def test_phase_time_is_antiderivative(self, omega, A, eta, h):
        p = TwoModeParams(1.0, omega, A)
        D = 1 + A * A * omega + A * (1 + omega) * math.cos(eta)
        if abs(D) < 1e-2:
            return
        dt_deta = (phase_time(p, eta + h) - phase_time(p, eta - h)) / (2 * h)
        assert dt_deta == pytest.approx(1 / eta_reduced_rhs(eta, p), rel=1e-5)

    @pytest.mark.parametrize("A, collapse", [(2 / 3, True), (0.3, False), (1.5, False), (0.9, True)])
    def test_energy_collapse_regimes(self, A, collapse):
        assert has_energy_collapse(TwoModeParams(1.0, 3.0, A)) is collapse


class TestIntegrate:
    def test_plane_wave_is_straight(self):
        k = 0.75
        wf = WaveField.from_arrays(1.0, [1.0], [[k]])
        traj = integrate(wf, [0.0], 0.0, 10.0)
        assert traj.termination == COMPLETED
        assert traj.superluminal_episodes == []
        np.testing.assert_allclose(traj.x[:, 0], k / math.sqrt(1 + k * k) * traj.t, atol=1e-12)
        assert traj.t[-1] == 10.0

    def test_rejects_reversed_interval(self, preset_field):
        with pytest.raises(DomainError):
            integrate(preset_field, [0.0], 1.0, 1.0)

    def test_singular_start_raises(self, preset_field):
        with pytest.raises(ESingularity):
            integrate(preset_field, preset_event(math.acos(-7 / 8))[1], 0.0, 1.0)

    def test_node_start_raises(self):
        wf = WaveField.from_arrays(1.0, [1.0, 1.0], [[1.0], [-1.0]])
        with pytest.raises(NodeProximity):
            integrate(wf, [math.pi / 2], 0.0, 1.0)

    def test_preset_reaches_energy_collapse(self, preset_field):
        traj = integrate(preset_field, [0.0], 0.0, 200.0)
        assert traj.termination == E_SINGULARITY
        # closed-form time to D = 0 from eta = 0 (eta decreases)
        eta_star = -math.acos(-7 / 8)
        t_star = phase_time(PRESET, eta_star) - phase_time(PRESET, 0.0)
        assert traj.t[-1] == pytest.approx(t_star, abs=1e-6)
        assert len(traj.superluminal_episodes) == 1

    def test_start_near_pi_records_episode(self, preset_field):
        t0, x0 = preset_event(math.pi - 0.1)
        traj = integrate(preset_field, x0, t0, 50.0)
        assert traj.superluminal_episodes
        ep = traj.superluminal_episodes[0]
        assert abs(ep.v_extreme) >= 1.88
        assert ep.t_start == t0

    def test_episode_boundaries_are_refined(self, preset_field):
        traj = integrate(preset_field, [0.0], 0.0, 200.0)
        wf = preset_field
        for ep in traj.superluminal_episodes:
            for tb in (ep.t_start, ep.t_end):
                s = next(s for s in traj.samples if s.t == tb)
                if traj.termination != COMPLETED and tb == traj.t[-1]:
                    continue
                assert abs(s.speed - 1) <= 1e-8
                assert guidance_state(wf, s.t, s.x).speed == pytest.approx(s.speed, abs=1e-12)

    def test_circulating_regime_completes(self):
        p = TwoModeParams(1.0, 3.0, 0.3)
        traj = integrate(p.field(), [0.0], 0.0, 60.0)
        assert traj.termination == COMPLETED
        assert len(traj.superluminal_episodes) > 5
        assert max(abs(ep.v_extreme) for ep in traj.superluminal_episodes) > 8

    def test_standing_wave_particle_is_at_rest(self):
        # counter-propagating equal modes carry no momentum density
        wf = WaveField.from_arrays(1.0, [1.0, 1.0], [[0.0, 1.0], [0.0, -1.0]])
        traj = integrate(wf, [0.0, 0.3], 0.0, 5.0)
        assert traj.termination == COMPLETED
        np.testing.assert_allclose(traj.x[-1], [0.0, 0.3], atol=1e-12)

    @pytest.mark.parametrize("A, t_end", [(2 / 3, 6.5), (1.5, 40.0)])
    def test_tighter_tolerance_within_error_estimate(self, A, t_end):
        wf = TwoModeParams(1.0, 3.0, A).field()
        loose = integrate(wf, [0.0], 0.0, t_end)
        tight = integrate(wf, [0.0], 0.0, t_end, IntegratorOptions(rtol=1e-10))
        assert abs(tight.x[-1, 0] - loose.x[-1, 0]) < 10 * loose.error_estimate

    def test_stride_controls_sample_spacing(self):
        wf = WaveField.from_arrays(1.0, [1.0], [[0.5]])
        traj = integrate(wf, [0.0], 0.0, 1.0, IntegratorOptions(stride=0.25))
        np.testing.assert_allclose(traj.t, [0, 0.25, 0.5, 0.75, 1.0])

    @pytest.mark.parametrize(
        "A, eta0, t_end, rtol",
        [(2 / 3, 0.0, 6.5, 1e-9), (2 / 3, math.pi, 0.09, 1e-9), (1.5, 0.0, 60.0, 1e-11), (0.3, 1.0, 40.0, 1e-11)],
    )
    def test_matches_reduced_phase_dynamics(self, A, eta0, t_end, rtol):
        p = TwoModeParams(1.0, 3.0, A)
        x0 = position_from_phase(p, 0.0, eta0)
        traj = integrate(p.field(), [x0], 0.0, t_end, IntegratorOptions(rtol=rtol, atol=1e-14))
        assert traj.termination == COMPLETED
        _, x = reduced_trajectory(p, eta0, 0.0, traj.t, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(traj.x[:, 0], x, rtol=0, atol=1e-6)

    def test_circulating_drift_matches_closed_form(self):
        p = TwoModeParams(1.0, 3.0, 1.5)
        # one full beat period in closed form
        period = abs(phase_time(p, 2 * math.pi) - phase_time(p, 0.0))
        traj = integrate(p.field(), [0.0], 0.0, 3 * period, IntegratorOptions(rtol=1e-11, atol=1e-14))
        assert traj.x[-1, 0] / traj.t[-1] == pytest.approx(mean_two_mode_velocity(p), rel=1e-7)


def _check_invariants(traj):
    t = traj.t
    assert np.all(np.diff(t) > 0)
    eps = traj.superluminal_episodes
    for a, b in zip(eps, eps[1:]):
        assert a.t_end <= b.t_start
    for ep in eps:
        assert t[0] <= ep.t_start < ep.t_end <= t[-1]
        assert abs(ep.v_extreme) > 1
        for s in traj.samples:
            if ep.t_start < s.t < ep.t_end:
                assert s.speed > 1
                assert traj.in_episode(s)
    for s in traj.samples:
        if math.isfinite(s.Msq) and abs(s.Msq) > 1e-6 * (s.E ** 2 + s.P[0] ** 2):
            assert s.causal_class == (TIMELIKE if s.Msq > 0 else SPACELIKE)


class TestTrajectoryInvariants:
    @pytest.mark.parametrize("A", [2 / 3, 0.3, 1.5, -0.4])
    def test_two_mode(self, A):
        traj = integrate(TwoModeParams(1.0, 3.0, A).field(), [0.2], 0.0, 30.0)
        _check_invariants(traj)

    @settings(max_examples=15, deadline=None)
    @given(wf=wavefields(dim=1, max_modes=3), x0=st.floats(-2, 2))
    def test_random_fields(self, wf, x0):
        try:
            traj = integrate(wf, [x0], 0.0, 5.0, IntegratorOptions(max_steps=20_000))
        except (NodeProximity, ESingularity):
            return
        _check_invariants(traj)
