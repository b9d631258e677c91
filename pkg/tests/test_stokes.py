import math

import numpy as np
import pytest

from gaussep import (
    ConditioningError,
    ReferenceStateParams,
    SingleModeNetwork,
    TwoModeNetwork,
    Verdict,
    apply_transform,
    displacement,
    expect_stokes,
    full_pipeline,
    propagated_expectations,
    reference_moments,
    sample_stokes,
    solve_c_block,
    solve_single_mode,
    thermal,
    tensor_product,
    two_mode_squeezed_vacuum,
    vacuum,
)
from gaussep.stokes import SingleModeMoments
from conftest import random_signal_state


def random_reference(rng, biased=False):
    if not biased:
        return ReferenceStateParams(
            n_bar=rng.uniform(0, 1),
            d=rng.uniform(0.2, 2),
            beta=0.0,
            theta=rng.uniform(0, 0.8),
            gamma=0.0,
        )
    return ReferenceStateParams(
        n_bar=rng.uniform(0, 1),
        d=rng.uniform(0.2, 2),
        beta=rng.uniform(-math.pi, math.pi),
        theta=rng.uniform(0, 0.8),
        gamma=rng.uniform(-math.pi, math.pi),
    )


class TestAnalyticAgainstPropagated:
    """The closed-form readout expressions must match direct operator
    moments on the network-propagated joint state, readout by readout."""

    def test_single_mode_random_cases(self):
        rng = np.random.default_rng(100)
        for case in range(50):
            state = random_signal_state(rng)
            net = SingleModeNetwork(
                mode=int(rng.integers(0, 2)), reference=random_reference(rng, biased=True)
            )
            analytic = {(r.observable, r.phases): r.value.value for r in expect_stokes(net, state)}
            direct = {(r.observable, r.phases): r.value.value for r in propagated_expectations(net, state)}
            assert analytic.keys() == direct.keys()
            for key in analytic:
                assert analytic[key] == pytest.approx(direct[key], abs=1e-10), (case, key)

    def test_two_mode_random_cases(self):
        rng = np.random.default_rng(200)
        for case in range(50):
            state = random_signal_state(rng)
            net = TwoModeNetwork(
                ref_c=random_reference(rng, biased=True),
                ref_d=random_reference(rng, biased=True),
                phi1=rng.uniform(0, 2 * math.pi),
                phi2_values=(rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)),
            )
            analytic = {(r.observable, r.phases): r.value.value for r in expect_stokes(net, state)}
            direct = {(r.observable, r.phases): r.value.value for r in propagated_expectations(net, state)}
            assert analytic.keys() == direct.keys()
            for key in analytic:
                assert analytic[key] == pytest.approx(direct[key], abs=1e-10), (case, key)

    def test_vacuum_signal_zero_mean_reference(self):
        # zero-displacement reference gives <S1> = 0 for any phase
        net = SingleModeNetwork(reference=ReferenceStateParams(d=0.0, theta=0.3))
        for r in expect_stokes(net, vacuum(1)):
            if r.observable == "S1":
                assert r.value.value == pytest.approx(0.0, abs=1e-14)

    def test_pi_over_4_square_on_double_vacuum(self):
        # vacuum signal with a vacuum reference: <S1^2(pi/4)> = 0
        net = SingleModeNetwork(reference=ReferenceStateParams(d=0.0, theta=0.0))
        values = {r.phases: r.value.value for r in expect_stokes(net, vacuum(1)) if r.observable == "S1sq"}
        assert values[(math.pi / 4,)] == pytest.approx(0.0, abs=1e-14)


class TestSampledBackend:
    def test_matches_analytic_within_five_sigma(self):
        rng = np.random.default_rng(300)
        for case in range(6):
            state = random_signal_state(rng)
            net = TwoModeNetwork()
            analytic = {(r.observable, r.phases): r.value.value for r in expect_stokes(net, state)}
            sampled = sample_stokes(net, state, 100000, seed=case)
            for r in sampled:
                target = analytic[(r.observable, r.phases)]
                assert abs(r.value.value - target) < 5 * r.value.std_error, (
                    case,
                    r.observable,
                )

    def test_single_mode_matches_analytic(self):
        rng = np.random.default_rng(301)
        for case in range(4):
            state = random_signal_state(rng)
            net = SingleModeNetwork(mode=0)
            analytic = {(r.observable, r.phases): r.value.value for r in expect_stokes(net, state)}
            for r in sample_stokes(net, state, 100000, seed=40 + case):
                target = analytic[(r.observable, r.phases)]
                assert abs(r.value.value - target) < 5 * r.value.std_error

    def test_reproducible(self):
        state = two_mode_squeezed_vacuum(0.5)
        net = TwoModeNetwork()
        a = sample_stokes(net, state, 2000, seed=7)
        b = sample_stokes(net, state, 2000, seed=7)
        assert [r.value.value for r in a] == [r.value.value for r in b]


class TestSingleModeSolve:
    def test_vacuum_recovered_exactly(self):
        net = SingleModeNetwork(reference=ReferenceStateParams(d=1.0, theta=0.3))
        readouts = expect_stokes(net, vacuum(1))
        m = solve_single_mode(readouts, reference_moments(net.reference))
        assert (m.q, m.p) == (pytest.approx(0.0, abs=1e-12), pytest.approx(0.0, abs=1e-12))
        assert m.q2 == pytest.approx(0.5, abs=1e-12)
        assert m.p2 == pytest.approx(0.5, abs=1e-12)
        assert m.sigma == pytest.approx(0.0, abs=1e-12)

    def test_displaced_signal_mean_recovered(self):
        state = apply_transform(vacuum(1), displacement((1.0 / math.sqrt(2)) + 0.0j))
        net = SingleModeNetwork()
        m = solve_single_mode(expect_stokes(net, state), reference_moments(net.reference))
        assert m.q == pytest.approx(1.0, abs=1e-12)
        assert m.p == pytest.approx(0.0, abs=1e-12)

    def test_random_states_recovered_exactly(self):
        rng = np.random.default_rng(400)
        for _ in range(30):
            state = random_signal_state(rng)
            mode = int(rng.integers(0, 2))
            net = SingleModeNetwork(mode=mode)
            solved = solve_single_mode(
                expect_stokes(net, state), reference_moments(net.reference)
            )
            truth = SingleModeMoments.from_state(state, mode)
            for field in ("q", "p", "q2", "p2", "sigma"):
                assert getattr(solved, field) == pytest.approx(
                    getattr(truth, field), abs=1e-10
                )

    def test_sampled_solve_within_five_sigma(self):
        state = two_mode_squeezed_vacuum(0.5)
        net = SingleModeNetwork(mode=0)
        readouts = sample_stokes(net, state, 100000, seed=11)
        solved = solve_single_mode(readouts, reference_moments(net.reference))
        # generous bound: solver mixes readouts, each with its own error
        ses = [r.value.std_error for r in readouts]
        bound = 5 * max(ses) * 5
        assert abs(solved.q2 - state.cov[0, 0]) < bound

    def test_zero_displacement_reference_fails_mean_solve(self):
        net = SingleModeNetwork(reference=ReferenceStateParams(d=0.0, theta=0.3))
        with pytest.raises(ConditioningError, match="d = 0|first moments"):
            solve_single_mode(expect_stokes(net, vacuum(1)), reference_moments(net.reference))

    def test_phase_symmetric_reference_fails_moment_solve(self):
        # sinh(2 theta) = 2 d^2 balances displacement against squeezing so
        # <q_r^2> = <p_r^2> while sigma stays zero and the means solve works
        theta = 0.5 * math.asinh(2.0)
        ref = ReferenceStateParams(d=1.0, beta=0.0, theta=theta, gamma=0.0)
        m = reference_moments(ref)
        assert m.q2 == pytest.approx(m.p2, abs=1e-12)
        net = SingleModeNetwork(reference=ref)
        with pytest.raises(ConditioningError, match="phase-symmetric"):
            solve_single_mode(expect_stokes(net, vacuum(1)), reference_moments(ref))

    def test_biased_reference_rejected(self):
        ref = ReferenceStateParams(d=1.0, beta=0.4, theta=0.3, gamma=0.9)
        assert abs(reference_moments(ref).sigma) > 1e-3
        net = SingleModeNetwork(reference=ref)
        with pytest.raises(ConditioningError, match="balanced-bias"):
            solve_single_mode(expect_stokes(net, vacuum(1)), reference_moments(ref))


class TestCBlockSolve:
    def _solve(self, state, net):
        readouts = expect_stokes(net, state)
        m1 = SingleModeMoments.from_state(state, 0)
        m2 = SingleModeMoments.from_state(state, 1)
        return solve_c_block(
            readouts,
            m1,
            m2,
            reference_moments(net.ref_c),
            reference_moments(net.ref_d),
            net.phi1,
            net.phi2_values,
        )

    def test_tmsv_exact(self):
        state = two_mode_squeezed_vacuum(0.5)
        cross, c_block = self._solve(state, TwoModeNetwork())
        s = math.sinh(1.0) / 2.0
        assert np.allclose(c_block, np.diag([s, -s]), atol=1e-10)

    def test_thermal_product_zero(self):
        state = tensor_product(thermal(0.7), thermal(0.2))
        _, c_block = self._solve(state, TwoModeNetwork())
        assert np.allclose(c_block, 0.0, atol=1e-12)

    def test_random_states_exact(self):
        rng = np.random.default_rng(500)
        for _ in range(30):
            state = random_signal_state(rng)
            _, c_block = self._solve(state, TwoModeNetwork())
            assert np.allclose(c_block, state.cov[:2, 2:], atol=1e-9)

    def test_zero_mean_references_fall_back_to_s3(self):
        # d = 0 for both references kills the S1xS1 coupling; the S3
        # equation must take over and still solve exactly
        net = TwoModeNetwork(
            ref_c=ReferenceStateParams(d=0.0, theta=0.2),
            ref_d=ReferenceStateParams(d=0.0, theta=0.4),
        )
        rng = np.random.default_rng(501)
        for _ in range(10):
            state = random_signal_state(rng)
            _, c_block = self._solve(state, net)
            assert np.allclose(c_block, state.cov[:2, 2:], atol=1e-9)

    def test_identical_references_singular(self):
        net = TwoModeNetwork(
            ref_c=ReferenceStateParams(d=1.0, theta=0.2),
            ref_d=ReferenceStateParams(d=1.0, theta=0.2),
        )
        with pytest.raises(ConditioningError, match="proportional|singular"):
            self._solve(two_mode_squeezed_vacuum(0.3), net)


class TestFullPipeline:
    def test_analytic_exact_on_random_states(self):
        rng = np.random.default_rng(600)
        for _ in range(25):
            state = random_signal_state(rng)
            result = full_pipeline(state)
            assert np.max(np.abs(result.gamma_hat - state.cov)) < 1e-9
            assert np.max(np.abs(result.means_hat - state.means)) < 1e-10
            assert result.full_state_tomography

    def test_vacuum_boundary(self):
        result = full_pipeline(vacuum(2))
        assert result.report.verdict is Verdict.BOUNDARY

    def test_tmsv_entangled_with_log_negativity(self):
        result = full_pipeline(two_mode_squeezed_vacuum(0.5))
        assert result.report.verdict is Verdict.ENTANGLED
        assert result.report.log_negativity == pytest.approx(1.0, abs=1e-8)

    def test_sampled_pipeline_tracks_truth(self):
        state = two_mode_squeezed_vacuum(0.5)
        result = full_pipeline(state, n_shots=100000, seed=3)
        assert result.report.verdict is Verdict.ENTANGLED
        for i in range(4):
            for j in range(4):
                err = abs(result.gamma_hat[i, j] - state.cov[i, j])
                assert err < 6 * max(result.gamma_se[i, j], 1e-9), (i, j)
        assert result.margin_std_error > 0

    def test_sampled_reproducible(self):
        state = two_mode_squeezed_vacuum(0.2)
        a = full_pipeline(state, n_shots=3000, seed=8)
        b = full_pipeline(state, n_shots=3000, seed=8)
        assert np.array_equal(a.gamma_hat, b.gamma_hat)

    def test_separable_states_classified(self):
        rng = np.random.default_rng(601)
        hits = 0
        total = 12
        for _ in range(total):
            state = random_signal_state(rng, with_means=False, max_squeeze=0.0)
            result = full_pipeline(state, n_shots=100000, seed=int(rng.integers(1 << 30)))
            if result.report.verdict in (Verdict.SEPARABLE, Verdict.BOUNDARY):
                hits += 1
        assert hits >= total - 1


def test_readouts_csv_dump(tmp_path):
    from gaussep.stokes import readouts_to_csv

    readouts = expect_stokes(TwoModeNetwork(), two_mode_squeezed_vacuum(0.3))
    path = tmp_path / "readouts.csv"
    readouts_to_csv(readouts, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "observable,phases,value,std_error,n_shots"
    assert len(lines) == 1 + len(readouts)


def test_s3_zero_mean_reduces_to_cross_moment_difference():
    # with zero-mean signal and zero-mean references only the
    # (q1 p2 - p1 q2)/2 term of the anticoincidence observable survives
    from gaussep.stokes import SingleModeMoments, s3_expectation, _cross_from_state
    from gaussep import random_state, reference_moments, ReferenceStateParams

    state = random_state(33)
    m1 = SingleModeMoments.from_state(state, 0)
    m2 = SingleModeMoments.from_state(state, 1)
    cross = _cross_from_state(state)
    rc = reference_moments(ReferenceStateParams(d=0.0, theta=0.3))
    rd = reference_moments(ReferenceStateParams(d=0.0, theta=0.5))
    value = s3_expectation(m1, m2, cross, rc, rd, 0.0, 0.0)
    assert value == pytest.approx(0.5 * (cross.q1p2 - cross.p1q2), abs=1e-14)
