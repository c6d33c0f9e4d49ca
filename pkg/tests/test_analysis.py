"""Certificate, performance-index, and trajectory-diagnostic tests."""

import numpy as np
import pytest

from consenslab import (AgentConfig, Box, DecayingExp, GammaCertificate,
                        GaussianPulse, Graph, GraphNotConnectedError,
                        InfeasibleConfigurationError, Intersection,
                        OutputWeights, Scenario, SinePulse, Trace, Zero,
                        check_theorem1, complement_basis, consensus_metrics,
                        controlled_output, full_metrics, gamma_matrix,
                        integrate, is_negative_definite,
                        leading_principal_minors, lyapunov_monitors,
                        min_gamma, performance_index, schur_feasibility,
                        sym_eigen)

K3 = Graph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
WEIGHTS = OutputWeights(c1=0.1, c2=0.1, gamma=1.0)
K3_BOXES = (Box([0.0], [2.0]), Box([1.0], [3.0]), Box([0.5], [2.5]))


def _disturbed_k3_scenario(dt=1e-3, T=10.0):
    """Feasible certificate, common start inside X, every signal family on."""
    return Scenario(
        graph=K3,
        agents=tuple(AgentConfig(1.0, box, [1.5]) for box in K3_BOXES),
        disturbances=(GaussianPulse([0.4], 2.0, 0.5),
                      DecayingExp([0.5], 1.0),
                      SinePulse([0.3], 1.0, 0.0, 2.0)),
        weights=WEIGHTS,
        dt=dt,
        T=T,
    )


@pytest.fixture(scope="module")
def disturbed_trace():
    return integrate(_disturbed_k3_scenario())


@pytest.fixture(scope="module")
def k3_common_set():
    return Intersection(list(K3_BOXES))


def _flat_trace(states, disturbances=None, dt=1e-3):
    states = np.asarray(states, dtype=float)
    k = states.shape[0]
    if disturbances is None:
        disturbances = np.zeros_like(states)
    return Trace(times=np.arange(k) * dt, states=states,
                 inputs=np.zeros_like(states), disturbances=disturbances)


class TestOutputWeights:
    def test_rejects_nonpositive(self):
        for bad in ({"c1": 0.0}, {"c2": -1.0}, {"gamma": 0.0}):
            kwargs = {"c1": 0.1, "c2": 0.1, "gamma": 1.0, **bad}
            with pytest.raises(ValueError):
                OutputWeights(**kwargs)


class TestControlledOutput:
    def test_zero_at_common_constrained_point(self):
        z1, z2 = controlled_output(np.full((3, 2), 0.5),
                                   Box([0.0, 0.0], [1.0, 1.0]), WEIGHTS)
        assert np.linalg.norm(z1) == 0.0
        assert np.linalg.norm(z2) == 0.0
        # a non-dyadic common value: the agent mean rounds, so only near-zero
        z1, z2 = controlled_output(np.full((3, 2), 0.7),
                                   Box([0.0, 0.0], [1.0, 1.0]), WEIGHTS)
        assert np.linalg.norm(z1) == 0.0
        assert np.linalg.norm(z2) <= 1e-15

    def test_hand_example(self):
        x = np.array([[2.0], [0.0]])
        weights = OutputWeights(c1=1.0, c2=1.0, gamma=1.0)
        z1, z2 = controlled_output(x, Box([0.0], [1.0]), weights)
        np.testing.assert_allclose(z1, [1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(z2, [1.0, -1.0], atol=1e-15)

    def test_weight_scaling_is_exact(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(4, 2), scale=2.0)
        s = Box([-0.5, -0.5], [0.5, 0.5])
        base = controlled_output(x, s, OutputWeights(0.3, 0.7, 1.0))
        doubled = controlled_output(x, s, OutputWeights(0.6, 1.4, 1.0))
        np.testing.assert_array_equal(doubled[0], 2.0 * base[0])
        np.testing.assert_array_equal(doubled[1], 2.0 * base[1])

    def test_z1_vanishes_iff_all_constrained(self):
        s = Box([0.0], [1.0])
        inside = np.array([[0.2], [0.9]])
        outside = np.array([[0.2], [1.5]])
        assert np.linalg.norm(controlled_output(inside, s, WEIGHTS)[0]) == 0.0
        assert np.linalg.norm(controlled_output(outside, s, WEIGHTS)[0]) > 0.0


class TestPerformanceIndex:
    def test_zero_trace_gives_zero(self):
        trace = _flat_trace(np.zeros((100, 2, 1)))
        j = performance_index(trace, Box([-1.0], [1.0]), WEIGHTS)
        np.testing.assert_array_equal(j, np.zeros(100))

    def test_starts_at_zero(self, disturbed_trace, k3_common_set):
        j = performance_index(disturbed_trace, k3_common_set, WEIGHTS)
        assert j[0] == 0.0

    def test_undisturbed_index_is_nondecreasing(self):
        rng = np.random.default_rng(11)
        trace = _flat_trace(rng.normal(size=(200, 2, 1)))
        j = performance_index(trace, Box([-0.1], [0.1]), WEIGHTS)
        assert np.all(np.diff(j) >= 0.0)
        assert np.all(j >= 0.0)

    def test_pure_disturbance_hand_value(self):
        # agent pinned at a constrained point, unit disturbance on [0,1]:
        # the index integrates to -gamma^2 * 1
        states = np.zeros((1001, 1, 1))
        trace = _flat_trace(states, disturbances=np.ones((1001, 1, 1)))
        j = performance_index(trace, Box([-5.0], [5.0]), WEIGHTS)
        assert j[-1] == pytest.approx(-1.0, abs=1e-6)

    def test_lower_bound_from_disturbance_energy(self, disturbed_trace,
                                                 k3_common_set):
        j = performance_index(disturbed_trace, k3_common_set, WEIGHTS)
        w_sq = np.sum(disturbed_trace.disturbances ** 2, axis=(1, 2))
        dt = disturbed_trace.times[1] - disturbed_trace.times[0]
        w_energy = np.zeros_like(w_sq)
        w_energy[1:] = np.cumsum(0.5 * dt * (w_sq[1:] + w_sq[:-1]))
        assert np.all(j >= -WEIGHTS.gamma ** 2 * w_energy - 1e-9)

    def test_quadrature_halving(self):
        """J(T) is stable to 1e-6 relative against a halved step."""
        coarse = integrate(_disturbed_k3_scenario(dt=1e-3, T=5.0))
        fine = integrate(_disturbed_k3_scenario(dt=5e-4, T=5.0))
        x_set = Intersection(list(K3_BOXES))
        j_coarse = performance_index(coarse, x_set, WEIGHTS)[-1]
        j_fine = performance_index(fine, x_set, WEIGHTS)[-1]
        assert j_coarse == pytest.approx(j_fine, rel=1e-6)


class TestGammaMatrix:
    def test_entrywise_example(self):
        mat = gamma_matrix(3.0, 1.0, 0.5, WEIGHTS)
        np.testing.assert_allclose(
            mat.entries,
            [[-2.99, 0.5, 0.5], [0.5, -2.99, 0.5], [0.5, 0.5, -1.0]],
            atol=1e-12)

    def test_example_minors(self):
        minors = leading_principal_minors(gamma_matrix(3.0, 1.0, 0.5, WEIGHTS))
        np.testing.assert_allclose(minors, [-2.99, 8.6901, -6.9451], atol=1e-10)

    def test_degenerate_parameters(self):
        weights = OutputWeights(c1=1e-9, c2=1e-9, gamma=1.0)
        mat = gamma_matrix(2.0, 0.0, 0.0, weights)
        np.testing.assert_allclose(
            mat.entries,
            [[0.0, 0.0, 0.0], [0.0, -2.0, 0.5], [0.0, 0.5, -1.0]],
            atol=1e-15)

    def test_symmetry(self):
        mat = gamma_matrix(1.7, 0.9, 2.3, WEIGHTS).entries
        np.testing.assert_array_equal(mat, mat.T)

    def test_rejects_nonpositive_lambda2(self):
        with pytest.raises(GraphNotConnectedError):
            gamma_matrix(0.0, 1.0, 0.5, WEIGHTS)


class TestSchurCrossCheck:
    def test_feasible_example(self):
        assert schur_feasibility(3.0, 1.0, 0.5, WEIGHTS) is True

    def test_tight_gamma_example(self):
        tight = OutputWeights(c1=0.1, c2=0.1, gamma=0.01)
        assert schur_feasibility(3.0, 1.0, 0.5, tight) is False

    def test_agreement_with_eigen_verdict(self):
        rng = np.random.default_rng(61)
        checked = 0
        for _ in range(1000):
            lambda2 = float(rng.uniform(0.1, 8.0))
            kbar = float(rng.uniform(0.05, 4.0))
            a = float(rng.uniform(0.0, 10.0))
            weights = OutputWeights(c1=float(rng.uniform(0.01, 2.0)),
                                    c2=float(rng.uniform(0.01, 2.0)),
                                    gamma=float(rng.uniform(0.05, 3.0)))
            mat = gamma_matrix(lambda2, kbar, a, weights)
            verdict, margin = is_negative_definite(mat)
            if abs(margin) < 1e-9:
                continue
            assert schur_feasibility(lambda2, kbar, a, weights) == verdict
            checked += 1
        assert checked > 950


class TestCertificateSearch:
    def test_feasible_triangle(self):
        cert = check_theorem1(K3, (1.0, 1.0, 1.0), WEIGHTS, a_max=10.0)
        assert cert.feasible
        assert cert.a_constraint_satisfied
        assert cert.lambda2 == pytest.approx(3.0, abs=1e-9)
        assert cert.kbar == 1.0
        assert (1.0 / 9.0) < cert.a <= 10.0
        assert cert.eigenvalues[-1] < 0.0

    def test_witness_value_is_inside_search_region(self):
        # a = 0.5 certifies by hand; the search must do at least as well
        cert = check_theorem1(K3, (1.0, 1.0, 1.0), WEIGHTS, a_max=10.0)
        hand_margin = float(
            sym_eigen(gamma_matrix(3.0, 1.0, 0.5, WEIGHTS)).eigenvalues[-1])
        assert cert.eigenvalues[-1] <= hand_margin + 1e-12

    def test_tight_gamma_infeasible(self):
        tight = OutputWeights(c1=0.1, c2=0.1, gamma=0.01)
        cert = check_theorem1(K3, (1.0, 1.0, 1.0), tight, a_max=10.0)
        assert not cert.feasible

    def test_certificate_is_self_consistent(self):
        cert = check_theorem1(K3, (0.5, 1.0, 0.8), WEIGHTS, a_max=50.0)
        rebuilt = gamma_matrix(cert.lambda2, cert.kbar, cert.a, WEIGHTS)
        np.testing.assert_array_equal(cert.gamma_matrix.entries,
                                      rebuilt.entries)
        assert np.all(np.diff(cert.eigenvalues) >= 0.0)
        assert cert.kbar == 1.0

    def test_disconnected_graph_rejected(self):
        disconnected = Graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
        with pytest.raises(GraphNotConnectedError):
            check_theorem1(disconnected, (1.0,) * 4, WEIGHTS)

    def test_a_max_below_floor_rejected(self):
        with pytest.raises(ValueError):
            check_theorem1(K3, (1.0, 1.0, 1.0), WEIGHTS, a_max=0.1)

    def test_gain_validation(self):
        with pytest.raises(ValueError):
            check_theorem1(K3, (1.0, 1.0), WEIGHTS)
        with pytest.raises(ValueError):
            check_theorem1(K3, (1.0, -1.0, 1.0), WEIGHTS)


class TestMinGamma:
    def test_bracketed_by_worked_examples(self):
        g_star = min_gamma(K3, (1.0, 1.0, 1.0), 0.1, 0.1)
        assert 0.01 < g_star < 1.0

    def test_bisection_contract(self):
        tol = 1e-4
        g_star = min_gamma(K3, (1.0, 1.0, 1.0), 0.1, 0.1, tol=tol)

        def feasible(gamma):
            w = OutputWeights(0.1, 0.1, gamma)
            return check_theorem1(K3, (1.0, 1.0, 1.0), w).feasible

        assert feasible(g_star + tol)
        assert feasible(g_star)
        assert not feasible(g_star - tol)

    def test_monotone_in_c1(self):
        values = [min_gamma(K3, (1.0, 1.0, 1.0), c1, 0.1)
                  for c1 in (0.05, 0.1, 0.5, 1.0)]
        for lo, hi in zip(values, values[1:]):
            assert hi >= lo - 2e-4

    def test_heavier_edges_never_hurt(self):
        values = []
        for w in (0.5, 1.0, 2.0, 4.0):
            g = Graph(3, [(0, 1, w), (0, 2, w), (1, 2, w)])
            values.append(min_gamma(g, (1.0, 1.0, 1.0), 0.1, 0.1))
        for lo, hi in zip(values, values[1:]):
            assert hi <= lo + 2e-4

    def test_structurally_infeasible_family(self):
        # c2^2 = 4 exceeds lambda2 = 3, so the (2,2) entry of the certificate
        # matrix is positive for every gamma and every a
        with pytest.raises(InfeasibleConfigurationError):
            min_gamma(K3, (1.0, 1.0, 1.0), 0.1, 2.0)


class TestLyapunovMonitors:
    def test_zero_at_common_constrained_point(self):
        states = np.full((50, 3, 1), 1.5)
        trace = _flat_trace(states)
        report = lyapunov_monitors(trace, Box([1.0], [2.0]), 0.5,
                                   complement_basis(3))
        assert np.max(np.abs(report.V1)) == 0.0
        assert np.max(np.abs(report.V2)) <= 1e-12
        assert np.max(np.abs(report.V)) <= 1e-12

    def test_hand_example(self):
        trace = _flat_trace(np.array([[[0.0], [2.0]]]))
        report = lyapunov_monitors(trace, Box([1.0], [1.0]), 0.5,
                                   complement_basis(2))
        assert report.V1[0] == pytest.approx(1.0, abs=1e-12)
        assert report.V2[0] == pytest.approx(1.0, abs=1e-12)
        assert report.V[0] == pytest.approx(2.0, abs=1e-12)

    def test_combination_is_exact(self, disturbed_trace, k3_common_set):
        a = 0.7
        report = lyapunov_monitors(disturbed_trace, k3_common_set, a,
                                   complement_basis(3))
        np.testing.assert_array_equal(report.V,
                                      2.0 * a * report.V1 + report.V2)

    def test_disagreement_energy_two_ways(self, disturbed_trace,
                                          k3_common_set):
        report = lyapunov_monitors(disturbed_trace, k3_common_set, 0.5,
                                   complement_basis(3))
        states = disturbed_trace.states
        centered = states - states.mean(axis=1, keepdims=True)
        direct = 0.5 * np.sum(centered**2, axis=(1, 2))
        np.testing.assert_allclose(report.V2, direct, atol=1e-12)

    def test_xi_norms_columns(self, disturbed_trace, k3_common_set):
        report = lyapunov_monitors(disturbed_trace, k3_common_set, 0.5,
                                   complement_basis(3))
        assert report.xi_norms.shape == (disturbed_trace.times.size, 3)
        w_norm = np.sqrt(np.sum(disturbed_trace.disturbances**2, axis=(1, 2)))
        np.testing.assert_allclose(report.xi_norms[:, 2], w_norm, atol=1e-12)
        assert np.all(report.xi_norms >= 0.0)

    def test_parameter_validation(self, disturbed_trace, k3_common_set):
        with pytest.raises(ValueError):
            lyapunov_monitors(disturbed_trace, k3_common_set, 0.0,
                              complement_basis(3))
        with pytest.raises(ValueError):
            lyapunov_monitors(disturbed_trace, k3_common_set, 0.5,
                              complement_basis(4))


class TestConsensusMetrics:
    def test_constant_common_trajectory(self):
        trace = _flat_trace(np.full((40, 3, 2), 0.25))
        report = consensus_metrics(trace, Box([0.0, 0.0], [1.0, 1.0]))
        assert np.max(report.consensus_error) == 0.0
        assert np.max(report.constraint_distance) <= 1e-12

    def test_two_agent_run_converges(self, two_agent_trace):
        report = consensus_metrics(two_agent_trace, Box([1.0], [2.0]))
        assert report.consensus_error[-1] <= 1e-3
        assert report.constraint_distance[-1] <= 1e-3

    def test_translation_invariance(self):
        rng = np.random.default_rng(71)
        states = rng.normal(size=(30, 3, 2), scale=2.0)
        shift = np.array([1.75, -0.5])
        base = consensus_metrics(_flat_trace(states),
                                 Box([-1.0, -1.0], [1.0, 1.0]))
        moved = consensus_metrics(
            _flat_trace(states + shift),
            Box([-1.0, -1.0] + shift, [1.0, 1.0] + shift))
        np.testing.assert_allclose(moved.consensus_error,
                                   base.consensus_error, atol=1e-12)
        np.testing.assert_allclose(moved.constraint_distance,
                                   base.constraint_distance, atol=1e-12)


class TestFullReport:
    def test_series_share_the_grid(self, disturbed_trace, k3_common_set):
        report = full_metrics(disturbed_trace, k3_common_set, WEIGHTS, 0.5,
                              complement_basis(3))
        k = disturbed_trace.times.size
        for name in ("J", "V1", "V2", "V", "consensus_error",
                     "constraint_distance"):
            assert getattr(report, name).shape == (k,), name
        assert report.xi_norms.shape == (k, 3)
        np.testing.assert_array_equal(report.times, disturbed_trace.times)

    def test_matches_individual_computations(self, disturbed_trace,
                                             k3_common_set):
        report = full_metrics(disturbed_trace, k3_common_set, WEIGHTS, 0.5,
                              complement_basis(3))
        j_direct = performance_index(disturbed_trace, k3_common_set, WEIGHTS)
        np.testing.assert_array_equal(report.J, j_direct)
        errors = consensus_metrics(disturbed_trace, k3_common_set)
        np.testing.assert_allclose(report.constraint_distance,
                                   errors.constraint_distance, atol=1e-12)

    def test_partial_reports_zero_fill(self, disturbed_trace, k3_common_set):
        errors = consensus_metrics(disturbed_trace, k3_common_set)
        assert np.all(errors.J == 0.0)
        assert np.all(errors.V == 0.0)


class TestHInfinityAlongTrajectories:
    def test_index_stays_negative(self, disturbed_trace, k3_common_set):
        """Feasible certificate + common start in X: J(t) < 1e-6 throughout."""
        cert = check_theorem1(K3, (1.0, 1.0, 1.0), WEIGHTS)
        assert cert.feasible
        j = performance_index(disturbed_trace, k3_common_set, WEIGHTS)
        assert float(np.max(j)) < 1e-6

    def test_certificate_quadratic_form_on_trace(self, disturbed_trace,
                                                 k3_common_set):
        """xi^T Gamma xi <= 0 pointwise along the run whenever the
        certificate is feasible — negative definiteness applied to the
        recorded (constraint error, disagreement, disturbance) norms."""
        cert = check_theorem1(K3, (1.0, 1.0, 1.0), WEIGHTS)
        assert cert.feasible
        report = full_metrics(disturbed_trace, k3_common_set, WEIGHTS,
                              cert.a, complement_basis(3))
        xi = report.xi_norms
        quad = np.einsum("ki,ij,kj->k", xi, cert.gamma_matrix.entries, xi)
        assert float(np.max(quad)) <= 1e-9
