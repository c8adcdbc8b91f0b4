import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from tyclab import (
    DimensionalParams,
    DimensionlessParams,
    ModelKind,
    ModelSpec,
    jacobian_classic4,
    logistic,
    mu_kamke_trigger,
    nondimensionalize,
    positivity_criterion,
    rhs_classic3,
    rhs_classic3_dimensional,
    rhs_classic4,
    rhs_explogistic3,
    rhs_modified,
    stability_check,
    threshold_f0,
    threshold_m0,
    threshold_mu,
    threshold_mu_pde,
)

R = 17.8125
P = DimensionlessParams(r=R, gamma=0.0)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False)
small_pos = st.floats(min_value=0.0, max_value=10, allow_nan=False)


class TestLogistic:
    def test_empty_habitat(self):
        assert logistic((0.0, 0.0, 0.0), ModelKind.CLASSIC3) == 1.0

    def test_at_capacity(self):
        assert logistic((0.3, 0.3, 0.4), ModelKind.CLASSIC3) == pytest.approx(0.0, abs=1e-15)

    def test_over_capacity(self):
        assert logistic((0.3, 0.3, 2.5), ModelKind.CLASSIC3) == pytest.approx(-2.1, abs=1e-12)

    def test_exp_variant(self):
        x = (0.3, 0.3, 2.5)
        assert logistic(x, ModelKind.EXPLOGISTIC3) == pytest.approx(np.exp(-2.1), rel=1e-12)

    def test_classic4_scaled(self):
        assert logistic((50.0, 25.0, 25.0, 40.0), ModelKind.CLASSIC4, K=200.0) == pytest.approx(0.5)

    @given(x=st.tuples(finite, finite, finite), y=st.tuples(finite, finite, finite))
    def test_affine_identity(self, x, y):
        # 1 - sum is affine: L(x) + L(y) - L(x+y) == 1
        xy = tuple(a + b for a, b in zip(x, y))
        lhs = (logistic(x, ModelKind.CLASSIC3) + logistic(y, ModelKind.CLASSIC3)
               - logistic(xy, ModelKind.CLASSIC3))
        assert lhs == pytest.approx(1.0, abs=1e-9)


class TestRhsClassic3:
    def test_hand_evaluation(self):
        # L = 0.3; r*m*f*L = 17.8125*0.3*0.3*0.3 = 0.4809375
        dx = rhs_classic3(P, (0.3, 0.3, 0.1))
        np.testing.assert_allclose(dx, [0.1809375, 0.5015625, -0.1], atol=1e-12)

    def test_f_zero_face(self):
        p = DimensionlessParams(r=5.0, gamma=0.7)
        dx = rhs_classic3(p, (0.0, 0.4, 0.2))
        assert dx[0] == 0.0
        assert dx[1] == -0.4
        assert dx[2] == pytest.approx(0.7 - 0.2)

    def test_pure_decay_plus_stocking(self):
        p = DimensionlessParams(r=0.0, gamma=0.2)
        dx = rhs_classic3(p, (0.1, 0.1, 0.1))
        np.testing.assert_allclose(dx, [-0.1, -0.1, 0.1], atol=1e-15)

    @given(f=finite, m=finite, s=finite, gamma=small_pos)
    def test_s_equation_decoupled_linear(self, f, m, s, gamma):
        p = DimensionlessParams(r=R, gamma=gamma)
        assert rhs_classic3(p, (f, m, s))[2] == gamma - s

    @given(m=small_pos, s=small_pos, gamma=small_pos)
    def test_kamke_faces(self, m, s, gamma):
        # F(0,m,s) = 0 and H(f,m,0) = gamma >= 0: the two faces that keep
        # f and s nonnegative
        p = DimensionlessParams(r=R, gamma=gamma)
        assert rhs_classic3(p, (0.0, m, s))[0] == 0.0
        assert rhs_classic3(p, (m, s, 0.0))[2] == gamma


class TestRhsClassic4:
    def test_extinction_equilibrium(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0, mu=0.0)
        np.testing.assert_array_equal(rhs_classic4(p, (0, 0, 0, 0)), np.zeros(4))

    def test_trojan_equilibrium(self):
        p = DimensionalParams(beta=2.0, delta=0.5, K=10.0, mu=3.0)
        eq = (0.0, 0.0, 0.0, p.mu / p.delta)
        np.testing.assert_allclose(rhs_classic4(p, eq), np.zeros(4), atol=1e-14)

    def test_vanishing_logistic_at_capacity(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0, mu=0.0)
        dx = rhs_classic4(p, (0.5, 0.5, 0.0, 0.0))
        np.testing.assert_allclose(dx, [-0.5, -0.5, 0.0, 0.0], atol=1e-15)


class TestRhsModified:
    def test_mating_terms_vanish_when_males_absent(self):
        p = DimensionlessParams(r=R, gamma=0.4, allee=0.1)
        dx = rhs_modified(p, (0.7, 0.0, 0.0))
        np.testing.assert_allclose(dx, [-0.7, 0.0, 0.4], atol=1e-15)

    def test_hand_evaluation_allee(self):
        # L = 0.3, f/a - 1 = 2, m/(m+s) = 0.75
        p = DimensionlessParams(r=R, gamma=0.0, allee=0.1)
        dx = rhs_modified(p, (0.3, 0.3, 0.1))
        np.testing.assert_allclose(dx, [0.42140625, 0.58171875, -0.1], atol=1e-12)

    def test_hand_evaluation_no_allee(self):
        p = DimensionlessParams(r=R, gamma=0.0)
        dx = rhs_modified(p, (0.3, 0.3, 0.1), allee_on=False)
        assert dx[0] == pytest.approx(0.060703125, abs=1e-12)

    @given(
        f=st.floats(min_value=1e-3, max_value=5),
        alpha=st.floats(min_value=0, max_value=1),
        beta=st.floats(min_value=0, max_value=1),
        t=st.floats(min_value=1e-12, max_value=1e-7),
    )
    # subnormal m+s once turned f/(m+s) into inf*0 = nan in the male rate
    @example(f=1.0, alpha=0.0, beta=1.1125369292536007e-308, t=5.960464477539063e-08)
    @settings(max_examples=50)
    def test_continuity_at_vanishing_males(self, f, alpha, beta, t):
        # along rays m = alpha*t, s = beta*t both mating terms are O(t),
        # so the rates tend to (-f, -m, gamma - s) as t -> 0
        if alpha + beta == 0:
            return
        p = DimensionlessParams(r=R, gamma=0.0, allee=0.1)
        dx = rhs_modified(p, (f, alpha * t, beta * t))
        L = 1.0 - (f + (alpha + beta) * t)
        mate_bound = 8.0 * R * (abs(L) + 1.0) * (f / 0.1 + 1.0) * max(f, 1.0) * t
        assert abs(dx[0] + f) <= mate_bound
        assert abs(dx[1] + alpha * t) <= mate_bound

    def test_requires_allee_threshold(self):
        with pytest.raises(ValueError):
            rhs_modified(DimensionlessParams(r=R), (0.3, 0.3, 0.1), allee_on=True)


def test_explogistic_rhs_uses_exp_factor():
    p = DimensionlessParams(r=R, gamma=0.0)
    f, m, s = 0.3, 0.3, 0.1
    L = np.exp(1.0 - (f + m + s))
    dx = rhs_explogistic3(p, (f, m, s))
    np.testing.assert_allclose(
        dx, [R * m * f * L - f, R * m * f * L + 2 * R * s * f * L - m, -s], rtol=1e-14
    )


class TestNondimensionalize:
    def test_r_from_scaling(self):
        p = DimensionalParams(beta=2.0, delta=1.0, K=100.0)
        q, _ = nondimensionalize(p, np.zeros(3))
        assert q.r == pytest.approx(100.0)

    def test_capacity_normalizes_to_one(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=100.0)
        _, x = nondimensionalize(p, (100.0, 100.0, 100.0))
        np.testing.assert_allclose(x, np.ones(3))

    def test_gamma_from_scaling(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=100.0, mu=50.0)
        q, _ = nondimensionalize(p, np.zeros(3))
        assert q.gamma == pytest.approx(0.5)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            DimensionalParams(beta=1.0, delta=0.0, K=1.0)
        with pytest.raises(ValueError):
            DimensionalParams(beta=1.0, delta=1.0, K=0.0)

    def test_scaling_consistency_with_dimensional_rhs(self):
        # d(x/K)/d(tau) == rhs_dimensional(x) / (delta*K) at matching states
        rng = np.random.default_rng(42)
        for _ in range(100):
            p = DimensionalParams(
                beta=rng.uniform(0.2, 3.0),
                delta=rng.uniform(0.2, 3.0),
                K=rng.uniform(0.5, 5.0),
                mu=rng.uniform(0.0, 2.0),
            )
            x = rng.uniform(0.0, 2.0 * p.K, size=3)
            q, xs = nondimensionalize(p, x)
            lhs = rhs_classic3(q, xs)
            rhs = rhs_classic3_dimensional(p, x) / (p.delta * p.K)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


class TestPositivity:
    def test_holds_inside_capacity(self, classic3):
        report = positivity_criterion(classic3, [(0, 0.45)] * 3)
        assert report.holds
        assert report.min_value >= 0.0

    def test_violated_when_total_exceeds_capacity(self, classic3):
        report = positivity_criterion(classic3, [(0, 1.0)] * 3)
        assert not report.holds
        face, point, value = report.witnesses[0]
        assert face == "m"
        # worst violation sits at the f = s = 1 corner: G = -2r
        assert point == (1.0, 0.0, 1.0)
        assert value == pytest.approx(-2 * R)

    def test_f_face_always_clean(self, classic3):
        report = positivity_criterion(classic3, [(0, 5.0)] * 3)
        assert all(face != "f" for face, _, _ in report.witnesses)

    def test_explogistic_preserves_positivity_everywhere(self):
        # exp(...) > 0 keeps every face rate nonnegative no matter the size
        spec = ModelSpec(ModelKind.EXPLOGISTIC3, DimensionlessParams(r=R, gamma=0.3))
        report = positivity_criterion(spec, [(0, 8.0)] * 3, grid_points=32)
        assert report.holds

    def test_rejects_negative_region(self, classic3):
        with pytest.raises(ValueError):
            positivity_criterion(classic3, [(-1.0, 1.0)] * 3)


class TestThresholdFormulas:
    def test_f0_unit_parameters(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0)
        assert threshold_f0(1.0, 1.0, p) == pytest.approx(4.0, abs=1e-12)

    def test_f0_substitution(self):
        p = DimensionalParams(beta=2.0, delta=0.5, K=1.0)
        assert threshold_f0(1.0, 1.0, p) == pytest.approx(2.5, abs=1e-12)

    def test_f0_denominator_dominance(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0)
        assert threshold_f0(1e12, 1.0, p) < 1e-9

    def test_f0_rejects_zero_delta1(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0)
        with pytest.raises(ValueError):
            threshold_f0(0.0, 1.0, p)

    def test_mu_unit_parameters(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0)
        assert threshold_mu(1.0, p) == pytest.approx(3.0, abs=1e-12)
        assert threshold_mu_pde(1.0, p) == pytest.approx(3.0, abs=1e-12)

    def test_mu_rejects_zero_delta2(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0)
        with pytest.raises(ValueError):
            threshold_mu(0.0, p)

    def test_kamke_trigger_forces_negative_male_face(self):
        # with s at its steady state mu/delta > K the male-face rate is
        # negative for any positive f
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0, mu=1.5)
        assert mu_kamke_trigger(p) == 1.0
        s_eq = p.mu / p.delta
        for f in (0.01, 0.5, 2.0):
            assert rhs_classic3_dimensional(p, (f, 0.0, s_eq))[1] < 0

    def test_m0_companion(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=1.0)
        assert threshold_m0(1.0, 1.0, p) == pytest.approx(2.0, abs=1e-12)


class TestStability:
    def test_stable_case(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=100.0, mu=1.0)
        rep = stability_check(p)
        assert rep.applicable
        assert rep.criterion_value == pytest.approx(1.0)
        assert rep.criterion_stable

    def test_unstable_case(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=100.0, mu=50.0)
        rep = stability_check(p)
        assert rep.criterion_value == pytest.approx(-2400.0)
        assert not rep.criterion_stable
        assert not rep.eigen_stable

    def test_extinction_state(self):
        p = DimensionalParams(beta=1.0, delta=1.0, K=100.0, mu=0.0)
        rep = stability_check(p)
        assert rep.extinction_stable
        assert rep.eigen_stable

    def test_inapplicable(self):
        p = DimensionalParams(beta=1.0, delta=10.0, K=100.0, mu=1.0)
        rep = stability_check(p)
        assert not rep.applicable
        assert rep.criterion_stable is None

    def test_jacobian_matches_closed_form_at_trojan_state(self):
        # at (0,0,0,mu/delta) the reaction Jacobian is triangular with
        # diagonal (-delta, beta*mu/(2*delta)-delta, beta*mu/delta-delta, -delta)
        p = DimensionalParams(beta=1.2, delta=0.7, K=30.0, mu=0.2)
        J = jacobian_classic4(p, (0, 0, 0, p.mu / p.delta))
        expect = np.diag([
            -p.delta,
            p.beta * p.mu / (2 * p.delta) - p.delta,
            p.beta * p.mu / p.delta - p.delta,
            -p.delta,
        ])
        expect[2, 1] = p.beta * p.mu / (2 * p.delta)
        np.testing.assert_allclose(J, expect, atol=1e-6)

    def test_criterion_agrees_with_eigenvalues_on_random_sample(self):
        # biologically meaningful stocking range mu <= delta*K; away from
        # the criterion's zero set the cubic sign should track the
        # numerically computed eigenvalue signs almost everywhere
        rng = np.random.default_rng(20240817)
        n = checked = agree = 0
        while n < 200:
            beta = 10.0 ** rng.uniform(-1, 1)
            delta = 10.0 ** rng.uniform(-2, 0)
            K = 10.0 ** rng.uniform(1, 3)
            if delta / beta >= K / 16.0:
                continue
            mu = delta * K * 10.0 ** rng.uniform(-4, 0)
            n += 1
            crit = beta * mu**2 - beta * K * delta * mu + K * delta**3
            if abs(crit) < 1e-6 * beta * K * delta * mu:
                continue
            rep = stability_check(DimensionalParams(beta=beta, delta=delta, K=K, mu=mu))
            checked += 1
            agree += bool(rep.agrees)
        assert checked >= 150
        assert agree / checked >= 0.95


class TestModelSpec:
    def test_classic4_requires_dimensional(self):
        with pytest.raises(ValueError):
            ModelSpec(ModelKind.CLASSIC4, DimensionlessParams(r=1.0))

    def test_modified_allee_requires_threshold(self):
        with pytest.raises(ValueError):
            ModelSpec(ModelKind.MODIFIED_ALLEE, DimensionlessParams(r=1.0))

    def test_allee_bounds(self):
        with pytest.raises(ValueError):
            DimensionlessParams(r=1.0, allee=1.5)

    def test_to_dimensionless(self):
        p = DimensionalParams(beta=2.85, delta=0.08, K=1.0, mu=0.04)
        spec = ModelSpec(ModelKind.CLASSIC3, p).to_dimensionless()
        assert isinstance(spec.params, DimensionlessParams)
        assert spec.params.r == pytest.approx(17.8125)
        assert spec.params.gamma == pytest.approx(0.5)
