import numpy as np
import pytest

from tyclab import (
    Boundary,
    BracketInvalid,
    DimensionalParams,
    DimensionlessParams,
    IndeterminateOutcome,
    IntegratorConfig,
    ModelKind,
    ModelSpec,
    Region,
    classify,
    classify_field,
    compare_thresholds,
    find_threshold,
    region_map,
    scan_outcomes,
)
from tyclab.pde import BoundaryCondition, SpatialGrid, constant_profile

R = 17.8125


class TestClassify:
    @pytest.mark.parametrize(
        "ic,region",
        [
            ((0.3, 0.3, 0.1), Region.POSITIVE),
            ((0.3, 0.3, 2.5), Region.NEGATIVE_NO_BLOWUP),
            ((0.4, 0.4, 2.5), Region.BLOWUP),
        ],
    )
    def test_reference_regions(self, classic3, ic, region):
        assert classify(classic3, ic).region is region

    def test_positive_means_no_events(self, classic3):
        out = classify(classic3, (0.3, 0.3, 0.1))
        assert not any(out.negativity_intervals.values())
        assert out.blowup is None

    def test_blowup_carries_record(self, classic3):
        out = classify(classic3, (0.4, 0.4, 2.5))
        assert out.blowup is not None
        assert out.blowup.t_estimate == pytest.approx(0.18, abs=0.02)

    def test_collapse_without_events_is_indeterminate(self, classic3):
        cfg = IntegratorConfig(h_min=0.02, h_init=0.02, h_max=0.04, t_end=1.0)
        with pytest.raises(IndeterminateOutcome):
            classify(classic3, (0.3, 0.3, 2.5), cfg)

    def test_dimensional_parameters_are_rescaled(self):
        # beta*K/(2*delta) = 17.8125, mu = 0: same phase portrait as the
        # canonical dimensionless runs
        p = DimensionalParams(beta=0.285, delta=0.08, K=10.0)
        spec = ModelSpec(ModelKind.CLASSIC3, p)
        assert classify(spec, (3.0, 3.0, 1.0)).region is Region.POSITIVE
        assert classify(spec, (3.0, 3.0, 25.0)).region is Region.NEGATIVE_NO_BLOWUP

    def test_classify_field_constant_matches_ode(self, classic3):
        grid = SpatialGrid(25, BoundaryCondition.NEUMANN)
        spec = ModelSpec(ModelKind.CLASSIC3,
                         DimensionlessParams(r=R, diffusion=0.01), spatial=True)
        fields = np.stack([constant_profile(grid, v) for v in (0.3, 0.3, 2.5)])
        out = classify_field(spec, fields, grid, IntegratorConfig(t_end=5.0, sample_dt=0.01))
        assert out.region is Region.NEGATIVE_NO_BLOWUP


class TestFindThreshold:
    def test_s_star_at_f0m0_03(self, classic3):
        res = find_threshold(classic3, 0.3, "s0", Boundary.REGION_1_2, (0.0, 2.0))
        assert res.value == pytest.approx(0.9194, abs=0.01)
        assert res.below_outcome is Region.POSITIVE
        assert res.above_outcome is Region.NEGATIVE_NO_BLOWUP

    def test_s_double_star_at_f0m0_04(self, classic3):
        res = find_threshold(classic3, 0.4, "s0", Boundary.REGION_2_3, (0.0, 10.0))
        # s0 = 2.5 already blows up at these initial sizes, so the
        # boundary sits below that
        assert res.value <= 2.5
        assert res.above_outcome is Region.BLOWUP
        assert res.below_outcome is not Region.BLOWUP

    def test_boundary_verification_invariant(self, classic3):
        tol = 1e-4
        res = find_threshold(classic3, 0.3, "s0", Boundary.REGION_1_2, (0.0, 2.0), tol=tol)
        lo = classify(classic3, (0.3, 0.3, res.value - tol))
        hi = classify(classic3, (0.3, 0.3, res.value + tol))
        assert lo.region.rank < Boundary.REGION_1_2.above_rank <= hi.region.rank

    def test_bracket_invalid_when_both_positive(self, classic3):
        with pytest.raises(BracketInvalid):
            find_threshold(classic3, 0.3, "s0", Boundary.REGION_1_2, (0.0, 0.1))

    def test_bracket_invalid_flags_all_below(self, classic3):
        with pytest.raises(BracketInvalid) as exc:
            find_threshold(classic3, 0.3, "s0", Boundary.REGION_2_3, (0.0, 1.5))
        assert exc.value.all_below

    def test_gamma_axis(self, classic3):
        res = find_threshold(classic3, 0.3, "gamma", Boundary.REGION_1_2, (0.0, 10.0))
        # stocking above the carrying-capacity rate turns L negative; the
        # critical rate sits right there
        assert res.value == pytest.approx(1.0, abs=0.05)


class TestOutcomeOrdering:
    def test_classification_sandwich_along_s0(self, classic3):
        # 50-point scan: Positive, then NegativeNoBlowup, then Blowup, with
        # no region reappearing after being left
        outcomes = scan_outcomes(classic3, "s0", np.linspace(0, 3, 50), 0.3)
        ranks = [o.region.rank for o in outcomes]
        assert all(b >= a for a, b in zip(ranks, ranks[1:]))
        assert ranks[0] == 0
        assert ranks[-1] == 2

    def test_stocking_trigger_never_positive(self):
        # dimensional parameters with mu > delta*K: stocking alone forces
        # negativity (or worse) from any positive initial data
        rng = np.random.default_rng(7)
        beta, delta, K = 2.85, 0.08, 1.0
        for _ in range(32):
            mu = delta * K * rng.uniform(1.5, 5.0)
            p = DimensionalParams(beta=beta, delta=delta, K=K, mu=mu)
            ic = K * 10.0 ** rng.uniform(np.log10(0.05), 0.0, size=3)
            out = classify(ModelSpec(ModelKind.CLASSIC3, p), ic)
            assert out.region is not Region.POSITIVE


class TestRegionMap:
    def test_classic_map_has_both_curves(self, classic3):
        rmap = region_map(classic3, (0.1, 0.5), "s0", resolution=5)
        assert rmap.r12.status == ["ok"] * 5
        assert rmap.r23.status == ["ok"] * 5
        # known point: s*(0.3) ~ 0.9194
        assert rmap.r12.values[2] == pytest.approx(0.9194, abs=0.01)
        # monotone ordering: R1/2 strictly below R2/3 wherever both exist
        for v12, v23 in zip(rmap.r12.values, rmap.r23.values):
            assert v12 < v23
        assert [x for x, _ in rmap.r12.points] == sorted(rmap.r12.f0m0)

    def test_modified_maps_have_no_blowup_boundary(self):
        p = DimensionlessParams(r=R, gamma=0.0, allee=0.1)
        flagged = {}
        for kind in (ModelKind.MODIFIED_ALLEE, ModelKind.MODIFIED_NOALLEE):
            rmap = region_map(ModelSpec(kind, p), (0.1, 0.5), "s0", resolution=3)
            assert all(s == "ok" for s in rmap.r12.status)
            assert rmap.r23.absent
            assert rmap.r23.points == []
            flagged[kind] = rmap.r12.non_smooth_points()
        # the Allee factor kinks the threshold curve at small populations;
        # without it the curve stays smooth
        assert flagged[ModelKind.MODIFIED_ALLEE]
        assert not flagged[ModelKind.MODIFIED_NOALLEE]

    def test_resolution_guard(self, classic3):
        with pytest.raises(ValueError):
            region_map(classic3, resolution=1)

    def test_workers_do_not_change_results(self, classic3):
        serial = region_map(classic3, (0.2, 0.4), "s0", resolution=3, workers=1)
        parallel = region_map(classic3, (0.2, 0.4), "s0", resolution=3, workers=2)
        assert serial.r12.values == parallel.r12.values
        assert serial.r23.values == parallel.r23.values


class TestCompare:
    def test_single_model_degenerates_to_region_map(self, classic3):
        comp = compare_thresholds([classic3], "s0", (0.2, 0.4), resolution=3)
        assert list(comp.maps) == ["classic3"]
        rmap = region_map(classic3, (0.2, 0.4), "s0", resolution=3)
        assert comp.maps["classic3"].r12.values == rmap.r12.values

    def test_classic_vs_noallee_overlay(self, classic3):
        p = DimensionlessParams(r=R, gamma=0.0)
        comp = compare_thresholds(
            [classic3, ModelSpec(ModelKind.MODIFIED_NOALLEE, p)],
            "s0", (0.1, 0.5), resolution=3,
        )
        c = comp.maps["classic3"].r12.values
        n = comp.maps["modified_noallee"].r12.values
        # both monotonically decreasing, and close to one another: the
        # competition terms barely move the negativity threshold
        assert all(b < a for a, b in zip(c, c[1:]))
        assert all(b < a for a, b in zip(n, n[1:]))
        assert max(abs(a - b) for a, b in zip(c, n)) < 0.05

    def test_rejects_empty_model_list(self):
        with pytest.raises(ValueError):
            compare_thresholds([], "s0")


class TestNonSmoothDetection:
    def curve(self, values):
        from tyclab import Boundary, ThresholdCurve

        xs = list(np.linspace(0.1, 0.5, len(values)))
        return ThresholdCurve(
            axis="s0", boundary=Boundary.REGION_1_2, f0m0=xs,
            values=list(values), status=["ok"] * len(values),
        )

    def test_smooth_curve_unflagged(self):
        assert self.curve([1.12, 1.02, 0.92, 0.84, 0.76]).non_smooth_points() == []

    def test_kinked_curve_flagged_at_the_kink(self):
        flagged = self.curve([0.09, 0.40, 0.62, 0.74, 0.64]).non_smooth_points()
        assert flagged
        assert flagged[0] == pytest.approx(0.2)

    def test_short_curves_unflagged(self):
        assert self.curve([1.0, 2.0]).non_smooth_points() == []
