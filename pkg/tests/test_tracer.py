import numpy as np
import pytest

import hillmap.tracer as tracer_mod
from hillmap import (
    BothDerivativesVanish,
    Branch,
    NoWindowFound,
    Orientation,
    Params,
    TraceConfig,
    boundary_slope,
    bootstrap_branch,
    cosine,
    square,
    trace_from,
    trace_kapitza_boundary,
    trace_objective,
    trace_tongue,
)

COS = cosine()

# scipy DOP853 root-finding oracle values (rtol 1e-12): a on the first-tongue
# boundary tr = -2 for sinusoidal forcing
WEDGE_UPPER_1E3 = 0.2504998749676478   # eps = 1e-3
WEDGE_LOWER_1E3 = 0.2494998750324236
WEDGE_UPPER_2E3 = 0.25099949974896735  # eps = 2e-3
WEDGE_LOWER_2E3 = 0.24899950025101003
# same oracle at eps = 0.05: branch gap of the first tongue
GAP_AT_005 = 0.049992188992254494
# |tr| = 2 crossings of the a < 0 column at eps = 1.0 (stabilization window)
KAPITZA_EDGE_LOW = -0.37848922126406176
KAPITZA_EDGE_HIGH = -0.34766912530615335


def curve_lookup(curve):
    return {round(p.epsilon, 9): p.a for p in curve.points}


class TestBoundarySlope:
    def test_wedge_slopes(self):
        # slopes of the first-tongue branches approach +-1/2 as eps -> 0
        for branch, expected in ((Branch.UPPER, 0.5), (Branch.LOWER, -0.5)):
            pt = bootstrap_branch(1, branch, 2.0, -1, COS)
            slope, orientation = boundary_slope(Params(pt.a, pt.epsilon), COS)
            assert orientation is Orientation.DA_DEPS
            assert abs(slope - expected) < 5e-2

    def test_second_tongue_opens_flat(self):
        pt = bootstrap_branch(2, Branch.UPPER, 2.0, 1, COS,
                              TraceConfig(bootstrap_offset=1e-2))
        slope, _ = boundary_slope(Params(pt.a, pt.epsilon), COS)
        assert abs(slope) <= 0.1

    def test_degenerate_point_raises(self, monkeypatch):
        class ZeroBundle:
            trace_da = 0.0
            trace_deps = 0.0

        monkeypatch.setattr(tracer_mod, "_bundle_raw",
                            lambda *args, **kwargs: ZeroBundle())
        with pytest.raises(BothDerivativesVanish):
            boundary_slope(Params(0.3, 0.2), COS)


class TestBootstrap:
    def test_first_tongue_against_oracle(self):
        up = bootstrap_branch(1, Branch.UPPER, 2.0, -1, COS)
        lo = bootstrap_branch(1, Branch.LOWER, 2.0, -1, COS)
        assert abs(up.a - (0.25 + 0.5e-3)) < 1e-4
        assert abs(lo.a - (0.25 - 0.5e-3)) < 1e-4
        assert abs(up.a - WEDGE_UPPER_1E3) < 1e-6
        assert abs(lo.a - WEDGE_LOWER_1E3) < 1e-6

    def test_second_tongue_tip_degeneracy(self):
        pt = bootstrap_branch(2, Branch.UPPER, 2.0, 1, COS)
        assert abs(pt.a - 1.0) < 1e-4
        assert abs(pt.residual) < 1e-6

    def test_forcing_independence_of_tips(self):
        # the bootstrap location converges to n^2/4 for every built-in kind
        for name in ("cosine", "square:0.5", "square:0.25", "ramp"):
            from hillmap import parse_forcing

            spec = parse_forcing(name)
            gaps = []
            for delta in (8e-3, 2e-3, 5e-4):
                cfg = TraceConfig(bootstrap_offset=delta)
                sign = 1 if trace_objective(Params(0.25, delta), spec) > 0 else -1
                pt = bootstrap_branch(1, Branch.UPPER, 2.0, sign, spec, cfg)
                gaps.append(abs(pt.a - 0.25))
            assert gaps[2] < gaps[0]
            assert gaps[2] < 1e-3


class TestTraceTongue:
    def test_first_tongue_shape(self):
        up, lo = trace_tongue(1, COS)
        for c in (up, lo):
            assert c.points[0].epsilon == 0.0
            assert c.points[0].a == 0.25
            assert abs(c.points[0].residual) < 1e-6
            assert c.truncated_reason is None
            assert max(abs(p.residual) for p in c.points) < 1e-6
        ups, los = curve_lookup(up), curve_lookup(lo)
        gap = ups[0.05] - los[0.05]
        assert abs(gap - 0.05) < 0.2 * 0.05
        assert abs(gap - GAP_AT_005) < 2e-4

    def test_third_tongue_emanates_from_nine_fourths(self):
        up, lo = trace_tongue(3, COS)
        assert up.points[0].a == 2.25 and lo.points[0].a == 2.25
        assert up.sign == -1  # trace is -2 on odd-tongue boundaries

    def test_branch_ordering_all_tongues(self):
        for n in (1, 2, 3):
            up, lo = trace_tongue(n, COS)
            ups, los = curve_lookup(up), curve_lookup(lo)
            for eps in set(ups) & set(los):
                assert ups[eps] >= los[eps] - 1e-12

    def test_square_wave_tongue(self):
        up, lo = trace_tongue(1, square(0.5))
        assert up.points[0].a == 0.25  # tip independent of the forcing type
        for c in (up, lo):
            assert max(abs(p.residual) for p in c.points) < 1e-6
        assert len(up.points) > 10

    def test_emits_on_the_eps_grid(self):
        up, _ = trace_tongue(1, COS, TraceConfig(d_epsilon=0.1, epsilon_max=1.0))
        grid_eps = [p.epsilon for p in up.points[2:]]
        assert grid_eps == pytest.approx([0.1 * k for k in range(1, 11)], abs=1e-12)

    def test_monotone_epsilon_in_da_deps_mode(self):
        up, lo = trace_tongue(2, COS)
        for c in (up, lo):
            eps = [p.epsilon for p in c.points if p.orientation is Orientation.DA_DEPS]
            assert all(e1 > e0 for e0, e1 in zip(eps, eps[1:]))

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            trace_tongue(0, COS)


class TestOrientationSwitching:
    def test_reciprocal_mode_is_lossless(self):
        # a damped tongue tip has d(tr)/da = 0 exactly, so the boundary
        # leaves it vertically: bootstrapping very close to the tip makes
        # |da/deps| exceed the default switch threshold and the branch is
        # continued as the reciprocal problem deps/da
        from hillmap import trace_damped_tongue

        near_tip = TraceConfig(bootstrap_offset=1e-6, epsilon_max=1.5)
        up_r, lo_r = trace_damped_tongue(1, 0.05, COS, near_tip)
        rec_pts = [p for p in up_r.points if p.orientation is Orientation.DEPS_DA]
        assert rec_pts, "expected reciprocal-mode points near the vertical tip"
        assert max(abs(p.residual) for p in up_r.points) < 1e-6
        assert max(abs(p.residual) for p in lo_r.points) < 1e-6
        a_rec = [p.a for p in rec_pts]
        assert all(a1 > a0 for a0, a1 in zip(a_rec, a_rec[1:]))
        # same boundary as the ordinary da/deps trace, wherever both exist
        up_d, _ = trace_damped_tongue(1, 0.05, COS, TraceConfig(epsilon_max=1.5))
        eps_d = up_d.epsilons
        a_d = up_d.avalues
        order = np.argsort(eps_d)
        checked = 0
        for p in up_r.points:
            if eps_d[order][0] + 1e-3 <= p.epsilon <= eps_d[order][-1]:
                a_interp = np.interp(p.epsilon, eps_d[order], a_d[order])
                assert abs(p.a - a_interp) < 5e-3
                checked += 1
        assert checked >= 5


class TestTraceFrom:
    def test_resume_forward(self):
        up, _ = trace_tongue(1, COS, TraceConfig(epsilon_max=0.5))
        start = up.points[-1]
        cont = trace_from(start, +1, 2.0, -1, COS,
                          TraceConfig(epsilon_max=2.0), tongue_index=1,
                          branch=Branch.UPPER)
        assert cont.points[-1].epsilon == pytest.approx(2.0, abs=1e-9)
        assert max(abs(p.residual) for p in cont.points) < 1e-6

    def test_backward_recovers_bootstrap(self):
        up, _ = trace_tongue(1, COS, TraceConfig(epsilon_max=0.5))
        start = [p for p in up.points if abs(p.epsilon - 0.5) < 1e-9][0]
        back = trace_from(start, -1, 2.0, -1, COS)
        last = back.points[-1]
        boot = up.points[1]
        assert abs(last.epsilon - boot.epsilon) < 1e-9
        assert abs(last.a - boot.a) < 1e-3

    def test_residual_precondition(self):
        bad = tracer_mod.BoundaryPoint(0.5, 0.9, 1.5, -0.5, Orientation.DA_DEPS)
        with pytest.raises(ValueError, match="residual"):
            trace_from(bad, +1, 2.0, -1, COS)


class TestKapitza:
    def test_window_found_and_on_contour(self):
        curves = trace_kapitza_boundary(COS)
        assert len(curves) >= 1
        for c in curves:
            assert c.tongue_index == 0
            assert max(abs(p.residual) for p in c.points) < 1e-6

    def test_window_edges_match_oracle(self):
        curves = trace_kapitza_boundary(COS)
        roots = sorted({c.points[0].a for c in curves})
        assert abs(roots[0] - KAPITZA_EDGE_LOW) < 5e-4
        assert abs(roots[-1] - KAPITZA_EDGE_HIGH) < 5e-4

    def test_no_window_at_tiny_amplitude(self):
        with pytest.raises(NoWindowFound):
            trace_kapitza_boundary(COS, eps_scan=1e-3)
