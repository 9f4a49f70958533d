import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hillmap.errors import DutyOutOfRange, EmptyPiecewise, ForcingError, MeanNotZero
from hillmap.forcing import (
    BUILTIN_FORCINGS,
    cosine,
    eval_forcing,
    parse_forcing,
    piecewise,
    ramp,
    square,
    validate,
)

TWO_PI = 2.0 * math.pi


def builtin_specs():
    return [parse_forcing(name) for name in BUILTIN_FORCINGS]


class TestEval:
    def test_cosine_values(self):
        spec = cosine()
        assert eval_forcing(spec, 0.0) == 1.0
        assert abs(eval_forcing(spec, math.pi / 2)) < 1e-15

    def test_even_square_values(self):
        spec = square(0.5)
        assert eval_forcing(spec, math.pi / 4) == 1.0
        assert eval_forcing(spec, 3 * math.pi / 2) == -1.0

    def test_uneven_square_values(self):
        spec = square(0.25)
        assert eval_forcing(spec, math.pi / 8) == 0.75
        assert eval_forcing(spec, math.pi) == -0.25

    def test_ramp_values(self):
        spec = ramp()
        assert eval_forcing(spec, 0.0) == -1.0
        assert eval_forcing(spec, math.pi) == 0.0

    def test_right_continuity_at_jump(self):
        spec = square(0.25)
        tb = TWO_PI * 0.25
        assert eval_forcing(spec, tb) == -0.25
        assert eval_forcing(spec, tb - 1e-12) == 0.75

    def test_array_input(self):
        spec = square(0.5)
        t = np.array([0.1, math.pi + 0.1])
        np.testing.assert_array_equal(eval_forcing(spec, t), [1.0, -1.0])

    @given(st.floats(-50.0, 50.0))
    @settings(max_examples=250, deadline=None)
    def test_periodicity(self, t):
        # t + 2*pi is itself rounded, so smooth forcings can differ by one
        # ulp of the argument; step forcings must agree exactly away from
        # the rounding neighbourhood of their breakpoints
        for spec in builtin_specs():
            lhs = eval_forcing(spec, t)
            rhs = eval_forcing(spec, t + TWO_PI)
            if spec.kind in ("cosine", "ramp"):
                assert abs(lhs - rhs) <= 1e-14
            else:
                tt = math.fmod(t, TWO_PI) + (TWO_PI if t < 0 else 0.0)
                gap = min(abs(tt - b) for b in (0.0, TWO_PI * spec.duty, TWO_PI))
                if gap > 1e-9:
                    assert lhs == rhs

    def test_periodicity_many_periods(self):
        rng = np.random.default_rng(7)
        t = rng.uniform(0.0, TWO_PI, size=1000)
        for spec in builtin_specs():
            base = eval_forcing(spec, t)
            for k in (1, 3, -2):
                np.testing.assert_allclose(eval_forcing(spec, t + k * TWO_PI), base,
                                           rtol=0.0, atol=1e-13)

    def test_builtin_bounds(self):
        t = np.linspace(0, TWO_PI, 4001)
        for spec in builtin_specs():
            assert np.max(np.abs(eval_forcing(spec, t))) <= 1.0 + 1e-15


class TestZeroMean:
    def test_trapezoid_mean_small(self):
        # trapezoid quadrature over each smooth piece (closure values at
        # piece ends), ~1e5 samples total
        from hillmap.forcing import eval_in_segment, segments

        for spec in (cosine(), ramp(), square(0.5), square(0.25)):
            total = 0.0
            for idx, (t0, t1) in enumerate(segments(spec)):
                n = max(16, int(1e5 * (t1 - t0) / TWO_PI))
                t = np.linspace(t0, t1, n + 1)
                total += np.trapezoid(eval_in_segment(spec, t, idx), t)
            assert abs(total / TWO_PI) <= 1e-6

    def test_step_functions_exact_quadrature(self):
        from hillmap.forcing import _piecewise_mean, _square_levels

        for duty in (0.5, 0.25, 0.7):
            hi, lo = _square_levels(duty)
            mean = (hi * duty + lo * (1 - duty))
            assert abs(mean) <= 1e-12
        spec = piecewise([(0.0, 1.0), (1.0, -0.5), (3.0, 0.25),
                          (5.0, (0.5 * 2.0 - 1.0 - 0.25 * 2.0) / (TWO_PI - 5.0))])
        assert abs(_piecewise_mean(spec)) <= 1e-12

    @given(st.lists(st.tuples(st.floats(0.0, TWO_PI - 1e-6), st.floats(-3, 3)),
                    min_size=1, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_piecewise_mean_enforced(self, pts):
        # de-duplicate phases; shift the last value to force zero mean, then
        # construction must succeed and a +1 shift must be rejected
        phases = sorted({round(p, 6) for p, _ in pts})
        vals = [v for _, v in pts][: len(phases)]
        while len(vals) < len(phases):
            vals.append(0.0)
        segs = list(zip(phases, vals))
        edges = phases + [TWO_PI]
        widths = [edges[i + 1] - edges[i] for i in range(len(phases))]
        if phases[0] > 0.0:
            widths[-1] += phases[0]  # wrap segment
        total = sum(w * v for w, v in zip(widths, vals))
        if widths[-1] == 0.0:
            return
        segs[-1] = (phases[-1], vals[-1] - total / widths[-1])
        spec = piecewise(segs)
        validate(spec)
        with pytest.raises(MeanNotZero):
            piecewise([(p, v + 1.0) for p, v in segs])


class TestValidation:
    def test_cosine_ok(self):
        validate(cosine())

    def test_constant_piecewise_rejected(self):
        with pytest.raises(MeanNotZero):
            piecewise([(0.0, 1.0), (math.pi, 1.0)])

    @pytest.mark.parametrize("duty", [0.0, 1.0, -0.2, 1.4])
    def test_duty_out_of_range(self, duty):
        with pytest.raises(DutyOutOfRange):
            square(duty)

    def test_empty_piecewise(self):
        with pytest.raises(EmptyPiecewise):
            piecewise([])

    def test_duplicate_phases_rejected(self):
        with pytest.raises(ForcingError):
            piecewise([(0.0, 1.0), (0.0, -1.0)])


class TestParse:
    def test_names(self):
        assert parse_forcing("cosine").kind == "cosine"
        assert parse_forcing("ramp").kind == "ramp"
        assert parse_forcing("square:0.3").duty == 0.3
        assert parse_forcing("square").duty == 0.5

    def test_piecewise_file(self, tmp_path):
        path = tmp_path / "steps.txt"
        path.write_text("# phase value\n0.0 1.0\n3.141592653589793 -1.0\n")
        spec = parse_forcing(f"piecewise:{path}")
        assert spec.kind == "piecewise"
        assert eval_forcing(spec, 1.0) == 1.0
        assert eval_forcing(spec, 4.0) == -1.0

    def test_unknown_rejected(self):
        with pytest.raises(ForcingError):
            parse_forcing("sawtooth")

    def test_describe_round_trip(self):
        assert parse_forcing(square(0.25).describe()).duty == 0.25
