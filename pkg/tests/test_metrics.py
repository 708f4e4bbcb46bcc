import numpy as np
import pytest

from terrafilter import (InvalidInputError, MetricsReport, NormalizedLms,
                         ScenarioConfig, UndefinedRatioError, improvement,
                         max_error, mse, synthesize, time_step, variance_ratio)
from terrafilter.metrics import reports_from_csv, reports_to_csv


def _report(algorithm="a", scenario="s", seed=0, **kw):
    base = dict(sr_ms=1.0, mse=1.0, vr=1.0, me=1.0)
    base.update(kw)
    return MetricsReport(algorithm=algorithm, scenario_id=scenario, seed=seed,
                         **base)


class TestMse:
    def test_exact_match(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_constant_offset(self):
        ref = np.zeros(100)
        assert mse(ref + 0.1, ref) == pytest.approx(0.01)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            mse([1.0], [1.0, 2.0])
        with pytest.raises(InvalidInputError):
            mse([], [])


class TestVarianceRatio:
    def test_exact_match(self):
        assert variance_ratio(np.ones(10), np.ones(10), 0.09) == 0.0

    def test_identity_filter(self, rng):
        ref = np.zeros(2000)
        pred = rng.normal(0.0, 0.3, 2000)
        assert variance_ratio(pred, ref, 0.09) == pytest.approx(1.0, abs=0.07)

    def test_sigma_zero_rejected(self):
        with pytest.raises(InvalidInputError):
            variance_ratio([1.0], [1.0], 0.0)

    def test_bias_decomposition(self, rng):
        # population variance = mean square - squared mean, exactly
        pred = rng.normal(0.5, 1.0, 500)
        ref = np.zeros(500)
        err = pred - ref
        lhs = variance_ratio(pred, ref, 0.09)
        rhs = mse(pred, ref) / 0.09 - err.mean() ** 2 / 0.09
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestMaxError:
    def test_exact_match(self):
        assert max_error([3.0, 4.0], [3.0, 4.0]) == 0.0

    def test_single_spike(self):
        ref = np.zeros(50)
        pred = ref.copy()
        pred[17] = 2.0
        assert max_error(pred, ref) == 2.0

    def test_dominates_rms(self, rng):
        pred = rng.normal(0.0, 1.0, 300)
        ref = rng.normal(0.0, 1.0, 300)
        assert max_error(pred, ref) >= np.sqrt(mse(pred, ref))

    def test_invariant_under_common_reordering(self, rng):
        pred = rng.normal(0.0, 1.0, 100)
        ref = rng.normal(0.0, 1.0, 100)
        perm = rng.permutation(100)
        assert max_error(pred[perm], ref[perm]) == max_error(pred, ref)
        assert mse(pred[perm], ref[perm]) == pytest.approx(mse(pred, ref))
        assert variance_ratio(pred[perm], ref[perm], 0.09) == pytest.approx(
            variance_ratio(pred, ref, 0.09))


class TestImprovement:
    def test_equal_values(self):
        assert improvement(_report(mse=0.5), _report(mse=0.5), "mse") == 0.0

    def test_perfect_candidate(self):
        assert improvement(_report(mse=0.5), _report(mse=0.0), "mse") == 100.0

    def test_published_pair(self):
        # the headline accuracy-gain figure: 0.132 -> 0.016 is ~88%
        pct = improvement(_report(mse=0.132), _report(mse=0.016), "mse")
        assert pct == pytest.approx(87.9, abs=0.05)

    def test_zero_baseline(self):
        with pytest.raises(UndefinedRatioError):
            improvement(_report(mse=0.0), _report(mse=0.1), "mse")

    def test_mismatched_cells(self):
        with pytest.raises(InvalidInputError):
            improvement(_report(seed=0), _report(seed=1), "mse")


@pytest.fixture(scope="module")
def short_trace():
    return synthesize(ScenarioConfig(sample_count=400, clean_prefix=100, seed=0))


class TestTimeStep:
    class _NoOp:
        init_window = 10

        def fit(self, t, y):
            return self

        def step(self, t, y):
            return 0.0

    def test_noop_floor(self, short_trace):
        sr = time_step(self._NoOp, short_trace)
        assert sr < 0.01

    def test_repeatability(self, short_trace):
        a = time_step(lambda: NormalizedLms(), short_trace, timed_steps=200)
        b = time_step(lambda: NormalizedLms(), short_trace, timed_steps=200)
        assert abs(a - b) / max(a, b) < 0.5

    def test_too_short(self):
        trace = synthesize(ScenarioConfig(sample_count=10, clean_prefix=0,
                                          outlier_fraction=0.0, seed=0))
        with pytest.raises(InvalidInputError):
            time_step(self._NoOp, trace)  # init window consumes everything


class TestReportCsv:
    def test_roundtrip(self):
        reports = [_report("rvm_rls", "s1", 0, mse=0.25),
                   _report("pf", "s1", 1, vr=2.5)]
        text = reports_to_csv(reports)
        assert text.splitlines()[0] == "algorithm,sr_ms,mse,vr,me,scenario_id,seed"
        back = reports_from_csv(text)
        assert [r.algorithm for r in back] == ["rvm_rls", "pf"]
        assert back[0].mse == 0.25
        assert back[1].seed == 1

    def test_bad_header(self):
        with pytest.raises(InvalidInputError):
            reports_from_csv("a,b\n1,2\n")
