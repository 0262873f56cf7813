from random import Random

import pytest
from hypothesis import given, strategies as st

from animo.engine import (
    AnimoSpec,
    ArousalLevel,
    Band,
    Baselines,
    Category,
    Color,
    HeartRateSample,
    Shape,
    band_of,
    calibrate_baselines,
    compute_arousal,
    default_catalog,
    detect_state_change,
    load_samples_csv,
    parse_catalog,
    select_animo,
    smooth_heart_rate,
    state_violation,
    validate_catalog,
)
from animo.errors import (
    CalibrationDegenerate,
    CatalogInvalid,
    EmptyBand,
    EmptyTask,
    ImplausibleSample,
)

from .conftest import exact_mean


def hr(bpm, ts=0, user="u"):
    return HeartRateSample(user_id=user, timestamp=ts, bpm=bpm)


def samples(bpms, user="u"):
    return [hr(b, ts=i, user=user) for i, b in enumerate(bpms)]


class TestPlausibilityGate:
    @pytest.mark.parametrize("bpm", [20.0, 19.0, 250.0, 260.0, float("nan"), float("inf")])
    def test_rejects(self, bpm):
        with pytest.raises(ImplausibleSample):
            hr(bpm)

    @pytest.mark.parametrize("bpm", [20.5, 70.0, 249.5])
    def test_accepts(self, bpm):
        assert hr(bpm).bpm == bpm


class TestCalibration:
    def test_constant_tasks(self):
        b = calibrate_baselines(samples([60, 60, 60]), samples([100, 100, 100]))
        assert (b.low_bpm, b.high_bpm) == (60.0, 100.0)

    def test_means_match_exact_oracle(self):
        b = calibrate_baselines(samples([58, 62, 60]), samples([90, 110]))
        assert abs(b.low_bpm - float(exact_mean([58, 62, 60]))) < 1e-9
        assert abs(b.high_bpm - float(exact_mean([90, 110]))) < 1e-9
        assert (b.low_bpm, b.high_bpm) == (60.0, 100.0)

    def test_random_means_match_oracle(self):
        rng = Random(1234)
        for _ in range(50):
            calm = [round(rng.uniform(40, 90), 3) for _ in range(rng.randint(1, 40))]
            stress = [round(rng.uniform(95, 180), 3) for _ in range(rng.randint(1, 40))]
            b = calibrate_baselines(samples(calm), samples(stress))
            assert abs(b.low_bpm - float(exact_mean(calm))) < 1e-9
            assert abs(b.high_bpm - float(exact_mean(stress))) < 1e-9

    def test_empty_task(self):
        with pytest.raises(EmptyTask):
            calibrate_baselines([], samples([100]))
        with pytest.raises(EmptyTask):
            calibrate_baselines(samples([60]), [])

    def test_degenerate(self):
        with pytest.raises(CalibrationDegenerate):
            calibrate_baselines(samples([80]), samples([80]))
        with pytest.raises(CalibrationDegenerate):
            calibrate_baselines(samples([90]), samples([70]))


class TestSmoothing:
    def test_seed_case(self):
        assert smooth_heart_rate(None, hr(70)) == 70.0

    def test_fixed_point(self):
        for alpha in (0.1, 0.3, 1.0):
            assert smooth_heart_rate(70.0, hr(70), alpha) == 70.0

    def test_midpoint(self):
        assert smooth_heart_rate(60.0, hr(100), alpha=0.5) == 80.0

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            smooth_heart_rate(None, hr(70), alpha)

    @given(
        st.lists(st.floats(min_value=21.0, max_value=249.0), min_size=1, max_size=60),
        st.floats(min_value=0.01, max_value=1.0),
    )
    def test_stays_within_input_range(self, bpms, alpha):
        prev = None
        for i, b in enumerate(bpms):
            prev = smooth_heart_rate(prev, hr(b, ts=i), alpha)
            assert min(bpms[: i + 1]) - 1e-9 <= prev <= max(bpms[: i + 1]) + 1e-9


BASE = Baselines(user_id="u", low_bpm=60.0, high_bpm=100.0)


class TestArousal:
    @pytest.mark.parametrize(
        "bpm,value,band",
        [
            (60.0, 0.0, Band.LOW),
            (80.0, 0.5, Band.MID),
            (120.0, 1.0, Band.HIGH),
            (40.0, 0.0, Band.LOW),
        ],
    )
    def test_examples(self, bpm, value, band):
        a = compute_arousal(bpm, BASE)
        assert a.value == value and a.band == band

    def test_threshold_boundaries_are_mid(self):
        assert band_of(1.0 / 3.0) is Band.MID
        assert band_of(2.0 / 3.0) is Band.MID
        assert band_of(0.3333) is Band.LOW
        assert band_of(0.6667) is Band.HIGH

    @given(st.floats(min_value=-1e9, max_value=1e9))
    def test_clamp_totality(self, bpm):
        a = compute_arousal(bpm, BASE)
        assert 0.0 <= a.value <= 1.0

    def test_monotone_in_bpm(self):
        rng = Random(99)
        for _ in range(20):
            low = rng.uniform(40, 90)
            high = low + rng.uniform(5, 80)
            base = Baselines("u", low, high)
            grid = sorted(rng.uniform(20, 260) for _ in range(200))
            values = [compute_arousal(b, base).value for b in grid]
            assert all(x <= y for x, y in zip(values, values[1:]))


class TestSelectAnimo:
    def test_high_band_colors(self, catalog):
        for seed in range(200):
            s = select_animo(
                ArousalLevel(0.9, Band.HIGH), Shape.CIRCLE, catalog, Random(seed), computed_at=0
            )
            assert s.color in (Color.YELLOW, Color.RED)
            assert s.band is Band.HIGH

    def test_mid_band_always_white(self, catalog):
        for seed in range(200):
            s = select_animo(
                ArousalLevel(0.5, Band.MID), Shape.DIAMOND, catalog, Random(seed), computed_at=0
            )
            assert s.color is Color.WHITE

    def test_low_band_colors(self, catalog):
        for seed in range(200):
            s = select_animo(
                ArousalLevel(0.1, Band.LOW), Shape.CIRCLE, catalog, Random(seed), computed_at=0
            )
            assert s.color in (Color.BLUE, Color.GREEN)

    def test_deterministic_given_seed(self, catalog):
        a = select_animo(ArousalLevel(0.9, Band.HIGH), Shape.CIRCLE, catalog, Random(7), computed_at=5)
        b = select_animo(ArousalLevel(0.9, Band.HIGH), Shape.CIRCLE, catalog, Random(7), computed_at=5)
        assert a == b

    def test_selected_animo_matches_band(self, catalog):
        by_id = {s.animo_id: s for s in catalog}
        rng = Random(3)
        for band, value in ((Band.LOW, 0.0), (Band.MID, 0.5), (Band.HIGH, 1.0)):
            for _ in range(50):
                s = select_animo(ArousalLevel(value, band), Shape.CIRCLE, catalog, rng, computed_at=0)
                assert by_id[s.animo_id].energy_band == band
                assert state_violation(s, by_id) is None

    def test_empty_band(self, catalog):
        highs_only = [s for s in catalog if s.energy_band is Band.HIGH]
        with pytest.raises(EmptyBand):
            select_animo(ArousalLevel(0.0, Band.LOW), Shape.CIRCLE, highs_only, Random(0), computed_at=0)


def _state(band, ts=0.0):
    color = {Band.LOW: Color.BLUE, Band.MID: Color.WHITE, Band.HIGH: Color.RED}[band]
    return_shape = Shape.CIRCLE
    from animo.engine import AnimoState

    return AnimoState(shape=return_shape, animo_id="x", color=color, band=band, computed_at=ts)


class TestStateChangeNotify:
    def test_no_band_change(self):
        assert detect_state_change(_state(Band.LOW), _state(Band.LOW), None, now=100.0) is False

    def test_change_after_long_quiet(self):
        assert detect_state_change(_state(Band.LOW), _state(Band.HIGH), 0.0, now=1200.0) is True

    def test_change_debounced(self):
        assert detect_state_change(_state(Band.LOW), _state(Band.HIGH), 1080.0, now=1200.0) is False

    def test_first_notify_fires(self):
        assert detect_state_change(_state(Band.LOW), _state(Band.MID), None, now=5.0) is True

    def test_exhaustive_small_cases(self):
        # oracle: notify iff band changed and the quiet time is >= the gap
        for change in (False, True):
            for quiet in (None, 0, 60, 300, 599, 600, 601, 1200):
                now = 5000.0
                last = None if quiet is None else now - quiet
                prev, nxt = _state(Band.LOW), _state(Band.HIGH if change else Band.LOW)
                expected = change and (quiet is None or quiet >= 600)
                assert detect_state_change(prev, nxt, last, now) is expected

    def test_debounce_spacing_property(self):
        # replaying any random band walk never yields two buzzes < min_gap apart
        rng = Random(11)
        for _ in range(50):
            last = None
            fired = []
            t = 0.0
            prev = _state(rng.choice(list(Band)))
            for _ in range(300):
                t += rng.uniform(1, 120)
                nxt = _state(rng.choice(list(Band)), ts=t)
                if detect_state_change(prev, nxt, last, now=t, min_gap=600.0):
                    fired.append(t)
                    last = t
                prev = nxt
            assert all(b - a >= 600.0 for a, b in zip(fired, fired[1:]))


class TestCatalog:
    def test_default_structure(self, catalog):
        assert len(catalog) == 18
        validate_catalog(list(catalog))
        assert {s.energy_band for s in catalog} == set(Band)

    def test_wrong_size(self, catalog):
        with pytest.raises(CatalogInvalid):
            validate_catalog(list(catalog)[:17])

    def test_duplicate_id(self, catalog):
        specs = list(catalog)
        specs[1] = AnimoSpec(specs[0].animo_id, "dup", specs[1].energy_band, specs[1].category_tag)
        with pytest.raises(CatalogInvalid):
            validate_catalog(specs)

    def test_band_coverage_required(self, catalog):
        specs = [
            AnimoSpec(s.animo_id, s.motion_name, Band.HIGH if s.energy_band is Band.MID else s.energy_band, s.category_tag)
            for s in catalog
        ]
        with pytest.raises(CatalogInvalid):
            validate_catalog(specs)

    def test_parse_rejects_bad_line(self):
        with pytest.raises(CatalogInvalid):
            parse_catalog(['{"id": "x"}'])

    def test_category_counts(self, catalog):
        tags = [s.category_tag for s in catalog]
        assert tags.count(Category.ENERGY_AMBIGUOUS) == 2
        assert tags.count(Category.NEUTRAL) == 4


class TestCsvIngestion:
    def test_roundtrip(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("user_id,timestamp,bpm\nu1,0,60\nu1,1,62\nu2,0,70\n")
        got = load_samples_csv(str(p))
        assert [s.bpm for s in got] == [60.0, 62.0, 70.0]

    def test_bad_header(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("user,ts,bpm\nu1,0,60\n")
        with pytest.raises(ValueError):
            load_samples_csv(str(p))

    def test_non_increasing_timestamps(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("user_id,timestamp,bpm\nu1,5,60\nu1,5,62\n")
        with pytest.raises(ValueError):
            load_samples_csv(str(p))

    def test_gate_applies(self, tmp_path):
        p = tmp_path / "hr.csv"
        p.write_text("user_id,timestamp,bpm\nu1,0,10\n")
        with pytest.raises(ImplausibleSample):
            load_samples_csv(str(p))
