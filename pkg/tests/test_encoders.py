import numpy as np
import pytest

import oracles
from ecgfusion import encoders as enc


def random_series(rng, n=None):
    n = int(rng.integers(2, 33)) if n is None else n
    if rng.random() < 0.25:
        # integer-valued series stress quantile ties and duplicate bins
        return rng.integers(0, 4, n).astype(np.float64)
    return rng.uniform(-2.0, 3.0, n)


class TestRescale:
    def test_affine_endpoints(self):
        out = enc.rescale_unit([0.0, 5.0, 10.0])
        assert np.array_equal(out.samples, [0.0, 0.5, 1.0])
        assert out.source_min == 0.0 and out.source_max == 10.0

    def test_degenerate_constant(self):
        out = enc.rescale_unit([3.0, 3.0, 3.0])
        assert np.array_equal(out.samples, [0.5, 0.5, 0.5])
        assert out.source_min == out.source_max == 3.0

    def test_direct_formula(self):
        out = enc.rescale_unit([1.0, 2.0, 4.0])
        assert np.allclose(out.samples, [0.0, 1.0 / 3.0, 1.0], atol=0, rtol=1e-15)

    def test_rejects_non_finite_with_index(self):
        with pytest.raises(ValueError, match="index 2"):
            enc.rescale_unit([1.0, 2.0, np.nan, 3.0])
        with pytest.raises(ValueError, match="index 0"):
            enc.rescale_unit([np.inf, 2.0])

    def test_rejects_short_series(self):
        with pytest.raises(ValueError, match="at least 2"):
            enc.rescale_unit([1.0])

    def test_order_preserving_and_in_range(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            x = rng.uniform(-10, 10, int(rng.integers(2, 40)))
            out = enc.rescale_unit(x).samples
            assert out.min() >= 0.0 and out.max() <= 1.0
            assert np.array_equal(np.argsort(out, kind="stable"),
                                  np.argsort(x, kind="stable"))


class TestPolarEncode:
    def test_arccos_endpoints(self):
        out = enc.polar_encode(enc.rescale_unit([1.0, 0.0]))
        assert np.array_equal(out.angles, [0.0, np.pi / 2])
        assert np.array_equal(out.radii, [0.5, 1.0])
        assert out.regularizer == 2

    def test_short_series_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            enc.polar_encode(np.array([0.5]))

    def test_known_angles(self):
        out = enc.polar_encode(np.array([0.0, 0.5, 1.0]))
        assert np.allclose(out.angles, [np.pi / 2, np.pi / 3, 0.0], atol=1e-15)

    def test_radii_strictly_increasing_in_unit_interval(self):
        out = enc.polar_encode(np.linspace(0, 1, 17))
        assert np.all(np.diff(out.radii) > 0)
        assert out.radii[0] > 0 and out.radii[-1] == 1.0

    def test_clamps_float_overshoot(self):
        out = enc.polar_encode(np.array([1.0 + 1e-12, -1e-12]))
        assert out.angles[0] == 0.0 and out.angles[1] == np.pi / 2

    def test_rejects_unrescaled_input(self):
        with pytest.raises(ValueError, match="rescaled"):
            enc.polar_encode(np.array([0.0, 1.5]))


class TestGasf:
    def test_two_point_exact(self):
        img = enc.gasf([0.0, 1.0])
        assert img.kind == "gaf"
        assert np.array_equal(img.pixels, [[-1.0, 0.0], [0.0, 1.0]])

    def test_constant_series_exact(self):
        img = enc.gasf([4.2] * 5)
        assert np.array_equal(img.pixels, np.full((5, 5), -0.5))

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(-1, 1, 7)
        expected = np.asarray(oracles.gasf(list(x)))
        assert np.abs(enc.gasf(x).pixels - expected).max() < 1e-12

    def test_symmetry_exact(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            img = enc.gasf(random_series(rng)).pixels
            assert np.array_equal(img, img.T)

    def test_range_and_diagonal_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = random_series(rng)
            img = enc.gasf(x).pixels
            assert img.min() >= -1.0 and img.max() <= 1.0
            scaled = enc.rescale_unit(x).samples
            assert np.abs(np.diagonal(img) - (2.0 * scaled**2 - 1.0)).max() < 1e-12

    def test_shift_scale_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            x = rng.uniform(-2, 2, int(rng.integers(2, 33)))
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-5.0, 5.0)
            base = enc.gasf(x).pixels
            moved = enc.gasf(a * x + b).pixels
            assert np.abs(base - moved).max() < 1e-12


class TestRecurrencePlot:
    def test_three_point_binary(self):
        img = enc.recurrence_plot([0.0, 1.0, 0.0], mode="binary", eps_fraction=0.5)
        assert img.kind == "rp"
        assert np.array_equal(img.pixels, [[1, 0, 1], [0, 1, 0], [1, 0, 1]])

    def test_constant_series_all_ones(self):
        img = enc.recurrence_plot([2.0] * 4, eps_fraction=0.3)
        assert np.array_equal(img.pixels, np.ones((4, 4)))

    def test_binary_matches_oracle_exactly(self):
        rng = np.random.default_rng(17)
        x = rng.uniform(0, 1, 9)
        expected = np.asarray(oracles.rp_binary(list(x), 0.1))
        assert np.array_equal(enc.recurrence_plot(x, eps_fraction=0.1).pixels, expected)

    def test_distance_matches_oracle(self):
        rng = np.random.default_rng(19)
        x = rng.uniform(-3, 3, 9)
        expected = np.asarray(oracles.rp_distance(list(x)))
        got = enc.recurrence_plot(x, mode="distance").pixels
        assert np.abs(got - expected).max() < 1e-12
        assert got.min() >= 0.0 and got.max() <= 1.0

    def test_distance_constant_is_zero(self):
        img = enc.recurrence_plot([1.0, 1.0, 1.0], mode="distance")
        assert np.array_equal(img.pixels, np.zeros((3, 3)))

    def test_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            img = enc.recurrence_plot(random_series(rng)).pixels
            assert np.array_equal(img, img.T)
            assert np.array_equal(np.diagonal(img), np.ones(img.shape[0]))

    def test_eps_monotonicity(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            x = random_series(rng)
            small, big = sorted(rng.uniform(0.05, 1.0, 2))
            lo = enc.recurrence_plot(x, eps_fraction=small).pixels
            hi = enc.recurrence_plot(x, eps_fraction=big).pixels
            assert np.all(hi >= lo)

    def test_shift_scale_invariance(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            x = rng.uniform(-2, 2, int(rng.integers(2, 33)))
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-5.0, 5.0)
            base = enc.recurrence_plot(x, eps_fraction=0.25).pixels
            moved = enc.recurrence_plot(a * x + b, eps_fraction=0.25).pixels
            assert np.array_equal(base, moved)

    @pytest.mark.parametrize("eps", [0.0, -0.5, 1.5])
    def test_eps_out_of_range_rejected(self, eps):
        with pytest.raises(ValueError, match="eps_fraction"):
            enc.recurrence_plot([1.0, 2.0], eps_fraction=eps)

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError, match="mode"):
            enc.recurrence_plot([1.0, 2.0], mode="fuzzy")


class TestMtf:
    def test_alternating_transitions(self):
        model = enc.mtf_fit([1.0, 2.0, 1.0, 2.0], 2)
        assert np.array_equal(model.transitions, [[0.0, 1.0], [1.0, 0.0]])
        assert model.bin_edges.shape == (1,)

    def test_increasing_series_row_shape(self):
        model = enc.mtf_fit(np.arange(1.0, 7.0), 2)
        assert np.array_equal(model.transitions, [[2 / 3, 1 / 3], [0.0, 1.0]])

    def test_constant_series_zero_row(self):
        model = enc.mtf_fit([5.0, 5.0, 5.0], 2)
        assert np.array_equal(model.transitions, [[1.0, 0.0], [0.0, 0.0]])

    def test_edge_ties_go_to_lower_bin(self):
        model = enc.mtf_fit([0.0, 1.0, 2.0, 3.0], 2)
        # median is 1.5; the sample at 1.0 < 1.5 and 2.0 > 1.5
        assert np.array_equal(model.assign([0.0, 1.5, 2.0, 1.0]), [0, 0, 1, 0])

    def test_field_layout(self):
        x = [1.0, 2.0, 1.0, 2.0]
        img = enc.mtf_image(x, enc.mtf_fit(x, 2), layout="field")
        assert img.kind == "mtf"
        expected = [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]]
        assert np.array_equal(img.pixels, expected)

    def test_matrix_layout_is_transition_passthrough(self):
        x = [1.0, 2.0, 1.0, 2.0]
        img = enc.mtf_image(x, enc.mtf_fit(x, 2), layout="matrix")
        assert np.array_equal(img.pixels, [[0.0, 1.0], [1.0, 0.0]])

    def test_constant_series_field_all_ones(self):
        img = enc.mtf_image([3.0] * 4, enc.mtf_fit([3.0] * 4, 2))
        assert np.array_equal(img.pixels, np.ones((4, 4)))

    def test_default_model_uses_ten_bins(self):
        x = np.linspace(0, 1, 30)
        img = enc.mtf_image(x, layout="matrix")
        assert img.pixels.shape == (10, 10)

    def test_small_bin_count_rejected(self):
        with pytest.raises(ValueError, match="n_bins"):
            enc.mtf_fit([1.0, 2.0], 1)

    def test_bad_layout_rejected(self):
        with pytest.raises(ValueError, match="layout"):
            enc.mtf_image([1.0, 2.0], layout="diagonal")

    def test_rows_stochastic_or_zero_and_pixels_from_transitions(self):
        rng = np.random.default_rng(37)
        for _ in range(100):
            x = random_series(rng)
            n_bins = int(rng.choice([2, 3, 4, 10]))
            model = enc.mtf_fit(x, n_bins)
            sums = model.transitions.sum(axis=1)
            assert np.all((np.abs(sums - 1.0) < 1e-9) | (sums == 0.0))
            assert model.transitions.min() >= 0.0 and model.transitions.max() <= 1.0
            field = enc.mtf_image(x, model).pixels
            assert set(field.ravel()) <= set(model.transitions.ravel())

    @pytest.mark.parametrize("n_bins", [2, 4, 10])
    def test_matches_counting_oracle_exactly(self, n_bins):
        rng = np.random.default_rng(41 + n_bins)
        for _ in range(30):
            x = random_series(rng)
            model = enc.mtf_fit(x, n_bins)
            edges, bins, _, transitions = oracles.mtf_fit(list(x), n_bins)
            assert np.abs(model.bin_edges - np.asarray(edges)).max() < 1e-12
            assert np.array_equal(model.assign(x), bins)
            assert np.array_equal(model.transitions, np.asarray(transitions))
            field = enc.mtf_image(x, model).pixels
            assert np.array_equal(field, np.asarray(oracles.mtf_field(list(x), n_bins)))


class TestResize:
    def grid(self, pixels, kind="mtf"):
        return enc.GrayImage(np.asarray(pixels, dtype=np.float64), kind,
                             enc.VALUE_RANGES[kind])

    def test_identity_is_exact(self):
        rng = np.random.default_rng(43)
        pixels = rng.uniform(0, 1, (9, 9))
        out = enc.resize_bilinear(self.grid(pixels), 9)
        assert np.array_equal(out.pixels, pixels)

    def test_constant_stays_constant(self):
        out = enc.resize_bilinear(self.grid(np.full((4, 4), 0.37)), 11)
        assert np.array_equal(out.pixels, np.full((11, 11), 0.37))

    def test_two_by_two_midpoints(self):
        out = enc.resize_bilinear(self.grid([[0.0, 1.0], [0.0, 1.0]]), 3)
        assert np.array_equal(out.pixels, [[0.0, 0.5, 1.0]] * 3)

    def test_single_pixel_source_replicates(self):
        out = enc.resize_bilinear(self.grid([[0.7]]), 5)
        assert np.array_equal(out.pixels, np.full((5, 5), 0.7))

    def test_output_within_input_range(self):
        rng = np.random.default_rng(47)
        for _ in range(30):
            pixels = rng.uniform(-1, 1, (int(rng.integers(1, 24)), int(rng.integers(1, 24))))
            size = int(rng.integers(1, 40))
            out = enc.resize_bilinear(self.grid(pixels, "gaf"), size).pixels
            assert out.shape == (size, size)
            assert out.min() >= pixels.min() and out.max() <= pixels.max()

    def test_bad_size_rejected(self):
        with pytest.raises(ValueError, match="size"):
            enc.resize_bilinear(self.grid([[1.0]]), 0)

    def test_kind_and_range_preserved(self):
        out = enc.resize_bilinear(self.grid([[0.0, 1.0], [1.0, 0.0]], "rp"), 5)
        assert out.kind == "rp" and out.value_range == enc.VALUE_RANGES["rp"]


class TestFuse:
    def images(self, rng, n=12):
        x = rng.uniform(0, 1, n)
        return (enc.gasf(x), enc.recurrence_plot(x), enc.mtf_image(x))

    def test_same_size_inputs_pass_through_bit_identical(self):
        rng = np.random.default_rng(53)
        gaf_img, rp_img, mtf_img = self.images(rng, 8)
        fused = enc.fuse(gaf_img, rp_img, mtf_img, size=8)
        assert np.array_equal(fused.channels[0], gaf_img.pixels)
        assert np.array_equal(fused.channels[1], rp_img.pixels)
        assert np.array_equal(fused.channels[2], mtf_img.pixels)
        assert fused.channel_order == ("gaf", "rp", "mtf")

    def test_mixed_sizes_resize_to_common_side(self):
        rng = np.random.default_rng(59)
        x = rng.uniform(0, 1, 187)
        fused = enc.fuse(enc.gasf(x), enc.recurrence_plot(x),
                         enc.mtf_image(x, layout="matrix"), size=227)
        assert fused.channels.shape == (3, 227, 227)

    def test_wrong_slot_rejected(self):
        rng = np.random.default_rng(61)
        gaf_img, rp_img, mtf_img = self.images(rng)
        with pytest.raises(ValueError, match="slot"):
            enc.fuse(mtf_img, rp_img, gaf_img)
        with pytest.raises(ValueError, match="slot"):
            enc.fuse(gaf_img, mtf_img, rp_img)

    def test_non_image_rejected(self):
        rng = np.random.default_rng(67)
        gaf_img, rp_img, mtf_img = self.images(rng)
        with pytest.raises(ValueError, match="GrayImage"):
            enc.fuse(gaf_img.pixels, rp_img, mtf_img)


class TestEncodeFused:
    def test_default_config(self):
        rng = np.random.default_rng(71)
        fused = enc.encode_fused(rng.uniform(0, 1, 20))
        assert fused.channels.shape == (3, 227, 227)

    def test_custom_config(self):
        rng = np.random.default_rng(73)
        cfg = enc.EncoderConfig(size=16, n_bins=4, rp_mode="distance",
                                mtf_layout="matrix")
        fused = enc.encode_fused(rng.uniform(0, 1, 20), cfg)
        assert fused.channels.shape == (3, 16, 16)

    @pytest.mark.parametrize("kwargs", [
        {"size": 0}, {"n_bins": 1}, {"rp_mode": "x"}, {"mtf_layout": "x"},
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            enc.EncoderConfig(**kwargs)


class TestTimeSeries:
    def test_label_roundtrip(self):
        ts = enc.TimeSeries([1.0, 2.0, 3.0], label=2)
        assert len(ts) == 3 and ts.label == 2
        assert np.array_equal(enc.gasf(ts).pixels, enc.gasf([1.0, 2.0, 3.0]).pixels)

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            enc.TimeSeries([1.0])
        with pytest.raises(ValueError, match="index 1"):
            enc.TimeSeries([1.0, np.nan])
