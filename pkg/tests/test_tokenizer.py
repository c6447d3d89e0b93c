"""Forward tokenization and exact inversion."""

import numpy as np
import pytest

from wavets.codebook import fit_codebook
from wavets.dwt import CoefficientPyramid, coefficient_layout, decompose, reconstruct
from wavets.families import get_family
from wavets.tokenizer import (
    ScaleStats,
    TokenizerConfig,
    TokenStream,
    compute_scale,
    detokenize,
    fill_missing,
    pad_to_length,
    stream_from_record,
    stream_to_record,
    tokenize,
    tokenize_pair,
)

BIOR22_SYNTHESIS_GAIN = 2.1214  # max abs row sum of the synthesis map, level 1


def fitted_codebook(x, config, budget=1024, bounds=(-30.0, 30.0)):
    """Codebook fitted to the window's own scaled coefficients, so the
    signal is guaranteed in-range."""
    family = get_family(config.family)
    scale = compute_scale(x)
    z = (fill_missing(np.asarray(x, dtype=np.float64)) - scale.mu) / scale.sigma
    p = decompose(z, family, config.level, config.boundary_mode)
    return fit_codebook(np.concatenate([p.approx, *p.details]), budget, bounds)


class TestScale:
    def test_basic(self):
        s = compute_scale(np.array([2.0, 4.0, 6.0]))
        assert s.mu == 4.0 and s.sigma == 2.0
        np.testing.assert_allclose((np.array([2.0, 4.0, 6.0]) - s.mu) / s.sigma, [-1, 0, 1])

    def test_constant_series(self):
        s = compute_scale(np.array([5.0, 5.0, 5.0]))
        assert s.mu == 5.0 and s.sigma == 1.0

    def test_missing_excluded(self):
        s = compute_scale(np.array([2.0, np.nan, 6.0]))
        assert s.mu == 4.0

    def test_all_missing(self):
        with pytest.raises(ValueError):
            compute_scale(np.array([np.nan, np.nan]))


class TestFillMissing:
    def test_interior_interpolation(self):
        out = fill_missing(np.array([1.0, np.nan, 3.0]))
        np.testing.assert_allclose(out, [1.0, 2.0, 3.0])

    def test_ends_held(self):
        out = fill_missing(np.array([np.nan, 2.0, np.nan]))
        np.testing.assert_allclose(out, [2.0, 2.0, 2.0])


class TestForward:
    def test_constant_window_all_zero_center(self):
        config = TokenizerConfig(family="haar", level=1)
        x = np.full(64, 7.0)
        cb = fit_codebook(np.linspace(-1, 1, 101), 256, (-30.0, 30.0))
        stream = tokenize(x, config, cb)
        zero_token = cb.value_offset + int(np.where(cb.centers == 0.0)[0][0])
        assert np.all(stream.tokens == zero_token)

    def test_bior_512_layout(self):
        config = TokenizerConfig(family="bior2.2", level=1)
        x = np.random.default_rng(0).standard_normal(512)
        stream = tokenize(x, config, fitted_codebook(x, config))
        assert stream.segment_lengths == (258, 258)
        assert len(stream.tokens) == 516

    def test_segment_order_matches_layout(self):
        config = TokenizerConfig(family="db2", level=3)
        x = np.random.default_rng(1).standard_normal(400)
        stream = tokenize(x, config, fitted_codebook(x, config))
        layout = coefficient_layout(400, get_family("db2"), 3)
        assert list(stream.segment_lengths) == layout


class TestRoundTrip:
    def test_haar_rmse_bound(self):
        config = TokenizerConfig(family="haar", level=1)
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = rng.standard_normal(512) * rng.uniform(0.5, 20) + rng.uniform(-50, 50)
            cb = fitted_codebook(x, config)
            stream = tokenize(x, config, cb)
            recon = detokenize(stream, cb)
            rmse = np.sqrt(np.mean((recon - x) ** 2))
            assert rmse <= (cb.bin_width / 2) * stream.scale.sigma + 1e-12

    def test_bior_rmse_bound_with_gain(self):
        config = TokenizerConfig(family="bior2.2", level=1)
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = rng.standard_normal(512) * 5.0
            cb = fitted_codebook(x, config)
            stream = tokenize(x, config, cb)
            recon = detokenize(stream, cb)
            rmse = np.sqrt(np.mean((recon - x) ** 2))
            assert rmse <= BIOR22_SYNTHESIS_GAIN * (cb.bin_width / 2) * stream.scale.sigma

    def test_lattice_signals_reconstruct_exactly(self):
        # horizon whose scaled coefficients sit exactly on bin centers
        config = TokenizerConfig(family="haar", level=1)
        rng = np.random.default_rng(5)
        context = rng.standard_normal(64) * 2.0 + 1.0
        scale = compute_scale(context)
        cb = fit_codebook(np.linspace(-3, 3, 601), 1024, (-30.0, 30.0))
        family = get_family("haar")
        layout = coefficient_layout(32, family, 1)
        coeffs = rng.choice(cb.centers, size=sum(layout))
        parts = np.split(coeffs, np.cumsum(layout)[:-1])
        pyramid = CoefficientPyramid(parts[0], tuple(parts[1:]), 1, 32, "haar", "symmetric")
        horizon = reconstruct(pyramid, family) * scale.sigma + scale.mu
        _, hor_stream = tokenize_pair(context, horizon, config, cb)
        recon = detokenize(hor_stream, cb)
        assert np.max(np.abs(recon - horizon)) <= 1e-9


class TestInvariances:
    def test_shift_and_scale(self):
        config = TokenizerConfig(family="bior2.2", level=1)
        rng = np.random.default_rng(6)
        x = rng.standard_normal(256)
        cb = fitted_codebook(x, config)
        base = tokenize(x, config, cb).tokens
        assert np.array_equal(base, tokenize(x + 1234.5, config, cb).tokens)
        assert np.array_equal(base, tokenize(x * 99.25, config, cb).tokens)


class TestPairs:
    def test_horizon_layout_and_eos(self):
        config = TokenizerConfig(family="bior2.2", level=1)
        rng = np.random.default_rng(7)
        x = rng.standard_normal(576)
        cb = fitted_codebook(x[:512], config)
        ctx, hor = tokenize_pair(x[:512], x[512:], config, cb)
        assert hor.segment_lengths == (34, 34)
        assert len(hor.tokens) == 69 and hor.has_eos
        assert hor.tokens[-1] == cb.eos_id
        assert not ctx.has_eos
        assert hor.scale == ctx.scale

    def test_constant_pair_zero_center(self):
        config = TokenizerConfig(family="haar", level=1)
        cb = fit_codebook(np.linspace(-1, 1, 101), 256, (-30.0, 30.0))
        ctx, hor = tokenize_pair(np.full(32, 3.0), np.full(16, 3.0), config, cb)
        zero_token = cb.value_offset + int(np.where(cb.centers == 0.0)[0][0])
        assert np.all(hor.coefficient_tokens == zero_token)

    def test_horizon_in_range_monte_carlo(self):
        # horizon drawn from the context's distribution stays inside a
        # codebook fitted on pooled context coefficients
        config = TokenizerConfig(family="haar", level=1)
        rng = np.random.default_rng(8)
        family = get_family("haar")
        contexts = [rng.standard_normal(128) for _ in range(100)]
        pool = []
        for c in contexts:
            s = compute_scale(c)
            p = decompose((c - s.mu) / s.sigma, family, 1)
            pool += [p.approx, *p.details]
        cb = fit_codebook(np.concatenate(pool), 1024, (-30.0, 30.0))
        lo, hi = cb.edges[0], cb.edges[-1]
        clamped = 0
        total = 0
        for c in contexts:
            s = compute_scale(c)
            h = rng.standard_normal(32)
            p = decompose((h - s.mu) / s.sigma, family, 1)
            coeffs = np.concatenate([p.approx, *p.details])
            clamped += int(np.sum((coeffs < lo) | (coeffs >= hi)))
            total += coeffs.size
        assert 1 - clamped / total >= 0.99


class TestMissing:
    def test_fully_missing_region_emits_pad(self):
        config = TokenizerConfig(family="haar", level=1)
        rng = np.random.default_rng(9)
        x = rng.standard_normal(128)
        cb = fitted_codebook(np.nan_to_num(x), config)
        x[:40] = np.nan
        stream = tokenize(x, config, cb)
        # level-1 coefficients 0..19 of both bands cover only missing samples
        n_pad = int(np.sum(stream.tokens == cb.pad_id))
        assert n_pad == 40

    def test_all_pad_stream_inverts_to_mean(self):
        config = TokenizerConfig(family="haar", level=1)
        cb = fit_codebook(np.linspace(-1, 1, 101), 256, (-30.0, 30.0))
        layout = coefficient_layout(32, get_family("haar"), 1)
        stream = TokenStream(
            tokens=np.full(sum(layout), cb.pad_id, dtype=np.int64),
            segment_lengths=tuple(layout),
            scale=ScaleStats(mu=5.5, sigma=2.0),
            family_name="haar",
            level=1,
            source_length=32,
        )
        recon = detokenize(stream, cb)
        np.testing.assert_allclose(recon, 5.5, atol=1e-12)


class TestErrors:
    def test_eos_inside_segment(self):
        config = TokenizerConfig(family="haar", level=1)
        cb = fit_codebook(np.linspace(-1, 1, 101), 256, (-30.0, 30.0))
        x = np.random.default_rng(10).standard_normal(32)
        stream = tokenize(x, config, cb)
        corrupted = TokenStream(
            tokens=np.where(np.arange(len(stream.tokens)) == 3, cb.eos_id, stream.tokens),
            segment_lengths=stream.segment_lengths,
            scale=stream.scale,
            family_name=stream.family_name,
            level=stream.level,
            source_length=stream.source_length,
        )
        with pytest.raises(ValueError, match="EOS"):
            detokenize(corrupted, cb)

    def test_inconsistent_segments(self):
        cb = fit_codebook(np.linspace(-1, 1, 101), 256, (-30.0, 30.0))
        stream = TokenStream(
            tokens=np.full(10, cb.value_offset, dtype=np.int64),
            segment_lengths=(5, 5),
            scale=ScaleStats(0.0, 1.0),
            family_name="haar",
            level=1,
            source_length=32,
        )
        with pytest.raises(ValueError, match="inconsistent"):
            detokenize(stream, cb)

    def test_token_count_must_match_segments(self):
        with pytest.raises(ValueError, match="token count"):
            TokenStream(
                tokens=np.zeros(9, dtype=np.int64),
                segment_lengths=(5, 5),
                scale=ScaleStats(0.0, 1.0),
                family_name="haar",
                level=1,
                source_length=16,
            )


class TestRecords:
    def test_round_trip(self):
        config = TokenizerConfig(family="db2", level=2)
        x = np.random.default_rng(11).standard_normal(200)
        cb = fitted_codebook(x, config)
        ctx, hor = tokenize_pair(x[:150], x[150:], config, cb)
        for stream in (ctx, hor):
            back = stream_from_record(stream_to_record(stream))
            assert np.array_equal(back.tokens, stream.tokens)
            assert back.segment_lengths == stream.segment_lengths
            assert back.scale == stream.scale
            assert back.has_eos == stream.has_eos
            assert back.source_length == stream.source_length


def test_pad_to_length():
    out = pad_to_length(np.array([1.0, 2.0]), 4)
    assert np.isnan(out[0]) and np.isnan(out[1])
    np.testing.assert_allclose(out[2:], [1.0, 2.0])
    out2 = pad_to_length(np.arange(6.0), 4)
    np.testing.assert_allclose(out2, [2.0, 3.0, 4.0, 5.0])
