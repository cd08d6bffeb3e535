import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino.baselines import csi_ratio, default_reference, double_ratio, raw_magnitude
from domino.channel_model import (
    ChannelSpec,
    DistortionDraw,
    DistortionRanges,
    PathComponent,
    antenna_specs,
    synth_csi,
)
from domino.errors import LayoutMismatch, LengthMismatch, RefNotActive
from domino.frames import CsiFrame, SubcarrierLayout


def frames_of(channel, draws):
    return [synth_csi(channel, d, timestamp=i * 0.02) for i, d in enumerate(draws)]


def random_draws(layout, n, seed):
    rng = np.random.default_rng(seed)
    return [DistortionRanges().sample(rng, layout.ts) for _ in range(n)]


def test_self_ratio_is_one(channel, layout):
    fr = frames_of(channel, random_draws(layout, 5, 0))
    out = csi_ratio(fr, fr)
    assert out.scheme == "csi_ratio"
    np.testing.assert_allclose(out.values, 1.0, atol=1e-12)
    assert out.valid.all()


def test_shared_distortion_cancels(channel, layout):
    rng = np.random.default_rng(1)
    ts = layout.ts
    other = ChannelSpec(tuple(PathComponent(p.gain * np.exp(1j * rng.uniform(0, 6)), p.delay)
                              for p in channel.paths), channel.carrier_hz, layout)
    draws = random_draws(layout, 20, 2)
    out = csi_ratio(frames_of(channel, draws), frames_of(other, draws))
    np.testing.assert_allclose(out.values, out.values[:1].repeat(20, 0), rtol=1e-9)
    assert ts > 0


def test_independent_draws_break_ratio(channel, layout):
    other = antenna_specs(channel, 2, seed=0)[1]
    draws_a = random_draws(layout, 200, 3)
    draws_b = random_draws(layout, 200, 4)

    def variance(da, db):
        v = csi_ratio(frames_of(channel, da), frames_of(other, db)).values
        return np.var(v, axis=0).mean()

    shared = variance(draws_a, draws_a)
    indep = variance(draws_a, draws_b)
    assert indep >= 10 * max(shared, 1e-30)


def test_csi_ratio_guards(channel, layout):
    fr = frames_of(channel, random_draws(layout, 3, 0))
    with pytest.raises(LengthMismatch):
        csi_ratio(fr, fr[:2])
    other = SubcarrierLayout.full(256, 625e3)
    with pytest.raises(LayoutMismatch):
        csi_ratio(fr[:1], [CsiFrame(np.ones(256), other)])
    shifted = [CsiFrame(f.values, layout, f.timestamp + 1.0) for f in fr]
    with pytest.raises(LengthMismatch):
        csi_ratio(fr, shifted)


def test_zero_denominator_is_masked(layout):
    a = CsiFrame(np.ones(layout.n_active), layout)
    bv = np.ones(layout.n_active, dtype=complex)
    bv[[3, 10]] = 0.0
    out = csi_ratio([a], [CsiFrame(bv, layout)])
    assert not out.valid[0, 3] and not out.valid[0, 10]
    assert out.values[0, 3] == 0
    assert np.all(np.isfinite(out.values))
    assert out.valid.sum() == layout.n_active - 2


def test_double_ratio_flat_channel(layout):
    fr = [CsiFrame(np.full(layout.n_active, 2 - 1j), layout)]
    out = double_ratio(fr, ref_subcarrier=5)
    col = layout.position_of(5)
    assert not out.valid[0, col] and out.values[0, col] == 0
    np.testing.assert_allclose(np.delete(out.values[0], col), 1.0, atol=1e-12)


def test_double_ratio_cancels_scalar(channel):
    f = synth_csi(channel)
    g = synth_csi(channel, DistortionDraw(1.7, 2.2, 0.0))
    np.testing.assert_allclose(double_ratio([g], 40).values, double_ratio([f], 40).values, atol=1e-12)


def test_double_ratio_residual_ramp_closed_form(channel, layout):
    eps = 0.8 * layout.ts
    ref = 17
    clean = double_ratio([synth_csi(channel)], ref)
    dist = double_ratio([synth_csi(channel, DistortionDraw(1.2, 0.5, eps))], ref)
    f = layout.freqs_hz
    f_ref = f[layout.position_of(ref)]
    ramp = np.exp(-2j * np.pi * (f - f_ref) * eps)
    ok = clean.valid[0]
    np.testing.assert_allclose(dist.values[0, ok], clean.values[0, ok] * ramp[ok], atol=1e-10)


def test_double_ratio_ref_must_be_active(channel):
    with pytest.raises(RefNotActive):
        double_ratio([synth_csi(channel)], ref_subcarrier=0)


def test_default_reference_is_strongest(layout):
    v = np.ones((3, layout.n_active))
    v[:, 42] = 5.0
    assert default_reference(v) == 42
    fr = [CsiFrame(row, layout) for row in v]
    out = double_ratio(fr)
    assert not out.valid[:, 42].any()


def test_raw_magnitude(channel, layout):
    fr = frames_of(channel, [DistortionDraw()] * 4)
    out = raw_magnitude(fr)
    assert out.scheme == "raw"
    np.testing.assert_allclose(out.values, out.values[:1].repeat(4, 0), atol=1e-14)
    np.testing.assert_allclose(out.values[0], np.abs(fr[0].values))


def test_raw_magnitude_tracks_beta(channel, layout):
    betas = np.linspace(0.5, 2.0, 8)
    out = raw_magnitude(frames_of(channel, [DistortionDraw(b, 1.0, 0.0) for b in betas]))
    np.testing.assert_allclose(out.values / out.values[:1], np.broadcast_to((betas / betas[0])[:, None], out.values.shape), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(mag=st.floats(1e-3, 1e3), phase=st.floats(0, 6.283), seed=st.integers(0, 1000))
def test_scalar_cancellation(channel, layout, mag, phase, seed):
    c = mag * np.exp(1j * phase)
    u = np.exp(1j * phase)
    fr = frames_of(channel, random_draws(layout, 3, seed))
    b = frames_of(channel, random_draws(layout, 3, seed + 1))
    scaled = [f * c for f in fr]
    scaled_b = [f * c for f in b]
    np.testing.assert_allclose(csi_ratio(scaled, scaled_b).values, csi_ratio(fr, b).values, rtol=1e-12)
    np.testing.assert_allclose(double_ratio(scaled, 9).values, double_ratio(fr, 9).values, rtol=1e-12, atol=1e-15)
    # magnitude is blind to phase, but keeps any gain
    np.testing.assert_allclose(raw_magnitude([f * u for f in fr]).values, raw_magnitude(fr).values, rtol=1e-12)


def test_nonfinite_inputs_never_escape(layout):
    v = np.ones(layout.n_active, dtype=complex)
    v[4] = np.nan
    f = CsiFrame.__new__(CsiFrame)
    object.__setattr__(f, "values", v)
    object.__setattr__(f, "layout", layout)
    object.__setattr__(f, "timestamp", 0.0)
    g = CsiFrame(np.ones(layout.n_active), layout)
    out = csi_ratio([f], [g])
    assert np.all(np.isfinite(out.values)) and not out.valid[0, 4]
