import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domino.channel_model import (
    ChannelSpec,
    DistortionDraw,
    DistortionRanges,
    MotionModel,
    PathComponent,
    bandlimited_cir,
    fractional_delay,
    frame_times,
    full_band_cir,
    noise_std_for_snr,
    respiration_trace,
    sample_pulse,
    simulate_trace,
    synth_cir,
    synth_csi,
)
from domino.frames import SubcarrierLayout

import oracles

# Direct-DFT oracle values (tests/oracles.py::pulse), frozen.
PULSE_3_327 = 0.9015531925816186
PULSE_2_24 = 0.7916326070141678
PULSE_3_24 = 0.5687555860987311

# Term-by-term oracle (tests/oracles.py::csi) for TWO_PATH below, frozen.
TWO_PATH_CSI = {
    1: 0.7907171802931695 + 1.177884967566138j,
    50: -1.345560843956126 + 0.3934349841971977j,
    117: -0.5400074546740475 - 1.1629917825931717j,
    139: -0.7049872532825883 - 1.2680716117953421j,
    255: 0.4504185874240127 + 1.2585788385857875j,
}


def single_path(layout, gain=1.0, taps=0.0, carrier_hz=5.25e9):
    return ChannelSpec((PathComponent(gain, taps * layout.ts),), carrier_hz, layout)


def two_path(layout):
    ts = layout.ts
    return ChannelSpec(
        (PathComponent(0.8 * np.exp(0.3j), 2.7 * ts), PathComponent(0.35 * np.exp(-1.1j), 9.15 * ts)),
        5.25e9, layout,
    )


def test_pulse_on_grid_is_unit(layout):
    assert abs(sample_pulse(0, 0.0, layout.ts, layout)) == pytest.approx(1.0, abs=1e-12)


def test_pulse_half_tap_is_weaker(layout):
    assert abs(sample_pulse(0, 0.5 * layout.ts, layout.ts, layout)) < 1.0


def test_pulse_matches_direct_dft_oracle(layout):
    ts = layout.ts
    assert sample_pulse(3, 3.27 * ts, ts, layout) == pytest.approx(PULSE_3_327, abs=1e-12)
    assert oracles.pulse(3, 3.27 * ts, ts, layout.active, 256) == pytest.approx(PULSE_3_327, abs=1e-12)


def test_pulse_broadcasts(layout):
    n = np.arange(4)[:, None]
    tau = np.array([0.0, 1.3, 2.9]) * layout.ts
    p = sample_pulse(n, tau[None, :], layout.ts, layout)
    assert p.shape == (4, 3)
    assert p[2, 1] == pytest.approx(sample_pulse(2, tau[1], layout.ts, layout))


@pytest.mark.parametrize("tau,expected", [(5.0, 0.0), (5.5, -0.5), (-5.5, 0.5), (2.3, 0.3), (2.7, -0.3)])
def test_fractional_delay(tau, expected):
    assert fractional_delay(tau, 1.0) == pytest.approx(expected, abs=1e-12)
    assert fractional_delay(tau * 0.5, 0.5) == pytest.approx(expected * 0.5, abs=1e-12)


@given(st.floats(-1e3, 1e3, allow_nan=False))
def test_fractional_delay_range(tau):
    d = fractional_delay(tau, 0.75)
    assert -0.375 - 1e-9 <= d <= 0.375 + 1e-9


def test_pulse_monotone_over_half_tap(layout):
    ts = layout.ts
    tau = np.linspace(0.0, 0.5, 20) * ts
    mags = np.abs([sample_pulse(0, t, ts, layout) for t in tau])
    assert np.all(np.diff(mags) <= 0)


def test_flat_channel_csi_is_one(layout):
    f = synth_csi(single_path(layout, carrier_hz=0.0))
    np.testing.assert_allclose(f.values, 1.0, atol=1e-12)


def test_scalar_distortion_csi(layout):
    f = synth_csi(single_path(layout), DistortionDraw(2.0, np.pi / 2, 0.0))
    np.testing.assert_allclose(f.values, 2 * np.exp(-1j * np.pi / 2), atol=1e-12)


def test_two_path_csi_matches_term_by_term_oracle(layout):
    draw = DistortionDraw(1.3, 2.0, 0.6 * layout.ts)
    f = synth_csi(two_path(layout), draw)
    for k, expected in TWO_PATH_CSI.items():
        assert f.values[layout.position_of(k)] == pytest.approx(expected, abs=1e-12)
    spec = two_path(layout)
    full = oracles.csi([(p.gain, p.delay) for p in spec.paths], spec.carrier_hz, 1.3, 2.0,
                       0.6 * layout.ts, layout.active, 256, layout.delta_f_hz)
    np.testing.assert_allclose(f.values, full, atol=1e-11)


def test_synth_csi_rejects_large_epsilon(layout):
    with pytest.raises(ValueError):
        synth_csi(single_path(layout), DistortionDraw(epsilon=64 * layout.ts))


def test_spec_rejects_delay_outside_window(layout):
    with pytest.raises(ValueError):
        single_path(layout, taps=256.0)
    with pytest.raises(ValueError):
        ChannelSpec((), 5e9, layout)


def test_draw_validation():
    with pytest.raises(ValueError):
        DistortionDraw(beta=0.0)
    with pytest.raises(ValueError):
        DistortionDraw(theta=2 * np.pi)


def test_motion_validation():
    for kw in (dict(rate_hz=0.0), dict(rate_hz=1.0), dict(delay_amplitude_s=-1.0), dict(gain_amplitude=1.0)):
        base = dict(target_path_index=1, delay_amplitude_s=0.0, gain_amplitude=0.1, rate_hz=0.25)
        with pytest.raises(ValueError):
            MotionModel(**{**base, **kw})


def test_dominant_index_ties_go_to_earliest(layout):
    ts = layout.ts
    spec = ChannelSpec((PathComponent(1j, 5 * ts), PathComponent(-1, 2 * ts)), 0.0, layout)
    assert spec.dominant_index == 1


def test_on_grid_cir_concentrates_at_tap(layout):
    cir = synth_cir(single_path(layout, gain=0.7 - 0.2j, taps=2.0, carrier_hz=0.0))
    mags = np.abs(cir.taps)
    assert np.argmax(mags) == 2
    assert mags[2] == pytest.approx(abs(0.7 - 0.2j), abs=1e-12)


def test_off_grid_cir_matches_oracle(layout):
    cir = synth_cir(single_path(layout, taps=2.4, carrier_hz=0.0))
    assert cir.taps[2] == pytest.approx(PULSE_2_24, abs=1e-12)
    assert cir.taps[3] == pytest.approx(PULSE_3_24, abs=1e-12)
    assert abs(cir.taps[2]) < 1.0


def test_distortion_scales_every_tap(layout, channel):
    base = synth_cir(channel).taps
    draw = DistortionDraw(1.7, 4.0, 0.0)
    np.testing.assert_allclose(synth_cir(channel, draw).taps, draw.factor * base, rtol=1e-12, atol=1e-15)


def test_cir_consistent_with_csi(channel):
    for draw in (DistortionDraw(), DistortionDraw(0.6, 1.0, 1.3 * channel.layout.ts)):
        a = synth_cir(channel, draw).taps
        b = bandlimited_cir(synth_csi(channel, draw)).taps
        assert np.linalg.norm(a - b) <= 1e-9 * np.linalg.norm(a)


@settings(max_examples=40, deadline=None)
@given(
    b1=st.floats(0.1, 5), b2=st.floats(0.1, 5),
    t1=st.floats(0, 6.28), t2=st.floats(0, 6.28),
    eps=st.floats(-3, 3),
)
def test_uniform_distortion_ratio(channel, b1, b2, t1, t2, eps):
    e = eps * channel.layout.ts
    h1 = synth_cir(channel, DistortionDraw(b1, t1, e)).taps
    h2 = synth_cir(channel, DistortionDraw(b2, t2, e)).taps
    keep = np.abs(h2) > 1e-12
    ratio = h1[keep] / h2[keep]
    np.testing.assert_allclose(ratio, (b1 / b2) * np.exp(-1j * (t1 - t2)), rtol=1e-9)


def test_full_band_cir_is_sparse_on_grid(layout):
    ts = layout.ts
    spec = ChannelSpec((PathComponent(1.0, 3 * ts), PathComponent(0.5j, 10 * ts)), 0.0, layout)
    h = full_band_cir(spec)
    expected = np.zeros(256, complex)
    expected[3], expected[10] = 1.0, 0.5j
    np.testing.assert_allclose(h / np.sqrt(256), expected, atol=1e-12)


def test_noise_std_for_snr(channel, rng):
    std = noise_std_for_snr(channel, 10.0)
    sig = np.mean(np.abs(synth_csi(channel).values) ** 2)
    assert sig / (2 * std ** 2) == pytest.approx(10.0)
    f = synth_csi(channel, noise_std=std, rng=rng)
    assert np.any(f.values != synth_csi(channel).values)


def test_static_trace_only_distortions_vary(channel):
    motion = MotionModel(1, 0.0, 0.0, 0.25)
    samples = respiration_trace(channel, motion, frame_times(2.0, 10.0), rng_seed=4)
    for s in samples:
        assert s.spec == channel
        np.testing.assert_allclose(s.frame.values, synth_csi(channel, s.draw).values, atol=1e-12)


def test_breathing_delay_follows_sinusoid(channel):
    motion = MotionModel(1, 2.5e-11, 0.2, 0.25, phase_rad=0.3)
    t = frame_times(60.0, 50.0)
    samples = respiration_trace(channel, motion, t, DistortionRanges.none(), rng_seed=1)
    d = np.array([s.spec.paths[1].delay for s in samples])
    g = np.array([s.spec.paths[1].gain for s in samples])
    expected = np.sin(2 * np.pi * 0.25 * t + 0.3)
    np.testing.assert_allclose(d, channel.paths[1].delay + 2.5e-11 * expected, rtol=0, atol=1e-20)
    np.testing.assert_allclose(g, channel.paths[1].gain * (1 + 0.2 * expected), atol=1e-12)
    for s in samples[::500]:
        np.testing.assert_allclose(s.frame.values, synth_csi(s.spec).values, atol=1e-9)


def test_motion_on_dominant_path_rejected(channel):
    with pytest.raises(ValueError):
        respiration_trace(channel, MotionModel(0, 1e-11, 0.1, 0.25), frame_times(1.0, 10.0))


def test_frame_times_must_increase(channel):
    with pytest.raises(ValueError):
        simulate_trace(channel, None, [0.0, 0.0, 1.0])


def test_trace_determinism_and_substreams(channel):
    t = frame_times(2.0, 20.0)
    a = simulate_trace(channel, None, t, seed=9, noise_std=1e-3, n_antennas=2)
    b = simulate_trace(channel, None, t, seed=9, noise_std=1e-3, n_antennas=2)
    assert a.csi.tobytes() == b.csi.tobytes()
    # a frame subset regenerates identically from its own substreams
    c = simulate_trace(channel, None, t[:10], seed=9, noise_std=1e-3, n_antennas=2)
    assert c.csi.tobytes() == a.csi[:, :10].tobytes()
    d = simulate_trace(channel, None, t, seed=10, noise_std=1e-3, n_antennas=2)
    assert not np.array_equal(a.csi, d.csi)


def test_trace_frames_match_single_frame_synthesis(channel):
    tr = simulate_trace(channel, None, frame_times(1.0, 10.0), seed=2, n_antennas=1)
    for i in (0, 7):
        beta, theta, eps = tr.draws[0, i]
        np.testing.assert_allclose(tr.csi[0, i], synth_csi(channel, DistortionDraw(beta, theta, eps)).values,
                                   atol=1e-12)


def test_shared_epsilon_mode(channel):
    tr = simulate_trace(channel, None, frame_times(1.0, 10.0), seed=3, n_antennas=3, epsilon_mode="shared")
    assert np.all(tr.draws[:, :, 2] == tr.draws[0, :, 2])
    ind = simulate_trace(channel, None, frame_times(1.0, 10.0), seed=3, n_antennas=3)
    assert not np.all(ind.draws[:, :, 2] == ind.draws[0, :, 2])


def test_draws_respect_ranges(channel):
    ranges = DistortionRanges((0.8, 1.2), (0.0, 1.0), (-0.5, 0.5))
    tr = simulate_trace(channel, None, frame_times(5.0, 20.0), ranges, seed=5)
    beta, theta, eps = tr.draws[0].T
    assert beta.min() >= 0.8 and beta.max() <= 1.2
    assert theta.min() >= 0 and theta.max() <= 1.0
    assert np.abs(eps).max() <= 0.5 * channel.layout.ts


def test_custom_layout_works():
    lay = SubcarrierLayout.symmetric(64, 26, 312.5e3)
    spec = ChannelSpec((PathComponent(1.0, 1.5 * lay.ts),), 2.4e9, lay)
    f = synth_csi(spec, DistortionDraw(1.0, 0.0, 0.0))
    assert f.values.shape == (52,)
