import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpolar.construction import CodeSpec
from pcpolar.decoders import DampingConfig
from pcpolar.sim import DecoderConfig, SimConfig, run_cell, sweep, wilson_interval


def small_config(**kw):
    defaults = dict(
        spec=CodeSpec(N=16, K=8, scheme="fc", L=3),
        decoder=DecoderConfig(kind="csr-scan", t_max=2),
        snr_points=(2.0,),
        max_frames=400,
        min_frame_errors=10**9,
        master_seed=77,
        batch_frames=100,
    )
    defaults.update(kw)
    return SimConfig(**defaults)


def test_wilson_interval_edges():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0
    lo, hi = wilson_interval(100, 100)
    assert hi == 1.0


def test_wilson_interval_midpoint():
    lo, hi = wilson_interval(50, 100)
    assert (lo + hi) / 2 == pytest.approx(0.5, abs=1e-9)
    assert hi - lo == pytest.approx(0.1923, abs=5e-4)  # closed-form at z=1.96


def test_wilson_interval_validation():
    with pytest.raises(ValueError):
        wilson_interval(5, 0)
    with pytest.raises(ValueError):
        wilson_interval(6, 5)


@settings(max_examples=200, deadline=None)
@given(
    trials=st.integers(min_value=1, max_value=10**6),
    frac=st.floats(min_value=0, max_value=1),
)
def test_wilson_interval_contains_estimate(trials, frac):
    errors = min(trials, int(round(frac * trials)))
    lo, hi = wilson_interval(errors, trials)
    p = errors / trials
    assert 0.0 <= lo <= p <= hi <= 1.0


def test_sim_config_validation():
    with pytest.raises(ValueError):
        small_config(snr_points=())
    with pytest.raises(ValueError):
        small_config(max_frames=0)
    with pytest.raises(ValueError):
        small_config(workers=0)
    with pytest.raises(ValueError):
        DecoderConfig(kind="magic")


def test_noiseless_cell_has_zero_errors():
    cfg = small_config(noiseless=True)
    cells = run_cell(cfg, 2.0)
    for c in cells:
        assert c.frame_errors == 0
        assert c.bit_errors == 0
        assert c.fer == 0.0
        assert c.ber == 0.0


def test_cell_counts_and_shapes():
    cfg = small_config()
    cells = run_cell(cfg, 2.0)
    assert [c.iteration for c in cells] == [1, 2]
    for c in cells:
        assert c.frames == 400
        assert c.info_bits_total == 400 * 8
        assert 0 <= c.frame_errors <= c.frames
        assert c.frame_errors <= c.bit_errors <= c.info_bits_total
        lo, hi = c.fer_ci_95
        assert lo <= c.fer <= hi


def test_sc_high_snr_sanity():
    cfg = small_config(
        spec=CodeSpec(N=64, K=32),
        decoder=DecoderConfig(kind="sc"),
        snr_points=(10.0,),
        max_frames=1000,
        batch_frames=500,
    )
    cells = run_cell(cfg, 10.0)
    assert len(cells) == 1
    assert cells[0].fer == 0.0


def test_same_config_reproduces_exactly():
    cfg = small_config()
    a = run_cell(cfg, 2.0)
    b = run_cell(cfg, 2.0)
    assert [(c.frames, c.frame_errors, c.bit_errors) for c in a] == [
        (c.frames, c.frame_errors, c.bit_errors) for c in b
    ]


def test_results_independent_of_workers():
    base = small_config(max_frames=600, batch_frames=150)
    counts = {}
    for w in (1, 2, 3):
        cfg = small_config(max_frames=600, batch_frames=150, workers=w)
        cells = run_cell(cfg, 2.0)
        counts[w] = [(c.frames, c.frame_errors, c.bit_errors) for c in cells]
    assert counts[1] == counts[2] == counts[3]


def test_results_independent_of_chunking_given_no_early_stop():
    a = run_cell(small_config(batch_frames=100), 2.0)
    b = run_cell(small_config(batch_frames=37), 2.0)
    assert [(c.frames, c.frame_errors) for c in a] == [(c.frames, c.frame_errors) for c in b]


def test_early_stop_at_chunk_boundary():
    cfg = small_config(
        snr_points=(-2.0,),
        max_frames=100_000,
        min_frame_errors=20,
        batch_frames=50,
    )
    cells = run_cell(cfg, -2.0)
    assert cells[-1].frame_errors >= 20
    assert cells[-1].frames < 100_000
    assert cells[-1].frames % 50 == 0


def test_master_seed_changes_noise():
    a = run_cell(small_config(master_seed=1, max_frames=300), 2.0)
    b = run_cell(small_config(master_seed=2, max_frames=300), 2.0)
    assert (a[-1].frame_errors, a[-1].bit_errors) != (b[-1].frame_errors, b[-1].bit_errors)


def test_sweep_equals_concatenated_cells():
    cfg = small_config(snr_points=(1.0, 3.0))
    result = sweep(cfg)
    by_hand = run_cell(cfg, 1.0) + run_cell(cfg, 3.0)
    assert [(c.snr_db, c.iteration, c.frames, c.frame_errors) for c in result.cells] == [
        (c.snr_db, c.iteration, c.frames, c.frame_errors) for c in by_hand
    ]
    one = sweep(small_config(snr_points=(1.0,)))
    assert [(c.frame_errors, c.bit_errors) for c in one.cells] == [
        (c.frame_errors, c.bit_errors) for c in run_cell(small_config(snr_points=(1.0,)), 1.0)
    ]


def test_fer_decreases_with_snr_within_noise():
    cfg = small_config(
        spec=CodeSpec(N=64, K=32),
        decoder=DecoderConfig(kind="sc"),
        snr_points=(0.0, 2.0, 4.0),
        max_frames=2000,
        batch_frames=1000,
    )
    result = sweep(cfg)
    fers = [c.fer for c in result.cells]
    # generous CI slack: each step down the sweep must not rise materially
    assert fers[0] > fers[2]
    assert all(fers[i + 1] <= fers[i] + 0.02 for i in range(2))


def test_iteration_gain_soft_trend():
    # soft check with CI slack: more iterations should not hurt on average
    cfg = SimConfig(
        spec=CodeSpec(N=128, K=64, scheme="fc", A=1.0),
        decoder=DecoderConfig(kind="csr-scan", t_max=4),
        snr_points=(3.0,),
        max_frames=6000,
        min_frame_errors=10**9,
        master_seed=31,
        batch_frames=2000,
    )
    cells = run_cell(cfg, 3.0)
    slack = cells[0].fer_ci_95[1] - cells[0].fer_ci_95[0]
    assert cells[-1].fer <= cells[0].fer + slack


def test_scan_family_reports_per_iteration_cells():
    cfg = small_config(
        decoder=DecoderConfig(kind="pc-scan", t_max=3, damping=DampingConfig()),
        max_frames=200,
    )
    cells = run_cell(cfg, 2.0)
    assert [c.iteration for c in cells] == [1, 2, 3]
    # final iteration usually differs from the first on a noisy channel
    assert cells[0].frames == cells[2].frames
