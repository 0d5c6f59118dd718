"""Tests for the Monte Carlo harness: generators, batches, empirical CDFs."""

import math

import numpy as np
import pytest

from eigendetect.errors import DomainError
from eigendetect.rng import SeededStream
from eigendetect.simulate import (
    EmpiricalCdf,
    NOISE_TAG,
    dump_batch_csv,
    dump_cdf_comparison_csv,
    gen_channel,
    gen_noise,
    gen_signal,
    ks_distance,
    run_trials,
    scenario_from_component_snrs,
    scenario_from_snr,
    trial_seed,
)
from eigendetect.spiked import DetectorDesign, Scenario, snr, spike_spectrum


# --- pinned RNG --------------------------------------------------------------

def test_stream_is_reproducible_and_chunk_invariant():
    a = SeededStream(987654321).standard_normal(4096)
    b = SeededStream(987654321).standard_normal(4096)
    assert np.array_equal(a, b)
    s = SeededStream(5)
    split = np.concatenate([s.uniform_open(7), s.uniform_open(93)])
    whole = SeededStream(5).uniform_open(100)
    assert np.array_equal(split, whole)


def test_stream_words_match_reference_splitmix():
    # reference scalar SplitMix64 with pinned constants
    def ref_words(seed, n):
        mask = (1 << 64) - 1
        out = []
        state = seed
        for _ in range(n):
            state = (state + 0x9E3779B97F4A7C15) & mask
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
            out.append(z ^ (z >> 31))
        return out

    got = SeededStream(42)._words(5)
    assert [int(w) for w in got] == ref_words(42, 5)


def test_uniforms_open_interval_and_moments():
    u = SeededStream(3).uniform_open(10 ** 6)
    assert u.min() > 0.0 and u.max() <= 1.0
    assert abs(u.mean() - 0.5) < 2e-3
    assert abs(u.var() - 1.0 / 12.0) < 2e-3


def test_gaussian_moments():
    z = SeededStream(17).standard_normal(10 ** 6)
    assert abs(z.mean()) < 5e-3
    assert abs(z.var() - 1.0) < 5e-3
    assert abs(np.mean(z ** 3)) < 1e-2
    assert abs(np.mean(z ** 4) - 3.0) < 3e-2


# --- noise -------------------------------------------------------------------

def test_noise_power_and_determinism():
    V = gen_noise(100, 10000, 2.0, 77)  # 1e6 entries
    assert abs(np.mean(np.abs(V) ** 2) - 2.0) < 0.02 * 2.0
    assert np.array_equal(V, gen_noise(100, 10000, 2.0, 77))


def test_noise_circular_symmetry():
    V = gen_noise(100, 10000, 1.0, 78).ravel()
    re, im = V.real, V.imag
    corr = np.corrcoef(re, im)[0, 1]
    assert abs(corr) <= 0.01
    assert abs(re.var() - im.var()) < 0.01


def test_noise_rejects_bad_variance():
    with pytest.raises(DomainError):
        gen_noise(4, 8, 0.0, 1)


# --- signals -----------------------------------------------------------------

@pytest.mark.parametrize(
    "mod", ["gaussian", "qpsk", "qpsk_srrc", "psk_noncoherent", "uniform_complex"]
)
def test_signal_variance_normalization(mod):
    S = gen_signal(1, 10 ** 6, mod, [1.7], 55)
    assert abs(np.mean(np.abs(S) ** 2) - 1.7) < 0.01 * 1.7
    assert abs(np.mean(S)) < 5e-3


def test_signal_rows_independent_and_scaled():
    S = gen_signal(3, 200000, "qpsk", [1.0, 2.0, 0.5], 91)
    var = np.mean(np.abs(S) ** 2, axis=1)
    assert np.allclose(var, [1.0, 2.0, 0.5], rtol=0.02)
    c01 = np.corrcoef(S[0].real, S[1].real)[0, 1]
    assert abs(c01) < 0.01


def test_qpsk_fourth_moment_constant_modulus():
    S = gen_signal(1, 100000, "qpsk", [2.0], 12)
    assert np.allclose(np.abs(S) ** 2, 2.0, rtol=1e-12)
    G = gen_signal(1, 10 ** 6, "gaussian", [1.0], 12)
    assert abs(np.mean(np.abs(G) ** 4) - 2.0) < 0.02


def test_uniform_complex_fourth_moment():
    # Re s uniform on [-a, a] with a = sigma * sqrt(3/2): E (Re s)^4 = a^4 / 5
    sigma2 = 1.3
    S = gen_signal(1, 4 * 10 ** 6, "uniform_complex", [sigma2], 44)
    a = math.sqrt(1.5 * sigma2)
    ref = a ** 4 / 5.0
    m4 = np.mean(S.real ** 4)
    assert abs(m4 - ref) < 0.005 * ref
    assert np.max(np.abs(S.real)) <= a + 1e-12


def test_unknown_modulation_rejected():
    with pytest.raises(DomainError):
        gen_signal(1, 10, "gmsk", [1.0], 0)


# --- channel -----------------------------------------------------------------

def test_channel_hits_target_snr_exactly():
    H = gen_channel(50, 1, 0.01, 1.0, 5)
    sc = Scenario(H, [1.0], 1.0)
    assert snr(sc) == pytest.approx(0.01, rel=1e-12)
    assert np.array_equal(H, gen_channel(50, 1, 0.01, 1.0, 5))
    d = DetectorDesign(50, 1000, 1)
    assert spike_spectrum(sc, d).t1 == pytest.approx(1.5, abs=1e-9)


def test_component_snr_channel():
    sc = scenario_from_component_snrs(50, (0.06, 0.04), seed=8)
    col = np.sum(np.abs(sc.H) ** 2, axis=0) / 50.0
    assert np.allclose(col, [0.06, 0.04], rtol=1e-12)
    assert snr(sc) == pytest.approx(0.1, rel=1e-12)


# --- batches -----------------------------------------------------------------

def test_batch_deterministic_and_valid():
    d = DetectorDesign(20, 200, 1)
    b1 = run_trials(d, None, trials=150, seed=4)
    b2 = run_trials(d, None, trials=150, seed=4)
    assert np.array_equal(b1.t_stat, b2.t_stat)
    assert np.array_equal(b1.lambda_max, b2.lambda_max)
    assert np.all(b1.lambda_min > 0.0)
    assert np.all(b1.t_stat >= 1.0)
    assert b1.hypothesis == "H0"


def test_batch_noise_scale_cancels_in_ratio():
    d = DetectorDesign(20, 200, 1)
    b1 = run_trials(d, None, trials=100, seed=4, sigma_v2=1.0)
    b10 = run_trials(d, None, trials=100, seed=4, sigma_v2=10.0)
    assert np.allclose(b10.lambda_max, 10.0 * b1.lambda_max, rtol=1e-12)
    assert np.max(np.abs(b10.t_stat - b1.t_stat)) <= 1e-12 * np.max(b1.t_stat)


def test_batch_trace_identity():
    # reconstruct trials from the documented seed chain and compare traces
    d = DetectorDesign(8, 64, 1)
    b = run_trials(d, None, trials=10, seed=21, sigma_v2=1.5)
    for i in range(10):
        ts = trial_seed(21, i)
        Y = gen_noise(8, 64, 1.5, ts ^ NOISE_TAG)
        R = Y @ Y.conj().T / 64
        w = np.linalg.eigvalsh(R)
        assert abs(np.sum(w) - np.trace(R).real) <= 1e-10 * abs(np.trace(R).real)
        assert w[-1] == pytest.approx(b.lambda_max[i], rel=1e-12)
        assert w[0] == pytest.approx(b.lambda_min[i], rel=1e-12)


def test_batch_h1_uses_scenario_noise():
    sc = scenario_from_snr(10, 0.5, sigma_v2=2.0, seed=3)
    d = DetectorDesign(10, 100, 1)
    b = run_trials(d, sc, trials=50, seed=9)
    assert b.hypothesis == "H1"
    assert b.sigma_v2 == 2.0
    # signal raises the top eigenvalue well above the noise bulk
    assert b.lambda_max.mean() > 2.0 * 1.3


def test_batch_redraw_channel_changes_trials_but_stays_seeded():
    sc = scenario_from_snr(10, 0.5, seed=3)
    d = DetectorDesign(10, 100, 1)
    b1 = run_trials(d, sc, trials=30, seed=9, redraw_channel=True)
    b2 = run_trials(d, sc, trials=30, seed=9, redraw_channel=True)
    b3 = run_trials(d, sc, trials=30, seed=9, redraw_channel=False)
    assert np.array_equal(b1.t_stat, b2.t_stat)
    assert not np.array_equal(b1.t_stat, b3.t_stat)


def test_batch_scenario_design_mismatch():
    sc = scenario_from_snr(10, 0.5, seed=3)
    with pytest.raises(DomainError):
        run_trials(DetectorDesign(12, 100, 1), sc, trials=5, seed=0)


# --- eigensolver dual route ---------------------------------------------------

def faddeev_leverrier_charpoly(A):
    """Characteristic polynomial coefficients by trace recursion (no eig)."""
    n = A.shape[0]
    coeffs = np.empty(n + 1, dtype=complex)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(A @ M) / k
    return coeffs


def test_eigensolver_against_charpoly_roots():
    rs = np.random.default_rng(2024)
    for _ in range(100):
        a = rs.standard_normal((8, 8)) + 1j * rs.standard_normal((8, 8))
        A = (a + a.conj().T) / 2
        w, Q = np.linalg.eigh(A)
        roots = np.sort(np.roots(faddeev_leverrier_charpoly(A)).real)
        assert np.allclose(w, roots, atol=1e-8 * max(1.0, np.abs(w).max()))
        recon = (Q * w) @ Q.conj().T
        assert np.linalg.norm(recon - A) <= 1e-10 * np.linalg.norm(A)


# --- empirical CDFs -----------------------------------------------------------

def test_empirical_cdf_step_behavior():
    e = EmpiricalCdf([3.0, 1.0, 2.0])
    assert e(0.5) == 0.0
    assert e(1.0) == pytest.approx(1 / 3)  # right-continuous
    assert e(2.5) == pytest.approx(2 / 3)
    assert e(9.0) == 1.0


def test_ks_distance_self_is_zero():
    d = DetectorDesign(10, 100, 1)
    b = run_trials(d, None, trials=200, seed=31)
    assert ks_distance(b, EmpiricalCdf(b.t_stat)) == 0.0


def test_ks_distance_detects_shift():
    rs = np.random.default_rng(0)
    x = rs.standard_normal(1000)
    from scipy.special import ndtr

    assert ks_distance(x, ndtr) < 0.05
    assert ks_distance(x, lambda v: ndtr(np.asarray(v) - 0.5)) > 0.15


def test_ks_distance_needs_samples():
    with pytest.raises(DomainError):
        ks_distance(np.ones(10), lambda v: np.asarray(v))


# --- CSV dumps -----------------------------------------------------------------

def test_dump_batch_csv(tmp_path):
    sc = scenario_from_snr(10, 0.2, modulation="qpsk", seed=3)
    d = DetectorDesign(10, 100, 1)
    b = run_trials(d, sc, trials=20, seed=9)
    path = tmp_path / "batch.csv"
    dump_batch_csv(path, b)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# K=10 N=100 seed=9 trials=20 modulation=qpsk snr=0.2")
    assert lines[1] == "trial,lambda_max,lambda_min,t"
    assert len(lines) == 22
    row = lines[2].split(",")
    assert int(row[0]) == 0
    assert float(row[1]) / float(row[2]) == pytest.approx(float(row[3]), rel=1e-9)


def test_dump_cdf_comparison_csv(tmp_path):
    d = DetectorDesign(10, 100, 1)
    b = run_trials(d, None, trials=120, seed=1)
    path = tmp_path / "cdf.csv"
    dump_cdf_comparison_csv(path, b, EmpiricalCdf(b.t_stat))
    lines = path.read_text().splitlines()
    assert lines[0] == "gamma,empirical,analytical"
    assert len(lines) == 121
    cells = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.all(np.diff(cells[:, 0]) >= 0.0)
    assert np.allclose(cells[:, 1], cells[:, 2])
