"""Monte Carlo validation harness.

Generates noise-only and signal-plus-noise sample batches, forms the
sample covariance (1/N) Y Y^H per trial, extracts the extreme
eigenvalues and the ratio statistic, and compares empirical CDFs
against analytical laws.

Seed discipline (all pinned, see :mod:`eigendetect.rng` for the word
stream itself):

* trial ``i`` of a batch uses ``trial_seed(seed, i) = seed XOR mix(i)``;
* within a trial, the noise matrix uses ``trial_seed XOR NOISE_TAG``,
  the signal matrix ``trial_seed XOR SIGNAL_TAG``, a redrawn channel
  ``trial_seed XOR CHANNEL_TAG``;
* row ``p`` of a signal matrix uses ``seed XOR mix(p)``.

The channel is held fixed across the trials of a batch (one coherent
sensing epoch); ``redraw_channel=True`` redraws it per trial with the
per-source received powers preserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .rng import SeededStream, mix
from .spiked import DetectorDesign, Modulation, Scenario, _as_modulation

__all__ = [
    "NOISE_TAG",
    "SIGNAL_TAG",
    "CHANNEL_TAG",
    "trial_seed",
    "gen_noise",
    "gen_signal",
    "gen_channel",
    "scenario_from_snr",
    "scenario_from_component_snrs",
    "run_trials",
    "TrialBatch",
    "EmpiricalCdf",
    "ks_distance",
    "dump_batch_csv",
    "dump_cdf_comparison_csv",
]

NOISE_TAG = 0xB5EA2C49E1D7A3F1
SIGNAL_TAG = 0x417E4AD3C2A9D96B
CHANNEL_TAG = 0x9C8F12E07B3D5A17
_RETRY_TAG = 0x243F6A8885A308D3

_SRRC_ROLLOFF = 0.5
_SRRC_SPS = 8      # samples per symbol
_SRRC_SPAN = 10    # pulse truncation, in symbols


def trial_seed(seed: int, index: int) -> int:
    """Per-trial seed: batch seed XOR a hash of the trial index."""
    return (int(seed) ^ mix(index)) & (2 ** 64 - 1)


def gen_noise(K: int, N: int, sigma_v2: float, seed: int) -> np.ndarray:
    """K x N circularly symmetric complex Gaussian noise, E|v|^2 = sigma_v2."""
    if sigma_v2 <= 0.0:
        raise DomainError("gen_noise: sigma_v2 must be > 0")
    z = SeededStream(seed).standard_complex_normal((K, N))
    return math.sqrt(sigma_v2) * z


def _srrc_pulse() -> np.ndarray:
    """Unit-energy square-root raised cosine taps (roll-off 0.5, 8 sps, 10-symbol span)."""
    a = _SRRC_ROLLOFF
    k = np.arange(-_SRRC_SPAN * _SRRC_SPS // 2, _SRRC_SPAN * _SRRC_SPS // 2 + 1)
    t = k / _SRRC_SPS
    g = np.empty_like(t)
    sing = np.isclose(np.abs(t), 1.0 / (4.0 * a))
    zero = t == 0.0
    body = ~(sing | zero)
    tb = t[body]
    g[body] = (
        np.sin(np.pi * tb * (1 - a)) + 4 * a * tb * np.cos(np.pi * tb * (1 + a))
    ) / (np.pi * tb * (1 - (4 * a * tb) ** 2))
    g[zero] = 1.0 - a + 4 * a / np.pi
    g[sing] = (a / math.sqrt(2.0)) * (
        (1 + 2 / np.pi) * math.sin(np.pi / (4 * a))
        + (1 - 2 / np.pi) * math.cos(np.pi / (4 * a))
    )
    return g / np.linalg.norm(g)


_SRRC_TAPS = _srrc_pulse()


def _unit_qpsk(stream: SeededStream, n: int) -> np.ndarray:
    re = np.where(stream.uniform_open(n) > 0.5, 1.0, -1.0)
    im = np.where(stream.uniform_open(n) > 0.5, 1.0, -1.0)
    return (re + 1j * im) * math.sqrt(0.5)


def _unit_row(stream: SeededStream, n: int, modulation: Modulation) -> np.ndarray:
    """One zero-mean, unit-variance complex sample row."""
    if modulation is Modulation.GAUSSIAN:
        return stream.standard_complex_normal(n)
    if modulation is Modulation.QPSK:
        return _unit_qpsk(stream, n)
    if modulation is Modulation.QPSK_SRRC:
        n_sym = -(-n // _SRRC_SPS) + _SRRC_SPAN + 2
        sym = _unit_qpsk(stream, n_sym)
        up = np.zeros(n_sym * _SRRC_SPS, dtype=complex)
        up[:: _SRRC_SPS] = sym
        shaped = np.convolve(up, _SRRC_TAPS, mode="full")
        # skip one full filter length so every kept sample sees a fully
        # populated pulse window; sqrt(sps) restores unit average power
        start = _SRRC_TAPS.size - 1
        return shaped[start : start + n] * math.sqrt(_SRRC_SPS)
    if modulation is Modulation.PSK_NONCOHERENT:
        theta = 2.0 * np.pi * stream.uniform_open(n)
        return np.exp(1j * theta)
    if modulation is Modulation.UNIFORM_COMPLEX:
        half = math.sqrt(1.5)  # per-component variance 1/2 on [-a, a]
        re = half * (2.0 * stream.uniform_open(n) - 1.0)
        im = half * (2.0 * stream.uniform_open(n) - 1.0)
        return re + 1j * im
    raise DomainError(f"unknown modulation {modulation!r}")


def gen_signal(P: int, N: int, modulation, sigma2, seed: int) -> np.ndarray:
    """P x N source samples: independent rows, row p has variance sigma2[p]."""
    modulation = _as_modulation(modulation)
    sigma2 = np.asarray(sigma2, dtype=float).reshape(-1)
    if sigma2.shape[0] != P:
        raise DomainError("gen_signal: sigma2 must hold one power per source")
    if np.any(sigma2 <= 0.0):
        raise DomainError("gen_signal: source powers must be > 0")
    out = np.empty((P, N), dtype=complex)
    for p in range(P):
        stream = SeededStream(int(seed) ^ mix(p))
        out[p] = math.sqrt(sigma2[p]) * _unit_row(stream, N, modulation)
    return out


def gen_channel(K: int, P: int, target_snr: float, sigma_v2: float, seed: int) -> np.ndarray:
    """Rayleigh channel draw rescaled so that unit-power sources hit target_snr.

    Entries are i.i.d. complex Gaussian; a single joint scale then fixes
    sum_p ||h_p||^2 = target_snr * K * sigma_v2 (one power per source
    assumed, so the resulting scenario's SNR equals target_snr exactly).
    """
    if target_snr <= 0.0:
        raise DomainError("gen_channel: target_snr must be > 0")
    if sigma_v2 <= 0.0:
        raise DomainError("gen_channel: sigma_v2 must be > 0")
    g = SeededStream(seed).standard_complex_normal((K, P))
    fro2 = float(np.sum(np.abs(g) ** 2))
    if fro2 == 0.0:  # probability-zero draw
        return gen_channel(K, P, target_snr, sigma_v2, (int(seed) + 1) & (2 ** 64 - 1))
    return g * math.sqrt(target_snr * K * sigma_v2 / fro2)


def scenario_from_snr(
    K: int,
    target_snr: float,
    sigma_v2: float = 1.0,
    modulation=Modulation.GAUSSIAN,
    seed: int = 0,
    P: int = 1,
) -> Scenario:
    """Random-channel scenario with unit source powers and exact total SNR."""
    H = gen_channel(K, P, target_snr, sigma_v2, seed)
    return Scenario(H, np.ones(P), sigma_v2, modulation)


def scenario_from_component_snrs(
    K: int,
    component_snrs,
    sigma_v2: float = 1.0,
    modulation=Modulation.GAUSSIAN,
    seed: int = 0,
) -> Scenario:
    """Random-channel scenario with each per-source SNR pinned exactly.

    Column p is rescaled so sigma_p^2 ||h_p||^2 / (K sigma_v2) equals
    component_snrs[p] (unit source powers).
    """
    snrs = np.asarray(component_snrs, dtype=float).reshape(-1)
    if np.any(snrs <= 0.0):
        raise DomainError("scenario_from_component_snrs: SNRs must be > 0")
    P = snrs.shape[0]
    g = SeededStream(seed).standard_complex_normal((K, P))
    norms2 = np.sum(np.abs(g) ** 2, axis=0)
    if np.any(norms2 == 0.0):
        return scenario_from_component_snrs(
            K, snrs, sigma_v2, modulation, (int(seed) + 1) & (2 ** 64 - 1)
        )
    H = g * np.sqrt(snrs * K * sigma_v2 / norms2)[None, :]
    return Scenario(H, np.ones(P), sigma_v2, modulation)


@dataclass(frozen=True)
class TrialBatch:
    """Per-trial extreme eigenvalues and ratio statistics of one MC run."""

    design: DetectorDesign
    scenario: Scenario | None
    seed: int
    trials: int
    sigma_v2: float
    lambda_max: np.ndarray
    lambda_min: np.ndarray
    t_stat: np.ndarray

    def __post_init__(self):
        for name in ("lambda_max", "lambda_min", "t_stat"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.trials,):
                raise DomainError(f"TrialBatch: {name} must have one entry per trial")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.lambda_min <= 0.0) or np.any(self.lambda_max < self.lambda_min):
            raise DomainError("TrialBatch: requires lambda_max >= lambda_min > 0")

    @property
    def hypothesis(self) -> str:
        return "H0" if self.scenario is None else "H1"


def run_trials(
    design: DetectorDesign,
    scenario: Scenario | None = None,
    trials: int = 1000,
    seed: int = 0,
    sigma_v2: float = 1.0,
    redraw_channel: bool = False,
) -> TrialBatch:
    """Run seeded MC trials of the ratio detector; bit-reproducible per seed.

    ``sigma_v2`` sets the noise floor for noise-only batches; with a
    scenario supplied, its own noise variance is used.
    """
    if trials < 1:
        raise DomainError("run_trials: trials must be >= 1")
    K, N = design.K, design.N
    if scenario is not None:
        if scenario.K != design.K:
            raise DomainError("run_trials: design and scenario disagree on K")
        if scenario.P != design.P:
            raise DomainError("run_trials: design and scenario disagree on P")
        sigma_v2 = scenario.sigma_v2
        base_norms = np.sqrt(np.sum(np.abs(scenario.H) ** 2, axis=0))

    lam_max = np.empty(trials)
    lam_min = np.empty(trials)
    failed = []
    for i in range(trials):
        ts = trial_seed(seed, i)
        lo_hi = _one_trial(design, scenario, ts, sigma_v2, redraw_channel,
                           base_norms if scenario is not None else None)
        if lo_hi is None:
            lo_hi = _one_trial(design, scenario, ts ^ _RETRY_TAG, sigma_v2,
                               redraw_channel, base_norms if scenario is not None else None)
            failed.append(i)
            if lo_hi is None or len(failed) > max(1, trials // 1000):
                raise NumericError(
                    f"run_trials: eigensolver failed on {len(failed)} of {trials} trials"
                )
        lam_min[i], lam_max[i] = lo_hi

    return TrialBatch(
        design=design,
        scenario=scenario,
        seed=int(seed),
        trials=trials,
        sigma_v2=float(sigma_v2),
        lambda_max=lam_max,
        lambda_min=lam_min,
        t_stat=lam_max / lam_min,
    )


def _one_trial(design, scenario, ts, sigma_v2, redraw_channel, base_norms):
    K, N = design.K, design.N
    V = gen_noise(K, N, sigma_v2, ts ^ NOISE_TAG)
    if scenario is None:
        Y = V
    else:
        S = gen_signal(scenario.P, N, scenario.modulation, scenario.sigma2, ts ^ SIGNAL_TAG)
        H = scenario.H
        if redraw_channel:
            g = SeededStream(ts ^ CHANNEL_TAG).standard_complex_normal((K, scenario.P))
            norms = np.sqrt(np.sum(np.abs(g) ** 2, axis=0))
            H = g * (base_norms / norms)[None, :]
        Y = H @ S + V
    R = (Y @ Y.conj().T) / N
    try:
        w = np.linalg.eigvalsh(R)
    except np.linalg.LinAlgError:
        return None
    return float(w[0]), float(w[-1])


class EmpiricalCdf:
    """Right-continuous step CDF of a sample."""

    def __init__(self, values):
        self.values = np.sort(np.asarray(values, dtype=float))
        if self.values.size == 0:
            raise DomainError("EmpiricalCdf: empty sample")

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.searchsorted(self.values, x_arr, side="right") / self.values.size
        return out if x_arr.ndim else float(out)


def ks_distance(batch, cdf) -> float:
    """Sup over the sample points of |empirical CDF - analytical CDF|."""
    values = batch.t_stat if isinstance(batch, TrialBatch) else np.asarray(batch, float)
    n = values.size
    if n < 100:
        raise DomainError("ks_distance: at least 100 samples required")
    xs = np.sort(values)
    emp = np.arange(1, n + 1) / n
    ana = np.asarray(cdf(xs), dtype=float)
    return float(np.max(np.abs(emp - ana)))


def dump_batch_csv(path, batch: TrialBatch) -> None:
    """Write per-trial results; a leading comment records the batch setup."""
    if batch.scenario is None:
        mod, rho = "none", 0.0
    else:
        from .spiked import snr as _snr

        mod, rho = batch.scenario.modulation.value, _snr(batch.scenario)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            "# K=%d N=%d seed=%d trials=%d modulation=%s snr=%.10g\n"
            % (batch.design.K, batch.design.N, batch.seed, batch.trials, mod, rho)
        )
        fh.write("trial,lambda_max,lambda_min,t\n")
        for i in range(batch.trials):
            fh.write(
                "%d,%.12e,%.12e,%.12e\n"
                % (i, batch.lambda_max[i], batch.lambda_min[i], batch.t_stat[i])
            )


def dump_cdf_comparison_csv(path, batch: TrialBatch, cdf) -> None:
    """Write ``gamma,empirical,analytical`` rows over the sorted sample."""
    xs = np.sort(batch.t_stat)
    emp = np.arange(1, xs.size + 1) / xs.size
    ana = np.asarray(cdf(xs), dtype=float)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("gamma,empirical,analytical\n")
        for g, e, a in zip(xs, emp, ana):
            fh.write("%.12e,%.12e,%.12e\n" % (g, e, a))
