"""Sensing geometry and signal-scenario algebra.

Covers the deterministic part of the detection problem: SNR bookkeeping,
spike eigenvalues of the rank-P signal covariance, the phase-transition
identifiability condition, and dimensioning helpers (critical SNR,
minimum sample count).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "Modulation",
    "DetectorDesign",
    "Scenario",
    "SpikeSpectrum",
    "snr",
    "approx_snr_dominant",
    "spike_spectrum",
    "spike_from_snr",
    "is_identifiable",
    "critical_snr",
    "min_samples",
    "scenario_from_json",
]

_HERMITICITY_TOL = 1e-10
_TIE_TOL = 1e-9


class Modulation(str, Enum):
    GAUSSIAN = "gaussian"
    QPSK = "qpsk"
    QPSK_SRRC = "qpsk_srrc"
    PSK_NONCOHERENT = "psk_noncoherent"
    UNIFORM_COMPLEX = "uniform_complex"


def _as_modulation(value) -> Modulation:
    if isinstance(value, Modulation):
        return value
    try:
        return Modulation(value)
    except ValueError:
        names = ", ".join(m.value for m in Modulation)
        raise DomainError(f"unknown modulation {value!r}; expected one of: {names}") from None


@dataclass(frozen=True)
class DetectorDesign:
    """Sensing geometry: K receivers, N samples, P assumed sources.

    P only enters the signal-present analysis (through the reduced
    aspect ratio of the noise bulk); it defaults to the single-source
    case.
    """

    K: int
    N: int
    P: int = 1

    def __post_init__(self):
        if self.K < 1 or self.N < 1:
            raise DomainError("DetectorDesign: K and N must be positive")
        if self.K >= self.N:
            raise DomainError("DetectorDesign: K < N required (aspect ratio c in (0,1))")
        if not 1 <= self.P < self.K:
            raise DomainError("DetectorDesign: 1 <= P < K required")

    @property
    def c(self) -> float:
        return self.K / self.N

    @property
    def c_prime(self) -> float:
        return (self.K - self.P) / self.N

    @property
    def critical_t1(self) -> float:
        """Phase-transition point 1 + sqrt(c) for the top spike."""
        return 1.0 + math.sqrt(self.c)


@dataclass(frozen=True)
class Scenario:
    """Signal-present description: channel, per-source powers, noise.

    ``H`` is the K x P complex channel matrix, ``sigma2`` the diagonal
    of the (diagonal) source covariance in linear units.
    """

    H: np.ndarray
    sigma2: np.ndarray
    sigma_v2: float
    modulation: Modulation = Modulation.GAUSSIAN

    def __post_init__(self):
        H = np.array(self.H, dtype=complex)
        if H.ndim != 2:
            raise DomainError("Scenario: H must be a K x P matrix")
        sigma2 = np.array(self.sigma2, dtype=float).reshape(-1)
        K, P = H.shape
        if P >= K:
            raise DomainError("Scenario: P < K required")
        if sigma2.shape[0] != P:
            raise DomainError("Scenario: sigma2 must hold one power per source")
        if np.any(sigma2 <= 0.0):
            raise DomainError("Scenario: source powers must be strictly positive")
        if not self.sigma_v2 > 0.0:
            raise DomainError("Scenario: noise variance must be strictly positive")
        H.setflags(write=False)
        sigma2.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "sigma_v2", float(self.sigma_v2))
        object.__setattr__(self, "modulation", _as_modulation(self.modulation))

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def P(self) -> int:
        return self.H.shape[1]

    def scaled_noise(self, sigma_v2: float) -> "Scenario":
        """Same scenario with a different noise floor (channel and powers kept)."""
        return Scenario(self.H, self.sigma2, sigma_v2, self.modulation)


@dataclass(frozen=True)
class SpikeSpectrum:
    """Spike eigenvalues of the perturbed covariance, sorted descending.

    ``spikes[p] = signal_eigs[p] / sigma_v2 + 1``; their sum equals
    K * snr + P (trace identity).
    """

    spikes: np.ndarray
    signal_eigs: np.ndarray
    snr: float
    critical_value: float

    def __post_init__(self):
        spikes = np.array(self.spikes, dtype=float)
        eigs = np.array(self.signal_eigs, dtype=float)
        if spikes.shape != eigs.shape or spikes.ndim != 1:
            raise DomainError("SpikeSpectrum: spike and eigenvalue arrays must match")
        if np.any(np.diff(spikes) > 0.0):
            raise DomainError("SpikeSpectrum: spikes must be sorted descending")
        if np.any(spikes <= 1.0):
            raise DomainError("SpikeSpectrum: every spike must exceed 1")
        spikes.setflags(write=False)
        eigs.setflags(write=False)
        object.__setattr__(self, "spikes", spikes)
        object.__setattr__(self, "signal_eigs", eigs)

    @property
    def t1(self) -> float:
        return float(self.spikes[0])

    def identifiable(self) -> bool:
        return self.t1 > self.critical_value


def snr(scenario: Scenario) -> float:
    """Total SNR: tr(H Sigma H^H) / (K sigma_v^2)."""
    col_energy = np.sum(np.abs(scenario.H) ** 2, axis=0)
    return float(np.dot(scenario.sigma2, col_energy) / (scenario.K * scenario.sigma_v2))


def approx_snr_dominant(scenario: Scenario) -> float:
    """SNR of the strongest component alone: max_p sigma_p^2 ||h_p||^2 / (K sigma_v^2).

    Never exceeds the total SNR; the spike predicted from it never
    exceeds the exact top spike (rank-one lower bound).
    """
    col_energy = np.sum(np.abs(scenario.H) ** 2, axis=0)
    return float(np.max(scenario.sigma2 * col_energy) / (scenario.K * scenario.sigma_v2))


def spike_spectrum(scenario: Scenario, design: DetectorDesign) -> SpikeSpectrum:
    """Spike eigenvalues t_p of the normalized signal-plus-noise covariance.

    The nonzero eigenvalues s_p of H Sigma H^H are computed from the
    congruent P x P matrix Sigma^(1/2) (H^H H) Sigma^(1/2), then mapped
    to t_p = s_p / sigma_v^2 + 1.
    """
    if design.K != scenario.K:
        raise DomainError("spike_spectrum: design and scenario disagree on K")
    if design.P != scenario.P:
        raise DomainError("spike_spectrum: design and scenario disagree on P")

    d = np.sqrt(scenario.sigma2)
    gram = scenario.H.conj().T @ scenario.H
    m = d[:, None] * gram * d[None, :]
    drift = np.linalg.norm(m - m.conj().T)
    if drift > _HERMITICITY_TOL * max(np.linalg.norm(m), 1e-300):
        raise NumericError(f"spike_spectrum: hermiticity drift {drift:.3e} beyond tolerance")

    s = np.linalg.eigvalsh(m)[::-1]
    if s[-1] <= 0.0:
        raise DomainError("spike_spectrum: signal covariance is numerically rank deficient")
    # Trace identity between the reduced problem and K*snr*sigma_v2.
    rho = snr(scenario)
    trace_gap = abs(float(np.sum(s)) - rho * design.K * scenario.sigma_v2)
    if trace_gap > 1e-10 * max(float(np.sum(s)), 1e-300):
        raise NumericError("spike_spectrum: trace identity violated beyond 1e-10")

    t = s / scenario.sigma_v2 + 1.0
    if t.size > 1 and (t[0] - t[1]) <= _TIE_TOL * t[0]:
        warnings.warn(
            "top spike eigenvalue is nearly degenerate; treating it as simple "
            "(multiplicity > 1 has probability zero and is not modeled)",
            RuntimeWarning,
            stacklevel=2,
        )
    return SpikeSpectrum(
        spikes=t,
        signal_eigs=s,
        snr=rho,
        critical_value=design.critical_t1,
    )


def spike_from_snr(K: int, rho: float) -> float:
    """Single-source spike: t1 = K * rho + 1."""
    if rho < 0.0:
        raise DomainError("spike_from_snr: rho must be >= 0")
    return K * rho + 1.0


def is_identifiable(t1: float, design: DetectorDesign) -> bool:
    """True iff the spike separates from the noise bulk (t1 > 1 + sqrt(c), strict)."""
    if t1 < 1.0:
        raise DomainError("is_identifiable: t1 must be >= 1")
    return t1 > design.critical_t1


def critical_snr(design, n: int | None = None) -> float:
    """Identifiability limit 1/sqrt(K*N) for a single source.

    Accepts a :class:`DetectorDesign`, or raw ``(K, N)`` for quick
    dimensioning checks outside the 0 < c < 1 regime.
    """
    if n is None:
        K, N = design.K, design.N
    else:
        K, N = int(design), int(n)
        if K < 1 or N < 1:
            raise DomainError("critical_snr: K and N must be positive")
    return 1.0 / math.sqrt(K * N)


def min_samples(K: int, rho: float) -> int:
    """Smallest N making a single source of SNR rho identifiable."""
    if rho <= 0.0:
        raise DomainError("min_samples: rho must be > 0")
    if K < 1:
        raise DomainError("min_samples: K must be positive")
    bound = 1.0 / (K * rho * rho)
    if bound >= 2 ** 62:
        raise DomainError("min_samples: required sample count out of range")
    return int(math.floor(bound)) + 1


def scenario_from_json(source) -> tuple[Scenario, DetectorDesign]:
    """Load a scenario (plus its sensing geometry) from a JSON document.

    Accepts a dict, a JSON string, or a path.  Two forms:

    * explicit: ``{"K":, "N":, "sigma_v2":, "modulation":, "Sigma": [..P powers..],
      "H": [K rows of P [re, im] pairs]}``
    * single-source shortcut: ``{"K":, "N":, "snr":, "sigma_v2":, "modulation":}``
      which uses the canonical all-ones channel with the power chosen to
      realize the requested SNR exactly.
    """
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    elif isinstance(source, str):
        doc = json.loads(source)
    else:
        doc = dict(source)

    try:
        K = int(doc["K"])
        N = int(doc["N"])
    except KeyError as exc:
        raise DomainError(f"scenario JSON: missing field {exc}") from None
    sigma_v2 = float(doc.get("sigma_v2", 1.0))
    modulation = _as_modulation(doc.get("modulation", "gaussian"))

    has_matrix = "H" in doc or "Sigma" in doc
    has_snr = "snr" in doc
    if has_matrix == has_snr:
        raise DomainError("scenario JSON: supply either (H, Sigma) or the snr shortcut")

    if has_snr:
        rho = float(doc["snr"])
        if rho <= 0.0:
            raise DomainError("scenario JSON: snr must be > 0")
        H = np.ones((K, 1), dtype=complex)
        sigma2 = np.array([rho * sigma_v2])  # ||h||^2 = K cancels the 1/K
        scenario = Scenario(H, sigma2, sigma_v2, modulation)
    else:
        if "H" not in doc or "Sigma" not in doc:
            raise DomainError("scenario JSON: H and Sigma must be supplied together")
        rows = doc["H"]
        if len(rows) != K:
            raise DomainError("scenario JSON: H must have K rows")
        H = np.array(
            [[complex(re, im) for re, im in row] for row in rows], dtype=complex
        )
        scenario = Scenario(H, np.asarray(doc["Sigma"], dtype=float), sigma_v2, modulation)

    design = DetectorDesign(K=K, N=N, P=scenario.P)
    return scenario, design
