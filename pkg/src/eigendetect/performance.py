"""Analytical detector performance.

Builds the limiting law of the eigenvalue ratio T under each hypothesis
(Tracy-Widom edges for the noise case, Gaussian spike over a Tracy-Widom
floor for the signal case), evaluates false-alarm and missed-detection
probabilities by quadrature, and inverts them into decision thresholds.

The ratio CDF is computed as a single quadrature over the denominator
density,

    F_T(gamma) = int_0^inf f_den(x) F_num(gamma x) dx,

which equals the integral of the textbook ratio density by Fubini and
needs one Gauss-Legendre rule instead of a nested one.  The noise
variance cancels in the ratio, so no law below takes it as a parameter;
the signal-present law depends on the scenario only through the top
spike eigenvalue t1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import DomainError, NotIdentifiableError, NumericError
from .spiked import DetectorDesign, spike_from_snr
from .tracy_widom import TracyWidomTable, default_table

__all__ = [
    "EdgeLaw",
    "RatioLaw",
    "ThresholdTable",
    "LutRow",
    "mu_plus",
    "mu_minus",
    "nu_plus",
    "nu_minus",
    "mu_spike",
    "nu_spike",
    "centering_constants",
    "pfa",
    "pmd",
    "threshold_from_pfa",
    "threshold_from_pmd",
    "roc",
    "build_lut",
    "write_lut_csv",
    "write_roc_csv",
]

_QUAD_NODES = 256
_SUPPORT_SIGMAS = 12.0       # denominator window half-width, in scale units
_SELF_CHECK_TOL = 1e-8       # node-doubling agreement required at startup
_CRITICAL_MARGIN = 1e-6      # refuse spikes within this relative margin of 1+sqrt(c)
_BRACKET = (1.0, 100.0)      # threshold search interval
_INVERT_TOL = 1e-6


def mu_plus(c: float) -> float:
    """Upper bulk edge (sqrt(c) + 1)^2."""
    return (math.sqrt(c) + 1.0) ** 2


def mu_minus(c: float) -> float:
    """Lower bulk edge (sqrt(c) - 1)^2."""
    return (math.sqrt(c) - 1.0) ** 2


def nu_plus(c: float) -> float:
    """Upper-edge fluctuation scale (sqrt(c)+1)(1/sqrt(c)+1)^(1/3)."""
    return (math.sqrt(c) + 1.0) * (1.0 / math.sqrt(c) + 1.0) ** (1.0 / 3.0)


def nu_minus(c: float) -> float:
    """Lower-edge fluctuation scale; negative on c in (0, 1)."""
    return (math.sqrt(c) - 1.0) * (1.0 / math.sqrt(c) - 1.0) ** (1.0 / 3.0)


def mu_spike(t1: float, c: float) -> float:
    """Almost-sure limit of the top eigenvalue above the transition."""
    return t1 * (1.0 + c / (t1 - 1.0))


def nu_spike(t1: float, c: float) -> float:
    """Gaussian fluctuation scale of the separated top eigenvalue."""
    return t1 * math.sqrt(1.0 - c / (t1 - 1.0) ** 2)


@dataclass(frozen=True)
class EdgeLaw:
    """One edge of the spectrum: distribution kind plus centering/scaling.

    ``scale`` keeps its sign (negative for the lower edge, whose
    fluctuations are a reflected Tracy-Widom); ``rate`` is the exponent
    of N in the convergence rate.
    """

    kind: str  # "tracy_widom" | "gaussian"
    center: float
    scale: float
    rate: float

    def sigma(self, n_samples: int) -> float:
        return abs(self.scale) * n_samples ** (-self.rate)


@dataclass(frozen=True)
class RatioLaw:
    """Limiting law of T = lambda_max / lambda_min under one hypothesis."""

    hypothesis: str  # "H0" | "H1"
    design: DetectorDesign
    numerator: EdgeLaw
    denominator: EdgeLaw
    t1: float | None = None

    # -- numerator CDF / PDF ------------------------------------------------
    def _num_cdf(self, y, table: TracyWidomTable):
        s = self.numerator.sigma(self.design.N)
        z = (np.asarray(y, float) - self.numerator.center) / s
        if self.numerator.kind == "gaussian":
            return ndtr(z)
        return table.cdf(z)

    def _num_pdf(self, y, table: TracyWidomTable):
        s = self.numerator.sigma(self.design.N)
        z = (np.asarray(y, float) - self.numerator.center) / s
        if self.numerator.kind == "gaussian":
            return np.exp(-0.5 * z ** 2) / (s * math.sqrt(2.0 * math.pi))
        return table.pdf(z) / s

    # -- denominator density (lower edge, reflected Tracy-Widom) ------------
    def _den_pdf(self, x, table: TracyWidomTable):
        s = self.denominator.sigma(self.design.N)
        z = (self.denominator.center - np.asarray(x, float)) / s
        return table.pdf(z) / s

    def _den_window(self) -> tuple[float, float]:
        s = self.denominator.sigma(self.design.N)
        lo = max(0.0, self.denominator.center - _SUPPORT_SIGMAS * s)
        return lo, self.denominator.center + _SUPPORT_SIGMAS * s

    def _quad(self, gamma, nodes: int, table: TracyWidomTable):
        lo, hi = self._den_window()
        u, w = _gauss_legendre(nodes)
        x = 0.5 * (hi - lo) * u + 0.5 * (hi + lo)
        wx = 0.5 * (hi - lo) * w * self._den_pdf(x, table)
        g = np.atleast_1d(np.asarray(gamma, float))
        vals = self._num_cdf(g[:, None] * x[None, :], table) @ wx
        return vals

    def cdf(self, gamma, table: TracyWidomTable | None = None):
        """F_T(gamma); zero for gamma <= 1 (eigenvalue ordering)."""
        table = table or default_table()
        g = np.atleast_1d(np.asarray(gamma, float))
        out = np.clip(self._quad(g, _QUAD_NODES, table), 0.0, 1.0)
        out[g <= 1.0] = 0.0
        return out if np.ndim(gamma) else float(out[0])

    def pdf(self, t, table: TracyWidomTable | None = None):
        """Ratio density int_0^inf x f_num(t x) f_den(x) dx, for t > 1."""
        table = table or default_table()
        lo, hi = self._den_window()
        u, w = _gauss_legendre(_QUAD_NODES)
        x = 0.5 * (hi - lo) * u + 0.5 * (hi + lo)
        wx = 0.5 * (hi - lo) * w * x * self._den_pdf(x, table)
        t_arr = np.atleast_1d(np.asarray(t, float))
        out = self._num_pdf(t_arr[:, None] * x[None, :], table) @ wx
        out[t_arr <= 1.0] = 0.0
        return out if np.ndim(t) else float(out[0])

    def center_ratio(self) -> float:
        return self.numerator.center / self.denominator.center

    def _self_check(self, table: TracyWidomTable) -> None:
        """Node-doubling consistency of the quadrature at a reference point."""
        g = self.center_ratio()
        a = float(self._quad(g, _QUAD_NODES, table)[0])
        b = float(self._quad(g, 2 * _QUAD_NODES, table)[0])
        if abs(a - b) > _SELF_CHECK_TOL:
            raise NumericError(
                f"ratio-law quadrature self-check failed: |{a!r} - {b!r}| > {_SELF_CHECK_TOL}"
            )


def centering_constants(
    design: DetectorDesign, hypothesis: str, t1: float | None = None
) -> RatioLaw:
    """Populate the ratio law of T for the requested hypothesis.

    Under "H1" the top spike eigenvalue ``t1`` must exceed the
    phase-transition point with a small safety margin (the Gaussian
    fluctuation scale vanishes at the transition).
    """
    if hypothesis == "H0":
        return _h0_law(design)
    if hypothesis == "H1":
        if t1 is None:
            raise DomainError("centering_constants: t1 required under H1")
        return _h1_law(design, float(t1))
    raise DomainError(f"centering_constants: unknown hypothesis {hypothesis!r}")


@lru_cache(maxsize=128)
def _h0_law(design: DetectorDesign) -> RatioLaw:
    c = design.c
    law = RatioLaw(
        hypothesis="H0",
        design=design,
        numerator=EdgeLaw("tracy_widom", mu_plus(c), nu_plus(c), 2.0 / 3.0),
        denominator=EdgeLaw("tracy_widom", mu_minus(c), nu_minus(c), 2.0 / 3.0),
    )
    law._self_check(default_table())
    return law


@lru_cache(maxsize=1024)
def _h1_law(design: DetectorDesign, t1: float) -> RatioLaw:
    c = design.c
    threshold = (1.0 + math.sqrt(c)) * (1.0 + _CRITICAL_MARGIN)
    if t1 < threshold:
        raise NotIdentifiableError(
            f"t1={t1:.6g} does not clear the phase transition 1+sqrt(c)={1 + math.sqrt(c):.6g}; "
            "the ratio statistic then follows the noise-only law (use hypothesis='H0')"
        )
    cp = design.c_prime
    law = RatioLaw(
        hypothesis="H1",
        design=design,
        numerator=EdgeLaw("gaussian", mu_spike(t1, c), nu_spike(t1, c), 0.5),
        denominator=EdgeLaw("tracy_widom", mu_minus(cp), nu_minus(cp), 2.0 / 3.0),
        t1=t1,
    )
    law._self_check(default_table())
    return law


@lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def pfa(gamma: float, design: DetectorDesign) -> float:
    """False-alarm probability 1 - F_{T|H0}(gamma)."""
    if gamma < 1.0:
        raise DomainError("pfa: gamma must be >= 1 (T exceeds 1 by construction)")
    return 1.0 - _h0_law(design).cdf(gamma)


def pmd(gamma: float, design: DetectorDesign, t1: float) -> float:
    """Missed-detection probability F_{T|H1}(gamma) for a spike t1."""
    if gamma < 1.0:
        raise DomainError("pmd: gamma must be >= 1 (T exceeds 1 by construction)")
    return float(_h1_law(design, float(t1)).cdf(gamma))


def _invert(fun, target: float) -> float:
    lo, hi = _BRACKET
    f_lo = fun(lo) - target
    f_hi = fun(hi) - target
    if f_lo == 0.0:
        return lo
    if f_lo * f_hi > 0.0:
        raise DomainError(
            f"target {target!r} not reachable inside the threshold bracket {_BRACKET}"
        )
    root = brentq(lambda g: fun(g) - target, lo, hi, xtol=1e-10, rtol=1e-14)
    if abs(fun(root) - target) > _INVERT_TOL:
        raise NumericError("threshold inversion did not meet the 1e-6 residual bound")
    return float(root)


def threshold_from_pfa(target: float, design: DetectorDesign) -> float:
    """gamma such that pfa(gamma) = target (to 1e-6)."""
    if not 0.0 < target < 1.0:
        raise DomainError("threshold_from_pfa: target must lie in (0, 1)")
    return _invert(lambda g: pfa(g, design), target)


def threshold_from_pmd(target: float, design: DetectorDesign, t1: float) -> float:
    """gamma such that pmd(gamma, t1) = target (to 1e-6)."""
    if not 0.0 < target < 1.0:
        raise DomainError("threshold_from_pmd: target must lie in (0, 1)")
    return _invert(lambda g: pmd(g, design, t1), target)


def roc(design: DetectorDesign, t1: float, pfa_grid) -> list[tuple[float, float]]:
    """Missed-detection probability at the threshold of each target P_fa."""
    out = []
    for p in pfa_grid:
        if not 0.0 < p < 1.0:
            raise DomainError("roc: grid values must lie in (0, 1)")
        gamma = threshold_from_pfa(p, design)
        out.append((float(p), pmd(gamma, design, t1)))
    return out


@dataclass(frozen=True)
class LutRow:
    K: int
    N: int
    pfa: float
    gamma: float = math.nan
    snr: float | None = None
    pmd: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class ThresholdTable:
    """Threshold lookup table over a (K, N, P_fa) grid."""

    rows: tuple[LutRow, ...]

    def __iter__(self):
        return iter(self.rows)


def build_lut(k_list, n_list, pfa_list, snr: float | None = None) -> ThresholdTable:
    """Thresholds for every (K, N, P_fa) combination, sorted.

    With an SNR supplied, each row also records the single-source
    missed-detection probability at its threshold.  Rows whose
    computation fails carry an error marker instead of aborting the
    rest of the table.
    """
    if not (len(k_list) and len(n_list) and len(pfa_list)):
        raise DomainError("build_lut: all grids must be nonempty")
    rows = []
    for K in sorted(set(int(k) for k in k_list)):
        for N in sorted(set(int(n) for n in n_list)):
            for p in sorted(set(float(p) for p in pfa_list)):
                try:
                    design = DetectorDesign(K=K, N=N)
                    gamma = threshold_from_pfa(p, design)
                    if snr is None:
                        rows.append(LutRow(K, N, p, gamma))
                    else:
                        t1 = spike_from_snr(K, snr)
                        rows.append(
                            LutRow(K, N, p, gamma, snr=snr, pmd=pmd(gamma, design, t1))
                        )
                except (DomainError, NumericError) as exc:
                    rows.append(LutRow(K, N, p, snr=snr, error=str(exc)))
    return ThresholdTable(rows=tuple(rows))


def write_lut_csv(path, table: ThresholdTable) -> None:
    """CSV header ``K,N,pfa,gamma[,snr,pmd]``; failed rows carry nan."""
    with_snr = any(r.snr is not None for r in table.rows)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("K,N,pfa,gamma,snr,pmd\n" if with_snr else "K,N,pfa,gamma\n")
        for r in table.rows:
            cells = ["%d" % r.K, "%d" % r.N, "%.10g" % r.pfa, "%.10g" % r.gamma]
            if with_snr:
                cells.append("%.10g" % (math.nan if r.snr is None else r.snr))
                cells.append("%.10g" % (math.nan if r.pmd is None else r.pmd))
            fh.write(",".join(cells) + "\n")


def write_roc_csv(path, points) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("pfa,pmd\n")
        for p, q in points:
            fh.write("%.10g,%.10g\n" % (p, q))
