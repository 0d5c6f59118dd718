"""Deterministic counter-based random number generation.

Trial reproducibility is a hard contract of the simulator, so the whole
generation chain is pinned here rather than delegated to a library whose
stream may change between releases:

* Raw words.  Word ``i`` (0-based) of the stream with 64-bit seed ``s`` is
  ``mix64((s + (i+1)*GAMMA) mod 2^64)`` with ``GAMMA = 0x9E3779B97F4A7C15``
  and ``mix64`` the SplitMix64 finalizer
  (``z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27; z *= 0x94D049BB133111EB;
  z ^= z>>31``).  Words are a pure function of (seed, index): any chunking
  of requests yields identical output.
* Uniforms.  ``u_i = ((w_i >> 11) + 1) * 2^-53``, i.e. uniform on (0, 1].
* Gaussians.  Box-Muller on the open interval: to produce ``n`` normals,
  draw ``m = ceil(n/2)`` radius uniforms then ``m`` angle uniforms (in
  stream order), and set ``z_{2j} = r_j cos(2 pi a_j)``,
  ``z_{2j+1} = r_j sin(2 pi a_j)`` with ``r_j = sqrt(-2 ln u_j)``; the
  trailing value is dropped when ``n`` is odd.
* Complex normals.  Real parts first, then imaginary parts, combined as
  ``(x + i y) / sqrt(2)`` (unit total variance), reshaped C-order.

Derived seeds (per-trial, per-row) are produced with :func:`mix`, a
SplitMix64-style hash of the counter, XORed into the parent seed.
"""

from __future__ import annotations

import numpy as np

__all__ = ["mix", "SeededStream"]

_MASK = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO53 = float(2 ** -53)


def _mix64(z):
    """SplitMix64 finalizer; operates on uint64 scalars or arrays."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def mix(counter: int) -> int:
    """64-bit hash of a small counter, for deriving child seeds."""
    with np.errstate(over="ignore"):
        word = _mix64((np.uint64(counter & _MASK) + _ONE) * _GAMMA)
    return int(word)


class SeededStream:
    """Sequential view over the counter-based word stream of one seed."""

    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) & _MASK)
        self._cursor = 0

    def _words(self, n: int) -> np.ndarray:
        start = self._cursor
        self._cursor += n
        idx = np.arange(start + 1, start + n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return _mix64(self._seed + idx * _GAMMA)

    def uniform_open(self, n: int) -> np.ndarray:
        """n uniforms on the open-left interval (0, 1]."""
        return (((self._words(n) >> _S11) + _ONE)).astype(np.float64) * _TWO53

    def standard_normal(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        radius = self.uniform_open(m)
        angle = self.uniform_open(m)
        r = np.sqrt(-2.0 * np.log(radius))
        theta = (2.0 * np.pi) * angle
        pairs = np.empty((m, 2))
        pairs[:, 0] = r * np.cos(theta)
        pairs[:, 1] = r * np.sin(theta)
        return pairs.reshape(-1)[:n]

    def standard_complex_normal(self, shape) -> np.ndarray:
        """Circularly symmetric complex normals with unit total variance."""
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        n = int(np.prod(shape)) if shape else 1
        x = self.standard_normal(n)
        y = self.standard_normal(n)
        return ((x + 1j * y) * np.sqrt(0.5)).reshape(shape)
