"""Smoothing kernels, kernel spectral density estimation and long-run
variance estimators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .series_core import FourierCoefficients, as_series, autocovariances, forward_coefficients

TWO_PI = 2.0 * np.pi
DEFAULT_BANDWIDTH = 0.01
KERNEL_NAMES = ("uniform", "bpk")


class DegenerateBandwidthError(ValueError):
    """No lattice frequency receives positive kernel weight."""


class ZeroVarianceError(ValueError):
    """A variance estimate is zero, so studentizing is impossible."""


def _uniform(t):
    return np.where(np.abs(t) <= 1.0, 0.5, 0.0)


def _bartlett_priestley(t):
    return np.where(np.abs(t) <= 1.0, 0.75 * (1.0 - np.square(t)), 0.0)


@dataclass(frozen=True)
class Kernel:
    """Even, nonnegative smoothing kernel supported on [-1, 1] with bandwidth ``h``.

    ``family`` is ``"uniform"``, ``"bpk"`` (Bartlett-Priestley) or
    ``"table"``; table kernels are linearly interpolated from ``(t, K(t))``
    knots and must be even and integrate to one within 1e-6.
    """

    family: str = "bpk"
    h: float = DEFAULT_BANDWIDTH
    table: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family == "bartlett-priestley":
            object.__setattr__(self, "family", "bpk")
        if self.family not in KERNEL_NAMES + ("table",):
            raise ValueError(f"unknown kernel {self.family!r}; valid: {', '.join(KERNEL_NAMES)}")
        if not (np.isfinite(self.h) and self.h > 0):
            raise ValueError(f"bandwidth must be positive, got {self.h}")
        if self.family == "table":
            if self.table is None:
                raise ValueError("table kernel requires knots")
            t, k = (np.asarray(a, dtype=float) for a in self.table)
            _check_table(t, k)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == "uniform":
            return _uniform(t)
        if self.family == "bpk":
            return _bartlett_priestley(t)
        knots, vals = (np.asarray(a, dtype=float) for a in self.table)
        return np.interp(t, knots, vals, left=0.0, right=0.0)

    @classmethod
    def from_name(cls, name: str, h: float = DEFAULT_BANDWIDTH) -> "Kernel":
        name = name.lower()
        if name in ("bartlett-priestley", "bartlett_priestley"):
            name = "bpk"
        return cls(name, h)

    @classmethod
    def from_table_file(cls, path, h: float = DEFAULT_BANDWIDTH) -> "Kernel":
        """Two whitespace- or comma-separated columns ``t K(t)`` on [-1, 1]."""
        rows = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            a, b = line.replace(",", " ").split()[:2]
            rows.append((float(a), float(b)))
        t, k = np.array(rows).T
        order = np.argsort(t)
        return cls("table", h, (tuple(t[order]), tuple(k[order])))


def _check_table(t: np.ndarray, k: np.ndarray) -> None:
    if t.shape != k.shape or t.size < 2:
        raise ValueError("kernel table needs at least two (t, K) rows")
    if np.any(np.diff(t) <= 0):
        raise ValueError("kernel table abscissae must be strictly increasing")
    if t[0] < -1.0 - 1e-12 or t[-1] > 1.0 + 1e-12:
        raise ValueError("kernel table must be supported on [-1, 1]")
    if np.any(k < 0):
        raise ValueError("kernel table must be nonnegative")
    if not np.allclose(np.interp(-t, t, k, left=0.0, right=0.0), k, atol=1e-9):
        raise ValueError("kernel table must be even")
    mass = np.trapezoid(k, t) if hasattr(np, "trapezoid") else np.trapz(k, t)
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"kernel table integrates to {mass:.8f}, not 1")


def wrapped_kernel(kernel: Kernel, lam) -> np.ndarray | float:
    """``K_h(lam) = h^{-1} sum_{j in Z} K((lam + 2 pi j)/h)``."""
    lam = np.asarray(lam, dtype=float)
    h = kernel.h
    base = np.mod(lam + np.pi, TWO_PI) - np.pi  # in [-pi, pi)
    reach = int(np.ceil(h / TWO_PI)) + 1
    total = np.zeros_like(base)
    for j in range(-reach, reach + 1):
        total = total + kernel((base + TWO_PI * j) / h)
    out = total / h
    return float(out) if out.ndim == 0 else out


def lattice_weights(kernel: Kernel, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``s`` and weights ``p_s = K(2 pi s/(T h)) / sum_j K(2 pi j/(T h))``.

    Only offsets with positive weight are returned. The weights are
    symmetric in ``s`` and sum to one.

    Raises
    ------
    DegenerateBandwidthError
        If the kernel vanishes on every lattice point.
    """
    scale = TWO_PI / (T * kernel.h)
    smax = int(np.floor(1.0 / scale + 1e-12))
    s = np.arange(-smax, smax + 1)
    w = kernel(s * scale)
    keep = w > 0
    s, w = s[keep], w[keep]
    total = w.sum()
    if s.size == 0 or total <= 0:
        raise DegenerateBandwidthError(
            f"kernel {kernel.family} with h={kernel.h} puts no mass on the frequency lattice for T={T}"
        )
    p = w / total
    # exact symmetry
    p = 0.5 * (p + p[::-1])
    return s, p


def _smooth_periodic(values: np.ndarray, s: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``out[k] = sum_s p_s values[(k - s) mod T]`` for a period-``T`` array indexed from 0."""
    T = values.size
    out = np.zeros(T)
    for shift, weight in zip(s, p):
        out += weight * np.roll(values, int(shift) % T)
    return out


@dataclass(frozen=True)
class SpectralEstimate:
    """Kernel spectral density estimate.

    ``values[k]`` is the estimate at ``lambda_k = 2 pi k/T`` for
    ``k = 0..floor(T/2)``. Calling the object evaluates the estimator at
    arbitrary frequencies.
    """

    values: np.ndarray
    kernel: Kernel
    T: int
    periodogram: np.ndarray = field(repr=False)

    @property
    def bandwidth(self) -> float:
        return self.kernel.h

    @property
    def grid(self) -> np.ndarray:
        return TWO_PI * np.arange(self.values.size) / self.T

    def at_fourier(self, j) -> np.ndarray:
        """Estimate at ``lambda_j`` for any integer ``j`` (period ``T``, reflected about ``pi``)."""
        j = np.mod(np.asarray(j), self.T)
        j = np.minimum(j, self.T - j)
        return self.values[j]

    def __call__(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        T = self.T
        h = self.kernel.h
        denom = self.kernel(TWO_PI * _lattice_offsets(0.0, h, T) / (T * h)).sum()
        out = np.empty(lam.size)
        for i, l in enumerate(lam):
            j = _lattice_offsets(l, h, T)
            w = self.kernel((l - TWO_PI * j / T) / h)
            out[i] = np.dot(w, self.periodogram[np.mod(j, T)]) / (TWO_PI * denom)
        return out if out.size > 1 else float(out[0])


def _lattice_offsets(lam: float, h: float, T: int) -> np.ndarray:
    """Integers ``j`` with ``|lam - 2 pi j/T| <= h``."""
    lo = int(np.ceil((lam - h) * T / TWO_PI - 1e-12))
    hi = int(np.floor((lam + h) * T / TWO_PI + 1e-12))
    return np.arange(lo, hi + 1)


def periodogram_array(coeffs: FourierCoefficients) -> np.ndarray:
    """Period-``T`` periodogram indexed from 0 with ``I(0) = I(T) = 0``."""
    I = coeffs.x**2 + coeffs.y**2
    return np.concatenate(([0.0], I[:-1]))


def estimate_spectral_density(series, kernel: Kernel) -> SpectralEstimate:
    """Kernel-smoothed periodogram of the centred series.

    ``f(lam) = sum_j K((lam - lambda_j)/h) I(j) / (2 pi sum_j K(lambda_j/h))``
    with ``I(cT) = 0``.
    """
    v = as_series(series)
    coeffs = forward_coefficients(v - v.mean())
    return spectral_density_from_coefficients(coeffs, kernel)


def spectral_density_from_coefficients(coeffs: FourierCoefficients, kernel: Kernel) -> SpectralEstimate:
    T = coeffs.T
    s, p = lattice_weights(kernel, T)
    I0 = periodogram_array(coeffs)
    smoothed = _smooth_periodic(I0, s, p) / TWO_PI
    values = np.maximum(smoothed[: T // 2 + 1], 0.0)
    values.setflags(write=False)
    I0.setflags(write=False)
    return SpectralEstimate(values, kernel, T, I0)


def floored(values: np.ndarray) -> np.ndarray:
    """Clamp spectral values below at ``1e-12 * max``."""
    top = float(np.max(values)) if values.size else 0.0
    return np.maximum(values, 1e-12 * top)


def _flat_top_weight(t):
    t = np.abs(t)
    return np.where(t <= 0.5, 1.0, np.where(t < 1.0, 2.0 * (1.0 - t), 0.0))


def flat_top_bandwidth(acov: np.ndarray, T: int) -> int:
    """Smallest positive ``l`` with ``|R(l+k)/R(0)| < 1.4 sqrt(log10(T)/T)`` for ``k = 1, 2, 3``."""
    threshold = 1.4 * np.sqrt(np.log10(T) / T)
    rho = np.abs(acov / acov[0])
    small = rho < threshold
    for lag in range(1, acov.size - 3):
        if small[lag + 1] and small[lag + 2] and small[lag + 3]:
            return lag
    return acov.size - 4


def flat_top_long_run_variance(centered) -> float:
    """Flat-top long-run variance estimate with automatic bandwidth.

    The input must already be centred (residuals); it is used as given.
    The result is floored at ``sum Z^2 / (T (T - 1))`` which keeps it
    positive and scale equivariant.

    Raises
    ------
    ZeroVarianceError
        If the series is identically zero.
    """
    z = as_series(centered)
    T = z.size
    # lags beyond T are zero, so T + 3 lags always contain a stopping point
    acov = np.zeros(T + 4)
    acov[:T] = autocovariances(z, T - 1)
    if acov[0] <= 0:
        raise ZeroVarianceError("flat-top estimator needs a series with positive variance")
    lam = flat_top_bandwidth(acov, T)
    big = 2 * lam
    k = np.arange(1, big + 1)
    candidate = acov[0] + 2.0 * np.dot(_flat_top_weight(k / big), acov[k])
    floor = np.dot(z, z) / (T * (T - 1))
    return float(max(candidate, floor))


def bootstrap_periodogram(coeffs: FourierCoefficients) -> np.ndarray:
    """``I*(j) = x*(j)^2 + y*(j)^2`` for ``j = 1..N``."""
    N = coeffs.N
    return coeffs.x[:N] ** 2 + coeffs.y[:N] ** 2


def folded_weights(kernel: Kernel, T: int) -> np.ndarray:
    """Weights ``c_j`` so that ``tau2* = sum_{j=1}^N c_j I*(j)``.

    ``c_1 = p_0 + p_1 + p_{-1}`` and ``c_j = p_j + p_{-j}`` for ``j >= 2``.
    """
    s, p = lattice_weights(kernel, T)
    N = (T - 1) // 2
    # offsets beyond N wrap periodically and reflect about T/2; s = 0 and the
    # unused Nyquist/mean slots go to j = 1 and j = N respectively
    m = np.mod(np.abs(s), T)
    m = np.minimum(m, T - m)
    m = np.clip(np.where(m == 0, 1, m), 1, N)
    return np.bincount(m - 1, weights=p, minlength=N)[:N]


def bootstrap_long_run_variance(boot_coeffs: FourierCoefficients, kernel: Kernel) -> float:
    """Long-run variance of a bootstrap draw from its own periodogram.

    ``tau2* = p_0 I*(1) + sum_{j>=1} (p_j + p_{-j}) I*(j)``, with the same
    kernel and bandwidth the draw was generated with.
    """
    c = folded_weights(kernel, boot_coeffs.T)
    return float(np.dot(c, bootstrap_periodogram(boot_coeffs)))
