"""Real time series primitives: scaled Fourier coefficients, periodogram,
partial sums and sample autocovariances.

All public frequency indices are 1-based, ``j = 1..T``, with
``lambda_j = 2*pi*j/T``. Coefficients are stored in arrays of length ``T``
where position ``j - 1`` holds index ``j``; the slot ``j = T`` (position
``T - 1``) carries the sample mean.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MIN_LENGTH = 4
SYMMETRY_TOL = 1e-8


class InvalidSeriesError(ValueError):
    """Raised for series that are too short, non-finite or malformed."""


class InconsistentCoefficientsError(ValueError):
    """Raised when coefficient arrays violate the conjugate symmetry."""


def as_series(values, min_length: int = MIN_LENGTH) -> np.ndarray:
    """Validate and return a 1-d float copy of ``values``."""
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidSeriesError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise InvalidSeriesError(f"series length {arr.size} < {min_length}")
    if not np.all(np.isfinite(arr)):
        raise InvalidSeriesError("series contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FourierCoefficients:
    """Scaled DFT coefficients ``x(j), y(j)``, ``j = 1..T``.

    ``x(j) + i y(j) = T^{-1/2} sum_t V(t) exp(-i lambda_j t)``.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise InconsistentCoefficientsError("x and y must be 1-d arrays of equal length")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def T(self) -> int:
        return self.x.size

    @property
    def N(self) -> int:
        return (self.T - 1) // 2

    def at(self, j: int) -> tuple[float, float]:
        """Raw coefficient pair at 1-based index ``1 <= j <= T``."""
        if not 1 <= j <= self.T:
            raise IndexError(f"index {j} outside 1..{self.T}")
        return float(self.x[j - 1]), float(self.y[j - 1])

    @property
    def mean_slot(self) -> float:
        """``x(T) = sqrt(T) * mean``."""
        return float(self.x[-1])

    def symmetry_error(self) -> float:
        """Largest violation of ``x(T-j) = x(j)``, ``y(T-j) = -y(j)``, ``y(T) = 0``."""
        T = self.T
        j = np.arange(1, T)
        ex = np.abs(self.x[T - j - 1] - self.x[j - 1])
        ey = np.abs(self.y[T - j - 1] + self.y[j - 1])
        err = max(ex.max(initial=0.0), ey.max(initial=0.0), abs(self.y[-1]))
        return float(err)

    def periodogram(self) -> np.ndarray:
        """``I(j)`` for ``j = 1..T`` with ``I(T) = 0``."""
        out = self.x**2 + self.y**2
        out[-1] = 0.0
        return out


def forward_coefficients(series) -> FourierCoefficients:
    """Scaled Fourier coefficients of ``V(1..T)``.

    Parameters
    ----------
    series : array_like
        Observations ``V(1), ..., V(T)``, ``T >= 4``.

    Returns
    -------
    FourierCoefficients
        All ``T`` pairs; ``x(T) = sqrt(T) * mean(V)`` and ``y(T) = 0``.
    """
    v = as_series(series)
    T = v.size
    # numpy's fft sums over t' = t - 1; the factor exp(-i lambda_j) restores t = 1..T
    j = np.arange(1, T + 1)
    c = np.fft.fft(v)[j % T] * np.exp(-2j * np.pi * j / T) / np.sqrt(T)
    x = c.real.copy()
    y = c.imag.copy()
    # exact zeros where the symmetry forces them
    y[-1] = 0.0
    if T % 2 == 0:
        y[T // 2 - 1] = 0.0
    _enforce_symmetry(x, y)
    return FourierCoefficients(x, y)


def _enforce_symmetry(x: np.ndarray, y: np.ndarray) -> None:
    T = x.size
    N = (T - 1) // 2
    lo = np.arange(1, N + 1)
    x[T - lo - 1] = x[lo - 1]
    y[T - lo - 1] = -y[lo - 1]


def from_half_spectrum(x_half, y_half, T: int) -> FourierCoefficients:
    """Assemble full coefficients from ``j = 1..N`` values.

    Slots ``j = T`` and, for even ``T``, ``j = T/2`` are set to zero and the
    remaining indices follow ``x(T-j) = x(j)``, ``y(T-j) = -y(j)``.
    """
    N = (T - 1) // 2
    x_half = np.asarray(x_half, dtype=float)
    y_half = np.asarray(y_half, dtype=float)
    if x_half.shape != (N,) or y_half.shape != (N,):
        raise InconsistentCoefficientsError(f"expected {N} half-spectrum values for T={T}")
    x = np.zeros(T)
    y = np.zeros(T)
    x[:N] = x_half
    y[:N] = y_half
    _enforce_symmetry(x, y)
    return FourierCoefficients(x, y)


def inverse_transform(coeffs: FourierCoefficients) -> np.ndarray:
    """Time series ``T^{-1/2} sum_j (x(j) + i y(j)) exp(2 pi i t j / T)``, ``t = 1..T``.

    Raises
    ------
    InconsistentCoefficientsError
        If the coefficients are not conjugate symmetric to within 1e-8, in
        which case the result would not be real.
    """
    err = coeffs.symmetry_error()
    scale = max(1.0, float(np.abs(coeffs.x).max(initial=0.0)), float(np.abs(coeffs.y).max(initial=0.0)))
    if err > SYMMETRY_TOL * scale:
        raise InconsistentCoefficientsError(f"symmetry violated by {err:.3g}")
    return _inverse_batch(coeffs.x, coeffs.y)


def _inverse_batch(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Inverse transform along the last axis of full-length coefficient arrays."""
    T = x.shape[-1]
    j = np.arange(1, T + 1)
    c = (x + 1j * y) * np.exp(2j * np.pi * j / T)
    # reorder so that position k holds frequency k mod T
    c = np.roll(c, 1, axis=-1)
    return np.fft.irfft(c[..., : T // 2 + 1], n=T, axis=-1) * np.sqrt(T)


def half_spectrum_inverse(x_half: np.ndarray, y_half: np.ndarray, T: int) -> np.ndarray:
    """Series from ``j = 1..N`` coefficients with the mean and Nyquist slots zeroed.

    Works along the last axis, so a ``(B, N)`` batch yields ``(B, T)``.
    Equivalent to ``(2/sqrt(T)) sum_{j<=N} [x(j) cos(2 pi t j/T) - y(j) sin(2 pi t j/T)]``.
    """
    x_half = np.asarray(x_half, dtype=float)
    y_half = np.asarray(y_half, dtype=float)
    N = (T - 1) // 2
    j = np.arange(1, N + 1)
    shape = x_half.shape[:-1] + (T // 2 + 1,)
    c = np.zeros(shape, dtype=complex)
    c[..., 1 : N + 1] = (x_half + 1j * y_half) * np.exp(2j * np.pi * j / T)
    return np.fft.irfft(c, n=T, axis=-1) * np.sqrt(T)


def periodogram(coeffs: FourierCoefficients, j: int) -> float:
    """``I(j) = x(j)^2 + y(j)^2`` under the index extension; ``I(cT) = 0``."""
    if j % coeffs.T == 0:
        return 0.0
    x, y = extend_coefficients(coeffs, j)
    return x * x + y * y


def extend_coefficients(coeffs: FourierCoefficients, j: int) -> tuple[float, float]:
    """Coefficient pair at an arbitrary integer index, as used by neighbourhood resampling.

    Rules: ``x(0) = y(0) = 0``; ``x(-j) = x(j)``, ``y(-j) = -y(j)``; for even
    ``T`` the index ``T/2`` carries the alternating mean
    ``T^{-1/2} sum_t (-1)^t V(t)`` in both parts. Indices outside
    ``(-T/2, T/2]`` repeat with period ``T``, so ``x(ceil(T/2) + j) = x(N - j)``
    while ``y`` changes sign under that reflection.
    """
    T = coeffs.T
    N = coeffs.N
    k = j % T
    if 2 * k > T:
        k -= T  # k in (-T/2, T/2]
    if k == 0:
        return 0.0, 0.0
    if 1 <= k <= N:
        return float(coeffs.x[k - 1]), float(coeffs.y[k - 1])
    if k < 0:
        return float(coeffs.x[-k - 1]), -float(coeffs.y[-k - 1])
    alt = float(coeffs.x[k - 1])  # k = T/2, even T
    return alt, alt


def extended_arrays(coeffs: FourierCoefficients, indices) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`extend_coefficients` over an integer array."""
    idx = np.asarray(indices)
    xs = np.empty(idx.shape)
    ys = np.empty(idx.shape)
    for pos, j in np.ndenumerate(idx):
        xs[pos], ys[pos] = extend_coefficients(coeffs, int(j))
    return xs, ys


@dataclass(frozen=True)
class PartialSumPath:
    """``S(k/m) = m^{-1/2} sum_{l<=k} Z(l)`` for ``k = 0..m``."""

    m: int
    path: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.m + 1) / self.m

    def __call__(self, u: float) -> float:
        """Step-function value at ``u`` in [0, 1]."""
        if not 0.0 <= u <= 1.0:
            raise ValueError("u must lie in [0, 1]")
        return float(self.path[int(np.floor(self.m * u + 1e-12))])


def partial_sum_path(series, m: int) -> PartialSumPath:
    """Scaled partial sums of the first ``m`` observations.

    ``path[0] = 0`` and ``path[k] = m^{-1/2} sum_{l<=k} series(l)``.
    """
    v = as_series(series, min_length=1)
    if not 1 <= m <= v.size:
        raise ValueError(f"m must lie in 1..{v.size}, got {m}")
    path = np.concatenate(([0.0], np.cumsum(v[:m]))) / np.sqrt(m)
    path.setflags(write=False)
    return PartialSumPath(m, path)


def sample_autocovariance(series, k: int) -> float:
    """``R(k) = T^{-1} sum_{t=1}^{T-k} Z(t) Z(t+k)``.

    The caller centres the series; no mean is removed here. The divisor is
    ``T`` for every lag and ``R(k) = 0`` for ``k >= T``.
    """
    z = as_series(series, min_length=1)
    if k < 0:
        raise InvalidSeriesError(f"lag must be nonnegative, got {k}")
    T = z.size
    if k >= T:
        return 0.0
    return float(np.dot(z[: T - k], z[k:]) / T)


def autocovariances(series, max_lag: int) -> np.ndarray:
    """``R(0..max_lag)`` with the same divisor-``T`` convention."""
    z = as_series(series, min_length=1)
    T = z.size
    out = np.zeros(max_lag + 1)
    n = min(max_lag, T - 1)
    # full linear correlation via zero padding
    size = 1 << int(np.ceil(np.log2(2 * T)))
    f = np.fft.rfft(z, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:T] / T
    out[: n + 1] = acov[: n + 1]
    return out


def read_series(path) -> np.ndarray:
    """Read one value per line, or a CSV with header ``t,value``."""
    path = Path(path)
    try:
        lines = [ln.strip() for ln in path.read_text().splitlines()]
    except OSError as exc:
        raise OSError(f"cannot read series from {path}: {exc}") from exc
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if lines and lines[0].replace(" ", "").lower() == "t,value":
        values = [float(ln.split(",")[1]) for ln in lines[1:]]
    else:
        values = [float(ln) for ln in lines]
    return np.asarray(values, dtype=float)


def write_series(path, values, csv: bool = False) -> None:
    """Write values one per line (``%.17g``), optionally as ``t,value`` CSV."""
    values = np.asarray(values, dtype=float)
    if csv:
        body = "t,value\n" + "".join(f"{t},{v:.17g}\n" for t, v in enumerate(values, start=1))
    else:
        body = "".join(f"{v:.17g}\n" for v in values)
    Path(path).write_text(body)
