"""Frequency-domain resampling schemes and the time-frequency toggle pipeline.

Each scheme produces starred coefficients ``x*(j), y*(j)`` for
``j = 1..N``. The mean slot ``j = T`` and, for even ``T``, the Nyquist slot
are zero, the remaining indices follow conjugate symmetry, and the inverse
transform returns a real, exactly centred bootstrap series ``Z*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .series_core import (
    FourierCoefficients,
    InvalidSeriesError,
    as_series,
    extended_arrays,
    forward_coefficients,
    from_half_spectrum,
    half_spectrum_inverse,
)
from .spectral import (
    Kernel,
    SpectralEstimate,
    floored,
    folded_weights,
    lattice_weights,
    spectral_density_from_coefficients,
)

SCHEMES = ("RB", "WB", "LB", "NSWB", "SURROGATE")
SMOOTHED_SCHEMES = ("RB", "WB", "LB")
MEAN_CONVENTIONS = ("printed", "tau2")


class TooShortError(InvalidSeriesError):
    """Residual standardization needs at least two frequencies."""


def draw_rng(seed: int, *ids: int) -> np.random.Generator:
    """Independent generator for ``(seed, ids...)``.

    Streams for distinct id tuples are statistically independent and do not
    depend on the order in which they are created, so replicates can be
    generated in parallel and merged by id.
    """
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class SchemeConfig:
    """Resampling configuration.

    ``kernel`` is required for RB, WB and LB. ``m`` is the NSWB resample
    length, defaulting to ``ceil(sqrt(T))`` when left as ``None``.
    """

    scheme: str = "RB"
    kernel: Optional[Kernel] = field(default_factory=Kernel)
    m: Optional[int] = None
    seed: int = 0
    replicate: int = 0

    def __post_init__(self):
        scheme = self.scheme.upper()
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; valid: {', '.join(s.lower() for s in SCHEMES)}")
        object.__setattr__(self, "scheme", scheme)
        if scheme in SMOOTHED_SCHEMES and self.kernel is None:
            raise ValueError(f"scheme {scheme} requires a kernel")
        if self.m is not None and self.m < 1:
            raise ValueError("subsample length m must be positive")

    def subsample_length(self, T: int) -> int:
        if self.scheme != "NSWB":
            return T
        m = int(np.ceil(np.sqrt(T))) if self.m is None else self.m
        if not 1 <= m <= T:
            raise ValueError(f"NSWB subsample length must lie in 1..{T}, got {m}")
        return m

    def rng(self, *extra: int) -> np.random.Generator:
        return draw_rng(self.seed, self.replicate, *extra)


@dataclass(frozen=True)
class BootstrapDraw:
    """One bootstrap replicate: starred coefficients and the series ``Z*``."""

    coefficients: FourierCoefficients
    series: np.ndarray
    scheme: str
    tau2: Optional[float] = None


# --- individual schemes ----------------------------------------------------

def _amplitudes(fhat: SpectralEstimate) -> np.ndarray:
    N = (fhat.T - 1) // 2
    return np.sqrt(np.pi * floored(np.asarray(fhat.values))[1 : N + 1])


def standardized_residuals(coeffs: FourierCoefficients, fhat: SpectralEstimate) -> np.ndarray:
    """RB residuals ``s_1..s_{2N}``: coefficients over ``sqrt(pi f(lambda_j))``,
    standardized to mean 0 and (population) variance 1.
    """
    N = coeffs.N
    if N < 2:
        raise TooShortError(f"residual bootstrap needs N >= 2, got N={N}")
    a = _amplitudes(fhat)
    raw = np.concatenate((coeffs.x[:N] / a, coeffs.y[:N] / a))
    centred = raw - raw.mean()
    sd = np.sqrt(np.mean(centred**2))
    if sd == 0:
        raise TooShortError("residuals are constant; cannot standardize")
    return centred / sd


def resample_rb(coeffs: FourierCoefficients, fhat: SpectralEstimate, rng: np.random.Generator):
    """Residual-based bootstrap: i.i.d. draws from the standardized residuals.

    Returns ``(x*, y*)`` for ``j = 1..N``.
    """
    s = standardized_residuals(coeffs, fhat)
    return _rb_from_residuals(s, _amplitudes(fhat), rng)


def _rb_from_residuals(s, amp, rng):
    N = amp.size
    star = s[rng.integers(0, 2 * N, size=2 * N)]
    return amp * star[:N], amp * star[N:]


def resample_wb(fhat: SpectralEstimate, rng: np.random.Generator):
    """Wild bootstrap: ``x*(j) = sqrt(pi f(lambda_j)) G_j`` with ``G`` standard normal."""
    return _wb_from_amplitudes(_amplitudes(fhat), rng)


def _wb_from_amplitudes(amp, rng):
    N = amp.size
    g = rng.standard_normal(2 * N)
    return amp * g[:N], amp * g[N:]


@dataclass(frozen=True)
class _LocalTable:
    """Neighbour values ``x(j+s), y(j+s)`` for ``j = 1..N`` and every offset ``s`` with weight."""

    offsets: np.ndarray
    weights: np.ndarray
    cdf: np.ndarray
    nx: np.ndarray
    ny: np.ndarray
    centre: np.ndarray


def _local_table(coeffs: FourierCoefficients, kernel: Kernel) -> _LocalTable:
    s, p = lattice_weights(kernel, coeffs.T)
    N = coeffs.N
    idx = np.arange(1, N + 1)[:, None] + s[None, :]
    nx, ny = extended_arrays(coeffs, idx)
    centre = 0.5 * (nx + ny) @ p
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return _LocalTable(s, p, cdf, nx, ny, centre)


def _lb_from_table(tab: _LocalTable, rng):
    N = tab.nx.shape[0]
    rows = np.arange(N)
    col = np.searchsorted(tab.cdf, rng.random(2 * N), side="right")
    col = np.minimum(col, tab.cdf.size - 1)
    swap = rng.integers(0, 2, size=2 * N).astype(bool)
    cx, cy = col[:N], col[N:]
    xt = np.where(swap[:N], tab.ny[rows, cx], tab.nx[rows, cx])
    yt = np.where(swap[N:], tab.nx[rows, cy], tab.ny[rows, cy])
    return xt - tab.centre, yt - tab.centre


def resample_lb(coeffs: FourierCoefficients, kernel: Kernel, rng: np.random.Generator):
    """Local bootstrap: each starred coefficient is a randomly chosen
    neighbouring coefficient (real or imaginary part with probability 1/2),
    centred by its conditional mean.
    """
    return _lb_from_table(_local_table(coeffs, kernel), rng)


def resample_nswb(coeffs: FourierCoefficients, rng: np.random.Generator):
    """Nonsmoothed wild bootstrap via Box-Muller factors on the raw coefficients."""
    N = coeffs.N
    return _nswb(coeffs.x[:N], coeffs.y[:N], rng)


def _nswb(x, y, rng):
    N = x.size
    u_tilde = 1.0 - rng.random(N)  # in (0, 1]
    u = rng.random(N)
    r = np.sqrt(-2.0 * np.log(u_tilde))
    return x * r * np.cos(2 * np.pi * u), y * r * np.sin(2 * np.pi * u)


def resample_surrogate(coeffs: FourierCoefficients, rng: np.random.Generator):
    """Phase randomization: keeps ``I(j)`` and draws a uniform phase."""
    N = coeffs.N
    amp = np.sqrt(coeffs.x[:N] ** 2 + coeffs.y[:N] ** 2)
    return _surrogate(amp, rng)


def _surrogate(amp, rng):
    phase = 2 * np.pi * rng.random(amp.size)
    return amp * np.cos(phase), amp * np.sin(phase)


# --- pipeline ----------------------------------------------------------------

class TFTBootstrap:
    """Prepared resampler for one series and configuration.

    Everything that depends only on the data (coefficients, spectral
    estimate, residuals, neighbour tables) is computed once; each call to
    :meth:`draw_half` consumes only the supplied generator.

    Parameters
    ----------
    series : array_like
        Observations, length ``T >= 4``. The series is centred internally;
        only coefficients ``j = 1..N`` are used.
    config : SchemeConfig
    """

    def __init__(self, series, config: SchemeConfig):
        v = as_series(series)
        self.config = config
        self.T = v.size
        self.N = (self.T - 1) // 2
        self.m = config.subsample_length(self.T)
        self.coeffs = forward_coefficients(v)
        self.fhat: Optional[SpectralEstimate] = None
        self._tau_weights = None
        scheme = config.scheme
        if config.kernel is not None and scheme in SMOOTHED_SCHEMES:
            self._tau_weights = folded_weights(config.kernel, self.T)
        if scheme in ("RB", "WB"):
            self.fhat = spectral_density_from_coefficients(self.coeffs, config.kernel)
            self._amp = _amplitudes(self.fhat)
            if scheme == "RB":
                self._resid = standardized_residuals(self.coeffs, self.fhat)
        elif scheme == "LB":
            self._table = _local_table(self.coeffs, config.kernel)
        elif scheme == "SURROGATE":
            N = self.N
            self._amp = np.sqrt(self.coeffs.x[:N] ** 2 + self.coeffs.y[:N] ** 2)

    def draw_half(self, rng: np.random.Generator):
        """Starred coefficients ``(x*, y*)`` for ``j = 1..N``."""
        scheme = self.config.scheme
        if scheme == "RB":
            return _rb_from_residuals(self._resid, self._amp, rng)
        if scheme == "WB":
            return _wb_from_amplitudes(self._amp, rng)
        if scheme == "LB":
            return _lb_from_table(self._table, rng)
        if scheme == "NSWB":
            return _nswb(self.coeffs.x[: self.N], self.coeffs.y[: self.N], rng)
        return _surrogate(self._amp, rng)

    def tau2(self, x_half, y_half) -> Optional[np.ndarray]:
        """Bootstrap long-run variance from the starred periodogram (smoothed schemes only)."""
        if self._tau_weights is None:
            return None
        return (x_half**2 + y_half**2) @ self._tau_weights

    def draw(self, rng: np.random.Generator) -> BootstrapDraw:
        xs, ys = self.draw_half(rng)
        z = half_spectrum_inverse(xs, ys, self.T)[: self.m]
        tau2 = self.tau2(xs, ys)
        return BootstrapDraw(
            from_half_spectrum(xs, ys, self.T),
            z,
            self.config.scheme,
            None if tau2 is None else float(tau2),
        )

    def draw_batch(self, B: int, rngs=None):
        """``B`` replicates as arrays.

        Replicate ``b`` uses ``config.rng(b)`` unless ``rngs`` is given.

        Returns
        -------
        z : ndarray, shape (B, m)
        x, y : ndarray, shape (B, N)
        tau2 : ndarray of shape (B,) or None
        """
        if rngs is None:
            rngs = (self.config.rng(b) for b in range(B))
        xs = np.empty((B, self.N))
        ys = np.empty((B, self.N))
        for b, rng in enumerate(rngs):
            xs[b], ys[b] = self.draw_half(rng)
        z = half_spectrum_inverse(xs, ys, self.T)[:, : self.m]
        return z, xs, ys, self.tau2(xs, ys)


def tft_bootstrap(series, config: SchemeConfig, rng: Optional[np.random.Generator] = None) -> BootstrapDraw:
    """One TFT bootstrap replicate of ``series``.

    Without an explicit ``rng`` the draw is determined by
    ``(config.seed, config.replicate)``. For NSWB the returned series has
    length ``m``.
    """
    if rng is None:
        rng = config.rng()
    return TFTBootstrap(series, config).draw(rng)


def with_bootstrap_mean(
    draw: BootstrapDraw | np.ndarray,
    tau2: float,
    rng: np.random.Generator,
    convention: str = "printed",
) -> np.ndarray:
    """Add an independent wild-bootstrap mean to a centred replicate.

    ``mu* = W sqrt(2 pi tau2 / T)`` under the ``"printed"`` convention and
    ``mu* = W sqrt(tau2 / T)`` under ``"tau2"``, with ``W`` standard normal.
    """
    if convention not in MEAN_CONVENTIONS:
        raise ValueError(f"unknown mean convention {convention!r}; valid: {', '.join(MEAN_CONVENTIONS)}")
    if not tau2 > 0:
        raise ValueError(f"tau2 must be positive, got {tau2}")
    z = draw.series if isinstance(draw, BootstrapDraw) else np.asarray(draw, dtype=float)
    T = z.shape[-1]
    scale = 2 * np.pi * tau2 if convention == "printed" else tau2
    return z + rng.standard_normal() * np.sqrt(scale / T)


def bootstrap_mean_shifts(B: int, T: int, tau2: float, rngs, convention: str = "printed") -> np.ndarray:
    """Vector of ``B`` mean shifts ``mu*``, one per generator in ``rngs``."""
    scale = 2 * np.pi * tau2 if convention == "printed" else tau2
    w = np.array([rng.standard_normal() for rng in rngs])
    if w.size != B:
        raise ValueError("need one generator per replicate")
    return w * np.sqrt(scale / T)


@dataclass
class MomentReport:
    """Empirical frequency-domain moments over ``B`` draws.

    Per-slot arrays cover the ``2N`` slots ``x*(1..N), y*(1..N)``.
    """

    B: int
    mean: np.ndarray
    variance: np.ndarray
    fourth_moment: np.ndarray
    target_variance: np.ndarray
    max_abs_mean: float
    max_mean_in_se: float
    max_variance_gap: float
    relative_variance_gap: float
    max_fourth_moment: float
    max_cross_correlation: float

    def summary(self) -> dict:
        return {
            "B": self.B,
            "max_abs_mean": self.max_abs_mean,
            "max_mean_in_se": self.max_mean_in_se,
            "max_variance_gap": self.max_variance_gap,
            "relative_variance_gap": self.relative_variance_gap,
            "max_fourth_moment": self.max_fourth_moment,
            "max_cross_correlation": self.max_cross_correlation,
        }


def diagnose_meta_assumptions(series, config: SchemeConfig, B: int = 1000, chunk: int = 10000) -> MomentReport:
    """Monte Carlo moments of the starred coefficients.

    Reports the largest absolute mean (also in Monte Carlo standard errors),
    the largest gap between the empirical variance and ``pi f(lambda_j)``,
    the largest fourth moment and the largest absolute correlation between
    two distinct slots. No verdict is attached.
    """
    if B < 100:
        raise ValueError("diagnostics need B >= 100")
    boot = TFTBootstrap(series, config)
    N = boot.N
    kernel = config.kernel if config.kernel is not None else Kernel()
    fhat = boot.fhat or spectral_density_from_coefficients(boot.coeffs, kernel)
    target = np.pi * floored(np.asarray(fhat.values))[1 : N + 1]
    target = np.concatenate((target, target))

    s1 = np.zeros(2 * N)
    s2 = np.zeros(2 * N)
    s4 = np.zeros(2 * N)
    cross = np.zeros((2 * N, 2 * N))
    done = 0
    while done < B:
        n = min(chunk, B - done)
        block = np.empty((n, 2 * N))
        for i in range(n):
            xs, ys = boot.draw_half(config.rng(done + i))
            block[i, :N] = xs
            block[i, N:] = ys
        s1 += block.sum(0)
        s2 += (block**2).sum(0)
        s4 += (block**4).sum(0)
        cross += block.T @ block
        done += n
    mean = s1 / B
    var = s2 / B - mean**2
    cov = cross / B - np.outer(mean, mean)
    sd = np.sqrt(np.maximum(np.diag(cov), 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
        se = np.where(sd > 0, np.abs(mean) / (sd / np.sqrt(B)), 0.0)
    off = corr[~np.eye(2 * N, dtype=bool)]
    off = off[np.isfinite(off)]
    gap = np.abs(var - target)
    return MomentReport(
        B=B,
        mean=mean,
        variance=var,
        fourth_moment=s4 / B,
        target_variance=target,
        max_abs_mean=float(np.abs(mean).max()),
        max_mean_in_se=float(se.max()),
        max_variance_gap=float(gap.max()),
        relative_variance_gap=float(gap.max() / target.max()),
        max_fourth_moment=float((s4 / B).max()),
        max_cross_correlation=float(np.abs(off).max(initial=0.0)),
    )

