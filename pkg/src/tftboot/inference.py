"""Change-point CUSUM tests and unit-root M tests calibrated with the TFT
bootstrap, plus their asymptotic reference distributions.
"""
from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .engine import SMOOTHED_SCHEMES, SchemeConfig, TFTBootstrap, draw_rng
from .series_core import as_series
from .spectral import ZeroVarianceError, flat_top_long_run_variance

MIN_BOOTSTRAP = 99


def _centred_partial_sums(y: np.ndarray) -> np.ndarray:
    """``S_k = sum_{j<=k} (Y(j) - mean)`` for ``k = 1..T`` along the last axis."""
    y = np.asarray(y, dtype=float)
    return np.cumsum(y - y.mean(axis=-1, keepdims=True), axis=-1)


def cusum_statistic(series) -> float:
    """``C_T = max_k |T^{-1/2} sum_{j<=k} (Y(j) - Ybar)|``."""
    y = as_series(series, min_length=2)
    return float(np.abs(_centred_partial_sums(y)).max() / np.sqrt(y.size))


def weighted_cusum(series, kind: str = "type1", param: float = 0.0) -> float:
    """Weighted CUSUM variants.

    ``type1`` (``0 <= alpha < 1/2``) is
    ``max_k T^{2 alpha - 1/2} (k (T-k))^{-alpha} |S_k|``; ``type2``
    (``0 <= beta < 2``) is the Cramer-von-Mises type
    ``T^{-1} sum_{k<T} T^{2 beta - 1} (k (T-k))^{-beta} S_k^2``, i.e. the
    mean of squared ``T^{-1/2}``-normalised partial sums for ``beta = 0``.
    """
    y = as_series(series, min_length=2)
    T = y.size
    s = _centred_partial_sums(y)[:-1]
    k = np.arange(1, T)
    if kind == "type1":
        if not 0.0 <= param < 0.5:
            raise ValueError(f"type1 weight alpha must lie in [0, 1/2), got {param}")
        w = T ** (2 * param - 0.5) / (k * (T - k)) ** param
        return float(np.max(w * np.abs(s), initial=0.0))
    if kind == "type2":
        if not 0.0 <= param < 2.0:
            raise ValueError(f"type2 weight beta must lie in [0, 2), got {param}")
        w = T ** (2 * param - 1) / (k * (T - k)) ** param
        return float(np.sum(w * s**2) / T)
    raise ValueError(f"unknown weighted CUSUM kind {kind!r}; valid: type1, type2")


def estimate_changepoint(series):
    """Change-point location, block means and the residual series.

    The location maximises ``|S_k|`` over ``1 <= k <= T-1`` (smallest
    maximiser on ties).

    Returns
    -------
    k_hat : int
    mu1, mu2 : float
    residuals : ndarray
        ``Y(t) - mu1`` for ``t <= k_hat`` and ``Y(t) - mu2`` afterwards.
    """
    y = as_series(series, min_length=3)
    s = np.abs(_centred_partial_sums(y)[:-1])
    k_hat = int(np.argmax(s)) + 1
    mu1 = float(y[:k_hat].mean())
    mu2 = float(y[k_hat:].mean())
    z = y.copy()
    z[:k_hat] -= mu1
    z[k_hat:] -= mu2
    return k_hat, mu1, mu2, z


def sup_brownian_bridge_cdf(x):
    """``P(sup_t |B(t)| <= x)`` for a standard Brownian bridge.

    Uses ``1 - 2 sum_k (-1)^{k-1} exp(-2 k^2 x^2)`` for ``x >= 1`` and the
    theta-function form ``sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2))``
    below, both truncated once terms fall under 1e-12.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.size)
    for i, v in enumerate(xs):
        if v <= 0:
            out[i] = 0.0
        elif v >= 1.0:
            total, k = 0.0, 1
            while True:
                term = np.exp(-2.0 * k * k * v * v)
                total += term if k % 2 else -term
                if term < 1e-12:
                    break
                k += 1
            out[i] = 1.0 - 2.0 * total
        else:
            total, k = 0.0, 1
            while True:
                term = np.exp(-((2 * k - 1) ** 2) * np.pi**2 / (8.0 * v * v))
                total += term
                if term < 1e-12 * max(total, 1e-300) or k > 200:
                    break
                k += 1
            out[i] = np.sqrt(2.0 * np.pi) / v * total
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(x) == 0 else out


def sup_brownian_bridge_quantile(p: float) -> float:
    """Inverse of :func:`sup_brownian_bridge_cdf` by bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sup_brownian_bridge_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bootstrap_pvalue(stat: float, replicates: np.ndarray, tail: str = "upper") -> float:
    """Add-one p-value ``(1 + #{b: T*_b more extreme than T}) / (B + 1)``."""
    reps = np.asarray(replicates, dtype=float)
    if tail == "upper":
        count = np.count_nonzero(reps >= stat)
    elif tail == "lower":
        count = np.count_nonzero(reps <= stat)
    else:
        raise ValueError("tail must be 'upper' or 'lower'")
    return (1.0 + count) / (reps.size + 1.0)


def _check_test_config(config: SchemeConfig, B: int) -> None:
    if B < MIN_BOOTSTRAP:
        raise ValueError(f"need B >= {MIN_BOOTSTRAP} bootstrap replicates, got {B}")
    if config.scheme not in SMOOTHED_SCHEMES:
        raise ValueError(f"tests need one of {', '.join(SMOOTHED_SCHEMES)}, got {config.scheme}")


@dataclass
class ChangePointResult:
    """Outcome of the bootstrap CUSUM test."""

    statistic: float
    k_hat: int
    mu1: float
    mu2: float
    tau2: float
    studentized: float
    pvalue: float
    asymptotic_pvalue: float
    replicates: np.ndarray = field(repr=False)
    replicate_tau2: np.ndarray = field(repr=False)

    @property
    def B(self) -> int:
        return self.replicates.size

    def replicate_rows(self):
        """Rows ``(replicate, statistic, studentizer)`` followed by the summary row."""
        rows = [
            (b, float(c), float(np.sqrt(t2)))
            for b, (c, t2) in enumerate(zip(self.replicates, self.replicate_tau2))
        ]
        rows.append(("summary", self.statistic, float(np.sqrt(self.tau2))))
        return rows


def changepoint_bootstrap_test(series, config: SchemeConfig, B: int = 500) -> ChangePointResult:
    """Bootstrap CUSUM test for a single change in mean.

    The original statistic is studentized by the flat-top estimate on the
    change-point residuals; each bootstrap statistic
    ``max_k |T^{-1/2} sum_{j<=k} Z*(j)|`` is studentized by the
    long-run variance of its own bootstrap periodogram. Large values reject.
    """
    _check_test_config(config, B)
    y = as_series(series)
    T = y.size
    stat = cusum_statistic(y)
    k_hat, mu1, mu2, z = estimate_changepoint(y)
    if not np.any(z):
        raise ZeroVarianceError("residual series is identically zero")
    tau2 = flat_top_long_run_variance(z)
    studentized = stat / np.sqrt(tau2)

    boot = TFTBootstrap(z, config)
    zstar, _, _, tau2_star = boot.draw_batch(B)
    cstar = np.abs(np.cumsum(zstar, axis=1)).max(axis=1) / np.sqrt(T)
    with np.errstate(divide="ignore", invalid="ignore"):
        stud_star = cstar / np.sqrt(tau2_star)
    return ChangePointResult(
        statistic=stat,
        k_hat=k_hat,
        mu1=mu1,
        mu2=mu2,
        tau2=tau2,
        studentized=float(studentized),
        pvalue=bootstrap_pvalue(studentized, stud_star, "upper"),
        asymptotic_pvalue=float(1.0 - sup_brownian_bridge_cdf(studentized)),
        replicates=stud_star,
        replicate_tau2=tau2_star,
    )


# --- unit root ---------------------------------------------------------------

def _levels(levels) -> np.ndarray:
    y = as_series(levels, min_length=3)
    return y


def rho_hat(levels) -> float:
    """Least-squares ``sum Y(t) Y(t-1) / sum Y(t-1)^2`` for levels ``Y(0..T)``."""
    y = _levels(levels)
    den = np.dot(y[:-1], y[:-1])
    if den <= 0:
        raise ZeroVarianceError("lagged levels are identically zero")
    return float(np.dot(y[1:], y[:-1]) / den)


@dataclass(frozen=True)
class UnitRootStatistics:
    U: float
    MU: float
    MSB: float
    product: float

    def as_tuple(self):
        return self.U, self.MU, self.MSB, self.product


def unit_root_statistics(levels, tau2: float) -> UnitRootStatistics:
    """``U_T``, ``MU_T``, ``MSB_T`` and ``MU_T * MSB_T`` for levels ``Y(0..T)``.

    ``MU_T = (Y(T)^2/T - tau2) / (2 T^{-2} sum Y(t-1)^2)`` and
    ``MSB_T = (T^{-2} sum Y(t-1)^2 / tau2)^{1/2}``.
    """
    if not tau2 > 0:
        raise ValueError(f"tau2 must be positive, got {tau2}")
    y = _levels(levels)
    T = y.size - 1
    lagged = np.dot(y[:-1], y[:-1]) / T**2
    if lagged <= 0:
        raise ZeroVarianceError("lagged levels are identically zero")
    rho = np.dot(y[1:], y[:-1]) / (lagged * T**2)
    U = T * (rho - 1.0)
    MU = (y[-1] ** 2 / T - tau2) / (2.0 * lagged)
    MSB = np.sqrt(lagged / tau2)
    return UnitRootStatistics(float(U), float(MU), float(MSB), float(MU * MSB))


def _batch_unit_root(ystar: np.ndarray, tau2_star: np.ndarray) -> np.ndarray:
    """Statistics for a ``(B, T+1)`` batch of level paths; columns U, MU, MSB, product."""
    T = ystar.shape[1] - 1
    lag = ystar[:, :-1]
    lagged = np.einsum("ij,ij->i", lag, lag) / T**2
    rho = np.einsum("ij,ij->i", ystar[:, 1:], lag) / (lagged * T**2)
    U = T * (rho - 1.0)
    MU = (ystar[:, -1] ** 2 / T - tau2_star) / (2.0 * lagged)
    MSB = np.sqrt(lagged / tau2_star)
    return np.column_stack((U, MU, MSB, MU * MSB))


STAT_NAMES = ("U", "MU", "MSB", "product")


@dataclass
class UnitRootResult:
    """Outcome of the bootstrap unit-root test. All rejections are lower-tail."""

    rho_hat: float
    statistics: UnitRootStatistics
    tau2: float
    pvalues: dict
    asymptotic_pvalue: float
    replicates: np.ndarray = field(repr=False)
    replicate_tau2: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    @property
    def B(self) -> int:
        return self.replicates.shape[0]

    @property
    def pvalue(self) -> float:
        """Bootstrap p-value of ``MU_T``, the primary statistic."""
        return self.pvalues["MU"]

    def replicate_rows(self, statistic: str = "MU"):
        col = STAT_NAMES.index(statistic)
        rows = [
            (b, float(v), float(np.sqrt(t2)))
            for b, (v, t2) in enumerate(zip(self.replicates[:, col], self.replicate_tau2))
        ]
        rows.append(("summary", getattr(self.statistics, statistic), float(np.sqrt(self.tau2))))
        return rows


def unit_root_bootstrap_test(
    levels,
    config: SchemeConfig,
    B: int = 500,
    mean_convention: str = "printed",
) -> UnitRootResult:
    """Bootstrap M unit-root test for levels ``Y(0..T)``.

    The residuals ``V(t) = Y(t) - rho_hat Y(t-1)`` are resampled, an
    independent wild-bootstrap mean is added and the result is integrated
    from ``Y*(0) = Y(0)`` into an I(1) path. Bootstrap statistics use the
    bootstrap-periodogram long-run variance. Small values reject.
    """
    _check_test_config(config, B)
    if mean_convention not in ("printed", "tau2"):
        raise ValueError(f"unknown mean convention {mean_convention!r}; valid: printed, tau2")
    y = _levels(levels)
    T = y.size - 1
    rho = rho_hat(y)
    v = y[1:] - rho * y[:-1]
    vc = v - v.mean()
    tau2 = flat_top_long_run_variance(vc)
    stats = unit_root_statistics(y, tau2)

    boot = TFTBootstrap(v, config)
    zstar, _, _, tau2_star = boot.draw_batch(B)
    scale = 2 * np.pi * tau2 if mean_convention == "printed" else tau2
    w = np.array([draw_rng(config.seed, config.replicate, b, 1).standard_normal() for b in range(B)])
    vstar = zstar + (w * np.sqrt(scale / T))[:, None]
    ystar = np.empty((B, T + 1))
    ystar[:, 0] = y[0]
    ystar[:, 1:] = y[0] + np.cumsum(vstar, axis=1)
    reps = _batch_unit_root(ystar, tau2_star)
    pvalues = {
        name: bootstrap_pvalue(val, reps[:, i], "lower")
        for i, (name, val) in enumerate(zip(STAT_NAMES, stats.as_tuple()))
    }
    return UnitRootResult(
        rho_hat=rho,
        statistics=stats,
        tau2=tau2,
        pvalues=pvalues,
        asymptotic_pvalue=mu_limit_cdf(stats.MU),
        replicates=reps,
        replicate_tau2=tau2_star,
        residuals=v,
    )


# --- asymptotic law of MU_T --------------------------------------------------

def simulate_mu_limit(n_paths: int, grid: int, rng: np.random.Generator, chunk: int = 5000) -> np.ndarray:
    """Draws of ``(W(1)^2 - 1) / (2 int_0^1 W(t)^2 dt)`` from discretised Wiener paths."""
    out = np.empty(n_paths)
    done = 0
    while done < n_paths:
        n = min(chunk, n_paths - done)
        steps = rng.standard_normal((n, grid)) / np.sqrt(grid)
        w = np.cumsum(steps, axis=1)
        # left-point rule: W(0) = 0, W(1/grid), ..., W((grid-1)/grid)
        integral = (np.einsum("ij,ij->i", w, w) - w[:, -1] ** 2) / grid
        out[done : done + n] = (w[:, -1] ** 2 - 1.0) / (2.0 * integral)
        done += n
    return out


MU_TABLE = "mu_limit_quantiles.csv"


@lru_cache(maxsize=1)
def _mu_table() -> tuple[np.ndarray, np.ndarray]:
    text = resources.files("tftboot").joinpath("data", MU_TABLE).read_text()
    rows = [ln.split(",") for ln in text.splitlines() if ln and not ln.startswith(("#", "p,"))]
    p, q = np.array(rows, dtype=float).T
    return p, q


def mu_limit_cdf(x: float) -> float:
    """Tabulated ``P(limit <= x)`` for the ``MU_T`` null limit (linear interpolation)."""
    p, q = _mu_table()
    return float(np.interp(x, q, p, left=0.0, right=1.0))


def write_mu_table(path, n_paths: int = 1_000_000, grid: int = 2048, seed: int = 20100101, levels: int = 2001) -> None:
    """Regenerate the cached quantile table of the ``MU_T`` limit."""
    draws = simulate_mu_limit(n_paths, grid, draw_rng(seed))
    probs = np.linspace(0.0, 1.0, levels)
    quant = np.quantile(draws, probs)
    with open(path, "w", newline="") as fh:
        fh.write(f"# MU_T null limit: {n_paths} discretised Wiener paths, grid {grid}, seed {seed}\n")
        fh.write("p,quantile\n")
        for a, b in zip(probs, quant):
            fh.write(f"{a:.6f},{b:.10g}\n")


# --- serialization -----------------------------------------------------------

REPLICATE_HEADER = ("replicate", "statistic", "studentizer")


def write_replicates_csv(rows, target) -> None:
    """Write ``replicate,statistic,studentizer`` rows to a path, ``"-"`` or a stream."""
    if target == "-":
        _write_rows(rows, sys.stdout)
    elif isinstance(target, (str, Path)):
        try:
            with open(target, "w", newline="") as fh:
                _write_rows(rows, fh)
        except OSError as exc:
            raise OSError(f"cannot write {target}: {exc}") from exc
    else:
        _write_rows(rows, target)


def _write_rows(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPLICATE_HEADER)
    for r, stat, stud in rows:
        w.writerow((r, repr(float(stat)), repr(float(stud))))


def read_replicates_csv(source) -> tuple[list, Optional[tuple]]:
    """Parse a replicate CSV into ``(rows, summary)``."""
    text = Path(source).read_text() if not isinstance(source, io.TextIOBase) else source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != REPLICATE_HEADER:
        raise ValueError(f"unexpected header {header}")
    rows, summary = [], None
    for rec, stat, stud in reader:
        if rec == "summary":
            summary = (float(stat), float(stud))
        else:
            rows.append((int(rec), float(stat), float(stud)))
    return rows, summary
