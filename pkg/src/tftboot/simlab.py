"""Data-generating processes and the achieved size-power (ASP) experiment runner."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .engine import SchemeConfig, draw_rng
from .inference import changepoint_bootstrap_test, unit_root_bootstrap_test
from .spectral import Kernel

BURN_IN = 512
FAMILIES = ("ar1", "garch11", "randomwalk")
INNOVATIONS = ("standard-normal", "centered-exponential")
GARCH_FORMS = ("standard", "printed")


@dataclass(frozen=True)
class ProcessSpec:
    """Data-generating process.

    ``ar1``: ``V(t) = a V(t-1) + e_t``. ``garch11``: ``V(t) = sigma_t e_t`` with
    ``sigma_t^2 = omega + alpha V(t-1)^2 + beta sigma_{t-1}^2`` (``standard``
    form) or ``omega + alpha e_{t-1}^2 + beta sigma_{t-1}^2`` (``printed``
    form). ``randomwalk`` integrates the ``inner`` process as
    ``Y(t) = rho Y(t-1) + V(t)`` from ``Y(0) = 0``, so ``rho = 1`` is a unit
    root. A change-point overlay adds ``shift`` to indices after
    ``change_at``.
    """

    family: str = "ar1"
    a: float = 0.0
    omega: float = 0.3
    alpha: float = 0.7
    beta: float = 0.2
    innovation: str = "standard-normal"
    garch_form: str = "standard"
    change_at: Optional[int] = None
    shift: float = 0.0
    rho: float = 1.0
    inner: Optional["ProcessSpec"] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; valid: {', '.join(FAMILIES)}")
        if self.innovation not in INNOVATIONS:
            raise ValueError(f"unknown innovation law {self.innovation!r}; valid: {', '.join(INNOVATIONS)}")
        if self.family == "ar1" and not abs(self.a) < 1:
            raise ValueError(f"AR coefficient must satisfy |a| < 1, got {self.a}")
        if self.family == "garch11":
            if self.garch_form not in GARCH_FORMS:
                raise ValueError(f"unknown GARCH form {self.garch_form!r}")
            if not (self.omega > 0 and self.alpha >= 0 and self.beta >= 0):
                raise ValueError("GARCH needs omega > 0 and alpha, beta >= 0")
            if self.alpha + self.beta >= 1:
                raise ValueError(f"GARCH alpha + beta must be < 1, got {self.alpha + self.beta}")
        if self.family == "randomwalk" and self.inner is not None and self.inner.family == "randomwalk":
            raise ValueError("random walk cannot wrap another random walk")


def innovations(law: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance innovations; ``centered-exponential`` is ``Exp(1) - 1``."""
    if law == "standard-normal":
        return rng.standard_normal(size)
    if law == "centered-exponential":
        return rng.standard_exponential(size) - 1.0
    raise ValueError(f"unknown innovation law {law!r}")


def _ar1(a: float, e: np.ndarray) -> np.ndarray:
    out = np.empty_like(e)
    prev = 0.0
    for t, et in enumerate(e):
        prev = a * prev + et
        out[t] = prev
    return out


def _garch(spec: ProcessSpec, e: np.ndarray) -> np.ndarray:
    om, al, be = spec.omega, spec.alpha, spec.beta
    out = np.empty_like(e)
    if spec.garch_form == "standard":
        sig2 = om / (1.0 - al - be)
        prev_v = 0.0
        for t, et in enumerate(e):
            if t:
                sig2 = om + al * prev_v**2 + be * sig2
            prev_v = np.sqrt(sig2) * et
            out[t] = prev_v
    else:
        sig2 = (om + al) / (1.0 - be)
        prev_e = 0.0
        for t, et in enumerate(e):
            if t:
                sig2 = om + al * prev_e**2 + be * sig2
            out[t] = np.sqrt(sig2) * et
            prev_e = et
    return out


def _stationary(spec: ProcessSpec, T: int, rng: np.random.Generator) -> np.ndarray:
    if spec.family == "ar1":
        if spec.a == 0.0:
            return innovations(spec.innovation, T, rng)
        e = innovations(spec.innovation, T + BURN_IN, rng)
        return _ar1(spec.a, e)[BURN_IN:]
    e = innovations(spec.innovation, T + BURN_IN, rng)
    return _garch(spec, e)[BURN_IN:]


def generate(spec: ProcessSpec, T: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a series of length ``T`` (``T + 1`` levels ``Y(0..T)`` for ``randomwalk``)."""
    if T < 2:
        raise ValueError("T must be at least 2")
    if spec.family == "randomwalk":
        inner = spec.inner or ProcessSpec("ar1", 0.0, innovation=spec.innovation)
        v = _stationary(inner, T, rng)
        y = np.zeros(T + 1)
        for t in range(1, T + 1):
            y[t] = spec.rho * y[t - 1] + v[t - 1]
        return y
    v = _stationary(spec, T, rng)
    if spec.change_at is not None:
        if not 1 <= spec.change_at <= T - 1:
            raise ValueError(f"change point must lie in 1..{T - 1}")
        v = v.copy()
        v[spec.change_at :] += spec.shift
    return v


# --- ASP curves -------------------------------------------------------------

DEFAULT_GRID = tuple(np.round(np.arange(1, 101) / 100, 10))


@dataclass
class ASPCurve:
    """Achieved size and size-corrected power over a grid of nominal levels."""

    nominal: np.ndarray
    size: np.ndarray
    power: np.ndarray
    R: int
    B: int
    pvalues_h0: Optional[np.ndarray] = field(default=None, repr=False)
    pvalues_h1: Optional[np.ndarray] = field(default=None, repr=False)

    def at(self, level: float) -> tuple[float, float]:
        i = int(np.argmin(np.abs(self.nominal - level)))
        return float(self.size[i]), float(self.power[i])


def asp_curve(p0, p1, grid=DEFAULT_GRID, B: int = 0) -> ASPCurve:
    """Size curve ``F0(a)`` and size-corrected power ``F1(q0(a))``.

    ``F0``, ``F1`` are the empirical distribution functions of the null and
    alternative p-values and ``q0(a) = inf{x : F0(x) >= a}``; at ``a = 1``
    the quantile is taken as 1 so both curves end at one.
    """
    p0 = np.sort(np.asarray(p0, dtype=float))
    p1 = np.sort(np.asarray(p1, dtype=float))
    grid = np.asarray(grid, dtype=float)
    R = p0.size
    size = np.searchsorted(p0, grid, side="right") / R
    idx = np.clip(np.ceil(grid * R - 1e-9).astype(int) - 1, 0, R - 1)
    q = np.where(grid >= 1.0, 1.0, p0[idx])
    power = np.searchsorted(p1, q, side="right") / p1.size
    return ASPCurve(grid, size, power, R, B, p0, p1)


def _one_rep(args):
    spec, T, test, config, B, rep, seed, mean_convention = args
    rng = draw_rng(seed, rep, 0)
    data = generate(spec, T, rng)
    cfg = replace(config, seed=seed, replicate=rep + 1_000_000)
    if test == "cpt":
        return changepoint_bootstrap_test(data, cfg, B).pvalue
    return unit_root_bootstrap_test(data, cfg, B, mean_convention=mean_convention).pvalue


def simulate_pvalues(
    spec: ProcessSpec,
    T: int,
    test: str,
    config: SchemeConfig,
    R: int,
    B: int,
    seed: int,
    map_fn: Callable = map,
    mean_convention: str = "printed",
) -> np.ndarray:
    """Bootstrap p-values of ``R`` independent data sets, ordered by repetition index.

    ``map_fn`` evaluates the repetitions; pass a pool's ``map`` to run them
    in parallel. Each repetition owns its seed stream, so the result does
    not depend on how the work is scheduled.
    """
    if test not in ("cpt", "unitroot"):
        raise ValueError(f"unknown test {test!r}; valid: cpt, unitroot")
    jobs = [(spec, T, test, config, B, r, seed, mean_convention) for r in range(R)]
    return np.array(list(map_fn(_one_rep, jobs)), dtype=float)


def run_asp(
    spec0: ProcessSpec,
    spec1: ProcessSpec,
    test: str,
    config: SchemeConfig,
    T: int = 200,
    R: int = 500,
    B: int = 500,
    seed: Optional[int] = None,
    grid=DEFAULT_GRID,
    map_fn: Callable = map,
    mean_convention: str = "printed",
) -> ASPCurve:
    """ASP experiment: ``R`` null and ``R`` alternative data sets, ``B`` bootstrap draws each.

    Null and alternative use separate seed streams derived from ``seed``
    (``config.seed`` when omitted).
    """
    if R < 100:
        raise ValueError("ASP needs R >= 100 repetitions")
    if B < 99:
        raise ValueError("ASP needs B >= 99 bootstrap replicates")
    seed = config.seed if seed is None else seed
    s0, s1 = (int(draw_rng(seed, h).integers(0, 2**63)) for h in (0, 1))
    p0 = simulate_pvalues(spec0, T, test, config, R, B, s0, map_fn, mean_convention)
    p1 = simulate_pvalues(spec1, T, test, config, R, B, s1, map_fn, mean_convention)
    return asp_curve(p0, p1, grid, B)


ASP_HEADER = ("nominal", "size", "power", "R", "B")


def emit_asp_csv(curve: ASPCurve, path) -> None:
    """Write ``nominal,size,power,R,B`` rows with 12 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ASP_HEADER)
            for a, s, p in zip(curve.nominal, curve.size, curve.power):
                w.writerow((f"{a:.12g}", f"{s:.12g}", f"{p:.12g}", curve.R, curve.B))
    except OSError as exc:
        raise OSError(f"cannot write ASP curve to {path}: {exc}") from exc


def read_asp_csv(path) -> ASPCurve:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != ASP_HEADER:
            raise ValueError(f"unexpected ASP header {header}")
        rows = list(reader)
    if not rows:
        return ASPCurve(np.empty(0), np.empty(0), np.empty(0), 0, 0)
    arr = np.array([[float(v) for v in r[:3]] for r in rows])
    return ASPCurve(arr[:, 0], arr[:, 1], arr[:, 2], int(rows[0][3]), int(rows[0][4]))


def write_pvalues(path, p0, p1) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rep", "p_h0", "p_h1"))
        for r, (a, b) in enumerate(zip(p0, p1)):
            w.writerow((r, repr(float(a)), repr(float(b))))


# --- experiment config files --------------------------------------------------

@dataclass
class Experiment:
    """Parsed ``key = value`` experiment description."""

    test: str = "cpt"
    scheme: str = "rb"
    kernel: str = "bpk"
    h: float = 0.01
    T: int = 200
    R: int = 500
    B: int = 500
    seed: int = 1
    family: str = "ar1"
    a: float = 0.0
    innovation: str = "centered-exponential"
    omega: float = 0.3
    alpha: float = 0.7
    beta: float = 0.2
    garch_form: str = "standard"
    change_at: Optional[int] = None
    shift: float = 0.0
    rho: float = 0.95
    mean_convention: str = "printed"
    full_scale: bool = False

    def specs(self) -> tuple[ProcessSpec, ProcessSpec]:
        base = ProcessSpec(
            self.family if self.family != "randomwalk" else "ar1",
            a=self.a,
            omega=self.omega,
            alpha=self.alpha,
            beta=self.beta,
            innovation=self.innovation,
            garch_form=self.garch_form,
        )
        if self.test == "cpt":
            k = self.change_at if self.change_at is not None else self.T // 2
            return base, replace(base, change_at=k, shift=self.shift)
        return (
            ProcessSpec("randomwalk", innovation=self.innovation, rho=1.0, inner=base),
            ProcessSpec("randomwalk", innovation=self.innovation, rho=self.rho, inner=base),
        )

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(self.scheme, Kernel.from_name(self.kernel, self.h), seed=self.seed)

    def counts(self) -> tuple[int, int]:
        return (1000, 1000) if self.full_scale else (self.R, self.B)


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_experiment(text: str) -> Experiment:
    """Parse ``key = value`` lines; ``#`` starts a comment, keys are the
    :class:`Experiment` field names (dashes allowed for underscores).
    """
    exp = Experiment()
    types = {f: type(getattr(exp, f)) for f in exp.__dataclass_fields__}
    types["change_at"] = int
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in types:
            raise ValueError(f"line {n}: unknown key {key!r}")
        kind = types[key]
        if kind is bool:
            if value.lower() not in _BOOL:
                raise ValueError(f"line {n}: expected boolean for {key}")
            setattr(exp, key, _BOOL[value.lower()])
        else:
            setattr(exp, key, kind(value))
    return exp


def load_experiment(path) -> Experiment:
    return parse_experiment(Path(path).read_text())


def write_manifest(path, **entries) -> None:
    Path(path).write_text(json.dumps(entries, indent=2, sort_keys=True, default=str) + "\n")


def experiment_manifest(exp: Experiment) -> dict:
    R, B = exp.counts()
    out = asdict(exp)
    out.update(R=R, B=B)
    return out
