"""Parameter estimation from photon-count spectra.

Expected counts at grid point i are ``amplitude * F_i(params) + offset`` with
``F`` one of the spectrum models.  The temperature is sampled in log space,
which together with a flat prior in the sampled coordinate gives the
log-uniform temperature prior; every other parameter has a uniform prior on a
bounded interval.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import least_squares
from scipy.special import gammaln

from .errors import (ConvergenceError, DarkThermoError, DegenerateFitError, FitBoundError,
                     InvalidParameterError, TemperatureUnboundedError)
from .levels import DriveConfig, LevelSystem, ZeemanField, build_ca40_system
from .spectrum import (DEFAULT_NODES, BeamGeometry, spectrum_cold, spectrum_thermal_effective,
                       spectrum_thermal_quadrature)

PARAM_NAMES = (
    "temperature_mk",
    "rabi_397_mhz",
    "rabi_866_mhz",
    "detuning_397_mhz",
    "b_field_t",
    "linewidth_397_mhz",
    "linewidth_866_mhz",
    "amplitude_counts",
    "offset_counts",
)


@dataclass(frozen=True)
class Prior:
    low: float
    high: float
    log: bool = False

    def contains(self, x) -> bool:
        return self.low <= x <= self.high


DEFAULT_PRIORS = {
    "temperature_mk": Prior(0.01, 1000.0, log=True),
    "rabi_397_mhz": Prior(0.0, 100.0),
    "rabi_866_mhz": Prior(0.0, 100.0),
    "detuning_397_mhz": Prior(-100.0, 100.0),
    "b_field_t": Prior(0.0, 1e-2),
    "linewidth_397_mhz": Prior(0.0, 5.0),
    "linewidth_866_mhz": Prior(0.0, 5.0),
    "amplitude_counts": Prior(0.0, 1e9),
    "offset_counts": Prior(0.0, 1e9),
}

# typical scale of each sampled coordinate, used for initial proposals and
# for conditioning checks
_SCALES = {
    "temperature_mk": 0.1,  # in log space
    "rabi_397_mhz": 0.2,
    "rabi_866_mhz": 0.2,
    "detuning_397_mhz": 0.2,
    "b_field_t": 2e-6,
    "linewidth_397_mhz": 0.02,
    "linewidth_866_mhz": 0.02,
    "amplitude_counts": None,  # relative, 1 %
    "offset_counts": None,
}


@dataclass(frozen=True)
class FitParameters:
    """Model parameters plus the set of names that are free in a fit."""

    temperature_mk: float = 1.0
    rabi_397_mhz: float = 12.0
    rabi_866_mhz: float = 8.0
    detuning_397_mhz: float = -14.0
    b_field_t: float = 4.7e-4
    linewidth_397_mhz: float = 0.45
    linewidth_866_mhz: float = 0.49
    amplitude_counts: float = 1.0
    offset_counts: float = 0.0
    free: tuple = ("temperature_mk",)

    def __post_init__(self):
        unknown = set(self.free) - set(PARAM_NAMES)
        if unknown:
            raise InvalidParameterError(f"unknown free parameters: {sorted(unknown)}")
        if not self.temperature_mk >= 0:
            raise InvalidParameterError("temperature must be >= 0")
        object.__setattr__(self, "free", tuple(n for n in PARAM_NAMES if n in set(self.free)))

    def as_dict(self) -> dict:
        return {n: float(getattr(self, n)) for n in PARAM_NAMES}

    def replace(self, **kw) -> FitParameters:
        return dataclasses.replace(self, **kw)

    @property
    def frozen(self) -> tuple:
        return tuple(n for n in PARAM_NAMES if n not in self.free)


@dataclass
class SpectrumModel:
    """Maps :class:`FitParameters` to expected counts on a detuning grid."""

    grid: np.ndarray
    method: str = "effective"
    system: LevelSystem = field(default_factory=build_ca40_system)
    geometry: BeamGeometry = field(default_factory=BeamGeometry)
    nodes: int = DEFAULT_NODES
    threads: int = 1
    backend: str | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if self.method not in ("cold", "effective", "quadrature"):
            raise InvalidParameterError(f"unknown spectrum method {self.method!r}")

    def fluorescence(self, p: FitParameters) -> np.ndarray:
        a = DriveConfig(p.detuning_397_mhz, p.rabi_397_mhz, self.geometry.wavelength_a_nm,
                        p.linewidth_397_mhz)
        b = DriveConfig(0.0, p.rabi_866_mhz, self.geometry.wavelength_b_nm, p.linewidth_866_mhz)
        fld = ZeemanField(p.b_field_t)
        kw = dict(threads=self.threads, backend=self.backend)
        if self.method == "cold":
            return spectrum_cold(self.system, a, b, fld, self.grid, **kw).fluorescence
        if self.method == "effective":
            return spectrum_thermal_effective(self.system, a, b, fld, self.grid, p.temperature_mk,
                                              self.geometry, **kw).fluorescence
        return spectrum_thermal_quadrature(self.system, a, b, fld, self.grid, p.temperature_mk,
                                           self.geometry, self.nodes, **kw).fluorescence

    def expected_counts(self, p: FitParameters) -> np.ndarray:
        return p.amplitude_counts * self.fluorescence(p) + p.offset_counts


@dataclass
class FitResult:
    params: FitParameters
    errors: dict
    intervals: dict
    samples: np.ndarray | None
    sample_names: tuple
    deviance: float
    acceptance_rate: float | None = None
    rhat: dict = field(default_factory=dict)
    method: str = "mcmc"
    model: str = "effective"
    lower_bound_mk: float | None = None
    n_evaluations: int = 0

    @property
    def temperature_mk(self) -> float:
        return self.params.temperature_mk

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "model": self.model,
            "params": self.params.as_dict(),
            "free": list(self.params.free),
            "errors": {k: float(v) for k, v in self.errors.items()},
            "intervals_68": {k: [float(v[0]), float(v[1])] for k, v in self.intervals.items()},
            "poisson_deviance": float(self.deviance),
            "acceptance_rate": self.acceptance_rate,
            "rhat": {k: float(v) for k, v in self.rhat.items()},
            "lower_bound_mk": self.lower_bound_mk,
            "n_evaluations": self.n_evaluations,
        }
        return out


def _counts(data):
    return np.asarray(data.counts, dtype=float)


def poisson_log_likelihood(data, params: FitParameters, model: SpectrumModel) -> float:
    """``sum_i n_i ln mu_i - mu_i - ln n_i!`` for the expected counts ``mu``."""
    mu = model.expected_counts(params)
    if not np.all(mu > 0):
        raise InvalidParameterError("expected counts must be positive at every grid point")
    n = _counts(data)
    return float(np.sum(n * np.log(mu) - mu - gammaln(n + 1.0)))


def poisson_deviance(counts, mu) -> float:
    n = np.asarray(counts, dtype=float)
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(n > 0, n * np.log(n / mu), 0.0)
    return float(2.0 * np.sum(term - (n - mu)))


# ---------------------------------------------------------------- coordinates

class _Coords:
    """Free-parameter coordinates: log for log-priors, identity otherwise."""

    def __init__(self, base: FitParameters, priors: dict):
        self.base = base
        self.names = base.free
        self.priors = {n: priors.get(n, DEFAULT_PRIORS[n]) for n in PARAM_NAMES}
        self.is_log = np.array([self.priors[n].log for n in self.names])

    def to_z(self, p: FitParameters) -> np.ndarray:
        x = np.array([getattr(p, n) for n in self.names], dtype=float)
        x[self.is_log] = np.log(np.maximum(x[self.is_log], 1e-300))
        return x

    def to_x(self, z) -> np.ndarray:
        x = np.array(z, dtype=float)
        x[..., self.is_log] = np.exp(x[..., self.is_log])
        return x

    def to_params(self, z) -> FitParameters:
        x = self.to_x(z)
        return self.base.replace(**{n: float(v) for n, v in zip(self.names, x)})

    def in_support(self, z) -> bool:
        x = self.to_x(z)
        return all(self.priors[n].contains(v) for n, v in zip(self.names, x))

    def bounds(self):
        lo, hi = [], []
        for n, lg in zip(self.names, self.is_log):
            pr = self.priors[n]
            lo.append(math.log(pr.low) if lg else pr.low)
            hi.append(math.log(pr.high) if lg else pr.high)
        return np.array(lo), np.array(hi)

    def scales(self, p: FitParameters) -> np.ndarray:
        out = []
        for n in self.names:
            s = _SCALES[n]
            out.append(s if s is not None else max(0.01 * abs(getattr(p, n)), 1.0))
        return np.array(out)

    def to_natural_errors(self, z, cov) -> dict:
        x = self.to_x(z)
        sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
        return {n: float(s * (xi if lg else 1.0))
                for n, s, xi, lg in zip(self.names, sd, x, self.is_log)}


def _check_data(data, min_points=10):
    n = _counts(data)
    if n.size < min_points:
        raise InvalidParameterError(f"need at least {min_points} data points, got {n.size}")
    return n


# ---------------------------------------------------------------- MCMC

@dataclass(frozen=True)
class McmcSettings:
    n_chains: int = 4
    n_burn: int = 300
    n_steps: int = 600
    max_steps: int = 2400
    thin: int = 1
    adapt_every: int = 50
    seed: int = 0
    rhat_max: float = 1.1
    #: upper part of the log-temperature prior range treated as its "edge"
    upper_edge_fraction: float = 0.1
    edge_mass_limit: float = 0.05


def split_rhat(chains: np.ndarray) -> np.ndarray:
    """Split-chain potential scale reduction for ``chains`` of shape (m, n, d)."""
    m, n, d = chains.shape
    half = n // 2
    if half < 2:
        return np.full(d, np.inf)
    parts = np.concatenate([chains[:, :half], chains[:, n - half:]], axis=0)
    means = parts.mean(axis=1)
    W = parts.var(axis=1, ddof=1).mean(axis=0)
    B = half * means.var(axis=0, ddof=1)
    var_plus = (half - 1) / half * W + B / half
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(var_plus / W)
    return np.where(W > 0, r, np.where(B > 0, np.inf, 1.0))


def _run_chain(logpost, z0, cov0, n_burn, adapt_every, rng):
    d = z0.size
    z, lp = z0.copy(), logpost(z0)
    tries = 0
    while not np.isfinite(lp) and tries < 100:
        z = z0 + rng.normal(size=d) * np.sqrt(np.diag(cov0))
        lp = logpost(z)
        tries += 1
    if not np.isfinite(lp):
        raise InvalidParameterError("could not find a starting point with finite posterior")
    cov = cov0.copy()
    history = []
    for step in range(n_burn):
        z, lp, _ = _mh_step(logpost, z, lp, cov, rng)
        history.append(z)
        if (step + 1) % adapt_every == 0 and step + 1 >= 2 * adapt_every:
            recent = np.asarray(history[len(history) // 2:])
            emp = np.atleast_2d(np.cov(recent.T))
            if np.all(np.isfinite(emp)) and np.trace(emp) > 0:
                cov = (2.38 ** 2 / d) * emp + 1e-10 * np.diag(np.diag(cov0))
    return z, lp, cov


def _mh_step(logpost, z, lp, cov, rng):
    prop = rng.multivariate_normal(z, cov) if z.size > 1 else z + rng.normal() * math.sqrt(cov[0, 0])
    lp_new = logpost(prop)
    if np.isfinite(lp_new) and math.log(rng.uniform()) < lp_new - lp:
        return prop, lp_new, True
    return z, lp, False


def fit_spectrum_mcmc(data, model: SpectrumModel, init: FitParameters,
                      priors: dict | None = None, settings: McmcSettings = McmcSettings()) -> FitResult:
    """Adaptive Metropolis-Hastings posterior sampling of the free parameters.

    Each chain adapts a Gaussian proposal covariance during burn-in and keeps
    it fixed afterwards.  Sampling is extended block-wise until the split
    R-hat of every free coordinate is below ``settings.rhat_max`` or
    ``settings.max_steps`` is reached.

    Raises
    ------
    TemperatureUnboundedError
        If more than ``edge_mass_limit`` of the posterior lies in the top
        ``upper_edge_fraction`` of the log-temperature prior range.
    ConvergenceError
        If R-hat stays above ``rhat_max``.
    """
    counts = _check_data(data)
    if not init.free:
        raise InvalidParameterError("at least one parameter must be free")
    coords = _Coords(init, priors or {})
    n_eval = 0

    def logpost(z):
        nonlocal n_eval
        if not coords.in_support(z):
            return -np.inf
        n_eval += 1
        try:
            return poisson_log_likelihood(data, coords.to_params(z), model)
        except DarkThermoError:
            return -np.inf

    z_init = coords.to_z(init)
    cov0 = np.diag(coords.scales(init) ** 2)
    seeds = np.random.SeedSequence(settings.seed).spawn(settings.n_chains)
    rngs = [np.random.default_rng(s) for s in seeds]

    states = []
    for rng in rngs:
        start = z_init + rng.normal(size=z_init.size) * np.sqrt(np.diag(cov0))
        states.append(list(_run_chain(logpost, start, cov0, settings.n_burn,
                                      settings.adapt_every, rng)))

    chains = [[] for _ in rngs]
    accepted = 0
    total = 0
    rhat = np.full(z_init.size, np.inf)
    while total < settings.max_steps:
        for c, rng in enumerate(rngs):
            z, lp, cov = states[c]
            for _ in range(settings.n_steps):
                z, lp, acc = _mh_step(logpost, z, lp, cov, rng)
                accepted += acc
                chains[c].append(z)
            states[c] = [z, lp, cov]
        total += settings.n_steps
        arr = np.asarray(chains)
        rhat = split_rhat(arr)
        if np.all(rhat < settings.rhat_max):
            break

    arr = np.asarray(chains)[:, ::settings.thin]
    flat = arr.reshape(-1, arr.shape[-1])
    acc_rate = accepted / (total * len(rngs))
    result = _summarize(data, model, coords, flat, acc_rate, dict(zip(coords.names, rhat)), n_eval)

    if "temperature_mk" in coords.names:
        k = coords.names.index("temperature_mk")
        lo, hi = coords.bounds()
        edge = hi[k] - settings.upper_edge_fraction * (hi[k] - lo[k])
        mass = float(np.mean(flat[:, k] >= edge))
        if mass > settings.edge_mass_limit:
            bound = float(np.exp(np.quantile(flat[:, k], 0.05)))
            result.lower_bound_mk = bound
            raise TemperatureUnboundedError(
                f"temperature unbounded above: {100 * mass:.0f} % of the posterior lies above "
                f"{math.exp(edge):.4g} mK; T > {bound:.4g} mK (95 %)", bound, result)

    if not np.all(rhat < settings.rhat_max):
        raise ConvergenceError(
            f"MCMC did not converge after {total} steps per chain: R-hat = "
            + ", ".join(f"{n}={r:.3f}" for n, r in zip(coords.names, rhat)),
            {"rhat": dict(zip(coords.names, rhat.tolist())), "acceptance_rate": acc_rate,
             "steps_per_chain": total})
    return result


def _summarize(data, model, coords, flat, acc_rate, rhat, n_eval):
    x = coords.to_x(flat)
    med = np.median(x, axis=0)
    lo = np.quantile(x, 0.15865, axis=0)
    hi = np.quantile(x, 0.84135, axis=0)
    point = coords.base.replace(**{n: float(v) for n, v in zip(coords.names, med)})
    mu = model.expected_counts(point)
    return FitResult(
        params=point,
        errors={n: float(s) for n, s in zip(coords.names, x.std(axis=0, ddof=1))},
        intervals={n: (float(a), float(b)) for n, a, b in zip(coords.names, lo, hi)},
        samples=x,
        sample_names=coords.names,
        deviance=poisson_deviance(data.counts, mu),
        acceptance_rate=float(acc_rate),
        rhat={k: float(v) for k, v in rhat.items()},
        method="mcmc",
        model=model.method,
        n_evaluations=n_eval,
    )


# ---------------------------------------------------------------- least squares

def fit_spectrum_lsq(data, model: SpectrumModel, init: FitParameters,
                     priors: dict | None = None, cond_limit: float = 1e8) -> FitResult:
    """Weighted least squares with weights ``1 / max(n_i, 1)``.

    Uses a bounded trust-region Gauss-Newton solver in the sampling
    coordinates; errors come from the inverse of ``J^T J``.
    """
    counts = _check_data(data)
    if not init.free:
        raise InvalidParameterError("at least one parameter must be free")
    coords = _Coords(init, priors or {})
    if not coords.in_support(coords.to_z(init)):
        raise InvalidParameterError("initial parameters outside their prior bounds")
    sigma = np.sqrt(np.maximum(counts, 1.0))
    n_eval = 0

    def resid(z):
        nonlocal n_eval
        n_eval += 1
        return (model.expected_counts(coords.to_params(z)) - counts) / sigma

    lo, hi = coords.bounds()
    z0 = np.clip(coords.to_z(init), lo, hi)
    scales = coords.scales(init)

    def jac(z):
        # absolute steps: a relative step collapses when a coordinate is near 0
        r0 = resid(z)
        J = np.empty((r0.size, z.size))
        for k in range(z.size):
            h = 1e-5 * scales[k]
            if z[k] + h > hi[k]:
                h = -h
            zk = z.copy()
            zk[k] += h
            J[:, k] = (resid(zk) - r0) / h
        return J

    sol = least_squares(resid, z0, jac=jac, bounds=(lo, hi), x_scale=scales,
                        method="trf", xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=200 * z0.size)
    J = sol.jac * scales  # dimensionless columns
    colnorm = np.linalg.norm(J, axis=0)
    dead = colnorm <= 1e-8 * max(colnorm.max(), 1e-300)
    unconstrained = [n for n, d in zip(coords.names, dead) if d]
    live = ~dead
    if live.any():
        s_live = np.linalg.svd(J[:, live] / colnorm[live], compute_uv=False)
        if s_live[-1] <= 0 or s_live[0] / s_live[-1] > cond_limit:
            _, _, vt = np.linalg.svd(J[:, live] / colnorm[live])
            weak = np.abs(vt[-1]) > 0.1
            names = [n for n, lv in zip(coords.names, live) if lv]
            unconstrained += [n for n, w in zip(names, weak) if w]
    if unconstrained:
        raise DegenerateFitError(
            "normal equations are singular; unconstrained: " + ", ".join(unconstrained),
            unconstrained)

    cov = np.linalg.inv(sol.jac.T @ sol.jac)
    point = coords.to_params(sol.x)
    errors = coords.to_natural_errors(sol.x, cov)
    intervals = {n: (getattr(point, n) - e, getattr(point, n) + e) for n, e in errors.items()}
    mu = model.expected_counts(point)
    return FitResult(params=point, errors=errors, intervals=intervals, samples=None,
                     sample_names=coords.names, deviance=poisson_deviance(counts, mu),
                     method="lsq", model=model.method, n_evaluations=n_eval)


# ---------------------------------------------------------------- relaxation

class RelaxationFit(NamedTuple):
    amplitude_mk: float
    tau_us: float
    offset_mk: float
    amplitude_err: float
    tau_err: float
    offset_err: float
    chi2: float


def fit_exponential_relaxation(series, tau_bounds_us=None) -> RelaxationFit:
    """Weighted fit of ``T(t) = a exp(-t / tau) + offset``.

    ``series`` is a sequence of ``(time_us, T_mk, sigma_mk)``.  A negative
    ``a`` describes heating towards ``offset``.  Raises :class:`FitBoundError`
    when the best time constant sits on a bound, i.e. no relaxation is
    visible in the data.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidParameterError("series must be a list of (time_us, T_mk, sigma_mk)")
    if arr.shape[0] < 4:
        raise InvalidParameterError(f"need at least 4 points, got {arr.shape[0]}")
    t, y, s = arr.T
    if not np.all(s > 0):
        raise InvalidParameterError("temperature uncertainties must be > 0")
    span = float(t.max() - t.min())
    if span <= 0:
        raise InvalidParameterError("time points must not all coincide")
    if tau_bounds_us is None:
        dt = np.diff(np.sort(t))
        tau_bounds_us = (0.05 * float(dt[dt > 0].min()), 20.0 * span)
    tlo, thi = tau_bounds_us

    def resid(p):
        a, logtau, c = p
        return (a * np.exp(-(t - t.min()) / np.exp(logtau)) + c - y) / s

    order = np.argsort(t)
    a0 = float(y[order[0]] - y[order[-1]])
    c0 = float(y[order[-1]])
    best = None
    for frac in (0.05, 0.15, 0.4, 1.0):
        x0 = np.array([a0, math.log(min(max(frac * span, tlo * 1.01), thi * 0.99)), c0])
        sol = least_squares(resid, x0, bounds=([-np.inf, math.log(tlo), -np.inf],
                                               [np.inf, math.log(thi), np.inf]), method="trf")
        if best is None or sol.cost < best.cost:
            best = sol
    a, logtau, c = best.x
    tau = math.exp(logtau)
    if abs(logtau - math.log(tlo)) < 1e-3 or abs(logtau - math.log(thi)) < 1e-3:
        raise FitBoundError(f"time constant at its bound ({tau:.4g} us): no relaxation visible")
    J = best.jac
    try:
        cov = np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError as exc:
        raise FitBoundError("relaxation parameters are not constrained by the data") from exc
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) < 0):
        raise FitBoundError("relaxation parameters are not constrained by the data")
    sd = np.sqrt(np.diag(cov))
    # amplitude is referenced to the first time point
    shift = math.exp(t.min() / tau)
    return RelaxationFit(float(a * shift), tau, float(c), float(sd[0] * shift), float(tau * sd[1]),
                         float(sd[2]), float(2.0 * best.cost))


# ---------------------------------------------------------------- scaling law

class ScalingFit(NamedTuple):
    exponent: float
    prefactor: float
    exponent_err: float


def noise_scaling_check(pairs, sigmas=None, subtract_baseline: bool = False) -> ScalingFit:
    """Power-law fit ``T = prefactor * E_rms ** exponent`` on log-log axes.

    Parameters
    ----------
    pairs : sequence of (E_rms in V, T in mK)
        At least three pairs.
    sigmas : sequence of float, optional
        Temperature uncertainties (mK).  When given, the exponent error is
        propagated from them; otherwise it comes from the fit residuals.
    subtract_baseline : bool
        Treat the pairs with ``E_rms == 0`` as the undriven baseline and
        subtract their mean temperature from the others before fitting.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise InvalidParameterError("need at least 3 (E_rms, T) pairs")
    sig = None if sigmas is None else np.asarray(sigmas, dtype=float)
    if sig is not None and (sig.shape != (arr.shape[0],) or np.any(sig <= 0)):
        raise InvalidParameterError("sigmas must be positive, one per pair")
    E, T = arr.T
    if np.any(E < 0) or np.any(T <= 0):
        raise InvalidParameterError("E_rms must be >= 0 and T > 0")
    if subtract_baseline:
        base = E == 0
        if not base.any():
            raise InvalidParameterError("subtract_baseline needs a pair with E_rms = 0")
        t0 = T[base].mean()
        s0 = None if sig is None else math.sqrt(np.sum(sig[base] ** 2)) / base.sum()
        E, T = E[~base], T[~base] - t0
        if sig is not None:
            sig = np.sqrt(sig[~base] ** 2 + s0 ** 2)
        if np.any(T <= 0):
            raise InvalidParameterError("baseline-subtracted temperatures must be > 0")
        if E.size < 2:
            raise InvalidParameterError("need at least 2 driven pairs besides the baseline")
    elif np.any(E <= 0):
        raise InvalidParameterError("E_rms must be > 0 without baseline subtraction")

    x, y = np.log(E), np.log(T)
    if sig is not None:
        w = T / sig  # 1 / sigma of ln T
        A = np.column_stack([x, np.ones_like(x)]) * w[:, None]
        coef, *_ = np.linalg.lstsq(A, y * w, rcond=None)
        cov = np.linalg.inv(A.T @ A)
    else:
        A = np.column_stack([x, np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        dof = x.size - 2
        r = y - A @ coef
        s2 = float(r @ r) / dof if dof > 0 else 0.0
        cov = s2 * np.linalg.inv(A.T @ A)
    return ScalingFit(float(coef[0]), float(math.exp(coef[1])), float(math.sqrt(max(cov[0, 0], 0.0))))
