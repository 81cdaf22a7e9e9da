"""Black-Scholes chains for European and geometric-average Asian calls."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from . import kernels
from .chain_sim import MarkovModel, point_mass
from .errors import ConfigurationError

EUROPEAN = "european"
ASIAN = "asian"


@dataclass(frozen=True)
class GbmParams:
    S0: float
    r: float
    sigma: float
    T: float
    P: int
    dts: tuple = field(default=None)

    def __post_init__(self):
        if not self.S0 > 0 or self.sigma < 0 or not self.T > 0 or int(self.P) != self.P or self.P < 1:
            raise ConfigurationError(f"invalid GBM parameters {self}")
        dts = self.dts
        if dts is None:
            dts = (self.T / self.P,) * int(self.P)
        dts = tuple(float(v) for v in dts)
        if len(dts) != self.P or any(not v > 0 for v in dts) or not math.isclose(sum(dts), self.T):
            raise ConfigurationError("step lengths must be positive, P of them, summing to T")
        object.__setattr__(self, "dts", dts)

    @property
    def uniform_steps(self):
        return all(v == self.dts[0] for v in self.dts)


@dataclass(frozen=True)
class OptionSpec:
    strike: float
    style: str = EUROPEAN

    def __post_init__(self):
        if not self.strike > 0:
            raise ConfigurationError("strike must be positive")
        if self.style not in (EUROPEAN, ASIAN):
            raise ConfigurationError(f"unknown option style {self.style!r}")


def european_defaults():
    return GbmParams(S0=100.0, r=0.06, sigma=0.2, T=1.0, P=100), OptionSpec(90.0, EUROPEAN)


def asian_defaults(rate_convention="log10"):
    """Asian experiment parameters; the rate is ``log10(1.09)`` or, with ``"ln"``, ``ln(1.09)``."""
    if rate_convention == "log10":
        r = math.log10(1.09)
    elif rate_convention == "ln":
        r = math.log(1.09)
    else:
        raise ConfigurationError(f"rate convention must be 'log10' or 'ln', got {rate_convention!r}")
    return GbmParams(S0=100.0, r=r, sigma=0.2, T=240.0 / 365.0, P=10), OptionSpec(90.0, ASIAN)


def normal_inverse_cdf(u):
    return kernels.norm_ppf(u)


def _drift_vol(params, dt):
    return (params.r - 0.5 * params.sigma ** 2) * dt, params.sigma * math.sqrt(dt)


def gbm_step(S, dt, u, params):
    drift, vol = _drift_vol(params, dt)
    return S * np.exp(drift + vol * kernels.norm_ppf(u))


def european_model(params, spec=None):
    def transition(states, u, p):
        drift, vol = _drift_vol(params, params.dts[p])
        return kernels.gbm_advance(np.ascontiguousarray(states[:, 0]), np.ascontiguousarray(u[:, 0]),
                                   drift, vol).reshape(-1, 1)

    return MarkovModel(1, 1, point_mass(params.S0), transition)


def asian_model(params, spec=None):
    """State ``(price, geometric mean of the prices observed so far)`` starting at ``(S0, 1)``.

    The mean is updated in log space; the first step overwrites the
    placeholder 1 with the first observed price.
    """
    def transition(states, u, p):
        drift, vol = _drift_vol(params, params.dts[p])
        s_new, g_new = kernels.asian_advance(np.ascontiguousarray(states[:, 0]), np.ascontiguousarray(states[:, 1]),
                                             np.ascontiguousarray(u[:, 0]), drift, vol, p)
        return np.column_stack((s_new, g_new))

    return MarkovModel(2, 1, point_mass((params.S0, 1.0)), transition)


def model_for(params, spec):
    return european_model(params, spec) if spec.style == EUROPEAN else asian_model(params, spec)


def terminal_values(e, spec):
    return e.states[:, 0] if spec.style == EUROPEAN else e.states[:, 1]


def discounted_payoff(e, spec, params):
    payoff = np.maximum(terminal_values(e, spec) - spec.strike, 0.0)
    return math.exp(-params.r * params.T) * float(np.mean(payoff))


def black_scholes_price(params, K):
    S0, r, sigma, T = params.S0, params.r, params.sigma, params.T
    if sigma == 0:
        return max(S0 * math.exp(r * T) - K, 0.0) * math.exp(-r * T)
    sd = sigma * math.sqrt(T)
    d1 = (math.log(S0 / K) + (r + 0.5 * sigma ** 2) * T) / sd
    d2 = d1 - sd
    return S0 * float(ndtr(d1)) - K * math.exp(-r * T) * float(ndtr(d2))


def geometric_asian_closed_form(params, K):
    """Call on the discrete geometric average of ``P`` equally spaced prices."""
    if not params.uniform_steps:
        raise ConfigurationError("closed form requires equally spaced observation times")
    if not params.sigma > 0:
        raise ConfigurationError("closed form requires sigma > 0")
    S0, r, sigma, T, P = params.S0, params.r, params.sigma, params.T, params.P
    mu = math.log(S0) + (r - 0.5 * sigma ** 2) * T * (P + 1) / (2 * P)
    var = sigma ** 2 * T * (P + 1) * (2 * P + 1) / (6 * P * P)
    sd = math.sqrt(var)
    d1 = (mu + var - math.log(K)) / sd
    d2 = d1 - sd
    return math.exp(-r * T) * (math.exp(mu + 0.5 * var) * float(ndtr(d1)) - K * float(ndtr(d2)))
