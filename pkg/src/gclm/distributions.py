"""Test-bed distributions given by their quantile functions.

Everything downstream (theoretical moments, influence functions,
sampling) runs through the quantile function, so a distribution here is
just a monotone callable on (0, 1) plus a label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .gaussian import std_normal_quantile


@dataclass(frozen=True)
class QuantileDistribution:
    """A distribution represented by its quantile function on (0, 1)."""

    quantile_fn: Callable
    label: str = ""
    # u-values at which the quantile function is non-smooth (contamination
    # atoms); consumed by quadrature routines as breakpoints.
    breakpoints: tuple = field(default=())
    # optional CDF; when absent, cdf_of() inverts the quantile numerically
    cdf_fn: Callable | None = None

    def quantile(self, u):
        return self.quantile_fn(u)

    def __call__(self, u):
        return self.quantile_fn(u)


def cdf_of(dist: QuantileDistribution, x: float) -> float:
    """CDF value F(x), by closed form when available, else by inverting
    the (strictly increasing) quantile function."""
    if dist.cdf_fn is not None:
        return float(dist.cdf_fn(x))
    from scipy.optimize import brentq

    lo, hi = 1e-15, 1.0 - 1e-15
    if dist.quantile(lo) >= x:
        return 0.0
    if dist.quantile(hi) <= x:
        return 1.0
    return float(brentq(lambda u: dist.quantile(u) - x, lo, hi, xtol=1e-15))


@dataclass(frozen=True)
class TukeyGH:
    """Parameters of Tukey's g-and-h family; h >= 0 required."""

    g: float
    h: float

    def __post_init__(self):
        if self.h < 0:
            raise DomainError(f"Tukey h must be >= 0, got {self.h}")


def tukey_gh_transform(z, params: TukeyGH):
    """Monotone transform defining the Tukey g-and-h family.

    For g != 0: ((e^{gz} - 1)/g) exp(h z^2 / 2); the g = 0 case is the
    symmetric branch z exp(h z^2 / 2).
    """
    z_arr = np.asarray(z, dtype=float)
    tail = np.exp(0.5 * params.h * z_arr * z_arr)
    if params.g == 0.0:
        out = z_arr * tail
    else:
        out = np.expm1(params.g * z_arr) / params.g * tail
    return float(out) if out.ndim == 0 else out


def tukey_gh_quantile(u, params: TukeyGH):
    """Quantile of Tukey(g, h): the transform applied to the Gaussian quantile."""
    return tukey_gh_transform(std_normal_quantile(u), params)


def standard_gaussian() -> QuantileDistribution:
    from .gaussian import std_normal_cdf

    return QuantileDistribution(std_normal_quantile, label="gaussian",
                                cdf_fn=std_normal_cdf)


def uniform(a: float = 0.0, b: float = 1.0) -> QuantileDistribution:
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")

    def q(u):
        u_arr = np.asarray(u, dtype=float)
        out = a + (b - a) * u_arr
        return float(out) if out.ndim == 0 else out

    def cdf(x):
        return min(1.0, max(0.0, (x - a) / (b - a)))

    return QuantileDistribution(q, label=f"uniform({a},{b})", cdf_fn=cdf)


def exponential(rate: float = 1.0) -> QuantileDistribution:
    if rate <= 0:
        raise DomainError(f"rate must be > 0, got {rate}")

    def q(u):
        u_arr = np.asarray(u, dtype=float)
        out = -np.log1p(-u_arr) / rate
        return float(out) if out.ndim == 0 else out

    def cdf(x):
        return -math.expm1(-rate * x) if x > 0 else 0.0

    return QuantileDistribution(q, label=f"exponential({rate})", cdf_fn=cdf)


def tukey_gh(g: float, h: float) -> QuantileDistribution:
    params = TukeyGH(g=g, h=h)

    def q(u):
        return tukey_gh_quantile(u, params)

    def cdf(x):
        # invert the monotone transform on the z axis, then apply the
        # Gaussian CDF; better conditioned than inverting in u
        from scipy.optimize import brentq

        from .gaussian import std_normal_cdf

        if x == 0.0:
            return 0.5 if g == 0.0 else float(std_normal_cdf(0.0))
        f = lambda z: tukey_gh_transform(z, params) - x
        lo, hi = -40.0, 40.0
        if f(lo) >= 0.0:
            return 0.0
        if f(hi) <= 0.0:
            return 1.0
        z = brentq(f, lo, hi, xtol=1e-14)
        return float(std_normal_cdf(z))

    return QuantileDistribution(q, label=f"tukey(g={g},h={h})", cdf_fn=cdf)


def sample_distribution(dist: QuantileDistribution, n: int, seed) -> np.ndarray:
    """Inverse-CDF sampling with a seeded PCG64 generator.

    `seed` may be an int or a numpy SeedSequence, so parallel callers
    can hand each variable its own spawned stream.
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(n)
    # random() can return exactly 0.0, outside the quantile domain
    tiny = math.ulp(0.0)
    u[u == 0.0] = tiny
    return np.asarray(dist.quantile(u), dtype=float)


def spawn_streams(seed: int, count: int) -> list:
    """Deterministic child seeds for data-parallel sampling."""
    return np.random.SeedSequence(seed).spawn(count)
