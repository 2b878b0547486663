"""Standard-Gaussian machinery.

Provides the CDF, a high-accuracy quantile function, expected powers of
Gaussian order statistics E(Z_{i:n}^k) by adaptive quadrature, expected
spacings between order statistics, and the rescaling constants built
from those spacings.

Order-statistic tables are expensive for large n, so completed tables
can be persisted to a versioned JSON cache keyed by (n, max_power).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from filelock import FileLock
from scipy.integrate import quad
from scipy.special import gammaln, log_ndtr

from .errors import DomainError

CACHE_FORMAT_VERSION = 1
_CACHE_ENV_VAR = "GCLM_CACHE_DIR"

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Integration window: the order-statistic integrand is below 1e-16 of its
# peak outside [-9, 9] for every n this package targets (n <= ~1e4).
_Z_MAX = 9.0


def std_normal_cdf(x):
    """Standard Gaussian CDF, accurate to ~1e-16 relative via erfc."""
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim == 0:
        return 0.5 * math.erfc(-float(x_arr) / _SQRT2)
    from scipy.special import ndtr

    return ndtr(x_arr)


def std_normal_pdf(x):
    x_arr = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x_arr * x_arr - _LOG_SQRT_2PI)
    return float(out) if out.ndim == 0 else out


# Acklam's rational approximation to the inverse Gaussian CDF; absolute
# error below 1.15e-9 on its own, then one Newton step pushes it to
# near machine precision.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
               ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
               ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
           (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def _quantile_scalar(u: float) -> float:
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {u}")
    x = _acklam(u)
    # one Newton refinement; refine against the nearer tail so the
    # residual keeps full relative precision (Phi(x) - u cancels badly
    # for u near 1)
    if u > 0.5:
        err = (1.0 - u) - std_normal_cdf(-x)
    else:
        err = std_normal_cdf(x) - u
    pdf = std_normal_pdf(x)
    if pdf > 0.0:
        x -= err / pdf
    return x


def std_normal_quantile(u):
    """Inverse of the standard Gaussian CDF on (0, 1).

    Rational approximation plus one Newton refinement step; raises
    DomainError at and outside the endpoints.
    """
    if np.ndim(u) == 0:
        return _quantile_scalar(float(u))
    u_arr = np.asarray(u, dtype=float)
    return np.vectorize(_quantile_scalar)(u_arr)


def _log_order_statistic_weight(z, i: int, n: int):
    """log of n!/((i-1)!(n-i)!) Phi(z)^{i-1} (1-Phi(z))^{n-i} phi(z)."""
    z = np.asarray(z, dtype=float)
    log_binom = gammaln(n + 1) - gammaln(i) - gammaln(n - i + 1)
    log_phi = -0.5 * z * z - _LOG_SQRT_2PI
    return log_binom + (i - 1) * log_ndtr(z) + (n - i) * log_ndtr(-z) + log_phi


@lru_cache(maxsize=100_000)
def expected_gaussian_order_statistic_power(i: int, n: int, k: int) -> float:
    """E(Z_{i:n}^k) by adaptive quadrature over [-9, 9].

    The Beta-weight factor is evaluated in log space so that n up to
    ~1e4 does not overflow.
    """
    if not 1 <= i <= n:
        raise DomainError(f"index i={i} out of range for n={n}")
    if k < 1:
        raise DomainError(f"power must be >= 1, got {k}")
    # antisymmetry halves the work for the upper indices
    if 2 * i > n + 1:
        return (-1.0) ** k * expected_gaussian_order_statistic_power(n + 1 - i, n, k)

    def integrand(z):
        return z ** k * math.exp(_log_order_statistic_weight(z, i, n))

    # the integrand peaks near the i-th expected quantile
    peak = _quantile_scalar(i / (n + 1.0))
    value, _ = quad(integrand, -_Z_MAX, _Z_MAX, points=[peak], limit=400,
                    epsabs=1e-12, epsrel=1e-11)
    return value


@dataclass(frozen=True)
class GaussianOrderStatisticTable:
    """Cached matrix of E(Z_{i:n}^k), i = 1..n, k = 1..max_power.

    Immutable once built; safe to share across threads.
    """

    n: int
    max_power: int
    values: np.ndarray  # shape (n, max_power), column k-1 holds E(Z_{i:n}^k)

    def power(self, k: int) -> np.ndarray:
        """Vector of E(Z_{i:n}^k) over i = 1..n."""
        if not 1 <= k <= self.max_power:
            raise DomainError(f"power {k} not in table (max {self.max_power})")
        return self.values[:, k - 1]

    def moment(self, i: int, k: int) -> float:
        return float(self.values[i - 1, k - 1])


def build_order_statistic_table(n: int, max_power: int = 3) -> GaussianOrderStatisticTable:
    """Compute a fresh E(Z_{i:n}^k) table (no cache involvement)."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    if max_power < 1:
        raise DomainError(f"max_power must be >= 1, got {max_power}")
    values = np.empty((n, max_power))
    half = (n + 1) // 2
    for i in range(1, half + 1):
        for k in range(1, max_power + 1):
            v = expected_gaussian_order_statistic_power(i, n, k)
            values[i - 1, k - 1] = v
            values[n - i, k - 1] = (-1.0) ** k * v
    return GaussianOrderStatisticTable(n=n, max_power=max_power, values=values)


def _cache_dir() -> Path:
    base = os.environ.get(_CACHE_ENV_VAR)
    if base:
        return Path(base)
    return Path.home() / ".cache" / "gclm"


def order_statistic_table(n: int, max_power: int = 3,
                          use_cache: bool = True) -> GaussianOrderStatisticTable:
    """Load an order-statistic table from the on-disk cache, or build it.

    The cache file is JSON, versioned, keyed by (n, max_power), and
    guarded by an advisory lock for concurrent writers.
    """
    if not use_cache:
        return build_order_statistic_table(n, max_power)
    cache_dir = _cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"zmoments_n{n}_k{max_power}.json"
    lock = FileLock(str(path) + ".lock")
    with lock:
        if path.exists():
            try:
                doc = json.loads(path.read_text())
                if (doc.get("format_version") == CACHE_FORMAT_VERSION
                        and doc.get("n") == n and doc.get("max_power") == max_power):
                    values = np.asarray(doc["values"], dtype=float)
                    if values.shape == (n, max_power):
                        return GaussianOrderStatisticTable(n=n, max_power=max_power,
                                                           values=values)
            except (ValueError, KeyError):
                pass  # stale or corrupt cache entry; rebuild below
        table = build_order_statistic_table(n, max_power)
        doc = {
            "format_version": CACHE_FORMAT_VERSION,
            "n": n,
            "max_power": max_power,
            "values": table.values.tolist(),
        }
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc))
        tmp.replace(path)
        return table


@lru_cache(maxsize=4096)
def expected_spacing_gaussian(i: int, j: int, k: int) -> float:
    """Expected spacing E(Z_{j:k}) - E(Z_{i:k}), strictly positive."""
    if not (1 <= i < j <= k):
        raise DomainError(f"need 1 <= i < j <= k, got i={i}, j={j}, k={k}")
    return (expected_gaussian_order_statistic_power(j, k, 1)
            - expected_gaussian_order_statistic_power(i, k, 1))


@lru_cache(maxsize=1)
def rl_polynomial_constants() -> dict:
    """Constants c1..c4 of the rescaled-L weight polynomials.

    Computed from expected Gaussian spacings, never hard-coded:
      c1 = 1/delta_{1,2:2},  c2 = 1/delta_{1,2:3},  c4 = 1/delta_{3,4:4},
      c3 from matching the cubic weight polynomial's leading coefficient.
    """
    d12_2 = expected_spacing_gaussian(1, 2, 2)
    d12_3 = expected_spacing_gaussian(1, 2, 3)
    d23_4 = expected_spacing_gaussian(2, 3, 4)
    d34_4 = expected_spacing_gaussian(3, 4, 4)
    c1 = 1.0 / d12_2
    c2 = 1.0 / d12_3
    c4 = 1.0 / d34_4
    # leading (cubic) coefficient of the degree-3 rescaled weight is
    # 8/d34_4 + 12/d23_4 and equals c4 * (6 c3 + 2)
    a3 = 8.0 / d34_4 + 12.0 / d23_4
    c3 = (a3 / c4 - 2.0) / 6.0
    return {"c1": c1, "c2": c2, "c3": c3, "c4": c4}


@lru_cache(maxsize=1)
def rl_transform_constants() -> dict:
    """Linear maps taking classical L-measures to rescaled-L measures.

    rho_2   = scale2 * lambda_2
    rho*_3  = skew_factor * lambda*_3
    rho*_4  = kurt_slope * lambda*_4 - kurt_intercept
    """
    d12_2 = expected_spacing_gaussian(1, 2, 2)
    d12_3 = expected_spacing_gaussian(1, 2, 3)
    d23_4 = expected_spacing_gaussian(2, 3, 4)
    d34_4 = expected_spacing_gaussian(3, 4, 4)
    return {
        "scale2": 1.0 / d12_2,
        "skew_factor": d12_2 / d12_3,
        "kurt_slope": (d12_2 / 5.0) * (3.0 / d23_4 + 2.0 / d34_4),
        "kurt_intercept": (3.0 * d12_2 / 5.0) * (1.0 / d23_4 - 1.0 / d34_4),
    }


def rl_weight_polynomial(r: int) -> np.ndarray:
    """Ascending coefficients of the degree-r rescaled-L weight polynomial R_r."""
    from .polynomials import shifted_legendre_coefficients

    if r < 0:
        raise DomainError(f"degree must be >= 0, got {r}")
    c = rl_polynomial_constants()
    if r == 0:
        return shifted_legendre_coefficients(0)
    if r == 1:
        return c["c1"] * shifted_legendre_coefficients(1)
    if r == 2:
        return c["c2"] * shifted_legendre_coefficients(2)
    if r == 3:
        c3, c4 = c["c3"], c["c4"]
        return c4 * np.array([-1.0, 3.0 * c3 + 3.0, -3.0 * (3.0 * c3 + 1.0), 6.0 * c3 + 2.0])
    raise DomainError("rescaled-L weight polynomials are only defined up to degree 3")
