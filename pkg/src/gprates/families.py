"""Catalogue of second-order distribution families.

Four families cover every case split of the limit theory: Burr
(gamma > 0), reversed Burr (gamma < 0), Gumbel (gamma = 0, the worked
light-tail example) and an exact generalised Pareto baseline whose rate
function vanishes identically.

Each family exposes the distribution function F and density f, the tail
quantile function U(v) = F^{-1}(1 - 1/v) with analytic first and second
derivatives, the rate function A(v) = v U''(v)/U'(v) + 1 - gamma, the
excess scaling s(t) = (1 - F(t))/f(t), and inverse-CDF sampling.  All
derivative-based quantities use closed forms, never finite differences:
rate sweeps divide by |A(v)| down to ~1e-7 and cannot tolerate
differencing noise.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError, ZeroDensityError
from .limit_models import GAMMA_ZERO_TOL, GpModel, one_plus_gamma_z


def _check_v(v):
    v = np.asarray(v, dtype=float)
    if np.any(v <= 1.0):
        raise DomainError("tail quantile U(v) needs v > 1")
    return v


def _out(x, scalar):
    return float(x) if scalar else x


class Family(ABC):
    """A twice-differentiable distribution family with known tail structure."""

    #: True when A(v) is identically zero and rate sweeps are meaningless.
    degenerate_rate = False

    @property
    @abstractmethod
    def gamma(self) -> float:
        """Tail index of the GP/GEV limit."""

    @property
    @abstractmethod
    def rho(self) -> float:
        """Regular-variation index of |A(v)| (second-order parameter)."""

    @property
    @abstractmethod
    def xstar(self) -> float:
        """Right endpoint of the support (inf when unbounded)."""

    @abstractmethod
    def cdf(self, x): ...

    @abstractmethod
    def sf(self, x):
        """Survival function 1 - F(x), evaluated without cancellation."""

    @abstractmethod
    def pdf(self, x): ...

    @abstractmethod
    def U(self, v): ...

    @abstractmethod
    def U1(self, v): ...

    @abstractmethod
    def U2(self, v): ...

    @abstractmethod
    def rate_A(self, v): ...

    @abstractmethod
    def spec_string(self) -> str:
        """Canonical CLI spec string for this family."""

    def scaling_s(self, t):
        """Excess scaling s(t) = (1 - F(t))/f(t)."""
        scalar = np.isscalar(t)
        t = np.asarray(t, dtype=float)
        if np.any(t >= self.xstar):
            raise DomainError("threshold must lie below the right endpoint")
        f = np.asarray(self.pdf(t), dtype=float)
        if np.any(f <= 0.0):
            raise ZeroDensityError("density vanishes at the threshold")
        return _out(np.asarray(self.sf(t)) / f, scalar)

    # Closed-form quantities indexed by v = 1/(1 - F(t)); these feed the
    # excess model where t-based evaluation would lose precision.

    def scale_v(self, v):
        """s(U(v)) in closed form."""
        return self.scaling_s(self.U(_check_v(v)))

    def gap_v(self, v):
        """xstar - U(v) in closed form (inf when xstar is inf)."""
        v = _check_v(v)
        if np.isinf(self.xstar):
            return np.full_like(np.asarray(v, dtype=float), np.inf)
        return self.xstar - self.U(v)

    def mu_v(self, v):
        """Recentring shift mu_t = (xstar - t)/s(t) + 1/gamma (gamma < 0)."""
        v = _check_v(v)
        if self.gamma >= 0.0:
            raise DomainError("mu_t is defined for gamma < 0 only")
        return self.gap_v(v) / self.scale_v(v) + 1.0 / self.gamma

    # Shifted evaluation used by the excess density: f(t + xi) for small
    # xi, either directly (unbounded support) or through the distance to
    # the endpoint (finite xstar), whichever avoids cancellation.

    def pdf_shift(self, t, xi):
        return self.pdf(t + np.asarray(xi, dtype=float))

    def sf_shift(self, t, xi):
        return self.sf(t + np.asarray(xi, dtype=float))

    def pdf_gap(self, d):
        """Density at xstar - d (finite-endpoint families only)."""
        raise DomainError(f"{type(self).__name__} has no finite endpoint")

    def sf_gap(self, d):
        raise DomainError(f"{type(self).__name__} has no finite endpoint")

    def sample(self, n, seed):
        """Inverse-CDF sample of size n, deterministic given the seed."""
        if n < 1:
            raise DomainError("sample size must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.random(int(n))
        u = np.where(u == 0.0, 2.0 ** -53, u)  # keep samples off −inf
        return self.U(1.0 / (1.0 - u))


@dataclass(frozen=True)
class ExactGP(Family):
    """Standard GP distribution itself: the A(v) = 0 degenerate baseline."""

    g: float

    degenerate_rate = True

    def __post_init__(self):
        object.__setattr__(self, "_gp", GpModel(self.g))

    @property
    def gamma(self):
        return self.g

    @property
    def rho(self):
        return 0.0

    @property
    def xstar(self):
        return np.inf if self.g >= 0.0 else -1.0 / self.g

    def cdf(self, x):
        return self._gp.cdf(x)

    def sf(self, x):
        return self._gp.sf(x)

    def pdf(self, x):
        return self._gp.pdf(x)

    def U(self, v):
        v = _check_v(v)
        if abs(self.g) < GAMMA_ZERO_TOL:
            return np.log(v)
        return np.expm1(self.g * np.log(v)) / self.g

    def U1(self, v):
        v = _check_v(v)
        return np.exp((self.g - 1.0) * np.log(v))

    def U2(self, v):
        v = _check_v(v)
        return (self.g - 1.0) * np.exp((self.g - 2.0) * np.log(v))

    def rate_A(self, v):
        v = _check_v(v)
        return np.zeros_like(v)

    def scale_v(self, v):
        v = _check_v(v)
        return np.exp(self.g * np.log(v))

    def gap_v(self, v):
        v = _check_v(v)
        if self.g >= 0.0:
            return np.full_like(v, np.inf)
        return np.exp(self.g * np.log(v)) / (-self.g)

    def mu_v(self, v):
        v = _check_v(v)
        if self.g >= 0.0:
            raise DomainError("mu_t is defined for gamma < 0 only")
        return np.zeros_like(v)

    def pdf_shift(self, t, xi):
        xi = np.asarray(xi, dtype=float)
        if abs(self.g) < GAMMA_ZERO_TOL:
            return np.exp(-(t + xi))
        u = one_plus_gamma_z(self.g, t) + self.g * xi
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(-(1.0 / self.g + 1.0) * np.log(u))
        return np.where(u > 0.0, out, 0.0)

    def sf_shift(self, t, xi):
        xi = np.asarray(xi, dtype=float)
        if abs(self.g) < GAMMA_ZERO_TOL:
            return np.exp(-(t + xi))
        u = one_plus_gamma_z(self.g, t) + self.g * xi
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(-np.log(u) / self.g)
        return np.where(u > 0.0, out, 0.0)

    def pdf_gap(self, d):
        d = np.asarray(d, dtype=float)
        if self.g >= 0.0:
            raise DomainError("no finite endpoint for gamma >= 0")
        u = -self.g * d
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(-(1.0 / self.g + 1.0) * np.log(u))
        return np.where(d > 0.0, out, 0.0)

    def sf_gap(self, d):
        d = np.asarray(d, dtype=float)
        if self.g >= 0.0:
            raise DomainError("no finite endpoint for gamma >= 0")
        u = -self.g * d
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(-np.log(u) / self.g)
        return np.where(d > 0.0, out, 0.0)

    def spec_string(self):
        return f"gp:gamma={self.g:g}"


@dataclass(frozen=True)
class Burr(Family):
    """Burr XII law F(x) = 1 - (1 + x^c)^{-k} on x > 0 (gamma = 1/(ck) > 0)."""

    c: float
    k: float

    def __post_init__(self):
        if not (self.c > 0.0 and self.k > 0.0):
            raise DomainError("Burr needs c > 0 and k > 0")
        # c = 1 collapses to an exact GP tail: A(v) vanishes identically.
        object.__setattr__(self, "degenerate_rate", self.c == 1.0)

    @property
    def gamma(self):
        return 1.0 / (self.c * self.k)

    @property
    def rho(self):
        return -1.0 / self.k

    @property
    def xstar(self):
        return np.inf

    def _w(self, v):
        return np.expm1(np.log(v) / self.k)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            out = -np.expm1(-self.k * np.log1p(x ** self.c))
        return np.where(x > 0.0, out, 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            out = np.exp(-self.k * np.log1p(x ** self.c))
        return np.where(x > 0.0, out, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        c, k = self.c, self.k
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            out = k * c * x ** (c - 1.0) * np.exp(-(k + 1.0) * np.log1p(x ** c))
        return np.where(x > 0.0, out, 0.0)

    def U(self, v):
        return self._w(_check_v(v)) ** (1.0 / self.c)

    def U1(self, v):
        v = _check_v(v)
        w = self._w(v)
        c, k = self.c, self.k
        return (1.0 / (c * k)) * w ** (1.0 / c - 1.0) * v ** (1.0 / k - 1.0)

    def U2(self, v):
        v = _check_v(v)
        w = self._w(v)
        c, k = self.c, self.k
        return self.U1(v) * ((1.0 / c - 1.0) * v ** (1.0 / k) / (k * w)
                             + 1.0 / k - 1.0) / v

    def rate_A(self, v):
        v = _check_v(v)
        return (1.0 - self.c) / (self.c * self.k * self._w(v))

    def scale_v(self, v):
        v = _check_v(v)
        w = self._w(v)
        return (1.0 + w) * w ** (1.0 / self.c) / (self.c * self.k * w)

    def spec_string(self):
        return f"burr:c={self.c:g},k={self.k:g}"


@dataclass(frozen=True)
class ReversedBurr(Family):
    """Finite-endpoint family F(x) = 1 - (1 + (xstar - x)^{-c})^{-k}, x < xstar."""

    c: float
    k: float
    xstar_: float = 0.0

    def __post_init__(self):
        if not (self.c > 0.0 and self.k > 0.0):
            raise DomainError("ReversedBurr needs c > 0 and k > 0")

    @property
    def gamma(self):
        return -1.0 / (self.c * self.k)

    @property
    def rho(self):
        return -1.0 / self.k

    @property
    def xstar(self):
        return self.xstar_

    def _w(self, v):
        return np.expm1(np.log(v) / self.k)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        d = self.xstar_ - x
        return np.where(d > 0.0, 1.0 - self._sf_gap_arr(d), 1.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        d = self.xstar_ - x
        return np.where(d > 0.0, self._sf_gap_arr(d), 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.pdf_gap(self.xstar_ - x)

    def _sf_gap_arr(self, d):
        # (1 + d^{-c})^{-k} rewritten as d^{ck} (1 + d^c)^{-k}: stable as d -> 0.
        d = np.abs(np.asarray(d, dtype=float))
        c, k = self.c, self.k
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            return np.exp(c * k * np.log(d) - k * np.log1p(d ** c))

    def sf_gap(self, d):
        d = np.asarray(d, dtype=float)
        return np.where(d > 0.0, self._sf_gap_arr(d), 0.0)

    def pdf_gap(self, d):
        d = np.asarray(d, dtype=float)
        c, k = self.c, self.k
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            out = k * c * np.exp((c * k - 1.0) * np.log(np.abs(d))
                                 - (k + 1.0) * np.log1p(np.abs(d) ** c))
        return np.where(d > 0.0, out, 0.0)

    def U(self, v):
        return self.xstar_ - self._w(_check_v(v)) ** (-1.0 / self.c)

    def U1(self, v):
        v = _check_v(v)
        w = self._w(v)
        c, k = self.c, self.k
        return (1.0 / (c * k)) * w ** (-1.0 / c - 1.0) * v ** (1.0 / k - 1.0)

    def U2(self, v):
        v = _check_v(v)
        w = self._w(v)
        c, k = self.c, self.k
        return self.U1(v) * ((-1.0 / c - 1.0) * v ** (1.0 / k) / (k * w)
                             + 1.0 / k - 1.0) / v

    def rate_A(self, v):
        v = _check_v(v)
        return -(self.c + 1.0) / (self.c * self.k * self._w(v))

    def scale_v(self, v):
        v = _check_v(v)
        w = self._w(v)
        return (1.0 + w) * w ** (-1.0 / self.c) / (self.c * self.k * w)

    def gap_v(self, v):
        return self._w(_check_v(v)) ** (-1.0 / self.c)

    def mu_v(self, v):
        v = _check_v(v)
        return -self.c * self.k / (1.0 + self._w(v))

    def spec_string(self):
        return f"revburr:c={self.c:g},k={self.k:g},xstar={self.xstar_:g}"


@dataclass(frozen=True)
class Gumbel(Family):
    """Gumbel law F(x) = exp(-exp(-x)): gamma = 0, rho = -1."""

    @property
    def gamma(self):
        return 0.0

    @property
    def rho(self):
        return -1.0

    @property
    def xstar(self):
        return np.inf

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.exp(-x))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return -np.expm1(-np.exp(-x))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-x - np.exp(-x))

    def _q(self, v):
        # q = -ln(1 - 1/v) = e^{-U(v)}
        return -np.log1p(-1.0 / v)

    def U(self, v):
        return -np.log(self._q(_check_v(v)))

    def U1(self, v):
        v = _check_v(v)
        return 1.0 / (v * (v - 1.0) * self._q(v))

    def U2(self, v):
        v = _check_v(v)
        q = self._q(v)
        return self.U1(v) * (-1.0 / v - 1.0 / (v - 1.0) + 1.0 / (v * (v - 1.0) * q))

    def rate_A(self, v):
        v = _check_v(v)
        return (1.0 / self._q(v) - v) / (v - 1.0)

    def scaling_s(self, t):
        scalar = np.isscalar(t)
        a = np.exp(-np.asarray(t, dtype=float))
        return _out(np.expm1(a) / a, scalar)

    def scale_v(self, v):
        q = self._q(_check_v(v))
        return np.expm1(q) / q

    def spec_string(self):
        return "gumbel"


def von_mises_ratio(fam: Family, x):
    """Classical von Mises ratio: x f/(1-F) for gamma > 0, (xstar - x) f/(1-F) for gamma < 0.

    Converges to 1/|gamma| as x approaches the right endpoint.
    """
    if fam.gamma == 0.0:
        raise DomainError("von Mises ratio form requires gamma != 0")
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    lever = x if fam.gamma > 0.0 else fam.xstar - x
    return _out(lever * np.asarray(fam.pdf(x)) / np.asarray(fam.sf(x)), scalar)


_KIND_PARAMS = {
    "gp": {"gamma"},
    "burr": {"c", "k"},
    "revburr": {"c", "k", "xstar"},
    "gumbel": set(),
}


def parse_family_spec(spec: str) -> Family:
    """Parse a CLI family spec: ``burr:c=2,k=1``, ``revburr:c=1,k=1,xstar=0``,
    ``gumbel``, ``gp:gamma=0.5``.  Unknown kinds or keys are errors."""
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    kind = kind.lower()
    if kind not in _KIND_PARAMS:
        raise UsageError(f"unknown family kind {kind!r} in spec {spec!r}")
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            key = key.strip().lower()
            if not eq or key not in _KIND_PARAMS[kind]:
                raise UsageError(f"bad parameter {item!r} for family {kind!r}")
            if key in params:
                raise UsageError(f"duplicate parameter {key!r} in {spec!r}")
            try:
                params[key] = float(val)
            except ValueError as exc:
                raise UsageError(f"non-numeric value in {item!r}") from exc
    try:
        if kind == "gp":
            return ExactGP(params.pop("gamma"))
        if kind == "burr":
            return Burr(params.pop("c"), params.pop("k"))
        if kind == "revburr":
            return ReversedBurr(params.pop("c"), params.pop("k"),
                                params.pop("xstar", 0.0))
        return Gumbel()
    except KeyError as exc:
        raise UsageError(f"missing parameter {exc.args[0]!r} for {kind!r}") from exc
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
