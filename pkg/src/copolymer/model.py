"""Disorder laws and renewal inter-arrival laws for the copolymer model.

A copolymer instance is built from three ingredients:

* a :class:`DisorderLaw` for the IID monomer charges (zero mean, unit
  variance, finite log moment generating function everywhere),
* an :class:`InterArrivalLaw` for the interface-contact renewal process,
  with polynomial tail exponent ``alpha``,
* :class:`CopolymerParams` holding the coupling ``lam`` (inverse
  temperature) and the charge bias ``h``.

All objects are immutable after construction and safe to share across
threads.  Disorder sampling is counter-based: the stream for a given
``(master_seed, sample_index)`` pair is derived by hashing, so samples are
reproducible and independent of the order in which they are generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, zeta

__all__ = [
    "DisorderLaw",
    "InterArrivalLaw",
    "CopolymerParams",
    "QuenchedSample",
]

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class QuenchedSample:
    """One disorder realization: ``n`` IID charges plus its seed identity."""

    omega: np.ndarray
    master_seed: int
    sample_index: int

    def __len__(self) -> int:
        return len(self.omega)


@dataclass(frozen=True)
class DisorderLaw:
    """Centered unit-variance charge distribution with finite MGF.

    Supported kinds: ``gaussian``, ``rademacher`` (fair signs) and
    ``uniform_bounded``.  The uniform law is rescaled to unit variance at
    construction, which maps any requested half-width onto sqrt(3); the
    effective half-width is stored.
    """

    kind: str
    half_width: float = 0.0

    @staticmethod
    def gaussian() -> "DisorderLaw":
        return DisorderLaw("gaussian")

    @staticmethod
    def rademacher() -> "DisorderLaw":
        return DisorderLaw("rademacher")

    @staticmethod
    def uniform_bounded(half_width: float = _SQRT3) -> "DisorderLaw":
        if half_width <= 0:
            raise ValueError("half_width must be positive")
        # unit-variance rescaling: uniform[-a, a] * (sqrt(3)/a) = uniform[-sqrt3, sqrt3]
        return DisorderLaw("uniform_bounded", half_width=_SQRT3)

    @staticmethod
    def from_name(name: str) -> "DisorderLaw":
        if name == "gaussian":
            return DisorderLaw.gaussian()
        if name == "rademacher":
            return DisorderLaw.rademacher()
        if name in ("uniform", "uniform_bounded"):
            return DisorderLaw.uniform_bounded()
        raise ValueError(f"unknown disorder law {name!r}")

    def log_mgf(self, t):
        """log E[exp(t * charge)], valid for every real ``t``.

        gaussian: t^2/2; rademacher: log cosh t; uniform: log(sinh(at)/(at))
        with the removable singularity at t = 0 handled by series.
        """
        t = np.asarray(t, dtype=float)
        if self.kind == "gaussian":
            out = 0.5 * t * t
        elif self.kind == "rademacher":
            # log cosh t = |t| + log1p(exp(-2|t|)) - log 2, stable for large |t|
            a = np.abs(t)
            out = a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)
        elif self.kind == "uniform_bounded":
            x = self.half_width * t
            ax = np.abs(x)
            small = ax < 1e-4
            # sinh(x)/x = 1 + x^2/6 + x^4/120 + ...
            series = np.log1p(x * x / 6.0 * (1.0 + x * x / 20.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                exact = ax + np.log1p(-np.exp(-2.0 * ax)) - np.log(2.0 * ax)
            out = np.where(small, series, exact)
        else:  # pragma: no cover
            raise ValueError(f"unknown disorder kind {self.kind!r}")
        return float(out) if out.ndim == 0 else out

    def sample(self, n: int, master_seed: int, sample_index: int) -> QuenchedSample:
        """Draw ``n`` IID charges from the stream keyed by (master_seed, sample_index)."""
        if n <= 0:
            raise ValueError(f"sample size must be positive, got {n}")
        seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(sample_index,))
        rng = np.random.default_rng(seq)
        if self.kind == "gaussian":
            omega = rng.standard_normal(n)
        elif self.kind == "rademacher":
            omega = rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0
        elif self.kind == "uniform_bounded":
            omega = rng.uniform(-self.half_width, self.half_width, size=n)
        else:  # pragma: no cover
            raise ValueError(f"unknown disorder kind {self.kind!r}")
        omega.setflags(write=False)
        return QuenchedSample(omega=omega, master_seed=master_seed, sample_index=sample_index)


@dataclass(frozen=True)
class InterArrivalLaw:
    """Persistent renewal step law K(n) with K(n) ~ c_K / n^(1+alpha).

    ``zeta_tail``: K(n) = n^-(1+alpha) / zeta(1+alpha) on n >= 1 (period 1),
    so K(n) n^(1+alpha) = 1/zeta(1+alpha) exactly.

    ``srw_return``: first return time of the simple symmetric random walk,
    K(2k) = C(2k,k) 2^-2k / (2k-1), zero on odd n (period 2, alpha = 1/2).
    Its survival function has the closed form P(tau1 > 2k) = C(2k,k) 2^-2k,
    used instead of subtraction.
    """

    kind: str
    alpha: float
    period: int
    _log_zeta_norm: float = field(default=0.0, repr=False)

    @staticmethod
    def zeta_tail(alpha: float) -> "InterArrivalLaw":
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        return InterArrivalLaw(
            "zeta_tail", alpha=alpha, period=1,
            _log_zeta_norm=math.log(zeta(1.0 + alpha, 1.0)),
        )

    @staticmethod
    def srw_return() -> "InterArrivalLaw":
        return InterArrivalLaw("srw_return", alpha=0.5, period=2)

    @staticmethod
    def from_name(name: str, alpha: float = 0.5) -> "InterArrivalLaw":
        if name in ("zeta", "zeta_tail"):
            return InterArrivalLaw.zeta_tail(alpha)
        if name in ("srw", "srw_return"):
            return InterArrivalLaw.srw_return()
        raise ValueError(f"unknown inter-arrival family {name!r}")

    # -- pmf / survival -------------------------------------------------

    def log_pmf_array(self, n_max: int) -> np.ndarray:
        """log K(n) for n = 0..n_max (entry 0 is -inf; odd entries -inf for srw)."""
        n = np.arange(n_max + 1, dtype=float)
        out = np.full(n_max + 1, -np.inf)
        if self.kind == "zeta_tail":
            with np.errstate(divide="ignore"):
                out[1:] = -(1.0 + self.alpha) * np.log(n[1:]) - self._log_zeta_norm
        elif self.kind == "srw_return":
            k = np.arange(1, n_max // 2 + 1, dtype=float)
            if len(k):
                # log C(2k,k) 2^-2k = lgamma(2k+1) - 2 lgamma(k+1) - 2k log 2
                log_b = gammaln(2 * k + 1) - 2 * gammaln(k + 1) - 2 * k * math.log(2.0)
                out[2::2] = log_b - np.log(2 * k - 1)
        else:  # pragma: no cover
            raise ValueError(f"unknown inter-arrival kind {self.kind!r}")
        return out

    def pmf(self, n: int) -> float:
        """K(n) = P(tau1 = n) for integer n >= 1."""
        if n < 1:
            raise ValueError("pmf is defined for n >= 1")
        if self.kind == "zeta_tail":
            return math.exp(-(1.0 + self.alpha) * math.log(n) - self._log_zeta_norm)
        if n % 2 == 1:
            return 0.0
        k = n // 2
        log_b = gammaln(2 * k + 1) - 2 * gammaln(k + 1) - 2 * k * math.log(2.0)
        return math.exp(log_b - math.log(2 * k - 1))

    def log_tail_array(self, n_max: int) -> np.ndarray:
        """log P(tau1 > n) for n = 0..n_max, via analytic remainders."""
        with np.errstate(divide="ignore"):
            return np.log(self.tail_array(n_max))

    def tail_array(self, n_max: int) -> np.ndarray:
        """P(tau1 > n) for n = 0..n_max (no cancellation: analytic tail)."""
        out = np.empty(n_max + 1)
        out[0] = 1.0
        if n_max == 0:
            return out
        if self.kind == "zeta_tail":
            n = np.arange(1, n_max + 1, dtype=float)
            # sum_{m>n} m^-(1+a) = hurwitz_zeta(1+a, n+1)
            out[1:] = zeta(1.0 + self.alpha, n + 1.0) * math.exp(-self._log_zeta_norm)
        else:
            # P(tau1 > n) = C(2k,k) 2^-2k with k = floor(n/2) (and b_0 = 1):
            # first returns are even, so tail(2k+1) = tail(2k) = b_k
            out[1] = 1.0
            k = np.arange(1, n_max // 2 + 1, dtype=float)
            if len(k):
                b = np.exp(gammaln(2 * k + 1) - 2 * gammaln(k + 1) - 2 * k * math.log(2.0))
                out[2::2] = b
                n_odd = len(out[3::2])
                out[3::2] = b[:n_odd]
        return out

    def tail(self, n: int) -> float:
        """P(tau1 > n) for integer n >= 0."""
        if n < 0:
            raise ValueError("tail is defined for n >= 0")
        if n == 0:
            return 1.0
        if self.kind == "zeta_tail":
            return float(zeta(1.0 + self.alpha, n + 1.0)) * math.exp(-self._log_zeta_norm)
        k = n // 2  # tail(2k) = tail(2k+1) = b_k, b_0 = 1
        if k == 0:
            return 1.0
        log_b = gammaln(2 * k + 1) - 2 * gammaln(k + 1) - 2 * k * math.log(2.0)
        return math.exp(log_b)

    def pmf_gamma_tail_bounds(self, n_cut: int, gamma: float) -> tuple[float, float]:
        """Rigorous bounds (lo, hi) on sum_{n > n_cut} K(n)^gamma.

        Requires gamma * (1 + alpha) > 1.  zeta_tail admits the exact value
        through the Hurwitz zeta; srw_return is bounded by integral
        comparison of the Stirling envelope b_k <= 1/sqrt(pi k).
        """
        s = gamma * (1.0 + self.alpha)
        if s <= 1.0:
            return (math.inf, math.inf)
        if self.kind == "zeta_tail":
            exact = float(zeta(s, n_cut + 1.0)) * math.exp(-gamma * self._log_zeta_norm)
            return (exact, exact)
        if gamma == 1.0:
            t = self.tail(n_cut)
            return (t, t)
        # terms at n = 2k for k > k0; K(2k)^g <= (pi k)^(-g/2) (2k-1)^(-g)
        k0 = n_cut // 2
        g = gamma

        def env(x: float) -> float:
            return (math.pi * x) ** (-g / 2.0) * (2.0 * x - 1.0) ** (-g)

        # decreasing envelope: sum_{k>k0} env(k) <= env(k0+1) + integral_{k0+1}^inf env
        # and integral env(x) dx <= pi^(-g/2) * x^(1-3g/2)/(3g/2-1) at the lower limit
        a = k0 + 1.0
        integral_hi = math.pi ** (-g / 2.0) * a ** (1.0 - 1.5 * g) / (1.5 * g - 1.0)
        hi = env(a) + integral_hi
        return (0.0, hi)


@dataclass(frozen=True)
class CopolymerParams:
    """Coupling strength ``lam`` (lambda >= 0) and charge bias ``h`` >= 0."""

    lam: float
    h: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.h < 0:
            raise ValueError("h must be nonnegative")
