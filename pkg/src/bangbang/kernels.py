"""Decoherence kernels: spectral weight and the dephasing/dissipation exponents.

Both kernels are improper oscillatory integrals over the bath frequency. They
are evaluated with composite Gauss-Legendre panels sized to resolve the
(1 - cos omega*tau) oscillation, truncated where the exponential cutoff makes
the tail negligible, with panel doubling until two successive estimates agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np


class Regime(str, Enum):
    ADIABATIC = "adiabatic"
    THERMAL = "thermal"


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the bath coupling, in Rabi-normalized units."""

    regime: Regime = Regime.ADIABATIC
    gamma: float = 1.0      # dimensionless decoherence strength, >= 0
    n: int = 3              # bath dimensionality; integrand integrable for n >= 1
    omega_c: float = 10.0   # spectral cutoff frequency
    beta0: float = 1.0      # dimensionless inverse temperature (opaque scale)
    omega12: float = 1.0    # level splitting; enters the thermal kernel only

    def __post_init__(self):
        for name in ("gamma", "omega_c", "beta0", "omega12"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma!r}")
        for name in ("omega_c", "beta0", "omega12"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1 for an integrable kernel, got {self.n!r}")


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    upper_cut_multiplier: float = 40.0   # e^-40 < 1e-17: tail below double precision
    singular_halfwidth: float | None = None  # defaults to 1e-3 * omega12 at use site
    max_doublings: int = 10

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "upper_cut_multiplier"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.singular_halfwidth is not None and self.singular_halfwidth <= 0:
            raise ValueError(
                f"singular_halfwidth must be > 0, got {self.singular_halfwidth!r}"
            )

    def halfwidth(self, omega12: float) -> float:
        return self.singular_halfwidth if self.singular_halfwidth is not None else 1e-3 * omega12


class QuadratureError(RuntimeError):
    """Panel doubling exhausted without meeting tolerance; carries the best estimate."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate {estimate!r}, error bound {error_bound:.3e})")
        self.estimate = estimate
        self.error_bound = error_bound


def spectral_function(omega: float, n: int, omega_c: float) -> float:
    """Bath spectral weight omega^(n-2) * exp(-omega/omega_c)."""
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega!r}")
    if omega == 0.0:
        if n < 2:
            raise ValueError(f"spectral weight diverges at omega=0 for n={n} < 2")
        return 1.0 if n == 2 else 0.0
    return omega ** (n - 2) * math.exp(-omega / omega_c)


def coth_half(x: np.ndarray) -> np.ndarray:
    """coth(x/2) for x > 0, with the Laurent form 2/x + x/6 below x/2 < 1e-4."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 2e-4
    xs = x[small]
    out[small] = 2.0 / xs + xs / 6.0
    out[~small] = 1.0 / np.tanh(0.5 * x[~small])
    return out


def oscillation_factor(x: np.ndarray, tau: float, halfwidth: float) -> np.ndarray:
    """(1 - cos(x*tau)) / x^2, with the removable zero at x=0 handled by series.

    Outside the window |x| <= halfwidth the stable half-angle form
    2*sin^2(x*tau/2)/x^2 is used; inside, the even series
    tau^2/2 - x^2 tau^4/24 + x^4 tau^6/720.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) <= halfwidth
    xs = x[small]
    t2 = tau * tau
    out[small] = t2 / 2.0 - xs * xs * t2 * t2 / 24.0 + xs ** 4 * t2 ** 3 / 720.0
    xb = x[~small]
    s = np.sin(0.5 * xb * tau)
    out[~small] = 2.0 * s * s / (xb * xb)
    return out


def adiabatic_integrand(omega: np.ndarray, tau: float, params: ModelParams) -> np.ndarray:
    """gamma * G(omega) * (1 - cos omega tau) * coth(beta0 omega / 2), elementwise."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    pos = omega > 0
    w = omega[pos]
    s = np.sin(0.5 * w * tau)
    out[pos] = (
        params.gamma
        * w ** (params.n - 2)
        * np.exp(-w / params.omega_c)
        * 2.0
        * s
        * s
        * coth_half(params.beta0 * w)
    )
    # omega -> 0 limit: ~ omega^(n-1) * tau^2 / beta0; nonzero only for n = 1
    if params.n == 1 and np.any(~pos):
        out[~pos] = params.gamma * tau * tau / params.beta0
    return out


def thermal_integrand(
    omega: np.ndarray, tau: float, params: ModelParams, quad: QuadratureConfig = QuadratureConfig()
) -> np.ndarray:
    """gamma * (1-cos[(w12-w)tau])/(w12-w)^2 * w^3 coth(beta0 w/2) e^(-w/wc)."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    pos = omega > 0
    w = omega[pos]
    out[pos] = (
        params.gamma
        * oscillation_factor(params.omega12 - w, tau, quad.halfwidth(params.omega12))
        * w ** 3
        * coth_half(params.beta0 * w)
        * np.exp(-w / params.omega_c)
    )
    return out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gauss_composite(f, a: float, b: float, n_panels: int) -> float:
    edges = np.linspace(a, b, n_panels + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = centers[:, None] + half[:, None] * _GL_NODES[None, :]
    y = f(x.ravel()).reshape(n_panels, _GL_NODES.size)
    return float(np.sum(half * (y * _GL_WEIGHTS[None, :]).sum(axis=1)))


def _integrate_oscillatory(f, a: float, b: float, tau: float, omega_c: float,
                           quad: QuadratureConfig) -> float:
    """Composite GL with panel width <= min(omega_c, pi/tau)/4, doubled to convergence."""
    if b <= a:
        return 0.0
    width = min(omega_c, math.pi / tau if tau > 0 else math.inf) / 4.0
    n0 = max(4, math.ceil((b - a) / width))
    prev = _gauss_composite(f, a, b, n0)
    bound = math.inf
    for k in range(1, quad.max_doublings + 1):
        cur = _gauss_composite(f, a, b, n0 * 2 ** k)
        bound = abs(cur - prev)
        if bound <= max(quad.abs_tol, quad.rel_tol * abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(
        f"no convergence after {quad.max_doublings} panel doublings on [{a:g}, {b:g}]",
        estimate=prev,
        error_bound=bound,
    )


@lru_cache(maxsize=65536)
def _g_adiabatic_unit(tau: float, n: int, omega_c: float, beta0: float,
                      quad: QuadratureConfig) -> float:
    # gamma == 1; the prefactor is applied by the caller so linearity in gamma is exact
    params = ModelParams(regime=Regime.ADIABATIC, gamma=1.0, n=n, omega_c=omega_c, beta0=beta0)
    cut = quad.upper_cut_multiplier * omega_c
    return _integrate_oscillatory(
        lambda w: adiabatic_integrand(w, tau, params), 0.0, cut, tau, omega_c, quad
    )


@lru_cache(maxsize=65536)
def _g_thermal_unit(tau: float, omega_c: float, beta0: float, omega12: float,
                    quad: QuadratureConfig) -> float:
    params = ModelParams(
        regime=Regime.THERMAL, gamma=1.0, n=3, omega_c=omega_c, beta0=beta0, omega12=omega12
    )
    cut = quad.upper_cut_multiplier * omega_c
    h = quad.halfwidth(omega12)
    f = lambda w: thermal_integrand(w, tau, params, quad)
    # split at the series window around omega12 so panel edges align with the splice
    pieces = [(0.0, max(omega12 - h, 0.0)), (max(omega12 - h, 0.0), min(omega12 + h, cut)),
              (min(omega12 + h, cut), cut)]
    return sum(_integrate_oscillatory(f, a, b, tau, omega_c, quad) for a, b in pieces)


def g_adiabatic(tau: float, params: ModelParams, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Dephasing exponent g_ad(tau); g_ad(0) = 0 exactly, scales linearly in gamma."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    if tau == 0.0 or params.gamma == 0.0:
        return 0.0
    return params.gamma * _g_adiabatic_unit(tau, params.n, params.omega_c, params.beta0, quad)


def g_thermal(tau: float, params: ModelParams, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Dissipation exponent g_th(tau); the integrand's removable singularity at
    omega12 takes the limit value omega12^3 coth(beta0 omega12/2) e^(-omega12/omega_c) tau^2/2."""
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    if tau == 0.0 or params.gamma == 0.0:
        return 0.0
    return params.gamma * _g_thermal_unit(tau, params.omega_c, params.beta0, params.omega12, quad)


def g_kernel(tau: float, params: ModelParams, quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Regime-dispatched kernel."""
    if params.regime is Regime.ADIABATIC:
        return g_adiabatic(tau, params, quad)
    return g_thermal(tau, params, quad)


def tabulate_kernel(taus, params: ModelParams, quad: QuadratureConfig = QuadratureConfig()) -> list[float]:
    """Pointwise kernel table for a strictly increasing tau grid (cached upstream)."""
    taus = list(taus)
    if taus and taus[0] < 0:
        raise ValueError(f"first tau must be >= 0, got {taus[0]!r}")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly increasing")
    out = []
    for tau in taus:
        try:
            out.append(g_kernel(tau, params, quad))
        except QuadratureError as exc:
            raise QuadratureError(
                f"kernel evaluation failed at tau={tau!r}: {exc}",
                estimate=exc.estimate,
                error_bound=exc.error_bound,
            ) from exc
    return out
