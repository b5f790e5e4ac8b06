"""Conservation laws from the Riccati form of the spectral problem.

With ``F = phi2/phi1`` and ``G = phi3/phi1`` the spectral problem gives

    F_x = -2w - 2 + (2 lambda - v) F + beta G - F^2 - alpha F G
    G_x = beta - alpha F + (lambda - v/2) G - G F

(``G`` is odd, so ``G^2 = 0``).  Expanding ``F = sum f_j lambda^-j`` and
``G = sum g_j lambda^-j`` turns these into recursions, and
``(ln phi1)_x = -lambda + v/2 + F + alpha G`` is a conserved density whose
flux is ``(ln phi1)_t = N_11 + N_12 F + N_13 G``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .hierarchy import HierarchyConfig, build_N, flow
from .laxmatrix import time_derivative
from .superpoly import SPoly, d_x, jet

__all__ = [
    "riccati_coefficients",
    "riccati_residual",
    "density",
    "flux",
    "ConservationCheck",
    "verify_conservation",
]

HALF = Fraction(1, 2)


def riccati_coefficients(n_max: int) -> tuple[list[SPoly], list[SPoly]]:
    """Lists ``f`` and ``g`` with ``f[j], g[j]`` for ``j = 1..n_max`` (index 0 is zero)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    v, w, a, b = jet("v"), jet("w"), jet("alpha"), jet("beta")
    f = [SPoly()] * (n_max + 1)
    g = [SPoly()] * (n_max + 1)
    f[1] = w + 1
    g[1] = -b
    for n in range(1, n_max):
        ff = SPoly()
        fg = SPoly()
        for l in range(1, n):
            ff = ff + f[l] * f[n - l]
            fg = fg + f[l] * g[n - l]
        f[n + 1] = (d_x(f[n]) + v * f[n] - b * g[n] + ff + a * fg).scale(HALF)
        g[n + 1] = d_x(g[n]) + a * f[n] + (v * g[n]).scale(HALF) + fg
    return f, g


def riccati_residual(n_max: int) -> list[tuple[SPoly, SPoly]]:
    """Coefficients of ``lambda^(1-k)``, ``k = 0..n_max-1``, of both Riccati equations
    after substituting the truncated series.  Every entry vanishes when the
    recursion is right; the last power is left out because it needs ``f_{n_max+1}``.
    """
    f, g = riccati_coefficients(n_max)
    v, w, a, b = jet("v"), jet("w"), jet("alpha"), jet("beta")

    def coef(series, k):
        return series[k] if 1 <= k <= n_max else SPoly()

    out = []
    # the coefficient of lambda^(-k) in each equation, k = 0 .. n_max - 1
    for k in range(n_max):
        ff = sum((coef(f, l) * coef(f, k - l) for l in range(1, k)), SPoly())
        fg = sum((coef(f, l) * coef(g, k - l) for l in range(1, k)), SPoly())
        lhs_f = d_x(coef(f, k))
        rhs_f = (
            (-(w.scale(2)) - 2 if k == 0 else SPoly())
            + coef(f, k + 1).scale(2)
            - v * coef(f, k)
            + b * coef(g, k)
            - ff
            - a * fg
        )
        lhs_g = d_x(coef(g, k))
        rhs_g = (b if k == 0 else SPoly()) - a * coef(f, k) + coef(g, k + 1) - (v * coef(g, k)).scale(HALF) - fg
        out.append((lhs_f - rhs_f, lhs_g - rhs_g))
    return out


def density(n: int) -> SPoly:
    """``sigma_n = f_n + alpha g_n``."""
    f, g = riccati_coefficients(n)
    return f[n] + jet("alpha") * g[n]


def flux(n: int, flow_index: int, config: HierarchyConfig) -> SPoly:
    """Coefficient of ``lambda^-n`` in ``N_11 + N_12 F + N_13 G`` for the flow ``t_{flow_index}``."""
    if n < 1:
        raise ValueError("flux index must be >= 1")
    N = build_N(flow_index, config)
    top = flow_index + n
    f, g = riccati_coefficients(top + 1)
    out = N[0, 0][-n]
    for k, c in N[0, 1].coeffs.items():
        j = n + k
        if 1 <= j <= top + 1:
            out = out + c * f[j]
    for k, c in N[0, 2].coeffs.items():
        j = n + k
        if 1 <= j <= top + 1:
            out = out + c * g[j]
    return out


@dataclass
class ConservationCheck:
    n: int
    density: SPoly
    flux: SPoly
    residual: SPoly

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def verify_conservation(n: int, flow_index: int = 2, config: HierarchyConfig | None = None) -> ConservationCheck:
    """``D_t sigma_n - D_x theta_n`` along the flow ``t_{flow_index}``."""
    config = config or HierarchyConfig(2, flow_index)
    sigma = density(n)
    theta = flux(n, flow_index, config)
    res = time_derivative(sigma, flow(flow_index, config)) - d_x(theta)
    return ConservationCheck(n, sigma, theta, res)
