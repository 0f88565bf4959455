"""Gevrey-2 phase machinery: radius loss theta(t), phase Phi(t, xi),
exponentially weighted fields, band-limited Gevrey initial data, and the
weighted initial-data norms.

The radius evolves as

    theta_dot(t) = sqrt(delta) e^{-K t / 2},   theta(0) = 0,
    theta(t) = (2 sqrt(delta) / K) (1 - e^{-K t / 2}),
    delta = (a K / (4 lam))^2,

so the surviving radius a - lam theta(t) = (a/2)(1 + e^{-K t/2}) stays
above a/2 forever.   K = min(1/6, 1/(4 (1 + poincare))) with the sharp
strip Poincare constant 1/pi^2 by default, which lands K = 1/6 exactly.

The phase Phi(t, xi) = (a - lam theta(t)) |xi|^{1/2} is concave in |xi|
and hence subadditive, which is what the paraproduct estimates need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import paley
from .grid import Field, Grid, dy, mean_y

__all__ = [
    "GevreyParams",
    "theta",
    "theta_dot",
    "radius",
    "phi",
    "apply_gevrey",
    "make_gevrey_data",
    "initial_norm_H0",
    "initial_norm_H1",
    "besov_multi",
    "PROFILES",
]

SPECTRAL_FLOOR = 1e-13
TRUST_LOG_LEVEL = -3.0
_EXP_OVERFLOW = 700.0  # log of float64 range, with margin


@dataclass(frozen=True)
class GevreyParams:
    """Radius a, loss multiplier lam, and the Poincare constant.

    K and delta are always derived, never stored, so they cannot drift
    out of sync with (a, lam, poincare).
    """

    a: float = 0.5
    lam: float = 1.0
    poincare: float = 1.0 / np.pi**2

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError(f"radius a must be positive, got {self.a}")
        if self.lam < 1.0:
            raise ValueError(f"lam must be >= 1, got {self.lam}")
        if self.poincare <= 0.0:
            raise ValueError(f"poincare constant must be positive, got {self.poincare}")

    @property
    def K(self) -> float:
        return min(1.0 / 6.0, 1.0 / (4.0 * (1.0 + self.poincare)))

    @property
    def delta(self) -> float:
        return (self.a * self.K / (4.0 * self.lam)) ** 2

    @property
    def sqrt_delta(self) -> float:
        return self.a * self.K / (4.0 * self.lam)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError(f"time must be nonnegative, got {t}")
    return t


def theta(t, p: GevreyParams):
    """Closed-form accumulated radius loss."""
    t = _check_t(t)
    out = (2.0 * p.sqrt_delta / p.K) * (1.0 - np.exp(-p.K * t / 2.0))
    return float(out) if out.ndim == 0 else out


def theta_dot(t, p: GevreyParams):
    """Rate of radius loss: sqrt(delta) e^{-K t / 2}."""
    t = _check_t(t)
    out = p.sqrt_delta * np.exp(-p.K * t / 2.0)
    return float(out) if out.ndim == 0 else out


def radius(t, p: GevreyParams):
    """Surviving Gevrey radius a - lam theta(t) = (a/2)(1 + e^{-K t/2})."""
    t = _check_t(t)
    out = p.a - p.lam * theta(t, p)
    return float(out) if np.ndim(out) == 0 else out


def phi(t, xi, p: GevreyParams):
    """Phase Phi(t, xi) = (a - lam theta(t)) |xi|^{1/2}."""
    return radius(t, p) * np.sqrt(np.abs(xi))


def apply_gevrey(
    f: Field, t: float, p: GevreyParams, sign: int, report: dict | None = None
) -> Field:
    """Multiply mode m by e^{sign Phi(t, xi_m)}.

    For sign = +1 (amplification) two guards apply: coefficients below
    SPECTRAL_FLOOR relative to the field's max modulus are zeroed before
    weighting, and the weight at the largest grid frequency must not
    overflow float64 for O(1) coefficients.  If `report` is a dict it
    receives the trust horizon: the largest |xi| at which
    Phi + log(relative coefficient) still exceeds -3, i.e. where the
    weighted output stands above amplified roundoff.
    """
    if sign not in (-1, 1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    g = f.grid
    ph = phi(t, g.abs_xi, p)
    if sign > 0:
        if ph.max() > _EXP_OVERFLOW:
            raise OverflowError(
                f"Gevrey weight e^{{{ph.max():.1f}}} at |xi|={g.abs_xi.max():.1f} "
                "overflows float64; shrink the radius or the grid"
            )
        c = f.coeff.copy()
        scale = np.abs(c).max()
        if scale > 0.0:
            c[np.abs(c) < SPECTRAL_FLOOR * scale] = 0.0
        if report is not None:
            mode_mag = np.abs(c).max(axis=1)
            with np.errstate(divide="ignore"):
                level = ph + np.log(
                    np.where(mode_mag > 0, mode_mag, np.nan) / max(scale, 1e-300)
                )
            trusted = g.abs_xi[np.nan_to_num(level, nan=-np.inf) > TRUST_LOG_LEVEL]
            report["trust_horizon"] = float(trusted.max()) if trusted.size else 0.0
            report["floored_modes"] = int(np.sum((mode_mag == 0) & (g.abs_xi > 0)))
        return Field(g, c * np.exp(ph)[:, None])
    return Field(g, f.coeff * np.exp(-ph)[:, None])


def _sin2py(y: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * np.pi * y)


PROFILES = {"sin2py": _sin2py}


def make_gevrey_data(
    grid: Grid,
    p: GevreyParams,
    amplitude: float = 1e-3,
    m_max: int = 8,
    profile="sin2py",
) -> tuple[Field, Field]:
    """Band-limited Gevrey data: u0_hat(m, y) = c e^{-a sqrt(|xi_m|)} P(y).

    Modes 1 <= |m| <= m_max carry the profile P (default sin(2 pi y));
    u1 = 0.  P must vanish at both walls and have zero y-mean (discrete
    trapezoid), which makes the compatibility integral vanish identically.
    """
    if isinstance(profile, str):
        try:
            prof = PROFILES[profile](grid.y)
        except KeyError:
            raise ValueError(f"unknown profile id {profile!r}") from None
    elif callable(profile):
        prof = np.asarray(profile(grid.y), dtype=float)
    else:
        prof = np.asarray(profile, dtype=float)
    if prof.shape != (grid.Ny,):
        raise ValueError(f"profile has shape {prof.shape}, expected {(grid.Ny,)}")
    if abs(prof[0]) > 1e-12 or abs(prof[-1]) > 1e-12:
        raise ValueError("vertical profile must vanish at y = 0 and y = 1")
    prof = prof.copy()
    prof[0] = prof[-1] = 0.0  # pin the walls exactly (sin(2 pi) is ~1e-16)
    pmean = float(prof @ grid.trapz_w)
    if abs(pmean) > 1e-12:
        raise ValueError(f"vertical profile must have zero y-mean, got {pmean:.3e}")
    if not (1 <= m_max <= grid.Nx // 2 - 1):
        raise ValueError(f"m_max must lie in [1, Nx/2 - 1], got {m_max}")
    c = np.zeros((grid.Nx, grid.Ny), dtype=np.complex128)
    for m in range(1, m_max + 1):
        w = amplitude * np.exp(-p.a * np.sqrt(grid.xi[m]))
        c[m, :] = w * prof
        c[-m, :] = w * prof
    u0 = Field(grid, c)
    u1 = Field.zeros(grid)
    compat = np.abs(mean_y(u0)).max()
    if compat > 1e-12 * max(amplitude, 1e-300):
        raise AssertionError(f"compatibility integral {compat:.3e} too large")
    return u0, u1


def besov_multi(fields, s: float) -> float:
    """Besov norm of a component tuple: per-block root-sum-square, then l1."""
    first = fields if isinstance(fields, Field) else fields[0]
    bank = paley.get_bank(first.grid)
    return float(
        np.sum(2.0 ** (bank.ks * s) * paley.block_norms(fields, bank))
    )


def initial_norm_H0(u0: Field, u1: Field, s: float, p: GevreyParams) -> float:
    """Weighted data norm: ||W(u0,u1,dy u0)||_{B^s} + sqrt(aK)||W u0||_{B^{s+1/4}}
    + aK ||W u0||_{B^{s+1/2}}, with W = e^{a|D_x|^{1/2}}."""
    w_u0 = apply_gevrey(u0, 0.0, p, +1)
    w_u1 = apply_gevrey(u1, 0.0, p, +1)
    w_dyu0 = apply_gevrey(dy(u0), 0.0, p, +1)
    aK = p.a * p.K
    return (
        besov_multi((w_u0, w_u1, w_dyu0), s)
        + np.sqrt(aK) * besov_multi(w_u0, s + 0.25)
        + aK * besov_multi(w_u0, s + 0.5)
    )


def initial_norm_H1(
    u0: Field,
    v0: Field,
    u1: Field,
    v1: Field,
    eps: float,
    p: GevreyParams,
) -> float:
    """Weighted data norm for the anisotropic system at aspect ratio eps.

    ||W(u0, e v0, e dx(u0, e v0), dy(u0, e v0), u1, e v1)||_{B^{1/2}}
    + sqrt(aK) ||W(u0, e v0)||_{B^{3/4}} + aK ||W(u0, e v0)||_{B^1}.
    """
    from .grid import dx as dx_op

    def W(f):
        return apply_gevrey(f, 0.0, p, +1)

    pair = (W(u0), eps * W(v0))
    big = (
        W(u0),
        eps * W(v0),
        eps * W(dx_op(u0)),
        eps * eps * W(dx_op(v0)),
        W(dy(u0)),
        eps * W(dy(v0)),
        W(u1),
        eps * W(v1),
    )
    aK = p.a * p.K
    return (
        besov_multi(big, 0.5)
        + np.sqrt(aK) * besov_multi(pair, 0.75)
        + aK * besov_multi(pair, 1.0)
    )
