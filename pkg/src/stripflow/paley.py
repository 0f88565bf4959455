"""Horizontal dyadic-block machinery: smooth cutoffs, block projectors,
Besov norms, time-integrated (Chemin-Lerner style) norm accumulators,
paraproduct decomposition, and Bernstein-ratio checks.

All localization happens in the x frequency only; y is untouched.  The
cutoff pair (chi, phi) is built from the classical smooth bump

    h(t) = exp(-1/t) for t > 0, else 0,
    g(t) = h(t) / (h(t) + h(1 - t))        (smooth 0 -> 1 step on [0, 1]),
    chi(tau) = 1 - g(3 (tau - 1)),          (1 for tau <= 1, 0 for tau >= 4/3)
    phi(tau) = chi(tau / 2) - chi(tau),     (supported in [3/4, 8/3])

so the dyadic sums telescope exactly: for every tau > 0,

    sum_k phi(2^{-k} tau) = 1    and    chi(tau) + sum_{j>=0} phi(2^{-j} tau) = 1.

Conventions on the periodic strip:
  * block projectors delta_k never touch the m = 0 (x-mean) mode;
  * besov_norm and block_norms fold the m = 0 energy into the lowest
    block k_min, so solver fields with tiny means get finite norms;
  * the paraproduct reconstruction identity on the torus therefore reads
    T_f g + T_g f + R(f, g) = f g - mean_x(f) mean_x(g); it is exact
    (to rounding) for zero-x-mean dealiased fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .grid import Field, Grid, dx, l2_norm, multiply, to_physical

__all__ = [
    "chi",
    "phi",
    "DyadicBank",
    "build_bank",
    "get_bank",
    "delta_k",
    "S_k",
    "block_norms",
    "besov_norm",
    "bony",
    "BernsteinReport",
    "bernstein_check",
    "NormSeries",
    "norm_series_update",
]


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """g(t): C^infinity, 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        ha = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        hb = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    return ha / (ha + hb)


def chi(tau):
    """Low-frequency cutoff: 1 for tau <= 1, 0 for tau >= 4/3, smooth between."""
    return 1.0 - _smooth_step(3.0 * (np.asarray(tau, dtype=float) - 1.0))


def phi(tau):
    """Dyadic bump chi(tau/2) - chi(tau), supported in [3/4, 8/3]."""
    tau = np.asarray(tau, dtype=float)
    return chi(tau / 2.0) - chi(tau)


@dataclass
class DyadicBank:
    """Sampled cutoffs for one grid: phi/chi at every grid frequency.

    k runs over the contiguous range [k_min, k_max] of blocks that see any
    nonzero grid frequency; row i of the sample arrays is block k_min + i.
    """

    grid: Grid
    k_min: int
    k_max: int
    phi_samples: np.ndarray  # (K, Nx): phi(2^{-k} |xi_m|)
    chi_samples: np.ndarray  # (K, Nx): chi(2^{-k} |xi_m|)
    phi_sq: np.ndarray = dataclass_field(init=False)

    def __post_init__(self):
        self.phi_sq = self.phi_samples**2

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def row(self, k: int) -> np.ndarray:
        """phi(2^{-k} |xi|) samples for any integer k (zeros outside range)."""
        if self.k_min <= k <= self.k_max:
            return self.phi_samples[k - self.k_min]
        return phi(self.grid.abs_xi / 2.0**k)

    def chi_row(self, k: int) -> np.ndarray:
        if self.k_min <= k <= self.k_max:
            return self.chi_samples[k - self.k_min]
        return chi(self.grid.abs_xi / 2.0**k)


def build_bank(grid: Grid) -> DyadicBank:
    """Sample the dyadic cutoffs on a grid's frequency set."""
    nonzero = grid.abs_xi[grid.abs_xi > 0.0]
    lo, hi = nonzero.min(), nonzero.max()
    # phi(2^{-k} tau) != 0 requires 2^k in [3 tau / 8, 4 tau / 3]
    k_candidates = np.arange(
        int(np.floor(np.log2(3.0 * lo / 8.0))) - 1,
        int(np.ceil(np.log2(4.0 * hi / 3.0))) + 2,
    )
    rows = [phi(grid.abs_xi / 2.0**k) for k in k_candidates]
    live = [i for i, r in enumerate(rows) if np.any(r > 0.0)]
    k_min = int(k_candidates[live[0]])
    k_max = int(k_candidates[live[-1]])
    phi_samples = np.array(rows[live[0] : live[-1] + 1])
    chi_samples = np.array(
        [chi(grid.abs_xi / 2.0**k) for k in range(k_min, k_max + 1)]
    )
    return DyadicBank(grid, k_min, k_max, phi_samples, chi_samples)


_BANKS: dict[tuple, DyadicBank] = {}


def get_bank(grid: Grid) -> DyadicBank:
    """Per-grid cached bank (construction is one-shot and read-only after)."""
    bank = _BANKS.get(grid.key)
    if bank is None:
        bank = _BANKS[grid.key] = build_bank(grid)
    return bank


def delta_k(f: Field, k: int, bank: DyadicBank | None = None) -> Field:
    """Dyadic block projector: multiply coefficients by phi(2^{-k}|xi|)."""
    bank = bank or get_bank(f.grid)
    return Field(f.grid, f.coeff * bank.row(k)[:, None])


def S_k(f: Field, k: int, bank: DyadicBank | None = None) -> Field:
    """Low-pass up to block k: multiply by chi(2^{-k}|xi|) (keeps the mean)."""
    bank = bank or get_bank(f.grid)
    return Field(f.grid, f.coeff * bank.chi_row(k)[:, None])


def _mode_density(fields) -> np.ndarray:
    """Per-mode squared-L2 density: trapz_y sum_components |c_m(y)|^2."""
    if isinstance(fields, Field):
        fields = (fields,)
    dens = None
    for f in fields:
        d = (f.coeff.real**2 + f.coeff.imag**2) @ f.grid.trapz_w
        dens = d if dens is None else dens + d
    return dens


def block_norms(fields, bank: DyadicBank | None = None) -> np.ndarray:
    """Per-block L2 norms ||delta_k f||, m = 0 energy folded into k_min.

    `fields` may be a single Field or a sequence of Fields: components of a
    vector field are combined in L2 inside each block (root-sum-square)
    before any summation over blocks.
    """
    first = fields if isinstance(fields, Field) else fields[0]
    bank = bank or get_bank(first.grid)
    dens = _mode_density(fields)
    sq = bank.phi_sq @ dens
    sq[0] += dens[0]  # fold the x-mean mode into block k_min
    return np.sqrt(first.grid.Lx * sq)


def besov_norm(f: Field, s: float, bank: DyadicBank | None = None) -> float:
    """l1-over-blocks Besov norm: sum_k 2^{ks} ||delta_k f||_{L2}."""
    bank = bank or get_bank(f.grid)
    return float(np.sum(2.0 ** (bank.ks * s) * block_norms(f, bank)))


def bony(f: Field, g: Field):
    """Paraproduct split of f g into (T_f g, T_g f, R(f, g)).

    T_f g = sum_k S_{k-1} f * delta_k g, and R collects the diagonal
    interactions sum_k delta_k f * (delta_{k-1} + delta_k + delta_{k+1}) g.
    All products are dealiased.  On the torus the three pieces rebuild
    f g - mean_x(f) mean_x(g) exactly for dealiased inputs.
    """
    f._check_same_grid(g)
    bank = get_bank(f.grid)
    Tfg = Field.zeros(f.grid)
    Tgf = Field.zeros(f.grid)
    R = Field.zeros(f.grid)
    blocks_f = {k: delta_k(f, k, bank) for k in range(bank.k_min - 1, bank.k_max + 2)}
    blocks_g = {k: delta_k(g, k, bank) for k in range(bank.k_min - 1, bank.k_max + 2)}
    for k in bank.ks:
        Tfg = Tfg + multiply(S_k(f, k - 1, bank), blocks_g[k])
        Tgf = Tgf + multiply(S_k(g, k - 1, bank), blocks_f[k])
        tilde = blocks_g[k - 1] + blocks_g[k] + blocks_g[k + 1]
        R = R + multiply(blocks_f[k], tilde)
    return Tfg, Tgf, R


@dataclass
class BernsteinReport:
    k: int
    ratio: float | None  # ||dx delta_k f|| / (2^k ||delta_k f||)
    mixed_ratio: float | None  # sup_x ||f(x,.)||_{L2_y} / (2^{k/2} ||f||)
    block_l2: float
    skipped: bool


def bernstein_check(f: Field, k: int, bank: DyadicBank | None = None) -> BernsteinReport:
    """Empirical Bernstein ratios for the block-k piece of f.

    The first ratio is the mean horizontal frequency of the block in units
    of 2^k; the cutoff support pins it inside [3/4, 8/3].  (The Nyquist
    bin does not contribute to the numerator because dx zeroes it, so feed
    dealiased fields.)  A spectrally empty block is reported as skipped.
    """
    bank = bank or get_bank(f.grid)
    blk = delta_k(f, k, bank)
    l2 = l2_norm(blk)
    if l2 <= 1e-13 * max(l2_norm(f), 1e-300):
        return BernsteinReport(k, None, None, l2, True)
    ratio = l2_norm(dx(blk)) / (2.0**k * l2)
    if not (0.75 <= ratio <= 8.0 / 3.0):
        raise AssertionError(
            f"block-{k} frequency ratio {ratio:.6f} escaped [3/4, 8/3]"
        )
    vals = to_physical(blk)
    g = f.grid
    col_l2 = np.sqrt((vals**2) @ g.trapz_w)  # ||f(x_i, .)||_{L2_y} per x
    mixed = float(col_l2.max()) / (2.0 ** (k / 2.0) * l2)
    return BernsteinReport(k, float(ratio), mixed, l2, False)


@dataclass
class NormSeries:
    """Running dyadic-block accumulators for one time-weighted norm.

    Tracks, per block k, the trapezoid-in-time integral of

        weight(t) * (e^{rate t} ||delta_k a(t)||_{L2})^2

    and the running max of e^{rate t} ||delta_k a(t)||, from which the
    time-integrated (l2-in-time) and sup-in-time block norms are read off
    as sum_k 2^{ks} sqrt(integral_k) resp. sum_k 2^{ks} max_k.
    """

    s: float
    rate: float = 0.0
    weight_name: str = "one"
    bank: DyadicBank | None = None
    integrals: np.ndarray | None = None
    maxima: np.ndarray | None = None
    last_t: float | None = None
    _last_weighted_sq: np.ndarray | None = None

    def _ensure(self, bank: DyadicBank):
        if self.bank is None:
            self.bank = bank
            n = bank.k_max - bank.k_min + 1
            self.integrals = np.zeros(n)
            self.maxima = np.zeros(n)

    def l2_in_time(self) -> float:
        """sum_k 2^{ks} (integral_k)^{1/2}."""
        if self.bank is None:
            return 0.0
        return float(np.sum(2.0 ** (self.bank.ks * self.s) * np.sqrt(self.integrals)))

    def sup_in_time(self) -> float:
        """sum_k 2^{ks} max_t e^{rate t} ||delta_k a||."""
        if self.bank is None:
            return 0.0
        return float(np.sum(2.0 ** (self.bank.ks * self.s) * self.maxima))


def norm_series_update(
    acc: NormSeries, fields, t: float, dt: float, weight_value: float = 1.0
) -> NormSeries:
    """Feed one time sample into a NormSeries (trapezoid in t).

    `fields` is a Field or a sequence of component Fields.  The first call
    records the initial sample; later calls must advance t by dt.
    """
    first = fields if isinstance(fields, Field) else fields[0]
    bank = get_bank(first.grid)
    acc._ensure(bank)
    norms = block_norms(fields, bank)
    weighted = np.exp(acc.rate * t) * norms
    integrand = weight_value * weighted**2
    if acc.last_t is None:
        acc.last_t = t
        acc._last_weighted_sq = integrand
        acc.maxima = np.maximum(acc.maxima, weighted)
        return acc
    if t <= acc.last_t:
        raise ValueError(
            f"non-monotone time sample: t={t} after t={acc.last_t}"
        )
    if dt <= 0.0 or abs((acc.last_t + dt) - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"inconsistent step: last_t={acc.last_t}, dt={dt}, t={t}")
    acc.integrals += 0.5 * dt * (acc._last_weighted_sq + integrand)
    acc.maxima = np.maximum(acc.maxima, weighted)
    acc.last_t = t
    acc._last_weighted_sq = integrand
    return acc
