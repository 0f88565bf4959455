"""Self-contained property suite behind the `verify` command.

Each check re-derives one structural invariant of the norm machinery or
one closed-form solver oracle and reports pass/fail with a measured
residual, so a broken build names the property it broke.  The checks
are importable one by one; `verify_all` bundles them in the order the
CLI prints them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import paley
from .gevrey import GevreyParams, apply_gevrey, phi as gevrey_phi, radius, theta
from .grid import Field, Grid, l2_norm, multiply, to_spectral
from .hns import HnsState, hns_step
from .prandtl import PrandtlState, prandtl_step


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, err: float, tol: float) -> CheckResult:
    return CheckResult(
        name, bool(err <= tol), f"max residual {err:.3e} (tolerance {tol:.1e})"
    )


def _random_field(g: Grid, seed: int, zero_mean=True, dealiased=True) -> Field:
    rng = np.random.default_rng(seed)
    f = to_spectral(g, rng.standard_normal((g.Nx, g.Ny)))
    c = f.coeff.copy()
    if zero_mean:
        c[0, :] = 0.0
    if dealiased:
        c[~g.dealias_mask, :] = 0.0
    return Field(g, c)


def check_partition_of_unity(grid: Grid, bump: float = 0.0) -> CheckResult:
    """sum_k phi(tau / 2^k) = 1 densely in tau and at every grid frequency.

    `bump` injects a deliberate defect into the sampled sums (fault-path
    testing of the verify pipeline itself).
    """
    tau = np.logspace(-3.0, 3.0, 4001)
    dense = sum(paley.phi(tau / 2.0**k) for k in np.arange(-15, 15)) + bump
    bank = paley.build_bank(grid)
    nz = grid.abs_xi > 0.0
    ongrid = bank.phi_samples[:, nz].sum(axis=0) + bump
    err = max(np.abs(dense - 1.0).max(), np.abs(ongrid - 1.0).max())
    return _result("partition-of-unity", float(err), 1e-12)


def check_low_frequency_identity(grid: Grid) -> CheckResult:
    """chi(tau) + sum_{j >= 0} phi(tau / 2^j) = 1 densely and on the grid."""
    bank = paley.get_bank(grid)
    j_hi = max(12, bank.k_max + 2)
    tau = np.logspace(-2.0, 2.0, 1001)
    dense = paley.chi(tau) + sum(paley.phi(tau / 2.0**j) for j in range(0, j_hi))
    nz = grid.abs_xi[grid.abs_xi > 0.0]
    ongrid = paley.chi(nz) + sum(paley.phi(nz / 2.0**j) for j in range(0, j_hi))
    err = max(np.abs(dense - 1.0).max(), np.abs(ongrid - 1.0).max())
    return _result("low-frequency-identity", float(err), 1e-12)


def check_block_overlap(grid: Grid, seed: int = 2) -> CheckResult:
    """delta_j delta_k = 0 whenever |j - k| >= 2."""
    f = _random_field(grid, seed)
    bank = paley.get_bank(grid)
    scale = np.abs(f.coeff).max()
    worst = 0.0
    for k in bank.ks:
        fk = paley.delta_k(f, k, bank)
        for j in bank.ks:
            if abs(j - k) >= 2:
                worst = max(worst, float(np.abs(paley.delta_k(fk, j, bank).coeff).max()))
    return _result("block-overlap", worst / scale, 1e-13)


def check_bernstein(grid: Grid, seed: int = 3) -> CheckResult:
    """Every occupied block's mean frequency sits inside the cutoff support."""
    f = _random_field(grid, seed)
    bank = paley.get_bank(grid)
    lo, hi = np.inf, 0.0
    try:
        for k in bank.ks:
            rep = paley.bernstein_check(f, k, bank)
            if rep.skipped:
                continue
            lo, hi = min(lo, rep.ratio), max(hi, rep.ratio)
    except AssertionError as exc:
        return CheckResult("bernstein", False, str(exc))
    return CheckResult(
        "bernstein", True, f"frequency ratios in [{lo:.3f}, {hi:.3f}] within [0.75, 2.667]"
    )


def check_bony(grid: Grid, n_pairs: int = 20, seed: int = 5) -> CheckResult:
    """Paraproducts plus remainder rebuild the dealiased product."""
    worst = 0.0
    for i in range(n_pairs):
        f = _random_field(grid, seed + 2 * i)
        h = _random_field(grid, seed + 2 * i + 1)
        Tfh, Thf, R = paley.bony(f, h)
        rebuilt = Tfh + Thf + R
        prod = multiply(f, h)
        worst = max(worst, l2_norm(rebuilt - prod) / l2_norm(prod))
    return _result("bony-reconstruction", worst, 1e-10)


def check_theta_ode(p: GevreyParams) -> CheckResult:
    """Closed-form theta against a high-accuracy integration of its ODE.

    theta solves theta' = delta^{1/2} - (K/2) theta with theta(0) = 0.
    """
    K, sd = p.K, p.sqrt_delta
    ts = np.linspace(0.0, 20.0, 81)
    sol = solve_ivp(
        lambda t, th: sd - 0.5 * K * th,
        (0.0, 20.0),
        [0.0],
        t_eval=ts,
        rtol=1e-12,
        atol=1e-14,
    )
    err = np.abs(sol.y[0] - theta(ts, p)).max() / max(theta(20.0, p), 1e-300)
    return _result("gevrey-theta-ode", float(err), 1e-10)


def check_radius_closed_form(p: GevreyParams) -> CheckResult:
    """a - lam theta(t) = (a/2)(1 + e^{-K t / 2})."""
    ts = np.linspace(0.0, 50.0, 501)
    expected = 0.5 * p.a * (1.0 + np.exp(-0.5 * p.K * ts))
    err = np.abs(radius(ts, p) - expected).max()
    return _result("gevrey-radius-closed-form", float(err), 1e-13)


def check_phase_subadditivity(p: GevreyParams) -> CheckResult:
    """Phi(t, xi + eta) <= Phi(t, xi) + Phi(t, eta) on a 100 x 100 sample grid."""
    xi = np.logspace(-2.0, 3.0, 100)
    worst = -np.inf
    for t in (0.0, 0.5, 2.0, 10.0):
        lhs = gevrey_phi(t, xi[:, None] + xi[None, :], p)
        one_d = gevrey_phi(t, xi, p)
        rhs = one_d[:, None] + one_d[None, :]
        worst = max(worst, float((lhs - rhs).max()))
    return _result("gevrey-phase-subadditivity", max(worst, 0.0), 1e-13)


def check_inverse_pair(grid: Grid, p: GevreyParams) -> CheckResult:
    """Weighting by e^{+Phi} then e^{-Phi} returns the field."""
    rng = np.random.default_rng(11)
    c = np.zeros((grid.Nx, grid.Ny), dtype=complex)
    for m in range(1, min(6, grid.Nx // 2)):
        prof = rng.standard_normal(grid.Ny) + 1j * rng.standard_normal(grid.Ny)
        c[m] = prof
        c[grid.Nx - m] = np.conj(prof)
    f = Field(grid, c)
    worst = 0.0
    for t in (0.0, 1.0, 7.5):
        back = apply_gevrey(apply_gevrey(f, t, p, +1), t, p, -1)
        worst = max(worst, float(np.abs(back.coeff - f.coeff).max()))
    return _result("gevrey-inverse-pair", worst / np.abs(c).max(), 1e-10)


def _mu_discrete(Ny: int) -> float:
    dy = 1.0 / (Ny - 1)
    return 2.0 * (1.0 - np.cos(2.0 * np.pi * dy)) / dy**2


def _oscillator(mu: float, t: float) -> float:
    w = np.sqrt(mu - 0.25)
    return float(np.exp(-0.5 * t) * (np.cos(w * t) + np.sin(w * t) / (2.0 * w)))


def _linear_mode_error(stepper, make_state, mu: float, dt: float, T: float) -> float:
    st = make_state()
    u0 = st.u.coeff.copy()
    n = int(round(T / dt))
    for _ in range(n):
        st = stepper(st, dt)
    a = _oscillator(mu, st.t)
    ref = a * u0
    return float(np.abs(st.u.coeff - ref).max() / np.abs(ref).max())


def check_linear_mode_prandtl(Ny: int = 65, dt: float = 1e-3) -> CheckResult:
    """Single linear mode against the damped-oscillator closed form.

    Also verifies fourth-order convergence: halving dt must shrink the
    error by a factor in [10, 22].
    """
    g = Grid(8, Ny)
    x = np.arange(g.Nx) * g.Lx / g.Nx
    vals = 1e-3 * np.sin(x)[:, None] * np.sin(2.0 * np.pi * g.y)[None, :]

    def make_state():
        return PrandtlState(u=to_spectral(g, vals), ut=Field.zeros(g))

    def stepper(s, h):
        return prandtl_step(s, h, disable_nonlinear=True)

    mu = _mu_discrete(Ny)
    err = _linear_mode_error(stepper, make_state, mu, dt, 1.0)
    err_half = _linear_mode_error(stepper, make_state, mu, 0.5 * dt, 1.0)
    ratio = err / max(err_half, 1e-300)
    ok = err <= 1e-6 and 10.0 <= ratio <= 22.0
    return CheckResult(
        "linear-mode-prandtl",
        ok,
        f"relative error {err:.3e} at t=1 (tolerance 1e-06), halving ratio {ratio:.1f}",
    )


def check_linear_mode_hns(
    Ny: int = 65, eps: float = 0.5, dt: float = 1e-3
) -> CheckResult:
    """The scaled system's u-mode against the damped oscillator.

    Runs with the nonlinearity and the pressure disabled, so the single
    u-mode obeys the wave equation with mu = mu_discrete + eps^2 xi^2.
    """
    g = Grid(8, Ny)
    x = np.arange(g.Nx) * g.Lx / g.Nx
    vals = 1e-3 * np.sin(x)[:, None] * np.sin(2.0 * np.pi * g.y)[None, :]

    def make_state():
        return HnsState(
            u=to_spectral(g, vals),
            v=Field.zeros(g),
            ut=Field.zeros(g),
            vt=Field.zeros(g),
            eps=eps,
        )

    def stepper(s, h):
        return hns_step(s, h, disable_nonlinear=True, disable_pressure=True)

    mu = _mu_discrete(Ny) + eps**2
    err = _linear_mode_error(stepper, make_state, mu, dt, 1.0)
    err_half = _linear_mode_error(stepper, make_state, mu, 0.5 * dt, 1.0)
    ratio = err / max(err_half, 1e-300)
    ok = err <= 1e-6 and 10.0 <= ratio <= 22.0
    return CheckResult(
        "linear-mode-hns",
        ok,
        f"relative error {err:.3e} at t=1 (tolerance 1e-06), halving ratio {ratio:.1f}",
    )


def verify_all(Nx: int = 64, Ny: int = 33, corrupt: str | None = None):
    """Run the whole suite; returns the list of CheckResults.

    corrupt="phi" injects a defect into the partition-of-unity sums to
    exercise the failure path.
    """
    if corrupt not in (None, "phi"):
        raise ValueError(f"unknown fault injection {corrupt!r}")
    grid = Grid(Nx, Ny)
    p = GevreyParams()
    bump = 1e-6 if corrupt == "phi" else 0.0
    return [
        check_partition_of_unity(grid, bump=bump),
        check_low_frequency_identity(grid),
        check_block_overlap(grid),
        check_bernstein(grid),
        check_bony(grid),
        check_theta_ode(p),
        check_radius_closed_form(p),
        check_phase_subadditivity(p),
        check_inverse_pair(grid, p),
        check_linear_mode_prandtl(Ny=Ny),
        check_linear_mode_hns(Ny=Ny),
    ]
