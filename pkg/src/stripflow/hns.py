"""Scaled anisotropic damped-wave flow with an incompressibility constraint.

System on the strip (x periodic, 0 < y < 1), with anisotropy parameter
eps in (0, 1]:

    u_tt + u_t + u u_x + v u_y - eps^2 u_xx - u_yy + p_x = 0
    eps^2 (v_tt + v_t + u v_x + v v_y - eps^2 v_xx - v_yy) + p_y = 0
    u_x + v_y = 0,        (u, v) = (0, 0) at y = 0 and y = 1

The pressure is whatever scalar field keeps the velocity divergence-free.
Two discrete realizations are provided:

* ``pressure_solve`` -- the classical route: per x-mode, the anisotropic
  Neumann problem (-xi^2 + eps^-2 d_yy) p = -(d_x N1 + d_y N2) +
  (d_x Lu + d_y Lv), with wall data d_y p = eps^2 d_yy v read off the
  second equation at the wall and eliminated through a ghost node.  The
  zero-frequency mode is singular; its solvability defect is subtracted
  and the solution gauged to zero vertical mean.  Second-order accurate,
  used for diagnostics and as an independent cross-check.

* an exact discrete projection used by the stepper: with D the discrete
  d/dy matrix, M the interior-row mask and F the provisional (pinned)
  acceleration, a potential q solves per x-mode

      (-xi^2 M + eps^-2 D M D) q = i xi F1 + D F2,

  and the masked weighted gradient (i xi M q, eps^-2 M D q) is subtracted.
  By construction the discrete divergence d_x(dut) + d_y(dvt) of the
  resulting acceleration vanishes at *every* row to solver precision, so
  the state divergence never drifts beyond integrator roundoff.

The x-mean of v is pinned to zero throughout: integrating the constraint
up from the wall forces it, and it is the nullspace of the projection
operator, so it is enforced directly rather than solved for.  The x-mean
of the second equation then only determines a diagnostic pressure profile
and never feeds back into u.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.sparse import block_diag, csc_matrix
from scipy.sparse.linalg import splu

from .gevrey import GevreyParams, apply_gevrey
from .grid import Field, dx, dy, dyy, dy_matrix, l2_norm, mean_y, multiply, pin_walls
from .prandtl import SolverAbort, recover_v

log = logging.getLogger(__name__)

#: hard stability ceiling for the RK4 damped-wave step, as a multiple of dy.
CFL_LIMIT = 0.70
#: default time step as a multiple of dy (the projection removes the 1/eps
#: pressure stiffness; see the stability test for the empirical check).
CFL_FACTOR = 0.25
#: divergence cleanup / energy check cadence, in steps.
N_PROJ = 50
#: abort when the weighted energy grows by this factor between checks.
ENERGY_GROWTH_LIMIT = 10.0


@dataclass
class HnsState:
    """Velocity pair, its time derivative, the anisotropy, and the clock."""

    u: Field
    v: Field
    ut: Field
    vt: Field
    eps: float
    t: float = 0.0
    tol_div: float = 1e-6
    steps: int = 0
    energy_mark: float = field(default=-1.0, repr=False)

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        g = self.u.grid
        for f in (self.v, self.ut, self.vt):
            if f.grid != g:
                raise ValueError("all state fields must share one grid")

    @property
    def grid(self):
        return self.u.grid

    def copy(self) -> "HnsState":
        return replace(
            self, u=self.u.copy(), v=self.v.copy(), ut=self.ut.copy(),
            vt=self.vt.copy(),
        )

    def divergence(self) -> Field:
        return dx(self.u) + dy(self.v)

    def divergence_rel(self) -> float:
        scale = l2_norm(dx(self.u)) + l2_norm(dy(self.v))
        if scale == 0.0:
            return 0.0
        return l2_norm(self.divergence()) / scale

    def energy(self) -> float:
        """Graph (Lyapunov) energy of the damped-wave pair.

        The plain L2 size of (u, ut) is not phase-invariant: started from
        rest, |ut| legitimately grows by the oscillation frequency before
        decaying, which would false-trigger any growth guard.  The graph
        energy  eps^2|dx u|^2 + |dy u|^2 + |ut|^2  (plus the eps-weighted
        v terms) is monotone along the damped wave up to small-data terms.
        """
        e2 = self.eps**2

        def graph(f, ft):
            return (e2 * l2_norm(dx(f)) ** 2 + l2_norm(dy(f)) ** 2
                    + l2_norm(ft) ** 2)

        return graph(self.u, self.ut) + e2 * graph(self.v, self.vt)

    def check_invariants(self):
        for name, f in (("u", self.u), ("v", self.v),
                        ("ut", self.ut), ("vt", self.vt)):
            c = f.coeff
            if np.any(c[:, 0] != 0.0) or np.any(c[:, -1] != 0.0):
                raise SolverAbort(f"wall rows of {name} not pinned", self)
            if not np.all(np.isfinite(c)):
                raise SolverAbort(f"non-finite values in {name}", self)
        for name, f in (("v", self.v), ("vt", self.vt)):
            if np.any(f.coeff[0] != 0.0):
                raise SolverAbort(f"x-mean of {name} not pinned", self)
        rel = self.divergence_rel()
        if rel > self.tol_div:
            raise SolverAbort(
                f"divergence {rel:.3e} exceeds tolerance {self.tol_div:.1e}",
                self,
            )


def _dxx(f: Field) -> Field:
    return dx(dx(f))


def _pin_mean_row(f: Field) -> Field:
    out = f.copy()
    out.coeff[0] = 0.0
    return out


# ---------------------------------------------------------------------------
# Exact discrete projection
# ---------------------------------------------------------------------------

class _Projector:
    """Factored per-mode operator  -xi^2 M + eps^-2 D M D  for one (grid, eps).

    One sparse LU factorization covers all strictly-positive frequencies
    (the zero and Nyquist frequencies carry no x-derivative and are
    excluded; v is pinned at the mean mode instead).
    """

    def __init__(self, grid, eps: float):
        self.grid = grid
        self.eps = eps
        Ny = grid.Ny
        D = dy_matrix(grid)
        MD = D.copy()
        MD[0] = 0.0
        MD[-1] = 0.0
        DMD = D @ MD
        mask = np.ones(Ny)
        mask[0] = mask[-1] = 0.0
        self.modes = np.arange(1, grid.Nx // 2)  # xi != 0, one per pair
        blocks = []
        for m in self.modes:
            A = (1.0 / eps**2) * DMD - grid.xi[m] ** 2 * np.diag(mask)
            blocks.append(csc_matrix(A))
        self.lu = splu(block_diag(blocks, format="csc"))
        bad = np.abs(self.lu.U.diagonal()) < 1e-300
        assert not bad.any(), "projection operator is singular on this grid"
        self._D = D
        self._mask = mask

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for the stacked positive-frequency right-hand sides."""
        n = rhs.size
        flat = rhs.reshape(n)
        sol = self.lu.solve(np.column_stack([flat.real, flat.imag]))
        return (sol[:, 0] + 1j * sol[:, 1]).reshape(rhs.shape)


_PROJECTORS: dict = {}


def _get_projector(grid, eps: float) -> _Projector:
    key = (grid.key, float(eps))
    if key not in _PROJECTORS:
        _PROJECTORS[key] = _Projector(grid, eps)
    return _PROJECTORS[key]


def _project_pair(grid, eps, f1: np.ndarray, f2: np.ndarray):
    """Return coefficient corrections (c1, c2) and the potential q such that
    the divergence of (f1 - c1, f2 - c2) vanishes at every positive
    frequency; the mean and Nyquist columns are untouched."""
    proj = _get_projector(grid, eps)
    D = proj._D
    mask = proj._mask
    ms = proj.modes
    div = f1 * grid._dx_mult[:, None] + f2 @ D.T
    q = proj.solve(div[ms])
    c1 = np.zeros_like(f1)
    c2 = np.zeros_like(f2)
    c1[ms] = (1j * grid.xi[ms, None]) * q * mask[None, :]
    c2[ms] = (1.0 / eps**2) * (q @ D.T) * mask[None, :]
    c1[grid.Nx - ms] = np.conj(c1[ms])
    c2[grid.Nx - ms] = np.conj(c2[ms])
    qfull = np.zeros_like(f1)
    qfull[ms] = q
    qfull[grid.Nx - ms] = np.conj(q)
    return c1, c2, qfull


# ---------------------------------------------------------------------------
# Classical per-mode Neumann pressure solve
# ---------------------------------------------------------------------------

def pressure_solve(state: HnsState, N1: Field, N2: Field,
                   Lu: Field, Lv: Field) -> Field:
    """Anisotropic Neumann pressure problem, one tridiagonal solve per mode.

    Solves (-xi^2 + eps^-2 d_yy) p = -(d_x N1 + d_y N2) + (d_x Lu + d_y Lv)
    with wall data d_y p = eps^2 d_yy v (one-sided), eliminated through a
    ghost node.  Modes with xi = 0 are singular up to constants: their
    solvability defect is subtracted, one node is pinned, and the result is
    gauged to zero vertical mean.
    """
    g = state.grid
    eps = state.eps
    Ny, h = g.Ny, g.dy
    T = 1.0 / (eps**2 * h**2)

    r = (-dx(N1) - dy(N2) + dx(Lu) + dy(Lv)).coeff.copy()
    gy = eps**2 * dyy(state.v).coeff
    r[:, 0] += 2.0 * gy[:, 0] / (eps**2 * h)
    r[:, -1] -= 2.0 * gy[:, -1] / (eps**2 * h)

    p = np.zeros_like(r)
    w = g.trapz_w / g.trapz_w.sum()

    zero_xi = np.abs(g._dx_mult) == 0.0
    run_xi = ~zero_xi
    if run_xi.any():
        idx = np.where(run_xi)[0]
        nm = idx.size
        a = np.full((nm, Ny), T, dtype=float)       # sub-diagonal
        b = np.full((nm, Ny), -2.0 * T, dtype=float)
        c = np.full((nm, Ny), T, dtype=float)       # super-diagonal
        c[:, 0] = 2.0 * T
        a[:, -1] = 2.0 * T
        b -= (g.xi[idx] ** 2)[:, None]
        d = r[idx].copy()
        # Thomas sweeps, vectorized across the modes
        cp = np.empty_like(b)
        dp = np.empty_like(d)
        piv = b[:, 0]
        assert np.min(np.abs(piv)) > 0.0, "tridiagonal pivot vanished"
        cp[:, 0] = c[:, 0] / piv
        dp[:, 0] = d[:, 0] / piv
        for j in range(1, Ny):
            piv = b[:, j] - a[:, j] * cp[:, j - 1]
            assert np.min(np.abs(piv)) > 0.0, "tridiagonal pivot vanished"
            cp[:, j] = c[:, j] / piv
            dp[:, j] = (d[:, j] - a[:, j] * dp[:, j - 1]) / piv
        sol = np.empty_like(d)
        sol[:, -1] = dp[:, -1]
        for j in range(Ny - 2, -1, -1):
            sol[:, j] = dp[:, j] - cp[:, j] * sol[:, j + 1]
        p[idx] = sol

    for m in np.where(zero_xi)[0]:
        d = r[m].copy()
        d -= w @ d  # solvability defect of the pure-Neumann problem
        # pin p[0] = 0, solve rows 1..Ny-1 (row 0 is implied by the defect
        # subtraction: the trapezoid weights are the left nullspace)
        sub = np.full(Ny - 1, T)
        sup = np.full(Ny - 1, T)
        dia = np.full(Ny - 1, -2.0 * T)
        sub[-1] = 2.0 * T
        rhs_m = d[1:].copy()
        cp = np.empty(Ny - 1, dtype=complex)
        dp = np.empty(Ny - 1, dtype=complex)
        piv = dia[0]
        cp[0] = sup[0] / piv
        dp[0] = rhs_m[0] / piv
        for j in range(1, Ny - 1):
            piv = dia[j] - sub[j] * cp[j - 1]
            assert abs(piv) > 0.0, "tridiagonal pivot vanished"
            cp[j] = sup[j] / piv if j < Ny - 2 else 0.0
            dp[j] = (rhs_m[j] - sub[j] * dp[j - 1]) / piv
        sol = np.empty(Ny - 1, dtype=complex)
        sol[-1] = dp[-1]
        for j in range(Ny - 3, -1, -1):
            sol[j] = dp[j] - cp[j] * sol[j + 1]
        p[m, 0] = 0.0
        p[m, 1:] = sol
        p[m] -= w @ p[m]  # zero-mean gauge

    return Field(g, p)


# ---------------------------------------------------------------------------
# Right-hand side, stepping, cleanup
# ---------------------------------------------------------------------------

def hns_rhs(state: HnsState, disable_nonlinear: bool = False,
            disable_pressure: bool = False, report: dict | None = None):
    """Time derivative (du, dv, dut, dvt) of the state.

    ``disable_nonlinear`` drops the advection terms; ``disable_pressure``
    skips the projection (for linear single-mode checks where the state is
    deliberately not divergence-free).  Boundary rows of the accelerations
    are pinned, and the x-mean row of dvt is pinned.
    """
    g = state.grid
    eps = state.eps
    u, v, ut, vt = state.u, state.v, state.ut, state.vt

    Lu = eps**2 * _dxx(u) + dyy(u)
    Lv = eps**2 * _dxx(v) + dyy(v)
    F1 = Lu - ut
    F2 = Lv - vt
    N1 = N2 = None
    if not disable_nonlinear:
        N1 = multiply(u, dx(u)) + multiply(v, dy(u))
        N2 = multiply(u, dx(v)) + multiply(v, dy(v))
        F1 = F1 - N1
        F2 = F2 - N2
    f1 = F1.coeff.copy()
    f2 = F2.coeff.copy()
    f1[:, 0] = f1[:, -1] = 0.0
    f2[:, 0] = f2[:, -1] = 0.0
    f2[0] = 0.0  # the x-mean of v is pinned, not solved for

    if not (np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))):
        raise SolverAbort("non-finite acceleration", state)

    if disable_pressure:
        acc1, acc2 = f1, f2
    else:
        c1, c2, q = _project_pair(g, eps, f1, f2)
        acc1 = f1 - c1
        acc2 = f2 - c2
        if report is not None:
            # mean-mode pressure profile is diagnostic only:
            # d_y p = -eps^2 N2 at the mean mode (v, Lv vanish there)
            if N2 is not None:
                prof = -eps**2 * cumulative_trapezoid(
                    N2.coeff[0], dx=g.dy, initial=0.0)
                prof -= g.trapz_w @ prof / g.trapz_w.sum()
                q[0] = prof
            report["pressure"] = Field(g, q)

    if not (np.all(np.isfinite(acc1)) and np.all(np.isfinite(acc2))):
        raise SolverAbort("non-finite acceleration", state)

    return ut, vt, Field(g, acc1), Field(g, acc2)


def _combine(g, base, incs, weights, dt):
    out = base.coeff + (dt / 6.0) * sum(
        w * k.coeff for w, k in zip(weights, incs))
    out[:, 0] = out[:, -1] = 0.0
    return Field(g, out)


def hns_step(state: HnsState, dt: float, disable_nonlinear: bool = False,
             disable_pressure: bool = False, check: bool = False,
             n_proj: int = N_PROJ) -> HnsState:
    """One RK4 step of length dt, with periodic cleanup and energy guard.

    The step refuses dt outside (0, CFL_LIMIT * dy].  The default step
    suggested for production runs is CFL_FACTOR * dy: the projection is an
    orthogonal projection in the eps-weighted metric, so the fast pressure
    dynamics never enters the explicit update and the limit is set by the
    vertical damped-wave speed alone (the energy guard below watches for
    any configuration where that reasoning fails).  Every n_proj steps the
    state is re-projected onto the constraint and the energy guard runs.
    """
    g = state.grid
    if dt <= 0.0:
        raise SolverAbort(f"dt must be positive, got {dt}", state)
    if dt > CFL_LIMIT * g.dy:
        raise SolverAbort(
            f"dt {dt:.3e} violates CFL bound {CFL_LIMIT * g.dy:.3e}", state)
    if n_proj < 1:
        raise SolverAbort(f"n_proj must be >= 1, got {n_proj}", state)

    flags = dict(disable_nonlinear=disable_nonlinear,
                 disable_pressure=disable_pressure)

    def stage(s):
        return hns_rhs(s, **flags)

    def nudge(h, k):
        return HnsState(
            u=Field(g, state.u.coeff + h * k[0].coeff),
            v=Field(g, state.v.coeff + h * k[1].coeff),
            ut=Field(g, state.ut.coeff + h * k[2].coeff),
            vt=Field(g, state.vt.coeff + h * k[3].coeff),
            eps=state.eps, t=state.t,
        )

    k1 = stage(state)
    k2 = stage(nudge(0.5 * dt, k1))
    k3 = stage(nudge(0.5 * dt, k2))
    k4 = stage(nudge(dt, k3))

    ks = list(zip(k1, k2, k3, k4))
    w = (1.0, 2.0, 2.0, 1.0)
    new_u = _combine(g, state.u, ks[0], w, dt)
    new_v = _pin_mean_row(_combine(g, state.v, ks[1], w, dt))
    new_ut = _combine(g, state.ut, ks[2], w, dt)
    new_vt = _pin_mean_row(_combine(g, state.vt, ks[3], w, dt))

    out = HnsState(new_u, new_v, new_ut, new_vt, eps=state.eps,
                   t=state.t + dt, tol_div=state.tol_div,
                   steps=state.steps + 1, energy_mark=state.energy_mark)

    if out.steps % n_proj == 0:
        if not disable_pressure:
            out = divergence_cleanup(out)
        e = out.energy()
        if out.energy_mark >= 0.0 and e > ENERGY_GROWTH_LIMIT * out.energy_mark:
            raise SolverAbort(
                f"energy grew {e / out.energy_mark:.1f}x since last check "
                f"(unstable configuration)", out)
        out = replace(out, energy_mark=e)
    if check:
        out.check_invariants()
    return out


def divergence_cleanup(state: HnsState, report: dict | None = None) -> HnsState:
    """Project (u, v) and (ut, vt) back onto the discrete constraint.

    Solves the same per-mode operator as the stepper's projection with the
    current divergence as data and subtracts the masked weighted gradient,
    so the post-cleanup divergence is at solver precision.  The correction
    magnitude is logged and optionally reported.
    """
    g = state.grid
    eps = state.eps
    mags = {}
    pairs = {"uv": (state.u, state.v), "ut_vt": (state.ut, state.vt)}
    fixed = {}
    for name, (fu, fv) in pairs.items():
        c1, c2, _ = _project_pair(g, eps, fu.coeff, fv.coeff)
        fixed[name] = (Field(g, fu.coeff - c1), Field(g, fv.coeff - c2))
        mags[name] = float(np.sqrt(
            l2_norm(Field(g, c1)) ** 2 + l2_norm(Field(g, c2)) ** 2))
    log.debug("divergence cleanup at t=%.6f: |corr_uv|=%.3e |corr_ut|=%.3e",
              state.t, mags["uv"], mags["ut_vt"])
    if report is not None:
        report.update(mags)
    new_u, new_v = fixed["uv"]
    new_ut, new_vt = fixed["ut_vt"]
    return replace(state, u=new_u, v=_pin_mean_row(new_v),
                   ut=new_ut, vt=_pin_mean_row(new_vt))


def make_hns_data(u0: Field, p: GevreyParams, eps: float = 1.0,
                  u1: Field | None = None) -> HnsState:
    """Initial state with v recovered from the constraint and cleaned up.

    u0 must have zero vertical mean per x-mode (otherwise the recovered v
    cannot vanish at both walls).  The time-derivative data defaults to
    zero; when u1 is supplied its v-partner is recovered the same way, so
    the derivative pair is divergence-free too.
    """
    g = u0.grid
    scale = np.abs(u0.coeff).max()
    if scale > 0.0 and np.abs(mean_y(u0)).max() > 1e-8 * scale:
        raise ValueError(
            "u0 is not compatible: vertical mean must vanish per x-mode")
    # data must be analytic enough to carry the exponential weight
    apply_gevrey(u0, 0.0, p, +1)

    def pair(fu):
        fv = recover_v(fu)
        cv = fv.coeff.copy()
        cv[:, -1] = 0.0  # wall residual is quadrature roundoff; pin exactly
        cv[0] = 0.0
        return fu, Field(g, cv)

    fu0, fv0 = pair(u0)
    if u1 is None:
        fu1, fv1 = Field.zeros(g), Field.zeros(g)
    else:
        fu1, fv1 = pair(u1)
    state = HnsState(pin_walls(fu0), fv0, pin_walls(fu1), fv1, eps=eps)
    state = divergence_cleanup(state)
    state.check_invariants()
    return state
