"""Tests for the Gevrey phase machinery."""

import numpy as np
import pytest

from stripflow.grid import Field, Grid, dy, l2_norm, mean_y, to_physical
from stripflow import paley
from stripflow.gevrey import (
    GevreyParams,
    apply_gevrey,
    besov_multi,
    initial_norm_H0,
    initial_norm_H1,
    make_gevrey_data,
    phi,
    radius,
    theta,
    theta_dot,
)


DEFAULT = GevreyParams(a=0.5, lam=1.0)


class TestParams:
    def test_K_is_one_sixth_with_sharp_poincare(self):
        # 1/(4 (1 + 1/pi^2)) = 0.2270... > 1/6, so the min picks 1/6
        assert DEFAULT.K == pytest.approx(1.0 / 6.0, abs=0)

    def test_delta_recomputed(self):
        p = GevreyParams(a=0.5, lam=1.0)
        assert p.sqrt_delta == pytest.approx(0.5 / 24.0, rel=1e-15)
        assert p.delta == pytest.approx((0.5 / 24.0) ** 2, rel=1e-15)
        p2 = GevreyParams(a=0.5, lam=2.0)
        assert p2.delta == pytest.approx(p.delta / 4.0, rel=1e-14)

    def test_lam_times_sqrt_delta_identity(self):
        for lam in (1.0, 2.0, 7.5):
            p = GevreyParams(a=0.8, lam=lam)
            assert p.lam * p.sqrt_delta == pytest.approx(
                p.a * p.K / 4.0, rel=1e-14
            )

    def test_validation(self):
        with pytest.raises(ValueError, match="radius"):
            GevreyParams(a=-1.0)
        with pytest.raises(ValueError, match="lam"):
            GevreyParams(lam=0.5)
        with pytest.raises(ValueError, match="poincare"):
            GevreyParams(poincare=0.0)

    def test_small_poincare_branch(self):
        p = GevreyParams(poincare=10.0)
        assert p.K == pytest.approx(1.0 / 44.0, rel=1e-15)


class TestTheta:
    def test_starts_at_zero(self):
        assert theta(0.0, DEFAULT) == 0.0

    def test_limit_is_half_radius_over_lam(self):
        for lam in (1.0, 3.0):
            p = GevreyParams(a=0.5, lam=lam)
            assert theta(1e4, p) == pytest.approx(p.a / (2 * lam), rel=1e-12)

    def test_radius_identity_closed_form(self):
        p = DEFAULT
        t = np.linspace(0.0, 30.0, 200)
        lhs = radius(t, p)
        rhs = (p.a / 2.0) * (1.0 + np.exp(-p.K * t / 2.0))
        assert np.abs(lhs - rhs).max() <= 1e-13
        assert np.all(lhs > p.a / 2.0)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError, match="nonnegative"):
            theta(-0.1, DEFAULT)

    def test_matches_rk4_ode_oracle(self):
        # integrate theta_dot with classic RK4, compare to the closed form
        p = GevreyParams(a=0.5, lam=1.0)
        assert p.sqrt_delta == pytest.approx(0.0208333333, rel=1e-7)
        T, n = 5.0, 5000
        h = T / n
        th, t = 0.0, 0.0
        for _ in range(n):
            k1 = theta_dot(t, p)
            k2 = theta_dot(t + h / 2, p)
            k3 = theta_dot(t + h / 2, p)
            k4 = theta_dot(t + h, p)
            th += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        assert abs(th - theta(T, p)) <= 1e-10

    def test_theta_ddot_identity(self):
        # theta_ddot = -(K/2) theta_dot, via centered differences
        p = DEFAULT
        h = 1e-4
        for t in (0.5, 2.0, 10.0):
            fd = (theta_dot(t + h, p) - theta_dot(t - h, p)) / (2 * h)
            assert fd == pytest.approx(-(p.K / 2.0) * theta_dot(t, p), abs=1e-8)

    def test_theta_dot_positive(self):
        t = np.linspace(0.0, 50.0, 100)
        assert np.all(theta_dot(t, DEFAULT) > 0.0)


class TestPhi:
    def test_zero_frequency(self):
        assert phi(1.0, 0.0, DEFAULT) == 0.0

    def test_initial_phase(self):
        xi = np.array([1.0, 4.0, 9.0])
        assert np.allclose(phi(0.0, xi, DEFAULT), 0.5 * np.sqrt(xi), rtol=1e-14)

    def test_subadditive_on_grid(self):
        p = DEFAULT
        pts = np.linspace(-50.0, 50.0, 100)
        for t in (0.0, 1.0, 8.0):
            XI, ETA = np.meshgrid(pts, pts)
            lhs = phi(t, XI, p)
            rhs = phi(t, XI - ETA, p) + phi(t, ETA, p)
            assert np.all(lhs <= rhs + 1e-12)


class TestApplyGevrey:
    def grid(self):
        return Grid(64, 17)

    def band_field(self, g, m_max=8, seed=0):
        rng = np.random.default_rng(seed)
        c = np.zeros((g.Nx, g.Ny), dtype=complex)
        for m in range(1, m_max + 1):
            col = rng.standard_normal(g.Ny) + 1j * rng.standard_normal(g.Ny)
            c[m] = col
            c[-m] = np.conj(col)
        return Field(g, c)

    def test_inverse_pair(self):
        g = self.grid()
        f = self.band_field(g)
        down = apply_gevrey(f, 0.7, DEFAULT, -1)
        back = apply_gevrey(down, 0.7, DEFAULT, +1)
        assert np.abs(back.coeff - f.coeff).max() <= 1e-10 * np.abs(f.coeff).max()

    def test_exact_cancellation_at_t0(self):
        g = self.grid()
        c = np.exp(-DEFAULT.a * np.sqrt(g.abs_xi))[:, None] * np.ones((1, g.Ny))
        f = Field(g, c.astype(complex))
        out = apply_gevrey(f, 0.0, DEFAULT, +1)
        kept = np.abs(out.coeff) > 0
        assert np.abs(out.coeff[kept] - 1.0).max() <= 1e-12

    def test_weighted_norm_shrinks_in_time(self):
        g = self.grid()
        f = self.band_field(g)
        n0 = l2_norm(apply_gevrey(f, 0.0, DEFAULT, +1))
        n2 = l2_norm(apply_gevrey(f, 2.0, DEFAULT, +1))
        assert n2 < n0

    def test_floor_zeroes_tiny_modes(self):
        g = self.grid()
        f = self.band_field(g, m_max=4, seed=1)
        scale = np.abs(f.coeff).max()
        f.coeff[9, :] = 1e-14 * scale
        f.coeff[-9, :] = 1e-14 * scale
        rep = {}
        out = apply_gevrey(f, 0.0, DEFAULT, +1, report=rep)
        assert np.abs(out.coeff[9]).max() == 0.0
        assert rep["floored_modes"] >= 2

    def test_trust_horizon_on_gevrey_data(self):
        g = self.grid()
        p = DEFAULT
        u0, _ = make_gevrey_data(g, p, amplitude=1e-3, m_max=8)
        rep = {}
        apply_gevrey(u0, 0.0, p, +1, report=rep)
        # perfect Gevrey data: every carried mode sits above the -3 level
        assert rep["trust_horizon"] == pytest.approx(g.abs_xi[8], rel=1e-14)

    def test_overflow_guard(self):
        g = Grid(1024, 9, Lx=0.01)  # |xi|_max ~ 3.2e5, sqrt ~ 567
        f = Field.zeros(g)
        f.coeff[1, :] = 1.0
        with pytest.raises(OverflowError, match="overflow"):
            apply_gevrey(f, 0.0, GevreyParams(a=2.0), +1)

    def test_bad_sign_rejected(self):
        g = self.grid()
        with pytest.raises(ValueError, match="sign"):
            apply_gevrey(Field.zeros(g), 0.0, DEFAULT, 2)


class TestMakeGevreyData:
    def test_compatibility_everywhere(self):
        g = Grid(64, 33)
        u0, u1 = make_gevrey_data(g, DEFAULT, amplitude=1e-2, m_max=6)
        assert np.abs(mean_y(u0)).max() <= 1e-14 * 1e-2
        assert np.abs(u1.coeff).max() == 0.0
        vals = to_physical(u0)
        assert np.abs(vals @ g.trapz_w).max() <= 1e-16

    def test_walls_exactly_zero(self):
        g = Grid(64, 33)
        u0, _ = make_gevrey_data(g, DEFAULT, amplitude=1e-2, m_max=6)
        assert np.abs(u0.coeff[:, 0]).max() == 0.0
        assert np.abs(u0.coeff[:, -1]).max() == 0.0

    def test_weighted_besov_linear_in_amplitude(self):
        g = Grid(64, 33)
        p = DEFAULT
        n = []
        for c in (1e-3, 2e-3):
            u0, _ = make_gevrey_data(g, p, amplitude=c, m_max=6)
            w = apply_gevrey(u0, 0.0, p, +1)
            n.append(paley.besov_norm(w, 0.5))
        assert n[1] == pytest.approx(2.0 * n[0], rel=1e-12)

    def test_rejects_bad_profiles(self):
        g = Grid(64, 33)
        with pytest.raises(ValueError, match="vanish"):
            make_gevrey_data(g, DEFAULT, profile=lambda y: np.cos(2 * np.pi * y))
        with pytest.raises(ValueError, match="mean"):
            make_gevrey_data(g, DEFAULT, profile=lambda y: np.sin(np.pi * y))
        with pytest.raises(ValueError, match="unknown profile"):
            make_gevrey_data(g, DEFAULT, profile="nope")
        with pytest.raises(ValueError, match="m_max"):
            make_gevrey_data(g, DEFAULT, m_max=32)


class TestInitialNorms:
    def test_zero_data(self):
        g = Grid(64, 17)
        z = Field.zeros(g)
        assert initial_norm_H0(z, z, 0.5, DEFAULT) == 0.0
        assert initial_norm_H1(z, z, z, z, 0.1, DEFAULT) == 0.0

    def test_homogeneity(self):
        g = Grid(64, 33)
        u0, u1 = make_gevrey_data(g, DEFAULT, amplitude=1e-3, m_max=6)
        a1 = initial_norm_H0(u0, u1, 0.5, DEFAULT)
        a2 = initial_norm_H0(3.0 * u0, 3.0 * u1, 0.5, DEFAULT)
        assert a2 == pytest.approx(3.0 * a1, rel=1e-12)

    def test_single_band_term_by_term_oracle(self):
        g = Grid(64, 33)
        p = DEFAULT
        u0, u1 = make_gevrey_data(g, p, amplitude=1e-3, m_max=1)
        W = lambda f: apply_gevrey(f, 0.0, p, +1)
        comps = (W(u0), W(u1), W(dy(u0)))

        # independent route: per-block L2 via explicit projectors
        bank = paley.get_bank(g)

        def oracle_multi(fields, s):
            total = 0.0
            for k in bank.ks:
                sq = sum(l2_norm(paley.delta_k(f, k, bank)) ** 2 for f in fields)
                if k == bank.k_min:
                    sq += sum(
                        g.Lx * float(np.abs(f.coeff[0]) ** 2 @ g.trapz_w)
                        for f in fields
                    )
                total += 2.0 ** (k * s) * np.sqrt(sq)
            return total

        aK = p.a * p.K
        expect = (
            oracle_multi(comps, 0.5)
            + np.sqrt(aK) * oracle_multi((W(u0),), 0.75)
            + aK * oracle_multi((W(u0),), 1.0)
        )
        assert initial_norm_H0(u0, u1, 0.5, p) == pytest.approx(expect, rel=1e-12)

    def test_H1_reduces_when_v_zero(self):
        from stripflow.grid import dx as dx_op

        g = Grid(64, 33)
        p = DEFAULT
        u0, u1 = make_gevrey_data(g, p, amplitude=1e-3, m_max=4)
        z = Field.zeros(g)
        eps = 0.25
        W = lambda f: apply_gevrey(f, 0.0, p, +1)
        aK = p.a * p.K
        expect = (
            besov_multi(
                (W(u0), z, eps * W(dx_op(u0)), z, W(dy(u0)), z, W(u1), z), 0.5
            )
            + np.sqrt(aK) * besov_multi((W(u0), z), 0.75)
            + aK * besov_multi((W(u0), z), 1.0)
        )
        got = initial_norm_H1(u0, z, u1, z, eps, p)
        assert got == pytest.approx(expect, rel=1e-12)
