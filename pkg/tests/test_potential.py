"""Potential family: closed forms, moments against analytic oracles,
assumption checks, tabulated ingestion."""

import math

import numpy as np
import pytest
from scipy.special import beta as beta_fn, gamma

from uulandau.errors import AccuracyError, DataError, DomainError
from uulandau.potential import Potential, adaptive_gauss_legendre


def gaussian_I(a, A=1.0, s=1.0):
    # int_0^inf A^2 exp(-2 (r/s)^2) r^a dr
    return A**2 * s ** (a + 1) * gamma((a + 1) / 2.0) / (2.0 * 2.0 ** ((a + 1) / 2.0))


def gaussian_Iprime(a, A=1.0, s=1.0):
    # |r phi'|^2 = 4 A^2 r^4 / s^4 exp(-2 (r/s)^2)
    return 4.0 * A**2 * s ** (a + 1) * gamma((a + 5) / 2.0) / (2.0 * 2.0 ** ((a + 5) / 2.0))


def bump_I(a, A=1.0):
    return 0.5 * A**2 * beta_fn((a + 1) / 2.0, 5.0)


def bump_Iprime(a, A=1.0):
    return 8.0 * A**2 * beta_fn((a + 5) / 2.0, 3.0)


class TestEval:
    def test_gaussian_values(self):
        p = Potential.gaussian(1.0, 1.0)
        assert p.phi_hat(0.0) == 1.0
        assert p.phi_hat(1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
        assert p.phi_hat_deriv(0.0) == 0.0

    def test_bump_values(self):
        b = Potential.bump(1.0)
        assert b.phi_hat(1.0) == 0.0
        assert b.phi_hat(2.0) == 0.0
        assert b.phi_hat_deriv(0.5) == pytest.approx(-1.5, rel=1e-14)

    def test_negative_r_rejected(self):
        p = Potential.gaussian()
        with pytest.raises(DomainError):
            p.phi_hat(-0.1)
        with pytest.raises(DomainError):
            p.phi_hat_deriv(-1.0)

    def test_tabulated_matches_gaussian(self):
        r = np.linspace(0.0, 10.0, 2001)
        t = Potential.tabulated(r, np.exp(-(r**2)), precompute_moments=False)
        assert t.phi_hat_deriv(1.0) == pytest.approx(-2.0 * math.exp(-1.0), abs=1e-4)
        assert t.phi_hat(20.0) == 0.0
        assert t.phi_hat_deriv(20.0) == 0.0


class TestMoments:
    @pytest.mark.parametrize("a", [0.0, 1.0, 2.0, 3.0, 3.5, 4.0])
    def test_gaussian_moments(self, a):
        p = Potential.gaussian(1.0, 1.0)
        assert p.moment_I(a) == pytest.approx(gaussian_I(a), rel=1e-8)
        assert p.moment_Iprime(a) == pytest.approx(gaussian_Iprime(a), rel=1e-8)

    @pytest.mark.parametrize("a", [0.0, 1.0, 2.0, 3.0, 3.5, 4.0])
    def test_bump_moments(self, a):
        b = Potential.bump(1.0)
        assert b.moment_I(a) == pytest.approx(bump_I(a), rel=1e-8)
        assert b.moment_Iprime(a) == pytest.approx(bump_Iprime(a), rel=1e-8)

    def test_reference_values(self):
        # the two families' I_3 / I'_3 used throughout the kernel checks
        assert Potential.gaussian().moment_I(3.0) == pytest.approx(0.125, rel=1e-10)
        assert Potential.gaussian().moment_Iprime(3.0) == pytest.approx(0.75, rel=1e-10)
        assert Potential.bump().moment_I(3.0) == pytest.approx(1.0 / 60.0, rel=1e-10)
        assert Potential.bump().moment_Iprime(3.0) == pytest.approx(2.0 / 15.0, rel=1e-10)

    def test_zero_potential(self):
        z = Potential.zero()
        assert z.moment_I(3.0) == 0.0
        assert z.moment_Iprime(2.0) == 0.0

    def test_scaling_covariance(self):
        base = Potential.gaussian(1.0, 1.0)
        for c in (0.5, 2.0, 7.25):
            scaled = Potential.gaussian(c, 1.0)
            for a in (0.0, 2.0, 3.0):
                assert scaled.moment_I(a) == pytest.approx(c**2 * base.moment_I(a), rel=1e-10)
                assert scaled.moment_Iprime(a) == pytest.approx(
                    c**2 * base.moment_Iprime(a), rel=1e-10)

    def test_tabulated_refinement_order(self):
        exact = gaussian_I(3.0)
        errs = []
        for m in (251, 501, 1001):
            r = np.linspace(0.0, 8.0, m)
            t = Potential.tabulated(r, np.exp(-(r**2)), precompute_moments=False)
            errs.append(abs(t.moment_I(3.0) - exact))
        order1 = math.log2(errs[0] / errs[1])
        order2 = math.log2(errs[1] / errs[2])
        assert order1 >= 2.0 and order2 >= 2.0

    def test_negative_exponent_rejected(self):
        with pytest.raises(DomainError):
            Potential.gaussian().moment_I(-1.0)


class TestAssumptions:
    def test_gaussian(self):
        rep = Potential.gaussian().check_assumptions(1.0)
        assert rep.a1_holds and rep.a2_theta == 1.0
        assert rep.witness_values["I3"] == pytest.approx(0.125, rel=1e-9)

    def test_bump(self):
        rep = Potential.bump().check_assumptions(1.0)
        assert rep.a1_holds and rep.a2_theta == 1.0

    def test_zero_table(self):
        rep = Potential.zero().check_assumptions(0.5)
        assert rep.a1_holds
        assert all(v == 0.0 for v in rep.witness_values.values())

    def test_theta_domain(self):
        with pytest.raises(DomainError):
            Potential.gaussian().check_assumptions(0.0)
        with pytest.raises(DomainError):
            Potential.gaussian().check_assumptions(1.5)


class TestCutoff:
    def test_gaussian_cutoff(self):
        p = Potential.gaussian(2.0, 1.5)
        assert p.cutoff_radius == pytest.approx(1.5 * math.sqrt(-math.log(1e-14)))
        r = np.linspace(p.cutoff_radius, p.cutoff_radius + 5, 100)
        assert np.all(np.abs(p.phi_hat(r)) <= 1e-14 * p.sup_phi_hat() * (1 + 1e-12))

    def test_tabulated_cutoff_is_drop_point(self):
        r = np.linspace(0.0, 4.0, 401)
        vals = np.where(r <= 2.0, 1.0 - r / 2.0, 0.0)
        t = Potential.tabulated(r, vals, precompute_moments=False)
        live = r[np.abs(vals) > 1e-14]
        assert t.cutoff_radius >= live[-1]
        sampled = r[r >= t.cutoff_radius]
        assert np.all(np.abs(t.phi_hat(sampled)) <= 1e-14 * t.sup_phi_hat())


class TestCsvIngestion:
    def _write(self, tmp_path, text):
        f = tmp_path / "tab.csv"
        f.write_text(text, encoding="utf-8")
        return str(f)

    def test_good_file(self, tmp_path):
        path = self._write(tmp_path, "r,phi_hat\n0,1.0\n0.5,0.5\n1.0,0.0\n")
        p = Potential.from_csv(path)
        assert p.phi_hat(0.0) == 1.0
        assert p.phi_hat(1.5) == 0.0

    def test_bad_header(self, tmp_path):
        path = self._write(tmp_path, "radius,value\n0,1\n1,0\n")
        with pytest.raises(DataError, match="line 1"):
            Potential.from_csv(path)

    def test_bad_row_reports_line(self, tmp_path):
        path = self._write(tmp_path, "r,phi_hat\n0,1.0\n0.5,oops\n1.0,0.0\n")
        with pytest.raises(DataError, match="line 3"):
            Potential.from_csv(path)

    def test_non_increasing_r(self, tmp_path):
        path = self._write(tmp_path, "r,phi_hat\n0,1.0\n0.5,0.5\n0.5,0.2\n")
        with pytest.raises(DataError, match="line 4"):
            Potential.from_csv(path)

    def test_r_must_start_at_zero(self, tmp_path):
        path = self._write(tmp_path, "r,phi_hat\n0.1,1.0\n0.5,0.5\n")
        with pytest.raises(DataError):
            Potential.from_csv(path)


class TestAdaptiveQuadrature:
    def test_smooth_integral(self):
        val, err = adaptive_gauss_legendre(lambda r: np.exp(-r * r), 0.0, 10.0, 1e-12)
        assert val == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-12)

    def test_stall_raises(self):
        # a genuine discontinuity jitters the embedded estimate at every depth
        rng = np.random.default_rng(1)

        def noisy(r):
            return np.asarray(rng.uniform(0, 1, np.shape(r)))

        with pytest.raises(AccuracyError):
            adaptive_gauss_legendre(noisy, 0.0, 1.0, 1e-14, max_depth=8)
