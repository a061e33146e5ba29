"""Grid, fields, interpolation, spectral derivatives, norms, snapshots."""

import math
import warnings

import numpy as np
import pytest

from uulandau.errors import DataError, DomainError
from uulandau.fields import SmoothField
from uulandau.grid import (DistributionField, NormSpec, VelocityGrid,
                           boundary_decay_ok, export_csv, interpolate,
                           moments, read_snapshot, sample,
                           spectral_derivative, weighted_norm, write_snapshot)


class TestGrid:
    def test_construction(self):
        g = VelocityGrid(16, 6.0)
        assert g.h == pytest.approx(0.75)
        assert g.axis[0] == -6.0 and g.axis[-1] == pytest.approx(6.0 - g.h)

    def test_validation(self):
        with pytest.raises(DomainError):
            VelocityGrid(7, 6.0)
        with pytest.raises(DomainError):
            VelocityGrid(6, 6.0)
        with pytest.raises(DomainError):
            VelocityGrid(16, -1.0)
        VelocityGrid(12, 4.0)  # even non-powers of two are fine

    def test_sampling(self):
        g = VelocityGrid(16, 6.0)
        zero = sample(lambda v: np.zeros(v.shape[:-1]), g)
        assert not zero.values.any()
        f = sample(SmoothField.maxwellian(1.0, 1.0), g)
        mass, mom, energy = moments(f)
        assert 0.999 <= mass <= 1.001
        assert np.all(np.abs(mom) <= 1e-3)
        assert energy == pytest.approx(3.0, abs=5e-3)

    def test_shifted_maxwellian_momentum(self):
        g = VelocityGrid(24, 7.0)
        u = (0.5, -0.25, 0.1)
        f = sample(SmoothField.maxwellian(1.0, 1.0, u), g)
        mass, mom, _ = moments(f)
        assert np.allclose(mom, np.array(u) * mass, atol=2e-4)

    def test_nonfinite_sample_rejected(self):
        g = VelocityGrid(8, 2.0)

        def bad(v):
            out = np.zeros(v.shape[:-1])
            out[1, 2, 3] = np.inf
            return out

        with pytest.raises(DataError, match=r"\(1, 2, 3\)"):
            sample(bad, g)


class TestInterpolation:
    def setup_method(self):
        self.g = VelocityGrid(16, 6.0)
        self.fn = SmoothField.gaussian(1.0, (0.1, -0.2, 0.15), 1.3)
        self.f = sample(self.fn, self.g)

    def test_node_exact_both_schemes(self):
        rng = np.random.default_rng(0)
        nodes = self.g.nodes().reshape(-1, 3)
        pick = rng.choice(len(nodes), 64, replace=False)
        pts = nodes[pick]
        stored = self.f.values.reshape(-1)[pick]
        for scheme in ("tricubic", "trilinear"):
            got = interpolate(self.f, pts, scheme)
            assert np.array_equal(got, stored)

    def test_outside_domain_zero(self):
        assert interpolate(self.f, np.array([7.0, 0.0, 0.0])) == 0.0
        assert interpolate(self.f, np.array([0.0, -6.01, 0.0])) == 0.0

    def test_single_node_indicator_stays_local(self):
        g = VelocityGrid(8, 2.0)
        vals = np.zeros((8, 8, 8))
        vals[4, 4, 4] = 1.0
        f = DistributionField(g, vals)
        node = np.array([g.axis[4], g.axis[4], g.axis[4]])
        assert interpolate(f, node) == 1.0
        far = node + 3 * g.h
        assert interpolate(f, far) == 0.0

    def test_refinement_orders(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-1.5, 1.5, (300, 3))
        ref = self.fn(pts)
        errs = {}
        for n in (16, 32, 64):
            g = VelocityGrid(n, 4.0)
            f = sample(self.fn, g)
            for scheme in ("tricubic", "trilinear"):
                errs[(scheme, n)] = np.max(np.abs(interpolate(f, pts, scheme) - ref))
        cubic = math.log2(errs[("tricubic", 32)] / errs[("tricubic", 64)])
        linear = math.log2(errs[("trilinear", 32)] / errs[("trilinear", 64)])
        # Catmull-Rom is third-order uniformly (fourth at cell-symmetric
        # points); observed max-norm order lands in between
        assert cubic >= 3.0
        assert 1.5 <= linear <= 2.5
        assert errs[("tricubic", 64)] < 0.1 * errs[("trilinear", 64)]

    def test_unknown_scheme(self):
        with pytest.raises(DomainError):
            interpolate(self.f, np.zeros(3), "quintic")


class TestSpectralDerivative:
    def test_constant_is_flat(self):
        g = VelocityGrid(16, 4.0)
        c = DistributionField(g, np.ones((16, 16, 16)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d = spectral_derivative(c, (1, 0, 0))
        assert np.max(np.abs(d.values)) == 0.0

    def test_gaussian_first_derivative(self):
        # resolution-matched box: L = 5.5 balances spectral truncation and
        # domain truncation for e^{-|v|^2} at n = 32
        g = VelocityGrid(32, 5.5)
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        d = spectral_derivative(f, (1, 0, 0))
        x = g.nodes()[..., 0]
        exact = -2.0 * x * f.values
        assert np.max(np.abs(d.values - exact)) <= 1e-8

    def test_mixed_equals_composition(self):
        g = VelocityGrid(32, 5.5)
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        d11 = spectral_derivative(f, (1, 1, 0))
        dd = spectral_derivative(spectral_derivative(f, (1, 0, 0)), (0, 1, 0))
        scale = np.max(np.abs(d11.values))
        assert np.max(np.abs(d11.values - dd.values)) <= 1e-12 * scale

    def test_linearity(self):
        g = VelocityGrid(16, 5.0)
        a = sample(SmoothField.gaussian(1.0, (0.3, 0, 0), 1.0), g)
        b = sample(SmoothField.gaussian(0.5, (-0.4, 0.2, 0), 0.8), g)
        d_sum = spectral_derivative(a + b, (0, 1, 0))
        d_parts = spectral_derivative(a, (0, 1, 0)) + spectral_derivative(b, (0, 1, 0))
        scale = np.max(np.abs(d_sum.values))
        assert np.max(np.abs(d_sum.values - d_parts.values)) <= 1e-12 * scale

    def test_boundary_decay_warning(self):
        g = VelocityGrid(16, 2.0)  # far too small for a unit gaussian
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        assert not boundary_decay_ok(f)
        with pytest.warns(UserWarning, match="decayed"):
            spectral_derivative(f, (1, 0, 0))

    def test_alpha_validation(self):
        g = VelocityGrid(8, 2.0)
        f = DistributionField(g, np.zeros((8, 8, 8)))
        with pytest.raises(DomainError):
            spectral_derivative(f, (2, 1, 1))
        with pytest.raises(DomainError):
            spectral_derivative(f, (1, -1, 0))


class TestNorms:
    def test_plain_l2_matches_direct_sum(self):
        g = VelocityGrid(16, 5.0)
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        spec = NormSpec(0, 0.0, 2)
        direct = math.sqrt(g.cell_volume * float(np.sum(f.values**2)))
        assert weighted_norm(f, spec) == direct

    def test_gaussian_l2_value(self):
        g = VelocityGrid(32, 8.0)
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        assert weighted_norm(f, NormSpec(0, 0.0, 2)) == pytest.approx(
            (math.pi / 2.0) ** 0.75, rel=1e-6)

    def test_zero_field(self):
        g = VelocityGrid(8, 2.0)
        z = DistributionField(g, np.zeros((8, 8, 8)))
        assert weighted_norm(z, NormSpec(2, 3.0, 2)) == 0.0

    def test_monotone_in_weight_and_order(self):
        g = VelocityGrid(16, 5.0)
        f = sample(SmoothField.gaussian(1.0, (0.2, 0, 0), 1.0), g)
        n00 = weighted_norm(f, NormSpec(0, 0.0, 2))
        n02 = weighted_norm(f, NormSpec(0, 2.0, 2))
        n12 = weighted_norm(f, NormSpec(1, 2.0, 2))
        assert n00 <= n02 <= n12

    def test_p_variants(self):
        g = VelocityGrid(16, 5.0)
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        assert weighted_norm(f, NormSpec(0, 0.0, math.inf)) == pytest.approx(1.0, rel=1e-12)
        l1 = weighted_norm(f, NormSpec(0, 0.0, 1))
        assert l1 == pytest.approx(math.pi**1.5, rel=1e-6)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            NormSpec(-1, 0, 2)
        with pytest.raises(DomainError):
            NormSpec(0, 0, 3)


class TestSnapshotIO:
    def test_roundtrip(self, tmp_path):
        g = VelocityGrid(16, 5.0)
        f = sample(SmoothField.poly_gaussian(), g)
        p = tmp_path / "f.skf"
        write_snapshot(f, str(p))
        f2 = read_snapshot(str(p))
        assert f2.grid == g
        assert np.array_equal(f.values, f2.values)

    def test_layout_j1_fastest(self, tmp_path):
        g = VelocityGrid(8, 2.0)
        vals = np.arange(8**3, dtype=float).reshape(8, 8, 8)
        p = tmp_path / "f.skf"
        write_snapshot(DistributionField(g, vals), str(p))
        raw = np.fromfile(str(p), dtype="<f8", offset=20)
        # consecutive payload entries advance the first index
        assert raw[0] == vals[0, 0, 0]
        assert raw[1] == vals[1, 0, 0]

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.skf"
        p.write_bytes(b"NOPE" + b"\0" * 32)
        with pytest.raises(DataError, match="magic"):
            read_snapshot(str(p))

    def test_csv_export(self, tmp_path):
        g = VelocityGrid(8, 2.0)
        f = sample(SmoothField.gaussian(1.0, (0, 0, 0), 1.0), g)
        p = tmp_path / "f.csv"
        export_csv(f, str(p))
        lines = p.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "v1,v2,v3,f"
        assert len(lines) == 8**3 + 1
