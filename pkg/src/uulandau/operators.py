"""Collision operators on velocity grids: the quantum (Uehling-Uhlenbeck)
operator with its gain/loss and Q1/Q2/Q3/R decomposition, weak forms, and the
Fokker-Planck-Landau operator.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import DomainError, GridMismatchError, NumericsError, PreconditionError
from .grid import DistributionField, gradient, spectral_derivative
from .kernel import AngularQuadrature

_EMPTY_TAB = (np.zeros(0), np.zeros((4, 0)))
_NO_PHI = (0, np.zeros(7))


@dataclass(frozen=True)
class CollisionQuadrature:
    """Discretization of the dv* dsigma integral.

    vstar_mode: "full" sums over every lattice node; ("thresholded", rel_cut)
    skips v* nodes with f(v*) < rel_cut * max f (rel_cut <= 1e-8), trading a
    matching relative amount of mass for speed.
    """

    angular: AngularQuadrature
    vstar_mode: tuple = ("full",)
    interpolation: str = "tricubic"

    def __post_init__(self):
        if self.vstar_mode[0] not in ("full", "thresholded"):
            raise DomainError(f"unknown vstar mode {self.vstar_mode!r}")
        if self.vstar_mode[0] == "thresholded":
            cut = self.vstar_mode[1]
            if not (0.0 <= cut <= 1e-8):
                raise DomainError("threshold rel_cut must lie in [0, 1e-8]")
        if self.interpolation not in ("tricubic", "trilinear"):
            raise DomainError(f"unknown interpolation {self.interpolation!r}")

    @property
    def scheme_code(self):
        return 1 if self.interpolation == "tricubic" else 0


@dataclass
class OperatorOutput:
    field: DistributionField
    wallclock: float
    kernel_evals: int


def _vstar_indices(quad, base_field):
    vals = base_field.values
    n = base_field.grid.n
    if quad.vstar_mode[0] == "full":
        return np.arange(n**3, dtype=np.int64)
    cut = quad.vstar_mode[1] * np.abs(vals).max()
    return np.nonzero(np.abs(vals).ravel() >= cut)[0].astype(np.int64)


def _check_fd_bounds(f, cfg):
    lo = f.values.min()
    hi = f.values.max()
    cap = cfg.eps**-3
    if lo < -1e-12 * max(1.0, abs(hi)) or hi > cap * (1.0 + 1e-8):
        raise PreconditionError(
            f"Fermi-Dirac input must satisfy 0 <= f <= eps^-3 = {cap:g}; "
            f"got range [{lo:g}, {hi:g}]")


def _check_finite_output(vals):
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise NumericsError(f"non-finite accumulation at node {tuple(bad)}")


def _run_core(cfg, quad, grid, mode, comp_mask, fF, gF, hF, rF,
              phi=_NO_PHI, vstar_base=None, need_out2=False):
    ang = quad.angular
    pk, p0, p1, tabx, tabc = cfg.potential.descriptor()
    out = np.zeros((grid.n,) * 3)
    out2 = np.zeros((grid.n,) * 3) if need_out2 else out
    idx = _vstar_indices(quad, vstar_base)
    t0 = time.perf_counter()
    evals = _core.collision_core(
        fF, gF, hF, rF, grid.n, grid.L, grid.h, cfg.eps, cfg.sign,
        mode, comp_mask, quad.scheme_code,
        pk, p0, p1, tabx, tabc, cfg.potential.cutoff_radius,
        ang.r_nodes, ang.r_weights,
        np.cos(ang.phi_nodes), np.sin(ang.phi_nodes), ang.phi_weights,
        idx, phi[0], np.asarray(phi[1], dtype=float), out, out2)
    dt = time.perf_counter() - t0
    _check_finite_output(out)
    if need_out2:
        _check_finite_output(out2)
    return out, out2, dt, int(evals)


def eval_Q_UU(f, cfg, quad):
    """Full Uehling-Uhlenbeck operator Q_UU^eps(f) on f's grid."""
    if not np.all(np.isfinite(f.values)):
        raise PreconditionError("input field has non-finite values")
    if cfg.statistics == "fermi":
        _check_fd_bounds(f, cfg)
    z = np.zeros_like(f.values)
    out, _, dt, evals = _run_core(cfg, quad, f.grid, _core.MODE_FULL, 7,
                                  f.values, z, z, z, vstar_base=f)
    return OperatorOutput(DistributionField(f.grid, out, f.meta), dt, evals)


def eval_gain_loss(f, cfg, quad):
    """(gain, loss) with Q_UU = gain - loss; Fermi-Dirac only keeps both
    terms pointwise nonnegative."""
    if cfg.statistics != "fermi":
        raise PreconditionError("gain/loss split is defined for Fermi-Dirac")
    _check_fd_bounds(f, cfg)
    z = np.zeros_like(f.values)
    gain, loss, dt, evals = _run_core(cfg, quad, f.grid, _core.MODE_GAINLOSS, 7,
                                      f.values, z, z, z, vstar_base=f,
                                      need_out2=True)
    half = 0.5 * dt
    return (OperatorOutput(DistributionField(f.grid, gain, f.meta), half, evals),
            OperatorOutput(DistributionField(f.grid, loss, f.meta), half, evals))


def eval_Q_bilinear(g, h, component, cfg, quad):
    """Q_i(g, h) = int B_i (g'_* h' - g_* h); component in {1,2,3} or 'all'."""
    if g.grid != h.grid:
        raise GridMismatchError(f"{g.grid} vs {h.grid}")
    masks = {1: 1, 2: 2, 3: 4, "all": 7}
    if component not in masks:
        raise DomainError(f"component must be 1, 2, 3 or 'all', got {component}")
    z = np.zeros_like(g.values)
    out, _, dt, evals = _run_core(cfg, quad, g.grid, _core.MODE_BILINEAR,
                                  masks[component], z, g.values, h.values, z,
                                  vstar_base=g)
    return OperatorOutput(DistributionField(g.grid, out, g.meta), dt, evals)


def eval_R(g, h, rho, cfg, quad):
    """Cubic part R(g, h, rho) = +/- eps^3 int B (g'_* h'(rho + rho_*)
    - g_* h (rho' + rho'_*))."""
    if g.grid != h.grid or g.grid != rho.grid:
        raise GridMismatchError("R arguments live on different grids")
    z = np.zeros_like(g.values)
    out, _, dt, evals = _run_core(cfg, quad, g.grid, _core.MODE_CUBIC, 7,
                                  z, g.values, h.values, rho.values,
                                  vstar_base=g)
    return OperatorOutput(DistributionField(g.grid, out, g.meta), dt, evals)


def weak_form(f, phi, cfg, quad):
    """Symmetrized weak form <Q_UU(f), phi> with phi evaluated analytically
    at the post-collision points (no interpolation of phi)."""
    z = np.zeros_like(f.values)
    out, _, _, _ = _run_core(cfg, quad, f.grid, _core.MODE_WEAK, 7,
                             f.values, z, z, z, phi=phi.descriptor(),
                             vstar_base=f)
    return float(out.sum()) * f.grid.cell_volume


def weak_form_landau(f, phi, potential, grad_f=None):
    """Pair-sum weak form of the Landau operator:

    <Q_L(f,f), phi> = -1/2 sum_{v,v*} h^6 a(v-v*)
                      [f_* grad f - (grad f)_* f] . (grad phi(v) - grad phi(v*))

    grad_f may be supplied (e.g. analytically); defaults to the spectral
    gradient.  Collision invariants vanish here to rounding because
    a(z) z = 0 and grad phi differences cancel exactly.
    """
    g = f.grid
    if grad_f is None:
        dfs = [d.values for d in gradient(f)]
    else:
        dfs = [np.asarray(a, dtype=float) for a in grad_f]
    gp = phi.gradient(g.nodes())
    coef = 2.0 * math.pi * potential.moment_I(3.0)
    out = np.zeros_like(f.values)
    _core.landau_weak_core(f.values, dfs[0], dfs[1], dfs[2],
                           np.ascontiguousarray(gp[..., 0]),
                           np.ascontiguousarray(gp[..., 1]),
                           np.ascontiguousarray(gp[..., 2]),
                           g.n, g.L, g.h, coef, out)
    return -0.5 * g.cell_volume**2 * float(out.sum())


def _landau_parts(g, h, potential):
    """The two divergence pieces div[(a*g) grad h] and div[(a*grad g) h] of
    the Landau operator, by direct convolution with the projection kernel
    (z = 0 cell contributes nothing) and spectral divergences."""
    grid = g.grid
    dg = [d.values for d in gradient(g)]
    dh = [d.values for d in gradient(h)]
    coef = 2.0 * math.pi * potential.moment_I(3.0)
    shape = (grid.n,) * 3
    fp = [np.zeros(shape) for _ in range(3)]
    fm = [np.zeros(shape) for _ in range(3)]
    _core.landau_flux(g.values, h.values, dg[0], dg[1], dg[2],
                      dh[0], dh[1], dh[2], grid.n, grid.L, grid.h, coef,
                      fp[0], fp[1], fp[2], fm[0], fm[1], fm[2])
    def div(parts):
        total = np.zeros(shape)
        for ax in range(3):
            alpha = tuple(int(k == ax) for k in range(3))
            total += spectral_derivative(
                DistributionField(grid, parts[ax]), alpha).values
        return total
    return div(fp), div(fm)


def eval_Q_L(g, h, potential):
    """Fokker-Planck-Landau operator Q_L(g, h) with a(z) = 2 pi I_3 |z|^-1 Pi(z)."""
    if g.grid != h.grid:
        raise GridMismatchError(f"{g.grid} vs {h.grid}")
    d1, d2 = _landau_parts(g, h, potential)
    out = d1 - d2
    _check_finite_output(out)
    return DistributionField(g.grid, out, g.meta)


def landau_operator_scale(g, h, potential):
    """max sup-norm of the two un-cancelled divergence pieces; the natural
    yardstick for stationarity residuals."""
    d1, d2 = _landau_parts(g, h, potential)
    return float(max(np.abs(d1).max(), np.abs(d2).max())), \
        DistributionField(g.grid, d1 - d2, g.meta)


def conservation_projection(field, targets):
    """Least-squares correction enforcing discrete mass/momentum/energy.

    targets = (mass, momentum 3-vector, energy); the correction is the
    minimum-L2 field whose moments close the gap.
    """
    g = field.grid
    x, y, z = np.meshgrid(g.axis, g.axis, g.axis, indexing="ij")
    rows = np.stack([np.ones_like(x), x, y, z, x * x + y * y + z * z])
    A = rows.reshape(5, -1)
    vol = g.cell_volume
    current = vol * A @ field.values.ravel()
    mass, mom, energy = targets
    want = np.array([mass, mom[0], mom[1], mom[2], energy])
    resid = want - current
    gram = vol * (A @ A.T)
    lam = np.linalg.solve(gram, resid)
    corrected = field.values + (A.T @ lam).reshape(field.values.shape)
    return DistributionField(g, corrected, field.meta)
