"""Time integration of d_t f = Q_UU^eps(f) and d_t f = Q_L(f, f).

Classical RK4 with a fixed step; for Fermi-Dirac statistics the right-hand
side always sees the truncated argument (f v 0) ^ eps^-3 (the Picard-map
truncation, with negative values zeroed), and the truncation is re-applied to
the state after each accepted step.
"""

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import BlowUpError, DomainError, PreconditionError
from .grid import DistributionField, NormSpec, moments, weighted_norm
from .operators import conservation_projection, eval_Q_L, eval_Q_UU


class UUModel:
    """d_t f = Q_UU^eps(f) with a fixed kernel configuration and quadrature."""

    kind = "uu"

    def __init__(self, cfg, quad):
        self.cfg = cfg
        self.quad = quad

    def __call__(self, f, clamp):
        arg = clamp_field(f, self.cfg.eps) if clamp else f
        return eval_Q_UU(arg, self.cfg, self.quad).field


class LandauModel:
    """d_t f = Q_L(f, f) for a given interaction potential."""

    kind = "landau"

    def __init__(self, potential):
        self.potential = potential

    def __call__(self, f, clamp):
        return eval_Q_L(f, f, self.potential)


class CallableModel:
    """Arbitrary rhs(f) -> field; used by the integrator tests."""

    kind = "callable"

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, f, clamp):
        return self.fn(f)


@dataclass
class EvolutionConfig:
    dt: float
    t_final: float
    clamp: bool = False
    conservation_projection: bool = False
    snapshot_stride: int = 0
    norm_spec: NormSpec = dfield(default_factory=lambda: NormSpec(0, 2.0, 2))

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise DomainError("dt and t_final must be positive")
        if self.dt > self.t_final * (1 + 1e-12):
            raise DomainError("dt must not exceed t_final")


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    momentum: tuple
    energy: float
    linf: float
    min_value: float
    l2l_norm: float
    rhs_norm: float

    def row(self):
        return (self.t, self.mass, *self.momentum, self.energy, self.linf,
                self.min_value, self.l2l_norm, self.rhs_norm)


DIAGNOSTICS_HEADER = "t,mass,px,py,pz,energy,linf,min,l2l,rhs_norm"


def clamp_field(f, eps):
    """Picard truncation: zero the negative part, cap at eps^-3."""
    return DistributionField(f.grid, np.clip(f.values, 0.0, eps**-3), f.meta)


def rhs(f, model, clamp=False):
    """Collision right-hand side for the given model."""
    out = model(f, clamp)
    return out


def default_dt(f0, model, clamp=False, factor=0.1):
    """dt = factor * ||f0||_2 / ||rhs(f0)||_2 (non-stiff explicit heuristic)."""
    r = rhs(f0, model, clamp)
    num = math.sqrt(float(np.sum(f0.values**2)))
    den = math.sqrt(float(np.sum(r.values**2)))
    if den == 0.0:
        return factor
    return factor * num / den


def rk4_step(f, dt, model, clamp=False, eps=None):
    """One classical Runge-Kutta step; truncation re-applied afterwards for
    Fermi-Dirac runs."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    k1 = rhs(f, model, clamp)
    f2 = DistributionField(f.grid, f.values + 0.5 * dt * k1.values, f.meta)
    k2 = rhs(f2, model, clamp)
    f3 = DistributionField(f.grid, f.values + 0.5 * dt * k2.values, f.meta)
    k3 = rhs(f3, model, clamp)
    f4 = DistributionField(f.grid, f.values + dt * k3.values, f.meta)
    k4 = rhs(f4, model, clamp)
    out = f.values + dt / 6.0 * (k1.values + 2.0 * k2.values
                                 + 2.0 * k3.values + k4.values)
    nf = DistributionField(f.grid, out, f.meta)
    if clamp and eps is not None:
        nf = clamp_field(nf, eps)
    return nf, k1


@dataclass
class RunResult:
    snapshots: list          # [(t, DistributionField), ...]
    diagnostics: list        # [DiagnosticsRecord, ...]
    final: DistributionField


def run(f0, model, econf, snapshot_writer=None):
    """Fixed-dt RK4 loop with per-step diagnostics and optional snapshots.

    Aborts with BlowUpError when the state goes non-finite (expected for
    Bose-Einstein data pushed past its lifespan)."""
    if np.any(f0.values < -1e-14 * max(1.0, abs(f0.values.max()))):
        raise PreconditionError("initial data must be nonnegative")
    clamp = econf.clamp
    eps = model.cfg.eps if isinstance(model, UUModel) else None
    if isinstance(model, UUModel) and model.cfg.statistics == "fermi":
        clamp = True  # forced for Fermi-Dirac
        cap = model.cfg.eps**-3
        if f0.values.max() > cap * (1.0 + 1e-12):
            raise PreconditionError(
                f"Fermi-Dirac initial data must satisfy f0 <= eps^-3 = {cap:g}")

    f = f0.copy()
    t = 0.0
    step = 0
    snapshots = [(0.0, f.copy())]
    if snapshot_writer is not None:
        snapshot_writer(step, 0.0, f)
    diagnostics = []
    targets = moments(f0)

    def record(t_now, state, rate):
        mass, mom, energy = moments(state)
        rec = DiagnosticsRecord(
            t=t_now, mass=mass, momentum=tuple(mom), energy=energy,
            linf=float(np.abs(state.values).max()),
            min_value=float(state.values.min()),
            l2l_norm=weighted_norm(state, econf.norm_spec),
            rhs_norm=math.sqrt(float(np.sum(rate.values**2)) * state.grid.cell_volume))
        diagnostics.append(rec)

    while t < econf.t_final - 1e-12 * econf.t_final:
        dt = min(econf.dt, econf.t_final - t)
        f_new, k1 = rk4_step(f, dt, model, clamp, eps)
        if not np.all(np.isfinite(f_new.values)):
            raise BlowUpError(t + dt)
        if econf.conservation_projection:
            f_new = conservation_projection(f_new, targets)
        f = f_new
        t += dt
        step += 1
        record(t, f, k1)
        if econf.snapshot_stride and step % econf.snapshot_stride == 0:
            snapshots.append((t, f.copy()))
            if snapshot_writer is not None:
                snapshot_writer(step, t, f)
    if not snapshots or snapshots[-1][0] < t:
        snapshots.append((t, f.copy()))
        if snapshot_writer is not None:
            snapshot_writer(step, t, f)
    return RunResult(snapshots=snapshots, diagnostics=diagnostics, final=f)
