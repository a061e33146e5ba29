"""Velocity-space discretization: uniform cubic grid, sampled fields,
interpolation, spectral derivatives, weighted Sobolev norms and moments.

The grid is the half-open lattice v_j = -L + j h, j = 0..n-1, h = 2L/n per
axis (DFT convention); fields are plain (n, n, n) float64 arrays with axis
order (v1, v2, v3).
"""

import math
import struct
import warnings

import numpy as np

from .errors import DataError, DomainError, GridMismatchError

MAGIC = b"SKF1"


class VelocityGrid:
    """Uniform cubic lattice on [-L, L)^3 with n nodes per axis (n even)."""

    def __init__(self, n, L):
        n = int(n)
        if n < 8 or n % 2 != 0:
            raise DomainError("grid size n must be an even integer >= 8")
        if L <= 0:
            raise DomainError("half-width L must be positive")
        self.n = n
        self.L = float(L)
        self.h = 2.0 * self.L / n
        self.axis = -self.L + self.h * np.arange(n)

    def __eq__(self, other):
        return isinstance(other, VelocityGrid) and self.n == other.n and self.L == other.L

    def __hash__(self):
        return hash((self.n, self.L))

    def __repr__(self):
        return f"VelocityGrid(n={self.n}, L={self.L:g})"

    def nodes(self):
        """(n, n, n, 3) array of node coordinates."""
        x, y, z = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.stack([x, y, z], axis=-1)

    @property
    def cell_volume(self):
        return self.h**3


class NormSpec:
    """Weighted Sobolev norm parameters: sum_{|alpha| <= N} ||W_l d^alpha f||_{L^p}."""

    def __init__(self, N=0, l=0.0, p=2):
        if N < 0 or int(N) != N:
            raise DomainError("derivative order N must be a nonneg integer")
        if l < 0:
            raise DomainError("weight order l must be >= 0")
        if p not in (1, 2, math.inf, "inf"):
            raise DomainError("p must be 1, 2 or inf")
        self.N = int(N)
        self.l = float(l)
        self.p = math.inf if p == "inf" else p

    def __repr__(self):
        return f"NormSpec(N={self.N}, l={self.l:g}, p={self.p})"


class DistributionField:
    """Real density sampled on a VelocityGrid."""

    def __init__(self, grid, values, meta=None):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n, grid.n, grid.n):
            raise DataError(f"values shape {values.shape} does not match grid n={grid.n}")
        self.grid = grid
        self.values = values
        self.meta = meta  # optional (eps, statistics) stamp

    def copy(self):
        return DistributionField(self.grid, self.values.copy(), self.meta)

    def __add__(self, other):
        _same_grid(self, other)
        return DistributionField(self.grid, self.values + other.values, self.meta)

    def __sub__(self, other):
        _same_grid(self, other)
        return DistributionField(self.grid, self.values - other.values, self.meta)

    def __mul__(self, scalar):
        return DistributionField(self.grid, self.values * float(scalar), self.meta)

    __rmul__ = __mul__


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"{a.grid} vs {b.grid}")


def sample(fn, grid, meta=None):
    """Pointwise evaluation of fn on the grid nodes."""
    vals = np.asarray(fn(grid.nodes()), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise DataError(f"non-finite sample at node index {tuple(int(b) for b in bad)}")
    return DistributionField(grid, vals, meta)


# -- interpolation ------------------------------------------------------------

def _cr_weights(t):
    """Catmull-Rom weights on the 4-point stencil; exact (0,1,0,0) at t=0."""
    t2 = t * t
    t3 = t2 * t
    return np.stack([
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ], axis=-1)


def interpolate(field, points, scheme="tricubic"):
    """f at arbitrary points; zero outside [-L, L)^3.

    tricubic uses Catmull-Rom weights, trilinear the usual hat weights.  At
    grid nodes both reproduce the stored value bit-exactly (the fractional
    offset is snapped to zero when within 1e-9 of a node).
    """
    if scheme not in ("tricubic", "trilinear"):
        raise DomainError(f"unknown interpolation scheme {scheme!r}")
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    g = field.grid
    n, L, h = g.n, g.L, g.h

    u = (pts + L) / h
    inside = np.all((pts >= -L) & (pts < L), axis=1)
    base = np.floor(u).astype(np.int64)
    t = u - base
    # snap to exact nodes so stored values are reproduced bitwise
    hi = t > 1.0 - 1e-9
    base[hi] += 1
    t[hi] = 0.0
    t[t < 1e-9] = 0.0
    base = np.clip(base, -4, n + 4)

    vals = field.values
    if scheme == "trilinear":
        stencil = 2
        w = np.stack([1.0 - t, t], axis=-1)  # (M, 3, 2)
        start = base
    else:
        stencil = 4
        w = _cr_weights(t)                   # (M, 3, 4)
        start = base - 1
    idx = [start[:, d][:, None] + np.arange(stencil)[None, :] for d in range(3)]
    wgt = [w[:, d, :] for d in range(3)]
    valid = [(ix >= 0) & (ix < n) for ix in idx]
    acc = np.zeros(pts.shape[0])
    for a in range(stencil):
        for b in range(stencil):
            for c in range(stencil):
                m = valid[0][:, a] & valid[1][:, b] & valid[2][:, c]
                wa = wgt[0][:, a] * wgt[1][:, b] * wgt[2][:, c]
                if not np.any(m):
                    continue
                acc[m] += wa[m] * vals[idx[0][m, a], idx[1][m, b], idx[2][m, c]]
    out = np.where(inside, acc, 0.0)
    return float(out[0]) if single else out


# -- spectral derivatives ------------------------------------------------------

def boundary_decay_ok(field, rel=1e-10, shell=2):
    vals = np.abs(field.values)
    peak = vals.max()
    if peak == 0.0:
        return True
    n = field.grid.n
    mask = np.zeros((n, n, n), dtype=bool)
    for ax in range(3):
        sl = [slice(None)] * 3
        sl[ax] = slice(0, shell)
        mask[tuple(sl)] = True
        sl[ax] = slice(n - shell, n)
        mask[tuple(sl)] = True
    return vals[mask].max() <= rel * peak


def spectral_derivative(field, alpha):
    """partial^alpha f by 3-d FFT differentiation (periodic convention).

    Warns (does not fail) when the field has not decayed to <= 1e-10 * max
    within two cells of the boundary; Nyquist mode zeroed for odd orders.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != 3 or any(a < 0 for a in alpha):
        raise DomainError("alpha must be three nonnegative integers")
    if sum(alpha) > 3:
        raise DomainError("|alpha| <= 3 supported")
    if not boundary_decay_ok(field):
        warnings.warn("field has not decayed at the grid boundary; "
                      "spectral derivative accuracy degraded", stacklevel=2)
    g = field.grid
    k1 = 2.0 * math.pi * np.fft.fftfreq(g.n, d=g.h)
    fh = np.fft.fftn(field.values)
    for ax, a in enumerate(alpha):
        if a == 0:
            continue
        k = k1.copy()
        if a % 2 == 1:
            k[g.n // 2] = 0.0  # Nyquist has no well-defined odd derivative
        shape = [1, 1, 1]
        shape[ax] = g.n
        fh = fh * (1j * k.reshape(shape)) ** a
    out = np.fft.ifftn(fh).real
    return DistributionField(g, out, field.meta)


def gradient(field):
    return [spectral_derivative(field, tuple(int(k == d) for k in range(3)))
            for d in range(3)]


# -- norms and moments ---------------------------------------------------------

def _weight_values(grid, l):
    if l == 0.0:
        return 1.0
    x, y, z = np.meshgrid(grid.axis, grid.axis, grid.axis, indexing="ij")
    return (1.0 + x * x + y * y + z * z) ** (l / 2.0)


def _lp_norm(vals, grid, l, p):
    w = _weight_values(grid, l)
    a = np.abs(w * vals)
    if p == 1:
        return float(grid.cell_volume * a.sum())
    if p == 2:
        return float(math.sqrt(grid.cell_volume * np.sum(a * a)))
    return float(a.max())


def weighted_norm(field, spec):
    """Discrete W^{N,p}_l norm: sum over |alpha| <= N of ||W_l d^alpha f||_p."""
    total = 0.0
    for ax1 in range(spec.N + 1):
        for ax2 in range(spec.N + 1 - ax1):
            for ax3 in range(spec.N + 1 - ax1 - ax2):
                alpha = (ax1, ax2, ax3)
                if sum(alpha) == 0:
                    dvals = field.values
                else:
                    dvals = spectral_derivative(field, alpha).values
                total += _lp_norm(dvals, field.grid, spec.l, spec.p)
    return total


def moments(field):
    """(mass, momentum, energy) = sum h^3 f (1, v, |v|^2)."""
    g = field.grid
    x, y, z = np.meshgrid(g.axis, g.axis, g.axis, indexing="ij")
    f = field.values
    vol = g.cell_volume
    mass = vol * f.sum()
    mom = vol * np.array([(f * x).sum(), (f * y).sum(), (f * z).sum()])
    energy = vol * (f * (x * x + y * y + z * z)).sum()
    return float(mass), mom, float(energy)


# -- snapshot i/o ---------------------------------------------------------------

def write_snapshot(field, path):
    """Binary field snapshot: magic 'SKF1', n (int64 LE), L (float64 LE),
    then n^3 float64 LE in j1-fastest order."""
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<q", g.n))
        fh.write(struct.pack("<d", g.L))
        fh.write(field.values.ravel(order="F").astype("<f8").tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}")
        n = struct.unpack("<q", fh.read(8))[0]
        L = struct.unpack("<d", fh.read(8))[0]
        data = np.frombuffer(fh.read(8 * n**3), dtype="<f8")
        if data.size != n**3:
            raise DataError(f"{path}: truncated payload")
    grid = VelocityGrid(n, L)
    vals = data.reshape((n, n, n), order="F")
    return DistributionField(grid, np.ascontiguousarray(vals))


def export_csv(field, path):
    """v1,v2,v3,f rows for plotting."""
    g = field.grid
    nodes = g.nodes().reshape(-1, 3)
    vals = field.values.reshape(-1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("v1,v2,v3,f\n")
        for (x, y, z), f in zip(nodes, vals):
            fh.write(f"{x:.17g},{y:.17g},{z:.17g},{f:.17g}\n")
