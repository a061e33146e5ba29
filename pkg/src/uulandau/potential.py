"""Interaction potentials represented through the radial Fourier transform phi_hat.

Everything downstream (collision kernels, Landau coefficients, cancellation
norms) is parametrized by the radial moments

    I_a      = int_0^inf phi_hat(r)^2 r^a dr
    Iprime_a = int_0^inf |r phi_hat'(r)|^2 r^a dr

so this module owns the closed-form families (Gaussian, compactly supported
bump), tabulated data ingestion, the adaptive radial quadrature and the
finiteness checks on the moment family.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator

from .errors import AccuracyError, DataError, DomainError

# Relative drop used to define the cutoff radius: |phi_hat| <= DROP_TOL * sup|phi_hat|.
DROP_TOL = 1e-14

# Exponents cached eagerly at construction (covers every moment the kernel
# module and the CLI `moments` table ask for).
DEFAULT_EXPONENTS = (0.0, 1.0, 2.0, 3.0, 3.5, 4.0, 5.0)

_GL15_X, _GL15_W = leggauss(15)
_GL7_X, _GL7_W = leggauss(7)


def _gl_panel(f, a, b, x, w):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * np.sum(w * f(mid + half * x))


def adaptive_gauss_legendre(f, a, b, tol, max_depth=40):
    """Bisection-refined 15-point Gauss-Legendre with an embedded 7-point
    error estimate.  Returns (value, error_estimate); raises AccuracyError
    when the estimate is still above `tol` at the depth cap.
    """
    if b <= a:
        return 0.0, 0.0

    def recurse(a0, b0, tol0, depth):
        v15 = _gl_panel(f, a0, b0, _GL15_X, _GL15_W)
        v7 = _gl_panel(f, a0, b0, _GL7_X, _GL7_W)
        err = abs(v15 - v7)
        if err <= tol0 or (b0 - a0) <= 1e-300:
            return v15, err
        if depth >= max_depth:
            raise AccuracyError(
                f"adaptive quadrature stalled on [{a0:g},{b0:g}]: "
                f"estimate {err:.3e} > tol {tol0:.3e} at depth {max_depth}"
            )
        m = 0.5 * (a0 + b0)
        v1, e1 = recurse(a0, m, 0.5 * tol0, depth + 1)
        v2, e2 = recurse(m, b0, 0.5 * tol0, depth + 1)
        return v1 + v2, e1 + e2

    return recurse(float(a), float(b), float(tol), 0)


@dataclass(frozen=True)
class MomentTable:
    """Cached values of I_a and Iprime_a with their quadrature error estimates."""

    I: dict = field(default_factory=dict)
    Iprime: dict = field(default_factory=dict)
    quadrature_error: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AssumptionReport:
    a1_holds: bool
    a2_theta: float | None
    witness_values: dict


class Potential:
    """Interaction potential through its radial Fourier transform.

    Three families:
      * ``gaussian(A, s)``   -> phi_hat(r) = A exp(-(r/s)^2)
      * ``bump(A)``          -> phi_hat(r) = A (1 - r^2)_+^2  (support [0, 1])
      * ``tabulated(r, v)``  -> monotone (Fritsch-Carlson) cubic through the
                                samples, 0 beyond the last sample.

    Immutable after construction; the moment cache for DEFAULT_EXPONENTS is
    populated eagerly so concurrent readers never mutate shared state.
    """

    def __init__(self, kind, params, cutoff_radius, interp=None, interp_deriv=None,
                 table=None, precompute_moments=True):
        self.kind = kind
        self.params = params
        self.cutoff_radius = float(cutoff_radius)
        self._interp = interp
        self._interp_deriv = interp_deriv
        self.table = table
        self.moments = MomentTable()
        if precompute_moments:
            for a in DEFAULT_EXPONENTS:
                self.moment_I(a)
                self.moment_Iprime(a)

    # -- constructors -------------------------------------------------------

    @classmethod
    def gaussian(cls, amplitude=1.0, width=1.0):
        if width <= 0:
            raise DomainError("gaussian width must be positive")
        cutoff = width * math.sqrt(-math.log(DROP_TOL))
        return cls("gaussian", (float(amplitude), float(width)), cutoff)

    @classmethod
    def bump(cls, amplitude=1.0):
        return cls("bump", (float(amplitude),), 1.0)

    @classmethod
    def tabulated(cls, r, values, precompute_moments=True):
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != values.shape or r.size < 2:
            raise DataError("tabulated potential needs two 1-d arrays of equal length >= 2")
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(values)):
            raise DataError("tabulated potential contains non-finite entries")
        if r[0] != 0.0:
            raise DataError("tabulated r must start at 0")
        if np.any(np.diff(r) <= 0):
            raise DataError("tabulated r must be strictly increasing")
        sup = np.max(np.abs(values))
        if sup == 0.0:
            cutoff = 0.0
        else:
            live = np.nonzero(np.abs(values) > DROP_TOL * sup)[0]
            last_live = live[-1]
            # first sample index from which every |value| is below the drop;
            # beyond the table the interpolant is identically zero anyway.
            cutoff = r[min(last_live + 1, r.size - 1)]
        interp = PchipInterpolator(r, values, extrapolate=False)
        return cls("tabulated", (), cutoff, interp=interp,
                   interp_deriv=interp.derivative(),
                   table=(r.copy(), values.copy()),
                   precompute_moments=precompute_moments)

    @classmethod
    def zero(cls):
        return cls.tabulated([0.0, 1.0], [0.0, 0.0])

    @classmethod
    def from_csv(cls, path):
        """Read `r,phi_hat` rows; abort with the offending line number."""
        rs, vs = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["r", "phi_hat"]:
                raise DataError(f"{path}: line 1: header must be exactly 'r,phi_hat'")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise DataError(f"{path}: line {lineno}: expected two fields, got {len(row)}")
                try:
                    r = float(row[0])
                    v = float(row[1])
                except ValueError:
                    raise DataError(f"{path}: line {lineno}: non-numeric field") from None
                if not (math.isfinite(r) and math.isfinite(v)):
                    raise DataError(f"{path}: line {lineno}: non-finite value")
                rs.append(r)
                vs.append(v)
        if len(rs) < 2:
            raise DataError(f"{path}: need at least two samples")
        if rs[0] != 0.0:
            raise DataError(f"{path}: line 2: first r must be 0")
        for i in range(1, len(rs)):
            if rs[i] <= rs[i - 1]:
                raise DataError(f"{path}: line {i + 2}: r not strictly increasing")
        return cls.tabulated(rs, vs)

    # -- evaluation ---------------------------------------------------------

    def phi_hat(self, r):
        """phi_hat(r) for r >= 0 (scalar or array)."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("phi_hat argument must be >= 0")
        if self.kind == "gaussian":
            A, s = self.params
            out = A * np.exp(-((r / s) ** 2))
        elif self.kind == "bump":
            (A,) = self.params
            u = 1.0 - r * r
            out = A * np.where(u > 0.0, u * u, 0.0)
        else:
            out = self._interp(r)
            out = np.where(np.isnan(out), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def phi_hat_deriv(self, r):
        """d/dr phi_hat (analytic for the closed-form families)."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("phi_hat argument must be >= 0")
        if self.kind == "gaussian":
            A, s = self.params
            out = -2.0 * A * (r / s**2) * np.exp(-((r / s) ** 2))
        elif self.kind == "bump":
            (A,) = self.params
            u = 1.0 - r * r
            out = np.where(u > 0.0, -4.0 * A * r * u, 0.0)
        else:
            out = self._interp_deriv(r)
            out = np.where(np.isnan(out), 0.0, out)
        return float(out) if out.ndim == 0 else out

    def sup_phi_hat(self):
        if self.kind == "gaussian":
            return abs(self.params[0])
        if self.kind == "bump":
            return abs(self.params[0])
        return float(np.max(np.abs(self.table[1])))

    # -- moments ------------------------------------------------------------

    def _moment_integral(self, integrand, a):
        if a < 0:
            raise DomainError("moment exponent must be >= 0")
        upper = self.cutoff_radius
        if upper <= 0.0:
            return 0.0, 0.0
        tol_abs = 1e-10
        value, err = adaptive_gauss_legendre(integrand, 0.0, upper, tol_abs)
        tol = 1e-10 * (1.0 + abs(value))
        if err > tol:
            raise AccuracyError(f"moment quadrature error {err:.3e} above {tol:.3e}")
        if not math.isfinite(value):
            raise AccuracyError("moment integral is not finite")
        return value, err

    def moment_I(self, a):
        """I_a = int phi_hat^2 r^a dr, cached for the default exponents."""
        a = float(a)
        if a in self.moments.I:
            return self.moments.I[a]
        value, err = self._moment_integral(
            lambda r: self.phi_hat(r) ** 2 * r**a, a)
        if a in DEFAULT_EXPONENTS:
            # cache is only ever written during eager construction
            self.moments.I[a] = value
            self.moments.quadrature_error[("I", a)] = err
        return value

    def moment_Iprime(self, a):
        """Iprime_a = int |r phi_hat'(r)|^2 r^a dr."""
        a = float(a)
        if a in self.moments.Iprime:
            return self.moments.Iprime[a]
        value, err = self._moment_integral(
            lambda r: (r * self.phi_hat_deriv(r)) ** 2 * r**a, a)
        if a in DEFAULT_EXPONENTS:
            self.moments.Iprime[a] = value
            self.moments.quadrature_error[("Iprime", a)] = err
        return value

    def check_assumptions(self, theta):
        """Finiteness checks (A1): I_0 + I_3 + I'_3 and (A2): I_{3+theta} + I'_{3+theta}."""
        if not (0.0 < theta <= 1.0):
            raise DomainError("theta must lie in (0, 1]")
        w = {
            "I0": self.moment_I(0.0),
            "I3": self.moment_I(3.0),
            "Iprime3": self.moment_Iprime(3.0),
            "I3_theta": self.moment_I(3.0 + theta),
            "Iprime3_theta": self.moment_Iprime(3.0 + theta),
        }
        a1 = all(math.isfinite(w[k]) for k in ("I0", "I3", "Iprime3"))
        a2 = a1 and math.isfinite(w["I3_theta"]) and math.isfinite(w["Iprime3_theta"])
        return AssumptionReport(a1_holds=a1, a2_theta=theta if a2 else None,
                                witness_values=w)

    # numba-facing descriptor: (kind_code, p0, p1, breakpoints, poly coeffs);
    # the closed-form kinds pass a dummy 2-point table so the compiled kernel
    # never sees zero-length arrays
    _KIND_CODES = {"gaussian": 0, "bump": 1, "tabulated": 2}
    _DUMMY_TABLE = (np.array([0.0, 1.0]), np.zeros((4, 1)))

    def descriptor(self):
        code = self._KIND_CODES[self.kind]
        if self.kind == "gaussian":
            p0, p1 = self.params
            return code, p0, p1, *self._DUMMY_TABLE
        if self.kind == "bump":
            return code, self.params[0], 1.0, *self._DUMMY_TABLE
        interp = self._interp
        return code, 0.0, 1.0, np.ascontiguousarray(interp.x), np.ascontiguousarray(interp.c)
