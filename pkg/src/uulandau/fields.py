"""Built-in smooth velocity-space functions.

These are the rapidly decaying test functions and initial data used by the
verification studies: Maxwellians, Gaussian bumps, Fermi-Dirac equilibria and
polynomial-times-Gaussian profiles.  Each carries an analytic gradient and a
compact numeric descriptor so the compiled quadrature kernels can evaluate the
same function at off-grid points.
"""

import math

import numpy as np

# descriptor codes shared with _core._test_function_eval
CODE_CONST = 0
CODE_V1, CODE_V2, CODE_V3 = 1, 2, 3
CODE_VSQ = 4
CODE_GAUSSIAN = 5
CODE_MAXWELLIAN = 6
CODE_FDEQ = 7
CODE_PERTURBED = 8
CODE_POLYGAUSS = 9

_LOG_HUGE = math.log(1e18)


class SmoothField:
    """Callable v -> f(v) on (..., 3) arrays with analytic gradient."""

    def __init__(self, code, params, label):
        self.code = code
        self.params = np.asarray(params, dtype=float)
        self.label = label

    # -- constructors --------------------------------------------------------

    @classmethod
    def constant(cls, c=1.0):
        return cls(CODE_CONST, [c, 0, 0, 0, 0, 0, 0], f"const({c:g})")

    @classmethod
    def coordinate(cls, k):
        return cls((CODE_V1, CODE_V2, CODE_V3)[k], [0] * 7, f"v{k + 1}")

    @classmethod
    def speed_squared(cls):
        return cls(CODE_VSQ, [0] * 7, "|v|^2")

    @classmethod
    def gaussian(cls, amplitude=1.0, center=(0.0, 0.0, 0.0), width=1.0):
        c = np.asarray(center, dtype=float)
        return cls(CODE_GAUSSIAN, [amplitude, c[0], c[1], c[2], width, 0, 0],
                   f"gauss(A={amplitude:g},w={width:g})")

    @classmethod
    def maxwellian(cls, rho=1.0, temperature=1.0, mean=(0.0, 0.0, 0.0)):
        u = np.asarray(mean, dtype=float)
        return cls(CODE_MAXWELLIAN, [rho, temperature, u[0], u[1], u[2], 0, 0],
                   f"maxwellian(rho={rho:g},T={temperature:g})")

    @classmethod
    def fd_equilibrium(cls, eps, beta=1.0, c=0.0):
        """f = eps^-3 / (1 + exp(beta |v|^2 + c)); detailed-balance state of the
        Fermi-Dirac operator (eps^3 f / (1 - eps^3 f) is a Maxwellian)."""
        return cls(CODE_FDEQ, [eps, beta, c, 0, 0, 0, 0],
                   f"fd_eq(eps={eps:g},beta={beta:g})")

    @classmethod
    def perturbed_maxwellian(cls, rho=1.0, temperature=1.0, amplitude=0.3,
                             center=(0.8, 0.0, 0.0), width=1.2):
        c = np.asarray(center, dtype=float)
        return cls(CODE_PERTURBED,
                   [rho, temperature, amplitude, c[0], c[1], c[2], width],
                   f"perturbed_maxwellian(a={amplitude:g})")

    @classmethod
    def poly_gaussian(cls, a0=1.0, a1=0.5, a2=0.25, width=1.0):
        """(a0 + a1 v1 + a2 |v|^2) exp(-|v|^2 / width^2)."""
        return cls(CODE_POLYGAUSS, [a0, a1, a2, width, 0, 0, 0],
                   f"polygauss({a0:g},{a1:g},{a2:g})")

    # -- evaluation ----------------------------------------------------------

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        x, y, z = v[..., 0], v[..., 1], v[..., 2]
        p = self.params
        c = self.code
        if c == CODE_CONST:
            return np.full(x.shape, p[0])
        if c == CODE_V1:
            return x.copy()
        if c == CODE_V2:
            return y.copy()
        if c == CODE_V3:
            return z.copy()
        if c == CODE_VSQ:
            return x * x + y * y + z * z
        if c == CODE_GAUSSIAN:
            d2 = (x - p[1]) ** 2 + (y - p[2]) ** 2 + (z - p[3]) ** 2
            return p[0] * np.exp(-d2 / p[4] ** 2)
        if c == CODE_MAXWELLIAN:
            rho, T = p[0], p[1]
            d2 = (x - p[2]) ** 2 + (y - p[3]) ** 2 + (z - p[4]) ** 2
            return rho * (2.0 * math.pi * T) ** -1.5 * np.exp(-d2 / (2.0 * T))
        if c == CODE_FDEQ:
            eps, beta, cc = p[0], p[1], p[2]
            return eps**-3 / (1.0 + np.exp(beta * (x * x + y * y + z * z) + cc))
        if c == CODE_PERTURBED:
            rho, T, a = p[0], p[1], p[2]
            d2 = (x - p[3]) ** 2 + (y - p[4]) ** 2 + (z - p[5]) ** 2
            m = rho * (2.0 * math.pi * T) ** -1.5 * np.exp(-(x * x + y * y + z * z) / (2.0 * T))
            return m * (1.0 + a * np.exp(-d2 / p[6] ** 2))
        if c == CODE_POLYGAUSS:
            r2 = x * x + y * y + z * z
            return (p[0] + p[1] * x + p[2] * r2) * np.exp(-r2 / p[3] ** 2)
        raise ValueError(f"unknown field code {c}")

    def gradient(self, v):
        v = np.asarray(v, dtype=float)
        x, y, z = v[..., 0], v[..., 1], v[..., 2]
        p = self.params
        c = self.code
        g = np.zeros(v.shape, dtype=float)
        if c == CODE_CONST:
            return g
        if c in (CODE_V1, CODE_V2, CODE_V3):
            g[..., c - 1] = 1.0
            return g
        if c == CODE_VSQ:
            return 2.0 * v
        if c == CODE_GAUSSIAN:
            f = self(v)
            for k, ck in enumerate(p[1:4]):
                g[..., k] = -2.0 * (v[..., k] - ck) / p[4] ** 2 * f
            return g
        if c == CODE_MAXWELLIAN:
            f = self(v)
            for k, ck in enumerate(p[2:5]):
                g[..., k] = -(v[..., k] - ck) / p[1] * f
            return g
        if c == CODE_FDEQ:
            eps, beta, cc = p[0], p[1], p[2]
            e = np.exp(beta * (x * x + y * y + z * z) + cc)
            base = -eps**-3 * beta * e / (1.0 + e) ** 2
            return 2.0 * v * base[..., None]
        if c == CODE_PERTURBED:
            rho, T, a = p[0], p[1], p[2]
            r2 = x * x + y * y + z * z
            m = rho * (2.0 * math.pi * T) ** -1.5 * np.exp(-r2 / (2.0 * T))
            d = v - p[3:6]
            bump = a * np.exp(-np.sum(d * d, axis=-1) / p[6] ** 2)
            g = -v / T * (m * (1.0 + bump))[..., None]
            g += m[..., None] * bump[..., None] * (-2.0 * d / p[6] ** 2)
            return g
        if c == CODE_POLYGAUSS:
            r2 = x * x + y * y + z * z
            e = np.exp(-r2 / p[3] ** 2)
            poly = p[0] + p[1] * x + p[2] * r2
            g = -2.0 * v / p[3] ** 2 * (poly * e)[..., None]
            g[..., 0] += p[1] * e
            g += 2.0 * p[2] * v * e[..., None]
            return g
        raise ValueError(f"unknown field code {c}")

    def decay_radius(self):
        """Radius about the origin beyond which |f| is below ~1e-18 * scale."""
        p = self.params
        c = self.code
        if c in (CODE_CONST, CODE_V1, CODE_V2, CODE_V3, CODE_VSQ):
            return math.inf
        if c == CODE_GAUSSIAN:
            return float(np.linalg.norm(p[1:4])) + p[4] * math.sqrt(_LOG_HUGE)
        if c == CODE_MAXWELLIAN:
            return float(np.linalg.norm(p[2:5])) + math.sqrt(2.0 * p[1] * _LOG_HUGE)
        if c == CODE_FDEQ:
            return math.sqrt(_LOG_HUGE / p[1])
        if c == CODE_PERTURBED:
            return math.sqrt(2.0 * p[1] * _LOG_HUGE)
        if c == CODE_POLYGAUSS:
            return p[3] * math.sqrt(_LOG_HUGE) + 4.0
        raise ValueError(f"unknown field code {c}")

    def descriptor(self):
        return self.code, self.params


# aliases used by the weak-form studies
def collision_invariants():
    """The five functions whose symmetrized weak form vanishes identically."""
    return [SmoothField.constant(1.0), SmoothField.coordinate(0),
            SmoothField.coordinate(1), SmoothField.coordinate(2),
            SmoothField.speed_squared()]
