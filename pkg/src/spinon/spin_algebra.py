"""Dense spin-S kernels: operator matrices, coherent states on the sphere,
and the two differential-operator representations of the spin algebra.

Conventions used everywhere in this package:
  * basis ordering sigma = S, S-1, ..., -S  (row 0 is |S>),
  * hbar = 1, so times carry units of inverse energy,
  * coherent-state label xi = tan(theta/2) * exp(i*phi), with the north
    pole theta = 0 mapping to xi = 0.

The xi-representation acts on polynomials in (xi*, xi).  Writing d* for
d/d(xi*), the generators acting from the left inside a coherent-state
average are

    L_+ = d*,   L_z = S - xi* d*,   L_- = 2 S xi* - xi*^2 d*.

The c-number parts of L_z and L_- are required for the averages of S_i f
to come out right; a regression test checks them against explicit matrix
elements.  On the sphere the same algebra reads

    vec(L) = S n + (a - i b)/2,   b = n x grad,   a = -n x b,

with grad the surface gradient; tangential derivatives are evaluated by
central finite differences of step h (error O(h^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonHermitianInput, PoleSingularity, SpinonError, ValidationError

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class SpinQuantum:
    """Spin magnitude stored as the integer 2S, so S may be half-integer."""

    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)) or self.two_s < 0:
            raise ValidationError(f"two_s must be a nonnegative integer, got {self.two_s!r}")

    @classmethod
    def from_s(cls, s: float) -> "SpinQuantum":
        two_s = round(2.0 * s)
        if abs(2.0 * s - two_s) > 1e-9 or two_s < 0:
            raise ValidationError(f"spin must be a nonnegative half-integer, got {s!r}")
        return cls(int(two_s))

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def s_value(self) -> float:
        return self.two_s / 2.0

    def sigmas(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order, sigma = S..-S."""
        return self.s_value - np.arange(self.dim)

    def binomial_weights(self) -> np.ndarray:
        """w_i = binom(2S, i) for row i = S - sigma; exact integers as floats."""
        return np.array([math.comb(self.two_s, i) for i in range(self.dim)], dtype=float)


@dataclass(frozen=True)
class SpinOperatorSet:
    """Dense matrices of the spin components at fixed S."""

    s: SpinQuantum
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    splus: np.ndarray
    sminus: np.ndarray

    @property
    def vector(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.sx, self.sy, self.sz)


@dataclass(frozen=True)
class CoherentPoint:
    """Point on the unit sphere labelling a coherent state."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValidationError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))

    @classmethod
    def from_vector(cls, v) -> "CoherentPoint":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValidationError("zero vector has no direction")
        v = v / norm
        return cls(math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0]))

    @property
    def xi(self) -> complex:
        return math.tan(self.theta / 2.0) * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def n(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(frozen=True)
class QuadraticSpinModel:
    """H = sum_ij a_ij S_i S_j + sum_i b_i S_i with a symmetrised on construction."""

    s: SpinQuantum
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != (3, 3) or b.shape != (3,):
            raise ValidationError("need a 3x3 coefficient matrix and a 3-vector")
        object.__setattr__(self, "a", 0.5 * (a + a.T))
        object.__setattr__(self, "b", b)

    @classmethod
    def uniaxial(cls, s: SpinQuantum, b_field: float) -> "QuadraticSpinModel":
        """H = -Sz^2 - B Sx."""
        a = np.zeros((3, 3))
        a[2, 2] = -1.0
        return cls(s, a, np.array([-b_field, 0.0, 0.0]))

    @classmethod
    def biaxial(cls, s: SpinQuantum, alpha: float, beta: float, b_field: float) -> "QuadraticSpinModel":
        """H = alpha Sz^2 - beta Sy^2 + B Sx."""
        a = np.zeros((3, 3))
        a[2, 2] = alpha
        a[1, 1] = -beta
        return cls(s, a, np.array([b_field, 0.0, 0.0]))

    @classmethod
    def twisting(cls, s: SpinQuantum, b_field: float, d: float) -> "QuadraticSpinModel":
        """H = -B Sz - D Sz^2 (precession plus one-axis twisting)."""
        a = np.zeros((3, 3))
        a[2, 2] = -d
        return cls(s, a, np.array([0.0, 0.0, -b_field]))


@dataclass(frozen=True)
class SymbolPolynomial:
    """Exact polynomial in (xi*, xi) representing an unnormalised average.

    coeffs[p, q] multiplies xi*^p xi^q; both degrees are bounded by 2S.
    """

    two_s: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        n = self.two_s + 1
        if c.shape != (n, n):
            raise ValidationError(f"coefficient matrix must be {n}x{n}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def evaluate(self, xi: complex) -> complex:
        n = self.two_s + 1
        pows = np.power(xi, np.arange(n))
        return complex(np.conj(pows) @ self.coeffs @ pows)


@dataclass(frozen=True)
class Eigensystem:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def build_spin_operators(s: SpinQuantum) -> SpinOperatorSet:
    """Spin matrices in the S_z eigenbasis ordered sigma = S..-S."""
    dim = s.dim
    sz = np.diag(s.sigmas()).astype(complex)
    sp = np.zeros((dim, dim), dtype=complex)
    for j in range(1, dim):
        # <sigma+1|S_+|sigma> with sigma = S - j
        sp[j - 1, j] = math.sqrt(j * (s.two_s - j + 1.0))
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    return SpinOperatorSet(s=s, sx=sx, sy=sy, sz=sz, splus=sp, sminus=sm)


def build_quadratic_hamiltonian(model: QuadraticSpinModel) -> np.ndarray:
    """Dense Hermitian matrix of the quadratic spin Hamiltonian."""
    ops = build_spin_operators(model.s)
    comps = ops.vector
    h = np.zeros((model.s.dim, model.s.dim), dtype=complex)
    for i in range(3):
        if model.b[i] != 0.0:
            h += model.b[i] * comps[i]
        for j in range(3):
            if model.a[i, j] != 0.0:
                h += model.a[i, j] * (comps[i] @ comps[j])
    return h


def coherent_state(s: SpinQuantum, point: CoherentPoint, normalized: bool = True) -> np.ndarray:
    """Coherent state |xi> = exp(xi S_-)|S> in the sigma = S..-S basis.

    Component i (sigma = S - i) of the unnormalised state is
    sqrt(binom(2S, i)) xi^i; the normalised state divides by
    (1 + |xi|^2)^S, which in half-angle form is numerically stable all
    the way to theta = pi.  The unnormalised branch has no finite value
    at theta = pi and returns the sigma = -S directional limit there.
    """
    i = np.arange(s.dim)
    root_w = np.sqrt(s.binomial_weights())
    phase = np.exp(1j * point.phi * i)
    half = 0.5 * point.theta
    if normalized:
        amp = np.cos(half) ** (s.two_s - i) * np.sin(half) ** i
        return root_w * amp * phase
    if math.pi - point.theta < 1e-12:
        out = np.zeros(s.dim, dtype=complex)
        out[-1] = np.exp(1j * point.phi * s.two_s)
        return out
    return root_w * math.tan(half) ** i * phase


def hermitian_eigensystem(a: np.ndarray, threshold: float = 1e-14, max_sweeps: int = 50) -> Eigensystem:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Rotations are applied until the off-diagonal Frobenius norm drops
    below threshold * ||A||_F (at most max_sweeps sweeps).  Deterministic
    and self-contained; intended for dimensions up to a few hundred.
    """
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"need a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return Eigensystem(np.zeros(n), np.eye(n, dtype=complex))
    if np.linalg.norm(a - a.conj().T) > 1e-10 * scale:
        raise NonHermitianInput("matrix deviates from Hermitian symmetry beyond 1e-10 * norm")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    floor = threshold * scale / max(n, 1)

    def off_norm(m):
        return np.linalg.norm(m - np.diag(np.diag(m)))

    converged = False
    for _ in range(max_sweeps):
        if off_norm(a) <= threshold * scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= floor:
                    continue
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                sgn = t * c
                # unitary G: G[p,p]=c, G[q,p]=-s*conj(phase), G[p,q]=s, G[q,q]=c*conj(phase)
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - sgn * np.conj(phase) * col_q
                a[:, q] = sgn * col_p + c * np.conj(phase) * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - sgn * phase * row_q
                a[q, :] = sgn * row_p + c * phase * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sgn * np.conj(phase) * vq
                v[:, q] = sgn * vp + c * np.conj(phase) * vq
    else:
        converged = off_norm(a) <= threshold * scale
    if not converged:
        raise SpinonError(f"Jacobi sweeps did not converge within {max_sweeps} sweeps")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return Eigensystem(w[order], v[:, order])


def evolve_with(es: Eigensystem, t: float, v: np.ndarray) -> np.ndarray:
    """exp(-i H t) v given a precomputed eigensystem of H."""
    coeffs = es.eigenvectors.conj().T @ np.asarray(v, dtype=complex)
    return es.eigenvectors @ (np.exp(-1j * es.eigenvalues * t) * coeffs)


def evolve(h: np.ndarray, t: float, v: np.ndarray) -> np.ndarray:
    """Unitary evolution exp(-i H t) v via eigendecomposition (hbar = 1)."""
    return evolve_with(hermitian_eigensystem(h), t, v)


def covariant_symbol(a: np.ndarray, point: CoherentPoint) -> complex:
    """Normalised coherent-state average <n|A|n>."""
    a = np.asarray(a, dtype=complex)
    s = SpinQuantum(a.shape[0] - 1)
    state = coherent_state(s, point, normalized=True)
    return complex(np.vdot(state, a @ state))


def polynomial_symbol(a: np.ndarray) -> SymbolPolynomial:
    """Exact coefficients of the unnormalised average <xi|A|xi>.

    c[p, q] = sqrt(binom(2S,p) binom(2S,q)) A[p, q]; evaluating at xi
    reproduces covariant_symbol(A) * (1 + |xi|^2)^(2S).
    """
    a = np.asarray(a, dtype=complex)
    s = SpinQuantum(a.shape[0] - 1)
    root_w = np.sqrt(s.binomial_weights())
    return SymbolPolynomial(s.two_s, np.outer(root_w, root_w) * a)


def apply_xi_representation(axis: str, poly: SymbolPolynomial) -> SymbolPolynomial:
    """Polynomial of <xi|S_i A|xi> given the polynomial of <xi|A|xi>.

    axis is one of '+', '-', 'x', 'y', 'z'.  The ladder actions on the
    coefficient table are

        (L_+ c)[p, q] = (p + 1) c[p+1, q]
        (L_z c)[p, q] = (S - p) c[p, q]
        (L_- c)[p, q] = (2S - p + 1) c[p-1, q]

    and the degree bound survives exactly because the L_- prefactor
    vanishes at the boundary.
    """
    c = poly.coeffs
    n = poly.two_s + 1
    s_val = poly.two_s / 2.0

    def raise_op(c):
        out = np.zeros_like(c)
        out[:-1, :] = np.arange(1, n)[:, None] * c[1:, :]
        return out

    def lower_op(c):
        out = np.zeros_like(c)
        out[1:, :] = (poly.two_s - np.arange(1, n) + 1.0)[:, None] * c[:-1, :]
        return out

    def z_op(c):
        return (s_val - np.arange(n))[:, None] * c

    if axis == "+":
        out = raise_op(c)
    elif axis == "-":
        out = lower_op(c)
    elif axis == "z":
        out = z_op(c)
    elif axis == "x":
        out = 0.5 * (raise_op(c) + lower_op(c))
    elif axis == "y":
        out = -0.5j * (raise_op(c) - lower_op(c))
    else:
        raise ValidationError(f"axis must be one of +,-,x,y,z, got {axis!r}")
    return SymbolPolynomial(poly.two_s, out)


def apply_sphere_representation(
    axis: str,
    f: Callable[[CoherentPoint], complex],
    point: CoherentPoint,
    h: float,
    s: SpinQuantum,
) -> complex:
    """(S n_i + (a_i - i b_i)/2) F at point, derivatives by central differences.

    f is sampled at point and at the four stencil points (theta +- h,
    phi +- h); the error is O(h^2).  Raises PoleSingularity within h of
    the poles, where the phi derivative loses meaning in this chart.
    """
    if h <= 0.0:
        raise ValidationError("step h must be positive")
    idx = _AXIS_INDEX.get(axis)
    if idx is None:
        raise ValidationError(f"axis must be one of x,y,z, got {axis!r}")
    theta, phi = point.theta, point.phi
    if theta < h or theta > math.pi - h:
        raise PoleSingularity(f"theta={theta:.6f} is within h={h} of a pole; rotate the chart")
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    n = np.array([st * cp, st * sp, ct])
    e_theta = np.array([ct * cp, ct * sp, -st])
    e_phi = np.array([-sp, cp, 0.0])
    f0 = f(point)
    d_theta = (f(CoherentPoint(theta + h, phi)) - f(CoherentPoint(theta - h, phi))) / (2.0 * h)
    d_phi = (f(CoherentPoint(theta, phi + h)) - f(CoherentPoint(theta, phi - h))) / (2.0 * h)
    grad = e_theta * d_theta + e_phi * (d_phi / st)
    b = np.cross(n, grad)
    return complex(s.s_value * n[idx] * f0 + 0.5 * (grad[idx] - 1j * b[idx]))


def rotate_about_y(a: np.ndarray, angle: float) -> np.ndarray:
    """Conjugate A by R = exp(-i angle S_y): returns R^dagger A R.

    The rotated operator sees the sphere tilted so that its covariant
    symbol at (theta, phi=0) equals the original symbol at
    (theta + angle, 0); used to move pole-adjacent points into a safe
    chart before applying the sphere representation.
    """
    a = np.asarray(a, dtype=complex)
    s = SpinQuantum(a.shape[0] - 1)
    ops = build_spin_operators(s)
    es = hermitian_eigensystem(ops.sy)
    r = es.eigenvectors @ (np.exp(-1j * es.eigenvalues * angle)[:, None] * es.eigenvectors.conj().T)
    return r.conj().T @ a @ r
