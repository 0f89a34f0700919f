"""Classical spin thermodynamics on the sphere and its first quantum correction.

The classical partition function uses the measure (2S+1)/(4pi) dOmega, so
that a vanishing Hamiltonian gives F_cl = -T ln(2S+1) exactly; the same
normalisation makes the first correction

    dF = (1/4S) < sum_kl (delta_kl - n_k n_l) (F_,kl - F_,k F_,l / T) >

reproduce the closed Zeeman form -(T/2S)(beta coth beta - 1) with
beta = B S / T, which pins every convention in this module (measure,
unconstrained derivatives, tangential projector).  Angle brackets denote
the normalised classical Gibbs average; F(n) is the classical energy as
a function of the unit vector with its natural off-sphere extension.

Convergence sweeps compare against exact quantum free energies; presets
scale couplings with 1/S so the classical energy function is
S-independent and the corrected residual falls off as S^-2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureUnconverged, ValidationError
from .spin_algebra import (
    QuadraticSpinModel,
    SpinQuantum,
    build_quadratic_hamiltonian,
    hermitian_eigensystem,
)


@dataclass(frozen=True)
class ClassicalSpinHamiltonian:
    """Classical energy F(n) with unconstrained gradient and Hessian in n.

    The callables must accept 3-vectors slightly off the unit sphere
    (polynomials in n extend naturally); the tangential projector in the
    correction formula removes the radial direction.
    """

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]

    def check_derivatives(self, rng=None, samples: int = 8, tol: float = 1e-6) -> None:
        """Finite-difference consistency of grad and hess at random points."""
        rng = rng or np.random.default_rng(0)
        h = 1e-5
        for _ in range(samples):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            g = np.asarray(self.grad(n), dtype=float)
            hs = np.asarray(self.hess(n), dtype=float)
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                d1 = (self.value(n + e) - self.value(n - e)) / (2.0 * h)
                if abs(d1 - g[k]) > tol * (1.0 + abs(d1)):
                    raise ValidationError(f"gradient component {k} inconsistent with value")
                d2 = (np.asarray(self.grad(n + e)) - np.asarray(self.grad(n - e))) / (2.0 * h)
                if np.max(np.abs(d2 - hs[:, k])) > tol * (1.0 + np.max(np.abs(d2))):
                    raise ValidationError(f"hessian column {k} inconsistent with gradient")


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre in cos(theta) crossed with a uniform trapezoid in phi."""

    n_u: int
    n_phi: int
    nodes: np.ndarray    # (N, 3) unit vectors
    weights: np.ndarray  # (N,), summing to 4 pi

    def doubled(self) -> "SphereQuadrature":
        return sphere_quadrature(2 * self.n_u, 2 * self.n_phi)


@dataclass(frozen=True)
class FreeEnergyReport:
    s_value: float
    temperature: float
    f_quantum: float
    f_classical: float
    delta_f: float

    @property
    def residual(self) -> float:
        return self.f_quantum - self.f_classical - self.delta_f


@dataclass(frozen=True)
class WkPreset:
    """Classical energy plus the matching quantum model builder."""

    name: str
    classical: ClassicalSpinHamiltonian
    quantum_model: Callable[[SpinQuantum], QuadraticSpinModel]


def sphere_quadrature(n_u: int, n_phi: int) -> SphereQuadrature:
    """Product rule exact for spherical polynomials of degree <= 2 n_u - 1
    (given n_phi at least that large in the azimuthal index)."""
    if n_u < 2 or n_phi < 4:
        raise ValidationError(f"need n_u >= 2 and n_phi >= 4, got ({n_u}, {n_phi})")
    u, wu = leggauss(n_u)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(1.0 - u**2)
    nodes = np.empty((n_u * n_phi, 3))
    nodes[:, 0] = np.outer(sin_theta, np.cos(phi)).ravel()
    nodes[:, 1] = np.outer(sin_theta, np.sin(phi)).ravel()
    nodes[:, 2] = np.repeat(u, n_phi)
    weights = np.repeat(wu * (2.0 * math.pi / n_phi), n_phi)
    return SphereQuadrature(n_u=n_u, n_phi=n_phi, nodes=nodes, weights=weights)


def quantum_free_energy(h: np.ndarray, temperature: float) -> float:
    """-T ln Z from exact eigenvalues, with max-shift for overflow safety."""
    if temperature <= 0.0:
        raise ValidationError("temperature must be positive")
    energies = hermitian_eigensystem(np.asarray(h, dtype=complex)).eigenvalues
    e0 = energies[0]
    return float(e0 - temperature * math.log(np.sum(np.exp(-(energies - e0) / temperature))))


def _gibbs_pass(h: ClassicalSpinHamiltonian, s: SpinQuantum, temperature: float, quad: SphereQuadrature):
    """One shared evaluation over the nodes: F_cl and the dF average."""
    values = np.array([h.value(n) for n in quad.nodes])
    v_min = values.min()
    gibbs = np.exp(-(values - v_min) / temperature)
    z = float(np.sum(quad.weights * gibbs))
    f_cl = float(v_min - temperature * math.log((s.two_s + 1.0) / (4.0 * math.pi) * z))
    integrand = np.empty(len(values))
    for k, n in enumerate(quad.nodes):
        grad = np.asarray(h.grad(n), dtype=float)
        hess = np.asarray(h.hess(n), dtype=float)
        projector = np.eye(3) - np.outer(n, n)
        integrand[k] = np.sum(projector * (hess - np.outer(grad, grad) / temperature))
    average = float(np.sum(quad.weights * gibbs * integrand) / z)
    delta_f = average / (4.0 * s.s_value)
    return f_cl, delta_f


def _converged_pass(
    h: ClassicalSpinHamiltonian,
    s: SpinQuantum,
    temperature: float,
    quad: SphereQuadrature,
    tol: float,
):
    if temperature <= 0.0:
        raise ValidationError("temperature must be positive")
    if s.two_s == 0:
        raise ValidationError("the 1/S expansion needs S > 0")
    coarse = _gibbs_pass(h, s, temperature, quad)
    fine = _gibbs_pass(h, s, temperature, quad.doubled())
    if abs(fine[0] - coarse[0]) > tol or abs(fine[1] - coarse[1]) > tol:
        raise QuadratureUnconverged(
            f"doubling n_u moved (F_cl, dF) by ({abs(fine[0] - coarse[0]):.2e}, "
            f"{abs(fine[1] - coarse[1]):.2e}) > {tol:g}"
        )
    return fine


def classical_free_energy(
    h: ClassicalSpinHamiltonian,
    s: SpinQuantum,
    temperature: float,
    quad: SphereQuadrature,
    tol: float = 1e-9,
) -> float:
    """F_cl = -T ln[(2S+1)/(4pi) * integral dOmega e^{-F(n)/T}]."""
    return _converged_pass(h, s, temperature, quad, tol)[0]


def wk_correction(
    h: ClassicalSpinHamiltonian,
    s: SpinQuantum,
    temperature: float,
    quad: SphereQuadrature,
    tol: float = 1e-9,
) -> float:
    """First 1/S correction to the classical free energy (see module docstring)."""
    return _converged_pass(h, s, temperature, quad, tol)[1]


def zeeman_delta_f(s: SpinQuantum, b_field: float, temperature: float) -> float:
    """Closed form -(T/2S)(beta coth beta - 1), beta = B S / T, for F = -B n_z
    scaled so beta uses the full classical energy amplitude B."""
    beta = b_field / temperature
    return -(temperature / (2.0 * s.s_value)) * (beta / math.tanh(beta) - 1.0)


def zeeman_preset(b_field: float = 3.0) -> WkPreset:
    """Classical F(n) = -B n_z; quantum H = -(B/S) Sz."""
    classical = ClassicalSpinHamiltonian(
        value=lambda n: -b_field * n[2],
        grad=lambda n: np.array([0.0, 0.0, -b_field]),
        hess=lambda n: np.zeros((3, 3)),
    )

    def model(s: SpinQuantum) -> QuadraticSpinModel:
        return QuadraticSpinModel(
            s, np.zeros((3, 3)), np.array([0.0, 0.0, -b_field / s.s_value])
        )

    return WkPreset("zeeman", classical, model)


def uniaxial_preset(b_field: float = 1.2) -> WkPreset:
    """Classical F(n) = -n_z^2 - B n_x; quantum H = -Sz^2/S^2 - (B/S) Sx."""
    classical = ClassicalSpinHamiltonian(
        value=lambda n: -n[2] ** 2 - b_field * n[0],
        grad=lambda n: np.array([-b_field, 0.0, -2.0 * n[2]]),
        hess=lambda n: np.diag([0.0, 0.0, -2.0]),
    )

    def model(s: SpinQuantum) -> QuadraticSpinModel:
        a = np.zeros((3, 3))
        a[2, 2] = -1.0 / s.s_value**2
        return QuadraticSpinModel(s, a, np.array([-b_field / s.s_value, 0.0, 0.0]))

    return WkPreset("uniaxial", classical, model)


PRESETS = {"zeeman": zeeman_preset, "uniaxial": uniaxial_preset}


def wk_report(
    preset: WkPreset,
    s: SpinQuantum,
    temperature: float,
    quad: SphereQuadrature | None = None,
    tol: float = 1e-9,
) -> FreeEnergyReport:
    """Quantum vs classical-plus-correction free energies for one S."""
    if quad is None:
        quad = sphere_quadrature(32, 64)
    h_matrix = build_quadratic_hamiltonian(preset.quantum_model(s))
    f_q = quantum_free_energy(h_matrix, temperature)
    f_cl, delta_f = _converged_pass(preset.classical, s, temperature, quad, tol)
    return FreeEnergyReport(
        s_value=s.s_value,
        temperature=temperature,
        f_quantum=f_q,
        f_classical=f_cl,
        delta_f=delta_f,
    )


@dataclass(frozen=True)
class WkConvergenceTable:
    reports: tuple[FreeEnergyReport, ...]
    exponents: tuple[float, ...]  # log-ratio order estimates between consecutive S


def wk_convergence(
    preset: WkPreset,
    s_list: Sequence[SpinQuantum],
    temperature: float,
    quad: SphereQuadrature | None = None,
    tol: float = 1e-9,
) -> WkConvergenceTable:
    """Residual table over an S sweep with log-ratio scaling exponents."""
    reports = tuple(wk_report(preset, s, temperature, quad, tol) for s in s_list)
    exponents = []
    for lo, hi in zip(reports, reports[1:]):
        ratio = abs(lo.residual) / max(abs(hi.residual), 1e-300)
        growth = hi.s_value / lo.s_value
        exponents.append(math.log(ratio) / math.log(growth))
    return WkConvergenceTable(reports=reports, exponents=tuple(exponents))
