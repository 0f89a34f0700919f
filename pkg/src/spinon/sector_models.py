"""Sector decomposition of two boson-coupled models.

A conserved excitation number splits each infinite-dimensional problem
into finite blocks that diagonalise exactly:

  * spin-boson model  H = w a+a + e Sz - g (a+ S- + S+ a), blocks labelled
    by r = n + sigma;
  * two oscillators   H = w a+a + W b+b + g (a+ b^2 + a b+^2), blocks
    labelled by N = 2 n_a + n_b.

Both block matrices are real symmetric tridiagonal in the natural
occupation ordering.  Full truncated-space spectra are provided as an
oracle: levels below the safe window w * n_max / 2 must be reproduced by
the union of complete sectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySector, ValidationError
from .spin_algebra import SpinQuantum, build_spin_operators, hermitian_eigensystem


@dataclass(frozen=True)
class DickeModel:
    omega: float
    epsilon: float
    g: float
    s: SpinQuantum


@dataclass(frozen=True)
class TwoOscillatorModel:
    omega: float
    capital_omega: float
    g: float


@dataclass(frozen=True)
class SectorSpectrum:
    sector_label: float
    basis: tuple[tuple[float, float], ...]  # occupation tuples
    eigenvalues: np.ndarray


def _tridiagonal_eigenvalues(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    if len(diag) == 1:
        return np.array([float(diag[0])])
    h = np.diag(diag).astype(complex)
    idx = np.arange(len(diag) - 1)
    h[idx, idx + 1] = off
    h[idx + 1, idx] = off
    return hermitian_eigensystem(h).eigenvalues


def dicke_sector(model: DickeModel, r: float) -> SectorSpectrum:
    """Exact spectrum of the block with n + sigma = r.

    Basis states (n, sigma) with n = r - sigma >= 0 ordered by ascending
    n; the off-diagonal element between (n, sigma) and (n+1, sigma-1) is
    -g sqrt(n+1) sqrt((S+sigma)(S-sigma+1)).
    """
    s = model.s.s_value
    if r < -s - 1e-12 or abs((r + s) - round(r + s)) > 1e-9:
        raise EmptySector(f"no basis states with n + sigma = {r} at S = {s}")
    sigma_max = min(s, r)
    basis = []
    sigma = sigma_max
    while sigma >= -s - 1e-12:
        n = r - sigma
        basis.append((float(round(n)), float(sigma)))
        sigma -= 1.0
    if not basis:
        raise EmptySector(f"no basis states with n + sigma = {r} at S = {s}")
    diag = np.array([model.omega * n + model.epsilon * sig for n, sig in basis])
    off = np.array(
        [
            -model.g * math.sqrt(n + 1.0) * math.sqrt((s + sig) * (s - sig + 1.0))
            for (n, sig) in basis[:-1]
        ]
    )
    return SectorSpectrum(float(r), tuple(basis), _tridiagonal_eigenvalues(diag, off))


def boson_operators(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation matrices on the 0..n_max number basis."""
    if n_max < 1:
        raise ValidationError(f"n_max must be at least 1, got {n_max}")
    dim = n_max + 1
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a, a.conj().T


def dicke_truncated_hamiltonian(model: DickeModel, n_max: int) -> np.ndarray:
    """H on the product space (boson 0..n_max) x (spin), boson index outer."""
    a, adag = boson_operators(n_max)
    ops = build_spin_operators(model.s)
    eye_b = np.eye(n_max + 1)
    eye_s = np.eye(model.s.dim)
    return (
        model.omega * np.kron(adag @ a, eye_s)
        + model.epsilon * np.kron(eye_b, ops.sz)
        - model.g * (np.kron(adag, ops.sminus) + np.kron(a, ops.splus))
    )


def dicke_truncated_full(model: DickeModel, n_max: int) -> np.ndarray:
    """Ascending spectrum of the truncated product-space Hamiltonian.

    Levels are physical only below the window omega * n_max / 2; above it
    the boson cutoff distorts the incomplete sectors.
    """
    return hermitian_eigensystem(dicke_truncated_hamiltonian(model, n_max)).eigenvalues


def dicke_sector_union(model: DickeModel, n_max: int) -> np.ndarray:
    """Sorted union of all complete-sector eigenvalues with r <= n_max - S."""
    s = model.s.s_value
    levels = []
    r = -s
    while r <= n_max - s + 1e-9:
        levels.extend(dicke_sector(model, r).eigenvalues)
        r += 1.0
    return np.sort(np.asarray(levels))


def two_oscillator_sector(model: TwoOscillatorModel, big_n: int) -> SectorSpectrum:
    """Exact spectrum of the block with 2 n_a + n_b = N.

    Basis (n_a, n_b = N - 2 n_a) ordered by ascending n_a; the matrix
    element of a+ b^2 between consecutive states is
    sqrt(n_a + 1) sqrt(n_b (n_b - 1)).
    """
    if big_n < 0 or int(big_n) != big_n:
        raise ValidationError(f"sector label must be a nonnegative integer, got {big_n}")
    basis = [(float(na), float(big_n - 2 * na)) for na in range(big_n // 2 + 1)]
    diag = np.array([model.omega * na + model.capital_omega * nb for na, nb in basis])
    off = np.array(
        [
            model.g * math.sqrt(na + 1.0) * math.sqrt(nb * (nb - 1.0))
            for (na, nb) in basis[:-1]
        ]
    )
    return SectorSpectrum(float(big_n), tuple(basis), _tridiagonal_eigenvalues(diag, off))


def two_oscillator_truncated_hamiltonian(
    model: TwoOscillatorModel, na_max: int, nb_max: int
) -> np.ndarray:
    """H on (oscillator a 0..na_max) x (oscillator b 0..nb_max), a outer."""
    a, adag = boson_operators(na_max)
    b, bdag = boson_operators(nb_max)
    eye_a = np.eye(na_max + 1)
    eye_b = np.eye(nb_max + 1)
    return (
        model.omega * np.kron(adag @ a, eye_b)
        + model.capital_omega * np.kron(eye_a, bdag @ b)
        + model.g * (np.kron(adag, b @ b) + np.kron(a, bdag @ bdag))
    )
