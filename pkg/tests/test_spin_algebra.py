import math

import numpy as np
import pytest

from spinon.errors import NonHermitianInput, PoleSingularity, ValidationError
from spinon.spin_algebra import (
    CoherentPoint,
    QuadraticSpinModel,
    SpinQuantum,
    apply_sphere_representation,
    apply_xi_representation,
    build_quadratic_hamiltonian,
    build_spin_operators,
    coherent_state,
    covariant_symbol,
    evolve,
    hermitian_eigensystem,
    polynomial_symbol,
    rotate_about_y,
)


def random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


class TestSpinOperators:
    def test_half_spin_matrices(self):
        ops = build_spin_operators(SpinQuantum(1))
        assert np.allclose(ops.sx, [[0, 0.5], [0.5, 0]])
        assert np.allclose(ops.sz, np.diag([0.5, -0.5]))

    def test_spin_one_sz_diagonal(self):
        ops = build_spin_operators(SpinQuantum(2))
        assert np.allclose(ops.sz, np.diag([1.0, 0.0, -1.0]))

    def test_commutator_spin_three_halves(self):
        ops = build_spin_operators(SpinQuantum(3))
        comm = ops.sx @ ops.sy - ops.sy @ ops.sx
        assert np.max(np.abs(comm - 1j * ops.sz)) < 1e-14

    @pytest.mark.parametrize("two_s", [1, 2, 3, 5, 8, 21, 40])
    def test_algebra_invariants(self, two_s):
        s = SpinQuantum(two_s)
        ops = build_spin_operators(s)
        sx, sy, sz = ops.vector
        scale = 1e-12 * max(s.s_value**2, 1.0)
        for a, b, c in ((sx, sy, sz), (sy, sz, sx), (sz, sx, sy)):
            assert np.linalg.norm(a @ b - b @ a - 1j * c) <= scale
        assert np.linalg.norm(ops.splus - (sx + 1j * sy)) <= scale
        casimir = sx @ sx + sy @ sy + sz @ sz
        expect = s.s_value * (s.s_value + 1.0) * np.eye(s.dim)
        assert np.linalg.norm(casimir - expect) <= scale
        assert np.allclose(sx, sx.conj().T) and np.allclose(sx.imag, 0.0)
        assert np.allclose(sz, sz.conj().T) and np.allclose(sz.imag, 0.0)
        assert np.allclose(sy, sy.conj().T) and np.allclose(sy.real, 0.0)


class TestQuadraticHamiltonian:
    def test_uniaxial_zero_field_spin_one(self):
        model = QuadraticSpinModel.uniaxial(SpinQuantum(2), 0.0)
        h = build_quadratic_hamiltonian(model)
        w = hermitian_eigensystem(h).eigenvalues
        assert np.allclose(w, [-1.0, -1.0, 0.0])

    @pytest.mark.parametrize("b", [0.3, 1.0, 2.7])
    def test_uniaxial_half_spin_levels(self, b):
        # hand diagonalisation of [[-1/4, -B/2], [-B/2, -1/4]]
        model = QuadraticSpinModel.uniaxial(SpinQuantum(1), b)
        w = hermitian_eigensystem(build_quadratic_hamiltonian(model)).eigenvalues
        assert np.allclose(w, [-0.25 - b / 2.0, -0.25 + b / 2.0])

    def test_biaxial_hermitian_and_trace(self):
        s = SpinQuantum(5)
        alpha, beta, b = 0.8, 0.3, 1.1
        h = build_quadratic_hamiltonian(QuadraticSpinModel.biaxial(s, alpha, beta, b))
        assert np.linalg.norm(h - h.conj().T) <= 1e-12 * np.linalg.norm(h)
        sv = s.s_value
        expect = (alpha - beta) * sv * (sv + 1.0) * (2 * sv + 1.0) / 3.0
        assert np.trace(h).real == pytest.approx(expect, rel=1e-12)

    def test_coefficients_symmetrised(self):
        a = np.zeros((3, 3))
        a[0, 1] = 2.0
        model = QuadraticSpinModel(SpinQuantum(2), a, np.zeros(3))
        assert np.allclose(model.a, model.a.T)
        h = build_quadratic_hamiltonian(model)
        assert np.linalg.norm(h - h.conj().T) <= 1e-12 * max(np.linalg.norm(h), 1.0)


class TestCoherentState:
    def test_north_pole_is_top_basis_state(self):
        for two_s in (1, 2, 7):
            v = coherent_state(SpinQuantum(two_s), CoherentPoint(0.0, 0.3))
            expect = np.zeros(two_s + 1)
            expect[0] = 1.0
            assert np.allclose(v, expect)

    def test_equator_half_spin(self):
        v = coherent_state(SpinQuantum(1), CoherentPoint(math.pi / 2, 0.0))
        assert np.allclose(v, [1 / math.sqrt(2), 1 / math.sqrt(2)])

    @pytest.mark.parametrize("two_s,theta,phi", [(2, 0.7, 1.3), (5, 2.2, 4.0), (9, 1.1, 0.2)])
    def test_unnormalized_norm_identity(self, two_s, theta, phi):
        point = CoherentPoint(theta, phi)
        v = coherent_state(SpinQuantum(two_s), point, normalized=False)
        expect = (1.0 + abs(point.xi) ** 2) ** two_s
        assert np.vdot(v, v).real == pytest.approx(expect, rel=1e-12)

    def test_south_pole_limit(self):
        v = coherent_state(SpinQuantum(4), CoherentPoint(math.pi, 0.9))
        assert abs(v[-1] - np.exp(1j * 4 * 0.9)) < 1e-12
        assert np.linalg.norm(v[:-1]) < 1e-12

    @pytest.mark.parametrize("two_s", [1, 2, 4])
    def test_minimal_uncertainty_along_own_axis(self, two_s):
        # <n.S> = S and <(n.S)^2> = S^2 exactly in |n>
        s = SpinQuantum(two_s)
        ops = build_spin_operators(s)
        point = CoherentPoint(1.234, 0.777)
        n_dot_s = sum(c * op for c, op in zip(point.n, ops.vector))
        assert covariant_symbol(n_dot_s, point).real == pytest.approx(s.s_value, abs=1e-12)
        assert covariant_symbol(n_dot_s @ n_dot_s, point).real == pytest.approx(s.s_value**2, abs=1e-12)


class TestEigensystem:
    def test_diagonal_sorted(self):
        es = hermitian_eigensystem(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.allclose(es.eigenvalues, [1.0, 2.0, 3.0])

    def test_pauli_spectrum(self):
        sx = build_spin_operators(SpinQuantum(1)).sx
        assert np.allclose(hermitian_eigensystem(sx).eigenvalues, [-0.5, 0.5])

    @pytest.mark.parametrize("dim", [8, 33, 64])
    def test_random_reconstruction(self, dim):
        rng = np.random.default_rng(dim)
        a = random_hermitian(dim, rng)
        es = hermitian_eigensystem(a)
        v, w = es.eigenvectors, es.eigenvalues
        assert np.all(np.diff(w) >= -1e-13)
        norm = np.linalg.norm(a)
        assert np.linalg.norm(a @ v - v * w) <= 1e-10 * norm
        assert np.linalg.norm(v.conj().T @ v - np.eye(dim)) <= 1e-10
        assert np.linalg.norm(a - (v * w) @ v.conj().T) <= 1e-9 * norm

    def test_rejects_non_hermitian(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(NonHermitianInput):
            hermitian_eigensystem(a)


class TestEvolve:
    def test_time_zero_identity(self):
        rng = np.random.default_rng(0)
        h = random_hermitian(5, rng)
        v = rng.normal(size=5) + 1j * rng.normal(size=5)
        assert np.allclose(evolve(h, 0.0, v), v)

    def test_stationary_state_phase(self):
        h = np.diag([1.0, 2.0, -0.5]).astype(complex)
        v = np.array([0.0, 1.0, 0.0], dtype=complex)
        out = evolve(h, 0.8, v)
        assert np.allclose(out, np.exp(-1j * 2.0 * 0.8) * v)

    def test_unitarity(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            h = random_hermitian(7, rng)
            v = rng.normal(size=7) + 1j * rng.normal(size=7)
            t = rng.uniform(-3.0, 3.0)
            assert np.linalg.norm(evolve(h, t, v)) == pytest.approx(np.linalg.norm(v), abs=1e-10)


class TestCovariantSymbol:
    @pytest.mark.parametrize("two_s", [1, 2, 4])
    def test_sz_classical_form(self, two_s):
        s = SpinQuantum(two_s)
        sz = build_spin_operators(s).sz
        for theta in (0.4, 1.0, 2.5):
            point = CoherentPoint(theta, 0.9)
            assert covariant_symbol(sz, point).real == pytest.approx(
                s.s_value * math.cos(theta), abs=1e-12
            )

    def test_identity_normalisation(self):
        assert covariant_symbol(np.eye(4), CoherentPoint(1.2, 0.1)) == pytest.approx(1.0, abs=1e-13)

    def test_sz_squared_equator_spin_one(self):
        sz = build_spin_operators(SpinQuantum(2)).sz
        val = covariant_symbol(sz @ sz, CoherentPoint(math.pi / 2, 0.0))
        assert val.real == pytest.approx(0.5, abs=1e-12)


class TestPolynomialSymbol:
    def test_identity_gives_binomials(self):
        s = SpinQuantum(4)
        poly = polynomial_symbol(np.eye(s.dim))
        assert np.allclose(np.diag(poly.coeffs), s.binomial_weights())
        assert np.allclose(poly.coeffs - np.diag(np.diag(poly.coeffs)), 0.0)

    def test_sz_half_spin_coefficients(self):
        sz = build_spin_operators(SpinQuantum(1)).sz
        poly = polynomial_symbol(sz)
        assert poly.coeffs[0, 0] == pytest.approx(0.5)
        assert poly.coeffs[1, 1] == pytest.approx(-0.5)

    def test_hermitian_coefficient_symmetry(self):
        rng = np.random.default_rng(3)
        for two_s in (1, 3, 6):
            a = random_hermitian(two_s + 1, rng)
            c = polynomial_symbol(a).coeffs
            assert np.allclose(c, c.conj().T)

    @pytest.mark.parametrize("two_s", [1, 2, 5])
    def test_evaluation_matches_covariant_symbol(self, two_s):
        rng = np.random.default_rng(two_s)
        a = random_hermitian(two_s + 1, rng)
        poly = polynomial_symbol(a)
        for theta, phi in ((0.7, 0.2), (1.9, 3.3)):
            point = CoherentPoint(theta, phi)
            xi = point.xi
            expect = covariant_symbol(a, point) * (1.0 + abs(xi) ** 2) ** two_s
            assert poly.evaluate(xi) == pytest.approx(expect, rel=1e-10)


class TestXiRepresentation:
    def test_sz_on_identity_symbol(self):
        # L_z applied to symbol(1) must equal the symbol of S_z
        for two_s in (1, 2, 5):
            s = SpinQuantum(two_s)
            sz = build_spin_operators(s).sz
            got = apply_xi_representation("z", polynomial_symbol(np.eye(s.dim)))
            assert np.allclose(got.coeffs, polynomial_symbol(sz).coeffs, atol=1e-12)

    def test_raising_on_identity_half_spin(self):
        got = apply_xi_representation("+", polynomial_symbol(np.eye(2)))
        expect = np.zeros((2, 2), dtype=complex)
        expect[0, 1] = 1.0
        assert np.allclose(got.coeffs, expect)

    @pytest.mark.parametrize("two_s", [1, 2, 4, 10])
    def test_exactness_against_matrix_oracle(self, two_s):
        # <xi|S_i A|xi> as polynomial calculus vs explicit matrix product
        rng = np.random.default_rng(100 + two_s)
        s = SpinQuantum(two_s)
        ops = build_spin_operators(s)
        mats = {"x": ops.sx, "y": ops.sy, "z": ops.sz, "+": ops.splus, "-": ops.sminus}
        for _ in range(20):
            a = rng.normal(size=(s.dim, s.dim)) + 1j * rng.normal(size=(s.dim, s.dim))
            poly = polynomial_symbol(a)
            for axis, mat in mats.items():
                got = apply_xi_representation(axis, poly)
                expect = polynomial_symbol(mat @ a)
                assert np.max(np.abs(got.coeffs - expect.coeffs)) < 1e-10

    def test_ladder_commutator_carried(self):
        rng = np.random.default_rng(11)
        for two_s in (1, 3, 6):
            a = random_hermitian(two_s + 1, rng)
            poly = polynomial_symbol(a)
            pm = apply_xi_representation("+", apply_xi_representation("-", poly))
            mp = apply_xi_representation("-", apply_xi_representation("+", poly))
            zz = apply_xi_representation("z", poly)
            assert np.allclose(pm.coeffs - mp.coeffs, 2.0 * zz.coeffs, atol=1e-12)


class TestSphereRepresentation:
    def test_constant_function_gives_classical_part(self):
        s = SpinQuantum(3)
        point = CoherentPoint(1.1, 0.4)
        got = apply_sphere_representation("z", lambda p: 1.0 + 0.0j, point, 1e-3, s)
        assert got.real == pytest.approx(s.s_value * math.cos(1.1), abs=1e-9)
        assert abs(got.imag) < 1e-9

    @pytest.mark.parametrize("two_s", [1, 2])
    def test_sz_squared_symbol(self, two_s):
        s = SpinQuantum(two_s)
        ops = build_spin_operators(s)
        point = CoherentPoint(1.3, 2.1)
        sampler = lambda p: covariant_symbol(ops.sz, p)
        got = apply_sphere_representation("z", sampler, point, 1e-4, s)
        sv, th = s.s_value, point.theta
        expect = sv**2 * math.cos(th) ** 2 + 0.5 * sv * math.sin(th) ** 2
        assert got.real == pytest.approx(expect, abs=1e-7)
        assert abs(got.imag) < 1e-7

    def test_identity_h_squared_convergence(self):
        rng = np.random.default_rng(5)
        s = SpinQuantum(4)
        ops = build_spin_operators(s)
        a = random_hermitian(s.dim, rng)
        point = CoherentPoint(1.05, 0.6)
        for axis, mat in zip("xyz", ops.vector):
            exact = covariant_symbol(mat @ a, point)
            sampler = lambda p: covariant_symbol(a, p)
            err = [
                abs(apply_sphere_representation(axis, sampler, point, h, s) - exact)
                for h in (0.04, 0.02)
            ]
            assert 3.2 < err[0] / err[1] < 4.8

    def test_pole_rejection(self):
        s = SpinQuantum(2)
        with pytest.raises(PoleSingularity):
            apply_sphere_representation("z", lambda p: 1.0, CoherentPoint(0.005, 0.0), 0.01, s)

    def test_chart_rotation_helper(self):
        s = SpinQuantum(3)
        sz = build_spin_operators(s).sz
        angle = 0.7
        rotated = rotate_about_y(sz, angle)
        for theta in (0.3, 1.2):
            got = covariant_symbol(rotated, CoherentPoint(theta, 0.0))
            expect = covariant_symbol(sz, CoherentPoint(theta + angle, 0.0))
            assert got == pytest.approx(expect, abs=1e-11)


class TestValidation:
    def test_bad_spin(self):
        with pytest.raises(ValidationError):
            SpinQuantum(-1)
        with pytest.raises(ValidationError):
            SpinQuantum.from_s(0.3)

    def test_bad_theta(self):
        with pytest.raises(ValidationError):
            CoherentPoint(-0.1, 0.0)

    def test_phi_wrapped(self):
        p = CoherentPoint(1.0, 2.0 * math.pi + 0.5)
        assert p.phi == pytest.approx(0.5)
