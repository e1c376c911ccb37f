import numpy as np
import pytest

from chanpolar import matcore
from chanpolar.errors import NotContraction, NotHermitian

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def random_hermitian(d, rng, scale=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (g + g.conj().T) / 2.0


def random_contraction(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    u, s, vh = np.linalg.svd(g)
    return (u * np.minimum(s, 1.0)) @ vh


class TestHermitianEig:
    def test_diagonal_input_sorted(self):
        eig = matcore.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(eig.values, [3.0, 2.0, 1.0])
        # canonical basis vectors permuted accordingly
        expect = np.zeros((3, 3))
        expect[0, 0] = 1.0  # eigenvalue 3 -> e0
        expect[2, 1] = 1.0  # eigenvalue 2 -> e2
        expect[1, 2] = 1.0  # eigenvalue 1 -> e1
        assert np.allclose(eig.vectors, expect, atol=1e-12)

    def test_pauli_x(self):
        eig = matcore.hermitian_eig(X)
        assert np.allclose(eig.values, [1.0, -1.0], atol=1e-12)
        s = 1.0 / np.sqrt(2.0)
        assert np.allclose(eig.vectors[:, 0], [s, s], atol=1e-12)
        assert np.allclose(eig.vectors[:, 1], [s, -s], atol=1e-12)

    def test_random_reconstruction(self):
        rng = np.random.default_rng(7)
        m = random_hermitian(8, rng)
        eig = matcore.hermitian_eig(m)
        recon = (eig.vectors * eig.values) @ eig.vectors.conj().T
        assert np.linalg.norm(recon - m) <= 1e-9 * np.linalg.norm(m)
        gram = eig.vectors.conj().T @ eig.vectors
        assert np.max(np.abs(gram - np.eye(8))) < 1e-10

    def test_not_hermitian_raises(self):
        with pytest.raises(NotHermitian):
            matcore.hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_degenerate_flag_and_determinism(self):
        rng = np.random.default_rng(3)
        u = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
        m = u @ np.diag([2.0, 1.0, 1.0]) @ u.conj().T
        e1 = matcore.hermitian_eig(m)
        e2 = matcore.hermitian_eig(m.copy())
        assert e1.degenerate
        assert e1.vectors.tobytes() == e2.vectors.tobytes()

    def test_trace_identity_and_conjugation_invariance(self):
        rng = np.random.default_rng(11)
        for d in (2, 3, 5):
            m = random_hermitian(d, rng)
            eig = matcore.hermitian_eig(m)
            tr = float(np.trace(m).real)
            assert abs(eig.values.sum() - tr) <= 1e-9 * abs(tr) + 1e-12
            u = np.linalg.qr(
                rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            )[0]
            eig2 = matcore.hermitian_eig(u @ m @ u.conj().T)
            assert np.allclose(np.sort(eig.values), np.sort(eig2.values), atol=1e-9)


class TestPolarDecompose:
    def test_identity(self):
        pol = matcore.polar_decompose(np.eye(3))
        assert np.allclose(pol.unitary, np.eye(3), atol=1e-12)
        assert np.allclose(pol.psd, np.eye(3), atol=1e-12)
        assert pol.phase_fixed

    def test_spiral_leading_kraus(self):
        # diag(cos a, cos(a/2) e^{i a^3/2}, cos(a/2) e^{-i a^3/2}), a = 0.3
        a = 0.3
        ph = np.exp(1j * a**3 / 2.0)
        m = np.diag([np.cos(a), np.cos(a / 2) * ph, np.cos(a / 2) * np.conj(ph)])
        pol = matcore.polar_decompose(m)
        assert np.allclose(np.diag(pol.unitary), [1.0, ph, np.conj(ph)], atol=1e-12)
        assert np.allclose(
            np.diag(pol.psd), [np.cos(a), np.cos(a / 2), np.cos(a / 2)], atol=1e-12
        )

    def test_rank_deficient_closest_to_identity(self):
        pol = matcore.polar_decompose(np.diag([0.0, 1.0]))
        assert np.allclose(pol.unitary, np.eye(2), atol=1e-12)
        assert np.allclose(pol.psd, np.diag([0.0, 1.0]), atol=1e-12)
        # oracle: enumerate the diagonal-unitary completions diag(e^{i phi}, 1)
        best = min(
            np.linalg.norm(np.diag([np.exp(1j * phi), 1.0]) - np.eye(2))
            for phi in np.linspace(-np.pi, np.pi, 721)
        )
        assert np.linalg.norm(pol.unitary - np.eye(2)) <= best + 1e-12

    def test_reconstruction_and_singular_values(self):
        rng = np.random.default_rng(5)
        for d in (2, 3, 5):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            pol = matcore.polar_decompose(a)
            assert (
                np.linalg.norm(pol.phase * pol.unitary @ pol.psd - a)
                <= 1e-9 * np.linalg.norm(a)
            )
            assert np.allclose(
                np.sort(np.linalg.eigvalsh(pol.psd)),
                np.sort(pol.singular_values),
                atol=1e-9,
            )
            vvd = pol.unitary @ pol.unitary.conj().T
            assert np.max(np.abs(vvd - np.eye(d))) < 1e-10

    def test_bit_identical_runs(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        p1 = matcore.polar_decompose(a)
        p2 = matcore.polar_decompose(a.copy())
        assert p1.unitary.tobytes() == p2.unitary.tobytes()
        assert p1.psd.tobytes() == p2.psd.tobytes()


class TestTraceInequality:
    def test_pauli_z_pair(self):
        chk = matcore.check_trace_inequality(Z, Z)
        assert chk.lhs == pytest.approx(1.0)
        assert chk.rhs == pytest.approx(-1.0)
        assert chk.holds

    def test_identity_saturation(self):
        chk = matcore.check_trace_inequality(np.eye(2), np.eye(2))
        assert chk.lhs == pytest.approx(1.0)
        assert chk.rhs == pytest.approx(1.0)
        assert chk.holds

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            matcore.check_trace_inequality(np.array([[0, 1], [0, 0]]), Z)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_random_sweep(self, d):
        rng = np.random.default_rng(100 + d)
        for _ in range(200):
            chk = matcore.check_trace_inequality(
                random_hermitian(d, rng), random_hermitian(d, rng)
            )
            assert chk.holds


class TestVnInequality:
    def test_identity_equality(self):
        chk = matcore.check_vn_inequality(np.eye(2), np.eye(2))
        assert chk.lhs == pytest.approx(1.0)
        assert chk.rhs == pytest.approx(1.0)
        assert chk.holds

    def test_orthogonal_paulis(self):
        chk = matcore.check_vn_inequality(X, Z)
        assert chk.lhs == pytest.approx(0.0, abs=1e-12)
        assert chk.rhs == pytest.approx(1.0)
        assert chk.holds

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_random_sweep(self, d):
        rng = np.random.default_rng(200 + d)
        for _ in range(200):
            chk = matcore.check_vn_inequality(
                random_contraction(d, rng), random_contraction(d, rng)
            )
            assert chk.holds


class TestNormInequality:
    def test_identity(self):
        chk = matcore.check_norm_inequality(np.eye(2), np.eye(2))
        assert (chk.lower, chk.product, chk.upper) == pytest.approx((1.0, 1.0, 1.0))
        assert chk.holds

    def test_disjoint_projectors(self):
        chk = matcore.check_norm_inequality(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert chk.lower == pytest.approx(0.0)
        assert chk.product == pytest.approx(0.0, abs=1e-15)
        assert chk.upper == pytest.approx(0.5)
        assert chk.holds

    def test_not_contraction(self):
        with pytest.raises(NotContraction):
            matcore.check_norm_inequality(2.0 * np.eye(2), np.eye(2))

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_random_sweep(self, d):
        rng = np.random.default_rng(300 + d)
        for _ in range(200):
            chk = matcore.check_norm_inequality(
                random_contraction(d, rng), random_contraction(d, rng)
            )
            assert chk.holds
