import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quatcomp import (
    QMatrix,
    Quaternion,
    conj_transpose,
    from_equivalent_complex,
    frobenius_norm,
    l1_norm,
    l21_norm,
    left_scalar_mul,
    load_qmat,
    matmul,
    modulus,
    qmul,
    right_scalar_mul,
    to_equivalent_complex,
)
from conftest import rand_qm, qm_close

ONE = Quaternion(1)
I = Quaternion(0, 1, 0, 0)
J = Quaternion(0, 0, 1, 0)
K = Quaternion(0, 0, 0, 1)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)


class TestQuaternionScalar:
    def test_hamilton_table_exact(self):
        units = {"1": ONE, "i": I, "j": J, "k": K}
        expected = {
            ("i", "i"): -ONE, ("j", "j"): -ONE, ("k", "k"): -ONE,
            ("i", "j"): K, ("j", "i"): -K,
            ("j", "k"): I, ("k", "j"): -I,
            ("k", "i"): J, ("i", "k"): -J,
        }
        for (la, lb), want in expected.items():
            assert qmul(units[la], units[lb]) == want
        for name, u in units.items():
            assert qmul(ONE, u) == u
            assert qmul(u, ONE) == u

    def test_ijk_minus_one(self):
        assert qmul(qmul(I, J), K) == -ONE

    def test_sixteen_term_expansion_oracle(self):
        # independent component formula for (1+i)(1+j)
        a = Quaternion(1, 1, 0, 0)
        b = Quaternion(1, 0, 1, 0)
        w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
        x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
        y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
        z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
        assert (w, x, y, z) == (1, 1, 1, 1)
        assert qmul(a, b) == Quaternion(1, 1, 1, 1)

    def test_identity_element_random(self, rng):
        for _ in range(20):
            q = Quaternion(*rng.standard_normal(4))
            assert qmul(q, ONE) == q
            assert qmul(ONE, q) == q

    def test_modulus_examples(self):
        assert modulus(Quaternion(1, 1, 1, 1)) == 2.0
        assert modulus(Quaternion()) == 0.0
        assert modulus(Quaternion(3, 4, 0, 0)) == 5.0

    @given(quats)
    def test_conj_involution_and_modulus(self, q):
        assert q.conj().conj() == q
        assert math.isclose(q.conj().modulus(), q.modulus(), rel_tol=0,
                            abs_tol=1e-9 * (1 + q.modulus()))

    @given(quats)
    def test_q_times_conj_is_modulus_squared(self, q):
        p = qmul(q, q.conj())
        p2 = qmul(q.conj(), q)
        m2 = q.modulus() ** 2
        for prod in (p, p2):
            assert abs(prod.w - m2) <= 1e-9 * (1 + m2)
            assert abs(prod.x) <= 1e-9 * (1 + m2)
            assert abs(prod.y) <= 1e-9 * (1 + m2)
            assert abs(prod.z) <= 1e-9 * (1 + m2)

    def test_cayley_dickson_pair_roundtrip(self, rng):
        q = Quaternion(*rng.standard_normal(4))
        assert Quaternion.from_pair(*q.to_pair()) == q


class TestMatrixBasics:
    def test_matmul_identity(self, rng):
        A = rand_qm(4, 4, rng)
        assert qm_close(A @ QMatrix.eye(4, 4), A)
        assert qm_close(QMatrix.eye(4, 4) @ A, A)

    def test_matmul_scalar_case(self):
        A = QMatrix.from_entries([[I]])
        B = QMatrix.from_entries([[J]])
        assert (A @ B).entry(0, 0) == K

    def test_matmul_chi_homomorphism(self, rng):
        A = rand_qm(3, 2, rng)
        B = rand_qm(2, 4, rng)
        lhs = to_equivalent_complex(matmul(A, B))
        rhs = to_equivalent_complex(A) @ to_equivalent_complex(B)
        scale = np.linalg.norm(to_equivalent_complex(A)) * \
            np.linalg.norm(to_equivalent_complex(B))
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * scale

    def test_matmul_dim_mismatch(self, rng):
        with pytest.raises(ValueError):
            matmul(rand_qm(3, 2, rng), rand_qm(3, 2, rng))

    def test_conj_transpose(self, rng):
        D = QMatrix.from_entries([[2.0, 0], [0, 3.0]])
        assert qm_close(D.H, D)
        assert conj_transpose(QMatrix.from_entries([[I]])).entry(0, 0) == -I
        A = rand_qm(2, 3, rng)
        assert qm_close(A.H.H, A)

    def test_product_conj_transpose_reversal(self, rng):
        A = rand_qm(2, 3, rng)
        B = rand_qm(3, 2, rng)
        assert qm_close((A @ B).H, B.H @ A.H, tol=1e-12)

    def test_left_right_scalar_mul(self, rng):
        A = rand_qm(3, 2, rng)
        q = Quaternion(*rng.standard_normal(4))
        left = left_scalar_mul(q, A)
        right = right_scalar_mul(A, q)
        for m in range(3):
            for n in range(2):
                lw = qmul(q, A.entry(m, n))
                assert (lw - left.entry(m, n)).modulus() \
                    <= 1e-12 * (1 + lw.modulus())
                want = qmul(A.entry(m, n), q)
                assert (want - right.entry(m, n)).modulus() \
                    <= 1e-12 * (1 + want.modulus())

    def test_plane_views_and_purity(self, rng):
        A = rand_qm(3, 3, rng)
        planes = A.to_planes()
        assert planes.shape == (3, 3, 4)
        assert not A.is_pure
        P = QMatrix.from_planes(np.concatenate(
            [np.zeros((3, 3, 1)), planes[:, :, 1:]], axis=2))
        assert P.is_pure


class TestNorms:
    def test_l21_examples(self):
        assert l21_norm(QMatrix.zeros(3, 3)) == 0.0
        assert l21_norm(QMatrix.eye(2, 2)) == 2.0
        X = QMatrix.from_entries([
            [Quaternion(0, 3, 0, 0), 0],
            [Quaternion(0, 0, 0, 4), 0],
        ])
        assert l21_norm(X) == 5.0

    def test_l1_examples(self):
        assert l1_norm(QMatrix.zeros(2, 2)) == 0.0
        X = QMatrix.from_entries([
            [Quaternion(1, math.sqrt(3), 0, 0), 0],
            [0, 2.0],
        ])
        assert abs(l1_norm(X) - 4.0) < 1e-12

    def test_l1_dominates_frobenius(self, rng):
        for _ in range(10):
            X = rand_qm(4, 5, rng)
            assert l1_norm(X) >= frobenius_norm(X)

    def test_frobenius_vs_chi(self, rng):
        X = rand_qm(5, 4, rng)
        ratio = frobenius_norm(X) * math.sqrt(2)
        assert abs(ratio - np.linalg.norm(to_equivalent_complex(X))) \
            <= 1e-12 * ratio

    def test_l21_triangle_inequality(self, rng):
        for _ in range(25):
            A = rand_qm(4, 3, rng)
            B = rand_qm(4, 3, rng)
            assert l21_norm(A + B) <= l21_norm(A) + l21_norm(B) + 1e-12


class TestEquivalentComplex:
    def test_unit_i(self):
        C = to_equivalent_complex(QMatrix.from_entries([[I]]))
        assert np.array_equal(C, np.array([[1j, 0], [0, -1j]]))

    def test_unit_j(self):
        C = to_equivalent_complex(QMatrix.from_entries([[J]]))
        assert np.array_equal(C, np.array([[0, 1], [-1, 0]], dtype=complex))

    def test_roundtrip_exact(self, rng):
        Q = rand_qm(4, 3, rng)
        R = from_equivalent_complex(to_equivalent_complex(Q))
        assert np.array_equal(R.a, Q.a) and np.array_equal(R.b, Q.b)

    def test_zero_matrix(self):
        Z = from_equivalent_complex(np.zeros((4, 6), dtype=complex))
        assert frobenius_norm(Z) == 0.0

    def test_symmetry_violation_rejected(self, rng):
        C = to_equivalent_complex(rand_qm(3, 3, rng))
        C[4, 1] += 0.1 * np.linalg.norm(C)
        with pytest.raises(ValueError):
            from_equivalent_complex(C)

    def test_odd_dims_rejected(self):
        with pytest.raises(ValueError):
            from_equivalent_complex(np.zeros((3, 4), dtype=complex))


class TestQmatFormat:
    def test_roundtrip(self, tmp_path, rng):
        from quatcomp import save_qmat
        Q = rand_qm(5, 3, rng)
        path = tmp_path / "m.qmat"
        save_qmat(path, Q)
        R = load_qmat(path)
        assert np.array_equal(R.a, Q.a) and np.array_equal(R.b, Q.b)

    def test_header_layout(self, tmp_path):
        from quatcomp import save_qmat
        path = tmp_path / "m.qmat"
        save_qmat(path, QMatrix.zeros(2, 3))
        raw = path.read_bytes()
        assert raw[:4] == b"QMAT"
        assert raw[4] == 1
        assert int.from_bytes(raw[5:9], "little") == 2
        assert int.from_bytes(raw[9:13], "little") == 3
        assert len(raw) == 13 + 2 * 3 * 4 * 8

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.qmat"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(ValueError):
            load_qmat(path)

    def test_bad_version_rejected(self, tmp_path, rng):
        from quatcomp import save_qmat
        path = tmp_path / "m.qmat"
        save_qmat(path, rand_qm(2, 2, rng))
        raw = bytearray(path.read_bytes())
        raw[4] = 9
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError):
            load_qmat(path)
