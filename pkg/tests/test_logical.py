"""DFS encoding, logical operators, logical measurements."""

import math

import numpy as np
import pytest

from dfsqc.register import (
    QuantumRegister,
    RegisterError,
    apply_unitary,
    fidelity,
    ket,
    random_state,
    rz,
)
from dfsqc.logical import (
    H_L,
    S_L,
    X_L,
    Y_L,
    Z_L,
    LogicalQubit,
    bell_ket,
    logical_basis_measurement,
    logical_block,
    logical_pauli,
    logical_support,
    logical_z_measurement,
    logical_z_rotation,
    pair_ket,
    uz2,
)

Q = LogicalQubit(0, 1)


def reg_of(vec) -> QuantumRegister:
    return QuantumRegister(2, np.array(vec, dtype=complex))


def random_logical(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return pair_ket((v[0], v[1])), v


class TestEncoding:
    def test_basis_kets(self):
        np.testing.assert_allclose(pair_ket("0L"), ket("01"), atol=1e-15)
        np.testing.assert_allclose(pair_ket("1L"), ket("10"), atol=1e-15)
        np.testing.assert_allclose(pair_ket("2L"), ket("00"), atol=1e-15)
        np.testing.assert_allclose(pair_ket("3L"), ket("11"), atol=1e-15)

    def test_bell_kets(self):
        # phi+ = (|0101> + |1010>)/sqrt2 in atom-string order
        expected = (ket("0101") + ket("1010")) / math.sqrt(2)
        np.testing.assert_allclose(bell_ket("phi+"), expected, atol=1e-15)
        expected = (ket("0110") - ket("1001")) / math.sqrt(2)
        np.testing.assert_allclose(bell_ket("psi-"), expected, atol=1e-15)
        for name in ("phi+", "phi-", "psi+", "psi-"):
            assert np.linalg.norm(bell_ket(name)) == pytest.approx(1.0)

    def test_distinct_atoms_required(self):
        with pytest.raises(ValueError):
            LogicalQubit(3, 3)


class TestZRotation:
    def test_phase_on_logical_states(self):
        alpha = 0.37
        reg = reg_of(pair_ket("0L"))
        logical_z_rotation(reg, Q, alpha)
        np.testing.assert_allclose(
            reg.amplitudes, np.exp(-1j * alpha) * pair_ket("0L"), atol=1e-14
        )
        reg = reg_of(pair_ket("1L"))
        logical_z_rotation(reg, Q, alpha)
        np.testing.assert_allclose(
            reg.amplitudes, np.exp(1j * alpha) * pair_ket("1L"), atol=1e-14
        )

    def test_zero_angle_is_identity(self):
        psi = random_state(2, 5)
        reg = reg_of(psi)
        logical_z_rotation(reg, Q, 0.0)
        np.testing.assert_allclose(reg.amplitudes, psi, atol=1e-15)

    def test_quarter_turn_on_plus(self):
        # oracle: 2x2 matrix diag(e^{-i pi/2}, e^{i pi/2}) on (1,1)/sqrt2
        expected2 = uz2(math.pi / 2) @ (np.array([1, 1]) / math.sqrt(2))
        reg = reg_of(pair_ket("+L"))
        logical_z_rotation(reg, Q, math.pi / 2)
        expected = pair_ket("0L") * expected2[0] + pair_ket("1L") * expected2[1]
        np.testing.assert_allclose(reg.amplitudes, expected, atol=1e-14)
        # equals -i (|0_L> - |1_L>)/sqrt2
        np.testing.assert_allclose(
            reg.amplitudes, -1j * pair_ket("-L"), atol=1e-14
        )

    def test_additivity(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            a, b = rng.uniform(-3, 3, 2)
            psi, _ = random_logical(rng)
            r1 = reg_of(psi)
            logical_z_rotation(r1, Q, a)
            logical_z_rotation(r1, Q, b)
            r2 = reg_of(psi)
            logical_z_rotation(r2, Q, a + b)
            np.testing.assert_allclose(r1.amplitudes, r2.amplitudes, atol=1e-12)


class TestPaulis:
    def test_x_swaps_logical_states(self):
        reg = reg_of(pair_ket("0L"))
        logical_pauli(reg, Q, "X")
        np.testing.assert_allclose(reg.amplitudes, pair_ket("1L"), atol=1e-14)

    def test_x_fixes_leakage(self):
        reg = reg_of(ket("00"))
        logical_pauli(reg, Q, "X")
        np.testing.assert_allclose(reg.amplitudes, ket("00"), atol=1e-14)

    def test_z_flips_plus(self):
        reg = reg_of(pair_ket("+L"))
        logical_pauli(reg, Q, "Z")
        np.testing.assert_allclose(reg.amplitudes, pair_ket("-L"), atol=1e-14)

    def test_pauli_algebra_on_logical_block(self):
        x, z = logical_block(X_L), logical_block(Z_L)
        np.testing.assert_allclose(x @ x, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(z @ z, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(x @ z, -(z @ x), atol=1e-14)
        y = logical_block(Y_L)
        np.testing.assert_allclose(y, 1j * x @ z, atol=1e-14)

    def test_s_gate_block(self):
        np.testing.assert_allclose(logical_block(S_L), np.diag([1, 1j]), atol=1e-14)

    def test_hadamard_block(self):
        h = logical_block(H_L)
        np.testing.assert_allclose(h, np.array([[1, 1], [1, -1]]) / math.sqrt(2),
                                   atol=1e-15)

    def test_z_is_uz_with_phase_fix(self):
        # Z_L = i * U_z(pi/2) as a physical two-atom operator
        uz = np.kron(np.eye(2), rz(math.pi / 2))
        np.testing.assert_allclose(Z_L, 1j * uz, atol=1e-14)


class TestDfsImmunity:
    def test_collective_phase_invariance(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            psi, _ = random_logical(rng)
            reg = reg_of(psi)
            phi = rng.uniform(-10, 10)
            apply_unitary(reg, rz(phi), [0])
            apply_unitary(reg, rz(phi), [1])
            assert fidelity(psi, reg.amplitudes) >= 1.0 - 1e-12


class TestZMeasurement:
    def test_logical_zero(self):
        res = logical_z_measurement(reg_of(pair_ket("0L")), Q, 1)
        assert res.label == "z+" and res.outcomes == ("pi1", "pi2")
        assert res.probability == pytest.approx(1.0)
        np.testing.assert_allclose(res.register.amplitudes, pair_ket("0L"),
                                   atol=1e-13)

    def test_logical_one(self):
        res = logical_z_measurement(reg_of(pair_ket("1L")), Q, 1)
        assert res.label == "z-" and res.outcomes == ("pi2", "pi1")
        np.testing.assert_allclose(res.register.amplitudes, pair_ket("1L"),
                                   atol=1e-13)

    def test_leakage_00(self):
        # brute-force expectation: |00> survives the 5-step sequence unchanged
        res = logical_z_measurement(reg_of(ket("00")), Q, 1)
        assert res.label == "leak" and res.outcomes == ("pi2", "pi2")
        np.testing.assert_allclose(res.register.amplitudes, ket("00"), atol=1e-13)

    def test_leakage_11(self):
        res = logical_z_measurement(reg_of(ket("11")), Q, 1)
        assert res.label == "leak"
        np.testing.assert_allclose(res.register.amplitudes, ket("11"), atol=1e-13)

    def test_projective_on_superpositions(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            psi, v = random_logical(rng)
            for force, target in (("z+", pair_ket("0L")), ("z-", pair_ket("1L"))):
                res = logical_z_measurement(reg_of(psi), Q, rng, force=force)
                idx = 0 if force == "z+" else 1
                assert res.probability == pytest.approx(abs(v[idx]) ** 2, abs=1e-12)
                assert fidelity(target, res.register.amplitudes) >= 1.0 - 1e-12

    def test_leak_branch_keeps_coherence(self):
        vec = (ket("00") + 1j * ket("11")) / math.sqrt(2)
        res = logical_z_measurement(reg_of(vec), Q, 1)
        assert res.label == "leak"
        assert fidelity(vec, res.register.amplitudes) >= 1.0 - 1e-12


class TestBasisMeasurement:
    def test_x_on_plus(self):
        res = logical_basis_measurement(reg_of(pair_ket("+L")), Q, "X", 1)
        assert res.label == "x+" and res.probability == pytest.approx(1.0)
        assert fidelity(pair_ket("+L"), res.register.amplitudes) >= 1.0 - 1e-12

    def test_x_on_zero_is_unbiased(self):
        for force in ("x+", "x-"):
            res = logical_basis_measurement(reg_of(pair_ket("0L")), Q, "X", 1,
                                            force=force)
            assert res.probability == pytest.approx(0.5, abs=1e-12)
            target = pair_ket("+L") if force == "x+" else pair_ket("-L")
            assert fidelity(target, res.register.amplitudes) >= 1.0 - 1e-12

    def test_y_eigenstate(self):
        psi = pair_ket((1.0, 1j))
        res = logical_basis_measurement(reg_of(psi), Q, "Y", 1)
        assert res.label == "y+" and res.probability == pytest.approx(1.0)
        assert fidelity(psi, res.register.amplitudes) >= 1.0 - 1e-12

    def test_z_on_logical_leak_superposition(self):
        # (|0_L> + |00>)/sqrt2: z+ and leak each with probability 1/2
        vec = (pair_ket("0L") + ket("00")) / math.sqrt(2)
        res = logical_basis_measurement(reg_of(vec), Q, "Z", 1, force="z+")
        assert res.probability == pytest.approx(0.5, abs=1e-12)
        assert fidelity(pair_ket("0L"), res.register.amplitudes) >= 1.0 - 1e-12
        res = logical_basis_measurement(reg_of(vec), Q, "Z", 1, force="leak")
        assert res.probability == pytest.approx(0.5, abs=1e-12)
        assert fidelity(ket("00"), res.register.amplitudes) >= 1.0 - 1e-12

    def test_born_statistics_on_plus_in_z(self):
        rng = np.random.default_rng(17)
        n, plus = 4000, pair_ket("+L")
        hits = sum(
            logical_z_measurement(reg_of(plus), Q, rng).label == "z+"
            for _ in range(n)
        )
        assert abs(hits / n - 0.5) < 5 * math.sqrt(0.25 / n)

    def test_invalid_basis(self):
        with pytest.raises(ValueError):
            logical_basis_measurement(reg_of(pair_ket("0L")), Q, "W", 1)


class TestLogicalSupport:
    def test_support_values(self):
        assert logical_support(reg_of(pair_ket("+L")), [Q]) == pytest.approx(1.0)
        assert logical_support(reg_of(ket("00")), [Q]) == pytest.approx(0.0)
        mixed = (pair_ket("0L") + ket("11")) / math.sqrt(2)
        assert logical_support(reg_of(mixed), [Q]) == pytest.approx(0.5)

    def test_pi1_pi1_is_impossible(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            psi = random_state(2, rng)
            res = logical_z_measurement(reg_of(psi), Q, rng)
            assert res.outcomes != ("pi1", "pi1")

    def test_forcing_impossible_pair_raises(self):
        with pytest.raises(RegisterError):
            logical_z_measurement(reg_of(pair_ket("0L")), Q, 1, force="leak")
