"""Two-atom decoherence-free encoding and logical-level operations.

One logical qubit lives on an ordered pair of atoms ``(atom_a, atom_b)``:

    |0_L> = |01>   (atom_a in 0, atom_b in 1)
    |1_L> = |10>

The orthogonal complement span{|00>, |11>} is the leakage space, labeled
|2_L> = |00> and |3_L> = |11>.  Collective phases (the same z phase on both
atoms) act trivially on the logical span, which is the whole point of the
encoding.

Pair operators below are 4x4 matrices indexed with atom_a as the least
significant bit (apply with ``targets=[atom_a, atom_b]``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .register import (
    SX,
    SZ,
    ProjectorSet,
    QuantumRegister,
    RegisterError,
    _apply_matrix,
    apply_unitary,
    kron_all,
    measure,
    rz,
)


class LeakageError(RuntimeError):
    """Population found outside the logical subspace where none is allowed."""


@dataclass(frozen=True)
class LogicalQubit:
    """Ordered pair of physical atom indices hosting one logical qubit."""

    atom_a: int
    atom_b: int

    def __post_init__(self):
        if self.atom_a == self.atom_b:
            raise ValueError("logical qubit needs two distinct atoms")

    @property
    def atoms(self):
        return (self.atom_a, self.atom_b)


def standard_layout(n_pairs: int):
    """Consecutive pairing: logical qubit i on atoms (2i, 2i+1)."""
    return [LogicalQubit(2 * i, 2 * i + 1) for i in range(n_pairs)]


# ---------------------------------------------------------------------------
# pair-basis kets and operators (index = bit_a + 2*bit_b)
# ---------------------------------------------------------------------------

def _pair_index(bit_a: int, bit_b: int) -> int:
    return bit_a + 2 * bit_b


IDX_00 = _pair_index(0, 0)  # |2_L>
IDX_1L = _pair_index(1, 0)  # |1_L>
IDX_0L = _pair_index(0, 1)  # |0_L>
IDX_11 = _pair_index(1, 1)  # |3_L>

_SQ2 = 1.0 / math.sqrt(2.0)


def pair_ket(name) -> np.ndarray:
    """4-dim ket on one atom pair.

    Accepts "0L", "1L", "+L", "-L", the leakage labels "2L"/"3L", or a pair
    of logical amplitudes (c0, c1).
    """
    vec = np.zeros(4, dtype=complex)
    if isinstance(name, str):
        key = name.upper()
        if key == "0L":
            vec[IDX_0L] = 1.0
        elif key == "1L":
            vec[IDX_1L] = 1.0
        elif key == "+L":
            vec[IDX_0L] = vec[IDX_1L] = _SQ2
        elif key == "-L":
            vec[IDX_0L], vec[IDX_1L] = _SQ2, -_SQ2
        elif key == "2L":
            vec[IDX_00] = 1.0
        elif key == "3L":
            vec[IDX_11] = 1.0
        else:
            raise ValueError(f"unknown pair state {name!r}")
        return vec
    c0, c1 = name
    vec[IDX_0L], vec[IDX_1L] = c0, c1
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("zero logical amplitudes")
    return vec / norm


def encode_logical(c0, c1) -> np.ndarray:
    return pair_ket((c0, c1))


def logical_components(pair_vec: np.ndarray):
    """(c0, c1, leak_00, leak_11) amplitudes of a 4-dim pair ket."""
    v = np.asarray(pair_vec)
    return v[IDX_0L], v[IDX_1L], v[IDX_00], v[IDX_11]


def bell_ket(name: str) -> np.ndarray:
    """16-dim logical Bell ket on two consecutive pairs (atoms 0..3).

    phi+/- = (|0L 0L> +/- |1L 1L>)/sqrt2, psi+/- = (|0L 1L> +/- |1L 0L>)/sqrt2.
    """
    key = name.lower().replace("_", "")
    signs = {"phi+": 1, "phi-": -1, "psi+": 1, "psi-": -1}
    if key not in signs:
        raise ValueError(f"unknown Bell label {name!r}")
    if key.startswith("phi"):
        a = kron_all([pair_ket("0L"), pair_ket("0L")])
        b = kron_all([pair_ket("1L"), pair_ket("1L")])
    else:
        a = kron_all([pair_ket("0L"), pair_ket("1L")])
        b = kron_all([pair_ket("1L"), pair_ket("0L")])
    return (a + signs[key] * b) * _SQ2


BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def _pair_op(entries) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    for (r, c), val in entries.items():
        m[r, c] = val
    return m


# X_L: swap the two atoms (leakage states are fixed points)
X_L = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# Z_L realized as U_z(pi/2) times a global phase i, which is sigma_z on atom_a
Z_L = np.kron(np.eye(2), SZ)  # diag over (bit_b, bit_a): [1,-1,1,-1]
Y_L = 1j * X_L @ Z_L
# S_L = diag(1, i) on the logical span: U_z(pi/4) times global phase e^{i pi/4}
S_L = np.exp(1j * math.pi / 4) * np.kron(np.eye(2), rz(math.pi / 4))
# Hadamard on the logical span, identity on the leakage span
H_L = _pair_op(
    {
        (IDX_00, IDX_00): 1,
        (IDX_11, IDX_11): 1,
        (IDX_0L, IDX_0L): _SQ2,
        (IDX_0L, IDX_1L): _SQ2,
        (IDX_1L, IDX_0L): _SQ2,
        (IDX_1L, IDX_1L): -_SQ2,
    }
)

PAULI_L = {"I": np.eye(4, dtype=complex), "X": X_L, "Y": Y_L, "Z": Z_L}

# 2x2 logical-basis matrices for oracle comparisons
H2 = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2


def uz2(alpha: float) -> np.ndarray:
    """Logical z rotation in the 2-dim logical basis (|0_L>, |1_L>)."""
    return np.diag([np.exp(-1j * alpha), np.exp(1j * alpha)])


def logical_block(op4: np.ndarray) -> np.ndarray:
    """Restrict a pair operator to the (|0_L>, |1_L>) block."""
    idx = [IDX_0L, IDX_1L]
    return op4[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# operations on registers
# ---------------------------------------------------------------------------

def logical_z_rotation(reg: QuantumRegister, q: LogicalQubit, alpha: float):
    """U_z(alpha): exp(-i alpha sigma_z) on atom_a only.

    Acts as |0_L> -> e^{-i alpha}|0_L>, |1_L> -> e^{+i alpha}|1_L>.
    """
    return apply_unitary(reg, rz(alpha), [q.atom_a])


def logical_pauli(reg: QuantumRegister, q: LogicalQubit, which: str):
    try:
        op = PAULI_L[which.upper()]
    except KeyError:
        raise ValueError(f"which must be X, Y or Z, got {which!r}") from None
    return apply_unitary(reg, op, [q.atom_a, q.atom_b])


def apply_pair_unitary(reg: QuantumRegister, q: LogicalQubit, op4: np.ndarray):
    return apply_unitary(reg, op4, [q.atom_a, q.atom_b])


def joint_ones_projectors(q_or_atoms) -> ProjectorSet:
    """{P1, P2} with P1 = |11><11| on the two atoms, labels pi1/pi2."""
    atoms = q_or_atoms.atoms if isinstance(q_or_atoms, LogicalQubit) else tuple(q_or_atoms)
    p1 = np.zeros((4, 4), dtype=complex)
    p1[IDX_11, IDX_11] = 1.0
    return ProjectorSet([p1, np.eye(4) - p1], ["pi1", "pi2"], list(atoms))


def parity_projectors(q_or_atoms) -> ProjectorSet:
    """{P3, P4} with P3 = |00><00| + |11><11| on the two atoms, labels pi3/pi4."""
    atoms = q_or_atoms.atoms if isinstance(q_or_atoms, LogicalQubit) else tuple(q_or_atoms)
    p3 = np.zeros((4, 4), dtype=complex)
    p3[IDX_00, IDX_00] = 1.0
    p3[IDX_11, IDX_11] = 1.0
    return ProjectorSet([p3, np.eye(4) - p3], ["pi3", "pi4"], list(atoms))


class LogicalMeasurement(NamedTuple):
    label: str
    register: QuantumRegister
    outcomes: tuple
    probability: float


def logical_z_measurement(reg: QuantumRegister, q: LogicalQubit, rng, force=None):
    """Non-destructive logical Z measurement.

    Sequence: sigma_x on atom_a; {P1,P2}; sigma_x on both; {P1,P2};
    sigma_x on atom_b.  Outcome pair (pi1,pi2) -> z+, (pi2,pi1) -> z-,
    (pi2,pi2) -> leak; (pi1,pi1) cannot occur on a valid state.

    ``force`` may be "z+", "z-" or "leak" to post-select the branch.
    """
    forced = {None: (None, None), "z+": ("pi1", "pi2"), "z-": ("pi2", "pi1"),
              "leak": ("pi2", "pi2")}[force]
    ps = joint_ones_projectors(q)
    apply_unitary(reg, SX, [q.atom_a])
    first, p1, reg = measure(reg, ps, rng, force=forced[0])
    apply_unitary(reg, SX, [q.atom_a])
    apply_unitary(reg, SX, [q.atom_b])
    second, p2, reg = measure(reg, ps, rng, force=forced[1])
    apply_unitary(reg, SX, [q.atom_b])

    pair = (first, second)
    if pair == ("pi1", "pi2"):
        label = "z+"
    elif pair == ("pi2", "pi1"):
        label = "z-"
    elif pair == ("pi2", "pi2"):
        label = "leak"
    else:
        raise RegisterError("outcome pair (pi1, pi1) observed: inconsistent state")
    return LogicalMeasurement(label, reg, pair, p1 * p2)


_BASIS_CHANGE = {
    "Z": np.eye(4, dtype=complex),
    "X": H_L,
    "Y": H_L @ S_L.conj().T,
}
_BASIS_LABELS = {
    "Z": {"z+": "z+", "z-": "z-"},
    "X": {"z+": "x+", "z-": "x-"},
    "Y": {"z+": "y+", "z-": "y-"},
}


def logical_basis_measurement(reg: QuantumRegister, q: LogicalQubit, basis: str,
                              rng, force=None):
    """Measure a logical Pauli observable via basis change + Z sequence.

    X uses H_L, Y uses H_L S_L^dag; the inverse change restores the
    post-measurement eigenstate.  Leak outcomes propagate unchanged.
    """
    key = basis.upper()
    if key not in _BASIS_CHANGE:
        raise ValueError(f"basis must be X, Y or Z, got {basis!r}")
    v = _BASIS_CHANGE[key]
    labels = _BASIS_LABELS[key]
    inv_force = {v: k for k, v in labels.items()}
    z_force = None if force is None else ("leak" if force == "leak" else inv_force[force])

    apply_pair_unitary(reg, q, v)
    res = logical_z_measurement(reg, q, rng, force=z_force)
    apply_pair_unitary(reg, q, v.conj().T)
    label = "leak" if res.label == "leak" else labels[res.label]
    return LogicalMeasurement(label, reg, res.outcomes, res.probability)


def logical_support(reg: QuantumRegister, qubits) -> float:
    """Probability weight of the state inside the logical span of every pair."""
    work = reg.copy()
    proj = np.zeros((4, 4), dtype=complex)
    proj[IDX_0L, IDX_0L] = 1.0
    proj[IDX_1L, IDX_1L] = 1.0
    for q in qubits:
        _apply_matrix(work, proj, list(q.atoms))
    if work.is_pure:
        return float(np.sum(np.abs(work.amplitudes) ** 2))
    return float(np.real(np.trace(work.amplitudes)))
