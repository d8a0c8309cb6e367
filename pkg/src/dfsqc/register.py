"""Dense quantum-state engine for small registers of two-level atoms.

Conventions (fixed once, inherited by every other module):

* Qubit ``k`` is stored in bit ``k`` of the basis index (little endian),
  i.e. basis state ``i`` assigns qubit ``k`` the value ``(i >> k) & 1``.
* ``ket("0101")`` reads the string left to right as qubit 0, 1, 2, ...
  so the leftmost character is the *lowest* qubit.  This matches the
  atom-numbering used throughout: atom 1 of a protocol diagram is qubit 0.
* A matrix applied to ``targets=[q0, q1, ...]`` is indexed with
  ``targets[0]`` as the least significant bit of its row/column index.
* Registers are value-like: operations mutate ``amplitudes`` in place and
  return the same object; use :meth:`QuantumRegister.copy` to branch.

Randomness: every sampled measurement consumes exactly one ``rng.random()``
draw (outcomes ordered as in the ProjectorSet), so a fixed seed and a fixed
call sequence replay identically.  Forced measurements consume no draw.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field

import numpy as np

ATOL_UNITARY = 1e-10
ATOL_PROJECTOR = 1e-10
ATOL_NORM = 1e-12
MIN_PROBABILITY = 1e-14
MAX_QUBITS = 16  # dense amplitudes only; protocols never need more than 12

# Single-qubit constants
ID2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

SWAP2 = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# exp(i*pi |11><11|) on two atoms
CZ2 = np.diag([1, 1, 1, -1]).astype(complex)


def rz(alpha: float) -> np.ndarray:
    """Physical z rotation exp(-i*alpha*sigma_z) (full angle convention)."""
    return np.diag([np.exp(-1j * alpha), np.exp(1j * alpha)])


class RegisterError(ValueError):
    """Raised for contract violations on register operations."""


@dataclass(frozen=True)
class RngSeed:
    """64-bit seed; identical seed + call sequence replays identically."""

    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngSeed, an int seed, or a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng))
    raise TypeError(f"cannot build rng stream from {type(rng).__name__}")


@dataclass
class QuantumRegister:
    """State of ``n_qubits`` two-level atoms, pure (vector) or mixed (matrix).

    ``labels`` carries the physical-atom identifiers in qubit order.
    """

    n_qubits: int
    amplitudes: np.ndarray
    labels: list = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > MAX_QUBITS:
            raise RegisterError(f"n_qubits must be in [1, {MAX_QUBITS}]")
        dim = 2**self.n_qubits
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape not in ((dim,), (dim, dim)):
            raise RegisterError(
                f"amplitudes shape {self.amplitudes.shape} does not match "
                f"{self.n_qubits} qubits"
            )
        if not self.labels:
            self.labels = list(range(self.n_qubits))
        if len(self.labels) != self.n_qubits:
            raise RegisterError("labels length must equal n_qubits")

    # -- mode helpers ----------------------------------------------------
    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def is_pure(self) -> bool:
        return self.amplitudes.ndim == 1

    def copy(self) -> "QuantumRegister":
        return QuantumRegister(self.n_qubits, self.amplitudes.copy(), list(self.labels))

    def to_mixed(self) -> "QuantumRegister":
        """Return a density-matrix copy (projector of a pure state)."""
        if self.is_pure:
            rho = np.outer(self.amplitudes, self.amplitudes.conj())
            return QuantumRegister(self.n_qubits, rho, list(self.labels))
        return self.copy()

    def validate(self):
        """Check the normalization / Hermiticity invariants."""
        if self.is_pure:
            norm = float(np.sum(np.abs(self.amplitudes) ** 2))
            if abs(norm - 1.0) > ATOL_NORM * 10:
                raise RegisterError(f"pure state norm {norm} drifted from 1")
        else:
            rho = self.amplitudes
            if np.max(np.abs(rho - rho.conj().T)) > 1e-12 * 10:
                raise RegisterError("density matrix is not Hermitian")
            tr = float(np.real(np.trace(rho)))
            if abs(tr - 1.0) > ATOL_NORM * 10:
                raise RegisterError(f"density matrix trace {tr} drifted from 1")
            eigs = np.linalg.eigvalsh(rho)
            if eigs.min() < -1e-10:
                raise RegisterError(f"density matrix has eigenvalue {eigs.min()}")
        return self


@dataclass
class ProjectorSet:
    """Complete set of orthogonal projectors with outcome labels.

    ``projectors`` act on the qubits listed in ``targets`` (matrices of
    dimension ``2**len(targets)``); they must be idempotent and sum to the
    identity.
    """

    projectors: list
    outcome_labels: list
    targets: list

    def __post_init__(self):
        if len(self.projectors) != len(self.outcome_labels):
            raise RegisterError("one label per projector required")
        k = len(self.targets)
        dim = 2**k
        total = np.zeros((dim, dim), dtype=complex)
        for p in self.projectors:
            p = np.asarray(p, dtype=complex)
            if p.shape != (dim, dim):
                raise RegisterError("projector dimension mismatch with targets")
            if np.max(np.abs(p @ p - p)) > ATOL_PROJECTOR:
                raise RegisterError("projector is not idempotent within 1e-10")
            if np.max(np.abs(p - p.conj().T)) > ATOL_PROJECTOR:
                raise RegisterError("projector is not Hermitian within 1e-10")
            total += p
        if np.max(np.abs(total - np.eye(dim))) > ATOL_PROJECTOR:
            raise RegisterError("projectors do not sum to identity within 1e-10")

    def index_of(self, label) -> int:
        return self.outcome_labels.index(label)


# ---------------------------------------------------------------------------
# basis construction helpers
# ---------------------------------------------------------------------------

def basis_index(bits) -> int:
    """Index of the basis state assigning ``bits[k]`` to qubit k."""
    return sum(int(b) << k for k, b in enumerate(bits))


def ket(bits: str) -> np.ndarray:
    """Basis ket from a bit string; leftmost character is qubit 0."""
    n = len(bits)
    vec = np.zeros(2**n, dtype=complex)
    vec[basis_index(bits)] = 1.0
    return vec


def kron_all(blocks) -> np.ndarray:
    """Product state over blocks listed in increasing-qubit order.

    ``blocks[0]`` occupies the lowest qubits, so the kron runs reversed.
    """
    out = np.asarray(blocks[0], dtype=complex)
    for b in blocks[1:]:
        out = np.kron(np.asarray(b, dtype=complex), out)
    return out


def tensor(a: QuantumRegister, b: QuantumRegister) -> QuantumRegister:
    """Combine registers; ``a`` keeps its qubit indices, ``b`` is shifted up."""
    if a.is_pure != b.is_pure:
        a, b = a.to_mixed(), b.to_mixed()
    amps = np.kron(b.amplitudes, a.amplitudes)
    return QuantumRegister(a.n_qubits + b.n_qubits, amps, list(a.labels) + list(b.labels))


def random_state(n_qubits: int, rng) -> np.ndarray:
    rng = as_generator(rng)
    vec = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return vec / np.linalg.norm(vec)


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR with phase fixing."""
    rng = as_generator(rng)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# targeted matrix application
# ---------------------------------------------------------------------------

def _axis_of(qubit: int, total_axes: int) -> int:
    # C-order reshape puts the highest qubit on axis 0
    return total_axes - 1 - qubit


def _apply_on_axes(flat: np.ndarray, mat: np.ndarray, axes, total_axes: int) -> np.ndarray:
    k = len(axes)
    t = flat.reshape([2] * total_axes)
    dest = list(range(k))[::-1]  # axes[0] becomes the fastest-varying bit
    t = np.moveaxis(t, axes, dest)
    rest = t.shape[k:]
    t = mat @ t.reshape(2**k, -1)
    t = np.moveaxis(t.reshape([2] * k + list(rest)), dest, axes)
    return t.reshape(flat.shape)


def _check_targets(reg: QuantumRegister, targets):
    targets = [int(q) for q in targets]
    if len(set(targets)) != len(targets):
        raise RegisterError(f"duplicate targets {targets}")
    for q in targets:
        if not 0 <= q < reg.n_qubits:
            raise RegisterError(f"target {q} out of range for {reg.n_qubits} qubits")
    return targets


def _apply_matrix(reg: QuantumRegister, mat: np.ndarray, targets) -> QuantumRegister:
    """Apply ``mat`` (not necessarily unitary) on ``targets``; no checks."""
    n = reg.n_qubits
    if reg.is_pure:
        axes = [_axis_of(q, n) for q in targets]
        reg.amplitudes = _apply_on_axes(reg.amplitudes, mat, axes, n)
    else:
        row_axes = [_axis_of(q, n) for q in targets]
        col_axes = [n + _axis_of(q, n) for q in targets]
        flat = reg.amplitudes.reshape(-1)
        flat = _apply_on_axes(flat, mat, row_axes, 2 * n)
        flat = _apply_on_axes(flat, mat.conj(), col_axes, 2 * n)
        reg.amplitudes = flat.reshape(reg.dim, reg.dim)
    return reg


def apply_unitary(reg: QuantumRegister, unitary: np.ndarray, targets) -> QuantumRegister:
    """Apply a unitary on the listed qubits (pure: psi -> U psi; mixed: U rho U+)."""
    targets = _check_targets(reg, targets)
    unitary = np.asarray(unitary, dtype=complex)
    dim = 2 ** len(targets)
    if unitary.shape != (dim, dim):
        raise RegisterError(f"unitary shape {unitary.shape} != ({dim}, {dim})")
    if np.max(np.abs(unitary.conj().T @ unitary - np.eye(dim))) > ATOL_UNITARY:
        raise RegisterError("matrix is not unitary within 1e-10")
    return _apply_matrix(reg, unitary, targets)


def expectation(reg: QuantumRegister, mat: np.ndarray, targets) -> float:
    """Real part of <M> on the targeted qubits."""
    targets = _check_targets(reg, targets)
    if reg.is_pure:
        work = reg.copy()
        _apply_matrix(work, np.asarray(mat, dtype=complex), targets)
        return float(np.real(np.vdot(reg.amplitudes, work.amplitudes)))
    n = reg.n_qubits
    row_axes = [_axis_of(q, n) for q in targets]
    flat = _apply_on_axes(reg.amplitudes.reshape(-1), np.asarray(mat, complex), row_axes, 2 * n)
    return float(np.real(np.trace(flat.reshape(reg.dim, reg.dim))))


def measure(reg: QuantumRegister, ps: ProjectorSet, rng, force=None):
    """Projective measurement by the Born rule.

    Returns ``(label, probability, register)``; the register is updated in
    place to the renormalized post-measurement state (non-destructive).
    ``force`` selects a specific outcome label (post-selection); it errors
    when that outcome has probability below 1e-14 and consumes no rng draw.
    """
    _check_targets(reg, ps.targets)
    probs = np.array([expectation(reg, p, ps.targets) for p in ps.projectors])
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if total < MIN_PROBABILITY:
        raise RegisterError("all outcome probabilities below 1e-14: invalid state")

    if force is not None:
        k = ps.index_of(force)
        if probs[k] < MIN_PROBABILITY:
            raise RegisterError(f"forced outcome {force!r} has zero probability")
    else:
        draw = as_generator(rng).random() * total
        k = int(np.searchsorted(np.cumsum(probs), draw, side="right"))
        k = min(k, len(probs) - 1)

    p_k = probs[k]
    _apply_matrix(reg, np.asarray(ps.projectors[k], complex), ps.targets)
    if reg.is_pure:
        reg.amplitudes /= math.sqrt(p_k)
    else:
        reg.amplitudes /= p_k
    return ps.outcome_labels[k], float(p_k / total), reg


def reduced_state(reg: QuantumRegister, keep) -> QuantumRegister:
    """Reduced density matrix over ``keep``; efficient for pure states.

    Pure registers are contracted directly (no full density matrix is
    formed); mixed registers defer to :func:`partial_trace`.
    """
    if not reg.is_pure:
        return partial_trace(reg, keep)
    keep = list(keep)
    if not keep:
        raise RegisterError("keep set must not be empty")
    _check_targets(reg, keep)
    n = reg.n_qubits
    k = len(keep)
    t = reg.amplitudes.reshape([2] * n)
    axes = [_axis_of(q, n) for q in keep]
    dest = list(range(k))[::-1]
    x = np.moveaxis(t, axes, dest).reshape(2**k, -1)
    return QuantumRegister(k, x @ x.conj().T, [reg.labels[q] for q in keep])


def partial_trace(reg: QuantumRegister, keep) -> QuantumRegister:
    """Reduced density matrix over ``keep`` (mixed mode required).

    The reduced register orders its qubits as listed in ``keep``.
    """
    if reg.is_pure:
        raise RegisterError("partial_trace requires mixed mode; call to_mixed() first")
    keep = list(keep)
    if not keep:
        raise RegisterError("keep set must not be empty")
    _check_targets(reg, keep)

    n = reg.n_qubits
    letters = string.ascii_letters
    if 2 * n > len(letters):
        raise RegisterError("register too large for einsum contraction")
    row = {}
    col = {}
    pool = iter(letters)
    for q in range(n):
        row[q] = next(pool)
        col[q] = next(pool) if q in keep else row[q]
    in_sub = "".join(row[n - 1 - j] for j in range(n)) + "".join(
        col[n - 1 - j] for j in range(n)
    )
    out_sub = "".join(row[q] for q in reversed(keep)) + "".join(
        col[q] for q in reversed(keep)
    )
    rho = np.einsum(
        f"{in_sub}->{out_sub}", reg.amplitudes.reshape([2] * (2 * n))
    )
    m = len(keep)
    return QuantumRegister(m, rho.reshape(2**m, 2**m), [reg.labels[q] for q in keep])


# ---------------------------------------------------------------------------
# comparison helpers
# ---------------------------------------------------------------------------

def overlap(a, b) -> complex:
    """<a|b> for pure state vectors."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def fidelity(a, b) -> float:
    """State fidelity, ignoring global phase.

    Accepts vectors or density matrices (QuantumRegister or raw arrays).
    """
    a = a.amplitudes if isinstance(a, QuantumRegister) else np.asarray(a)
    b = b.amplitudes if isinstance(b, QuantumRegister) else np.asarray(b)
    if a.ndim == 1 and b.ndim == 1:
        return float(abs(np.vdot(a, b)) ** 2)
    if a.ndim == 1:
        return float(np.real(np.vdot(a, b @ a)))
    if b.ndim == 1:
        return float(np.real(np.vdot(b, a @ b)))
    from scipy.linalg import sqrtm

    ra = sqrtm(a)
    inner = sqrtm(ra @ b @ ra)
    return float(np.real(np.trace(inner)) ** 2)


def trace_distance(a, b) -> float:
    """0.5 * tr|a - b| for density matrices (vectors are promoted)."""
    a = a.amplitudes if isinstance(a, QuantumRegister) else np.asarray(a)
    b = b.amplitudes if isinstance(b, QuantumRegister) else np.asarray(b)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    if b.ndim == 1:
        b = np.outer(b, b.conj())
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a - b))))
