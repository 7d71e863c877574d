"""Dense statevector core.

Conventions used everywhere in the package:

* qubit ``k`` is bit ``k`` of the basis-state index (little-endian), so
  ``amplitudes[5]`` of a 3-qubit state is the amplitude of qubits
  ``(q0, q1, q2) = (1, 0, 1)``;
* a gate of arity ``a`` acting on ``targets = (t0, ..., t_{a-1})`` uses the
  same convention locally: row/column ``i`` of its matrix has ``t_j`` set to
  bit ``j`` of ``i``;
* in a doubled register the test copy occupies qubits ``0..n-1`` and the
  second copy ``n..2n-1``; pair ``k`` is ``(k, n + k)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolation, NumericalDegeneracyError, ResourceError

#: Largest statevector (in amplitudes) any operation will allocate.
MAX_AMPLITUDES = 2**26

ALGEBRAIC_TOL = 1e-12
PIPELINE_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def check_size(n_qubits: int) -> None:
    """Raise ResourceError if a ``n_qubits`` statevector exceeds the cap."""
    if n_qubits < 0:
        raise ContractViolation(f"negative qubit count {n_qubits}")
    if 2**n_qubits > MAX_AMPLITUDES:
        raise ResourceError(
            f"{n_qubits}-qubit statevector needs 2^{n_qubits} amplitudes, "
            f"above the cap of {MAX_AMPLITUDES}"
        )


def as_subset(indices: Iterable[int], n: int, allow_empty: bool = False) -> tuple[int, ...]:
    """Validate a qubit subset and return it as a sorted tuple."""
    idx = tuple(sorted(int(i) for i in indices))
    if not idx and not allow_empty:
        raise ContractViolation("qubit subset must be non-empty")
    if len(set(idx)) != len(idx):
        raise ContractViolation(f"duplicate qubit indices in {idx}")
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise ContractViolation(f"qubit indices {idx} out of range for n={n}")
    return idx


@dataclass(frozen=True)
class PureState:
    """Amplitude vector over ``n_qubits`` qubits, possibly sub-normalized.

    ``squared_norm_tracked`` is the running product of the norm ratios
    realized by every gate applied so far; it survives renormalization so the
    cumulative loss of a lossy circuit stays available.
    """

    n_qubits: int
    amplitudes: np.ndarray
    squared_norm_tracked: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.n_qubits < 1:
            raise ContractViolation("a state needs at least one qubit")
        if amps.size != 2**self.n_qubits:
            raise ContractViolation(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, got {amps.size}"
            )
        if amps.flags.writeable:
            # caller-owned buffers are copied; internal results arrive pre-frozen
            amps = amps.copy()
            amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> PureState:
        check_size(n_qubits)
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex], normalize: bool = False) -> PureState:
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if amps.size == 0 or 2**n != amps.size:
            raise ContractViolation(f"amplitude count {amps.size} is not a power of two")
        if normalize:
            nrm = np.vdot(amps, amps).real
            if nrm <= 0.0:
                raise NumericalDegeneracyError("cannot normalize a zero vector")
            amps = amps / np.sqrt(nrm)
        return cls(n, amps)

    @property
    def squared_norm(self) -> float:
        """Current ``sum |a|^2`` of the stored amplitudes."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: float = PIPELINE_TOL) -> bool:
        return abs(self.squared_norm - 1.0) <= tol

    def tensor_view(self) -> np.ndarray:
        """Amplitudes as an n-axis array whose axis ``k`` is qubit ``k``."""
        return self.amplitudes.reshape((2,) * self.n_qubits).transpose(range(self.n_qubits - 1, -1, -1))


@dataclass(frozen=True)
class EffectiveGate:
    """Dense ``2^arity x 2^arity`` gate matrix, possibly non-unitary."""

    matrix: np.ndarray
    unitary_flag: bool = True
    name: str = ""
    arity: int = field(init=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractViolation(f"gate matrix must be square, got shape {m.shape}")
        arity = int(round(np.log2(m.shape[0])))
        if arity not in (1, 2, 3) or 2**arity != m.shape[0]:
            raise ContractViolation(f"gate dimension {m.shape[0]} is not 2, 4 or 8")
        if self.unitary_flag:
            err = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
            if err >= ALGEBRAIC_TOL:
                raise ContractViolation(f"gate flagged unitary but |G^dag G - I|_max = {err:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "arity", arity)

    @classmethod
    def diagonal(cls, entries: Sequence[complex], name: str = "", unitary: bool | None = None) -> EffectiveGate:
        entries = np.asarray(entries, dtype=np.complex128)
        if unitary is None:
            unitary = bool(np.all(np.abs(np.abs(entries) - 1.0) < ALGEBRAIC_TOL))
        return cls(np.diag(entries), unitary_flag=unitary, name=name)

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.matrix - np.diag(np.diag(self.matrix)))

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.matrix)


_S2 = 1 / np.sqrt(2)

HADAMARD = EffectiveGate(np.array([[1, 1], [1, -1]]) * _S2, name="H")
PAULI_X = EffectiveGate(np.array([[0, 1], [1, 0]]), name="X")
PAULI_Y = EffectiveGate(np.array([[0, -1j], [1j, 0]]), name="Y")
PAULI_Z = EffectiveGate(np.array([[1, 0], [0, -1]]), name="Z")
CZ = EffectiveGate.diagonal([1, 1, 1, -1], name="CZ")
CCZ = EffectiveGate.diagonal([1] * 7 + [-1], name="CCZ")
# targets = (control, target): local index = control + 2 * target
CNOT = EffectiveGate(np.eye(4)[[0, 3, 2, 1]], name="CNOT")
SWAP = EffectiveGate(np.eye(4)[[0, 2, 1, 3]], name="SWAP")


def _check_targets(n: int, gate: EffectiveGate, targets: Sequence[int]) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != gate.arity:
        raise ContractViolation(f"gate of arity {gate.arity} given {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise ContractViolation(f"duplicate gate targets {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ContractViolation(f"targets {targets} out of range for {n} qubits")
    return targets


def _apply_matrix(amps: np.ndarray, n: int, gate: EffectiveGate, targets: tuple[int, ...]) -> np.ndarray:
    a = gate.arity
    psi = amps.reshape((2,) * n)
    # numpy C order: axis n-1-k holds qubit k
    state_axes = [n - 1 - t for t in targets]
    if gate.is_diagonal:
        d = gate.diag.reshape((2,) * a)  # axis a-1-j holds target j
        order = np.argsort([state_axes[a - 1 - i] for i in range(a)])
        d = d.transpose(order)
        shape = [1] * n
        for ax in sorted(state_axes):
            shape[ax] = 2
        return _frozen((psi * d.reshape(shape)).reshape(-1))
    m = gate.matrix.reshape((2,) * (2 * a))
    in_axes = [a + (a - 1 - j) for j in range(a)]
    out = np.tensordot(m, psi, axes=(in_axes, state_axes))
    out = np.moveaxis(out, list(range(a)), [state_axes[a - 1 - i] for i in range(a)])
    return _frozen(np.ascontiguousarray(out).reshape(-1))


def apply_gate(state: PureState, gate: EffectiveGate, targets: Sequence[int]) -> PureState:
    """Apply ``gate`` to ``targets`` (ordered), identity elsewhere."""
    targets = _check_targets(state.n_qubits, gate, targets)
    out = _apply_matrix(state.amplitudes, state.n_qubits, gate, targets)
    tracked = state.squared_norm_tracked
    if not gate.unitary_flag:
        before = state.squared_norm
        if before <= 0.0:
            raise NumericalDegeneracyError("gate applied to a zero-norm state")
        tracked *= float(np.vdot(out, out).real) / before
    return PureState(state.n_qubits, out, tracked)


def tensor(a: PureState, b: PureState) -> PureState:
    """Tensor product with ``a`` on qubits ``0..n_a-1`` and ``b`` above them."""
    check_size(a.n_qubits + b.n_qubits)
    # b's qubits are the high bits of the combined index
    amps = _frozen(np.multiply.outer(b.amplitudes, a.amplitudes).reshape(-1))
    return PureState(a.n_qubits + b.n_qubits, amps, a.squared_norm_tracked * b.squared_norm_tracked)


def renormalize(state: PureState) -> PureState:
    """Scale amplitudes to unit norm, keeping ``squared_norm_tracked``."""
    nrm = state.squared_norm
    if not nrm > 0.0:
        raise NumericalDegeneracyError("cannot renormalize a zero-norm state")
    if abs(nrm - 1.0) == 0.0:
        return state
    return PureState(state.n_qubits, _frozen(state.amplitudes / np.sqrt(nrm)), state.squared_norm_tracked)


def _split(state: PureState, alpha: tuple[int, ...]) -> np.ndarray:
    """Matrix with rows indexed by the qubits in ``alpha`` (little-endian)."""
    n = state.n_qubits
    psi = state.amplitudes.reshape((2,) * n)
    keep_axes = [n - 1 - q for q in reversed(alpha)]  # row index: alpha[0] is the low bit
    rest = [ax for ax in range(n) if ax not in keep_axes]
    return psi.transpose(keep_axes + rest).reshape(2 ** len(alpha), -1)


def reduced_density_matrix(state: PureState, alpha: Iterable[int]) -> np.ndarray:
    """``rho_alpha`` of a pure state; basis index uses alpha's own little-endian order."""
    alpha = as_subset(alpha, state.n_qubits, allow_empty=True)
    if len(alpha) > 14:
        raise ResourceError(f"a {2 ** len(alpha)}-dimensional reduced matrix is too large")
    a = _split(state, alpha)
    return a @ a.conj().T


def subsystem_purity(state: PureState, alpha: Iterable[int]) -> float:
    """``tr[rho_alpha^2]`` of a normalized pure state; 1 for the empty subset."""
    alpha = as_subset(alpha, state.n_qubits, allow_empty=True)
    if not state.is_normalized():
        raise ContractViolation(
            f"subsystem_purity needs a normalized state (squared norm {state.squared_norm!r}); renormalize first"
        )
    if not alpha:
        return 1.0
    a = _split(state, alpha)
    # tr[(A A^dag)^2] == tr[(A^dag A)^2]; use the smaller Gram matrix
    g = a @ a.conj().T if a.shape[0] <= a.shape[1] else a.conj().T @ a
    return float(np.sum(np.abs(g) ** 2))


class BellLabel(enum.IntEnum):
    """Outcome of a Bell-basis measurement on one (test, copy) pair."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def swap_eigenvalue(self) -> int:
        return -1 if self is BellLabel.PSI_MINUS else 1

    @property
    def singlet_bit(self) -> int:
        return int(self is BellLabel.PSI_MINUS)


# BELL_VECTORS[l][t, c] is the amplitude of |t>_test |c>_copy in Bell state l
BELL_VECTORS = np.array(
    [
        [[1, 0], [0, 1]],
        [[1, 0], [0, -1]],
        [[0, 1], [1, 0]],
        [[0, 1], [-1, 0]],
    ],
    dtype=np.complex128,
) * _S2


def _pair_matrix(state: PureState, pair: tuple[int, int]) -> tuple[np.ndarray, list[int]]:
    n = state.n_qubits
    t, c = (int(p) for p in pair)
    if t == c:
        raise ContractViolation(f"pair indices must differ, got {pair}")
    if not (0 <= t < n and 0 <= c < n):
        raise ContractViolation(f"pair {pair} out of range for {n} qubits")
    psi = state.amplitudes.reshape((2,) * n)
    front = [n - 1 - t, n - 1 - c]
    perm = front + [ax for ax in range(n) if ax not in front]
    return psi.transpose(perm).reshape(2, 2, -1), perm


def bell_pair_probabilities(state: PureState, pair: tuple[int, int]) -> np.ndarray:
    """Born probabilities of the four Bell projectors on ``pair``, in BellLabel order."""
    a, _ = _pair_matrix(state, pair)
    amps = np.einsum("ltc,tcr->lr", BELL_VECTORS.conj(), a)
    p = np.sum(np.abs(amps) ** 2, axis=1)
    total = p.sum()
    if not total > 0.0:
        raise NumericalDegeneracyError("all Bell outcome probabilities vanish")
    return p / total


def project_bell_pair(state: PureState, pair: tuple[int, int], label: int) -> PureState:
    """Post-measurement state after outcome ``label`` on ``pair``, renormalized."""
    a, perm = _pair_matrix(state, pair)
    v = BELL_VECTORS[int(label)]
    coeff = np.einsum("tc,tcr->r", v.conj(), a)
    nrm = float(np.vdot(coeff, coeff).real)
    if not nrm > 0.0:
        raise NumericalDegeneracyError(f"Bell outcome {BellLabel(label).name} has zero probability")
    projected = np.multiply.outer(v, coeff / np.sqrt(nrm))
    n = state.n_qubits
    out = projected.reshape((2,) * n).transpose(np.argsort(perm))
    return PureState(n, _frozen(np.ascontiguousarray(out).reshape(-1)), state.squared_norm_tracked)


def collapse_bell_pair(
    state: PureState, pair: tuple[int, int], rng: np.random.Generator
) -> tuple[BellLabel, PureState]:
    """Sample a Bell outcome on ``pair`` and return it with the collapsed state."""
    if not state.is_normalized():
        raise ContractViolation("collapse_bell_pair needs a normalized state")
    p = bell_pair_probabilities(state, pair)
    label = BellLabel(int(rng.choice(4, p=p)))
    return label, project_bell_pair(state, pair, label)
