"""Gate-level measurement circuits shared by the sampler and noise layers.

Both circuits are built only from Hadamards plus whatever CZ / CCZ matrices
the caller supplies, so passing the ideal gates gives the textbook circuits
and passing effective noisy matrices gives the lossy versions. CNOT is
``H_t . CZ . H_t`` and Toffoli is ``H_t . CCZ . H_t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .statevec import CCZ, CZ, HADAMARD, EffectiveGate, PureState, apply_gate, check_size, tensor


@dataclass
class GateTally:
    cz: int = 0
    ccz: int = 0
    hadamard: int = 0


@dataclass
class CircuitRunner:
    cz_gate: EffectiveGate = CZ
    ccz_gate: EffectiveGate = CCZ
    tally: GateTally = field(default_factory=GateTally)

    def h(self, state: PureState, q: int) -> PureState:
        self.tally.hadamard += 1
        return apply_gate(state, HADAMARD, (q,))

    def cz(self, state: PureState, a: int, b: int) -> PureState:
        self.tally.cz += 1
        return apply_gate(state, self.cz_gate, (a, b))

    def ccz(self, state: PureState, a: int, b: int, c: int) -> PureState:
        self.tally.ccz += 1
        return apply_gate(state, self.ccz_gate, (a, b, c))

    def cnot(self, state: PureState, control: int, target: int) -> PureState:
        state = self.h(state, target)
        state = self.cz(state, control, target)
        return self.h(state, target)

    def toffoli(self, state: PureState, c1: int, c2: int, target: int) -> PureState:
        state = self.h(state, target)
        state = self.ccz(state, c1, c2, target)
        return self.h(state, target)

    def fredkin(self, state: PureState, control: int, a: int, b: int) -> PureState:
        state = self.cnot(state, b, a)
        state = self.toffoli(state, control, a, b)
        return self.cnot(state, b, a)


def bell_measurement_circuit(doubled: PureState, runner: CircuitRunner | None = None) -> PureState:
    """Rotate every pair ``(k, n+k)`` of a doubled register into the Bell basis.

    CNOT from test to copy then H on the test qubit, so a computational
    readout ``(t, c)`` of the pair means Phi+ for 00, Psi+ for 01 (c = 1),
    Phi- for 10 and Psi- (the singlet) for 11.
    """
    runner = runner or CircuitRunner()
    n = doubled.n_qubits // 2
    state = doubled
    for k in range(n):
        state = runner.cnot(state, k, n + k)
        state = runner.h(state, k)
    return state


# computational (test bit, copy bit) after the rotation -> BellLabel value
READOUT_TO_LABEL = np.array([[0, 2], [1, 3]])


def pair_readout_labels(n_pairs: int) -> np.ndarray:
    """BellLabel code of every pair for each basis index of the rotated register."""
    idx = np.arange(2 ** (2 * n_pairs))
    test = (idx[:, None] >> np.arange(n_pairs)) & 1
    copy = (idx[:, None] >> (n_pairs + np.arange(n_pairs))) & 1
    return READOUT_TO_LABEL[test, copy]


def cswap_register(state: PureState) -> PureState:
    """``|psi>_test |psi>_copy |0...0>_anc`` with ancilla k on qubit 2n + k."""
    n = state.n_qubits
    check_size(3 * n)
    return tensor(tensor(state, state), PureState.zero(n))


def cswap_circuit(register: PureState, runner: CircuitRunner | None = None) -> PureState:
    """Parallelized controlled-SWAP test on a ``3n``-qubit register."""
    runner = runner or CircuitRunner()
    n = register.n_qubits // 3
    state = register
    for k in range(n):
        state = runner.h(state, 2 * n + k)
    for k in range(n):
        state = runner.fredkin(state, 2 * n + k, k, n + k)
    for k in range(n):
        state = runner.h(state, 2 * n + k)
    return state


def ancilla_distribution(final: PureState) -> np.ndarray:
    """Marginal distribution of the ``n`` ancillas; index bit k is z_k."""
    n = final.n_qubits // 3
    p = np.abs(final.amplitudes.reshape(2**n, 2 ** (2 * n))) ** 2
    p = p.sum(axis=1)
    return p / p.sum()
