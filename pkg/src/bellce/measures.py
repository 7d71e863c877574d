"""Exact (brute-force) multipartite entanglement measures."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ContractViolation
from .statevec import ALGEBRAIC_TOL, PureState, as_subset, reduced_density_matrix, subsystem_purity


def power_set(s: Sequence[int]) -> list[tuple[int, ...]]:
    """All subsets of ``s``, ordered by the integer bitmask over positions of ``s``."""
    s = tuple(s)
    return [tuple(q for j, q in enumerate(s) if mask >> j & 1) for mask in range(2 ** len(s))]


@dataclass(frozen=True)
class CEResult:
    subset: tuple[int, ...]
    value: float
    purity_terms: dict[tuple[int, ...], float]


def exact_ce(state: PureState, s: Iterable[int]) -> CEResult:
    """Concentratable Entanglement of ``state`` over the qubit subset ``s``."""
    s = as_subset(s, state.n_qubits)
    terms = {alpha: subsystem_purity(state, alpha) for alpha in power_set(s)}
    value = 1.0 - sum(terms.values()) / 2 ** len(s)
    return CEResult(s, value, terms)


def full_ce(state: PureState) -> float:
    return exact_ce(state, range(state.n_qubits)).value


def _require_normalized(state: PureState) -> None:
    if not state.is_normalized():
        raise ContractViolation("measure needs a normalized state; renormalize first")


def exact_ntangle(state: PureState) -> float:
    """n-tangle ``|<psi| Y^{(x)n} |psi*>|^2``.

    ``Y|b> = i(-1)^b |1-b>``, so the overlap reduces to
    ``i^n sum_x (-1)^{|x|} conj(psi(~x)) conj(psi(x))``; the global phase
    drops out of the modulus.
    """
    _require_normalized(state)
    psi = state.amplitudes
    idx = np.arange(psi.size)
    parity = np.zeros(psi.size, dtype=np.int64)
    for k in range(state.n_qubits):
        parity ^= (idx >> k) & 1
    sign = 1 - 2 * parity
    overlap = np.sum(sign * psi * psi[::-1])
    return float(abs(overlap) ** 2)


def generalized_concurrence(state: PureState) -> float:
    """Generalized concurrence from the 2^n - 2 nontrivial subsystem purities."""
    _require_normalized(state)
    n = state.n_qubits
    if n < 2:
        raise ContractViolation("generalized concurrence needs n >= 2")
    subsets = power_set(range(n))[1:-1]
    total = sum(subsystem_purity(state, alpha) for alpha in subsets)
    radicand = (2**n - 2) - total
    if radicand < 0.0:
        if radicand < -1e-9:
            raise ContractViolation(f"negative concurrence radicand {radicand}")
        radicand = 0.0
    return 2 ** (1 - n / 2) * np.sqrt(radicand)


@dataclass(frozen=True)
class Ensemble:
    """Convex mixture ``sum_i p_i |psi_i><psi_i|`` of equal-size pure states."""

    members: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        members = tuple((float(p), st) for p, st in self.members)
        if not members:
            raise ContractViolation("an ensemble needs at least one member")
        n = members[0][1].n_qubits
        for p, st in members:
            if not 0.0 < p <= 1.0:
                raise ContractViolation(f"ensemble weight {p} outside (0, 1]")
            if st.n_qubits != n:
                raise ContractViolation("ensemble members must share the qubit count")
            if not st.is_normalized():
                raise ContractViolation("ensemble members must be normalized")
        if abs(sum(p for p, _ in members) - 1.0) > ALGEBRAIC_TOL:
            raise ContractViolation("ensemble weights must sum to 1")
        object.__setattr__(self, "members", members)

    @classmethod
    def pure(cls, state: PureState) -> Ensemble:
        return cls(((1.0, state),))

    @property
    def n_qubits(self) -> int:
        return self.members[0][1].n_qubits

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _ in self.members])

    def reduced_density_matrix(self, alpha: Iterable[int]) -> np.ndarray:
        alpha = as_subset(alpha, self.n_qubits, allow_empty=True)
        return sum(p * reduced_density_matrix(st, alpha) for p, st in self.members)

    def purity(self, alpha: Iterable[int] | None = None) -> float:
        """``tr[rho_alpha^2]``; the whole register when ``alpha`` is None."""
        alpha = range(self.n_qubits) if alpha is None else alpha
        alpha = as_subset(alpha, self.n_qubits, allow_empty=True)
        if not alpha:
            return 1.0
        rho = self.reduced_density_matrix(alpha)
        return float(np.sum(np.abs(rho) ** 2))


StateLike = Union[PureState, Ensemble]


def _as_ensemble(rho: StateLike) -> Ensemble:
    return Ensemble.pure(rho) if isinstance(rho, PureState) else rho


def ce_purity_expression(rho: StateLike, s: Iterable[int] | None = None) -> float:
    """``1 - 2^-|s| sum_{alpha in P(s)} tr[rho_alpha^2]`` evaluated on a mixed state."""
    rho = _as_ensemble(rho)
    s = as_subset(range(rho.n_qubits) if s is None else s, rho.n_qubits)
    return 1.0 - sum(rho.purity(alpha) for alpha in power_set(s)) / 2 ** len(s)


def ce_lower_bound(rho: StateLike, s: Iterable[int] | None = None) -> float:
    """Observable lower bound on the mixed-state CE over ``s`` (default: all qubits).

    Each nontrivial bipartition ``alpha | S\\alpha`` with ``alpha`` in P(s)
    contributes ``tr[rho^2] - (tr[rho_alpha^2] + tr[rho_comp^2]) / 2``; the
    trivial cuts (``alpha`` empty or the full register) contribute zero.
    The value may be negative and is returned unclamped.
    """
    rho = _as_ensemble(rho)
    n = rho.n_qubits
    full = tuple(range(n))
    s = as_subset(full if s is None else s, n)
    total_purity = rho.purity()
    acc = 0.0
    for alpha in power_set(s):
        if not alpha or alpha == full:
            continue
        comp = tuple(q for q in full if q not in alpha)
        acc += total_purity - 0.5 * (rho.purity(alpha) + rho.purity(comp))
    return acc / 2 ** len(s)


def ce_lower_bound_nonnegative(rho: StateLike, s: Iterable[int] | None = None) -> float:
    """``max(ce_lower_bound, 0)`` for presentation."""
    return max(ce_lower_bound(rho, s), 0.0)


@dataclass(frozen=True)
class GapIdentity:
    lhs: float  # purity-expression CE minus the lower bound
    rhs: float  # (1 - 2^-n)(1 - tr[rho^2])
    difference: float


def gap_identity(rho: StateLike) -> GapIdentity:
    """Both sides of ``C(S) - C^l(S) = (1 - 2^-n)(1 - tr rho^2)`` on the same state."""
    rho = _as_ensemble(rho)
    n = rho.n_qubits
    lhs = ce_purity_expression(rho) - ce_lower_bound(rho)
    rhs = (1 - 2.0**-n) * (1 - rho.purity())
    return GapIdentity(lhs, rhs, lhs - rhs)
