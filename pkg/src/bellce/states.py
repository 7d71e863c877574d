"""Named state families and their closed-form Concentratable Entanglements."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractViolation
from .statevec import CZ, HADAMARD, PAULI_X, PureState, apply_gate, check_size


class Family(str, enum.Enum):
    GHZ = "ghz"
    W = "w"
    LINE = "line"
    PRODUCT = "product"
    HAAR_RANDOM = "haar"

    @classmethod
    def parse(cls, name: str | Family) -> Family:
        if isinstance(name, Family):
            return name
        key = name.strip().lower()
        for fam in cls:
            if key in (fam.value, fam.name.lower()):
                return fam
        raise ContractViolation(f"unknown state family {name!r}; choose from {[f.value for f in cls]}")


#: one preparation step: gate name ("H", "X" or "CZ") and its target qubits
GateOp = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class NamedStateFamily:
    family: Family
    n: int
    seed: int | None = None
    bitstring: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        fam, n = self.family, self.n
        if n < 1:
            raise ContractViolation(f"n must be positive, got {n}")
        if fam in (Family.W, Family.LINE) and n < 2:
            raise ContractViolation(f"{fam.value} states need n >= 2, got {n}")
        if fam is Family.PRODUCT:
            bits = self.bitstring if self.bitstring is not None else "0" * n
            if len(bits) != n or set(bits) - {"0", "1"}:
                raise ContractViolation(f"product bitstring {bits!r} must be {n} characters of 0/1")
            object.__setattr__(self, "bitstring", bits)
        elif self.bitstring is not None:
            raise ContractViolation("bitstring is only meaningful for the product family")
        if fam is Family.HAAR_RANDOM and self.seed is None:
            raise ContractViolation("Haar-random states need an explicit seed")

    def describe(self) -> str:
        extra = ""
        if self.family is Family.PRODUCT:
            extra = f" bits={self.bitstring}"
        elif self.family is Family.HAAR_RANDOM:
            extra = f" seed={self.seed}"
        return f"{self.family.value} n={self.n}{extra}"


def preparation_circuit(named: NamedStateFamily) -> list[GateOp] | None:
    """Gate list that prepares ``named`` from ``|0...0>``, or None if built directly.

    Line states are H on every qubit followed by CZ on each nearest-neighbour
    pair (no wrap-around). GHZ, W and Haar states are written down directly.
    """
    if named.family is Family.LINE:
        ops: list[GateOp] = [("H", (k,)) for k in range(named.n)]
        ops += [("CZ", (k, k + 1)) for k in range(named.n - 1)]
        return ops
    if named.family is Family.PRODUCT:
        return [("X", (k,)) for k, b in enumerate(named.bitstring) if b == "1"]
    return None


_GATES = {"H": HADAMARD, "X": PAULI_X, "CZ": CZ}


def run_circuit(n: int, ops: list[GateOp], gates: dict | None = None) -> PureState:
    """Apply ``ops`` to ``|0...0>``; ``gates`` overrides the matrix used per name."""
    table = dict(_GATES)
    if gates:
        table.update(gates)
    state = PureState.zero(n)
    for name, targets in ops:
        state = apply_gate(state, table[name], targets)
    return state


def ghz_state(n: int) -> PureState:
    check_size(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n, amps)


def w_state(n: int) -> PureState:
    check_size(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[[1 << k for k in range(n)]] = 1 / np.sqrt(n)
    return PureState(n, amps)


def haar_state(n: int, seed: int) -> PureState:
    check_size(n)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return PureState(n, v / np.linalg.norm(v))


def make_state(named: NamedStateFamily) -> PureState:
    fam = named.family
    if fam is Family.GHZ:
        return ghz_state(named.n)
    if fam is Family.W:
        return w_state(named.n)
    if fam is Family.HAAR_RANDOM:
        return haar_state(named.n, named.seed)
    return run_circuit(named.n, preparation_circuit(named))


def fibonacci(k: int) -> int:
    """Fibonacci number with Fib(1) = Fib(2) = 1, in exact integers."""
    if k < 1:
        raise ContractViolation(f"Fibonacci index must be >= 1, got {k}")
    a, b = 1, 1
    for _ in range(k - 2):
        a, b = b, a + b
    return b if k > 1 else a


def analytic_ce_exact(family: Family | str, n: int) -> Fraction:
    """Closed-form full-set CE as an exact rational."""
    fam = Family.parse(family)
    if fam is Family.GHZ:
        if n < 1:
            raise ContractViolation(f"GHZ needs n >= 1, got {n}")
        return Fraction(1, 2) - Fraction(1, 2**n)
    if fam is Family.W:
        if n < 2:
            raise ContractViolation(f"W needs n >= 2, got {n}")
        return Fraction(1, 2) - Fraction(1, 2 * n)
    if fam is Family.LINE:
        if n < 2:
            raise ContractViolation(f"line needs n >= 2, got {n}")
        return 1 - Fraction(fibonacci(n + 2), 2**n)
    raise ContractViolation(f"no closed-form CE for family {fam.value}")


def analytic_ce(family: Family | str, n: int) -> float:
    return float(analytic_ce_exact(family, n))


def w_marginal_purity(n: int, traced: int) -> float:
    """Purity of W_n after tracing out ``traced`` qubits."""
    return ((n - traced) ** 2 + traced**2) / n**2
