"""Effective noisy Rydberg CZ/CCZ gates and the noisy comparison pipelines.

The effective matrices are quoted relative to the native Rydberg gate
``2|0..0><0..0| - I`` (every non-vacuum entry has phase close to pi). The
circuits in :mod:`bellce.circuits` are written for the textbook CZ / CCZ,
which differ from the native gate by single-qubit Z rotations. Those are
taken as perfect, so the error part ``U_eff / U_native`` is what gets
carried over: the gate applied in the circuit is
``(U_eff / U_native) * CZ`` (elementwise on the diagonals). A model with
unit moduli and phases of exactly pi therefore reproduces the ideal circuit.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .circuits import CircuitRunner, bell_measurement_circuit
from .errors import ContractViolation, NumericalError, ResourceError
from .measures import exact_ce
from .sampler import cswap_distribution
from .statevec import CCZ, CZ, EffectiveGate, PureState, as_subset, renormalize, tensor
from .states import Family, NamedStateFamily, analytic_ce, make_state, preparation_circuit, run_circuit

# (modulus, phase / pi) of the effective gate entries, indexed by Hamming weight
CZ_ENTRIES = ((1.0, 0.0), (0.9990, 0.9906), (0.9986, 1.000))
CCZ_ENTRIES = ((1.0, 0.0), (0.9981, 0.9845), (0.9973, 0.9934), (0.9963, 0.9911))

CSWAP_MAX_N = 8


def _by_weight(entries, arity: int, phase_only: bool = False) -> np.ndarray:
    out = np.empty(2**arity, dtype=np.complex128)
    for idx in range(2**arity):
        w = bin(idx).count("1")
        mod, phase = entries[w]
        if phase_only:
            mod = 1.0
        out[idx] = 1.0 if w == 0 else mod * np.exp(1j * np.pi * phase)
    return out


def _native(arity: int) -> np.ndarray:
    d = -np.ones(2**arity, dtype=np.complex128)
    d[0] = 1.0
    return d


@dataclass(frozen=True)
class NoiseModel:
    """Diagonal effective CZ / CCZ in the native-gate frame; single-qubit gates perfect."""

    cz_gate: EffectiveGate
    ccz_gate: EffectiveGate
    single_qubit_perfect: bool = True
    name: str = ""

    def __post_init__(self):
        for gate, arity in ((self.cz_gate, 2), (self.ccz_gate, 3)):
            if gate.arity != arity or not gate.is_diagonal:
                raise ContractViolation(f"{gate.name or 'gate'} must be a diagonal {arity}-qubit matrix")
            d = gate.diag
            if np.any(np.abs(d) > 1.0 + 1e-15):
                raise ContractViolation("effective gate entries must have modulus <= 1")
            if d[0] != 1.0:
                raise ContractViolation("the |0...0> entry of an effective gate must be exactly 1")
        if not self.single_qubit_perfect:
            raise ContractViolation("only perfect single-qubit gates are supported")

    def _circuit_gate(self, gate: EffectiveGate, ideal: EffectiveGate) -> EffectiveGate:
        arity = gate.arity
        d = gate.diag / _native(arity) * ideal.diag
        unitary = bool(np.allclose(np.abs(d), 1.0, rtol=0, atol=1e-15))
        return EffectiveGate.diagonal(d, name=f"{ideal.name}[{self.name}]", unitary=unitary)

    def circuit_cz(self) -> EffectiveGate:
        """The effective gate to use wherever a textbook CZ appears."""
        return self._circuit_gate(self.cz_gate, CZ)

    def circuit_ccz(self) -> EffectiveGate:
        return self._circuit_gate(self.ccz_gate, CCZ)


def _model(cz: np.ndarray, ccz: np.ndarray, name: str) -> NoiseModel:
    return NoiseModel(
        EffectiveGate.diagonal(cz, name="U_CZ", unitary=False),
        EffectiveGate.diagonal(ccz, name="U_CCZ", unitary=False),
        name=name,
    )


def default_noise_model() -> NoiseModel:
    """Effective gates of the optimized Rydberg pulses (lossy, with phase errors)."""
    return _model(_by_weight(CZ_ENTRIES, 2), _by_weight(CCZ_ENTRIES, 3), "default")


def ideal_noise_model() -> NoiseModel:
    """Unit moduli and phases of exactly pi: reduces to the ideal circuits."""
    return _model(_native(2), _native(3), "ideal")


def phase_only_noise_model() -> NoiseModel:
    """The default phases with every modulus set to 1 (no leakage)."""
    return _model(_by_weight(CZ_ENTRIES, 2, True), _by_weight(CCZ_ENTRIES, 3, True), "phase-only")


class Method(str, enum.Enum):
    BELL = "bell"
    CSWAP = "cswap"


@dataclass(frozen=True)
class ComparisonRow:
    family: str
    n: int
    method: Method
    ce_estimated: float
    ce_theory: float
    relative_error: float
    squared_norm: float
    cz_count: int = 0
    ccz_count: int = 0
    shot_overhead: float = math.nan
    note: str = ""


def _relative_error(est: float, theory: float) -> float:
    return abs(est - theory) / theory if theory > 0 else math.nan


def _theory(named: NamedStateFamily, s: tuple[int, ...] | None) -> float:
    if s is None and named.family in (Family.GHZ, Family.W, Family.LINE):
        return analytic_ce(named.family, named.n)
    ideal = make_state(named)
    return exact_ce(ideal, s if s is not None else range(named.n)).value


def _prepare(named: NamedStateFamily, model: NoiseModel, noise_prep: bool) -> PureState:
    """Input state, renormalized; its tracked norm carries any preparation loss."""
    ops = preparation_circuit(named)
    if noise_prep and ops is not None and any(name == "CZ" for name, _ in ops):
        return renormalize(run_circuit(named.n, ops, {"CZ": model.circuit_cz()}))
    return make_state(named)


def no_singlet_probability(final: PureState, s: Iterable[int]) -> float:
    """Probability that no pair in ``s`` reads ``(1, 1)`` after the Bell rotation."""
    n = final.n_qubits // 2
    p = np.abs(final.amplitudes.reshape((2,) * (2 * n))) ** 2
    for k in s:
        # numpy axis 2n-1-q holds qubit q
        idx = [slice(None)] * (2 * n)
        idx[2 * n - 1 - k] = 1
        idx[n - 1 - k] = 1
        p[tuple(idx)] = 0.0
    return float(p.sum())


def noisy_bell_pipeline(
    named: NamedStateFamily,
    model: NoiseModel | None = None,
    noise_prep: bool = False,
    subset: Iterable[int] | None = None,
) -> ComparisonRow:
    """Infinite-sample CE from the noisy Bell-measurement circuit."""
    model = model or default_noise_model()
    s = None if subset is None else as_subset(subset, named.n)
    psi = _prepare(named, model, noise_prep)
    runner = CircuitRunner(model.circuit_cz(), model.circuit_ccz())
    final = bell_measurement_circuit(tensor(psi, psi), runner)
    sq = final.squared_norm_tracked
    final = renormalize(final)
    est = 1.0 - no_singlet_probability(final, s if s is not None else range(named.n))
    theory = _theory(named, s)
    return ComparisonRow(
        named.family.value, named.n, Method.BELL, est, theory, _relative_error(est, theory),
        sq, runner.tally.cz, runner.tally.ccz, 1.0 / sq,
    )


def noisy_cswap_pipeline(
    named: NamedStateFamily,
    model: NoiseModel | None = None,
    noise_prep: bool = False,
    subset: Iterable[int] | None = None,
) -> ComparisonRow:
    """Infinite-sample CE from the noisy parallelized c-SWAP circuit."""
    model = model or default_noise_model()
    s = None if subset is None else as_subset(subset, named.n)
    psi = _prepare(named, model, noise_prep)
    dist = cswap_distribution(psi, use_noisy_gates=True, model=model)
    sq = dist.squared_norm * psi.squared_norm_tracked**2
    est = dist.ce(s)
    theory = _theory(named, s)
    return ComparisonRow(
        named.family.value, named.n, Method.CSWAP, est, theory, _relative_error(est, theory),
        sq, dist.cz_count, dist.ccz_count, 1.0 / sq,
    )


_PIPELINES = {Method.BELL: noisy_bell_pipeline, Method.CSWAP: noisy_cswap_pipeline}


def _failed_row(family: str, n: int, method: Method, note: str) -> ComparisonRow:
    nan = math.nan
    return ComparisonRow(family, n, method, nan, nan, nan, nan, note=note)


def comparison_sweep(
    families: Iterable[Family | str],
    n_range: Iterable[int],
    model: NoiseModel | None = None,
    methods: Iterable[Method | str] = (Method.BELL, Method.CSWAP),
    noise_prep: bool = False,
    cswap_max_n: int = CSWAP_MAX_N,
) -> list[ComparisonRow]:
    """Run every (family, n, method) cell; failures and skipped cells become annotated rows."""
    model = model or default_noise_model()
    families = [Family.parse(f) for f in families]
    methods = [Method(m) for m in methods]
    rows = []
    for fam in families:
        for n in n_range:
            for method in methods:
                if method is Method.CSWAP and n > cswap_max_n:
                    rows.append(_failed_row(fam.value, n, method, f"skipped: c-SWAP capped at n={cswap_max_n}"))
                    continue
                try:
                    named = NamedStateFamily(fam, n)
                    rows.append(_PIPELINES[method](named, model, noise_prep))
                except (ContractViolation, ResourceError, NumericalError) as exc:
                    rows.append(_failed_row(fam.value, n, method, f"error: {exc}"))
    return sorted(rows, key=lambda r: (r.family, r.n, r.method.value))


CSV_HEADER = ("family", "n", "method", "ce_est", "ce_theory", "rel_err", "norm_sq")


def fmt(x: float) -> str:
    return format(x, ".17g")


def rows_to_csv(rows: Iterable[ComparisonRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([
            r.family, r.n, r.method.value, fmt(r.ce_estimated), fmt(r.ce_theory),
            fmt(r.relative_error), fmt(r.squared_norm),
        ])
    return buf.getvalue()


def row_to_dict(row: ComparisonRow) -> dict:
    d = asdict(row)
    d["method"] = row.method.value
    return d
