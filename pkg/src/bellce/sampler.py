"""Bell-basis and c-SWAP measurement simulation plus the record estimators.

All estimators are pure post-processing of a :class:`MeasurementRecord`, so
records read from disk (including ones produced on hardware) are handled the
same way as simulated ones.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .circuits import CircuitRunner, ancilla_distribution, cswap_circuit, cswap_register
from .errors import ContractViolation, ResourceError
from .measures import Ensemble
from .statevec import (
    BELL_VECTORS,
    BellLabel,
    PureState,
    as_subset,
    bell_pair_probabilities,
    check_size,
    project_bell_pair,
    renormalize,
    tensor,
)

LABEL_CHARS = "PMSQ"  # Phi+, Phi-, Psi+, Psi-
_CHAR_TO_CODE = {c: i for i, c in enumerate(LABEL_CHARS)}
SINGLET = int(BellLabel.PSI_MINUS)


@dataclass(frozen=True)
class MeasurementRecord:
    """``M x n_pairs`` table of BellLabel codes, one row per round."""

    rounds: np.ndarray
    seed: int | None = None
    source: str = ""

    def __post_init__(self):
        r = np.asarray(self.rounds, dtype=np.int8)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise ContractViolation(f"record needs shape (M >= 1, n >= 1), got {r.shape}")
        if r.min() < 0 or r.max() > 3:
            raise ContractViolation("record entries must be BellLabel codes 0..3")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "rounds", r)

    @property
    def n_pairs(self) -> int:
        return self.rounds.shape[1]

    @property
    def M(self) -> int:
        return self.rounds.shape[0]

    @property
    def singlet_bits(self) -> np.ndarray:
        """``z[m, k] = 1`` iff pair k of round m came out as the singlet."""
        return (self.rounds == SINGLET).astype(np.int8)

    def labels(self, m: int) -> tuple[BellLabel, ...]:
        return tuple(BellLabel(int(c)) for c in self.rounds[m])


@dataclass(frozen=True)
class CSwapRecord:
    """``M x n`` table of ancilla readout bits."""

    rounds: np.ndarray
    seed: int | None = None
    source: str = ""

    def __post_init__(self):
        r = np.asarray(self.rounds, dtype=np.int8)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise ContractViolation(f"record needs shape (M >= 1, n >= 1), got {r.shape}")
        if r.min() < 0 or r.max() > 1:
            raise ContractViolation("c-SWAP record entries must be bits")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "rounds", r)

    @property
    def n(self) -> int:
        return self.rounds.shape[1]

    @property
    def M(self) -> int:
        return self.rounds.shape[0]


# ---------------------------------------------------------------- sampling


def _sample_doubled(doubled: PureState, n: int, rows: int, rng: np.random.Generator, out: np.ndarray) -> None:
    """Sequentially collapse pairs 0..n-1 of ``doubled`` for ``rows`` rounds.

    Rounds that share a label prefix share the same post-measurement state, so
    the conditional law of the next pair is computed once per distinct prefix
    (depth-first, one state per tree level in memory).
    """
    stack = [(np.arange(rows), 0, doubled)]
    while stack:
        idx, k, state = stack.pop()
        p = bell_pair_probabilities(state, (k, n + k))
        draws = rng.choice(4, size=idx.size, p=p)
        out[idx, k] = draws
        if k + 1 == n:
            continue
        for lab in range(3, -1, -1):
            hit = idx[draws == lab]
            if hit.size:
                stack.append((hit, k + 1, project_bell_pair(state, (k, n + k), lab)))


def _check_rounds(M: int) -> None:
    if int(M) != M or M < 1:
        raise ContractViolation(f"number of rounds must be a positive integer, got {M}")


def bell_sample(state: PureState, M: int, seed: int, source: str = "") -> MeasurementRecord:
    """Simulate ``M`` rounds of pairwise Bell measurements on ``state (x) state``."""
    _check_rounds(M)
    if not state.is_normalized():
        raise ContractViolation("bell_sample needs a normalized state")
    n = state.n_qubits
    check_size(2 * n)
    rng = np.random.default_rng(seed)
    out = np.empty((M, n), dtype=np.int8)
    _sample_doubled(tensor(state, state), n, M, rng, out)
    return MeasurementRecord(out, seed, source)


def bell_sample_ensemble(rho: Ensemble, M: int, seed: int, source: str = "") -> MeasurementRecord:
    """As :func:`bell_sample` but each copy is drawn independently from ``rho``."""
    _check_rounds(M)
    n = rho.n_qubits
    check_size(2 * n)
    rng = np.random.default_rng(seed)
    w = rho.weights / rho.weights.sum()
    test = rng.choice(len(w), size=M, p=w)
    copy = rng.choice(len(w), size=M, p=w)
    out = np.empty((M, n), dtype=np.int8)
    states = [st for _, st in rho.members]
    for i, j in sorted(set(zip(test.tolist(), copy.tolist()))):
        rows = np.flatnonzero((test == i) & (copy == j))
        block = np.empty((rows.size, n), dtype=np.int8)
        _sample_doubled(tensor(states[i], states[j]), n, rows.size, rng, block)
        out[rows] = block
    return MeasurementRecord(out, seed, source)


# ---------------------------------------------------------------- estimators


def _triplet_only(record: MeasurementRecord, s: tuple[int, ...]) -> np.ndarray:
    return np.all(record.rounds[:, list(s)] != SINGLET, axis=1)


def _record_subset(record: MeasurementRecord, s: Iterable[int] | None) -> tuple[int, ...]:
    if s is None:
        return tuple(range(record.n_pairs))
    return as_subset(s, record.n_pairs)


def count_singlet_rounds(record: MeasurementRecord, s: Iterable[int] | None = None) -> int:
    """Number of rounds with at least one singlet among the pairs in ``s``."""
    s = _record_subset(record, s)
    return int(record.M - np.count_nonzero(_triplet_only(record, s)))


def estimate_ce(record: MeasurementRecord, s: Iterable[int] | None = None) -> float:
    """Unbiased CE estimate: fraction of rounds with a singlet somewhere in ``s``."""
    return count_singlet_rounds(record, s) / record.M


def count_all_singlet_rounds(record: MeasurementRecord) -> int:
    return int(np.count_nonzero(np.all(record.rounds == SINGLET, axis=1)))


def estimate_ntangle(record: MeasurementRecord) -> float:
    """Unbiased n-tangle estimate: ``2^n`` times the all-singlet frequency."""
    return 2.0**record.n_pairs * count_all_singlet_rounds(record) / record.M


def count_odd_parity_rounds(record: MeasurementRecord, alpha: Iterable[int]) -> int:
    """Number of rounds with an odd number of singlets among the pairs in ``alpha``."""
    alpha = as_subset(alpha, record.n_pairs)
    odd = record.singlet_bits[:, list(alpha)].sum(axis=1) & 1
    return int(np.count_nonzero(odd))


def estimate_subsystem_purity(record: MeasurementRecord, alpha: Iterable[int]) -> float:
    """Mean over rounds of the product of SWAP eigenvalues on ``alpha``."""
    return 1.0 - 2.0 * count_odd_parity_rounds(record, alpha) / record.M


def estimate_ce_lower_bound(record: MeasurementRecord) -> float:
    """Estimate of the full-register mixed-state CE lower bound from one record."""
    n = record.n_pairs
    full = tuple(range(n))
    gamma = estimate_subsystem_purity(record, full)
    all_triplet = float(np.mean(_triplet_only(record, full)))
    return 2.0**-n + (1 - 2.0**-n) * gamma - all_triplet


# ---------------------------------------------------------------- exact Bell outcome law


def bell_outcome_probabilities(state: PureState) -> np.ndarray:
    """Exact joint Bell-outcome law on ``state (x) state`` as a ``(4,)*n`` array.

    Axis k is the BellLabel code of pair k. Computed by projecting the doubled
    amplitude tensor onto the Bell basis pair by pair.
    """
    n = state.n_qubits
    if n > 8:
        raise ResourceError(f"a 4^{n} outcome table is too large (n <= 8)")
    check_size(2 * n)
    t = state.tensor_view()
    d = np.multiply.outer(t, t)  # axes: test 0..n-1, copy 0..n-1
    bconj = BELL_VECTORS.conj()
    for k in range(n):
        # test_k sits at axis k (earlier pairs already collapsed to labels in
        # place); copy_k has shifted down by the k removed axes
        d = np.tensordot(bconj, d, axes=([1, 2], [k, n]))
        d = np.moveaxis(d, 0, k)
    p = np.abs(d) ** 2
    return p / p.sum()


def bell_distribution(state: PureState) -> dict[tuple[BellLabel, ...], float]:
    """Exact probabilities of every joint outcome, keyed by label tuples."""
    p = bell_outcome_probabilities(state)
    return {
        tuple(BellLabel(c) for c in combo): float(p[combo])
        for combo in itertools.product(range(4), repeat=state.n_qubits)
    }


def _singlet_grid(n: int) -> np.ndarray:
    """Boolean ``(4,)*n + (n,)`` array: pair k of the outcome is a singlet."""
    grids = np.meshgrid(*([np.arange(4)] * n), indexing="ij")
    return np.stack([g == SINGLET for g in grids], axis=-1)


def expected_ce_estimate(probs: np.ndarray, s: Iterable[int]) -> float:
    """Expectation of the per-round CE weight under an exact outcome law."""
    n = probs.ndim
    s = as_subset(s, n)
    z = _singlet_grid(n)[..., list(s)]
    weight = 1.0 - np.prod(~z, axis=-1)
    return float(np.sum(probs * weight))


def expected_ntangle_estimate(probs: np.ndarray) -> float:
    n = probs.ndim
    z = _singlet_grid(n)
    weight = 2.0**n * np.prod(z, axis=-1)
    return float(np.sum(probs * weight))


def expected_purity_estimate(probs: np.ndarray, alpha: Iterable[int]) -> float:
    n = probs.ndim
    alpha = as_subset(alpha, n)
    z = _singlet_grid(n)[..., list(alpha)]
    weight = np.prod(1 - 2 * z.astype(np.int64), axis=-1)
    return float(np.sum(probs * weight))


# ---------------------------------------------------------------- c-SWAP test


@dataclass(frozen=True)
class CSwapDistribution:
    """Ancilla readout law of the parallelized c-SWAP test.

    ``probabilities[z]`` uses the little-endian convention: bit k of ``z`` is
    the readout of ancilla k. ``squared_norm`` is the pre-renormalization
    norm of the final register (1 for the ideal circuit).
    """

    n: int
    probabilities: np.ndarray
    squared_norm: float
    cz_count: int = 0
    ccz_count: int = 0

    def ce(self, s: Iterable[int] | None = None) -> float:
        """``1 - sum of p(z)`` over bitstrings that are zero on every index of ``s``."""
        s = tuple(range(self.n)) if s is None else as_subset(s, self.n)
        z = np.arange(2**self.n)
        mask = np.ones(2**self.n, dtype=bool)
        for k in s:
            mask &= ((z >> k) & 1) == 0
        return float(1.0 - self.probabilities[mask].sum())

    def as_dict(self) -> dict[str, float]:
        return {
            "".join(str(z >> k & 1) for k in range(self.n)): float(p)
            for z, p in enumerate(self.probabilities)
        }


def cswap_distribution(state: PureState, use_noisy_gates: bool = False, model=None) -> CSwapDistribution:
    """Simulate the full ``3n``-qubit c-SWAP circuit and return the ancilla law.

    With ``use_noisy_gates`` the CZ/CCZ matrices of ``model`` (default: the
    effective Rydberg gates) replace the ideal ones; the final register is
    renormalized before probabilities are read out.
    """
    if not state.is_normalized():
        raise ContractViolation("cswap_distribution needs a normalized state")
    runner = CircuitRunner()
    if use_noisy_gates:
        from .noise import default_noise_model

        model = model or default_noise_model()
        runner = CircuitRunner(model.circuit_cz(), model.circuit_ccz())
    final = cswap_circuit(cswap_register(state), runner)
    sq = final.squared_norm
    final = renormalize(final)
    return CSwapDistribution(
        state.n_qubits, ancilla_distribution(final), sq, runner.tally.cz, runner.tally.ccz
    )


def cswap_sample(state: PureState, M: int, seed: int, use_noisy_gates: bool = False, model=None) -> CSwapRecord:
    _check_rounds(M)
    dist = cswap_distribution(state, use_noisy_gates, model)
    rng = np.random.default_rng(seed)
    z = rng.choice(2**dist.n, size=M, p=dist.probabilities)
    bits = (z[:, None] >> np.arange(dist.n)) & 1
    return CSwapRecord(bits, seed)


def estimate_ce_cswap(record: CSwapRecord, s: Iterable[int] | None = None) -> float:
    """Fraction of rounds with some ancilla in ``s`` reading 1."""
    s = tuple(range(record.n)) if s is None else as_subset(s, record.n)
    return float(np.mean(np.any(record.rounds[:, list(s)] == 1, axis=1)))


# ---------------------------------------------------------------- record files


class RecordFormatError(ContractViolation):
    pass


def _header(kind: str, n: int, M: int, seed: int | None) -> str:
    return f"{kind} v1 n={n} M={M} seed={seed if seed is not None else 'none'}"


def format_record(record: MeasurementRecord | CSwapRecord) -> str:
    if isinstance(record, MeasurementRecord):
        head = _header("bellrecord", record.n_pairs, record.M, record.seed)
        table = np.array(list(LABEL_CHARS))[record.rounds]
    else:
        head = _header("cswaprecord", record.n, record.M, record.seed)
        table = np.array(["0", "1"])[record.rounds]
    lines = [head]
    if record.source:
        lines.append(f"# source: {record.source}")
    lines += ["".join(row) for row in table]
    return "\n".join(lines) + "\n"


def write_record(record: MeasurementRecord | CSwapRecord, path: str | Path) -> None:
    Path(path).write_text(format_record(record))


def parse_record(text: str) -> MeasurementRecord | CSwapRecord:
    """Parse a record file; malformed content raises RecordFormatError with a line number."""
    lines = text.splitlines()
    if not lines:
        raise RecordFormatError("line 1: empty record file")
    parts = lines[0].split()
    if len(parts) != 5 or parts[0] not in ("bellrecord", "cswaprecord") or parts[1] != "v1":
        raise RecordFormatError(f"line 1: bad header {lines[0]!r}")
    kind = parts[0]
    fields = {}
    for p in parts[2:]:
        key, sep, val = p.partition("=")
        if not sep or key not in ("n", "M", "seed"):
            raise RecordFormatError(f"line 1: bad header field {p!r}")
        fields[key] = val
    try:
        n, M = int(fields["n"]), int(fields["M"])
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise RecordFormatError(f"line 1: bad header {lines[0]!r}") from exc
    if n < 1 or M < 1:
        raise RecordFormatError("line 1: n and M must be positive")
    alphabet = _CHAR_TO_CODE if kind == "bellrecord" else {"0": 0, "1": 1}
    source = ""
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            if line.startswith("# source: ") and not rows:
                source = line[len("# source: "):]
            continue
        if len(line) != n:
            raise RecordFormatError(f"line {lineno}: expected {n} characters, got {len(line)}")
        try:
            rows.append([alphabet[c] for c in line])
        except KeyError as exc:
            raise RecordFormatError(f"line {lineno}: invalid character {exc.args[0]!r}") from None
    if len(rows) != M:
        raise RecordFormatError(f"header announces M={M} rounds but file has {len(rows)}")
    cls = MeasurementRecord if kind == "bellrecord" else CSwapRecord
    return cls(np.array(rows, dtype=np.int8), seed, source)


def read_record(path: str | Path) -> MeasurementRecord | CSwapRecord:
    return parse_record(Path(path).read_text())
