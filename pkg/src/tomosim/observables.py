"""Local observables and three routes to their expectation value.

* ``expectation_direct`` builds the dense operator and evaluates <psi|O|psi>;
  it is the brute-force reference.
* ``expectation_via_rdms`` sums ``Tr(O(sites) rho^{sites})`` over the terms
  using exact reduced density matrices.
* ``expectation_tomographic`` does the same contraction against
  tomographically reconstructed reduced states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError, LocalityCap, ShapeError, TooLarge
from .statecore import (
    DensityMatrix,
    PureState,
    RegisterShape,
    as_shape,
    embed_operator,
    label_matrix,
    parse_labels,
    partial_trace,
)
from .statecore.states import State
from .tomography import reconstruct_rdm

DIRECT_CAP = 2**10
LOCALITY_CAP = 3
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class LocalObservable:
    """Sum of Hermitian blocks, each acting on a sorted tuple of distinct sites."""

    shape: RegisterShape
    terms: tuple[tuple[tuple[int, ...], np.ndarray], ...]

    def __post_init__(self):
        shape = as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        checked = []
        for sites, block in self.terms:
            sites = shape.check_sites(sites)
            if list(sites) != sorted(sites):
                raise InputError(f"term sites must be sorted, got {sites}")
            block = np.array(block, dtype=complex)
            dk = int(np.prod([shape.dims[s] for s in sites]))
            if block.shape != (dk, dk):
                raise ShapeError(f"term on {sites} needs a {dk}x{dk} block, got {block.shape}")
            if np.max(np.abs(block - block.conj().T)) > HERMITIAN_TOL:
                raise InputError(f"term on {sites} is not Hermitian")
            block.setflags(write=False)
            checked.append((sites, block))
        object.__setattr__(self, "terms", tuple(checked))

    @property
    def locality(self) -> int:
        return max((len(s) for s, _ in self.terms), default=0)

    def site_tuples(self) -> list[tuple[int, ...]]:
        """Distinct site tuples in first-appearance order."""
        return list(dict.fromkeys(s for s, _ in self.terms))

    def scaled(self, alpha: float) -> "LocalObservable":
        return LocalObservable(self.shape, tuple((s, alpha * b) for s, b in self.terms))

    def __add__(self, other: "LocalObservable") -> "LocalObservable":
        if other.shape != self.shape:
            raise ShapeError("observables live on different registers")
        return LocalObservable(self.shape, self.terms + other.terms)

    def dense(self) -> np.ndarray:
        if self.shape.size > DIRECT_CAP:
            raise TooLarge(f"dense observable of dimension {self.shape.size} exceeds {DIRECT_CAP}")
        out = np.zeros((self.shape.size, self.shape.size), dtype=complex)
        for sites, block in self.terms:
            out += embed_operator(block, sites, self.shape.dims)
        return out


def pauli_term(dims, coeff: float, sites: Sequence[int], labels) -> tuple[tuple[int, ...], np.ndarray]:
    """``(sites, coeff * P)`` for a generalized Pauli product on ``sites``."""
    sites = tuple(sites)
    sub = [tuple(dims)[s] for s in sites]
    return sites, coeff * label_matrix(parse_labels(labels, sub), sub)


def pauli_observable(dims, terms: Iterable[tuple[float, Sequence[int], object]]) -> LocalObservable:
    """Observable from ``(coeff, sites, labels)`` triples, e.g. ``(1.0, (0, 1), "ZZ")``."""
    return LocalObservable(as_shape(dims), tuple(pauli_term(dims, c, s, l) for c, s, l in terms))


def all_pairs_observable(dims, block) -> LocalObservable:
    dims = tuple(dims)
    n = len(dims)
    return LocalObservable(as_shape(dims), tuple(((i, j), block) for i in range(n) for j in range(i + 1, n)))


def random_local_observable(dims, n_terms: int, rng: np.random.Generator, locality: int = 2) -> LocalObservable:
    dims = tuple(dims)
    terms = []
    for _ in range(n_terms):
        sites = tuple(sorted(int(s) for s in rng.choice(len(dims), size=locality, replace=False)))
        dk = int(np.prod([dims[s] for s in sites]))
        g = rng.normal(size=(dk, dk)) + 1j * rng.normal(size=(dk, dk))
        terms.append((sites, 0.5 * (g + g.conj().T)))
    return LocalObservable(as_shape(dims), tuple(terms))


@dataclass(frozen=True)
class ExpectationReport:
    value: float
    per_term: tuple[tuple[tuple[int, ...], float], ...]
    method: str
    shots: Optional[int] = None
    stderr: Optional[float] = None
    extra: dict = field(default_factory=dict, compare=False)


def _check_shape(state: State, obs: LocalObservable) -> None:
    if state.shape != obs.shape:
        raise ShapeError(f"state dims {state.dims} do not match observable dims {obs.shape.dims}")


def expectation_direct(state: State, obs: LocalObservable) -> float:
    _check_shape(state, obs)
    op = obs.dense()
    if isinstance(state, PureState):
        val = np.vdot(state.amplitudes, op @ state.amplitudes)
    else:
        val = np.trace(op @ state.matrix)
    if abs(val.imag) > 1e-10:
        raise InputError(f"expectation has imaginary part {val.imag:.3g}; observable not Hermitian")
    return float(val.real)


def expectation_via_rdms(state: State, obs: LocalObservable, max_locality: int = LOCALITY_CAP) -> ExpectationReport:
    _check_shape(state, obs)
    if obs.locality > max_locality:
        raise LocalityCap(f"observable locality {obs.locality} exceeds cap {max_locality}")
    cache: dict[tuple[int, ...], np.ndarray] = {}
    per_term = []
    for sites, block in obs.terms:
        if sites not in cache:
            cache[sites] = partial_trace(state, sites).matrix
        per_term.append((sites, float(np.einsum("ab,ba->", block, cache[sites]).real)))
    return ExpectationReport(float(sum(v for _, v in per_term)), tuple(per_term), "rdm")


def expectation_tomographic(state: State, obs: LocalObservable, shots: Optional[int], seed: int = 0,
                            max_locality: int = LOCALITY_CAP) -> ExpectationReport:
    """Contract every term against a tomographic estimate of its reduced state.

    Terms sharing a site tuple share one reconstruction, so their errors are
    combined before propagation; distinct tuples are sampled independently.
    ``shots=None`` uses exact moments.
    """
    _check_shape(state, obs)
    if obs.locality > max_locality:
        raise LocalityCap(f"observable locality {obs.locality} exceeds cap {max_locality}")
    estimates = {s: reconstruct_rdm(state, s, shots, seed, max_sites=max_locality) for s in obs.site_tuples()}
    per_term = [(sites, estimates[sites].contract(block)[0]) for sites, block in obs.terms]
    var = 0.0
    for sites, est in estimates.items():
        combined = sum(block for s, block in obs.terms if s == sites)
        var += est.contract(combined)[1] ** 2
    used = sum(e.shots_used for e in estimates.values())
    return ExpectationReport(float(sum(v for _, v in per_term)), tuple(per_term), "tomographic",
                             shots, float(np.sqrt(var)), {"shots_used": used, "estimates": estimates})


def setting_count(obs: LocalObservable, dims: Optional[Sequence[int]] = None) -> int:
    """Measurement settings used by the tomographic route: ``prod d^2 - 1`` per distinct tuple."""
    dims = obs.shape.dims if dims is None else tuple(dims)
    return sum(int(np.prod([dims[s] ** 2 for s in sites])) - 1 for sites in obs.site_tuples())
