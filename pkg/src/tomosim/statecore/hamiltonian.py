"""Generalized-Pauli Hamiltonians, exact propagators and first-order Trotter circuits.

Evolution sign: the default ``sign=+1`` gives ``U = exp(+iHt)``. Pass
``sign=-1`` for the usual ``exp(-iHt)`` physics convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError, TooLarge
from .basis import Labels, format_labels, label_matrix, parse_labels
from .circuits import Circuit, Gate
from .states import RegisterShape, as_shape

MAX_TERMS = 4096
PROPAGATOR_CAP = 2**12


@dataclass(frozen=True)
class PauliStringHamiltonian:
    """``H = sum_k c_k P_k`` with each ``P_k`` a tensor product of generalized Paulis."""

    shape: RegisterShape
    terms: tuple[tuple[float, tuple[int, ...]], ...]
    max_terms: int = MAX_TERMS

    def __post_init__(self):
        shape = as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        if len(self.terms) > self.max_terms:
            raise TooLarge(f"{len(self.terms)} terms exceeds the {self.max_terms}-term bound")
        terms = []
        for coeff, labels in self.terms:
            c = complex(coeff)
            if abs(c.imag) > 0:
                raise InputError(f"Hamiltonian coefficients must be real, got {coeff!r}")
            terms.append((float(c.real), parse_labels(labels, shape.dims)))
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def from_strings(cls, dims, terms: Sequence[tuple[float, Labels]]) -> "PauliStringHamiltonian":
        return cls(as_shape(dims), tuple((c, l) for c, l in terms))

    def matrix(self) -> np.ndarray:
        if self.shape.size > PROPAGATOR_CAP:
            raise TooLarge(f"dense Hamiltonian of dimension {self.shape.size} exceeds {PROPAGATOR_CAP}")
        h = np.zeros((self.shape.size, self.shape.size), dtype=complex)
        for c, labels in self.terms:
            h += c * label_matrix(labels, self.shape.dims)
        return h

    def describe(self) -> list[tuple[float, str]]:
        return [(c, format_labels(l, self.shape.dims)) for c, l in self.terms]


def _hermitian_exp(h: np.ndarray, phase: float) -> np.ndarray:
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * phase * evals)) @ vecs.conj().T


def exact_propagator(h: PauliStringHamiltonian, t: float, sign: int = 1) -> np.ndarray:
    """Dense ``exp(sign * i H t)`` via eigendecomposition."""
    if h.shape.size > PROPAGATOR_CAP:
        raise TooLarge(f"propagator dimension {h.shape.size} exceeds the {PROPAGATOR_CAP} oracle cap")
    return _hermitian_exp(h.matrix(), sign * t)


def trotterize(h: PauliStringHamiltonian, t: float, steps: int, sign: int = 1) -> Circuit:
    """First-order product formula: ``(prod_k exp(sign i c_k P_k t/steps))^steps``.

    Each term becomes one gate on its non-identity support, so the circuit
    has ``len(h.terms) * steps`` gates. Identity-only terms become a global
    phase gate on site 0.
    """
    if steps < 1:
        raise InputError("steps must be >= 1")
    dims = h.shape.dims
    dt = t / steps
    layer = []
    for c, labels in h.terms:
        support = tuple(s for s, k in enumerate(labels) if k != 0)
        if not support:
            gate = Gate(np.exp(1j * sign * c * dt) * np.eye(dims[0]), (0,))
        else:
            sub_labels = [labels[s] for s in support]
            block = label_matrix(sub_labels, [dims[s] for s in support])
            gate = Gate(_hermitian_exp(c * block, sign * dt), support)
        layer.append(gate)
    return Circuit(h.shape, tuple(layer) * steps)


def heisenberg_hamiltonian(n: int, rng: np.random.Generator | None = None,
                           fields: bool = True) -> PauliStringHamiltonian:
    """Open-chain XYZ Heisenberg model on ``n`` qubits.

    With an ``rng`` the couplings and longitudinal fields are drawn from
    U(0.5, 1.5); otherwise all couplings are 1 and there are no fields.
    """
    terms = []
    for i in range(n - 1):
        for p in "XYZ":
            lab = ["I"] * n
            lab[i] = lab[i + 1] = p
            c = 1.0 if rng is None else float(rng.uniform(0.5, 1.5))
            terms.append((c, "".join(lab)))
    if fields and rng is not None:
        for i in range(n):
            lab = ["I"] * n
            lab[i] = "Z"
            terms.append((float(rng.uniform(0.5, 1.5)), "".join(lab)))
    return PauliStringHamiltonian.from_strings((2,) * n, terms)
