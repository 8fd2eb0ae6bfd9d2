"""Gate circuits on dense registers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from ..errors import InputError, InvalidSites, ShapeError
from .states import PureState, RegisterShape, as_shape, basis_state, embed_operator

UNITARY_TOL = 1e-10

_S2 = 1 / np.sqrt(2)
NAMED_GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
for _m in NAMED_GATES.values():
    _m.setflags(write=False)


@dataclass(frozen=True)
class Gate:
    matrix: np.ndarray
    sites: tuple[int, ...]
    name: str | None = None


@dataclass(frozen=True)
class Circuit:
    """Ordered list of unitary blocks acting on site tuples."""

    shape: RegisterShape
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        shape = as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        checked = []
        for g in self.gates:
            if not isinstance(g, Gate):
                mat, sites = g[0], g[1]
                name = None
                if isinstance(mat, str):
                    name, mat = mat.upper(), named_gate(mat)
                g = Gate(mat, tuple(sites), name)
            checked.append(_check_gate(g, shape))
        object.__setattr__(self, "gates", tuple(checked))

    def __len__(self):
        return len(self.gates)

    def then(self, other: "Circuit") -> "Circuit":
        if other.shape != self.shape:
            raise ShapeError("cannot concatenate circuits on different registers")
        return Circuit(self.shape, self.gates + other.gates)


def named_gate(name: str) -> np.ndarray:
    try:
        return NAMED_GATES[name.upper()]
    except KeyError:
        raise InputError(f"unknown gate {name!r}; known: {sorted(NAMED_GATES)}") from None


def _check_gate(g: Gate, shape: RegisterShape) -> Gate:
    try:
        sites = shape.check_sites(g.sites)
    except InvalidSites as exc:
        raise InvalidSites(f"gate {g.name or ''} sites {g.sites}: {exc}") from None
    mat = np.array(g.matrix, dtype=complex)
    dk = int(np.prod([shape.dims[s] for s in sites]))
    if mat.shape != (dk, dk):
        raise ShapeError(f"gate on sites {sites} needs a {dk}x{dk} matrix, got {mat.shape}")
    err = np.max(np.abs(mat.conj().T @ mat - np.eye(dk)))
    if err > UNITARY_TOL:
        raise InputError(f"gate on sites {sites} is not unitary (deviation {err:.3g})")
    mat.setflags(write=False)
    return Gate(mat, sites, g.name)


def apply_gate(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    """Contract a gate into a state tensor of shape ``dims``."""
    k = len(gate.sites)
    sub = [tensor.shape[s] for s in gate.sites]
    op = gate.matrix.reshape(sub + sub)
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(gate.sites)))
    return np.moveaxis(out, list(range(k)), list(gate.sites))


def apply_circuit(state: PureState, circuit: Circuit) -> PureState:
    if state.shape != circuit.shape:
        raise ShapeError(f"state dims {state.dims} do not match circuit dims {circuit.shape.dims}")
    t = state.tensor()
    for g in circuit.gates:
        t = apply_gate(t, g)
    vec = t.reshape(-1)
    drift = abs(np.vdot(vec, vec).real - 1.0)
    if drift > UNITARY_TOL:
        raise ShapeError(f"circuit changed the state norm by {drift:.3g}")
    return PureState.from_vector(state.shape, vec)


def run_circuit(circuit: Circuit, initial: str | None = None) -> PureState:
    """Apply ``circuit`` to ``|0...0>`` (or to the given basis label)."""
    labels = initial if initial is not None else "0" * circuit.shape.n_sites
    return apply_circuit(basis_state(circuit.shape, labels), circuit)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense product of embedded gate matrices (oracle for small registers)."""
    dims = circuit.shape.dims
    u = np.eye(circuit.shape.size, dtype=complex)
    for g in circuit.gates:
        u = embed_operator(g.matrix, g.sites, dims) @ u
    return u


def random_circuit(dims: Sequence[int], depth: int, rng: np.random.Generator,
                   two_site_fraction: float = 0.5) -> Circuit:
    """Seeded random circuit of Haar single-site and two-site unitaries."""
    shape = as_shape(dims)
    gates = []
    for _ in range(depth):
        if shape.n_sites > 1 and rng.random() < two_site_fraction:
            sites = tuple(int(s) for s in rng.choice(shape.n_sites, size=2, replace=False))
        else:
            sites = (int(rng.integers(shape.n_sites)),)
        dk = int(np.prod([shape.dims[s] for s in sites]))
        gates.append(Gate(unitary_group.rvs(dk, random_state=rng), sites))
    return Circuit(shape, tuple(gates))
