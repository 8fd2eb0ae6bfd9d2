"""Kraus channels and the conditions under which QST-based estimates are unaffected by noise.

Qubit Kraus operators are written in Pauli-affine form ``A = alpha I + a . sigma``.
For ``O = Z`` and ``rho = |0><0|`` the expectation after a channel splits as

    <Z> = sum_k |alpha_k + a_k3|^2  +  sum_k [ i (a_k x a_k*)_3 - |a_k1|^2 - |a_k2|^2 ]

(the first part is the |0> population, the second minus the |1> population).
``qubit_condition_check`` evaluates the difference of each part between two
channels; their sum is the signed expectation difference.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, InvalidChannel, InvalidDimension, ShapeError
from .statecore import (
    DensityMatrix,
    PureState,
    as_shape,
    gellmann_basis,
    named_gate,
    partial_trace,
    trace_distance,
)
from .statecore.states import embed_operator, to_density
from .tomography import reconstruct_rdm

CHANNEL_TOL = 1e-10
PAULIS = np.array([named_gate("X"), named_gate("Y"), named_gate("Z")])


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        ops = [np.array(a, dtype=complex) for a in self.operators]
        if not ops:
            raise InvalidChannel("channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for a in ops:
            if a.shape != (d, d):
                raise InvalidChannel(f"Kraus operators must all be {d}x{d}, got {a.shape}")
        dev = np.max(np.abs(sum(a.conj().T @ a for a in ops) - np.eye(d)))
        if dev > CHANNEL_TOL:
            raise InvalidChannel(f"sum A^dag A deviates from identity by {dev:.3g}")
        for a in ops:
            a.setflags(write=False)
        object.__setattr__(self, "operators", tuple(ops))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """Channel that applies ``first`` and then ``self``."""
        return KrausChannel(tuple(b @ a for b in self.operators for a in first.operators),
                            f"{self.name}*{first.name}")


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(d),), "identity")


def dephasing(p: float) -> KrausChannel:
    """Phase flip with probability ``p``: ``{sqrt(1-p) I, sqrt(p) Z}``."""
    return KrausChannel((np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * PAULIS[2]), f"dephasing({p})")


def bitflip(p: float) -> KrausChannel:
    return KrausChannel((np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * PAULIS[0]), f"bitflip({p})")


def depolarizing(p: float) -> KrausChannel:
    ops = [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * s for s in PAULIS]
    return KrausChannel(tuple(ops), f"depolarizing({p})")


def amplitude_damping(gamma: float) -> KrausChannel:
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return KrausChannel((a0, a1), f"amplitude_damping({gamma})")


def unitary_channel(u) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=complex),), "unitary")


NAMED_CHANNELS = {
    "identity": lambda p=None: identity_channel(2),
    "dephasing": dephasing,
    "bitflip": bitflip,
    "depolarizing": depolarizing,
    "amplitude_damping": amplitude_damping,
}


def random_channel(d: int, n_ops: int, rng: np.random.Generator) -> KrausChannel:
    """Random CPTP map: slices of a Haar-ish isometry from a QR decomposition."""
    g = rng.normal(size=(d * n_ops, d)) + 1j * rng.normal(size=(d * n_ops, d))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[k * d:(k + 1) * d] for k in range(n_ops)), "random")


def local_channel(ch: KrausChannel, site: int, dims: Sequence[int]) -> KrausChannel:
    """Embed a single-site channel into a register."""
    return KrausChannel(tuple(embed_operator(a, (site,), dims) for a in ch.operators), f"{ch.name}@{site}")


def product_channel(ch: KrausChannel, dims: Sequence[int]) -> KrausChannel:
    """The same single-site channel acting independently on every site."""
    total = identity_channel(int(np.prod(dims)))
    for s in range(len(dims)):
        total = local_channel(ch, s, dims).compose(total)
    return KrausChannel(total.operators, f"{ch.name}^all")


def residual_channel(noisy: KrausChannel, ideal_unitary) -> KrausChannel:
    """``W = V U^dag``: the non-ideal process with the ideal unitary undone first."""
    udag = np.asarray(ideal_unitary, dtype=complex).conj().T
    return KrausChannel(tuple(a @ udag for a in noisy.operators), f"residual({noisy.name})")


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x, dtype=complex)


def apply_channel(rho, ch: KrausChannel) -> DensityMatrix:
    rho = to_density(rho) if isinstance(rho, PureState) else rho
    mat = _matrix(rho)
    if mat.shape != (ch.dim, ch.dim):
        raise ShapeError(f"channel dimension {ch.dim} does not match state dimension {mat.shape[0]}")
    out = sum(a @ mat @ a.conj().T for a in ch.operators)
    shape = rho.shape if isinstance(rho, DensityMatrix) else as_shape((ch.dim,))
    return DensityMatrix(shape, out)


def adjoint_map(obs, ch: KrausChannel) -> np.ndarray:
    """Heisenberg-picture action ``sum_i A_i^dag O A_i``."""
    o = np.asarray(obs, dtype=complex)
    if o.shape != (ch.dim, ch.dim):
        raise ShapeError(f"channel dimension {ch.dim} does not match observable {o.shape}")
    return sum(a.conj().T @ o @ a for a in ch.operators)


def signed_defect(obs, rho, ch_a: KrausChannel, ch_b: KrausChannel) -> float:
    diff = adjoint_map(obs, ch_a) - adjoint_map(obs, ch_b)
    return float(np.trace(diff @ _matrix(rho)).real)


def invariance_defect(obs, rho, ch_a: KrausChannel, ch_b: KrausChannel) -> float:
    """``|<O>_A - <O>_B|`` for the two channels acting on ``rho``."""
    return abs(signed_defect(obs, rho, ch_a, ch_b))


# ---------------------------------------------------------------- marginals

@dataclass(frozen=True)
class MarginalReport:
    locality: int
    distances: dict
    max_distance: float
    tolerance: float
    constraint_count: int

    @property
    def passed(self) -> bool:
        return self.max_distance <= self.tolerance


def marginal_invariance_check(rho_ideal, rho_actual, max_locality: int = 1, tol: float = 1e-10,
                              shots: Optional[int] = None, seed: int = 0) -> MarginalReport:
    """Largest trace distance between corresponding single-site (or pair) marginals.

    With ``shots`` set, both marginals are tomographic estimates and the
    pass threshold becomes five propagated standard errors of the distance.
    """
    rho_ideal, rho_actual = to_density(rho_ideal), to_density(rho_actual)
    if rho_ideal.shape != rho_actual.shape:
        raise ShapeError(f"states have different shapes {rho_ideal.dims} vs {rho_actual.dims}")
    if max_locality not in (1, 2):
        raise InputError("max_locality must be 1 or 2")
    dims = rho_ideal.dims
    tuples = list(itertools.combinations(range(len(dims)), max_locality))
    distances = {}
    bound = 0.0
    for sites in tuples:
        if shots is None:
            a, b = partial_trace(rho_ideal, sites), partial_trace(rho_actual, sites)
        else:
            ea = reconstruct_rdm(rho_ideal, sites, shots, seed)
            eb = reconstruct_rdm(rho_actual, sites, shots, seed + 1)
            a, b = ea.rho_hat, eb.rho_hat
            se2 = sum(m.stderr**2 for m in ea.moments) + sum(m.stderr**2 for m in eb.moments)
            bound = max(bound, 0.5 * np.sqrt(se2))
        distances[sites] = trace_distance(a, b)
    count = sum(int(np.prod([dims[s] ** 2 for s in t])) - 1 for t in tuples)
    threshold = tol if shots is None else max(tol, 5 * bound)
    return MarginalReport(max_locality, distances, max(distances.values()), threshold, count)


def dephased_bell_state(pop0: float, coherence: complex) -> DensityMatrix:
    """``|a|^2 |00><00| + |b|^2 |11><11| + C |00><11| + C* |11><00|``."""
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0], mat[3, 3] = pop0, 1 - pop0
    mat[0, 3], mat[3, 0] = coherence, np.conj(coherence)
    return DensityMatrix((2, 2), mat)


def dephased_bell_family(pop0: float, points: int = 21) -> list[tuple[float, DensityMatrix]]:
    """States from complete phase damping (C = 0) up to the pure state (C = ab*)."""
    c_max = np.sqrt(pop0 * (1 - pop0))
    return [(float(c), dephased_bell_state(pop0, c)) for c in np.linspace(0.0, c_max, points)]


# ---------------------------------------------------------- qubit algebra

@dataclass(frozen=True)
class PauliAffineForm:
    alpha: complex
    a: np.ndarray

    def recompose(self) -> np.ndarray:
        return self.alpha * np.eye(2) + np.einsum("t,tab->ab", self.a, PAULIS)


def pauli_affine(op) -> PauliAffineForm:
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise InvalidDimension("Pauli-affine form needs a 2x2 operator")
    return PauliAffineForm(complex(np.trace(op) / 2), np.einsum("tab,ba->t", PAULIS, op) / 2)


def completeness_residuals(ch: KrausChannel) -> tuple[float, np.ndarray]:
    """Pauli-affine form of ``sum A^dag A = I``.

    Returns ``sum(|alpha|^2 + a.a*) - 1`` and the vector
    ``sum(alpha a_t* + alpha* a_t + i (a* x a)_t)``; both vanish for a channel.
    """
    if ch.dim != 2:
        raise InvalidDimension("completeness residuals are defined for qubit channels")
    scalar, vec = -1.0, np.zeros(3)
    for f in map(pauli_affine, ch.operators):
        scalar += abs(f.alpha) ** 2 + float(np.vdot(f.a, f.a).real)
        vec = vec + (f.alpha * f.a.conj() + f.alpha.conjugate() * f.a + 1j * np.cross(f.a.conj(), f.a)).real
    return float(scalar), vec


def _transverse(forms) -> float:
    return float(sum((1j * np.cross(f.a, f.a.conj())[2]).real - abs(f.a[0]) ** 2 - abs(f.a[1]) ** 2
                     for f in forms))


def _longitudinal(forms) -> float:
    return float(sum(abs(f.alpha + f.a[2]) ** 2 for f in forms))


@dataclass(frozen=True)
class QubitConditionReport:
    forms_a: tuple[PauliAffineForm, ...]
    forms_b: tuple[PauliAffineForm, ...]
    transverse_residual: float
    longitudinal_residual: float
    defect: float
    tolerance: float = 1e-10

    @property
    def combined_residual(self) -> float:
        return self.transverse_residual + self.longitudinal_residual

    @property
    def consistent(self) -> bool:
        return abs(abs(self.combined_residual) - self.defect) <= self.tolerance

    @property
    def invariant(self) -> bool:
        return self.defect <= self.tolerance


def qubit_condition_check(ch_a: KrausChannel, ch_b: KrausChannel) -> QubitConditionReport:
    """Both qubit conditions for ``O = Z`` and ``rho = (I + Z)/2``, plus the direct defect."""
    if ch_a.dim != 2 or ch_b.dim != 2:
        raise InvalidDimension("qubit_condition_check needs single-qubit channels")
    fa = tuple(map(pauli_affine, ch_a.operators))
    fb = tuple(map(pauli_affine, ch_b.operators))
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    return QubitConditionReport(
        fa, fb,
        _transverse(fa) - _transverse(fb),
        _longitudinal(fa) - _longitudinal(fb),
        invariance_defect(PAULIS[2], rho0, ch_a, ch_b),
    )


# -------------------------------------------------------------- little group

@dataclass(frozen=True)
class LittleGroupReport:
    angles: tuple[float, ...]
    defects: tuple[float, ...]

    @property
    def max_defect(self) -> float:
        return max(self.defects, default=0.0)


def rotation(generator, angle: float) -> np.ndarray:
    """``exp(i angle G/(2||G||))``: for a Pauli generator, a Bloch rotation by ``angle``."""
    g = np.asarray(generator, dtype=complex)
    g = g / np.linalg.norm(g, 2)
    evals, vecs = np.linalg.eigh(g)
    return (vecs * np.exp(0.5j * angle * evals)) @ vecs.conj().T


def little_group_probe(obs, rho, angles: Sequence[float], generator=None) -> LittleGroupReport:
    """Defect of unitary rotations relative to doing nothing.

    ``generator`` defaults to the observable itself, whose rotations leave
    the expectation invariant for every state.
    """
    o = np.asarray(obs, dtype=complex)
    gen = o if generator is None else np.asarray(generator, dtype=complex)
    ident = identity_channel(o.shape[0])
    defects = tuple(invariance_defect(o, rho, unitary_channel(rotation(gen, th)), ident) for th in angles)
    return LittleGroupReport(tuple(float(a) for a in angles), defects)


# ------------------------------------------------------ tripartite Bloch form

@dataclass(frozen=True)
class TripartiteBlochForm:
    """Local coherence vectors of subsystems A, B, E and an observable direction on A.

    Components are ``a_r = Tr(rho_A l_r)`` so that ``<n . l> = n . a``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n: np.ndarray

    def expectation(self) -> float:
        return float(self.n @ self.a)

    def angle_form(self) -> tuple[float, float]:
        """``(|a|, cos theta)`` with theta the angle between ``a`` and ``n``."""
        na = np.linalg.norm(self.a)
        cos = 0.0 if na == 0 else float(self.n @ self.a / (np.linalg.norm(self.n) * na))
        return float(na), cos


def tripartite_form(rho, dims: Sequence[int], n) -> TripartiteBlochForm:
    """Extract the local A, B, E vectors from a state on ``dims = (dA, dB, dE)``."""
    rho = to_density(rho)
    if len(dims) != 3 or tuple(rho.dims) != tuple(dims):
        raise ShapeError(f"tripartite form needs a 3-site register matching {dims}, got {rho.dims}")
    vecs = []
    for site, d in enumerate(dims):
        red = partial_trace(rho, (site,)).matrix
        vecs.append(np.einsum("ab,rba->r", red, gellmann_basis(d).matrices).real)
    n = np.asarray(n, dtype=float)
    if n.shape != vecs[0].shape:
        raise ShapeError(f"direction vector must have length {dims[0] ** 2 - 1}")
    return TripartiteBlochForm(vecs[0], vecs[1], vecs[2], n)


def projection_condition(ideal: TripartiteBlochForm, actual: TripartiteBlochForm) -> float:
    """``n . a - n . a^I``; zero when the noisy run reproduces the ideal expectation."""
    return float(actual.n @ actual.a - ideal.n @ ideal.a)

