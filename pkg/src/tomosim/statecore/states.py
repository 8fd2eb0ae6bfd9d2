"""Dense register states, density matrices and the partial trace.

Index convention: site 0 is the most significant mixed-radix digit, so the
basis label ``"12"`` on dims ``(2, 3)`` lives at index ``1*3 + 2 = 5``. All
site indices in the Python API and in the JSON formats are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ..errors import (
    InvalidDensityMatrix,
    InvalidDimension,
    InvalidLabel,
    InvalidSites,
    ShapeError,
    TooLarge,
)

MAX_AMPLITUDES = 2**20
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class RegisterShape:
    """Per-site local dimensions of a mixed-dimension qudit register."""

    dims: tuple[int, ...]
    cap: int = field(default=MAX_AMPLITUDES, compare=False, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise InvalidDimension("register needs at least one site")
        if any(d < 2 for d in dims):
            raise InvalidDimension(f"every local dimension must be >= 2, got {dims}")
        if int(np.prod(dims, dtype=object)) > self.cap:
            raise TooLarge(f"register {dims} exceeds the {self.cap}-amplitude cap")

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def subshape(self, sites: Sequence[int]) -> "RegisterShape":
        return RegisterShape(tuple(self.dims[s] for s in sites))

    def check_sites(self, sites: Sequence[int], allow_empty: bool = False) -> tuple[int, ...]:
        sites = tuple(int(s) for s in sites)
        if not sites and not allow_empty:
            raise InvalidSites("site tuple is empty")
        if len(set(sites)) != len(sites):
            raise InvalidSites(f"repeated site in {sites}")
        for s in sites:
            if not 0 <= s < self.n_sites:
                raise InvalidSites(f"site {s} out of range for {self.n_sites} sites")
        return sites


def as_shape(dims: Union[RegisterShape, Sequence[int]]) -> RegisterShape:
    return dims if isinstance(dims, RegisterShape) else RegisterShape(tuple(dims))


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over a register."""

    shape: RegisterShape
    amplitudes: np.ndarray

    def __post_init__(self):
        shape = as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != shape.size:
            raise ShapeError(f"expected {shape.size} amplitudes, got {amps.size}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ShapeError(f"state is not normalized (norm^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, dims, vector, normalize: bool = True) -> "PureState":
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            nrm = np.linalg.norm(vec)
            if nrm == 0:
                raise ShapeError("cannot normalize the zero vector")
            vec = vec / nrm
        return cls(as_shape(dims), vec)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on a register."""

    shape: RegisterShape
    matrix: np.ndarray

    def __post_init__(self):
        shape = as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (shape.size, shape.size):
            raise ShapeError(f"expected a {shape.size}x{shape.size} matrix, got {mat.shape}")
        herm_err = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
        if herm_err > HERMITIAN_TOL:
            raise InvalidDensityMatrix(f"matrix is not Hermitian (max deviation {herm_err:.3g})")
        mat = 0.5 * (mat + mat.conj().T)
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidDensityMatrix(f"trace is {tr!r}, expected 1")
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < -PSD_TOL:
            raise InvalidDensityMatrix(f"matrix has negative eigenvalue {lo:.3g}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    @property
    def dim(self) -> int:
        return self.shape.size

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


State = Union[PureState, DensityMatrix]


def to_density(source: State) -> DensityMatrix:
    return source.density_matrix() if isinstance(source, PureState) else source


def encode_index(dims: Sequence[int], digits: Sequence[int]) -> int:
    idx = 0
    for d, k in zip(dims, digits):
        idx = idx * d + k
    return idx


def basis_state(shape, labels: Union[str, Sequence[int]]) -> PureState:
    """Computational basis state from a digit string such as ``"0110"``."""
    shape = as_shape(shape)
    if isinstance(labels, str):
        try:
            digits = [int(ch, 36) for ch in labels]
        except ValueError as exc:
            raise InvalidLabel(f"bad digit in {labels!r}") from exc
    else:
        digits = [int(k) for k in labels]
    if len(digits) != shape.n_sites:
        raise InvalidLabel(f"label {labels!r} has {len(digits)} digits, register has {shape.n_sites}")
    for d, k in zip(shape.dims, digits):
        if not 0 <= k < d:
            raise InvalidLabel(f"digit {k} out of range for local dimension {d}")
    amps = np.zeros(shape.size, dtype=complex)
    amps[encode_index(shape.dims, digits)] = 1.0
    return PureState(shape, amps)


def random_state(dims, rng: np.random.Generator) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    shape = as_shape(dims)
    vec = rng.normal(size=shape.size) + 1j * rng.normal(size=shape.size)
    return PureState.from_vector(shape, vec)


def random_density_matrix(dims, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    shape = as_shape(dims)
    rank = shape.size if rank is None else rank
    g = rng.normal(size=(shape.size, rank)) + 1j * rng.normal(size=(shape.size, rank))
    rho = g @ g.conj().T
    return DensityMatrix(shape, rho / np.trace(rho).real)


def partial_trace(source: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (in the given order)."""
    shape = source.shape
    keep = shape.check_sites(keep)
    rest = tuple(s for s in range(shape.n_sites) if s not in keep)
    dk = int(np.prod([shape.dims[s] for s in keep]))
    sub = shape.subshape(keep)
    if isinstance(source, PureState):
        mat = np.transpose(source.tensor(), keep + rest).reshape(dk, -1)
        return DensityMatrix(sub, mat @ mat.conj().T)
    n = shape.n_sites
    t = source.matrix.reshape(shape.dims * 2)
    perm = keep + rest + tuple(n + s for s in keep) + tuple(n + s for s in rest)
    dr = shape.size // dk
    t = np.transpose(t, perm).reshape(dk, dr, dk, dr)
    return DensityMatrix(sub, np.einsum("iaja->ij", t))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits, with 0 log 0 taken as 0."""
    evals = np.linalg.eigvalsh(rho.matrix)
    if evals[0] < -PSD_TOL:
        raise InvalidDensityMatrix(f"negative eigenvalue {evals[0]:.3g}")
    p = evals[evals > 0]
    return max(float(-np.sum(p * np.log2(p))), 0.0) + 0.0


def purity(rho: DensityMatrix) -> float:
    m = rho.matrix
    return float(np.real(np.vdot(m.conj().T, m)))


def trace_distance(a, b) -> float:
    ma = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a)
    mb = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b)
    diff = ma - mb
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def embed_operator(block, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Dense full-register matrix of ``block`` acting on ``sites``.

    Built by explicit index arithmetic rather than Kronecker products, so it
    can serve as an independent oracle for the tensor-contraction paths.
    """
    dims = tuple(dims)
    sites = tuple(sites)
    block = np.asarray(block, dtype=complex)
    total = int(np.prod(dims))
    sub = [dims[s] for s in sites]
    dk = int(np.prod(sub)) if sites else 1
    if block.shape != (dk, dk):
        raise ShapeError(f"block shape {block.shape} does not match sites {sites} with dims {sub}")
    rows = np.arange(total)
    digits = np.array(np.unravel_index(rows, dims)).T  # (total, N)
    strides = np.array([int(np.prod(dims[s + 1:])) for s in range(len(dims))], dtype=np.int64)
    sub_strides = np.array([int(np.prod(sub[k + 1:])) for k in range(len(sub))], dtype=np.int64)
    row_sub = digits[:, list(sites)] @ sub_strides if sites else np.zeros(total, dtype=np.int64)
    base = rows - (digits[:, list(sites)] @ strides[list(sites)] if sites else 0)
    out = np.zeros((total, total), dtype=complex)
    col_digits = np.array(np.unravel_index(np.arange(dk), sub)).T if sites else np.zeros((1, 0), int)
    for c in range(dk):
        cols = base + (col_digits[c] @ strides[list(sites)] if sites else 0)
        out[rows, cols] = block[row_sub, c]
    return out
