"""Generalized Gell-Mann bases, coherence vectors and operator labels."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from ..errors import InvalidDimension, InvalidLabel, ShapeError
from .states import DensityMatrix

QUBIT_LETTERS = "IXYZ"


@dataclass(frozen=True)
class OperatorBasis:
    """Traceless Hermitian basis with ``Tr(l_r l_t) = 2 delta_rt``.

    ``star_coeffs[r, s, t] = (d/4) Tr({l_r, l_s} l_t)``.
    """

    dim: int
    matrices: np.ndarray
    star_coeffs: np.ndarray

    def __len__(self):
        return self.dim**2 - 1


@lru_cache(maxsize=None)
def gellmann_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann matrices for dimension ``d``.

    Order: symmetric pairs, antisymmetric pairs, then diagonals, each
    lexicographic in (row, col). For ``d = 2`` this is (X, Y, Z).
    """
    if int(d) != d or d < 2:
        raise InvalidDimension(f"basis dimension must be an integer >= 2, got {d}")
    d = int(d)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    mats = []
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1.0
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag * np.sqrt(2.0 / (l * (l + 1)))).astype(complex))
    mats = np.array(mats)
    anti = np.einsum("rab,sbc->rsac", mats, mats)
    anti = anti + anti.transpose(1, 0, 2, 3)
    star = (d / 4.0) * np.einsum("rsab,tba->rst", anti, mats).real
    mats.setflags(write=False)
    star.setflags(write=False)
    return OperatorBasis(d, mats, star)


@lru_cache(maxsize=None)
def generalized_paulis(d: int) -> np.ndarray:
    """Identity followed by ``sqrt(d/2)`` times the Gell-Mann matrices.

    Every element P satisfies ``Tr(P P) = d``; for qubits these are I, X, Y, Z.
    """
    basis = gellmann_basis(d)
    out = np.concatenate([np.eye(d, dtype=complex)[None], np.sqrt(d / 2.0) * basis.matrices])
    out.setflags(write=False)
    return out


Labels = Union[str, Sequence[Union[int, str]]]


def parse_labels(labels: Labels, dims: Sequence[int]) -> tuple[int, ...]:
    """Label string/sequence to per-site generalized Pauli indices.

    Qubit sites accept the letters I, X, Y, Z. Any site accepts an integer
    index ``0 <= k < d**2`` (0 is the identity).
    """
    if isinstance(labels, str):
        tokens = list(labels)
    else:
        tokens = list(labels)
    if len(tokens) != len(dims):
        raise InvalidLabel(f"{len(tokens)} labels for {len(dims)} sites")
    out = []
    for tok, d in zip(tokens, dims):
        if isinstance(tok, str) and tok.upper() in QUBIT_LETTERS and not tok.isdigit():
            if d != 2:
                raise InvalidLabel(f"letter label {tok!r} only valid on qubit sites")
            k = QUBIT_LETTERS.index(tok.upper())
        else:
            try:
                k = int(tok)
            except (TypeError, ValueError) as exc:
                raise InvalidLabel(f"bad label {tok!r}") from exc
        if not 0 <= k < d * d:
            raise InvalidLabel(f"label {k} out of range for local dimension {d}")
        out.append(k)
    return tuple(out)


def format_labels(labels: Sequence[int], dims: Sequence[int]) -> str:
    if all(d == 2 for d in dims):
        return "".join(QUBIT_LETTERS[k] for k in labels)
    return ".".join(str(k) for k in labels)


def label_matrix(labels: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k, d in zip(labels, dims):
        out = np.kron(out, generalized_paulis(d)[k])
    return out


@dataclass(frozen=True)
class CoherenceVector:
    """Real components of ``rho = (1/d)(I + m . lambda)``."""

    dim: int
    components: np.ndarray

    def norm2(self) -> float:
        return float(self.components @ self.components)

    def recompose(self) -> np.ndarray:
        basis = gellmann_basis(self.dim)
        return (np.eye(self.dim) + np.einsum("r,rab->ab", self.components, basis.matrices)) / self.dim

    def to_density(self) -> DensityMatrix:
        return DensityMatrix((self.dim,), self.recompose())


def bloch_decompose(rho: DensityMatrix, basis: OperatorBasis | None = None) -> CoherenceVector:
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = mat.shape[0]
    basis = gellmann_basis(d) if basis is None else basis
    if basis.dim != d:
        raise ShapeError(f"density matrix dimension {d} does not match basis dimension {basis.dim}")
    m = (d / 2.0) * np.einsum("ab,rba->r", mat, basis.matrices).real
    return CoherenceVector(d, m)
