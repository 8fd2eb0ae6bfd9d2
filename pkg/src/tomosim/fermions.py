"""Jordan-Wigner mapping of fermionic modes onto qubits.

Conventions: modes are 0-based, qubit ``|1>`` means the mode is occupied and
``n_j = (1 - Z_j)/2``. The creation operator maps to

    c_j^dag  ->  (-1)^j  Z_0 ... Z_{j-1}  s_j^+ ,   s^+ = |1><0| = (X - iY)/2

which is the textbook string with the extra per-mode sign ``(-1)^j``
(``(-1)^{j-1}`` in 1-based numbering). The sign cancels in every
number-conserving bilinear of a single mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidMode, NumericalInconsistency, ShapeError
from .observables import DIRECT_CAP, LocalObservable, expectation_direct
from .statecore import PureState, as_shape, label_matrix, partial_trace

MAX_VALIDATION_MODES = 6

# single-qubit Pauli product table: P_a P_b = phase * P_c, labels 0..3 = I, X, Y, Z
_PROD = {}
for _a in range(4):
    for _b in range(4):
        _m = label_matrix((_a,), (2,)) @ label_matrix((_b,), (2,))
        for _c in range(4):
            _ov = np.trace(label_matrix((_c,), (2,)) @ _m) / 2
            if abs(_ov) > 0.5:
                _PROD[_a, _b] = (complex(np.round(_ov.real) + 1j * np.round(_ov.imag)), _c)


class PauliSum(dict):
    """Qubit operator as ``{labels tuple: complex weight}``."""

    def __init__(self, n_qubits: int, terms=None):
        super().__init__(terms or {})
        self.n_qubits = n_qubits

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n_qubits)
        for la, ca in self.items():
            for lb, cb in other.items():
                phase = 1 + 0j
                lab = []
                for a, b in zip(la, lb):
                    p, c = _PROD[a, b]
                    phase *= p
                    lab.append(c)
                key = tuple(lab)
                out[key] = out.get(key, 0) + ca * cb * phase
        return out.simplify()

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.n_qubits, dict(self))
        for k, v in other.items():
            out[k] = out.get(k, 0) + v
        return out.simplify()

    def scale(self, c: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c * v for k, v in self.items()})

    def simplify(self, tol: float = 1e-14) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: v for k, v in self.items() if abs(v) > tol})

    def matrix(self) -> np.ndarray:
        dims = (2,) * self.n_qubits
        out = np.zeros((2**self.n_qubits,) * 2, dtype=complex)
        for lab, c in self.items():
            out += c * label_matrix(lab, dims)
        return out

    def strings(self) -> dict[str, complex]:
        return {"".join("IXYZ"[k] for k in lab): v for lab, v in sorted(self.items())}


@dataclass(frozen=True)
class FermionOperator:
    """Sum of products of ladder operators: ``[(coeff, ((mode, dagger), ...)), ...]``."""

    mode_count: int
    terms: tuple[tuple[complex, tuple[tuple[int, bool], ...]], ...]

    def __post_init__(self):
        terms = []
        for coeff, ops in self.terms:
            ops = tuple((int(j), bool(dag)) for j, dag in ops)
            for j, _ in ops:
                if not 0 <= j < self.mode_count:
                    raise InvalidMode(f"mode {j} out of range for {self.mode_count} modes")
            terms.append((complex(coeff), ops))
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def ladder(cls, mode_count: int, mode: int, dagger: bool) -> "FermionOperator":
        return cls(mode_count, ((1.0, ((mode, dagger),)),))

    @classmethod
    def number(cls, mode_count: int, mode: int) -> "FermionOperator":
        return cls(mode_count, ((1.0, ((mode, True), (mode, False))),))


def ladder_image(n: int, j: int, dagger: bool, mode_sign: bool = True) -> PauliSum:
    """Qubit image of ``c_j^dag`` (or ``c_j``) on ``n`` qubits; ``mode_sign=False`` drops ``(-1)^j``."""
    if not 0 <= j < n:
        raise InvalidMode(f"mode {j} out of range for {n} modes")
    string = [3] * j + [0] * (n - j)
    x_lab, y_lab = list(string), list(string)
    x_lab[j], y_lab[j] = 1, 2
    sign = (-1) ** j if mode_sign else 1
    # creation: (X - iY)/2 ; annihilation: (X + iY)/2
    y_coeff = -0.5j if dagger else 0.5j
    return PauliSum(n, {tuple(x_lab): 0.5 * sign, tuple(y_lab): y_coeff * sign})


def jw_map(op: FermionOperator, mode_sign: bool = True) -> PauliSum:
    n = op.mode_count
    total = PauliSum(n)
    for coeff, ops in op.terms:
        prod = PauliSum(n, {(0,) * n: 1.0})
        for j, dag in ops:
            prod = prod * ladder_image(n, j, dag, mode_sign)
        total = total + prod.scale(coeff)
    return total


@dataclass(frozen=True)
class CARReport:
    mode_count: int
    max_deviation: float
    worst_pair: tuple[int, int]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def validate_car(mode_count: int, tol: float = 1e-12, mode_sign: bool = True) -> CARReport:
    """Check ``{c_i, c_j^dag} = delta_ij`` and ``{c_i, c_j} = 0`` on dense matrices."""
    if not 1 <= mode_count <= MAX_VALIDATION_MODES:
        raise InvalidMode(f"validation supports 1..{MAX_VALIDATION_MODES} modes, got {mode_count}")
    n = mode_count
    ann = [ladder_image(n, j, False, mode_sign).matrix() for j in range(n)]
    eye = np.eye(2**n)
    worst, pair = 0.0, (0, 0)
    for i in range(n):
        for j in range(n):
            cdag = ann[j].conj().T
            dev1 = np.max(np.abs(ann[i] @ cdag + cdag @ ann[i] - (i == j) * eye))
            dev2 = np.max(np.abs(ann[i] @ ann[j] + ann[j] @ ann[i]))
            dev = max(dev1, dev2)
            if dev > worst:
                worst, pair = float(dev), (i, j)
    return CARReport(n, worst, pair, tol)


@dataclass(frozen=True)
class OneBodyEnergy:
    epsilons: tuple[float, ...]
    value: float
    direct_value: float
    occupations: tuple[float, ...]


def onebody_expectation(state: PureState, epsilons: Sequence[float], tol: float = 1e-12) -> OneBodyEnergy:
    """``<h>`` for ``h = sum_i eps_i n_i`` from single-site populations.

    The returned value is ``sum_i eps_i rho^i_{11}``; it is cross-checked
    against the full expectation of ``sum_i eps_i (1 - Z_i)/2``.
    """
    if any(d != 2 for d in state.dims):
        raise ShapeError("one-body expectation needs a qubit register")
    eps = tuple(float(e) for e in epsilons)
    if len(eps) != state.shape.n_sites:
        raise ShapeError(f"{len(eps)} energies for {state.shape.n_sites} modes")
    occ = tuple(float(partial_trace(state, (i,)).matrix[1, 1].real) for i in range(len(eps)))
    value = float(np.dot(eps, occ))
    number = np.array([[0, 0], [0, 1]], dtype=complex)
    if state.shape.size <= DIRECT_CAP:
        h = LocalObservable(state.shape, tuple(((i,), e * number) for i, e in enumerate(eps)))
        direct = expectation_direct(state, h)
    else:
        bits = np.array(np.unravel_index(np.arange(state.shape.size), state.dims)).T
        direct = float(np.abs(state.amplitudes) ** 2 @ (bits @ np.array(eps)))
    if abs(direct - value) > max(tol, 1e-12 * sum(abs(e) for e in eps)):
        raise NumericalInconsistency(f"population route {value!r} != direct route {direct!r}")
    return OneBodyEnergy(eps, value, direct, occ)


def fock_ladder_matrix(n: int, j: int, mode_sign: bool = True) -> np.ndarray:
    """Annihilator ``c_j`` built directly on occupation-number states.

    ``c_j |..1_j..> = sign * (-1)^{sum_{l<j} n_l} |..0_j..>``; an
    independent construction used to check the Pauli-string images.
    """
    dim = 2**n
    out = np.zeros((dim, dim))
    sign = (-1) ** j if mode_sign else 1
    for idx in range(dim):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[j] == 1:
            target = idx - (1 << (n - 1 - j))
            out[target, idx] = sign * (-1) ** sum(bits[:j])
    return out
