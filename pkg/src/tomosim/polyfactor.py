"""Linear and block factors of homogeneous multilinear polynomials.

A polynomial with exactly one symbol per site in each monomial is the same
object as a register state: ``x_i`` is digit 0 at site ``i`` and ``y_i`` is
digit 1 (qudit sites use digits directly). A factor ``a x_i + b y_i`` exists
exactly when site ``i`` is in a pure state, i.e. when its reduced density
matrix has zero entropy, and ``(a, b)`` is then that pure state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    InputError,
    InvalidLabel,
    InvalidTolerance,
    NumericalInconsistency,
    TooLarge,
    TooManySites,
    ZeroInput,
)
from .statecore import (
    CoherenceVector,
    OperatorBasis,
    PureState,
    apply_circuit,
    basis_state,
    gellmann_basis,
    partial_trace,
    random_circuit,
    random_state,
    von_neumann_entropy,
)
from .tomography import entropy_with_stderr, reconstruct_rdm

EXACT_TOL = 1e-10
SAMPLED_TOL = 0.05
FACTORIZE_CAP = 12
ORACLE_CAP = 8
MAX_BLOCK_SITES = 3


def _symbol_digit(ch: str, d: int) -> int:
    if d == 2 and ch in "xy":
        return "xy".index(ch)
    try:
        k = int(ch, 36)
    except ValueError:
        raise InvalidLabel(f"unknown monomial symbol {ch!r}") from None
    if not 0 <= k < d:
        raise InvalidLabel(f"symbol {ch!r} out of range for {d} symbols")
    return k


@dataclass(frozen=True, eq=False)
class MultilinearPolynomial:
    """Coefficient map from per-site symbol choices to complex numbers."""

    site_dims: tuple[int, ...]
    coeffs: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        object.__setattr__(self, "site_dims", dims)
        clean = {}
        for mono, c in self.coeffs.items():
            mono = tuple(int(k) for k in mono)
            if len(mono) != len(dims) or any(not 0 <= k < d for k, d in zip(mono, dims)):
                raise InvalidLabel(f"monomial {mono} does not fit site dims {dims}")
            c = complex(c)
            if c != 0:
                clean[mono] = clean.get(mono, 0) + c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_monomials(cls, site_dims: Sequence[int], monomials: Mapping[Union[str, tuple], complex]):
        """Build from e.g. ``{"xy": 1, "yy": 1}`` (x1*y2 + y1*y2)."""
        dims = tuple(site_dims)
        coeffs: dict = {}
        for key, c in monomials.items():
            if isinstance(key, str):
                if len(key) != len(dims):
                    raise InvalidLabel(f"monomial {key!r} needs {len(dims)} symbols")
                key = tuple(_symbol_digit(ch, d) for ch, d in zip(key, dims))
            coeffs[tuple(key)] = coeffs.get(tuple(key), 0) + c
        return cls(dims, coeffs)

    @property
    def variable_count(self) -> int:
        return len(self.site_dims)

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values())))

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(int(np.prod(self.site_dims)), dtype=complex)
        for mono, c in self.coeffs.items():
            vec[np.ravel_multi_index(mono, self.site_dims)] = c
        return vec

    def symbols(self, mono: tuple[int, ...]) -> str:
        return "".join("xy"[k] if d == 2 else np.base_repr(k, 36).lower() for k, d in zip(mono, self.site_dims))

    def to_string(self, names: Optional[Sequence[int]] = None) -> str:
        names = range(1, self.variable_count + 1) if names is None else [n + 1 for n in names]
        parts = []
        for mono, c in self.coeffs.items():
            body = "*".join(
                (("xy"[k] if d == 2 else f"z{k}_") + str(n)) for k, d, n in zip(mono, self.site_dims, names)
            )
            parts.append(body if np.isclose(c, 1) else f"({c.real:.6g}{c.imag:+.6g}j)*{body}")
        return " + ".join(parts) if parts else "0"

    def isclose(self, other: "MultilinearPolynomial", tol: float = 1e-12) -> bool:
        if other.site_dims != self.site_dims:
            return False
        return bool(np.max(np.abs(self.to_vector() - other.to_vector()), initial=0.0) <= tol)

    def __eq__(self, other):
        return isinstance(other, MultilinearPolynomial) and self.site_dims == other.site_dims \
            and self.coeffs == other.coeffs


def poly_to_state(p: MultilinearPolynomial) -> PureState:
    """Normalized register state whose amplitudes are the coefficients; scale is ``p.norm()``."""
    nrm = p.norm()
    if nrm == 0:
        raise ZeroInput("the zero polynomial has no state")
    return PureState(p.site_dims, p.to_vector() / nrm)


def state_to_poly(state: Union[PureState, np.ndarray], scale: complex = 1.0,
                  site_dims: Optional[Sequence[int]] = None) -> MultilinearPolynomial:
    if isinstance(state, PureState):
        dims, vec = state.dims, state.amplitudes
    else:
        vec = np.asarray(state, dtype=complex).reshape(-1)
        dims = tuple(site_dims)
    coeffs = {tuple(int(k) for k in np.unravel_index(i, dims)): scale * vec[i] for i in np.flatnonzero(vec)}
    return MultilinearPolynomial(tuple(dims), coeffs)


def normalize_phase(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit vector whose first non-negligible component is real and positive."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    vec = vec / np.linalg.norm(vec)
    flat = vec.reshape(-1)
    idx = int(np.flatnonzero(np.abs(flat) > tol * np.max(np.abs(flat)))[0])
    return vec * (abs(flat[idx]) / flat[idx])


def phase_distance(u, v) -> float:
    """``min_phi ||u - e^{i phi} v||`` for unit vectors."""
    u, v = np.ravel(u), np.ravel(v)
    ov = np.vdot(v, u)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


@dataclass(frozen=True)
class LinearFactor:
    """``sum_k coefficients[k] * symbol_k(site)``, unit norm, phase-normalized."""

    site: int
    coefficients: np.ndarray
    entropy: float = field(default=0.0, compare=False)

    def bloch_scaled(self) -> np.ndarray:
        """Coefficients scaled so that ``|a|^2 + |b|^2 = 2`` (qubit Bloch-formula scale)."""
        return np.sqrt(2.0) * self.coefficients


@dataclass(frozen=True)
class BlockFactor:
    sites: tuple[int, ...]
    tensor: np.ndarray
    entropy: float = field(default=0.0, compare=False)


def bloch_factor_coefficients(n: Sequence[float]) -> np.ndarray:
    """``(sqrt(1 + n_z), (n_x + i n_y)/sqrt(1 + n_z))`` from a qubit Bloch vector.

    At the singular point ``n_z = -1`` the limit for a pure state, ``(0, sqrt 2)``, is used.
    """
    nx, ny, nz = (float(c) for c in n)
    if 1 + nz <= 1e-15:
        return np.array([0.0, np.sqrt(2.0)], dtype=complex)
    a = np.sqrt(1 + nz)
    return np.array([a, (nx + 1j * ny) / a])


def _entropy_test(state: PureState, sites: tuple[int, ...], tol: Optional[float], shots: Optional[int],
                  seed: int) -> tuple[bool, float, np.ndarray]:
    if tol is not None and tol < 0:
        raise InvalidTolerance(f"tolerance must be >= 0, got {tol}")
    if shots is None:
        rho = partial_trace(state, sites)
        entropy = von_neumann_entropy(rho)
        threshold = EXACT_TOL if tol is None else tol
        mat = rho.matrix
    else:
        est = reconstruct_rdm(state, sites, shots, seed)
        entropy, se = entropy_with_stderr(est)
        threshold = max(SAMPLED_TOL if tol is None else tol, 5 * se)
        mat = est.rho_hat.matrix
    evals, vecs = np.linalg.eigh(mat)
    return entropy <= threshold, entropy, vecs[:, -1]


def detect_linear_factor(state: PureState, site: int, tol: Optional[float] = None, shots: Optional[int] = None,
                         seed: int = 0) -> Optional[LinearFactor]:
    """Factor on ``site`` if its reduced state has (near) zero entropy.

    ``shots=None`` uses the exact reduced state with threshold 1e-10 bits;
    otherwise the state is estimated by tomography and the threshold is
    ``max(tol or 0.05, 5 * propagated entropy stderr)``.
    """
    (site,) = state.shape.check_sites((site,))
    ok, entropy, vec = _entropy_test(state, (site,), tol, shots, seed)
    return LinearFactor(site, normalize_phase(vec), entropy) if ok else None


def detect_block_factor(state: PureState, sites: Sequence[int], tol: Optional[float] = None,
                        shots: Optional[int] = None, seed: int = 0) -> Optional[BlockFactor]:
    sites = state.shape.check_sites(sites)
    if len(sites) > MAX_BLOCK_SITES:
        raise TooManySites(f"block factors are limited to {MAX_BLOCK_SITES} sites")
    ok, entropy, vec = _entropy_test(state, sites, tol, shots, seed)
    if not ok:
        return None
    return BlockFactor(sites, normalize_phase(vec).reshape([state.dims[s] for s in sites]), entropy)


@dataclass(frozen=True)
class SeparabilityReport:
    dim: int
    norm2: float
    norm_residual: float
    star_residual: Optional[float]
    purity: float
    tolerance: float

    @property
    def passed(self) -> bool:
        ok = abs(self.norm_residual) <= self.tolerance
        if self.star_residual is not None:
            ok = ok and self.star_residual <= self.tolerance
        return ok


def qudit_separability_conditions(m: CoherenceVector, basis: Optional[OperatorBasis] = None,
                                  tol: float = 1e-9) -> SeparabilityReport:
    """Purity conditions on a coherence vector.

    A state ``(1/d)(I + m . l)`` is pure iff ``|m|^2 = d(d-1)/2`` and
    ``sum_rs D_rst m_r m_s = d(d-2) m_t`` with ``D_rst = (d/4) Tr({l_r, l_s} l_t)``.
    The second condition is empty for qubits and is skipped there.
    """
    d = m.dim
    basis = gellmann_basis(d) if basis is None else basis
    comps = np.asarray(m.components, dtype=float)
    norm2 = float(comps @ comps)
    star = None
    if d > 2:
        star_vec = np.einsum("rst,r,s->t", basis.star_coeffs, comps, comps) / (d * (d - 2))
        star = float(np.max(np.abs(star_vec - comps)))
    purity = (1 + 2 * norm2 / d) / d
    return SeparabilityReport(d, norm2, norm2 - d * (d - 1) / 2, star, purity, tol)


# ------------------------------------------------------------ full factoring

@dataclass(frozen=True)
class FactorStep:
    kind: str  # "linear" or "block"
    sites: tuple[int, ...]
    coefficients: np.ndarray
    residual_sites: tuple[int, ...]
    residual: Optional[MultilinearPolynomial]
    residual_scalar: complex


@dataclass(frozen=True)
class FactorReport:
    site_dims: tuple[int, ...]
    scale: float
    factors: tuple[LinearFactor, ...]
    blocks: tuple[BlockFactor, ...]
    residual_sites: tuple[int, ...]
    residual: Optional[MultilinearPolynomial]
    residual_scalar: complex
    entropies: tuple[float, ...]
    steps: tuple[FactorStep, ...]

    @property
    def fully_factored(self) -> bool:
        return not self.residual_sites

    def reconstruct(self) -> np.ndarray:
        """Coefficient vector of (factors) x (residual), in the original site order."""
        pieces: list[tuple[tuple[int, ...], np.ndarray]] = [((f.site,), f.coefficients) for f in self.factors]
        pieces += [(b.sites, b.tensor.reshape(-1)) for b in self.blocks]
        if self.residual_sites:
            pieces.append((self.residual_sites, self.residual.to_vector()))
            scalar = 1.0
        else:
            scalar = self.residual_scalar
        order: list[int] = []
        vec = np.array([scalar], dtype=complex)
        for sites, v in pieces:
            vec = np.kron(vec, v)
            order.extend(sites)
        tensor = vec.reshape([self.site_dims[s] for s in order])
        return np.transpose(tensor, np.argsort(order)).reshape(-1)

    def reconstruction_error(self, p: MultilinearPolynomial) -> float:
        return float(np.max(np.abs(self.reconstruct() - p.to_vector())))


def _deflate(tensor: np.ndarray, axes: list[int], vec: np.ndarray) -> np.ndarray:
    """Project ``axes`` onto ``vec`` and renormalize; a 0-d result keeps the phase."""
    sub = [tensor.shape[a] for a in axes]
    moved = np.moveaxis(tensor, axes, list(range(len(axes)))).reshape(int(np.prod(sub)), -1)
    rest_shape = [tensor.shape[a] for a in range(tensor.ndim) if a not in axes]
    out = (vec.conj() @ moved).reshape(rest_shape)
    nrm = float(np.linalg.norm(out))
    if nrm < 1e-12:
        raise NumericalInconsistency("projection onto the extracted factor left a zero residual")
    return out / nrm


def factorize_fully(p: Union[MultilinearPolynomial, PureState], tol: Optional[float] = None,
                    shots: Optional[int] = None, seed: int = 0, scan_pairs: bool = True) -> FactorReport:
    """Extract every linear factor (ascending site order), then pair factors.

    After each extraction the working state is projected onto the factor and
    renormalized. ``steps`` records the residual after every extraction.
    """
    if isinstance(p, PureState):
        p = state_to_poly(p)
    if p.variable_count > FACTORIZE_CAP:
        raise TooLarge(f"{p.variable_count} variables exceeds the factoring cap of {FACTORIZE_CAP}")
    state = poly_to_state(p)
    scale = p.norm()
    dims = state.dims
    entropies = []
    for i in range(len(dims)):
        if shots is None:
            entropies.append(von_neumann_entropy(partial_trace(state, (i,))))
        else:
            entropies.append(entropy_with_stderr(reconstruct_rdm(state, (i,), shots, seed))[0])

    live = list(range(len(dims)))
    tensor = state.tensor()
    factors, blocks, steps = [], [], []

    def work_state():
        return PureState([dims[s] for s in live], tensor.reshape(-1))

    def residual():
        if live:
            return state_to_poly(tensor.reshape(-1), scale, [dims[s] for s in live]), 1.0 + 0j
        return None, complex(tensor) * scale

    for site in range(len(dims)):
        axis = live.index(site)
        f = detect_linear_factor(work_state(), axis, tol, shots, seed)
        if f is None:
            continue
        f = LinearFactor(site, f.coefficients, f.entropy)
        tensor = _deflate(tensor, [axis], f.coefficients)
        live.remove(site)
        factors.append(f)
        steps.append(FactorStep("linear", (site,), f.coefficients, tuple(live), *residual()))

    i = 0
    while scan_pairs and i < len(live) - 1:
        for j in range(i + 1, len(live)):
            b = detect_block_factor(work_state(), (i, j), tol, shots, seed)
            if b is None:
                continue
            pair = (live[i], live[j])
            b = BlockFactor(pair, b.tensor, b.entropy)
            tensor = _deflate(tensor, [i, j], b.tensor.reshape(-1))
            live.remove(pair[0])
            live.remove(pair[1])
            blocks.append(b)
            steps.append(FactorStep("block", pair, b.tensor, tuple(live), *residual()))
            break
        else:
            i += 1

    res, scalar = residual()
    return FactorReport(dims, scale, tuple(factors), tuple(blocks), tuple(live), res, scalar,
                        tuple(entropies), tuple(steps))


# ------------------------------------------------------------ classical oracle

def classical_factor_oracle(p: Union[MultilinearPolynomial, PureState], site: int,
                            tol: float = 1e-8) -> Optional[np.ndarray]:
    """Linear factor at ``site`` from the rank of the (site) x (rest) coefficient matrix."""
    if isinstance(p, PureState):
        dims, vec = p.dims, p.amplitudes
    else:
        dims, vec = p.site_dims, p.to_vector()
    if len(dims) > ORACLE_CAP:
        raise TooLarge(f"oracle limited to {ORACLE_CAP} variables")
    if not 0 <= site < len(dims):
        raise InputError(f"site {site} out of range")
    if not np.any(vec):
        raise ZeroInput("the zero polynomial has no factors")
    mat = np.moveaxis(vec.reshape(dims), site, 0).reshape(dims[site], -1)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if len(s) > 1 and s[1] > tol * s[0]:
        return None
    return normalize_phase(u[:, 0])


# ------------------------------------------------------------------ corpora

def random_factorable_state(n: int, rng: np.random.Generator, n_factors: Optional[int] = None) -> PureState:
    """Random qubit state with a random subset of sites in product form."""
    k = int(rng.integers(1, n + 1)) if n_factors is None else n_factors
    factored = sorted(int(s) for s in rng.choice(n, size=k, replace=False))
    rest = [s for s in range(n) if s not in factored]
    vec = np.ones(1, dtype=complex)
    order = []
    for s in factored:
        vec = np.kron(vec, random_state((2,), rng).amplitudes)
        order.append(s)
    if rest:
        vec = np.kron(vec, random_state((2,) * len(rest), rng).amplitudes)
        order.extend(rest)
    tensor = np.transpose(vec.reshape((2,) * n), np.argsort(order))
    return PureState.from_vector((2,) * n, tensor.reshape(-1))


def random_entangled_state(n: int, rng: np.random.Generator) -> PureState:
    circ = random_circuit((2,) * n, 3 * n, rng, two_site_fraction=0.6)
    return apply_circuit(basis_state((2,) * n, "0" * n), circ)


def factor_corpus(size: int, seed: int, max_sites: int = 6) -> list[MultilinearPolynomial]:
    """Seeded mix of constructed-factorable and circuit-generated polynomials."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(size):
        n = int(rng.integers(2, max_sites + 1))
        state = random_factorable_state(n, rng) if k % 2 == 0 else random_entangled_state(n, rng)
        out.append(state_to_poly(state, scale=float(rng.uniform(0.5, 3.0))))
    return out


@dataclass(frozen=True)
class CorpusSummary:
    instances: int
    site_checks: int
    presence_agreement: float
    max_coefficient_error: float
    mismatches: tuple[tuple[int, int], ...]


def corpus_agreement(corpus: Sequence[MultilinearPolynomial], tol: Optional[float] = None,
                     shots: Optional[int] = None, seed: int = 0) -> CorpusSummary:
    """Compare the entropy detector with the rank oracle on every site of every instance."""
    checks = agree = 0
    worst = 0.0
    mismatches = []
    for idx, p in enumerate(corpus):
        state = poly_to_state(p)
        for site in range(p.variable_count):
            ref = classical_factor_oracle(p, site)
            got = detect_linear_factor(state, site, tol, shots, seed + idx)
            checks += 1
            if (ref is None) == (got is None):
                agree += 1
                if ref is not None:
                    worst = max(worst, phase_distance(ref, got.coefficients))
            else:
                mismatches.append((idx, site))
    return CorpusSummary(len(corpus), checks, agree / checks if checks else 1.0, worst, tuple(mismatches))
