"""Simulated state tomography of small subsystems.

Each product operator in the generalized Pauli basis of the measured sites
is one measurement setting. A setting draws ``shots`` projective outcomes in
the operator's eigenbasis from the Born distribution; the per-setting RNG is
derived from (master seed, sites, labels), so results do not depend on the
order in which settings are evaluated. Passing ``shots=None`` bypasses
sampling and uses the exact moments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, InvalidShots, TooManySites
from .statecore import DensityMatrix, format_labels, label_matrix, parse_labels, partial_trace
from .statecore.basis import Labels
from .statecore.states import State

MAX_TOMOGRAPHY_SITES = 3

_SETTING_TAG = 0
_SCAN_TAG = 1


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *keys)``."""
    if seed is None or int(seed) < 0:
        raise InputError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


@dataclass(frozen=True)
class MeasurementSetting:
    sites: tuple[int, ...]
    labels: tuple[int, ...]
    shots: int
    seed: int

    def __post_init__(self):
        if self.shots < 1:
            raise InvalidShots(f"shots must be >= 1, got {self.shots}")

    def rng(self) -> np.random.Generator:
        return derive_rng(self.seed, _SETTING_TAG, len(self.sites), *self.sites, *self.labels)


@dataclass(frozen=True)
class Moment:
    labels: tuple[int, ...]
    label: str
    estimate: float
    stderr: float


@dataclass(frozen=True)
class TomographyEstimate:
    """Reconstructed reduced density matrix with the raw moments behind it.

    ``rho_linear`` is the unprojected linear-inversion estimate (unbiased,
    possibly not PSD); ``rho_hat`` is its PSD projection.
    """

    sites: tuple[int, ...]
    dims: tuple[int, ...]
    moments: tuple[Moment, ...]
    rho_linear: np.ndarray
    rho_hat: DensityMatrix
    shots_per_setting: Optional[int]
    shots_used: int

    def contract(self, block) -> tuple[float, float]:
        """``Tr(block rho_linear)`` and its propagated standard error."""
        block = np.asarray(block, dtype=complex)
        mats = basis_operators(self.dims)[1]
        dim = self.rho_linear.shape[0]
        weights = np.einsum("ab,rba->r", block, mats).real / dim
        est = np.array([m.estimate for m in self.moments])
        se = np.array([m.stderr for m in self.moments])
        value = np.trace(block).real / dim + weights @ est
        return float(value), float(np.sqrt(np.sum((weights * se) ** 2)))


@lru_cache(maxsize=None)
def basis_operators(dims: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], ...], np.ndarray]:
    """All non-identity product labels for ``dims`` and their matrices."""
    labels = [lab for lab in itertools.product(*[range(d * d) for d in dims]) if any(lab)]
    mats = np.array([label_matrix(lab, dims) for lab in labels])
    mats.setflags(write=False)
    return tuple(labels), mats


def sample_block(rho: np.ndarray, block: np.ndarray, shots: int, rng: np.random.Generator) -> tuple[float, float]:
    """Sample mean and standard error of measuring Hermitian ``block`` on ``rho``."""
    if shots < 1:
        raise InvalidShots(f"shots must be >= 1, got {shots}")
    evals, vecs = np.linalg.eigh(block)
    probs = np.einsum("ak,ab,bk->k", vecs.conj(), rho, vecs).real
    # merge degenerate eigenvalues so rounding noise cannot split outcomes
    values, inverse = np.unique(np.round(evals, 9), return_inverse=True)
    p = np.clip(np.bincount(inverse, weights=probs, minlength=len(values)), 0.0, None)
    counts = rng.multinomial(shots, p / p.sum())
    mean = float(counts @ values) / shots
    if shots == 1:
        return mean, float(np.max(np.abs(values)))
    var = float(counts @ (values - mean) ** 2) / (shots - 1)
    return mean, float(np.sqrt(var / shots))


def sample_expectation(state: State, sites: Sequence[int], op_labels: Labels, shots: int,
                       seed: int) -> tuple[float, float]:
    """Estimate the expectation of a generalized Pauli product on ``sites``."""
    sites = state.shape.check_sites(sites)
    dims = tuple(state.dims[s] for s in sites)
    labels = parse_labels(op_labels, dims)
    setting = MeasurementSetting(sites, labels, int(shots), seed)
    rho = partial_trace(state, sites).matrix
    return sample_block(rho, label_matrix(labels, dims), setting.shots, setting.rng())


def project_psd(mat: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    mat = 0.5 * (mat + mat.conj().T)
    evals, vecs = np.linalg.eigh(mat)
    evals = np.clip(evals, 0.0, None)
    if evals.sum() <= 0:
        raise InputError("PSD projection collapsed to zero; estimate is unusable")
    evals = evals / evals.sum()
    out = (vecs * evals) @ vecs.conj().T
    return 0.5 * (out + out.conj().T)


def reconstruct_rdm(state: State, sites: Sequence[int], shots: Optional[int] = None, seed: int = 0,
                    max_sites: int = MAX_TOMOGRAPHY_SITES) -> TomographyEstimate:
    """Linear-inversion tomography of the reduced state on ``sites``."""
    sites = state.shape.check_sites(sites)
    if len(sites) > max_sites:
        raise TooManySites(f"{len(sites)} sites exceeds the tomography cap of {max_sites}")
    if shots is not None and shots < 1:
        raise InvalidShots(f"shots must be >= 1, got {shots}")
    dims = tuple(state.dims[s] for s in sites)
    rho = partial_trace(state, sites).matrix
    labels, mats = basis_operators(dims)
    dim = rho.shape[0]
    moments = []
    for lab, mat in zip(labels, mats):
        if shots is None:
            est, se = float(np.einsum("ab,ba->", rho, mat).real), 0.0
        else:
            setting = MeasurementSetting(sites, lab, int(shots), seed)
            est, se = sample_block(rho, mat, setting.shots, setting.rng())
        moments.append(Moment(lab, format_labels(lab, dims), est, se))
    est = np.array([m.estimate for m in moments])
    rho_lin = (np.eye(dim) + np.einsum("r,rab->ab", est, mats)) / dim
    rho_hat = DensityMatrix(dims, project_psd(rho_lin))
    used = 0 if shots is None else int(shots) * len(labels)
    return TomographyEstimate(sites, dims, tuple(moments), rho_lin, rho_hat, shots, used)


def entropy_with_stderr(est: TomographyEstimate) -> tuple[float, float]:
    """Entropy (bits) of ``rho_hat`` with a linearly propagated standard error.

    Eigenvalues are floored at ``1/shots`` inside the derivative so the
    propagated error stays finite for nearly pure estimates.
    """
    evals, vecs = np.linalg.eigh(est.rho_hat.matrix)
    p = evals[evals > 0]
    entropy = max(float(-np.sum(p * np.log2(p))), 0.0) + 0.0
    if est.shots_per_setting is None:
        return entropy, 0.0
    mats = basis_operators(est.dims)[1]
    dim = vecs.shape[0]
    floor = 1.0 / est.shots_per_setting
    dS = -np.log2(np.clip(evals, floor, None))
    # d lambda_k / d m_r = <v_k|Lambda_r|v_k> / D
    dlam = np.einsum("ak,rab,bk->rk", vecs.conj(), mats, vecs).real / dim
    grad = dlam @ dS
    se = np.array([m.stderr for m in est.moments])
    return entropy, float(np.sqrt(np.sum((grad * se) ** 2)))


@dataclass(frozen=True)
class ScalingScan:
    rows: tuple[tuple[int, float, float], ...]  # (shots, empirical std, mean)
    repetitions: int
    slope: Optional[float]
    intercept: Optional[float]


def fit_loglog(shots: Sequence[int], stds: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    shots = np.asarray(shots, dtype=float)
    stds = np.asarray(stds, dtype=float)
    if len(shots) < 2 or np.any(stds <= 0):
        return None, None
    slope, intercept = np.polyfit(np.log10(shots), np.log10(stds), 1)
    return float(slope), float(intercept)


def error_scaling_scan(state: State, sites: Sequence[int], block, shots_list: Sequence[int],
                       repetitions: int = 50, seed: int = 0) -> ScalingScan:
    """Empirical spread of the sampled estimator of ``block`` versus shot count."""
    shots_list = [int(m) for m in shots_list]
    if not shots_list or any(b <= a for a, b in zip(shots_list, shots_list[1:])):
        raise InputError(f"shot list must be non-empty and strictly ascending, got {shots_list}")
    if repetitions < 20:
        raise InputError(f"need at least 20 repetitions, got {repetitions}")
    sites = state.shape.check_sites(sites)
    rho = partial_trace(state, sites).matrix
    block = np.asarray(block, dtype=complex)
    if block.shape != rho.shape:
        raise InputError(f"block shape {block.shape} does not match sites {sites}")
    rows = []
    for m in shots_list:
        ests = [sample_block(rho, block, m, derive_rng(seed, _SCAN_TAG, m, rep))[0]
                for rep in range(repetitions)]
        rows.append((m, float(np.std(ests, ddof=1)), float(np.mean(ests))))
    slope, intercept = fit_loglog([r[0] for r in rows], [r[1] for r in rows])
    return ScalingScan(tuple(rows), repetitions, slope, intercept)
