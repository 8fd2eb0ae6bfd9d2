"""JSON readers and writers for circuits, Hamiltonians, observables, channels,
fermion operators, polynomials and reports.

Complex numbers are encoded as ``[re, im]``; plain real numbers are also
accepted on input. Matrices are nested lists of such entries. All site and
mode indices are 0-based.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InputError
from .fermions import FermionOperator
from .observables import ExpectationReport, LocalObservable, pauli_term
from .polyfactor import FactorReport, MultilinearPolynomial
from .robustness import NAMED_CHANNELS, KrausChannel
from .statecore import (
    Circuit,
    Gate,
    PauliStringHamiltonian,
    PureState,
    apply_circuit,
    as_shape,
    basis_state,
    exact_propagator,
    format_labels,
    named_gate,
    trotterize,
)
from .tomography import TomographyEstimate


def read_json(path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_plain) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def _get(obj: dict, key: str, kind=None, where: str = ""):
    if not isinstance(obj, dict):
        raise InputError(f"{where or 'input'}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise InputError(f"{where or 'input'}: missing required field {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise InputError(f"{where or 'input'}: field {key!r} has wrong type {type(val).__name__}")
    return val


def decode_complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise InputError(f"cannot read {x!r} as a complex number")


def encode_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError("matrix must be a non-empty list of rows")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise InputError("matrix rows have unequal length")
    return np.array([[decode_complex(v) for v in r] for r in rows], dtype=complex)


def encode_matrix(mat) -> list:
    return [[encode_complex(v) for v in row] for row in np.asarray(mat)]


def _dims(obj, where) -> tuple[int, ...]:
    dims = _get(obj, "dims", list, where)
    if not dims or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims):
        raise InputError(f"{where}: 'dims' must be a non-empty list of integers")
    return tuple(dims)


def _sites(obj, where) -> tuple[int, ...]:
    sites = _get(obj, "sites", list, where)
    if not all(isinstance(s, int) and not isinstance(s, bool) for s in sites):
        raise InputError(f"{where}: 'sites' must be a list of integers")
    return tuple(sites)


# ----------------------------------------------------------------- circuits

def load_circuit(obj) -> Circuit:
    dims = _dims(obj, "circuit")
    gates = []
    for k, g in enumerate(_get(obj, "gates", list, "circuit")):
        where = f"circuit gate {k}"
        sites = _sites(g, where)
        if "name" in g:
            gates.append(Gate(named_gate(_get(g, "name", str, where)), sites, g["name"].upper()))
        elif "matrix" in g:
            gates.append(Gate(decode_matrix(g["matrix"]), sites))
        else:
            raise InputError(f"{where}: needs 'name' or 'matrix'")
    return Circuit(as_shape(dims), tuple(gates))


def dump_circuit(circ: Circuit) -> dict:
    gates = []
    for g in circ.gates:
        entry: dict = {"sites": list(g.sites)}
        if g.name:
            entry["name"] = g.name
        else:
            entry["matrix"] = encode_matrix(g.matrix)
        gates.append(entry)
    return {"dims": list(circ.shape.dims), "gates": gates}


def load_hamiltonian(obj) -> PauliStringHamiltonian:
    dims = _dims(obj, "hamiltonian")
    terms = []
    for k, t in enumerate(_get(obj, "terms", list, "hamiltonian")):
        where = f"hamiltonian term {k}"
        coeff = _get(t, "coeff", (int, float), where)
        terms.append((float(coeff), _get(t, "paulis", (str, list), where)))
    return PauliStringHamiltonian(as_shape(dims), tuple(terms))


def dump_hamiltonian(h: PauliStringHamiltonian) -> dict:
    return {"dims": list(h.shape.dims),
            "terms": [{"coeff": c, "paulis": format_labels(l, h.shape.dims)} for c, l in h.terms]}


def load_state(obj) -> PureState:
    dims = _dims(obj, "state")
    amps = [decode_complex(a) for a in _get(obj, "amplitudes", list, "state")]
    return PureState.from_vector(as_shape(dims), amps)


def load_program(obj, time: float = 1.0, steps: int = 0, sign: int = 1) -> tuple[PureState, str]:
    """Prepare a pure state from a circuit, a Hamiltonian or explicit amplitudes.

    A circuit runs on ``|0...0>`` (or on its optional ``"initial"`` basis
    label). A Hamiltonian evolves ``|0...0>`` for ``time``, exactly when
    ``steps == 0`` and by first-order Trotterization otherwise. Returns the
    state and the kind of input that was recognised.
    """
    if not isinstance(obj, dict):
        raise InputError("program input must be a JSON object")
    if "gates" in obj:
        circ = load_circuit(obj)
        init = obj.get("initial", "0" * circ.shape.n_sites)
        return apply_circuit(basis_state(circ.shape, init), circ), "circuit"
    if "amplitudes" in obj:
        return load_state(obj), "state"
    if "terms" in obj:
        h = load_hamiltonian(obj)
        psi0 = basis_state(h.shape, "0" * h.shape.n_sites)
        if steps < 0:
            raise InputError(f"steps must be >= 0, got {steps}")
        if steps == 0:
            vec = exact_propagator(h, time, sign) @ psi0.amplitudes
            return PureState.from_vector(h.shape, vec), "hamiltonian"
        return apply_circuit(psi0, trotterize(h, time, steps, sign)), "hamiltonian"
    raise InputError("program input needs 'gates' (circuit), 'terms' (Hamiltonian) or 'amplitudes' (state)")


# -------------------------------------------------------------- observables

def load_observable(obj) -> LocalObservable:
    """Terms carry either an explicit ``matrix`` or ``paulis`` (+ optional ``coeff``) on ``sites``."""
    dims = _dims(obj, "observable")
    terms = []
    for k, t in enumerate(_get(obj, "terms", list, "observable")):
        where = f"observable term {k}"
        sites = _sites(t, where)
        if "matrix" in t:
            terms.append((sites, decode_matrix(t["matrix"])))
        elif "paulis" in t:
            coeff = float(t.get("coeff", 1.0))
            try:
                terms.append(pauli_term(dims, coeff, sites, t["paulis"]))
            except IndexError:
                raise InputError(f"{where}: site out of range") from None
        else:
            raise InputError(f"{where}: needs 'matrix' or 'paulis'")
    return LocalObservable(as_shape(dims), tuple(terms))


def dump_observable(obs: LocalObservable) -> dict:
    return {"dims": list(obs.shape.dims),
            "terms": [{"sites": list(s), "matrix": encode_matrix(b)} for s, b in obs.terms]}


def dump_expectation(rep: ExpectationReport) -> dict:
    out = {
        "method": rep.method,
        "value": rep.value,
        "per_term": [{"sites": list(s), "value": v} for s, v in rep.per_term],
    }
    if rep.shots is not None or rep.method == "tomographic":
        out["shots"] = rep.shots
        out["stderr"] = rep.stderr
        out["shots_used"] = rep.extra.get("shots_used", 0)
    return out


# ----------------------------------------------------------------- channels

def load_channel(obj) -> KrausChannel:
    """Explicit ``{"dim", "kraus"}`` or named ``{"name": "dephasing", "p": 0.2}`` / ``"dephasing:0.2"``."""
    if isinstance(obj, str):
        name, _, arg = obj.partition(":")
        obj = {"name": name, "p": float(arg) if arg else None}
    if "name" in obj:
        name = _get(obj, "name", str, "channel")
        if name not in NAMED_CHANNELS:
            raise InputError(f"unknown channel {name!r}; known: {sorted(NAMED_CHANNELS)}")
        p = obj.get("p")
        if p is None and name != "identity":
            raise InputError(f"channel {name!r} needs a parameter 'p'")
        return NAMED_CHANNELS[name](p) if p is not None else NAMED_CHANNELS[name]()
    dim = _get(obj, "dim", int, "channel")
    ops = [decode_matrix(m) for m in _get(obj, "kraus", list, "channel")]
    if any(op.shape != (dim, dim) for op in ops):
        raise InputError(f"channel: every Kraus operator must be {dim}x{dim}")
    return KrausChannel(tuple(ops))


def dump_channel(ch: KrausChannel) -> dict:
    return {"dim": ch.dim, "kraus": [encode_matrix(a) for a in ch.operators]}


# ---------------------------------------------------------------- fermions

def load_fermion_operator(obj) -> FermionOperator:
    modes = _get(obj, "modes", int, "fermion operator")
    terms = []
    for k, t in enumerate(_get(obj, "terms", list, "fermion operator")):
        where = f"fermion term {k}"
        ops = [(_get(o, "mode", int, where), bool(_get(o, "dag", bool, where))) for o in _get(t, "ops", list, where)]
        terms.append((decode_complex(t.get("coeff", 1.0)), tuple(ops)))
    return FermionOperator(modes, tuple(terms))


def dump_fermion_operator(op: FermionOperator) -> dict:
    return {"modes": op.mode_count,
            "terms": [{"coeff": encode_complex(c), "ops": [{"mode": j, "dag": d} for j, d in ops]}
                      for c, ops in op.terms]}


# -------------------------------------------------------------- polynomials

def load_polynomial(obj) -> MultilinearPolynomial:
    n = _get(obj, "n", int, "polynomial")
    dims = tuple(obj.get("dims", [2] * n))
    if len(dims) != n:
        raise InputError(f"polynomial: 'dims' has {len(dims)} entries but n = {n}")
    monos = {}
    for k, m in enumerate(_get(obj, "monomials", list, "polynomial")):
        where = f"polynomial monomial {k}"
        sym = _get(m, "symbols", str, where)
        monos[sym] = monos.get(sym, 0) + decode_complex(m.get("coeff", 1.0))
    return MultilinearPolynomial.from_monomials(dims, monos)


def dump_polynomial(p: MultilinearPolynomial) -> dict:
    return {"n": p.variable_count, "dims": list(p.site_dims),
            "monomials": [{"symbols": p.symbols(m), "coeff": encode_complex(c)} for m, c in p.coeffs.items()]}


def dump_factor_report(rep: FactorReport) -> dict:
    def residual(sites, poly, scalar):
        if not sites:
            return {"sites": [], "scalar": encode_complex(scalar), "monomials": []}
        return {"sites": list(sites), "monomials": dump_polynomial(poly)["monomials"]}

    return {
        "dims": list(rep.site_dims),
        "scale": rep.scale,
        "entropies": list(rep.entropies),
        "factors": [{"site": f.site, "coefficients": [encode_complex(c) for c in f.coefficients],
                     "entropy": f.entropy} for f in rep.factors],
        "block_factors": [{"sites": list(b.sites),
                           "coefficients": [encode_complex(c) for c in b.tensor.reshape(-1)],
                           "entropy": b.entropy} for b in rep.blocks],
        "residual": residual(rep.residual_sites, rep.residual, rep.residual_scalar),
        "fully_factored": rep.fully_factored,
        "steps": [{"kind": s.kind, "sites": list(s.sites),
                   "residual": residual(s.residual_sites, s.residual, s.residual_scalar)} for s in rep.steps],
    }


def dump_tomography(est: TomographyEstimate) -> dict:
    return {
        "sites": list(est.sites),
        "moments": [{"label": m.label, "est": m.estimate, "stderr": m.stderr} for m in est.moments],
        "rho_hat": encode_matrix(est.rho_hat.matrix),
        "shots": est.shots_per_setting,
    }
