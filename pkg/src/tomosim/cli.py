"""Command-line front end.

Subcommands: ``expect``, ``tomo``, ``robust``, ``factor`` and ``scan``. Each
writes a single JSON report (to ``--out`` or stdout) that embeds the
resolved configuration, and where a table is natural, a CSV next to it.
``scan`` also renders a PNG figure. Exit codes: 0 ok, 2 input error,
3 resource cap exceeded, 1 internal numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .errors import InputError, ResourceCapError, TomosimError
from .observables import expectation_direct, expectation_tomographic, expectation_via_rdms, setting_count
from .polyfactor import (
    classical_factor_oracle,
    corpus_agreement,
    factorize_fully,
    poly_to_state,
)
from .robustness import (
    PAULIS,
    apply_channel,
    dephased_bell_family,
    identity_channel,
    marginal_invariance_check,
    product_channel,
    qubit_condition_check,
)
from .statecore import label_matrix, parse_labels, partial_trace
from .tomography import entropy_with_stderr, error_scaling_scan, reconstruct_rdm

SEED_RULE = "philox(SeedSequence([seed, tag, ...sites, ...labels]))"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected a comma-separated list of integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--shots", type=int, default=None, help="shots per measurement setting (sampled mode)")
    p.add_argument("--seed", type=int, default=None, help="master seed; required in sampled mode")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--table", default=None, help="CSV path (default: report path with .csv)")


def _program(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--input", required=required, help="circuit, Hamiltonian or state JSON")
    p.add_argument("--time", type=float, default=1.0, help="evolution time for Hamiltonian inputs")
    p.add_argument("--steps", type=int, default=0, help="Trotter steps (0 = exact propagator)")
    p.add_argument("--sign-convention", choices=("paper", "physics"), default="paper",
                   help="paper: exp(+iHt); physics: exp(-iHt)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tomosim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expect", help="expectation of a local observable by direct, rdm and tomographic routes")
    _program(p)
    p.add_argument("--observable", required=True)
    _common(p)

    p = sub.add_parser("tomo", help="tomographic reconstruction of a reduced state")
    _program(p)
    p.add_argument("--sites", required=True, help="comma-separated 0-based sites")
    _common(p)

    p = sub.add_parser("robust", help="marginal invariance, defects and qubit conditions under a channel")
    _program(p, required=False)
    p.add_argument("--channel", default=None, help="channel JSON file or name:param, e.g. dephasing:0.3")
    p.add_argument("--observable", default=None)
    p.add_argument("--locality", type=int, default=1, choices=(1, 2))
    p.add_argument("--fixture", choices=("dephased-bell",), default=None)
    p.add_argument("--population", type=float, default=0.3, help="|a|^2 for the dephased-bell fixture")
    p.add_argument("--points", type=int, default=21)
    _common(p)

    p = sub.add_parser("factor", help="factor detection on a multilinear polynomial or a corpus of them")
    p.add_argument("--poly", default=None)
    p.add_argument("--corpus", default=None, help="directory of polynomial JSON files")
    _common(p)

    p = sub.add_parser("scan", help="estimator spread versus shots, with CSV table and PNG figure")
    _program(p)
    p.add_argument("--sites", required=True)
    p.add_argument("--paulis", required=True, help="operator labels on the sites, e.g. ZZ")
    p.add_argument("--shots-list", default="100,1000,10000,100000")
    p.add_argument("--repetitions", type=int, default=50)
    p.add_argument("--figure", default=None, help="PNG path (default: report path with .png)")
    _common(p)
    return parser


# ------------------------------------------------------------------ helpers

def _resolve(args) -> dict:
    if args.mode == "sampled":
        if args.seed is None:
            raise InputError("sampled mode needs an explicit --seed")
        if args.shots is None and args.command != "scan":
            raise InputError("sampled mode needs --shots")
    if args.shots is not None and args.shots < 1:
        raise InputError(f"--shots must be >= 1, got {args.shots}")
    if args.seed is not None and args.seed < 0:
        raise InputError(f"--seed must be >= 0, got {args.seed}")
    if args.tol is not None and args.tol < 0:
        raise InputError(f"--tol must be >= 0, got {args.tol}")
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "table", "figure")}
    config["seed_rule"] = SEED_RULE
    return config


def _shots(args) -> Optional[int]:
    return args.shots if args.mode == "sampled" else None


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def _load_program(args):
    sign = 1 if args.sign_convention == "paper" else -1
    return io.load_program(io.read_json(args.input), args.time, args.steps, sign)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _sidecar(args, suffix: str, explicit: Optional[str]) -> Optional[Path]:
    if explicit:
        return Path(explicit)
    if args.out:
        return Path(args.out).with_suffix(suffix)
    return None


# ---------------------------------------------------------------- commands

def cmd_expect(args) -> tuple[dict, Optional[tuple]]:
    state, kind = _load_program(args)
    obs = io.load_observable(io.read_json(args.observable))
    results: dict = {}
    try:
        results["direct"] = {"method": "direct", "value": expectation_direct(state, obs)}
    except ResourceCapError as exc:
        results["direct"] = {"method": "direct", "skipped": str(exc)}
    rdm = expectation_via_rdms(state, obs)
    results["rdm"] = io.dump_expectation(rdm)
    tomo = expectation_tomographic(state, obs, _shots(args), _seed(args))
    results["tomographic"] = io.dump_expectation(tomo)
    oracle = results["direct"].get("value", rdm.value)
    if tomo.stderr:
        results["tomographic"]["z_score"] = (tomo.value - oracle) / tomo.stderr
    report = {"input_kind": kind, "dims": list(state.dims), "oracle": oracle,
              "settings": setting_count(obs), "results": results}
    rows = [[",".join(map(str, s)), v, t] for (s, v), (_, t) in zip(rdm.per_term, tomo.per_term)]
    return report, (["sites", "rdm", "tomographic"], rows)


def cmd_tomo(args) -> tuple[dict, Optional[tuple]]:
    state, kind = _load_program(args)
    sites = _int_list(args.sites)
    est = reconstruct_rdm(state, sites, _shots(args), _seed(args))
    entropy, se = entropy_with_stderr(est)
    report = io.dump_tomography(est)
    exact = partial_trace(state, sites).matrix
    report.update({"input_kind": kind, "entropy_bits": entropy, "entropy_stderr": se,
                   "settings": len(est.moments), "shots_used": est.shots_used,
                   "trace_distance_to_exact": 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(est.rho_hat.matrix - exact))))})
    rows = [[m.label, m.estimate, m.stderr] for m in est.moments]
    return report, (["label", "estimate", "stderr"], rows)


def _robust_fixture(args) -> tuple[dict, Optional[tuple]]:
    pop0 = args.population
    if not 0 < pop0 < 1:
        raise InputError(f"--population must lie strictly between 0 and 1, got {pop0}")
    if args.points < 2:
        raise InputError("--points must be >= 2")
    family = dephased_bell_family(pop0, args.points)
    ideal = family[-1][1]
    tol = 1e-12 if args.tol is None else args.tol
    expected = np.diag([pop0, 1 - pop0])
    rows, worst_marg, z_values = [], 0.0, []
    for c, rho in family:
        rep = marginal_invariance_check(ideal, rho, 1, tol, _shots(args), _seed(args))
        dev = max(float(np.max(np.abs(partial_trace(rho, (s,)).matrix - expected))) for s in (0, 1))
        z0 = float(np.trace(PAULIS[2] @ partial_trace(rho, (0,)).matrix).real)
        worst_marg = max(worst_marg, dev)
        z_values.append(z0)
        rows.append([c, rep.distances[(0,)], rep.distances[(1,)], dev, z0])
    z_spread = max(z_values) - min(z_values)
    report = {"fixture": "dephased-bell", "population": pop0, "points": args.points,
              "tolerance": tol, "max_marginal_deviation": worst_marg, "z0_spread": z_spread,
              "z0_reference": z_values[-1],
              "locality1_max_distance": max(max(r[1], r[2]) for r in rows),
              "passed": bool(worst_marg <= tol and z_spread <= tol)}
    return report, (["C", "dist_site0", "dist_site1", "max_marginal_dev", "z0"], rows)


def cmd_robust(args) -> tuple[dict, Optional[tuple]]:
    if args.fixture:
        return _robust_fixture(args)
    if args.channel is None:
        raise InputError("robust needs --channel (or --fixture)")
    chan_arg = args.channel
    ch = io.load_channel(io.read_json(chan_arg) if Path(chan_arg).is_file() else chan_arg)
    tol = 1e-10 if args.tol is None else args.tol
    report: dict = {"channel": {"name": ch.name, "dim": ch.dim, "kraus_count": len(ch.operators)},
                    "tolerance": tol}
    if ch.dim == 2:
        q = qubit_condition_check(ch, identity_channel(2))
        report["qubit_conditions"] = {
            "observable": "Z", "state": "|0><0|",
            "transverse_residual": q.transverse_residual,
            "longitudinal_residual": q.longitudinal_residual,
            "combined_residual": q.combined_residual, "defect": q.defect,
            "consistent": q.consistent, "invariant": q.invariant}
    rows = None
    if args.input:
        state, kind = _load_program(args)
        if any(d != ch.dim for d in state.dims):
            raise InputError(f"channel dimension {ch.dim} does not match register dims {state.dims}")
        ideal = state.density_matrix()
        noisy = apply_channel(ideal, product_channel(ch, state.dims))
        marg = marginal_invariance_check(ideal, noisy, args.locality, tol, _shots(args), _seed(args))
        report.update({"input_kind": kind, "dims": list(state.dims),
                       "marginals": {"locality": marg.locality, "max_distance": marg.max_distance,
                                     "threshold": marg.tolerance, "constraints": marg.constraint_count,
                                     "passed": marg.passed}})
        rows = [[",".join(map(str, s)), d] for s, d in marg.distances.items()]
        if args.observable:
            obs = io.load_observable(io.read_json(args.observable))
            a = expectation_via_rdms(ideal, obs).value
            b = expectation_via_rdms(noisy, obs).value
            report["observable"] = {"ideal": a, "noisy": b, "defect": abs(a - b),
                                    "invariant": bool(abs(a - b) <= tol)}
        rows = (["sites", "trace_distance"], rows)
    return report, rows


def cmd_factor(args) -> tuple[dict, Optional[tuple]]:
    if (args.poly is None) == (args.corpus is None):
        raise InputError("factor needs exactly one of --poly or --corpus")
    shots, seed = _shots(args), _seed(args)
    if args.poly:
        p = io.load_polynomial(io.read_json(args.poly))
        poly_to_state(p)  # rejects the zero polynomial before any work
        rep = factorize_fully(p, args.tol, shots, seed)
        report = io.dump_factor_report(rep)
        report["polynomial"] = p.to_string()
        report["factor_sites"] = [f.site for f in rep.factors]
        report["factors_scaled"] = [[io.encode_complex(c) for c in f.bloch_scaled()] for f in rep.factors]
        if p.variable_count <= 8:
            report["oracle_factor_sites"] = [s for s in range(p.variable_count)
                                             if classical_factor_oracle(p, s) is not None]
        found = {f.site for f in rep.factors}
        rows = [[s, e, int(s in found)] for s, e in enumerate(rep.entropies)]
        return report, (["site", "entropy_bits", "factor"], rows)
    folder = Path(args.corpus)
    if not folder.is_dir():
        raise InputError(f"corpus directory not found: {folder}")
    files = sorted(folder.glob("*.json"))
    if not files:
        raise InputError(f"no .json polynomials in {folder}")
    polys = [io.load_polynomial(io.read_json(f)) for f in files]
    summary = corpus_agreement(polys, args.tol, shots, seed)
    bad: dict[int, int] = {}
    for idx, _ in summary.mismatches:
        bad[idx] = bad.get(idx, 0) + 1
    rows = [[f.name, p.variable_count, p.variable_count - bad.get(i, 0), bad.get(i, 0)]
            for i, (f, p) in enumerate(zip(files, polys))]
    report = {"corpus": folder.name, "instances": summary.instances, "site_checks": summary.site_checks,
              "presence_agreement": summary.presence_agreement,
              "max_coefficient_error": summary.max_coefficient_error,
              "mismatches": [{"file": files[i].name, "site": s} for i, s in summary.mismatches]}
    return report, (["file", "sites", "agree", "disagree"], rows)


def cmd_scan(args) -> tuple[dict, Optional[tuple]]:
    if args.seed is None:
        raise InputError("scan samples measurements and needs an explicit --seed")
    state, kind = _load_program(args)
    sites = _int_list(args.sites)
    dims = tuple(state.dims[s] for s in state.shape.check_sites(sites))
    block = label_matrix(parse_labels(args.paulis, dims), dims)
    scan = error_scaling_scan(state, sites, block, _int_list(args.shots_list), args.repetitions, args.seed)
    report = {"input_kind": kind, "sites": sites, "paulis": args.paulis, "repetitions": scan.repetitions,
              "slope": scan.slope, "intercept": scan.intercept,
              "rows": [{"shots": m, "std": s, "mean": mu} for m, s, mu in scan.rows]}
    fig = _sidecar(args, ".png", args.figure)
    if fig is not None:
        from .plotting import plot_scaling_scan

        plot_scaling_scan(scan, fig, f"<{args.paulis}> on sites {','.join(map(str, sites))}")
        report["figure"] = fig.name
    return report, (["shots", "std", "mean"], [list(r) for r in scan.rows])


COMMANDS = {"expect": cmd_expect, "tomo": cmd_tomo, "robust": cmd_robust, "factor": cmd_factor, "scan": cmd_scan}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _resolve(args)
    body, table = COMMANDS[args.command](args)
    doc = {"command": args.command, "config": config, "report": body}
    csv_path = _sidecar(args, ".csv", args.table)
    if table is not None and csv_path is not None:
        csv_path.write_text(_csv_text(*table))
        doc["table"] = csv_path.name
    text = io.dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except InputError as exc:
        print(f"tomosim: input error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapError as exc:
        print(f"tomosim: resource cap: {exc}", file=sys.stderr)
        return 3
    except (TomosimError, ArithmeticError) as exc:
        print(f"tomosim: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
