"""Command-line interface.

Subcommands: census, find-cc, index, verify-identity, find-re, example,
property-check, dynamics.  Problems are described by a JSON file; reports
are canonical JSON on stdout or ``--out``, with an optional CSV table
(``--csv``) and rendered figures (``--figures DIR``) alongside.

Exit codes: 0 success, 1 schema error, 2 solver failure, 3 verification
failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .cc_solver import (
    SolverConfig,
    census,
    find_central_configuration,
    projection_inequality,
    quotient_lift_check,
    random_seed_configuration,
)
from .errors import DegenerateRecordError, NBodyError, SchemaError
from .indices import fixed_point_index, identity_residual
from .mass_geometry import rotation_matrix
from .potentials import PairPotential, charged, newtonian
from .rel_equilibria import (
    AxisPairCharges,
    CylinderSpec,
    certify_axis_pair_equilibrium,
    cylinder_value,
    find_relative_equilibrium,
    integrate_newton,
    interior_max_gates,
    strip_potential,
    verify_dynamics,
)
from .report import (
    build_report,
    canonical_json,
    census_csv,
    critical_record_payload,
    index_record_payload,
    re_record_payload,
    summary_csv,
)
from . import plots


# ----------------------------------------------------------------------
# Problem files.
# ----------------------------------------------------------------------


def _fail(msg: str):
    raise SchemaError(msg)


def validate_problem(raw: dict) -> dict:
    if not isinstance(raw, dict):
        _fail("problem file must contain a JSON object")
    for key in ("n", "d", "masses", "potential"):
        if key not in raw:
            _fail(f"missing required field '{key}'")
    n = raw["n"]
    d = raw["d"]
    if not isinstance(n, int) or n < 2:
        _fail("'n' must be an integer >= 2")
    if d not in (2, 3):
        _fail("'d' must be 2 or 3")
    masses = raw["masses"]
    if not isinstance(masses, list) or len(masses) != n or any(
        not isinstance(x, (int, float)) or x <= 0 for x in masses
    ):
        _fail("'masses' must be a list of n positive numbers")
    alpha = raw.get("alpha", 1.0)
    if not isinstance(alpha, (int, float)) or alpha <= 0:
        _fail("'alpha' must be a positive number")
    pot = raw["potential"]
    if not isinstance(pot, dict) or pot.get("type") not in ("newtonian", "charged", "kappa"):
        _fail("'potential.type' must be one of: newtonian, charged, kappa")
    if pot["type"] == "charged":
        gamma = pot.get("gamma")
        if not isinstance(gamma, list) or len(gamma) != n:
            _fail("'potential.gamma' must be a list of n numbers")
    if pot["type"] == "kappa":
        kap = pot.get("kappa")
        if not isinstance(kap, list) or len(kap) != n or any(len(row) != n for row in kap):
            _fail("'potential.kappa' must be an n x n matrix")
        arr = np.asarray(kap, dtype=float)
        if np.abs(arr - arr.T).max() > 0 or np.abs(np.diag(arr)).max() > 0:
            _fail("'potential.kappa' must be symmetric with zero diagonal")
    solver = raw.get("solver", {})
    if not isinstance(solver, dict):
        _fail("'solver' must be an object")
    seed_q = raw.get("seed_configuration")
    if seed_q is not None:
        arr = np.asarray(seed_q, dtype=float)
        if arr.shape != (n, d):
            _fail("'seed_configuration' must be an n x d matrix")
    cyl = raw.get("cylinder")
    if cyl is not None and (not isinstance(cyl, dict) or not cyl.get("c", 0) > 0):
        _fail("'cylinder.c' must be a positive number")
    out = {
        "n": n,
        "d": d,
        "masses": [float(x) for x in masses],
        "alpha": float(alpha),
        "potential": pot,
        "solver": solver,
    }
    if seed_q is not None:
        out["seed_configuration"] = seed_q
    if cyl is not None:
        out["cylinder"] = {"c": float(cyl["c"])}
    return out


def load_problem(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        _fail(f"cannot read problem file: {exc}")
    except json.JSONDecodeError as exc:
        _fail(f"problem file is not valid JSON: {exc}")
    return validate_problem(raw)


def potential_from_problem(prob: dict) -> PairPotential:
    masses = np.asarray(prob["masses"], dtype=float)
    spec = prob["potential"]
    if spec["type"] == "newtonian":
        return newtonian(masses, alpha=prob["alpha"])
    if spec["type"] == "charged":
        return charged(np.asarray(spec["gamma"], dtype=float), alpha=prob["alpha"], masses=masses)
    kappa = np.asarray(spec["kappa"], dtype=float)
    return PairPotential(kappa=kappa, alpha=prob["alpha"], masses=masses)


def solver_config(prob: dict, args) -> SolverConfig:
    solver = dict(prob.get("solver", {}))
    if getattr(args, "seed", None) is not None:
        solver["rng_seed"] = args.seed
    if getattr(args, "tol", None) is not None:
        solver["tol"] = args.tol
    if getattr(args, "starts", None) is not None:
        solver["n_starts"] = args.starts
    allowed = {"tol", "max_iter", "damping", "rng_seed", "n_starts"}
    unknown = set(solver) - allowed
    if unknown:
        _fail(f"unknown solver options: {sorted(unknown)}")
    return SolverConfig(**solver)


def _seed_or_random(prob: dict, pot: PairPotential, cfg: SolverConfig) -> np.ndarray:
    if "seed_configuration" in prob:
        return np.asarray(prob["seed_configuration"], dtype=float)
    rng = np.random.default_rng(cfg.rng_seed)
    return random_seed_configuration(pot.n, prob["d"], pot.masses, rng)


def _cfg_payload(cfg: SolverConfig) -> dict:
    return {
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "damping": cfg.damping,
        "rng_seed": cfg.rng_seed,
        "n_starts": cfg.n_starts,
    }


# ----------------------------------------------------------------------
# Subcommand handlers.  Each returns (exit_code, problem, payload,
# csv_text, figure_writer).
# ----------------------------------------------------------------------


def cmd_census(args):
    prob = load_problem(args.problem)
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    records = census(pot, prob["d"], cfg)
    payload = {
        "solver": _cfg_payload(cfg),
        "n_classes": len(records),
        "records": [critical_record_payload(r) for r in records],
    }
    code = 0 if records else 2
    return code, prob, payload, census_csv(records), (
        lambda outdir: plots.save_census_figures(records, pot.masses, outdir)
    )


def cmd_find_cc(args):
    prob = load_problem(args.problem)
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    record = find_central_configuration(pot, _seed_or_random(prob, pot, cfg), cfg)
    g, is_id = quotient_lift_check(pot, record.q, tol=max(cfg.tol, 1e-10))
    payload = {
        "solver": _cfg_payload(cfg),
        "record": critical_record_payload(record),
        "lift_rotation_offset": float(np.linalg.norm(g - np.eye(prob["d"]))),
        "lift_rotation_is_identity": is_id,
    }
    csv_text = summary_csv(
        {"u_value": record.u_value, "lambda": record.lam, "residual": record.residual}
    )
    return 0, prob, payload, csv_text, (
        lambda outdir: [
            plots.save_configuration_figure(
                record.q, pot.masses, os.path.join(outdir, "configuration.png")
            )
        ]
    )


def _indexed_records(pot, records):
    out, refused = [], []
    for rec in records:
        try:
            out.append(fixed_point_index(pot, rec))
            refused.append(None)
        except DegenerateRecordError as exc:
            out.append(None)
            refused.append(str(exc))
    return out, refused


def cmd_index(args):
    prob = load_problem(args.problem)
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    single = "seed_configuration" in prob
    if single:
        records = [find_central_configuration(pot, _seed_or_random(prob, pot, cfg), cfg)]
    else:
        records = census(pot, prob["d"], cfg)
    idx, refused = _indexed_records(pot, records)
    entries = []
    for rec, ix, why in zip(records, idx, refused):
        entry = critical_record_payload(rec)
        entry["index"] = index_record_payload(ix) if ix is not None else {"refused": why}
        entries.append(entry)
    payload = {"solver": _cfg_payload(cfg), "n_classes": len(records), "records": entries}
    code = 0
    if single and idx[0] is None:
        payload["failure"] = f"degenerate record: {refused[0]}"
        code = 3
    return code, prob, payload, census_csv(records, idx), (
        lambda outdir: plots.save_census_figures(records, pot.masses, outdir)
    )


def cmd_verify_identity(args):
    prob = load_problem(args.problem)
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    single = "seed_configuration" in prob
    if single:
        records = [find_central_configuration(pot, _seed_or_random(prob, pot, cfg), cfg)]
    else:
        records = census(pot, prob["d"], cfg)
    residuals = [identity_residual(pot, rec.q) for rec in records]
    worst = max(residuals) if residuals else float("inf")
    payload = {
        "solver": _cfg_payload(cfg),
        "identity_tol": args.identity_tol,
        "n_classes": len(records),
        "identity_residuals": residuals,
        "worst_residual": worst,
    }
    code = 0 if residuals and worst <= args.identity_tol else 3
    return code, prob, payload, census_csv(records), (
        lambda outdir: plots.save_census_figures(records, pot.masses, outdir)
    )


def cmd_find_re(args):
    prob = load_problem(args.problem)
    if prob["d"] != 3:
        _fail("find-re requires a three-dimensional problem")
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    seed = _seed_or_random(prob, pot, cfg)
    if "cylinder" in prob:
        level = prob["cylinder"]["c"]
    else:
        level = cylinder_value(seed, pot.masses)
    record = find_relative_equilibrium(pot, CylinderSpec(c=level), seed, cfg)
    payload = {
        "solver": _cfg_payload(cfg),
        "cylinder_level": level,
        "record": re_record_payload(record),
    }
    csv_text = summary_csv(
        {
            "u_value": record.u_value,
            "omega_sq": record.omega_sq,
            "residual": record.residual,
            "planar": record.planar,
            "central": record.central,
        }
    )
    return 0, prob, payload, csv_text, (
        lambda outdir: [
            plots.save_configuration_figure(
                record.q, pot.masses, os.path.join(outdir, "configuration.png")
            )
        ]
    )


def cmd_example(args):
    params = AxisPairCharges(c1=args.c1, c2=args.c2, c3=args.c3)
    problem = {"c1": args.c1, "c2": args.c2, "c3": args.c3}
    gates = interior_max_gates(params)
    if not all(gates):
        payload = {"gates": list(gates), "certificate": None}
        return 3, problem, payload, None, None
    record, cert = certify_axis_pair_equilibrium(params)
    ok = all(cert[k] for k in ("criticality", "nonplanar", "noncentral", "positive_potential"))
    payload = {
        "gates": list(gates),
        "certificate": cert,
        "record": re_record_payload(record),
    }
    csv_text = summary_csv(
        {
            "t": cert["t"],
            "z": cert["z"],
            "u_value": record.u_value,
            "omega_sq": record.omega_sq,
            "criticality_residual": cert["criticality_residual"],
        }
    )

    def figures(outdir):
        paths = [
            plots.save_configuration_figure(
                record.q, np.ones(6), os.path.join(outdir, "configuration.png")
            ),
            plots.save_strip_figure(
                lambda t, z: strip_potential(t, z, params),
                cert["t"],
                cert["z"],
                os.path.join(outdir, "strip_potential.png"),
            ),
        ]
        return paths

    return (0 if ok else 3), problem, payload, csv_text, figures


def cmd_property_check(args):
    prob = load_problem(args.problem)
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    rng = np.random.default_rng(cfg.rng_seed)
    d = prob["d"]
    values, map_values, violations = [], [], 0
    for _ in range(args.samples):
        q = random_seed_configuration(pot.n, d, pot.masses, rng)
        frame = np.linalg.qr(rng.standard_normal((d, 2)))[0]
        j, value, map_value = projection_inequality(pot, q, frame)
        values.append(value)
        map_values.append(map_value)
        if value > 1e-12 or map_value < -1e-12:
            violations += 1
    payload = {
        "samples": args.samples,
        "max_gradient_pairing": max(values),
        "min_map_pairing": min(map_values),
        "violations": violations,
    }
    csv_text = summary_csv(payload)
    return (0 if violations == 0 else 3), prob, payload, csv_text, (
        lambda outdir: [
            plots.save_pairing_histogram(values, os.path.join(outdir, "pairing_histogram.png"))
        ]
    )


def cmd_dynamics(args):
    prob = load_problem(args.problem)
    pot = potential_from_problem(prob)
    cfg = solver_config(prob, args)
    if prob["d"] == 2:
        record = find_central_configuration(pot, _seed_or_random(prob, pot, cfg), cfg)
        omega_sq = pot.alpha * record.u_value
    else:
        seed = _seed_or_random(prob, pot, cfg)
        level = prob["cylinder"]["c"] if "cylinder" in prob else cylinder_value(seed, pot.masses)
        record = find_relative_equilibrium(pot, CylinderSpec(c=level), seed, cfg)
        omega_sq = record.omega_sq
    omega = float(np.sqrt(omega_sq))
    total_time = args.periods * 2.0 * np.pi / omega
    drift = verify_dynamics(pot, record, total_time=total_time, steps=args.steps)
    payload = {
        "solver": _cfg_payload(cfg),
        "omega": omega,
        "periods": args.periods,
        "steps": args.steps,
        "drift": drift,
    }
    csv_text = summary_csv({"omega": omega, "drift": drift, "steps": args.steps})

    def figures(outdir):
        times, vals = [], []
        gen = np.zeros((prob["d"], prob["d"]))
        if prob["d"] == 2:
            gen[0, 1], gen[1, 0] = -1.0, 1.0
        else:
            gen[0, 1], gen[1, 0] = -1.0, 1.0
        v0 = omega * record.q @ gen.T
        for t, q in integrate_newton(pot, record.q, v0, total_time, max(200, args.steps // 50)):
            times.append(t)
            ref = record.q @ rotation_matrix(prob["d"], omega * t).T
            vals.append(float(np.linalg.norm(q - ref)))
        return [
            plots.save_configuration_figure(
                record.q, pot.masses, os.path.join(outdir, "configuration.png")
            ),
            plots.save_drift_figure(times, vals, os.path.join(outdir, "drift.png")),
        ]

    code = 0
    if args.max_drift is not None and drift > args.max_drift:
        code = 3
    return code, prob, payload, csv_text, figures


# ----------------------------------------------------------------------
# Entry point.
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nbodycc",
        description="Central configurations, their indices, and relative equilibria.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    io_parent = argparse.ArgumentParser(add_help=False)
    io_parent.add_argument("--out", help="write the JSON report to this path")
    io_parent.add_argument("--csv", help="write a CSV table to this path")
    io_parent.add_argument("--figures", help="render figures into this directory")

    solver_parent = argparse.ArgumentParser(add_help=False)
    solver_parent.add_argument("--seed", type=int, help="override the RNG seed")
    solver_parent.add_argument("--tol", type=float, help="override the solver tolerance")
    solver_parent.add_argument("--starts", type=int, help="override the number of starts")

    def add(name, func, parents, help_text):
        p = sub.add_parser(name, parents=parents, help=help_text)
        p.set_defaults(func=func)
        return p

    for name, func, help_text in [
        ("census", cmd_census, "multistart census of central configurations"),
        ("find-cc", cmd_find_cc, "solve for a single central configuration"),
        ("index", cmd_index, "Morse and fixed-point indices of census classes"),
        ("verify-identity", cmd_verify_identity, "check the Hessian/Jacobian identity"),
        ("find-re", cmd_find_re, "solve for a relative equilibrium on the cylinder"),
        ("property-check", cmd_property_check, "projection inequality on random samples"),
        ("dynamics", cmd_dynamics, "integrate the rotating solution and report drift"),
    ]:
        p = add(name, func, [io_parent, solver_parent], help_text)
        p.add_argument("problem", help="path to the JSON problem file")
        if name == "verify-identity":
            p.add_argument("--identity-tol", type=float, default=1e-8)
        if name == "property-check":
            p.add_argument("--samples", type=int, default=1000)
        if name == "dynamics":
            p.add_argument("--steps", type=int, default=10000)
            p.add_argument("--periods", type=float, default=1.0)
            p.add_argument("--max-drift", type=float, default=None)

    p = add("example", cmd_example, [io_parent], "certify the six-body charged equilibrium")
    p.add_argument("--c1", type=float, required=True)
    p.add_argument("--c2", type=float, required=True)
    p.add_argument("--c3", type=float, required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, problem, payload, csv_text, figure_writer = args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except NBodyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report = build_report(args.command, __version__, problem, payload)
    text = canonical_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv and csv_text is not None:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    if args.figures and figure_writer is not None:
        os.makedirs(args.figures, exist_ok=True)
        figure_writer(args.figures)
    return code


if __name__ == "__main__":
    sys.exit(main())
