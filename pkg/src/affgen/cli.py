"""Command-line interface: ``affgen {solve,generators,integrate,check}``.

Exit codes: 0 pass, 1 audit failure, 2 input error, 3 rank/degeneracy,
4 integration diverged.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .config import ConfigError, load_document, load_scenario, parse_points, parse_system
from .dynamics import Scenario, Trajectory, audit, integrate, synthesize
from .errors import DomainError, IntegrationDivergedError, RankDeficiencyError, RegionTooLargeError
from .intersect import check_independent, solve_intersection, verify_solution
from .riemann import generator_set

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_INPUT = 2
EXIT_RANK = 3
EXIT_DIVERGED = 4


def fmt(x: float) -> str:
    """Shortest round-trip decimal (never more than 17 significant digits)."""
    return repr(float(x))


def _err(msg: str) -> None:
    print(f"affgen: {msg}", file=sys.stderr)


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    doc = load_document(args.input)
    try:
        system = parse_system(doc)
        sol = solve_intersection(system)
    except RankDeficiencyError as exc:
        _err(f"{exc} (smallest singular value {exc.smallest:.6e})")
        return EXIT_RANK
    except DomainError as exc:
        raise ConfigError("<system>", str(exc), doc.get("_source")) from None
    tol = args.tol if args.tol is not None else 1e-9
    report = verify_solution(system, sol, tol)
    out = {
        "dim": system.dim,
        "k": system.k,
        "p": system.p,
        "particular": None if sol.particular is None else sol.particular.to_vector().tolist(),
        "basis": [b.to_vector().tolist() for b in sol.basis],
        "report": report.as_dict(),
    }
    if not sol.basis:
        out["note"] = "unique solution"
    elif sol.particular is None:
        out["note"] = "linear subspace (no affine equations)"
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return EXIT_OK if report.passed else EXIT_AUDIT


# ---------------------------------------------------------------------------
# generators


def _generator_rows(scenario: Scenario, points):
    n, k, p = scenario.dim, scenario.k, scenario.p
    X = scenario.conserved_fields()
    Y = scenario.dissipated_fields()
    m = n - k - p
    good = []
    flagged = set()
    for i, x in enumerate(points):
        try:
            check_independent(scenario.gradients_at(x), "gradients", point=x)
            good.append(x)
        except RankDeficiencyError:
            flagged.add(i)
    gs = generator_set(X, Y, scenario.rates, scenario.metric, good) if good else None

    header = [f"x_{i}" for i in range(1, n + 1)]
    if p:
        header += [f"X0_{i}" for i in range(1, n + 1)]
    for a in range(1, m + 1):
        header += [f"gen{a}_{i}" for i in range(1, n + 1)]
    header += [f"res_I_{i}" for i in range(1, k + 1)]
    header += [f"res_D_{j}" for j in range(1, p + 1)]
    header += ["res_gen", "flagged"]

    rows = []
    for i, x in enumerate(points):
        if i in flagged:
            width = len(header) - n - 1
            rows.append([fmt(c) for c in x] + ["nan"] * width + ["1"])
            continue
        G = scenario.metric.at(x).matrix
        gI = [X_i(x) for X_i in X]
        gD = [Y_j(x) for Y_j in Y]
        x0 = gs.particular(x) if gs.particular is not None else np.zeros(n)
        gens = [f(x) for f in gs.generators]
        res_I = [abs(float(x0 @ G @ v)) for v in gI]
        res_D = [abs(float(x0 @ G @ w) - h(x)) for w, h in zip(gD, scenario.rates)]
        res_gen = 0.0
        for u in gens:
            un = u / np.linalg.norm(u)
            for c in gI + gD:
                res_gen = max(res_gen, abs(float(un @ G @ c)) / max(np.linalg.norm(c), 1e-300))
        row = [fmt(c) for c in x]
        if p:
            row += [fmt(c) for c in x0]
        for u in gens:
            row += [fmt(c) for c in u]
        row += [fmt(r) for r in res_I + res_D] + [fmt(res_gen), "0"]
        rows.append(row)
    return header, rows, flagged


def cmd_generators(args) -> int:
    scenario = load_scenario(args.scenario)
    if not args.points:
        raise ConfigError("--points", "a points file is required")
    pts_doc = load_document(args.points, mapping=False)
    points = parse_points(pts_doc, scenario.dim, args.points)
    try:
        header, rows, flagged = _generator_rows(scenario, points)
    except RegionTooLargeError as exc:
        _err(str(exc))
        return EXIT_RANK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _emit(buf.getvalue(), args.output)
    for i in sorted(flagged):
        _err(f"point {i} {tuple(float(c) for c in points[i])}: constraint gradients dependent (row flagged)")
    return EXIT_RANK if flagged else EXIT_OK


# ---------------------------------------------------------------------------
# integrate / check


def trajectory_header(scenario: Scenario) -> list[str]:
    n, k, p = scenario.dim, scenario.k, scenario.p
    return (
        ["t"]
        + [f"x_{i}" for i in range(1, n + 1)]
        + [f"I_{i}" for i in range(1, k + 1)]
        + [f"D_{j}" for j in range(1, p + 1)]
        + [f"h_{j}" for j in range(1, p + 1)]
    )


def trajectory_csv(traj: Trajectory, scenario: Scenario) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trajectory_header(scenario))
    for i in range(len(traj)):
        row = [traj.times[i], *traj.states[i], *traj.conserved[i], *traj.dissipated[i], *traj.rates[i]]
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def cmd_integrate(args) -> int:
    scenario = load_scenario(args.scenario)
    if not args.output:
        raise ConfigError("--output", "an output path is required")
    try:
        field = synthesize(scenario)
        traj = integrate(field, scenario.x0, scenario.dt, scenario.steps, scenario)
    except IntegrationDivergedError as exc:
        write_atomic(args.output, trajectory_csv(exc.partial, scenario))
        _err(f"{exc}; partial trajectory written to {args.output}")
        return EXIT_DIVERGED
    except (RankDeficiencyError, RegionTooLargeError) as exc:
        _err(str(exc))
        return EXIT_RANK
    write_atomic(args.output, trajectory_csv(traj, scenario))
    return EXIT_OK


def read_trajectory(path: str, scenario: Scenario) -> Trajectory:
    expected = trajectory_header(scenario)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError("--input", f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError("header", "empty trajectory file", path)
        if header != expected:
            raise ConfigError(
                "header", f"columns {header} do not match scenario columns {expected}", path
            )
        data = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise ConfigError(f"row {lineno}", f"expected {len(expected)} values, got {len(row)}", path)
            try:
                data.append([float(v) for v in row])
            except ValueError:
                raise ConfigError(f"row {lineno}", "non-numeric value", path) from None
    if len(data) < 2:
        raise ConfigError("rows", "trajectory needs at least two rows", path)
    arr = np.array(data)
    n = scenario.dim
    times = arr[:, 0]
    states = arr[:, 1 : 1 + n]
    I, D, h = scenario.sample(states)
    return Trajectory(times, states, I, D, h)


def cmd_check(args) -> int:
    scenario = load_scenario(args.scenario)
    if not args.input:
        raise ConfigError("--input", "a trajectory CSV is required")
    traj = read_trajectory(args.input, scenario)
    report = audit(traj, scenario)
    tol = args.tol if args.tol is not None else scenario.tol
    print(report.format(tol))
    return EXIT_OK if report.passed(tol) else EXIT_AUDIT


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affgen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="intersect linear/affine hyperplanes")
    p.add_argument("--input", required=True, help="system document (YAML)")
    p.add_argument("--output", help="write JSON here instead of stdout")
    p.add_argument("--tol", type=float, help="residual tolerance (default 1e-9)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generators", help="tabulate X0 and local generators at sample points")
    p.add_argument("--scenario", required=True, help="built-in name or scenario document")
    p.add_argument("--points", help="points document (YAML list of coordinates)")
    p.add_argument("--output", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_generators)

    p = sub.add_parser("integrate", help="integrate the synthesized field with RK4")
    p.add_argument("--scenario", required=True)
    p.add_argument("--output", help="trajectory CSV path")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("check", help="audit a trajectory CSV against its scenario")
    p.add_argument("--input", help="trajectory CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--tol", type=float, help="override the scenario tolerance")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except RankDeficiencyError as exc:
        _err(str(exc))
        return EXIT_RANK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
