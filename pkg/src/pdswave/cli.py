"""Command-line pipeline: mesh, assemble, run, spectrum, validate, report.

Each stage reads and writes plain files (Tetgen-style mesh, Matrix Market
operators, CSV signals, JSON reports), so stages can be re-run and composed
independently.  Exit codes: 0 ok, 1 usage, 2 mesh, 3 evolution, 4 analysis.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import assemble, build_dof_map, estimate_spectral_bound
from .domain import build_domain
from .errors import (BreakdownPivot, ClassSizeError, DegenerateTet, EnergyBlowup,
                     NoConvergence, NotInDomain, ParseError,
                     PeriodicityViolation, SnapFailure, TooShort,
                     UnsupportedDegree, WeightSingularity)
from .evolve import (DOMAIN_DIAMETER, initial_bump, initial_random, leapfrog_run,
                     make_preconditioner, snap_probes)
from .icosian import cell_to_json, generate_group, group_to_json, orbit_vertices
from .mesh_io import export_mesh, import_mesh, write_vtk_mesh
from .meshing import generate_mesh, validate_mesh
from .quadrature import quadrature_rule
from .spectra import analyze_probe_signals, average_spectra, dft_magnitude

EXIT_OK, EXIT_USAGE, EXIT_MESH, EXIT_EVOLUTION, EXIT_ANALYSIS = 0, 1, 2, 3, 4

_MESH_ERRORS = (ParseError, PeriodicityViolation, SnapFailure, DegenerateTet,
                ClassSizeError, UnsupportedDegree, WeightSingularity, NotInDomain)
_EVOLUTION_ERRORS = (NoConvergence, EnergyBlowup, BreakdownPivot)
_ANALYSIS_ERRORS = (TooShort,)


def _default_out() -> str:
    return os.environ.get("PDSWAVE_OUT", "out")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_mesh_source(p):
    p.add_argument("--n", type=int, default=4, help="edge subdivisions per pentagon edge")
    p.add_argument("--layers", type=int, default=4, help="radial layers")
    p.add_argument("--grading", type=float, default=1.0, help="radial grading exponent")
    p.add_argument("--import-node", help="read mesh vertices from a .node file")
    p.add_argument("--import-ele", help="read mesh tets from an .ele file")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="geometric tolerance for imported meshes")


def _get_mesh(args, domain):
    if args.import_node or args.import_ele:
        if not (args.import_node and args.import_ele):
            raise ParseError("--import-node and --import-ele must be given together")
        mesh, report = import_mesh(domain, args.import_node, args.import_ele,
                                   tol=args.tol)
    else:
        mesh = generate_mesh(domain, args.n, args.layers, args.grading)
        report = validate_mesh(domain, mesh)
    return mesh, report


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def cmd_mesh(args) -> int:
    domain = build_domain()
    mesh, report = _get_mesh(args, domain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_mesh(mesh, out / "mesh.node", out / "mesh.ele")
    report["mesh_hash"] = mesh.content_hash()
    _write_json(out / "mesh_report.json", report)
    if args.vtk:
        write_vtk_mesh(out / "mesh.vtk", mesh)
    print(f"mesh: {report['tet_count']} tets, {report['node_count']} nodes")
    print(f"volume sum {report['volume_sum']:.10f} "
          f"(exact {report['volume_exact']:.10f}, "
          f"relative error {report['volume_relative_error']:.3e})")
    print(f"boundary edges in [{report['boundary_edge_min']:.6e}, "
          f"{report['boundary_edge_max']:.6e}], "
          f"{report['periodic_pairs']} periodic pairs")
    return EXIT_OK


def _build_operators(args, domain):
    mesh, mesh_report = _get_mesh(args, domain)
    dof_map = build_dof_map(mesh)
    ops = assemble(mesh, dof_map, quadrature_rule(args.degree))
    return mesh, mesh_report, dof_map, ops


def cmd_assemble(args) -> int:
    domain = build_domain()
    mesh, _, dof_map, ops = _build_operators(args, domain)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    info = {
        "mesh_hash": mesh.content_hash(),
        "n_dofs": dof_map.n_dofs,
        "n_interior": dof_map.n_interior,
        "per_edge_count": dof_map.per_edge_count,
        "per_face_count": dof_map.per_face_count,
        "corner_classes": dof_map.n_corner_classes,
        "quadrature_degree": args.degree,
        "mass_nnz_lower": ops.mass.nnz_lower,
        "mass_sum": ops.mass.total_sum(),
    }
    _write_json(out / "dof_report.json", info)
    if args.export_matrices:
        ops.mass.save_matrix_market(out / "mass.mtx")
        ops.stiffness.save_matrix_market(out / "stiffness.mtx")
        ops.radial.save_matrix_market(out / "radial.mtx")
    print(f"assembled {dof_map.n_dofs} dofs "
          f"({dof_map.n_interior} interior, {dof_map.n_corner_classes} corner classes)")
    print(f"sum of mass entries {ops.mass.total_sum():.10f}")
    return EXIT_OK


def _parse_points(text):
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append([float(v) for v in chunk.split(",")])
    return np.array(pts)


def cmd_run(args) -> int:
    domain = build_domain()
    mesh, mesh_report, dof_map, ops = _build_operators(args, domain)
    precond = make_preconditioner(ops.mass, args.precond)

    lam, dt_max = estimate_spectral_bound(ops.mass, ops.wave)
    if args.dt == "auto":
        dt = 0.95 * dt_max
    else:
        dt = float(args.dt)
    if args.random is not None:
        u0 = initial_random(args.random, args.amplitude, dof_map.n_dofs)
        initial = {"kind": "random", "seed": args.random, "amplitude": args.amplitude}
    else:
        x0, r0 = args.bump[:3], args.bump[3]
        u0 = initial_bump(mesh, dof_map, domain, x0, r0, args.amplitude)
        initial = {"kind": "bump", "center": list(x0), "radius": r0,
                   "amplitude": args.amplitude}

    first = args.window[0] if args.window else math.ceil(DOMAIN_DIAMETER / dt)
    last = args.window[1] if args.window else args.steps
    probes = snap_probes(mesh, dof_map, _parse_points(args.probes),
                         (first, last), dt, force_window=args.force_window)

    result = leapfrog_run(ops.mass, ops.wave, u0, dt=dt, steps=args.steps,
                          probes=probes, snapshot_every=args.snapshot_every,
                          dt_max=dt_max, force=args.force,
                          solve_tol=args.solve_tol, precond=precond,
                          two_phase_start=args.two_phase_start)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "energy.csv", "w") as fh:
        fh.write("step,time,energy\n")
        for k, e in enumerate(result.energy):
            fh.write(f"{k},{k * dt:.17g},{e:.17g}\n")
    with open(out / "probes.csv", "w") as fh:
        names = ",".join(f"probe_{k}" for k in range(len(probes.dofs)))
        fh.write(f"step,time,{names}\n")
        for row, k in enumerate(range(first, first + len(result.probe_signals))):
            vals = ",".join(f"{v:.17g}" for v in result.probe_signals[row])
            fh.write(f"{k},{k * dt:.17g},{vals}\n")
    for step, vec in result.snapshots:
        write_vtk_mesh(out / f"snapshot_{step:06d}.vtk", mesh,
                       {"u": vec[dof_map.node_to_dof]})
    manifest = {
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "mesh_hash": mesh.content_hash(),
        "mesh": {k: mesh_report[k] for k in ("tet_count", "node_count",
                                             "volume_relative_error")},
        "n_dofs": dof_map.n_dofs,
        "dt": dt, "dt_max": dt_max, "lambda_max": lam,
        "steps": args.steps,
        "initial": initial,
        "solve_tol": args.solve_tol,
        "preconditioner": precond.kind,
        "probe_nodes": [int(v) for v in probes.nodes],
        "window": [first, last],
    }
    _write_json(out / "manifest.json", manifest)
    e0, eT = result.energy[0], result.energy[-1]
    print(f"dt = {dt:.6e} (dt_max {dt_max:.6e}, lambda_max {lam:.6e})")
    print(f"E_d(0) = {e0:.14e}")
    print(f"E_d(T) = {eT:.14e}")
    if e0 != 0:
        print(f"relative energy drift {abs(eT - result.energy[1]) / abs(result.energy[1]):.3e}")
    return EXIT_OK


def _read_signals(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    steps = np.array([int(r[0]) for r in rows])
    times = np.array([float(r[1]) for r in rows])
    values = np.array([[float(v) for v in r[2:]] for r in rows])
    return header[2:], steps, times, values


def cmd_spectrum(args) -> int:
    manifest = None
    signals_path = Path(args.signals)
    if args.dt is None:
        mpath = signals_path.parent / "manifest.json"
        if not mpath.exists():
            raise TooShort("no --dt given and no manifest.json next to the signals")
        manifest = json.loads(mpath.read_text())
        dt = float(manifest["dt"])
    else:
        dt = args.dt
    _, steps, _, values = _read_signals(signals_path)
    if args.window:
        keep = (steps >= args.window[0]) & (steps <= args.window[1])
        steps, values = steps[keep], values[keep]
    if len(steps) and steps[0] * dt < DOMAIN_DIAMETER and not args.force_window:
        print(f"window starts at t = {steps[0] * dt:.4f} < domain diameter "
              f"{DOMAIN_DIAMETER:.6f}; transients pollute the spectrum "
              "(pass --force-window to proceed)", file=sys.stderr)
        return EXIT_ANALYSIS

    report = analyze_probe_signals(values, dt, count=args.count,
                                   min_prominence=args.prominence,
                                   tol=args.match_tol,
                                   window="hann" if args.hann else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spectra = [dft_magnitude(values[:, k], dt,
                             window="hann" if args.hann else None)
               for k in range(values.shape[1])]
    avg = average_spectra(spectra)
    with open(out / "spectrum.csv", "w") as fh:
        fh.write("bin,q,magnitude\n")
        qs = avg.bin_to_q(np.arange(len(avg.magnitude)))
        for j, (q, m) in enumerate(zip(qs, avg.magnitude)):
            fh.write(f"{j},{q:.17g},{m:.17g}\n")
    (out / "spectrum_report.json").write_text(report.to_json() + "\n")
    print(report.table())
    print(f"resolution dq = {report.resolution:.6f}, "
          f"{len(report.matches)} matched, {len(report.missing)} missing")
    return EXIT_OK


def cmd_validate(args) -> int:
    domain = build_domain()
    _, report = import_mesh(domain, args.import_node, args.import_ele, tol=args.tol)
    print(json.dumps(report, indent=1, sort_keys=True))
    ok = (report["vertices_inside"] and report["all_volumes_positive"]
          and report["conforming"] and report["partner_involution"])
    return EXIT_OK if ok else EXIT_MESH


def cmd_report(args) -> int:
    wrote = False
    if args.dump_group or args.dump_cell:
        table = generate_group()
        if args.dump_group:
            Path(args.dump_group).write_text(group_to_json(table) + "\n")
            print(f"wrote {args.dump_group}")
            wrote = True
        if args.dump_cell:
            domain = build_domain()
            pts, labels = orbit_vertices(table, domain.vertices4)
            Path(args.dump_cell).write_text(cell_to_json(pts, labels) + "\n")
            print(f"wrote {args.dump_cell}")
            wrote = True
    if args.dump_domain:
        Path(args.dump_domain).write_text(build_domain().to_json() + "\n")
        print(f"wrote {args.dump_domain}")
        wrote = True
    if args.run_dir:
        run_dir = Path(args.run_dir)
        manifest = json.loads((run_dir / "manifest.json").read_text())
        print(f"run of {manifest['steps']} steps, dt = {manifest['dt']:.6e}, "
              f"{manifest['n_dofs']} dofs (mesh {manifest['mesh_hash'][:12]})")
        rpath = run_dir / "spectrum_report.json"
        if rpath.exists():
            rep = json.loads(rpath.read_text())
            print(f"{'beta':>6} {'exact q^2':>12} {'numerical':>14} {'rel error':>13}")
            for m in rep["matches"]:
                print(f"{m['beta']:>6.0f} {m['exact_q2']:>12.0f} "
                      f"{m['detected_q2']:>14.4f} {m['relative_error']:>13.4e}")
        wrote = True
    if not wrote:
        print("nothing to do; pass --run-dir or --dump-* options", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _apply_config(argv):
    """Expand `--config file` into key=value pairs prepended as flags."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        return argv
    rest = argv[:i] + argv[i + 2:]
    extra = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"config line {body!r} is not key=value")
        key, value = (s.strip() for s in body.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                extra.append(flag)
        else:
            extra.extend([flag] + value.split())
    # config first so explicit flags win
    return rest[:1] + extra + rest[1:]


def build_parser() -> _Parser:
    parser = _Parser(prog="pdswave",
                     description="wave computation on the dodecahedral space")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate or import a periodic mesh")
    _add_mesh_source(p)
    p.add_argument("--out", default=_default_out(), help="output directory (default: $PDSWAVE_OUT or ./out)")
    p.add_argument("--vtk", action="store_true", help="also write mesh.vtk")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("assemble", help="build the identified-dof operators")
    _add_mesh_source(p)
    p.add_argument("--out", default=_default_out())
    p.add_argument("--degree", type=int, default=4, choices=(2, 4))
    p.add_argument("--export-matrices", action="store_true",
                   help="write mass/stiffness/radial in Matrix Market format")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("run", help="evolve an initial condition")
    _add_mesh_source(p)
    p.add_argument("--out", default=_default_out())
    p.add_argument("--degree", type=int, default=4, choices=(2, 4))
    p.add_argument("--dt", default="auto", help="time step, or 'auto' for 0.95 dt_max")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--bump", type=float, nargs=4, metavar=("X", "Y", "Z", "R"),
                   default=[0.0, 0.0, 0.0, 0.3], help="bump center and radius")
    p.add_argument("--random", type=int, default=None, metavar="SEED",
                   help="random initial data instead of a bump")
    p.add_argument("--amplitude", type=float, default=100.0)
    p.add_argument("--probes", default="0,0,0;0.1,0.05,0.15;-0.12,0.2,0.02",
                   help="semicolon-separated probe points x,y,z")
    p.add_argument("--window", type=int, nargs=2, metavar=("NI", "NF"), default=None)
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--solve-tol", type=float, default=1e-13)
    p.add_argument("--precond", choices=("ic0", "jacobi"), default="ic0")
    p.add_argument("--two-phase-start", action="store_true",
                   help="loose diagonal-preconditioned pass before each solve")
    p.add_argument("--force", action="store_true",
                   help="allow dt beyond the stability bound")
    p.add_argument("--force-window", action="store_true",
                   help="allow recording before one domain crossing")
    p.add_argument("--threads", type=int, default=1,
                   help="reserved; execution is single-threaded and deterministic")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("spectrum", help="extract eigenvalues from probe signals")
    p.add_argument("--signals", required=True, help="probes.csv from a run")
    p.add_argument("--out", default=_default_out())
    p.add_argument("--dt", type=float, default=None,
                   help="sample step (default: from manifest.json next to signals)")
    p.add_argument("--window", type=int, nargs=2, metavar=("NI", "NF"), default=None)
    p.add_argument("--count", type=int, default=10, help="exact eigenvalues to match")
    p.add_argument("--prominence", type=float, default=0.01)
    p.add_argument("--match-tol", type=float, default=0.05)
    p.add_argument("--hann", action="store_true", help="apply a Hann window")
    p.add_argument("--force-window", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("validate", help="validate an imported mesh")
    p.add_argument("--import-node", required=True)
    p.add_argument("--import-ele", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="summarize a run; dump group/domain JSON")
    p.add_argument("--run-dir", default=None)
    p.add_argument("--dump-group", default=None, metavar="FILE")
    p.add_argument("--dump-cell", default=None, metavar="FILE")
    p.add_argument("--dump-domain", default=None, metavar="FILE")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except _MESH_ERRORS as exc:
        print(f"mesh error: {exc}", file=sys.stderr)
        return EXIT_MESH
    except _EVOLUTION_ERRORS as exc:
        print(f"evolution error: {exc}", file=sys.stderr)
        return EXIT_EVOLUTION
    except _ANALYSIS_ERRORS as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVOLUTION if "dt" in str(exc) else EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
