"""Command-line front door: solve, periodic, sweep, bench, anneal, export-circuit.

Single results are JSON on stdout with a trailing ``manifest`` section
(timing lives only there, so payloads are byte-stable for fixed inputs
and seeds); grids and traces are CSV.

Exit codes: 2 parse errors, 3 guard violations, 4 no cycle found.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import statistics
import sys
import time

from . import __version__
from .annealer import Schedule, anneal_batch
from .hamiltonian import (
    Hamiltonian,
    HamiltonianError,
    PeriodicHamiltonian1D,
    SupercellHamiltonian,
    gen_stochastic_heisenberg,
    load,
    make_cluster_chain,
    make_toric,
)
from .pauli import PauliError, PauliOp, format_pauli
from .solver_general import solve_general
from .solver_local1d import frontier_stats, solve_local1d
from .solver_periodic import (
    NoCycleFoundError,
    extended_scan,
    solve_periodic_1d,
    solve_supercell_c1,
)
from .stabgroup import GuardExceededError, StabGroup, StabGroupError

EXIT_PARSE = 2
EXIT_GUARD = 3
EXIT_NO_CYCLE = 4


def _read_input(path: str) -> tuple[str, str]:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)
    return data.decode(), hashlib.sha256(data).hexdigest()


def _manifest(args_list, input_hash=None, seeds=(), extra=None, wall=0.0, threads=1):
    out = {
        "command": args_list,
        "input_sha256": input_hash,
        "seeds": list(seeds),
        "versions": {"stabgs": __version__, "python": sys.version.split()[0]},
        "threads": threads,
    }
    if extra:
        out.update(extra)
    out["wall_time_s"] = wall
    return out


def _emit(payload, out_path=None):
    text = json.dumps(payload, indent=1)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("STABGS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_solve(args, argv) -> int:
    text, digest = _read_input(args.input)
    t0 = time.perf_counter()
    h = load(text)
    if not isinstance(h, Hamiltonian):
        print("solve expects a finite Hamiltonian (header 'qubits N')", file=sys.stderr)
        return EXIT_PARSE
    algo = args.algo
    if algo == "auto":
        algo = "local1d" if h.k <= 8 else "general"
    res = solve_local1d(h) if algo == "local1d" else solve_general(h)
    payload = {
        "energy": res.energy,
        "generators": [format_pauli(g) for g in res.group.generators],
        "algo": res.algorithm_tag,
        "tie_break": res.tie_break_note,
        "manifest": _manifest(argv, digest, wall=time.perf_counter() - t0),
    }
    _emit(payload, args.out)
    return 0


def cmd_periodic(args, argv) -> int:
    text, digest = _read_input(args.input)
    t0 = time.perf_counter()
    h = load(text)
    if isinstance(h, PeriodicHamiltonian1D):
        res = solve_periodic_1d(h, c_max=args.cmax, collect_degenerate=args.degenerate)
    elif isinstance(h, SupercellHamiltonian):
        res = solve_supercell_c1(h)
    else:
        print("periodic expects a 'period L' or 'supercell ...' input", file=sys.stderr)
        return EXIT_PARSE
    payload = {
        "e_per_site": res.e_per_site,
        "supercell_c": res.supercell_c,
        "generators": list(res.generators),
        "phase_signature": res.phase_signature,
    }
    if args.degenerate:
        payload["degenerate"] = [
            {
                "e_per_site": d.e_per_site,
                "supercell_c": d.supercell_c,
                "generators": list(d.generators),
                "phase_signature": d.phase_signature,
            }
            for d in (res,) + res.degenerate
        ]
    payload["manifest"] = _manifest(argv, digest, wall=time.perf_counter() - t0)
    _emit(payload, args.out)
    return 0


def _parse_grid(spec: str):
    axes = []
    for chunk in spec.split(","):
        parts = chunk.split(":")
        if len(parts) != 4:
            raise ValueError(f"bad grid axis {chunk!r}; want name:start:stop:steps")
        name, start, stop, steps = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
        if steps < 1:
            raise ValueError("grid steps must be >= 1")
        if steps == 1:
            values = [start]
        else:
            values = [start + i * (stop - start) / (steps - 1) for i in range(steps)]
        axes.append((name, values))
    if len(axes) != 2:
        raise ValueError("grid needs exactly two axes")
    return axes


def _sweep_point(task):
    model, p1, p2, cmax, angle_grid = task
    if model == "cluster":
        res = solve_periodic_1d(make_cluster_chain(p1, p2), c_max=cmax)
    elif model == "toric":
        h = make_toric(p1, p2)
        if angle_grid:
            results, best = extended_scan(h, angle_grid)
            res = results[best]
        else:
            res = solve_supercell_c1(h)
    else:
        with open(model) as fh:
            template = fh.read()
        h = load(template.format(p1=p1, p2=p2))
        if isinstance(h, PeriodicHamiltonian1D):
            res = solve_periodic_1d(h, c_max=cmax)
        else:
            res = solve_supercell_c1(h)
    return (p1, p2, res.e_per_site, res.supercell_c, res.phase_signature)


def cmd_sweep(args, argv) -> int:
    axes = _parse_grid(args.grid)
    angle_grid = []
    if args.angles:
        a_axes = _parse_grid(args.angles)
        angle_grid = [(a, b) for a in a_axes[0][1] for b in a_axes[1][1]]
    tasks = [
        (args.model, p1, p2, args.cmax, angle_grid)
        for p1 in axes[0][1]
        for p2 in axes[1][1]
    ]
    threads = _threads(args)
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_point, tasks, chunksize=8))
    else:
        rows = [_sweep_point(t) for t in tasks]
    lines = ["param1,param2,e_per_site,supercell_c,phase_signature"]
    for p1, p2, e, c, sig in rows:
        lines.append(f"{p1!r},{p2!r},{e!r},{c},{sig}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args, argv) -> int:
    per_site: list[list] = []
    warms, totals = [], []
    frontier = None
    for _ in range(max(1, args.repeat)):
        h = gen_stochastic_heisenberg(args.n, args.k, args.seed, args.model == "xxyyzz")
        stats = frontier_stats(h)
        warms.append(stats["warm_time_s"])
        totals.append(stats["total_time_s"])
        per_site.append([r["time_s"] for r in stats["records"]])
        frontier = [r["frontier_size"] for r in stats["records"]]
    medians = [statistics.median(col) for col in zip(*per_site)]
    lines = ["site,frontier_size,median_time_s"]
    for site, (f, t) in enumerate(zip(frontier, medians)):
        lines.append(f"{site},{f},{t!r}")
    lines.append(f"# warm_time_s={statistics.median(warms)!r}")
    lines.append(f"# total_median_time_s={statistics.median(totals)!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_anneal(args, argv) -> int:
    text, digest = _read_input(args.input)
    t0 = time.perf_counter()
    h = load(text)
    lo, hi = (int(v) for v in args.seeds.split(".."))
    seeds = list(range(lo, hi + 1))
    schedule = Schedule(args.tstart, args.tend, args.steps)
    results = anneal_batch(
        h, schedule, seeds, layers=args.layers, random_init=args.random_init
    )
    exact = solve_local1d(h).energy
    best = [r.best_energy for r in results]
    n_exact = sum(1 for b in best if b <= exact + 1e-9)
    payload = {
        "exact_energy": exact,
        "best_energies": best,
        "fraction_exact": n_exact / len(best),
        "mean_ratio": (
            sum(b / exact for b in best) / len(best) if exact != 0 else None
        ),
    }
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
        for seed, r in zip(seeds, results):
            path = os.path.join(args.trace_dir, f"trace_{seed}.csv")
            with open(path, "w") as fh:
                fh.write("step,temperature,energy,best_energy\n")
                for step, temp, e, b in r.trace:
                    fh.write(f"{step},{temp!r},{e!r},{b!r}\n")
    payload["manifest"] = _manifest(
        argv, digest, seeds=seeds, wall=time.perf_counter() - t0
    )
    _emit(payload, args.out)
    return 0


def _kernel_basis(rows, width):
    """Deterministic basis of the kernel of GF(2) row constraints."""
    rref = []
    for v in rows:
        for r in rref:
            if v & (r & -r):
                v ^= r
        if v:
            piv = v & -v
            rref = [r ^ v if r & piv else r for r in rref]
            rref.append(v)
            rref.sort(key=lambda r: r & -r)
    pivots = {(r & -r).bit_length() - 1 for r in rref}
    basis = []
    for col in range(width):
        if col in pivots:
            continue
        vec = 1 << col
        for r in rref:
            if (r >> col) & 1:
                vec |= 1 << ((r & -r).bit_length() - 1)
        basis.append(vec)
    return basis


def _canonical_completion(group: StabGroup) -> StabGroup:
    """Deterministically extend a group to full rank with commuting Paulis."""
    n = group.n_sites
    mask = (1 << n) - 1
    while group.rank < n:
        constraints = [g.z_bits | (g.x_bits << n) for g in group.generators]
        added = False
        for vec in sorted(_kernel_basis(constraints, 2 * n)):
            p = PauliOp(n, vec & mask, vec >> n, 0)
            if group.member_sign(p) == "absent":
                group = group.extend(p)
                added = True
                break
        if not added:
            raise StabGroupError("completion failed")
    return group


def cmd_export_circuit(args, argv) -> int:
    text, digest = _read_input(args.input)
    t0 = time.perf_counter()
    h = load(text)
    if not isinstance(h, Hamiltonian):
        print("export-circuit expects a finite Hamiltonian", file=sys.stderr)
        return EXIT_PARSE
    algo = args.algo
    if algo == "auto":
        algo = "local1d" if h.k <= 8 else "general"
    res = solve_local1d(h) if algo == "local1d" else solve_general(h)
    completed = res.group.rank < h.n_sites
    group = _canonical_completion(res.group) if completed else res.group
    circuit = group.to_clifford_circuit()
    payload = circuit.to_json_dict()
    payload["energy"] = res.energy
    payload["completed"] = completed
    payload["manifest"] = _manifest(argv, digest, wall=time.perf_counter() - t0)
    _emit(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stabgs", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="worker processes (env STABGS_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="stabilizer ground state of a finite chain")
    p.add_argument("--algo", choices=["local1d", "general", "auto"], default="auto")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("periodic", help="periodic / supercell ground state per site")
    p.add_argument("--input", required=True)
    p.add_argument("--cmax", type=int, default=6)
    p.add_argument("--degenerate", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("sweep", help="phase-diagram grid, CSV output")
    p.add_argument("--model", required=True, help="cluster | toric | template file")
    p.add_argument("--grid", required=True, help="p1:start:stop:steps,p2:start:stop:steps")
    p.add_argument("--angles", help="rotation grid a:start:stop:steps,b:start:stop:steps")
    p.add_argument("--cmax", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="per-site timing of the 1D sweep")
    p.add_argument("--model", choices=["xxyyzz", "xxyy"], default="xxyyzz")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("anneal", help="simulated-annealing baseline")
    p.add_argument("--input", required=True)
    p.add_argument("--seeds", default="0..0", help="inclusive range like 0..99")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--steps", type=int, default=2500)
    p.add_argument("--tstart", type=float, default=5.0)
    p.add_argument("--tend", type=float, default=0.05)
    p.add_argument("--random-init", action="store_true")
    p.add_argument("--trace-dir")
    p.add_argument("--out")
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("export-circuit", help="Clifford preparation circuit of the ground group")
    p.add_argument("--algo", choices=["local1d", "general", "auto"], default="auto")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_circuit)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, ["stabgs"] + argv)
    except (HamiltonianError, PauliError, ValueError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GuardExceededError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except NoCycleFoundError as exc:
        print(f"no cycle found: {exc}", file=sys.stderr)
        return EXIT_NO_CYCLE


if __name__ == "__main__":
    sys.exit(main())
