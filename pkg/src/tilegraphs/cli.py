"""Command-line interface: build, analyze-growth, analyze-separators, pack."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, RunManifest
from .errors import BudgetExceededError, InvariantError, ValidationError
from .growth import diameter, growth_profile, sample_vertices
from .io import dumps, graph_to_json, tiling_to_json, write_csr, write_csv, write_json
from .packing import (
    check_neat,
    cube_mesh,
    cube_packing,
    cubes_to_json,
    min_radius_by_cube,
    packing_to_json,
    sphere_mesh,
    sphere_pack,
    validate_packing,
    write_mesh,
)
from .separators import check_all_fibers, project, separator_sweep
from .tangency import alpha_stats, build_tangency_graph, check_degree_bound
from .tiling import growth_degree, power_tiling

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, default=3, help="dimension")
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--gamma", type=_ints, help="sequence, e.g. 3,6,3")
    src.add_argument("--pqh", type=_ints, help="parameters p,q,h of the standard family")
    common.add_argument("--power", type=int, default=1, help="tensor power n")
    common.add_argument("--budget", type=int, default=10**7, help="maximum number of tiles")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="out", help="output directory (or mesh file for pack)")

    p = argparse.ArgumentParser(prog="tilegraphs", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build the tiling and its tangency graph")
    g = sub.add_parser("analyze-growth", parents=[common], help="ball growth profile")
    g.add_argument("--samples", type=int, default=64)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--radii", type=_ints, default=())
    s = sub.add_parser("analyze-separators", parents=[common], help="fiber certificates and max-flow counts")
    s.add_argument("--samples", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--radii", type=_ints, default=())
    s.add_argument("--gap", type=int, default=2, help="R' = R + gap")
    k = sub.add_parser("pack", parents=[common], help="cube or sphere packing")
    k.add_argument("kind", choices=["spheres", "cubes"])
    k.add_argument("--tol", type=float, default=1e-9, help="relative tangency tolerance")
    k.add_argument("--mesh-level", type=int, default=1, help="icosphere refinement")
    return p


def config_from_args(args) -> ExperimentConfig:
    cfg = dict(
        command=args.command if args.command != "pack" else f"pack-{args.kind}",
        d=args.d, gamma=args.gamma, pqh=args.pqh, power=args.power,
        budget=args.budget, threads=args.threads, out=args.out,
    )
    for key in ("samples", "seed", "radii", "gap", "tol", "mesh_level"):
        if hasattr(args, key):
            cfg[key] = getattr(args, key)
    return ExperimentConfig(**cfg)


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_build(cfg: ExperimentConfig, man: RunManifest) -> dict:
    gamma = cfg.sequence()
    T = man.timed("tiling", power_tiling, cfg.d, gamma, cfg.power, cfg.budget)
    G = man.timed("tangency", build_tangency_graph, T)
    stats = alpha_stats(T, G)
    deg = check_degree_bound(T, G, stats)
    diam = man.timed("diameter", diameter, G)
    b = gamma.b
    out = _outdir(cfg)
    files = {"tiling": out / "tiling.json", "graph": out / "graph.json", "csr": out / "graph.csr", "summary": out / "build.json"}
    write_json(tiling_to_json(T), files["tiling"])
    write_json(graph_to_json(G), files["graph"])
    write_csr(G, files["csr"])
    summary = {
        "tiles": len(T), "edges": G.num_edges, "alpha": stats.alpha, "L": stats.L,
        "max_degree": deg.max_degree, "degree_bound": deg.bound, "degree_ok": deg.ok,
        "diam_lower": diam.lower, "diam_upper": diam.upper,
        "diam_sandwich": [b ** cfg.power - 1, (cfg.d + 1) * b ** cfg.power],
    }
    write_json(summary, files["summary"])
    for name, path in files.items():
        man.record(name, path)
    return summary


def _default_radii(cfg: ExperimentConfig, offset: int) -> tuple[int, ...]:
    b = cfg.sequence().b
    return tuple(offset * b ** j for j in range(max(cfg.power, 1)))


def cmd_analyze_growth(cfg: ExperimentConfig, man: RunManifest) -> dict:
    gamma = cfg.sequence()
    k = growth_degree(gamma, cfg.d)
    T = man.timed("tiling", power_tiling, cfg.d, gamma, cfg.power, cfg.budget)
    G = man.timed("tangency", build_tangency_graph, T)
    radii = cfg.radii or tuple(gamma.b ** j for j in range(1, cfg.power + 1))
    prof = man.timed("growth", growth_profile, G, radii, cfg.samples, cfg.seed, k, cfg.threads)
    out = _outdir(cfg)
    write_csv(out / "profile.csv", ["vertex_id", "R", "ball_size"], prof.rows())
    write_json(prof.summary(), out / "growth.json")
    man.record("profile", out / "profile.csv")
    man.record("summary", out / "growth.json")
    return prof.summary()


def cmd_analyze_separators(cfg: ExperimentConfig, man: RunManifest) -> dict:
    gamma = cfg.sequence()
    T = man.timed("tiling", power_tiling, cfg.d, gamma, cfg.power, cfg.budget)
    G = man.timed("tangency", build_tangency_graph, T)
    fam = man.timed("projection", project, T)
    fibers = check_all_fibers(G, fam)
    radii = cfg.radii or _default_radii(cfg, cfg.d + 1)
    verts = sample_vertices(len(T), cfg.samples, cfg.seed, exhaustive_limit=0)
    rows = man.timed("sweep", separator_sweep, T, G, fam, verts, radii, cfg.gap)
    out = _outdir(cfg)
    certs = [{k: r.as_dict()[k] for k in ("v", "R", "Rprime", "h", "fiber_count", "flow_count", "cut_size", "regime_ok")}
             for r in rows]
    write_json(certs, out / "certificates.json")
    header = list(rows[0].as_dict()) if rows else ["v"]
    write_csv(out / "sweep.csv", header, [list(r.as_dict().values()) for r in rows])
    man.record("certificates", out / "certificates.json")
    man.record("sweep", out / "sweep.csv")
    menger = all(r.menger_ok for r in rows)
    if not menger:
        raise InvariantError("max-flow value differs from the verified minimum cut")
    return {"fibers": fibers.fibers, "fibers_are_paths": fibers.all_paths, "rows": len(rows), "menger_ok": menger}


def _pack_paths(cfg: ExperimentConfig, stem: str) -> tuple[Path, Path]:
    out = Path(cfg.out)
    if out.suffix in (".ply", ".obj"):
        out.parent.mkdir(parents=True, exist_ok=True)
        return out, out.with_suffix(".json")
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{stem}.ply", out / f"{stem}.json"


def cmd_pack(cfg: ExperimentConfig, man: RunManifest) -> dict:
    gamma = cfg.sequence()
    C = man.timed("cubes", cube_packing, gamma, cfg.power, cfg.d, budget=cfg.budget)
    neat = check_neat(C)
    if cfg.command == "pack-cubes":
        mesh, meta = _pack_paths(cfg, "cubes")
        write_json(cubes_to_json(C), meta)
        if cfg.d == 3:
            write_mesh(*cube_mesh(C), mesh)
            man.record("mesh", mesh)
        man.record("cubes", meta)
        return {"cubes": len(C), "neat": neat.ok, "aspect": C.aspect}
    P = man.timed("spheres", sphere_pack, C)
    rep = man.timed("validate", validate_packing, P, cfg.tol)
    mesh, meta = _pack_paths(cfg, "packing")
    write_json(packing_to_json(P, rep), meta)
    man.record("packing", meta)
    if cfg.d == 3:
        write_mesh(*sphere_mesh(P, cfg.mesh_level), mesh)
        man.record("mesh", mesh)
    summary = rep.summary()
    summary.update(P.params, min_radius_per_side=float(np.min(min_radius_by_cube(P))))
    if not rep.ok:
        raise InvariantError("sphere packing failed validation: " + "; ".join((rep.overlaps + rep.missing + rep.extra + rep.escaped)[:3]))
    return summary


COMMANDS = {
    "build": cmd_build,
    "analyze-growth": cmd_analyze_growth,
    "analyze-separators": cmd_analyze_separators,
    "pack-spheres": cmd_pack,
    "pack-cubes": cmd_pack,
}


def run(cfg: ExperimentConfig) -> tuple[dict, RunManifest]:
    man = RunManifest.start(cfg)
    result = COMMANDS[cfg.command](cfg, man)
    out = Path(cfg.out)
    man_dir = out.parent if out.suffix in (".ply", ".obj") else out
    man.write(man_dir / "manifest.json")
    return result, man


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        result, man = run(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetExceededError as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(dumps(result))
    print(f"config {man.config_hash[:12]} outputs " + " ".join(f"{k}={v[:12]}" for k, v in man.outputs.items()))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
