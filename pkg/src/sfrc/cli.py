"""Command-line entry point: ``sfrc <subcommand> [flags]``.

Exit codes: 0 ok, 1 acceptance failure, 2 usage or configuration error,
3 runtime failure (jamming, solver).
"""
import argparse
from dataclasses import replace
import csv
import json
import logging
import os
import sys

import numpy as np

from . import acceptance, config as config_mod, corranalysis as ca
from . import experiments as ex
from . import homogenize, microgen, stochastic, sweeps
from . import materials as mm
from .errors import (ConfigError, DomainError, JammingError, SingularMatrixError,
                     SolverError)
from .manifest import RunManifest

log = logging.getLogger("sfrc")

EXIT_OK, EXIT_ACCEPTANCE, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
QUICK_REALIZATIONS = 2
QUICK_SAMPLES = 10_000


def _out_dir(cfg, *parts):
    path = os.path.join(cfg.out, *parts)
    os.makedirs(path, exist_ok=True)
    return path


def _realizations(cfg):
    return min(cfg.realizations, QUICK_REALIZATIONS) if cfg.quick else cfg.realizations


def _run_table(cfg, ens, path, manifest, label):
    """Run an ensemble with a resumable checkpoint next to ``path``."""
    partial = path + ".partial"
    table = ca.ensemble_run(
        ens, workers=cfg.workers, checkpoint=partial,
        progress=lambda done, total: log.info("%s: %d/%d realizations", label, done, total))
    table.to_csv(path)
    os.remove(partial)
    manifest.add_seeds(label, table.seeds)
    manifest.add_output(path)
    return table


def _write_csv(path, header, rows, manifest):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    manifest.add_output(path)


def _fmt(v):
    return repr(float(v))


# -- subcommands -------------------------------------------------------------

def cmd_analytic(cfg, manifest, models=None, vary=None):
    out = _out_dir(cfg, "analytic")
    a = cfg.analytic
    models = models or a["models"]
    vary = vary or a["vary"]
    matrix, fiber = cfg.phase_pair
    base = {m: mm.MODELS[m](matrix, fiber, ex.MEAN_LENGTH / ex.MEAN_DIAMETER,
                            cfg.generation["target_fraction"]) for m in models}
    _write_csv(os.path.join(out, "constants.csv"),
               ["model", "e1_GPa", "e2_GPa", "g12_GPa", "g23_GPa", "nu12", "nu21", "nu23"],
               [[m, *(_fmt(getattr(c, k)) for k in ("e1", "e2", "g12", "g23", "nu12",
                                                      "nu21", "nu23"))]
                for m, c in base.items()], manifest)
    _write_csv(os.path.join(out, f"matrices_{cfg.state}.csv"),
               ["model", "state", "C11_GPa", "C12_GPa", "C22_GPa", "C66_GPa"],
               [[m, cfg.state, *(_fmt(mm.state_matrix(c, cfg.state)[lab])
                                 for lab in ("11", "12", "22", "66"))]
                for m, c in base.items()], manifest)
    n = QUICK_SAMPLES if cfg.quick else a["samples"]
    lo, hi, k = a["fraction_grid"]
    for m in models:
        for i, v in enumerate(vary):
            stem = os.path.join(out, f"sweep_{m}_{v}_{cfg.state}")
            if v == "volume_fraction":
                res = sweeps.volume_fraction_curve(m, np.linspace(lo, hi, int(k)), cfg.state,
                                                   matrix=matrix, fiber=fiber)
            else:
                spec = sweeps.SweepSpec(model=m, vary=v, n_samples=n, state=cfg.state,
                                        matrix=matrix, fiber=fiber)
                seed = stochastic.derive_seed(cfg.seed, sweeps.VARIABLES.index(v))
                res = sweeps.run_sweep(spec, np.random.default_rng(seed))
            res.to_csv(stem + ".csv")
            res.to_json(stem + ".json")
            manifest.add_output(stem + ".csv")
            manifest.add_output(stem + ".json")
    return EXIT_OK


def cmd_microgen(cfg, manifest):
    out = _out_dir(cfg, "microgen")
    g, mg = cfg.generation, cfg.microgen
    gen = microgen.GenerationConfig(
        width=g["domain_um"], height=g["domain_um"], target_fraction=g["target_fraction"],
        max_rejections=g["max_rejections"], length=mg["length_um"],
        diameter=mg["diameter_um"], orientation=mg["orientation_deg"])
    matrix, fiber = cfg.phase_pair
    summaries, seeds = [], []
    for i in range(mg["count"]):
        seed = stochastic.derive_seed(cfg.seed, i, 0)
        m = microgen.generate_microstructure(replace(gen, seed=seed))
        path = os.path.join(out, f"microstructure_{i:04d}.sfrc")
        microgen.save(m, path)
        manifest.add_output(path)
        seeds.append(seed)
        theta = np.array([f.orientation for f in m.fibers])
        phi = m.achieved_volume_fraction
        summaries.append({
            "file": os.path.basename(path),
            "seed": seed,
            "domain_um": [m.width, m.height],
            "fibers": len(m.fibers),
            "target_fraction": g["target_fraction"],
            "achieved_volume_fraction": phi,
            "achieved_mass_fraction": mm.volume_to_mass_fraction(phi, fiber.density,
                                                                 matrix.density),
            "fixed_orientation": mg["orientation_deg"] is not None,
            "anisotropic": mg["orientation_deg"] is not None,
            "orientation_mean_deg": float(theta.mean()) if theta.size else None,
            "orientation_std_deg": float(theta.std()) if theta.size else None,
            "mean_length_um": float(np.mean([f.length for f in m.fibers])) if m.fibers else None,
            "mean_diameter_um": float(np.mean([f.diameter for f in m.fibers])) if m.fibers else None,
        })
        log.info("microstructure %d: %d fibers, fraction %.4f", i, len(m.fibers), phi)
    manifest.add_seeds("microgen", seeds)
    path = os.path.join(out, "summary.json")
    with open(path, "w") as fh:
        json.dump(summaries, fh, indent=2)
    manifest.add_output(path)
    return EXIT_OK


ELEMENTSIZE_LABELS = ("11", "12", "21", "22", "66")


def cmd_elementsize(cfg, manifest, window=None):
    out = _out_dir(cfg, "elementsize")
    window = window or cfg.elementsize["window_um"]
    rows = []
    R = _realizations(cfg)
    for h in cfg.elementsize["h_um"]:
        ens = ex.window_ensemble(
            ex.fixed_window_generation(window, target_fraction=cfg.generation["target_fraction"]),
            window, R, cfg.seed, h=h, state=cfg.state, bc_kinds=cfg.bc_kinds,
            phases=cfg.phase_pair)
        table = _run_table(cfg, ens, os.path.join(out, f"table_h{h:g}_{window}.csv"), manifest,
                           f"elementsize_h{h:g}")
        for kind, s in ex.summarize(table).items():
            rows.append([kind, _fmt(h), *(_fmt(s.get(lab)) for lab in ELEMENTSIZE_LABELS),
                         _fmt(ex.mass_fraction(s.fraction, cfg.phase_pair)), str(s.n)])
    _write_csv(os.path.join(out, f"elementsize_{window}.csv"),
               ["bc_kind", "h_um", *(f"C{lab}_GPa" for lab in ELEMENTSIZE_LABELS), "phi_m",
                "n_realizations"], rows, manifest)
    return EXIT_OK


def cmd_influence(cfg, manifest, windows=None):
    out = _out_dir(cfg, "influence")
    windows = windows or cfg.windows
    R = _realizations(cfg)
    rows = []
    for name in cfg.influence["scenarios"]:
        for w in windows:
            gen = ex.scenario_generation(name, w, cfg.generation["domain_um"],
                                         cfg.generation["target_fraction"])
            ens = ex.window_ensemble(gen, w, R, stochastic.derive_seed(cfg.seed, ex.SCENARIOS.index(name), w),
                                     h=cfg.mesh["h_um"], state=cfg.state,
                                     bc_kinds=cfg.bc_kinds, phases=cfg.phase_pair)
            table = _run_table(cfg, ens, os.path.join(out, f"table_{name}_{w}.csv"), manifest,
                               f"influence_{name}_{w}")
            for kind, s in ex.summarize(table).items():
                for lab in ca.COEFFICIENT_LABELS:
                    rows.append([name, str(w), kind, f"C{lab}", _fmt(s.get(lab)),
                                 _fmt(s.get(lab, "std")), str(s.n)])
    _write_csv(os.path.join(out, f"influence_{cfg.state}.csv"),
               ["scenario", "window_um", "bc_kind", "coefficient", "mean_GPa", "std_GPa",
                "n_realizations"], rows, manifest)
    return EXIT_OK


def cmd_corr(cfg, manifest, windows=None):
    out = _out_dir(cfg, "corr")
    windows = windows or cfg.corr["windows"]
    R = _realizations(cfg)
    for w in windows:
        ens = ca.EnsembleConfig(
            generation=ex.large_domain_generation(
                cfg.generation["domain_um"], target_fraction=cfg.generation["target_fraction"],
                max_rejections=cfg.generation["max_rejections"]),
            window=w, placements="moving", bc_kinds=tuple(cfg.bc_kinds), state=cfg.state,
            solver=homogenize.SolverConfig(h=cfg.mesh["h_um"]), realizations=R,
            master_seed=stochastic.derive_seed(cfg.seed, w), phases=cfg.phase_pair)
        stem = os.path.join(out, f"{cfg.state}_{w}")
        table = _run_table(cfg, ens, stem + "_table.csv", manifest, f"corr_{w}")
        if table.n_realizations < 2:
            log.warning("window %d: fewer than two realizations, no correlation curves", w)
            continue
        curves = ca.correlation_curves(table)
        ca.curves_to_csv(curves, stem + "_curves.csv")
        manifest.add_output(stem + "_curves.csv")
        rep = ca.independent_pair_reduction(curves)
        ca.curves_to_csv(rep.reduced, stem + "_curves_reduced.csv")
        manifest.add_output(stem + "_curves_reduced.csv")
        with open(stem + "_reduction.json", "w") as fh:
            json.dump({"max_swap_deviation": rep.max_swap_deviation,
                       "max_twin_deviation": rep.max_twin_deviation,
                       "swap_deviation": rep.swap_deviation,
                       "twin_deviation": rep.twin_deviation}, fh, indent=2)
        manifest.add_output(stem + "_reduction.json")
    return EXIT_OK


def cmd_verify(cfg, manifest):
    out = _out_dir(cfg, "verify")
    run = acceptance.AcceptanceRun(workers=cfg.workers, seed=acceptance.ACCEPTANCE_SEED,
                                   cache_dir=os.path.join(out, "cache"))
    results = acceptance.run_acceptance(quick=cfg.quick, run=run)
    path = os.path.join(out, "acceptance.json")
    with open(path, "w") as fh:
        json.dump([r.__dict__ for r in results], fh, indent=2)
    manifest.add_output(path)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_ACCEPTANCE if failed else EXIT_OK


# -- argument handling -------------------------------------------------------

def _common(p):
    p.add_argument("--config", metavar="PATH", help="TOML configuration file")
    p.add_argument("--seed", type=int, metavar="N", help="master seed")
    p.add_argument("--workers", type=int, metavar="N", help="worker processes")
    p.add_argument("--out", metavar="DIR", help="output directory (SFRC_OUT overrides)")
    p.add_argument("--state", choices=("plane-stress", "plane-strain"))
    p.add_argument("--window-um", type=int, metavar="N", help="single window size")
    p.add_argument("--realizations", type=int, metavar="N")
    p.add_argument("--quick", action="store_true", default=None,
                   help="reduced run (verify: analytic and oracle criteria only)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="sfrc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analytic": "analytical constants, matrices and parameter sweeps",
        "microgen": "generate microstructures",
        "elementsize": "element-size study on aligned-fiber windows",
        "influence": "per-scenario coefficient statistics",
        "corr": "moving-window correlation analysis",
        "verify": "run the acceptance checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        _common(p)
        if name == "analytic":
            p.add_argument("--model", action="append",
                           choices=sorted(config_mod.MODEL_NAMES), help="repeatable")
            p.add_argument("--vary", action="append", choices=sweeps.VARIABLES,
                           help="repeatable")
    return parser


COMMANDS = {"analytic": cmd_analytic, "microgen": cmd_microgen, "elementsize": cmd_elementsize,
            "influence": cmd_influence, "corr": cmd_corr, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_mod.load_config(args.config, {
            "seed": args.seed, "workers": args.workers, "out": args.out, "state": args.state,
            "realizations": args.realizations, "quick": args.quick})
    except ConfigError as exc:
        print(f"sfrc: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    manifest = RunManifest(args.command, cfg.out, cfg.snapshot())
    extra = {}
    if args.window_um is not None:
        extra = {"window": args.window_um} if args.command == "elementsize" else \
            {"windows": [args.window_um]} if args.command in ("influence", "corr") else {}
    if args.command == "analytic":
        extra = {"models": [config_mod.MODEL_NAMES[m] for m in args.model or []] or None,
                 "vary": args.vary}
    try:
        manifest.write()
        code = COMMANDS[args.command](cfg, manifest, **extra)
    except (ConfigError, DomainError) as exc:
        manifest.finalize("failed")
        print(f"sfrc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (JammingError, SolverError, SingularMatrixError) as exc:
        manifest.finalize("failed")
        print(f"sfrc: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    manifest.finalize("complete" if code == EXIT_OK else "failed")
    return code


if __name__ == "__main__":
    sys.exit(main())
