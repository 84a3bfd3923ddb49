"""Command-line interface: simulate, validate, list-presets."""

from __future__ import annotations

import argparse
import sys

from .errors import RabiSimError
from .scenario import PRESETS, config_from_dict, parse_config, run_scenario


def _parse_preset(text: str) -> int:
    digits = text.lower().removeprefix("figure").removeprefix("f")
    try:
        fig = int(digits)
    except ValueError:
        raise SystemExit(f"error: cannot parse preset {text!r} (use e.g. figure14)")
    if fig not in PRESETS:
        raise SystemExit(f"error: no preset for figure {fig}")
    return fig


def _load_config(args) -> "ScenarioConfig":
    doc = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text)
        doc = cfg.to_dict()
        doc["figure"] = None
    if args.preset is not None:
        fig = _parse_preset(args.preset)
        if args.config is not None:
            raise SystemExit("error: give either a config file or --preset, not both")
        doc = {"figure": fig}
    if not doc:
        raise SystemExit("error: a config file or --preset is required")
    if args.solver is not None:
        doc["solver"] = args.solver.replace("-", "_")
    if getattr(args, "q1", None) is not None:
        q1 = args.q1
        doc.setdefault("trunc", {})
        doc["trunc"]["Q1"] = "auto" if q1 == "auto" else int(q1)
    if getattr(args, "out", None) is not None:
        doc["output"] = args.out
    return config_from_dict(doc)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out_dir = cfg.output or f"runs/{cfg.config_hash()[:12]}"
    results = run_scenario(cfg, out_dir=out_dir)
    for label, traj in results.items():
        flag = "  [non-converged truncation]" if traj.provenance["non_converged"] else ""
        print(f"{label}: {len(traj.records)} samples, Q1={traj.provenance['q1']}{flag}")
    print(f"outputs written to {out_dir}")
    return 0


def cmd_validate(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    print(f"OK: config hash {cfg.config_hash()}")
    return 0


def cmd_list_presets(_args) -> int:
    for fig in sorted(PRESETS):
        cfg = config_from_dict({"figure": fig})
        init = cfg.initial
        if init.kind == "coherent":
            desc = f"coherent alpha={init.alpha:g}"
        elif init.kind == "odd_cat":
            desc = f"odd cat alpha={init.alpha:g}"
        elif init.kind == "squeezed_coherent":
            desc = f"squeezed coherent s={init.s:g} beta={init.beta:g}"
        elif init.kind == "squeezed_vacuum":
            desc = f"squeezed vacuum s={init.s:g}"
        elif init.kind == "thermal":
            desc = f"thermal nbar={init.alpha:g}"
        else:
            qubit = "e" if cfg.qubit_excited else "g"
            desc = f"|{qubit},{init.fock_n}>"
        mod = cfg.model.modulation
        extra = f" modulated eta0={mod.eta0:g}" if mod is not None else ""
        print(f"figure{fig:<3d} g={cfg.model.g:<5g} Omega0={cfg.model.Omega0:<7g} "
              f"rates={cfg.rates.kappa0:<6g} {desc}{extra}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rabisim",
        description="Dissipative quantum Rabi model simulator (GKSL vs dressed "
                    "master equations)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and write CSV/JSON outputs")
    p_sim.add_argument("config", nargs="?", help="YAML scenario file")
    p_sim.add_argument("--preset", help="figure preset, e.g. figure14")
    p_sim.add_argument("--solver", choices=["gksl", "dme-dressed", "dme-bare", "all"])
    p_sim.add_argument("--out", help="output directory")
    p_sim.add_argument("--q1", help="Fock cutoff (integer or 'auto')")
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate", help="parse and validate a scenario file")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)

    p_list = sub.add_parser("list-presets", help="show the figure preset registry")
    p_list.set_defaults(func=cmd_list_presets)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RabiSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
