"""Command-line entry point: ``capdrop <subcommand> ...``.

Exit codes: 0 success, 2 invalid input (config, files, arguments), 3 a run
did not converge and ``--strict`` was given, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION, __version__
from .config import ConfigError, build_container, build_minimize_config, config_hash, load_config, validate_config
from .energy import gauss_energy
from .geometry import diameter
from .harness import largest_passing_mass, stability_probe, sweep, sweep_records_csv
from .io import atomic_write, droplet_csv, droplet_from_dict, droplet_svg, dumps, header_lines, read_droplet_csv, result_to_dict
from .minimizer import almost_minimality_probe, minimize
from .sessile import CapGeometry, cap_scalars

log = logging.getLogger("capdrop")

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _tau_grid(text: str) -> np.ndarray:
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError:
        raise UsageError(f"--tau-grid expects a:b:steps, got {text!r}") from None
    if steps < 1:
        raise UsageError("--tau-grid needs at least one step")
    # round away linspace noise so that e.g. tau = 0 is evaluated exactly
    grid = np.linspace(a, b, steps).round(12) + 0.0
    if np.any(np.abs(grid) >= 1):
        raise UsageError("--tau-grid values must lie in (-1, 1)")
    return grid


def cmd_reference(args) -> int:
    grid = _tau_grid(args.tau_grid)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    buf = io.StringIO()
    params = {"n": args.n, "tau_grid": args.tau_grid}
    for line in header_lines(config_hash(params), None, n=args.n):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "V", "A", "A0", "psi", "psi_prime", "phi"])
    for tau in grid:
        s = cap_scalars(CapGeometry(args.n, float(tau)))
        w.writerow([repr(float(x)) for x in (tau, s.volume, s.lateral_area, s.base_area, s.psi, s.psi_prime, s.phi)])
    atomic_write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_energy(args) -> int:
    cfg = load_config(args.config)
    c = build_container(cfg)
    p = read_droplet_csv(args.droplet, c)
    e = gauss_energy(p, c)
    out = {"header": header_lines(config_hash(cfg), cfg.get("rng_seed")), "energy": e.as_dict()}
    text = dumps({**out, "energy": {k: (None if not math.isfinite(v) else v) for k, v in e.as_dict().items()}})
    if args.out:
        atomic_write(args.out, text)
    print(text, end="")
    return EXIT_OK


def cmd_minimize(args) -> int:
    cfg = load_config(args.config)
    c = build_container(cfg)
    mcfg = build_minimize_config(cfg)
    res = minimize(c, mcfg, jobs=args.jobs)
    head = header_lines(config_hash(cfg), mcfg.rng_seed)
    outs = cfg.get("outputs", {})
    droplet_path = args.out_droplet or outs.get("droplet")
    result_path = args.out_result or outs.get("result")
    svg_path = args.svg or outs.get("svg")
    if droplet_path:
        atomic_write(droplet_path, droplet_csv(res.droplet, head))
    if result_path:
        atomic_write(result_path, dumps(result_to_dict(res, cfg, head)))
    if svg_path:
        atomic_write(svg_path, f"<!-- {' | '.join(head)} -->\n" + droplet_svg(res.droplet, c))
    print(f"energy {res.energy.total!r} converged {res.converged} iterations {res.iterations} seed {res.seed_index}")
    if args.strict and not res.converged:
        print(f"not converged: {res.message}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg.get("masses"):
        raise ConfigError("sweep needs a masses list", "masses")
    c = build_container(cfg)
    mcfg = build_minimize_config(cfg)
    records = sweep(c, cfg["masses"], mcfg, jobs=args.jobs)
    out = args.out or cfg.get("outputs", {}).get("sweep")
    if not out:
        raise UsageError("sweep needs --out (or outputs.sweep in the config)")
    atomic_write(out, sweep_records_csv(records, header_lines(config_hash(cfg), mcfg.rng_seed)))
    top = largest_passing_mass(records)
    print(f"largest mass passing all record checks: {top if top is not None else 'none'}")
    bad = [r.m for r in records if not r.converged]
    if bad:
        print(f"non-converged masses: {bad}", file=sys.stderr)
        if args.strict:
            return EXIT_NOT_CONVERGED
    return EXIT_OK


def _family(text: str):
    text = text.strip()
    if text.startswith("{"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed --family JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if spec.get("kind") not in ("stretch", "bump"):
            raise ConfigError("family kind must be 'stretch' or 'bump'", "family.kind")
        return spec
    if text not in ("stretch", "bump"):
        raise UsageError(f"--family must be 'stretch', 'bump' or a JSON object, got {text!r}")
    return text


def cmd_stability(args) -> int:
    if not -1 < args.tau < 1:
        raise UsageError("--tau must lie in (-1, 1)")
    family = _family(args.family)
    forms = ["capillary", "wulff"] if args.form == "both" else [args.form]
    params = {"tau": args.tau, "family": family, "samples": args.samples}
    out = {"header": header_lines(config_hash(params), args.rng_seed), **params}
    for form in forms:
        out[form] = stability_probe(args.tau, family, args.samples, args.rng_seed, form)
    text = dumps(out)
    if args.out:
        atomic_write(args.out, text)
    print(text, end="")
    return EXIT_OK


def cmd_probe(args) -> int:
    path = Path(args.result)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"result file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    cfg = validate_config(data["config"])
    c = build_container(cfg)
    p = droplet_from_dict(data["droplet"])
    rho0 = args.rho0 if args.rho0 is not None else 0.25 * diameter(p.vertices)
    lam = almost_minimality_probe(p, c, args.trials, rho0, args.rng_seed)
    out = {
        "header": header_lines(config_hash(cfg), args.rng_seed),
        "trials": args.trials,
        "rho0": rho0,
        "lambda_hat": lam,
        "multiplier": data.get("multiplier"),
    }
    text = dumps(out)
    if args.out:
        atomic_write(args.out, text)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capdrop", description="Sessile droplet references and small-volume capillarity runs.")
    ap.add_argument("--version", action="version", version=f"capdrop {__version__} (config schema {SCHEMA_VERSION})")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reference", help="table of half-space cap quantities")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau-grid", required=True, help="a:b:steps")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("energy", help="energy of a droplet CSV in a configured container")
    p.add_argument("--config", required=True)
    p.add_argument("--droplet", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_energy)

    for name, func, helptext in (("minimize", cmd_minimize, "multi-start minimization"), ("sweep", cmd_sweep, "mass sweep")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--strict", action="store_true", help="exit 3 on non-convergence")
        p.add_argument("--jobs", type=int, default=1)
        if name == "minimize":
            p.add_argument("--out-droplet")
            p.add_argument("--out-result")
            p.add_argument("--svg")
        else:
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("stability", help="half-plane stability probe")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--family", default="stretch", help="'stretch', 'bump' or a JSON object with a kind")
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--form", choices=["capillary", "wulff", "both"], default="both")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("probe", help="almost-minimality probe of a saved result")
    p.add_argument("--result", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--rho0", type=float)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe)
    return ap


def _join_negative_values(argv: list[str]) -> list[str]:
    # "--tau-grid -0.9:0.9:19" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        if argv[i] in ("--tau-grid", "--tau") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # pragma: no cover - last resort
        log.exception("unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
