"""Command line front end.

Every subcommand writes a JSON document (``schema_version`` 1, sorted keys,
no timestamps) and, where it makes sense, CSV series. Values in a JSON file
come from a JSON ``--config`` file and are overridden by flags.

Exit codes: 0 success, 1 invalid input, 2 certification or verification
failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .domain import make_model
from .dynamics import VortexConfig
from .errors import CannotCertify, InvalidConfig, VortexError
from .flow import IntegratorSettings, write_trajectory_csv
from .levelset import period_function, trace_level
from .orbits import find_orbit, sweep_family, verify_theorem
from .twist import Grids, build_annulus, certify_twist

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_CERT, EXIT_SOLVER = 0, 1, 2, 3
COMMANDS = ("trace-level", "period-function", "twist-cert", "find-orbit", "sweep", "verify")

DEFAULTS = {
    "domain": {"kind": "disk", "p": None},
    "kappa1": 0.5,
    "kappa2": 0.5,
    "c": 0.1,
    "c1": 0.09,
    "d1": 0.11,
    "c_grid": "0.05:0.4:8",
    "n_samples": 64,
    "trial_b1": 0.2,
    "grids": [16, 8, 4],
    "nu": None,
    "nu_list": None,
    "tolerances": {"rel_tol": 1e-10, "abs_tol": 1e-12, "orbit_tol": 1e-9},
    "seed": None,
}


def _parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise InvalidConfig(f"--c-grid expects a:b:n, got {text!r}") from exc
    if n < 2 or not a < b:
        raise InvalidConfig("--c-grid needs a < b and n >= 2")
    return np.linspace(a, b, n)


def _int_list(value) -> list[int]:
    if value is None:
        return []
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return [int(v) for v in value]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vortexorbits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with run parameters")
    common.add_argument("--domain", choices=["disk", "radial_power"])
    common.add_argument("--p", type=float, help="exponent of the radial power model")
    common.add_argument("--kappa1", type=float)
    common.add_argument("--kappa2", type=float)
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--out", type=Path, help="output directory (default: print JSON)")
    common.add_argument("--seed", type=int, help="seed for the phase offset of sampling grids")

    p = sub.add_parser("trace-level", parents=[common], help="trace one level line of h")
    p.add_argument("--c", type=float)
    p.add_argument("--n-samples", type=int)

    p = sub.add_parser("period-function", parents=[common], help="periods on a grid of levels")
    p.add_argument("--c-grid", help="a:b:n")
    p.add_argument("--n-samples", type=int)

    for name in ("twist-cert", "find-orbit", "sweep", "verify"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--c", type=float)
        p.add_argument("--c1", type=float)
        p.add_argument("--d1", type=float)
        p.add_argument("--trial-b1", type=float)
        p.add_argument("--grids", help="n_boundary,n_theta,n_radii")
        if name == "find-orbit":
            p.add_argument("--nu", type=int)
        if name in ("sweep", "verify"):
            p.add_argument("--nu-list", help="comma separated rotation indices")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the JSON config file and command line flags."""
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read config {args.config}: {exc}") from exc
        for key, value in data.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    flags = vars(args)
    if flags.get("domain") is not None:
        cfg["domain"]["kind"] = flags["domain"]
    if flags.get("p") is not None:
        cfg["domain"]["p"] = flags["p"]
    for key in ("kappa1", "kappa2", "c", "c1", "d1", "c_grid", "n_samples", "trial_b1", "nu", "nu_list", "seed"):
        if flags.get(key) is not None:
            cfg[key] = flags[key]
    if flags.get("grids") is not None:
        cfg["grids"] = [int(v) for v in flags["grids"].split(",")]
    if flags.get("rel_tol") is not None:
        cfg["tolerances"]["rel_tol"] = flags["rel_tol"]
    if flags.get("abs_tol") is not None:
        cfg["tolerances"]["abs_tol"] = flags["abs_tol"]
    cfg["scenario"] = args.command
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    VortexConfig(cfg["kappa1"], cfg["kappa2"])
    tol = cfg["tolerances"]
    if not all(float(tol[k]) > 0 for k in ("rel_tol", "abs_tol", "orbit_tol")):
        raise InvalidConfig("tolerances must be positive")
    if cfg["scenario"] in ("twist-cert", "find-orbit", "sweep", "verify"):
        if not cfg["c1"] < cfg["c"] < cfg["d1"]:
            raise InvalidConfig(f"need c1 < c < d1 (got {cfg['c1']}, {cfg['c']}, {cfg['d1']})")
        if len(cfg["grids"]) != 3 or min(cfg["grids"]) < 1:
            raise InvalidConfig("grids must be three positive integers")
    if cfg["scenario"] == "find-orbit" and cfg["nu"] is not None and int(cfg["nu"]) == 0:
        raise InvalidConfig("nu must be nonzero")
    make_model(cfg["domain"]["kind"], cfg["domain"].get("p"))


def _settings(cfg) -> IntegratorSettings:
    return IntegratorSettings(float(cfg["tolerances"]["rel_tol"]), float(cfg["tolerances"]["abs_tol"]))


def _grids(cfg) -> Grids:
    nb, nt, nr = (int(v) for v in cfg["grids"])
    offset = 0.0
    if cfg.get("seed") is not None:
        rng = np.random.default_rng(int(cfg["seed"]))
        offset = float(rng.uniform(0.0, 2 * np.pi / nt))
    return Grids(nb, nt, nr, offset)


def _default_nu_list(nu0: int) -> list[int]:
    return [nu0 * k for k in (1, 2, 5, 10)]


class Output:
    def __init__(self, out_dir: Path | None):
        self.out_dir = out_dir
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, doc: dict) -> None:
        text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=True)
        if self.out_dir is None:
            print(text)
        else:
            (self.out_dir / f"{name}.json").write_text(text + "\n")

    def path(self, name: str) -> Path | None:
        return None if self.out_dir is None else self.out_dir / name


def _document(cfg, result, status="ok") -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": cfg["scenario"],
        "status": status,
        "config": {k: v for k, v in cfg.items() if k != "scenario"},
        "tolerances": cfg["tolerances"],
        "result": result,
    }


def _run(cfg: dict, out: Output) -> int:
    model = make_model(cfg["domain"]["kind"], cfg["domain"].get("p"))
    config = VortexConfig(cfg["kappa1"], cfg["kappa2"])
    settings = _settings(cfg)
    cmd = cfg["scenario"]

    if cmd == "trace-level":
        level = trace_level(model, config, float(cfg["c"]), n_samples=int(cfg["n_samples"]), settings=settings)
        out.json("trace-level", _document(cfg, level.to_dict()))
        if out.path("level.csv"):
            level.write_csv(out.path("level.csv"))
        return EXIT_OK

    if cmd == "period-function":
        grid = _parse_grid(cfg["c_grid"]) if isinstance(cfg["c_grid"], str) else np.asarray(cfg["c_grid"], float)
        pf = period_function(model, config, grid, n_samples=int(cfg["n_samples"]), settings=settings)
        result = {"c": pf.c.tolist(), "T": pf.T.tolist(), "monotone": pf.monotone, "direction": pf.direction}
        out.json("period-function", _document(cfg, result))
        if out.path("period_function.csv"):
            with open(out.path("period_function.csv"), "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["c", "T"])
                for c, T in pf.rows():
                    writer.writerow([repr(c), repr(T)])
        return EXIT_OK

    c, c1, d1 = float(cfg["c"]), float(cfg["c1"]), float(cfg["d1"])
    annulus = build_annulus(model, config, c, c1, d1, settings=settings)
    cert = certify_twist(model, config, c, c1, d1, float(cfg["trial_b1"]), _grids(cfg), annulus=annulus,
                         settings=settings)
    if cmd == "twist-cert":
        out.json("twist-cert", _document(cfg, cert.to_dict()))
        return EXIT_OK if cert.positive else EXIT_CERT

    tol = float(cfg["tolerances"]["orbit_tol"])
    if cmd == "find-orbit":
        nu = int(cfg["nu"]) if cfg["nu"] is not None else cert.nu
        orbit = find_orbit(model, config, cert, nu, annulus, tol=tol, settings=settings)
        out.json("find-orbit", _document(cfg, {"certificate": cert.to_dict(), "orbit": orbit.to_dict()}))
        if out.path("orbit.csv"):
            write_trajectory_csv(out.path("orbit.csv"), orbit.trajectory, model, orbit.config, center2=annulus.center)
        return EXIT_OK

    nu_list = _int_list(cfg["nu_list"]) or _default_nu_list(cert.nu)
    family = sweep_family(model, config, cert, nu_list, annulus, tol=tol, settings=settings)
    result = {"certificate": cert.to_dict(), "family": family.to_dict()}
    if cmd == "sweep":
        out.json("sweep", _document(cfg, result))
        return EXIT_OK if all(m.converged for m in family.members) else EXIT_SOLVER
    report = verify_theorem(family, annulus.middle)
    result["verification"] = report.to_dict()
    out.json("verify", _document(cfg, result, "ok" if report.passed else "failed"))
    return EXIT_OK if report.passed else EXIT_CERT


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (InvalidConfig, KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = Output(args.out)
    try:
        return _run(cfg, out)
    except InvalidConfig as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CannotCertify as exc:
        print(f"error: certification failed at stage {exc.stage}: {exc}", file=sys.stderr)
        out.json(cfg["scenario"], _document(cfg, {"stage": exc.stage, "best_margin": exc.best_margin}, "failed"))
        return EXIT_CERT
    except VortexError as exc:
        print(f"error: solver failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
