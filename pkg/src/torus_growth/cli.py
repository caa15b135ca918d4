"""Command line entry point: analyze, series, oracle and convexity subcommands.

Settings come from an optional flat key=value file (--config) overridden by
flags. The effective settings are echoed at the top of every output file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import TorusGrowthError
from .matrix_algebra import condition_star, prepare, read_matrix

log = logging.getLogger("torus_growth")

DEFAULTS = {
    "matrix": None,
    "mode": "tightened",
    "n": 10,
    "i": 3,
    "kft": 6,
    "C": None,
    "max_power": 12,
    "oracle_radius": 10,
    "n_max": 8,
    "out": ".",
    "cap_states": 2_000_000,
    "tol": 1e-9,
}
INTS = {"n", "i", "kft", "C", "max_power", "oracle_radius", "n_max", "cap_states"}


class ConfigError(TorusGrowthError):
    exit_code = 1


def read_config(path: str) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in DEFAULTS:
            raise ConfigError(f"{path}:{num}: expected key=value with a known key")
        out[key] = value.strip()
    return out


def _coerce(cfg: dict) -> dict:
    out = {}
    for key, value in cfg.items():
        if value is None or value == "":
            out[key] = None
        elif key in INTS:
            try:
                out[key] = int(value)
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
        elif key == "tol":
            out[key] = float(value)
        else:
            out[key] = value
    if out["mode"] not in ("certified", "tightened"):
        raise ConfigError(f"mode must be certified or tightened, got {out['mode']!r}")
    return out


def effective_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return _coerce(cfg)


def header(cfg: dict, command: str) -> str:
    lines = [f"# command={command}"] + [f"# {k}={v}" for k, v in cfg.items()]
    return "\n".join(lines) + "\n"


def _setup(cfg):
    if not cfg["matrix"]:
        raise ConfigError("--matrix is required")
    A = read_matrix(cfg["matrix"])
    report, setup = prepare(A, cfg["max_power"], cfg["tol"])
    return A, report, setup


def _write(cfg, name: str, text: str) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def cmd_analyze(cfg) -> int:
    _, report, setup = _setup(cfg)
    print(header(cfg, "analyze"), end="")
    print("eigenvalues: " + ", ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in report.eigenvalues))
    print("moduli: " + ", ".join(f"{m:.6g}" for m in report.moduli))
    print(f"unit circle margin: {report.circle_margin:.6g}")
    print(f"eigenvalue separation: {report.separation:.6g}")
    print(f"selected power: {setup.power}")
    for j, p in enumerate(setup.blocks):
        margin = 2 * p.norm_inf() - p.norm_one()
        print(f"block {j + 1}: {p}  M={p.norm_inf()}  condition margin={margin}"
              f"  holds={condition_star(p)}")
    print("basis change: " + json.dumps([list(r) for r in setup.basis_change.rows]))
    return 0


def cmd_series(cfg) -> int:
    from .cross_section import (ConstantsMode, build_cross_section, group_series, series_csv,
                                series_json, verify_against_oracle)

    if cfg["mode"] == "tightened" and (cfg["oracle_radius"] or 0) < 6:
        raise ConfigError("tightened mode needs oracle_radius >= 6 so the series is verified")
    _, _, setup = _setup(cfg)
    mode = ConstantsMode(cfg["mode"], cfg["n"], cfg["i"], cfg["kft"], cfg["C"])
    cs = build_cross_section(setup, mode, cfg["cap_states"])
    sphere, ball = group_series(cs)
    if cfg["oracle_radius"]:
        verify_against_oracle(setup, sphere, cfg["oracle_radius"])
        log.info("series matches breadth-first search up to radius %d", cfg["oracle_radius"])
    info = {**cfg, "power": setup.power, "raw_states": cs.raw_states, "states": cs.nstates}
    p1 = _write(cfg, "series.json", series_json(sphere, ball, 50, info))
    p2 = _write(cfg, "series.csv", series_csv(sphere, ball, 50, header(cfg, "series")))
    print(f"wrote {p1} and {p2}")
    return 0


def cmd_oracle(cfg) -> int:
    from .group_core import bfs_spheres, spheres_csv

    _, _, setup = _setup(cfg)
    spheres = bfs_spheres(setup, cfg["oracle_radius"], cfg["cap_states"])
    text = spheres_csv(spheres, header(cfg, "oracle"))
    if cfg["out"] == "-":
        sys.stdout.write(text)
    else:
        print(f"wrote {_write(cfg, 'oracle.csv', text)}")
    return 0


def cmd_convexity(cfg) -> int:
    from .convexity_probe import (abs_jordan, ac2_probe, divergence_sweep_json, lattice_embed,
                                  report_csv)

    _, _, setup = _setup(cfg)
    abs_jordan(setup.block_matrix, cfg["tol"])
    emb = lattice_embed(setup, tol=cfg["tol"])
    log.info("lattice relation residuals: %s", emb.residuals)
    report = ac2_probe(setup, cfg["n_max"], cfg["cap_states"])
    p1 = _write(cfg, "convexity.csv", report_csv(report, header(cfg, "convexity")))
    sweep = divergence_sweep_json(setup, range(1, 65), range(0, 6),
                                  {**cfg, "residuals": emb.residuals}, cfg["tol"])
    p2 = _write(cfg, "divergence.json", sweep)
    print(f"wrote {p1} and {p2}")
    return 0


COMMANDS = {"analyze": cmd_analyze, "series": cmd_series, "oracle": cmd_oracle,
            "convexity": cmd_convexity}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torus-growth",
                                 description="Growth series and convexity probes for Z^N x_A Z.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="key=value settings file; flags take precedence")
    ap.add_argument("--matrix", help="matrix file: dimension, then one row per line")
    ap.add_argument("--mode", choices=["certified", "tightened"])
    ap.add_argument("--n", type=int, help="letter coefficient bound")
    ap.add_argument("--i", type=int, help="tail and head offset window")
    ap.add_argument("--kft", type=int, help="fellow-travel weight clamp")
    ap.add_argument("--C", type=int, help="remainder bound (default: n)")
    ap.add_argument("--max-power", dest="max_power", type=int)
    ap.add_argument("--oracle-radius", dest="oracle_radius", type=int)
    ap.add_argument("--n-max", dest="n_max", type=int, help="largest sphere for the probe")
    ap.add_argument("--out", help="output directory ('-' prints the oracle table)")
    ap.add_argument("--cap-states", dest="cap_states", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = effective_config(args)
        return COMMANDS[args.command](cfg)
    except TorusGrowthError as exc:
        count = getattr(exc, "count", None)
        extra = f" (count {count})" if count is not None else ""
        print(f"error: {type(exc).__name__}: {exc}{extra}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
