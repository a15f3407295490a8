"""Command line interface: ``buoyancy-lab <command> [options]``.

Exit status: 0 when the checked property holds, 2 when it fails, 1 on
errors (bad input, invalid parameters, degenerate geometry).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial

import numpy as np

from . import __version__
from .bodyio import (BodyFileError, body_to_dict, dumps, load_body, metacenter_csv,
                     scan_csv)
from .diagnostics import (PASS, equichordal_test, floating_body, isotropy_on_equators_test,
                          principal_moment_test, radial_power)
from .directions import direction_grid, unit
from .dupin import check_dupin1, check_dupin2, davidov_2d_check, metacentric_radius_fd
from .exceptions import SymmetryRequiredError
from .flotation import (buoyancy_center, check_delta, default_tol_eq, delta_from_density,
                        equilibrium_scan)
from .kernel import section_frame
from .zoo import SEED_ENV, generate

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
#: generators whose ``seed`` parameter is replaced by $BUOYANCY_LAB_SEED
SEEDED_GENERATORS = ("random_polytope",)


@dataclass
class RunConfig:
    """Everything that determines a run.  ``jobs`` and ``out`` do not affect results."""
    command: str = "scan"
    body: str | None = None
    generator: str | None = None
    params: dict = field(default_factory=dict)
    density: float | None = None
    delta: float | None = None
    dirs: int = 200
    h: float = 1e-3
    tol_eq: float | None = None
    tol_test: float = 0.02
    tol_fd: float = 1e-3
    xi: list | None = None
    batch: bool = False
    out: str | None = None
    jobs: int = 1

    def validate(self):
        if (self.body is None) == (self.generator is None):
            raise ValueError("give exactly one of --body and --generator")
        if self.density is not None and self.delta is not None:
            raise ValueError("give at most one of --density and --delta")
        if self.density is not None and not (0 < self.density < 1):
            raise ValueError(f"density out of range: {self.density!r} not in (0, 1)")
        for name in ("tol_test", "tol_fd", "h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tol_eq is not None and not self.tol_eq > 0:
            raise ValueError("tol_eq must be positive")
        if self.dirs < 1 or self.jobs < 1:
            raise ValueError("--dirs and --jobs must be positive")
        return self

    def effective(self):
        """Resolved config: seed override applied, output-neutral fields dropped."""
        out = asdict(self)
        del out["jobs"], out["out"]
        return out

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


# ----------------------------------------------------------------------
# helpers


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _load(cfg):
    if cfg.body is not None:
        return load_body(cfg.body)
    return generate(cfg.generator, cfg.params)


def _delta(cfg, body):
    if cfg.delta is not None:
        return check_delta(body, cfg.delta), "delta"
    density = 0.5 if cfg.density is None else cfg.density
    return delta_from_density(body, density), "density"


def _xi(cfg, d):
    if cfg.xi is None:
        return np.eye(d)[-1]
    xi = np.asarray(cfg.xi, dtype=float)
    if xi.shape != (d,) or not np.linalg.norm(xi) > 0:
        raise ValueError(f"--xi must be a nonzero vector with {d} components")
    return unit(xi)


class _Mapper:
    """``map`` in input order, optionally on a process pool."""

    def __init__(self, jobs):
        self.jobs = jobs
        self.pool = ProcessPoolExecutor(jobs) if jobs > 1 else None

    def __call__(self, fn, items):
        if self.pool is None:
            return map(fn, items)
        items = list(items)
        chunk = max(1, math.ceil(len(items) / (4 * self.jobs)))
        return self.pool.map(fn, items, chunksize=chunk)

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _header(cfg, body):
    delta, source = _delta(cfg, body)
    return delta, {
        "config": cfg.effective(),
        "dimension": body.dimension,
        "volume": body.volume,
        "delta": delta,
        "density": delta / body.volume,
        "delta_source": source,
    }


# ----------------------------------------------------------------------
# commands; each returns (exit code, JSON document)


def cmd_waterline(cfg, body, mapper):
    """Waterline, buoyancy centre and residual for one direction (--xi)."""
    delta, doc = _header(cfg, body)
    rec = buoyancy_center(body, _xi(cfg, body.dimension), delta)
    tol = cfg.tol_eq if cfg.tol_eq is not None else default_tol_eq(body)
    doc.update(xi=rec.xi, t=rec.t, submerged_volume=rec.volume, center=rec.center,
               body_centroid=rec.body_centroid, residual_rad=rec.residual, tol_eq=tol,
               equilibrium=rec.residual <= tol)
    return (EXIT_OK if rec.residual <= tol else EXIT_FAIL), doc


def _scan(cfg, body, mapper):
    delta, doc = _header(cfg, body)
    scan = equilibrium_scan(body, delta, cfg.dirs, cfg.tol_eq, mapper=mapper)
    doc.update(verdict=scan.verdict, max_residual=scan.max_residual, tol_eq=scan.tol_eq,
               n_directions=len(scan.records),
               equilibrium_directions=scan.equilibrium_directions,
               equilibrium_residuals=scan.equilibrium_residuals)
    return scan, doc


def cmd_scan(cfg, body, mapper):
    """Equilibrium scan over the direction grid; per-direction CSV to --out."""
    scan, doc = _scan(cfg, body, mapper)
    if cfg.out:
        _write(cfg.out, scan_csv(scan.records))
    return (EXIT_OK if scan.floats else EXIT_FAIL), doc


PROBE_ANGLES = (0.02, 0.05, 0.1, 0.3, 0.8)


def _dupin(cfg, body, delta, xi):
    d = body.dimension
    frame = section_frame(xi)
    d1 = check_dupin1(body, delta, xi, PROBE_ANGLES, n_azimuths=10)
    d2 = check_dupin2(body, delta, xi, frame[0], h=(10 * cfg.h, cfg.h), offset=0.1 * body.diameter)
    d3 = [metacentric_radius_fd(body, delta, xi, zeta=z, h=cfg.h) for z in frame]
    doc = {
        "d1": {"probes": len(d1.heights), "worst_height": d1.worst, "tol": d1.tol,
               "passed": d1.passed},
        "d2": {"h": d2.h, "centroid_change": d2.centroid_change,
               "offset_change": d2.offset_change,
               "predicted_offset_change": d2.predicted_offset_change,
               "centroid_order": d2.centroid_order, "offset_order": d2.offset_order,
               "passed": d2.passed()},
        "d3": [e.to_dict() for e in d3],
    }
    doc["d3_passed"] = all(e.rel_gap <= cfg.tol_fd for e in d3)
    if d == 2:
        dav = davidov_2d_check(body, delta, xi, cfg.h)
        doc["davidov"] = dav.to_dict()
        doc["d3_passed"] = doc["d3_passed"] and dav.rel_gap <= cfg.tol_fd
    ok = doc["d1"]["passed"] and doc["d2"]["passed"] and doc["d3_passed"]
    return ok, doc, d3


def cmd_dupin(cfg, body, mapper):
    """Dupin checks at --xi, or metacentre CSV over the grid with --batch."""
    delta, doc = _header(cfg, body)
    if cfg.batch:
        dirs = direction_grid(body.dimension, cfg.dirs)
        ests = [e for xi in dirs for e in
                mapper(partial(_metacenter_job, body, delta, cfg.h, xi),
                       list(section_frame(xi)))]
        gaps = np.array([e.rel_gap for e in ests])
        ok = bool(gaps.max() <= cfg.tol_fd)
        doc.update(n_estimates=len(ests), max_rel_gap=gaps.max(), tol_fd=cfg.tol_fd,
                   verdict="PASS" if ok else "FAIL")
        if cfg.out:
            _write(cfg.out, metacenter_csv(ests))
        return (EXIT_OK if ok else EXIT_FAIL), doc
    ok, sub, _ = _dupin(cfg, body, delta, _xi(cfg, body.dimension))
    doc.update(sub, verdict="PASS" if ok else "FAIL")
    return (EXIT_OK if ok else EXIT_FAIL), doc


def _metacenter_job(body, delta, h, xi, zeta):
    return metacentric_radius_fd(body, delta, xi, zeta=zeta, h=h)


def _diagnose(cfg, body, delta, mapper):
    dirs = direction_grid(body.dimension, cfg.dirs)
    mt = principal_moment_test(body, delta, dirs, cfg.tol_test, mapper=mapper)
    eq = equichordal_test(body, delta, dirs, tol=cfg.tol_test)
    doc = {
        "moment_test": {"verdict": mt.verdict, "constant": mt.constant,
                        "implied_radius": mt.implied_radius, "target": mt.target,
                        "max_diagonal_deviation": mt.max_diagonal_deviation,
                        "max_off_diagonal": mt.max_off_diagonal, "tol": mt.tol},
        "equichordal_test": {"verdict": eq.verdict, "constant": eq.constant,
                             "max_deviation": eq.max_deviation, "tol": eq.tol},
    }
    verdicts = [mt.verdict, eq.verdict]
    if body.dimension == 3:
        try:
            iso = isotropy_on_equators_test(radial_power(body), dirs, tol=cfg.tol_test)
            doc["isotropy_test"] = {"verdict": iso.verdict, "constant": iso.constant,
                                    "max_deviation": iso.max_deviation, "tol": iso.tol}
            verdicts.append(iso.verdict)
        except SymmetryRequiredError as exc:
            doc["isotropy_test"] = {"verdict": "NOT_APPLICABLE", "reason": str(exc)}
    return all(v == PASS for v in verdicts), doc


def cmd_diagnose(cfg, body, mapper):
    """Section-moment, equichordal and equator-isotropy tests."""
    delta, doc = _header(cfg, body)
    ok, sub = _diagnose(cfg, body, delta, mapper)
    doc.update(sub, verdict="PASS" if ok else "FAIL")
    return (EXIT_OK if ok else EXIT_FAIL), doc


def cmd_floating_body(cfg, body, mapper):
    """Convex floating body on the grid; body JSON to --out."""
    delta, doc = _header(cfg, body)
    fb = floating_body(body, delta, direction_grid(body.dimension, cfg.dirs))
    ok = fb.dupin_coincident()
    doc.update(empty=fb.empty, supporting_fraction=fb.supporting_fraction,
               facet_cut_error=fb.facet_cut_error, dupin_coincident=ok)
    if not fb.empty:
        doc.update(volume_floating_body=fb.polytope.volume, n_vertices=len(fb.polytope.vertices))
        if cfg.out:
            _write(cfg.out, dumps(body_to_dict(fb.polytope)))
    return (EXIT_OK if ok else EXIT_FAIL), doc


def cmd_report(cfg, body, mapper):
    """Scan, Dupin checks and diagnostics bundled into one JSON document."""
    scan, doc = _scan(cfg, body, mapper)
    delta = doc["delta"]
    ok_d, dupin_doc, _ = _dupin(cfg, body, delta, _xi(cfg, body.dimension))
    ok_g, diag_doc = _diagnose(cfg, body, delta, mapper)
    doc = {**{k: doc[k] for k in ("config", "dimension", "volume", "delta", "density",
                                  "delta_source")},
           "scan": {k: doc[k] for k in ("verdict", "max_residual", "tol_eq", "n_directions",
                                        "equilibrium_directions", "equilibrium_residuals")},
           "dupin": dupin_doc, "diagnose": diag_doc}
    ok = scan.floats and ok_d and ok_g
    doc["verdict"] = "PASS" if ok else "FAIL"
    if cfg.out:
        _write(cfg.out, dumps(doc))
    return (EXIT_OK if ok else EXIT_FAIL), doc


def cmd_generate(cfg, body, mapper):
    """Write the generated body as a vertex JSON file."""
    text = dumps(body_to_dict(body))
    _write(cfg.out, text)
    return EXIT_OK, None


COMMANDS = {
    "waterline": cmd_waterline,
    "scan": cmd_scan,
    "dupin": cmd_dupin,
    "diagnose": cmd_diagnose,
    "floating-body": cmd_floating_body,
    "report": cmd_report,
    "generate": cmd_generate,
}


# ----------------------------------------------------------------------
# argument parsing


def _json_arg(text):
    try:
        val = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from None
    if not isinstance(val, dict):
        raise argparse.ArgumentTypeError("--params must be a JSON object")
    return val


def _vector_arg(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--body", metavar="FILE", help="body JSON file")
    src.add_argument("--generator", metavar="NAME", help="built-in body generator")
    common.add_argument("--params", type=_json_arg, metavar="JSON",
                        help="generator parameters as a JSON object")
    vol = common.add_mutually_exclusive_group()
    vol.add_argument("--density", type=float, metavar="D", help="relative density in (0, 1)")
    vol.add_argument("--delta", type=float, metavar="V", help="submerged volume in (0, vol)")
    common.add_argument("--dirs", type=int, metavar="N", help="number of grid directions")
    common.add_argument("--h", type=float, metavar="STEP", help="finite-difference tilt (rad)")
    common.add_argument("--tol-eq", type=float, metavar="X", help="equilibrium residual tolerance")
    common.add_argument("--tol-test", type=float, metavar="X",
                        help="relative tolerance of the characterisation tests")
    common.add_argument("--tol-fd", type=float, metavar="X",
                        help="relative tolerance of finite-difference metacentre checks")
    common.add_argument("--xi", type=_vector_arg, metavar="X,Y[,Z]", help="waterline normal")
    common.add_argument("--batch", action="store_true", default=None,
                        help="dupin: metacentre CSV over the direction grid")
    common.add_argument("--out", metavar="PATH", help="output file")
    common.add_argument("--jobs", type=int, metavar="K", help="worker processes")
    common.add_argument("--config", metavar="FILE", help="load a dumped run config")
    common.add_argument("--dump-config", metavar="FILE", help="write the effective config")

    parser = _Parser(prog="buoyancy-lab", description="Flotation of convex bodies.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
    return parser


def config_from_args(args):
    """Merge a ``--config`` file with explicitly given flags (flags win)."""
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        data = data.get("config", data)
        cfg = RunConfig.from_dict(data)
    else:
        cfg = RunConfig()
    cfg.command = args.command
    explicit = {k: v for k, v in vars(args).items() if v is not None
                and k not in ("config", "dump_config", "command")}
    if "body" in explicit:
        cfg.generator = None
    if "generator" in explicit:
        cfg.body = None
    if "density" in explicit:
        cfg.delta = None
    if "delta" in explicit:
        cfg.density = None
    for k, v in explicit.items():
        setattr(cfg, k, v)
    if cfg.generator in SEEDED_GENERATORS and os.environ.get(SEED_ENV) is not None:
        cfg.params = {**cfg.params, "seed": int(os.environ[SEED_ENV])}
    return cfg.validate()


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code
    mapper = None
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            with open(args.dump_config, "w", encoding="utf-8") as fh:
                fh.write(dumps(asdict(cfg)))
        body = _load(cfg)
        mapper = _Mapper(cfg.jobs)
        code, doc = COMMANDS[cfg.command](cfg, body, mapper)
    except (ValueError, OSError, BodyFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        if mapper is not None:
            mapper.close()
    if doc is not None and not (cfg.command == "report" and cfg.out):
        sys.stdout.write(dumps(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
