"""Command-line interface: configuration ingestion, dispatch, reporting.

Subcommands:

    verify    count identity for a (metric, tensor field) pair
    diffeo    boundary windings of a diffeomorphism, three ways
    vf        count identity for the antiholomorphic derivative of a field
    umbilics  umbilical points of an ellipsoid
    realize   build a field with prescribed zeros/windings and re-detect it
    explore   search for disc candidates with nonvanishing dbar

Exit codes: 0 pass, 1 identity failure, 2 hypothesis violation,
3 configuration error.  Reports serialize deterministically; ``--plot``
writes CSV grids (header ``u,v,value``), a zero list, and PNG heatmaps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict

import jsonschema
import numpy as np

from . import __version__, schemas
from .config import DEFAULT, from_env
from .counting import (
    PrescribedData,
    realization_roundtrip,
    verify_count_identity,
)
from .diffeo import (
    DiffeoMap,
    crossing_checks,
    pullback_field,
    verify_area_preserving_count,
    verify_boundary_winding_formula,
)
from .embedded import ellipsoid_surface, fundamental_tensorfields, umbilics
from .errors import (
    ConfigError,
    ConformalPointsError,
    ExpressionError,
    HypothesisViolation,
    NumericalError,
    UnsupportedSurface,
)
from .explorer import CandidateFunction, search
from .geometry import (
    EASection,
    TensorField,
    default_metric,
    random_trig_tensorfield,
)
from .report import RunReport, emit_plot_data, sample_section_grids
from .surfaces import annulus, disc, sphere, torus
from .vector_fields import VectorField, linearization_check, \
    verify_field_count_identity

EXIT_PASS = 0
EXIT_IDENTITY_FAILURE = 1
EXIT_HYPOTHESIS_VIOLATION = 2
EXIT_CONFIG_ERROR = 3


def load_config(path, subcommand):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    schema = schemas.BY_SUBCOMMAND[subcommand]
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"configuration invalid at {loc}: {exc.message}") \
            from exc
    return cfg


def build_surface(spec):
    kind = spec["kind"]
    if kind == "disc":
        return disc()
    if kind == "annulus":
        return annulus(spec.get("inner_radius", 0.5))
    if kind == "torus":
        if "tau" not in spec:
            raise ConfigError("torus surface requires the lattice modulus 'tau'")
        return torus(complex(spec["tau"][0], spec["tau"][1]))
    if kind == "sphere":
        return sphere()
    if kind == "ellipsoid":
        if "semi_axes" not in spec:
            raise ConfigError("ellipsoid surface requires 'semi_axes'")
        return ellipsoid_surface(tuple(spec["semi_axes"]))
    raise ConfigError(f"unknown surface kind {kind!r}")


def build_tolerances(cfg):
    tol = from_env(DEFAULT)
    overrides = cfg.get("tolerances")
    if overrides:
        tol = tol.replace(**overrides)
    return tol


def _build_metric(surface, cfg):
    spec = cfg.get("metric")
    if spec is None:
        if surface.kind == "embedded-genus0":
            g, _ = fundamental_tensorfields(surface)
            return g
        return default_metric(surface)
    g = TensorField.from_expressions(surface, tuple(spec["entries"]),
                                     role="metric")
    g.validate_metric()
    return g


def _build_field(surface, cfg):
    spec = cfg["field"]
    if "entries" in spec:
        h = TensorField.from_expressions(surface, tuple(spec["entries"]))
        h.check_compatibility()
        return h
    if "random_trig" in spec:
        if surface.kind != "torus":
            raise ConfigError("random_trig fields are defined on the torus")
        opts = spec["random_trig"]
        return random_trig_tensorfield(
            surface, degree=opts.get("degree", 3),
            seed=opts.get("seed", cfg.get("seed", 0)),
            amplitude=opts.get("amplitude", 1.0))
    F = DiffeoMap.from_expressions(surface, tuple(spec["pullback"]["components"]))
    F.validate()
    return pullback_field(F, _build_metric(surface, cfg))


def _run_verify(cfg, tol):
    surface = build_surface(cfg["surface"])
    g = _build_metric(surface, cfg)
    h = _build_field(surface, cfg)
    rep = verify_count_identity(g, h, surface, tol=tol)
    results = rep.to_dict()
    if h.exprs:
        results["field_sources"] = {k: list(v) for k, v in h.exprs.items()}
    section = EASection.from_tensor_pair(surface, g, h)
    return results, rep.passed, (section, rep.points, "verify",
                                 "|trace-free part|")


def _run_diffeo(cfg, tol):
    surface = build_surface(cfg["surface"])
    if surface.kind not in ("disc", "annulus"):
        raise ConfigError("diffeomorphism analysis runs on the disc or annulus")
    g = _build_metric(surface, cfg)
    spec = cfg["map"]
    perm = spec.get("boundary_permutation")
    boundary_map = {i: j for i, j in enumerate(perm)} if perm else None
    F = DiffeoMap.from_expressions(surface, tuple(spec["components"]),
                                   boundary_map=boundary_map)
    F.validate()
    results = {}
    if spec.get("area_corollary"):
        record = verify_area_preserving_count(F, g, tol=tol)
        rep = record.pop("report")
        results["area_corollary"] = record
        results["count_report"] = rep.to_dict()
        passed = record["count_matches"] and record["windings_vanish"]
        points = rep.points
    else:
        records = verify_boundary_winding_formula(F, g, tol=tol)
        results["three_way"] = records
        results["crossings"] = crossing_checks(F, g, tol=tol)
        passed = all(r["agree"] for r in records)
        points = []
    section = EASection.from_tensor_pair(surface, g, pullback_field(F, g))
    return results, passed, (section, points, "diffeo", "|trace-free part|")


def _run_vf(cfg, tol):
    surface = build_surface(cfg["surface"])
    g = _build_metric(surface, cfg)
    spec = cfg["vector_field"]
    field = VectorField.from_expressions(surface, spec["real"], spec["imag"])
    field.validate()
    rep = verify_field_count_identity(field, g, tol=tol)
    results = rep.to_dict()
    if cfg.get("linearization"):
        results["linearization"] = linearization_check(field, g)
    from .vector_fields import dbar_section
    section = dbar_section(field, g)
    return results, rep.passed, (section, rep.points, "vf",
                                 "|dbar of the field|")


def _run_umbilics(cfg, tol):
    spec = cfg["surface"]
    if spec["kind"] != "ellipsoid":
        raise ConfigError("the umbilics subcommand expects an ellipsoid surface")
    rep = umbilics(tuple(spec["semi_axes"]), tol=tol)
    surface = ellipsoid_surface(tuple(spec["semi_axes"]))
    g, h = fundamental_tensorfields(surface)
    section = EASection.from_tensor_pair(surface, g, h)
    return rep.to_dict(), rep.passed, (section, rep.points, "umbilics",
                                       "|trace-free shape defect|")


def _run_realize(cfg, tol):
    surface = build_surface(cfg["surface"])
    spec = cfg["data"]
    data = PrescribedData([tuple(p) for p in spec["points"]],
                          [int(k) for k in spec["indices"]],
                          [int(w) for w in spec["windings"]])
    h, rep, mismatches = realization_roundtrip(surface, data, tol=tol)
    results = {
        "prescribed": {"points": spec["points"], "indices": spec["indices"],
                       "windings": spec["windings"]},
        "verification": rep.to_dict(),
        "mismatches": mismatches,
        "roundtrip_exact": not mismatches,
    }
    g = default_metric(surface)
    section = EASection.from_tensor_pair(surface, g, h)
    return results, not mismatches, (section, rep.points, "realize",
                                     "|realized section|")


def _run_explore(cfg, tol):
    opts = cfg["explore"]
    result = search(opts["bidegree"],
                    restarts=opts.get("restarts", 20),
                    iterations=opts.get("iterations", 150),
                    grid_n=opts.get("grid", 128),
                    seed=cfg.get("seed", 0), tol=tol)
    coeffs = np.array([complex(a, b) for a, b in result.coefficients])
    cand = CandidateFunction(coeffs.reshape(result.bidegree + 1, -1))
    surface = disc()
    grid = surface.charts[0].scan_grid(min(tol.grid_n, 256))
    mag = np.abs(cand.dbar(grid.u + 1j * grid.v))
    mag[~grid.mask] = np.nan
    grids = {"main": (grid.u, grid.v, mag)}
    # the search itself cannot fail an identity; obstructions are reported
    return result.to_dict(), True, (grids, [], "explore",
                                    "|dbar of the candidate|")


_HANDLERS = {
    "verify": _run_verify,
    "diffeo": _run_diffeo,
    "vf": _run_vf,
    "umbilics": _run_umbilics,
    "realize": _run_realize,
    "explore": _run_explore,
}


def _error_record(subcommand, exc):
    return {
        "subcommand": subcommand,
        "version": __version__,
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }


def run(subcommand, config_path, out_dir=".", plot=False, seed=None,
        stream=None):
    """Execute one subcommand; returns (report_or_error_dict, exit_code)."""
    stream = stream or sys.stdout
    started = time.perf_counter()
    try:
        cfg = load_config(config_path, subcommand)
        if seed is not None:
            cfg["seed"] = int(seed)
        tol = build_tolerances(cfg)
        results, passed, plot_payload = _HANDLERS[subcommand](cfg, tol)
    except (ConfigError, ExpressionError, UnsupportedSurface) as exc:
        record = _error_record(subcommand, exc)
        _write_error(record, out_dir, stream)
        return record, EXIT_CONFIG_ERROR
    except (HypothesisViolation, NumericalError) as exc:
        record = _error_record(subcommand, exc)
        _write_error(record, out_dir, stream)
        return record, EXIT_HYPOTHESIS_VIOLATION
    report = RunReport(
        subcommand=subcommand,
        config=cfg,
        results=results,
        diagnostics={"tolerances": asdict(tol)},
        wall_clock=time.perf_counter() - started,
    )
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    report.write(report_path)
    files = [report_path]
    if plot and plot_payload is not None:
        source, points, stem, label = plot_payload
        if isinstance(source, dict):
            grids = source
        else:
            grids = sample_section_grids(source, n=min(tol.grid_n, 256))
        files += emit_plot_data(grids, points, out_dir, stem, label=label)
    code = EXIT_PASS if passed else EXIT_IDENTITY_FAILURE
    print(f"{subcommand}: {'pass' if passed else 'IDENTITY FAILURE'} "
          f"in {report.wall_clock:.2f}s -> {', '.join(files)}", file=stream)
    return report, code


def _write_error(record, out_dir, stream):
    os.makedirs(out_dir, exist_ok=True)
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    with open(os.path.join(out_dir, "error.json"), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(text, end="", file=stream)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="confpoints",
        description="Conformal points of tensor fields on surfaces: locate, "
                    "index, and verify the count identities.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, blurb in [
        ("verify", "count identity for a metric/tensor-field pair"),
        ("diffeo", "boundary windings of a diffeomorphism, three ways"),
        ("vf", "count identity for a vector field's dbar section"),
        ("umbilics", "umbilical points of an ellipsoid"),
        ("realize", "realize prescribed zeros/windings and re-detect them"),
        ("explore", "search for nonvanishing-dbar candidates on the disc"),
    ]:
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--plot", action="store_true",
                       help="emit CSV grids and PNG heatmaps")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configuration seed")
    args = parser.parse_args(argv)
    _, code = run(args.subcommand, args.config, out_dir=args.out,
                  plot=args.plot, seed=args.seed)
    return code


if __name__ == "__main__":
    sys.exit(main())
