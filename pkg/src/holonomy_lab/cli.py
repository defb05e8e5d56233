"""Config-driven command line front end.

Scenes are TOML files: a connection, named paths, optional basepoint,
tolerances and a seed (see README for the frozen schema).  Subcommands
print deterministic plain-text reports; exit code 0 means success/PASS,
1 means a computational FAIL (a verified bound was exceeded), 2 means a
usage or config error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import geometry, monodromy, oracle, transport, vacua, wong
from .connection import (
    AharonovCasher,
    ConnectionSpec,
    ConstantField,
    FuchsianLog,
    GridRegion,
    LieBasis,
    MultiSolenoid,
    curvature_fd,
    ym_energy,
)
from .errors import HolonomyError, ParseError, PoleProximity, ValidationError
from .geometry import Circle, Concat, PathSpec, PlanePoint, Polyline, PunctureSet

SUBCOMMANDS = ("flatness", "transport", "monodromy", "abphase", "wong",
               "vacua", "ym-energy", "verify")

_CONNECTION_VARIANTS = ("multi_solenoid", "fuchsian_log", "aharonov_casher",
                        "constant_field")
_PATH_VARIANTS = ("circle", "polyline", "concat")


@dataclass
class SceneConfig:
    """Validated scene: a connection, named paths and run parameters."""

    connection: ConnectionSpec
    paths: dict
    basepoint: PlanePoint | None = None
    transport_tol: float = 1e-9
    guard: float = 1e-9
    seed: int = 0
    region: GridRegion | None = None
    v0: np.ndarray | None = None
    n_out: int = 65
    wong_i0: np.ndarray | None = None
    wong_basis: str | None = None
    wong_trials: int = 20
    vacua_matrix: np.ndarray | None = None


def _line_of(text, key):
    token = key.split(".")[-1]
    for i, line in enumerate(text.splitlines(), start=1):
        if token in line:
            return i
    return None


def _fail(text, key, message):
    raise ValidationError(f"{key}: {message}", key=key, line=_line_of(text, key))


def _get(text, table, key, kind, path, required=True, default=None):
    if key not in table:
        if required:
            _fail(text, path, "missing required key")
        return default
    val = table[key]
    if kind == "number" and not isinstance(val, (int, float)) or \
       kind == "int" and not isinstance(val, int) or \
       kind == "str" and not isinstance(val, str) or \
       kind == "list" and not isinstance(val, list) or \
       kind == "table" and not isinstance(val, dict):
        _fail(text, path, f"expected a {kind}")
    return val


def _check_keys(text, table, allowed, path):
    for k in table:
        if k not in allowed:
            _fail(text, f"{path}.{k}", "unknown key")


def _point2(text, val, path):
    if not (isinstance(val, list) and len(val) == 2
            and all(isinstance(v, (int, float)) for v in val)):
        _fail(text, path, "expected a point as [x, y]")
    return PlanePoint(float(val[0]), float(val[1]))


def _complex_pairs(text, val, path):
    out = []
    if not isinstance(val, list):
        _fail(text, path, "expected a list of [re, im] pairs")
    for i, pair in enumerate(val):
        if not (isinstance(pair, list) and len(pair) == 2
                and all(isinstance(v, (int, float)) for v in pair)):
            _fail(text, f"{path}[{i}]", "expected a complex number as [re, im]")
        out.append(complex(pair[0], pair[1]))
    return np.asarray(out, dtype=complex)


def _square_matrix(text, val, path):
    flat = _complex_pairs(text, val, path)
    m = math.isqrt(len(flat))
    if m * m != len(flat):
        _fail(text, path, f"row-major matrix needs a square count, got {len(flat)}")
    return flat.reshape(m, m)


def _punctures(text, table, path):
    raw = _get(text, table, "punctures", "list", f"{path}.punctures")
    pts, labels = [], []
    for i, entry in enumerate(raw):
        epath = f"{path}.punctures[{i}]"
        if not isinstance(entry, dict):
            _fail(text, epath, "expected a table with x, y and optional label")
        _check_keys(text, entry, {"x", "y", "label"}, epath)
        x = _get(text, entry, "x", "number", f"{epath}.x")
        y = _get(text, entry, "y", "number", f"{epath}.y")
        labels.append(str(entry.get("label", f"p{i}")))
        pts.append(PlanePoint(float(x), float(y)))
    try:
        return PunctureSet(pts, labels)
    except HolonomyError as exc:
        _fail(text, f"{path}.punctures", str(exc))


def _build_connection(text, table):
    path = "connection"
    variant = _get(text, table, "variant", "str", f"{path}.variant")
    if variant not in _CONNECTION_VARIANTS:
        raise ParseError(
            f"unknown connection variant {variant!r} "
            f"(expected one of {', '.join(_CONNECTION_VARIANTS)})",
            line=_line_of(text, variant))
    if variant == "multi_solenoid":
        _check_keys(text, table, {"variant", "punctures", "fluxes"}, path)
        punctures = _punctures(text, table, path)
        fluxes = _get(text, table, "fluxes", "list", f"{path}.fluxes")
        if len(fluxes) != len(punctures):
            _fail(text, f"{path}.fluxes",
                  f"{len(fluxes)} fluxes for {len(punctures)} punctures")
        return MultiSolenoid(punctures, [float(f) for f in fluxes])
    if variant == "fuchsian_log":
        _check_keys(text, table,
                    {"variant", "punctures", "residues", "polynomial_part", "rank"},
                    path)
        punctures = _punctures(text, table, path)
        raw = _get(text, table, "residues", "list", f"{path}.residues")
        if len(raw) != len(punctures):
            _fail(text, f"{path}.residues",
                  f"{len(raw)} residues for {len(punctures)} punctures")
        residues = [_square_matrix(text, r, f"{path}.residues[{i}]")
                    for i, r in enumerate(raw)]
        ranks = {r.shape[0] for r in residues}
        if len(ranks) != 1:
            _fail(text, f"{path}.residues", "residues differ in size")
        if "rank" in table and table["rank"] != residues[0].shape[0]:
            _fail(text, f"{path}.rank",
                  f"declared rank {table['rank']} but residues are "
                  f"{residues[0].shape[0]} x {residues[0].shape[0]}")
        poly = None
        if "polynomial_part" in table:
            raw_poly = _get(text, table, "polynomial_part", "list",
                            f"{path}.polynomial_part")
            poly = [_square_matrix(text, c, f"{path}.polynomial_part[{i}]")
                    for i, c in enumerate(raw_poly)]
        return FuchsianLog(punctures, residues, poly)
    if variant == "aharonov_casher":
        _check_keys(text, table, {"variant", "coupling"}, path)
        return AharonovCasher(_get(text, table, "coupling", "number",
                                   f"{path}.coupling"))
    _check_keys(text, table, {"variant", "strength"}, path)
    return ConstantField(_get(text, table, "strength", "number",
                              f"{path}.strength"))


def _build_paths(text, table):
    pending = {}
    built = {}
    for name, spec in table.items():
        path = f"paths.{name}"
        if not isinstance(spec, dict):
            _fail(text, path, "expected a path table")
        variant = _get(text, spec, "variant", "str", f"{path}.variant")
        if variant not in _PATH_VARIANTS:
            raise ParseError(
                f"unknown path variant {variant!r} "
                f"(expected one of {', '.join(_PATH_VARIANTS)})",
                line=_line_of(text, variant))
        if variant == "circle":
            _check_keys(text, spec,
                        {"variant", "center", "radius", "turns", "start_angle"},
                        path)
            center = _point2(text, _get(text, spec, "center", "list",
                                        f"{path}.center"), f"{path}.center")
            radius = _get(text, spec, "radius", "number", f"{path}.radius")
            turns = _get(text, spec, "turns", "number", f"{path}.turns",
                         required=False, default=1)
            angle = _get(text, spec, "start_angle", "number",
                         f"{path}.start_angle", required=False, default=0.0)
            if radius <= 0:
                _fail(text, f"{path}.radius", "radius must be positive")
            if turns == 0:
                _fail(text, f"{path}.turns", "turns must be nonzero")
            built[name] = Circle(center, radius, turns, angle)
        elif variant == "polyline":
            _check_keys(text, spec, {"variant", "points"}, path)
            raw = _get(text, spec, "points", "list", f"{path}.points")
            if len(raw) < 2:
                _fail(text, f"{path}.points", "need at least 2 points")
            built[name] = Polyline(
                [_point2(text, p, f"{path}.points[{i}]") for i, p in enumerate(raw)])
        else:
            _check_keys(text, spec, {"variant", "parts"}, path)
            parts = _get(text, spec, "parts", "list", f"{path}.parts")
            if not parts or not all(isinstance(p, str) for p in parts):
                _fail(text, f"{path}.parts", "expected a list of path names")
            pending[name] = parts

    # resolve concatenations, allowing references to other concatenations
    while pending:
        progress = False
        for name in list(pending):
            parts = pending[name]
            unknown = [p for p in parts if p not in built and p not in pending]
            if unknown:
                _fail(text, f"paths.{name}.parts",
                      f"unknown path name {unknown[0]!r}")
            if all(p in built for p in parts):
                try:
                    built[name] = Concat([built[p] for p in parts])
                except HolonomyError as exc:
                    _fail(text, f"paths.{name}.parts", str(exc))
                del pending[name]
                progress = True
        if not progress:
            _fail(text, f"paths.{sorted(pending)[0]}.parts",
                  "circular concat reference")
    return built


def parse_config(text: str) -> SceneConfig:
    """Parse and validate a TOML scene; diagnostics carry key and line."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc),
                         line=int(match.group(1)) if match else None) from exc

    _check_keys(text, data,
                {"seed", "tolerances", "connection", "basepoint", "paths",
                 "region", "transport", "wong", "vacua"}, "config")
    if "connection" not in data:
        _fail(text, "connection", "missing required table")
    conn = _build_connection(text, _get(text, data, "connection", "table",
                                        "connection"))
    paths = _build_paths(text, data.get("paths", {}))

    cfg = SceneConfig(connection=conn, paths=paths)
    if "seed" in data:
        cfg.seed = _get(text, data, "seed", "int", "seed")
    if "basepoint" in data:
        cfg.basepoint = _point2(text, data["basepoint"], "basepoint")
    tol_table = data.get("tolerances", {})
    _check_keys(text, tol_table, {"transport_tol", "guard"}, "tolerances")
    cfg.transport_tol = float(_get(text, tol_table, "transport_tol", "number",
                                   "tolerances.transport_tol",
                                   required=False, default=1e-9))
    if not (transport.TOL_MIN <= cfg.transport_tol <= transport.TOL_MAX):
        _fail(text, "tolerances.transport_tol",
              f"must lie in [{transport.TOL_MIN}, {transport.TOL_MAX}]")
    cfg.guard = float(_get(text, tol_table, "guard", "number",
                           "tolerances.guard", required=False, default=1e-9))
    if cfg.guard <= 0:
        _fail(text, "tolerances.guard", "must be positive")

    if "region" in data:
        rt = _get(text, data, "region", "table", "region")
        _check_keys(text, rt, {"xmin", "xmax", "ymin", "ymax", "nx", "ny"}, "region")
        vals = {k: _get(text, rt, k, "number", f"region.{k}")
                for k in ("xmin", "xmax", "ymin", "ymax")}
        nx = _get(text, rt, "nx", "int", "region.nx")
        ny = _get(text, rt, "ny", "int", "region.ny")
        try:
            cfg.region = GridRegion(vals["xmin"], vals["xmax"],
                                    vals["ymin"], vals["ymax"], nx, ny)
        except ValueError as exc:
            _fail(text, "region", str(exc))

    if "transport" in data:
        tt = _get(text, data, "transport", "table", "transport")
        _check_keys(text, tt, {"v0", "n_out"}, "transport")
        if "v0" in tt:
            cfg.v0 = _complex_pairs(text, tt["v0"], "transport.v0")
        cfg.n_out = _get(text, tt, "n_out", "int", "transport.n_out",
                         required=False, default=65)
        if cfg.n_out < 2:
            _fail(text, "transport.n_out", "need at least 2 samples")

    if "wong" in data:
        wt = _get(text, data, "wong", "table", "wong")
        _check_keys(text, wt, {"i0_components", "basis", "trials"}, "wong")
        if "i0_components" in wt:
            raw = wt["i0_components"]
            if isinstance(raw, list) and raw and isinstance(raw[0], list):
                cfg.wong_i0 = _complex_pairs(text, raw, "wong.i0_components")
            elif isinstance(raw, list):
                cfg.wong_i0 = np.asarray([float(v) for v in raw], dtype=complex)
            else:
                _fail(text, "wong.i0_components", "expected a list")
        basis = _get(text, wt, "basis", "str", "wong.basis",
                     required=False, default=None)
        if basis is not None and basis not in ("su2", "u1"):
            _fail(text, "wong.basis", "expected 'su2' or 'u1'")
        cfg.wong_basis = basis
        cfg.wong_trials = _get(text, wt, "trials", "int", "wong.trials",
                               required=False, default=20)

    if "vacua" in data:
        vt = _get(text, data, "vacua", "table", "vacua")
        _check_keys(text, vt, {"matrix"}, "vacua")
        if "matrix" in vt:
            cfg.vacua_matrix = _square_matrix(text, vt["matrix"], "vacua.matrix")
    return cfg


# --- report formatting -------------------------------------------------------

def _g(x, sig=17):
    return f"{float(x):.{sig}g}"


def _c(z, sig=17):
    z = complex(z)
    return f"{_g(z.real, sig)} {_g(z.imag, sig)}"


def _matrix_lines(mat, sig=17):
    return [" ".join(_c(v, sig) for v in row) for row in np.asarray(mat)]


def _sorted_paths(config):
    return [(name, config.paths[name]) for name in sorted(config.paths)]


def _guard_paths(config):
    for name, p in _sorted_paths(config):
        d = geometry.min_distance(p, config.connection.punctures)
        if d <= config.guard:
            raise PoleProximity(
                f"path {name!r} comes within {d:.3e} of a puncture "
                f"(guard {config.guard})")


def _wong_basis(config):
    if config.wong_basis == "su2":
        return LieBasis.su2()
    if config.wong_basis == "u1":
        return LieBasis.u1()
    return LieBasis.su2() if config.connection.rank == 2 else LieBasis.u1()


# --- subcommands -------------------------------------------------------------

def _cmd_flatness(config, flags):
    conn = config.connection
    region = config.region
    if region is None:
        if len(conn.punctures):
            xs = conn.punctures.positions.real
            ys = conn.punctures.positions.imag
            region = GridRegion(xs.min() - 1.0, xs.max() + 1.0,
                                ys.min() - 1.0, ys.max() + 1.0, 16, 16)
        else:
            region = GridRegion(-1.0, 1.0, -1.0, 1.0, 16, 16)
    z, _, _ = region.cell_centers()
    if len(conn.punctures):
        d = np.min(np.abs(z[:, None] - conn.punctures.positions[None, :]), axis=1)
        z = z[d > 0.1]
    worst = 0.0
    for zz in z:
        c = curvature_fd(conn, PlanePoint(zz.real, zz.imag), 1e-4)
        worst = max(worst, float(np.linalg.norm(c)))
    ok = worst < 1e-6
    lines = ["flatness",
             f"points_checked {len(z)}",
             f"max_curvature_norm {_g(worst, 12)}",
             f"status {'PASS' if ok else 'FAIL'}"]
    return (0 if ok else 1), lines


def _write_csv(path_name, traj, csv_path, multiple):
    if multiple:
        stem, dot, ext = csv_path.rpartition(".")
        csv_path = f"{stem}.{path_name}.{ext}" if dot else f"{csv_path}.{path_name}"
    m = traj.values.shape[1]
    header = "t," + ",".join(f"re_v{i+1},im_v{i+1}" for i in range(m))
    rows = [header]
    for t, v in zip(traj.ts, traj.values):
        cells = [_g(t)]
        for comp in v:
            cells.extend((_g(comp.real), _g(comp.imag)))
        rows.append(",".join(cells))
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    return csv_path


def _cmd_transport(config, flags):
    if not config.paths:
        raise ValidationError("transport needs at least one path", key="paths")
    _guard_paths(config)
    conn = config.connection
    lines = []
    multiple = len(config.paths) > 1
    for name, p in _sorted_paths(config):
        res = transport.parallel_transport(conn, p, config.transport_tol)
        lines += [f"transport path={name}",
                  f"closed {'true' if res.path_closed else 'false'}",
                  f"steps {res.steps_used}",
                  f"error_estimate {_g(res.error_estimate, 12)}",
                  f"min_pole_distance {_g(res.min_pole_distance, 12)}",
                  f"matrix {conn.rank}"]
        lines += _matrix_lines(res.matrix)
        if flags.get("csv"):
            v0 = config.v0 if config.v0 is not None else np.eye(conn.rank)[:, 0]
            traj = transport.transport_trajectory(conn, p, v0, config.n_out,
                                                  config.transport_tol)
            written = _write_csv(name, traj, flags["csv"], multiple)
            lines.append(f"trajectory_csv {written}")
    return 0, lines


def _cmd_monodromy(config, flags):
    conn = config.connection
    rep = monodromy.monodromy_representation(
        conn, config.basepoint, config.transport_tol,
        assume_flat=flags.get("assume_flat", False))
    lines = [f"monodromy rank={rep.rank} "
             f"basepoint={_g(rep.basepoint.x, 12)},{_g(rep.basepoint.y, 12)}"]
    for label in rep.generators:
        lines.append(f"generator {label} "
                     f"error_estimate {_g(rep.error_estimates[label], 12)}")
        lines += _matrix_lines(rep.generators[label])
    return 0, lines


def _cmd_abphase(config, flags):
    conn = config.connection
    if not isinstance(conn, MultiSolenoid):
        raise ValidationError("abphase needs a multi_solenoid connection",
                              key="connection.variant")
    if not config.paths:
        raise ValidationError("abphase needs at least one path", key="paths")
    lines = []
    for name, p in _sorted_paths(config):
        ws = monodromy.winding_vector(p, conn.punctures)
        phase = monodromy.ab_phase_predict(conn.fluxes, p, conn.punctures)
        lines += [f"abphase path={name}",
                  "windings " + " ".join(str(w) for w in ws),
                  f"phase {_c(phase, 12)}"]
    return 0, lines


def _cmd_wong(config, flags):
    if config.wong_i0 is None:
        raise ValidationError("wong needs [wong] i0_components",
                              key="wong.i0_components")
    if not config.paths:
        raise ValidationError("wong needs at least one path", key="paths")
    _guard_paths(config)
    conn = config.connection
    basis = _wong_basis(config)
    I0 = wong.SpinState.from_components(basis, config.wong_i0)
    code = 0
    lines = []
    for name, p in _sorted_paths(config):
        res = wong.wong_transport(conn, basis, I0, p, config.transport_tol)
        lines += [f"wong path={name}",
                  "i_final_components " + " ".join(_c(v, 12)
                                                   for v in res.I_final.components),
                  f"spectral_drift {_g(res.spectral_drift, 12)}",
                  f"error_estimate {_g(res.error_estimate, 12)}"]
        if flags.get("verify_ad"):
            rep = wong.verify_ad_rho(conn, basis, p, config.wong_trials,
                                     config.transport_tol, config.seed)
            lines += [f"ad_rho max_deviation {_g(rep.max_deviation, 12)} "
                      f"threshold {_g(rep.threshold, 12)} "
                      f"status {'PASS' if rep.passed else 'FAIL'}"]
            if not rep.passed:
                code = 1
    return code, lines


def _cmd_vacua(config, flags):
    group = flags.get("group") or "Z"
    u = config.vacua_matrix
    if u is None:
        conn = config.connection
        if len(conn.punctures) != 1:
            raise ValidationError(
                "vacua needs [vacua] matrix, or a single-puncture connection",
                key="vacua.matrix")
        rep = monodromy.monodromy_representation(
            conn, tol=min(config.transport_tol, 1e-9),
            assume_flat=flags.get("assume_flat", False))
        (u,) = rep.generators.values()
    if group == "Z":
        cls = vacua.canonical_vacuum_cyclic(u)
        lines = ["vacua group=Z",
                 "eigenphases " + " ".join(_g(p, 12) for p in cls.eigenphases)]
    else:
        cls = vacua.classify_z2(u)
        i, j = cls.multiplicity_pair
        lines = ["vacua group=Z2", f"multiplicities {i} {j}"]
    return 0, lines


def _cmd_ym_energy(config, flags):
    if config.region is None:
        raise ValidationError("ym-energy needs a [region] table", key="region")
    energy = ym_energy(config.connection, config.region)
    return 0, ["ym-energy", f"energy {_g(energy, 12)}"]


def _cmd_verify(config, flags):
    seed = flags.get("seed")
    if seed is None:
        seed = config.seed if config is not None else 0
    reports = oracle.run_verification_suite(seed=seed)
    lines = []
    all_pass = True
    for r in reports:
        all_pass &= r.passed
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.quantity} "
                     f"deviation {_g(r.deviation, 12)} bound {_g(r.bound, 12)}")
    lines.append(f"verify {'PASS' if all_pass else 'FAIL'}")
    return (0 if all_pass else 1), lines


_HANDLERS = {
    "flatness": _cmd_flatness,
    "transport": _cmd_transport,
    "monodromy": _cmd_monodromy,
    "abphase": _cmd_abphase,
    "wong": _cmd_wong,
    "vacua": _cmd_vacua,
    "ym-energy": _cmd_ym_energy,
    "verify": _cmd_verify,
}


def run_subcommand(name: str, config: SceneConfig | None, flags: dict):
    """Dispatch one subcommand; returns (exit_code, report_text)."""
    if name not in _HANDLERS:
        return 2, f"error: unknown subcommand {name!r}"
    if config is None and name != "verify":
        return 2, "error: --config is required"
    try:
        code, lines = _HANDLERS[name](config, flags)
        return code, "\n".join(lines)
    except (HolonomyError, ValueError) as exc:
        return 2, f"error: {type(exc).__name__}: {exc}"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="holonomy-lab",
        description="holonomy, monodromy and geometric phases of flat "
                    "connections on the punctured plane")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="TOML scene file")
    parser.add_argument("--tol", type=float, help="override transport tolerance")
    parser.add_argument("--seed", type=int, help="override the scene seed")
    parser.add_argument("--csv", help="write trajectory CSV here (transport)")
    parser.add_argument("--assume-flat", action="store_true",
                        help="acknowledge flatness of a custom connection")
    parser.add_argument("--verify-ad", action="store_true",
                        help="also check spin conjugation against holonomy (wong)")
    parser.add_argument("--group", choices=("Z", "Z2"),
                        help="loop group for vacua classification")
    args = parser.parse_args(argv)

    config = None
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        try:
            config = parse_config(text)
        except (ParseError, ValidationError) as exc:
            loc = f" (line {exc.line})" if exc.line else ""
            print(f"error: {type(exc).__name__}: {exc}{loc}", file=sys.stderr)
            return 2
        if args.tol is not None:
            if not (transport.TOL_MIN <= args.tol <= transport.TOL_MAX):
                print(f"error: --tol must lie in [{transport.TOL_MIN}, "
                      f"{transport.TOL_MAX}]", file=sys.stderr)
                return 2
            config.transport_tol = args.tol
        if args.seed is not None:
            config.seed = args.seed

    flags = {"csv": args.csv, "assume_flat": args.assume_flat,
             "verify_ad": args.verify_ad, "group": args.group,
             "seed": args.seed}
    code, report = run_subcommand(args.subcommand, config, flags)
    print(report, file=sys.stderr if code == 2 else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
