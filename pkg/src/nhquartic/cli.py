"""Command-line front end: ``nhquartic {table0,sweep,ep,validate,c4v-demo}``.

Options are resolved in three layers: built-in defaults for the
subcommand, then an INI file given by ``--config`` (section ``[common]``
followed by the section named after the subcommand), then command-line
flags.  Keys in the file are the long flag names with ``-`` replaced by
``_``.

Every output carries its provenance: CSV files start with ``#`` lines
echoing the resolved configuration and the discretization, followed by a
mandatory header row; JSON output is one object ``{"meta": ..., "data": [...]}``.
Floats are written in shortest round-trip form, oracle energies with 18
significant digits.  Outputs contain no timestamps, so the same
configuration always yields byte-identical files.

Exit status: 0 when every check passed, 1 when a check failed, 2 for
invalid arguments, 3 for other library errors.
"""

import argparse
import configparser
import csv
from dataclasses import dataclass, fields, replace
import io
import json
import math
import os
import re
import sys

import jsonschema
import mpmath as mp
import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .eigensolver import classify_reality
from .errors import InvalidArgumentError, MethodDisagreementError, NHQuarticError, NeedMoreLevelsError
from .hamiltonian2d import ModelParams, Perturbation
from .oracle1d import MAX_DIGITS, compose_separable, quartic_levels
from .problem import BasisConfig, GridConfig, Problem
from .pseudospectral import cross_validate
from .sweep import SweepConfig, run_sweep
from .symmetry import basis_irrep, c4v_degenerate_pairs, state_irrep

__all__ = ["RunConfig", "main", "build_parser", "resolve_config", "JSON_SCHEMA"]

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3
SUBCOMMANDS = ("table0", "sweep", "ep", "validate", "c4v-demo")

JSON_SCHEMA = {
    "type": "object",
    "required": ["meta", "data"],
    "additionalProperties": False,
    "properties": {
        "meta": {
            "type": "object",
            "required": ["tool", "version", "subcommand", "config", "passed"],
            "properties": {
                "tool": {"const": "nhquartic"},
                "version": {"type": "string"},
                "subcommand": {"enum": list(SUBCOMMANDS)},
                "config": {"type": "object"},
                "passed": {"type": "boolean"},
            },
        },
        "data": {"type": "array", "items": {"type": "object"}},
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved options of one invocation."""

    subcommand: str
    alpha_x: str = "1"
    alpha_y: str = "sqrt(2)"
    perturbation: str = "x2y+xy2"
    method: str = "basis_dm"
    basis_size: int = 40
    basis_scale_x: float = None
    basis_scale_y: float = None
    scale_rule: str = "default"
    grid_n: int = 40
    grid_l: float = 5.0
    lambda_start: float = 0.0
    lambda_end: float = 6.0
    lambda_steps: int = 201
    lambdas: str = "0,0.1,0.5"
    levels: int = 8
    reality_eps: float = 1e-8
    tolerance: float = 1e-8
    oracle_tolerance: float = 1e-10
    ep_tol: float = 1e-6
    imag_threshold: float = 1e-6
    digits: int = MAX_DIGITS
    expect_transitions: int = None
    workers: int = 1
    format: str = "csv"
    out: str = None

    @property
    def alpha_x_value(self):
        return parse_real(self.alpha_x)

    @property
    def alpha_y_value(self):
        return parse_real(self.alpha_y)

    def params(self, lam=0.0):
        return ModelParams(self.alpha_x_value, self.alpha_y_value, self.perturbation, lam)

    def basis(self):
        return BasisConfig(
            self.basis_size, None, self.basis_scale_x, self.basis_scale_y, self.scale_rule
        )

    def grid(self):
        return GridConfig(self.grid_l, self.grid_n)

    def discretization(self):
        return self.basis() if self.method == "basis_dm" else self.grid()

    def lambda_list(self):
        return [float(v) for v in str(self.lambdas).replace(" ", "").split(",") if v]

    def sweep(self):
        return SweepConfig(
            self.lambda_start,
            self.lambda_end,
            self.lambda_steps,
            self.levels,
            self.method,
            self.reality_eps,
            self.ep_tol,
            self.workers,
        )

    def echo(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "out"}


# subcommand-specific defaults layered over the dataclass defaults
DEFAULTS = {
    "table0": {"levels": 23, "basis_size": 50, "scale_rule": "tuned", "tolerance": 1e-10},
    "sweep": {"basis_size": 24},
    "ep": {"basis_size": 24, "ep_tol": 1e-9},
    "validate": {"perturbation": "xy", "basis_size": 50, "scale_rule": "tuned"},
    "c4v-demo": {"alpha_y": "1", "perturbation": "xy", "lambdas": "0.01"},
}

_SQRT = re.compile(r"sqrt\(([^()]+)\)")


def parse_real(text):
    """A real number, optionally written as ``sqrt(v)``."""
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip().replace(" ", "")
    match = _SQRT.fullmatch(text)
    try:
        return math.sqrt(float(match.group(1))) if match else float(text)
    except ValueError:
        raise InvalidArgumentError(f"cannot parse number {text!r}") from None


# --- argument parsing --------------------------------------------------------


def _add_shared(p):
    g = p.add_argument_group("model and discretization")
    g.add_argument("--alpha-x", help="quartic coefficient along x (number or sqrt(v))")
    g.add_argument("--alpha-y", help="quartic coefficient along y (number or sqrt(v))")
    g.add_argument("--perturbation", choices=[m.value for m in Perturbation])
    g.add_argument("--method", choices=["basis_dm", "pseudospectral"])
    g.add_argument("--basis-size", type=int, help="oscillator functions per axis")
    g.add_argument("--basis-scale-x", type=float)
    g.add_argument("--basis-scale-y", type=float)
    g.add_argument("--scale-rule", choices=["default", "tuned"],
                   help="how unset basis scales are chosen")
    g.add_argument("--grid-n", type=int, help="grid points per axis")
    g.add_argument("--grid-l", type=float, help="grid half width")
    g = p.add_argument_group("coupling and checks")
    g.add_argument("--lambda-start", type=float)
    g.add_argument("--lambda-end", type=float)
    g.add_argument("--lambda-steps", type=int)
    g.add_argument("--lambdas", help="comma separated coupling values (validate, c4v-demo)")
    g.add_argument("--levels", type=int, help="number of levels or tracked branches")
    g.add_argument("--reality-eps", type=float)
    g.add_argument("--tolerance", type=float, help="pass/fail tolerance of the main check")
    g.add_argument("--oracle-tolerance", type=float)
    g.add_argument("--ep-tol", type=float, help="bracket width of refined exceptional points")
    g.add_argument("--imag-threshold", type=float)
    g.add_argument("--digits", type=int, help="certified digits of the 1D oracle")
    g.add_argument("--expect-transitions", type=int)
    g.add_argument("--workers", type=int)
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=["csv", "json"])
    g.add_argument("--out", help="output file (directory for sweep); default stdout")
    g.add_argument("--config", help="INI file with [common] and per-subcommand sections")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nhquartic",
        description="Spectra of H0 + i*lam*W for the 2D quartic oscillator.",
    )
    parser.add_argument("--version", action="version", version=f"nhquartic {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "table0": "lowest H0 levels from the 1D oracle, compared with the basis method",
        "sweep": "track branches over lambda, locate exceptional points",
        "ep": "exceptional points and transition counts of coalescing pairs",
        "validate": "cross-check the basis and grid methods",
        "c4v-demo": "square oscillator: E doublets turn complex for any lambda > 0",
    }
    for name in SUBCOMMANDS:
        _add_shared(sub.add_parser(name, help=helps[name], argument_default=argparse.SUPPRESS))
    return parser


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INTS = {"basis_size", "grid_n", "lambda_steps", "levels", "digits", "expect_transitions", "workers"}
_FLOATS = {name for name, f in _FIELDS.items() if f.type is float}


def _coerce(name, value):
    if value is None or (isinstance(value, str) and value.strip().lower() == "none"):
        return None
    if name in _INTS:
        return int(value)
    if name in _FLOATS:
        return float(value)
    return str(value)


def resolve_config(args):
    """Merge defaults, the config file and flags into a validated RunConfig."""
    values = dict(DEFAULTS[args.subcommand])
    path = getattr(args, "config", None)
    if path:
        ini = configparser.ConfigParser()
        if not ini.read(path):
            raise NHQuarticError(f"cannot read config file {path!r}")
        for section in ("common", args.subcommand):
            if ini.has_section(section):
                for key, raw in ini.items(section):
                    key = key.replace("-", "_")
                    if key not in _FIELDS or key == "subcommand":
                        raise NHQuarticError(f"unknown key {key!r} in section [{section}]")
                    values[key] = raw
    for key, value in vars(args).items():
        if key in _FIELDS and key != "subcommand":
            values[key] = value
    values = {k: _coerce(k, v) for k, v in values.items()}
    cfg = RunConfig(args.subcommand, **values)
    _validate(cfg)
    return cfg


def _validate(cfg):
    # the owning types check their own invariants
    cfg.params()
    Perturbation.parse(cfg.perturbation)
    if cfg.method not in ("basis_dm", "pseudospectral"):
        raise NHQuarticError(f"unknown method {cfg.method!r}")
    cfg.basis()
    cfg.grid().grid()
    if cfg.subcommand in ("sweep", "ep"):
        cfg.sweep()
    for lam in cfg.lambda_list():
        cfg.params(lam)
    if cfg.levels < 1:
        raise NHQuarticError("levels must be positive")
    for name in ("tolerance", "oracle_tolerance", "imag_threshold"):
        if not getattr(cfg, name) >= 0:
            raise NHQuarticError(f"{name} must be non-negative")
    if not 1 <= cfg.digits <= MAX_DIGITS:
        raise NHQuarticError(f"digits must lie in 1..{MAX_DIGITS}")
    if cfg.format not in ("csv", "json"):
        raise NHQuarticError(f"unknown format {cfg.format!r}")


# --- output ------------------------------------------------------------------


def fmt(value):
    """Shortest round-trip text of a float, or the text of anything else."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def oracle_text(energy, digits=MAX_DIGITS):
    return mp.nstr(energy, digits, strip_zeros=False)


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render(cfg, meta, columns, rows, passed):
    """Text of one table in the configured format."""
    meta = {"tool": "nhquartic", "version": __version__, "subcommand": cfg.subcommand,
            "config": cfg.echo(), "passed": bool(passed), **meta}
    if cfg.format == "json":
        doc = _jsonable({"meta": meta, "data": [dict(zip(columns, row)) for row in rows]})
        jsonschema.validate(doc, JSON_SCHEMA)
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# nhquartic {__version__} {cfg.subcommand}\n")
    for key, value in meta.items():
        if key in ("tool", "version", "subcommand"):
            continue
        if isinstance(value, dict):
            for k, v in value.items():
                buf.write(f"# {key}.{k} = {fmt(v)}\n")
        else:
            buf.write(f"# {key} = {fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- subcommands ---------------------------------------------------------------


def _oracle_rows(cfg, count, problem):
    """Oracle separable levels, with 1D level counts guessed from the 2D axes."""
    ex, _, ey, _ = problem.axis_states()
    sums = np.add.outer(ey, ex)  # [ny, nx]
    order = np.argsort(sums, axis=None, kind="stable")[:count]
    ny, nx = np.unravel_index(order, sums.shape)
    n_x, n_y = int(nx.max()) + 2, int(ny.max()) + 2
    while True:
        xs = quartic_levels(cfg.alpha_x, n_x, cfg.digits)
        ys = quartic_levels(cfg.alpha_y, n_y, cfg.digits)
        try:
            return compose_separable(xs, ys, count)
        except NeedMoreLevelsError:
            n_x, n_y = n_x + 1, n_y + 1


def cmd_table0(cfg):
    params = cfg.params(0.0)
    problem = Problem.build(params, cfg.basis())
    rows_oracle = _oracle_rows(cfg, cfg.levels, problem)
    margin = 8
    spec = problem.spectrum(0.0, count=cfg.levels + margin)
    parents, weights = problem.parents(spec.eigenvectors, margin=margin)
    where = {tuple(p): j for j, p in enumerate(parents)}
    rows, worst, ok = [], 0.0, True
    for lv in rows_oracle:
        j = where.get((lv.nx, lv.ny))
        if j is None:
            ok = False
            rows.append([lv.nx, lv.ny, oracle_text(lv.energy, cfg.digits), str(lv.ci), str(lv.d2h),
                         None, None, None, None, False])
            continue
        v = spec.eigenvectors[:, j]
        e_dm = float(spec.eigenvalues[j].real)
        diff = abs(e_dm - float(lv.energy))
        ci, d2h = state_irrep(v, problem, "Ci"), state_irrep(v, problem, "D2h")
        good = diff <= cfg.tolerance and str(ci) == str(lv.ci) and str(d2h) == str(lv.d2h)
        ok &= good
        worst = max(worst, diff)
        rows.append([lv.nx, lv.ny, oracle_text(lv.energy, cfg.digits), str(lv.ci), str(lv.d2h),
                     e_dm, diff, str(ci), str(d2h), good])
    columns = ["nx", "ny", "energy_oracle", "ci", "d2h", "energy_dm", "abs_diff", "ci_dm", "d2h_dm", "pass"]
    meta = {"oracle": {"method": "taylor shooting", "certified_digits": cfg.digits},
            "discretization": problem.meta, "max_abs_diff": worst}
    emit(render(cfg, meta, columns, rows, ok), cfg.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _branch_rows(branch):
    for lv in branch.levels:
        yield [lv.lam, lv.value.real, lv.value.imag, f"{branch.parent[0]},{branch.parent[1]}",
               branch.ancestry_ci, str(lv.ci), lv.ci.purity, str(lv.d2h), lv.d2h.purity,
               lv.overlap, lv.residual, "" if lv.partner is None else lv.partner]


BRANCH_COLUMNS = ["lambda", "re", "im", "parent", "parent_ci", "ci", "ci_purity", "d2h",
                  "d2h_purity", "overlap_prev", "residual", "partner"]
PAIR_COLUMNS = ["branch_a", "branch_b", "parent_a", "parent_b", "parent_ci_a", "parent_ci_b",
                "transitions", "ep_index", "lambda_low", "lambda_high", "gap_at_bracket", "direction"]


def _pair_rows(result):
    rows = []
    for pr in result.pairs:
        (a, b), (pa, pb) = pr.branch_ids, pr.parents
        head = [a, b, f"{pa[0]},{pa[1]}", f"{pb[0]},{pb[1]}", str(basis_irrep(pa, "Ci")),
                str(basis_irrep(pb, "Ci")), pr.count]
        eps = pr.transitions.exceptional_points or [None]
        for i, ep in enumerate(eps):
            if ep is None:
                rows.append(head + [None] * 5)
            else:
                rows.append(head + [i, ep.lambda_low, ep.lambda_high, ep.gap_at_bracket, ep.direction])
    return rows


def _sweep_checks(cfg, result):
    ok = not result.faults
    if cfg.expect_transitions is not None:
        ok &= all(pr.count == cfg.expect_transitions for pr in result.pairs)
    return ok


def _sweep_meta(result):
    return {
        "discretization": result.meta,
        "continuity_constant": result.continuity_constant,
        "tracking_faults": len(result.tracking_faults),
        "warnings": len(result.warnings),
        "fatal_faults": len(result.faults),
    }


GNUPLOT = """# gnuplot script: real parts of all branches against lambda
set datafile separator ','
set xlabel 'lambda'
set ylabel 'Re E'
plot for [f in system('ls branch_*.csv')] f using 1:2 with lines title f
"""


def cmd_sweep(cfg):
    params = cfg.params(0.0)
    result = run_sweep(cfg.sweep(), params, cfg.discretization())
    ok = _sweep_checks(cfg, result)
    out = cfg.out or "sweep_out"
    os.makedirs(out, exist_ok=True)
    ext = cfg.format
    for br in result.branches:
        meta = {"branch": br.id, "parent": list(br.parent), "parent_ci": br.ancestry_ci,
                "parent_d2h": br.ancestry_d2h, "discretization": result.meta}
        emit(render(cfg, meta, BRANCH_COLUMNS, list(_branch_rows(br)), ok),
             os.path.join(out, f"branch_{br.id:02d}.{ext}"))
    emit(render(cfg, _sweep_meta(result), PAIR_COLUMNS, _pair_rows(result), ok),
         os.path.join(out, f"summary.{ext}"))
    notes = [[w["kind"], w.get("branch", ""), w["lambda"], w.get("margin", w.get("message", ""))]
             for w in result.warnings]
    notes += [["tracking-fault", f["branch"], f["lambda"], f["slope"]] for f in result.tracking_faults]
    emit(render(cfg, {}, ["kind", "branch", "lambda", "detail"], notes, ok),
         os.path.join(out, f"warnings.{ext}"))
    if ext == "csv":
        emit(GNUPLOT, os.path.join(out, "plot.gp"))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_ep(cfg):
    result = run_sweep(cfg.sweep(), cfg.params(0.0), cfg.discretization())
    ok = _sweep_checks(cfg, result)
    ok &= all(ep.width <= cfg.ep_tol for ep in result.exceptional_points)
    emit(render(cfg, _sweep_meta(result), PAIR_COLUMNS, _pair_rows(result), ok), cfg.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_validate(cfg):
    k = cfg.levels
    rows, ok, summary = [], True, {}
    for lam in cfg.lambda_list():
        params = cfg.params(lam)
        try:
            report = cross_validate(params, cfg.basis(), cfg.grid(), k=k, tol=cfg.tolerance)
        except MethodDisagreementError as exc:
            report = exc.report
        ok &= report.passed
        summary[f"lambda={lam!r}"] = f"max_distance={report.max_distance!r} pass={report.passed}"
        for i, (a, b, d) in enumerate(zip(report.basis_values, report.grid_values, report.distances)):
            rows.append([lam, i, "pseudospectral", a.real, a.imag, b.real, b.imag, d, d <= cfg.tolerance])
        if lam == 0:
            problem = Problem.build(params, cfg.basis())
            oracle = _oracle_rows(cfg, k, problem)
            dm = np.sort(report.basis_values.real)
            worst = 0.0
            for i, (e, lv) in enumerate(zip(dm, oracle)):
                d = abs(e - float(lv.energy))
                worst = max(worst, d)
                rows.append([lam, i, "oracle1d", e, 0.0, float(lv.energy), 0.0, d, d <= cfg.oracle_tolerance])
            ok &= worst <= cfg.oracle_tolerance
            summary["oracle"] = f"max_distance={worst!r} pass={worst <= cfg.oracle_tolerance}"
    columns = ["lambda", "index", "reference", "dm_re", "dm_im", "ref_re", "ref_im", "distance", "pass"]
    meta = {"basis": cfg.basis().describe(cfg.params()), "grid": cfg.grid().describe(cfg.params()),
            "results": summary}
    emit(render(cfg, meta, columns, rows, ok), cfg.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def c4v_report(cfg):
    """Rows and verdict of the square-oscillator demonstration.

    For the model as configured every E doublet of ``H0`` among the lowest
    ``levels`` must acquire ``|Im E| > imag_threshold`` at each coupling.
    The same check on ``alpha_y = sqrt(2)`` must leave all levels real
    within ``reality_eps``.
    """
    k = cfg.levels
    params = cfg.params(0.0)
    problem = Problem.build(params, cfg.basis())
    base = problem.spectrum(0.0, count=k)
    parents, _ = problem.parents(base.eigenvectors)
    square = math.isclose(params.alpha_x, params.alpha_y)
    doublets = c4v_degenerate_pairs(base, problem) if square else []
    in_doublet = {i for d in doublets for i in (d.first, d.second)}
    rows, ok = [], bool(doublets) or not square
    for lam in cfg.lambda_list():
        spec = problem.spectrum(lam, count=k)
        overlaps = np.abs(base.eigenvectors.conj().T @ spec.eigenvectors)
        r, c = linear_sum_assignment(-overlaps)
        match = dict(zip(r, c))
        for i in range(len(base.eigenvalues)):
            j = match.get(i)
            if j is None:
                continue
            v0, v = base.eigenvectors[:, i], spec.eigenvectors[:, j]
            label0 = str(state_irrep(v0, problem, "C4v")) if square else str(state_irrep(v0, problem, "D2h"))
            label = str(state_irrep(v, problem, "C2v")) if square else str(state_irrep(v, problem, "Ci"))
            e = spec.eigenvalues[j]
            doublet = i in in_doublet
            good = abs(e.imag) > cfg.imag_threshold if doublet else True
            ok &= good
            rows.append([lam, i, f"{parents[i][0]},{parents[i][1]}", label0, doublet,
                         float(base.eigenvalues[i].real), e.real, e.imag, label, good])
    # rectangular counterpart: no degeneracy, all levels stay real
    rect = replace(cfg, alpha_y="sqrt(2)")
    rp = Problem.build(rect.params(0.0), rect.basis())
    real_ok = True
    for lam in cfg.lambda_list():
        spec = rp.spectrum(lam, count=k)
        part = classify_reality(spec, cfg.reality_eps)
        real_ok &= not part.pairs and bool(np.all(np.abs(spec.eigenvalues.imag) <= cfg.reality_eps))
    meta = {"discretization": problem.meta, "doublets": len(doublets),
            "rectangular_all_real": real_ok}
    return rows, ok and real_ok, meta


def cmd_c4v_demo(cfg):
    rows, ok, meta = c4v_report(cfg)
    columns = ["lambda", "index", "parent", "label_h0", "e_doublet", "e0", "re", "im", "label", "pass"]
    emit(render(cfg, meta, columns, rows, ok), cfg.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "table0": cmd_table0,
    "sweep": cmd_sweep,
    "ep": cmd_ep,
    "validate": cmd_validate,
    "c4v-demo": cmd_c4v_demo,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (NHQuarticError, ValueError) as exc:
        parser.error(str(exc))  # exits with status 2
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except NHQuarticError as exc:
        print(f"nhquartic: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
