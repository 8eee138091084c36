"""Problem files and the ``fgcoupled`` command line.

Problem files are line oriented::

    # comment
    space_X.dim = 1
    space_X.lower = -inf
    space_X.upper = 0
    map_F.kind = affine
    map_F.A = 1/3            # matrix rows split by ';', entries by ','
    map_F.B = -1/4
    class.type = banach
    class.k = 1/3
    seed.x = -1
    solve.tol_step = 1e-10

Numbers are decimals, ``p/q`` rationals or ``inf``/``-inf`` (box bounds only).
Unknown sections or keys, duplicates and missing required keys are errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .contraction import (
    CLASSES,
    ContractionClass,
    estimate_constants,
    make_class,
    verify_condition,
)
from .coupled_maps import (
    CoupledMapPair,
    MapSpec,
    SamplerConfig,
    check_closure,
    check_mixed_monotone,
    check_seed,
    iterate_step,
)
from .errors import (
    ConfigError,
    DivergenceError,
    EstimationError,
    FGCoupledError,
    InputError,
    ProblemSyntaxError,
)
from .oracle import GridSpec, condition_brute_force, grid_residual_minimizer
from .ordered_metric import ProductPoint, SpaceDescriptor
from .solver import HYPOTHESIS_MODES, SolveConfig, apriori_bound, make_certificate, solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FLAGGED = 2

_SPACE_KEYS = ("dim", "lower", "upper")
_MAP_KEYS = ("kind", "A", "B", "offset", "name")
_SOLVE_KEYS = ("tol_step", "tol_residual", "max_iter", "hypothesis_mode")
_CLASS_KEYS = ("type",) + tuple(sorted({n for c in CLASSES.values() for n in c.names}))
SECTIONS = {
    "space_X": _SPACE_KEYS,
    "space_Y": _SPACE_KEYS,
    "map_F": _MAP_KEYS,
    "map_G": _MAP_KEYS,
    "class": _CLASS_KEYS,
    "seed": ("x", "y"),
    "solve": _SOLVE_KEYS,
}


@dataclass(frozen=True)
class ProblemFile:
    X: SpaceDescriptor
    Y: SpaceDescriptor
    F: MapSpec
    G: MapSpec
    cls: ContractionClass | None = None
    seed: ProductPoint | None = None
    solve: SolveConfig | None = None

    @property
    def pair(self) -> CoupledMapPair:
        return CoupledMapPair(self.X, self.Y, self.F, self.G)


# -- parsing -----------------------------------------------------------------

def _number(tok: str, line: int, allow_inf: bool = False) -> float:
    t = tok.strip()
    low = t.lower()
    if low in ("inf", "+inf", "-inf"):
        if not allow_inf:
            raise ProblemSyntaxError(f"infinite value {t!r} not allowed here", line)
        return -math.inf if low.startswith("-") else math.inf
    try:
        value = Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise ProblemSyntaxError(f"bad number {t!r}", line) from None
    if value == 0 and t.startswith("-"):
        return -0.0
    return float(value)


def _vector(text: str, line: int, allow_inf: bool = False) -> list[float]:
    toks = text.split(",")
    if any(not t.strip() for t in toks):
        raise ProblemSyntaxError(f"empty entry in vector {text!r}", line)
    return [_number(t, line, allow_inf) for t in toks]


def _matrix(text: str, line: int) -> list[list[float]]:
    rows = [_vector(r, line) for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise ProblemSyntaxError(f"ragged matrix {text!r}", line)
    return rows


def _tokenize(text: str) -> dict[tuple[str, str], tuple[str, int]]:
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ProblemSyntaxError(f"expected 'section.key = value', got {body!r}", lineno)
        lhs, value = (s.strip() for s in body.split("=", 1))
        if "." not in lhs:
            raise ProblemSyntaxError(f"key {lhs!r} lacks a section prefix", lineno)
        section, key = lhs.split(".", 1)
        if section not in SECTIONS:
            raise ProblemSyntaxError(f"unknown section {section!r}", lineno)
        if key not in SECTIONS[section]:
            raise ProblemSyntaxError(f"unknown key {lhs!r}", lineno)
        if not value:
            raise ProblemSyntaxError(f"missing value for {lhs!r}", lineno)
        if (section, key) in entries:
            raise ProblemSyntaxError(
                f"duplicate key {lhs!r} (first on line {entries[section, key][1]})", lineno)
        entries[section, key] = (value, lineno)
    if not entries:
        raise ProblemSyntaxError("empty problem file", 1)
    return entries


class _Reader:
    def __init__(self, entries, nlines):
        self.entries = entries
        self.last = max(nlines, 1)

    def has(self, section, key=None):
        if key is None:
            return any(s == section for s, _ in self.entries)
        return (section, key) in self.entries

    def line(self, section, key=None):
        if key is not None and (section, key) in self.entries:
            return self.entries[section, key][1]
        lines = [ln for (s, _), (_, ln) in self.entries.items() if s == section]
        return min(lines) if lines else self.last

    def get(self, section, key):
        try:
            return self.entries[section, key]
        except KeyError:
            raise ProblemSyntaxError(
                f"missing required key {section}.{key}", self.line(section)) from None


def _int(value: str, line: int, what: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ProblemSyntaxError(f"{what} must be an integer, got {value!r}", line) from None
    return n


def _space(r: _Reader, section: str) -> SpaceDescriptor:
    dim_s, dim_line = r.get(section, "dim")
    dim = _int(dim_s, dim_line, f"{section}.dim")
    if dim < 1:
        raise ProblemSyntaxError(f"{section}.dim must be positive", dim_line)
    bounds = {}
    for key, default in (("lower", -math.inf), ("upper", math.inf)):
        if r.has(section, key):
            text, ln = r.get(section, key)
            vec = _vector(text, ln, allow_inf=True)
            if len(vec) != dim:
                raise InputError(
                    f"line {ln}: {section}.{key} has {len(vec)} entries, dim is {dim}")
        else:
            vec = [default] * dim
        bounds[key] = vec
    try:
        return SpaceDescriptor(tuple(bounds["lower"]), tuple(bounds["upper"]))
    except InputError as exc:
        raise InputError(f"line {r.line(section)}: {exc}") from None


def _map(r: _Reader, section: str, d_out: int, d_first: int, d_second: int) -> MapSpec:
    kind, kline = r.get(section, "kind")
    if kind == "affine":
        if r.has(section, "name"):
            raise ProblemSyntaxError(f"{section}.name applies to builtin maps only",
                                     r.line(section, "name"))
        A = _matrix(*r.get(section, "A"))
        B = _matrix(*r.get(section, "B"))
        off = _vector(*r.get(section, "offset")) if r.has(section, "offset") else None
        spec = MapSpec.affine(A, B, off)
    elif kind == "builtin":
        extra = [k for k in ("A", "B", "offset") if r.has(section, k)]
        if extra:
            raise ProblemSyntaxError(f"{section}.{extra[0]} applies to affine maps only",
                                     r.line(section, extra[0]))
        name, nline = r.get(section, "name")
        try:
            spec = MapSpec.builtin(name)
        except ConfigError as exc:
            raise ConfigError(f"line {nline}: {exc}") from None
    else:
        raise ProblemSyntaxError(f"{section}.kind must be affine or builtin, got {kind!r}", kline)
    try:
        spec.validate(d_out, d_first, d_second, section)
    except InputError as exc:
        raise InputError(f"line {kline}: {exc}") from None
    return spec


def _class(r: _Reader) -> ContractionClass:
    tag, tline = r.get("class", "type")
    if tag not in CLASSES:
        raise ConfigError(f"line {tline}: unknown contraction class {tag!r}; "
                          f"known: {', '.join(CLASSES)}")
    names = CLASSES[tag].names
    extra = [k for (s, k) in r.entries if s == "class" and k != "type" and k not in names]
    if extra:
        raise ProblemSyntaxError(f"class {tag} has no constant {extra[0]!r}",
                                 r.line("class", extra[0]))
    consts = {n: _number(*r.get("class", n)) for n in names}
    cls = make_class(tag, **consts)
    errs = cls.admissibility_errors()
    if errs:
        raise ConfigError(f"line {tline}: inadmissible {tag} constants: " + "; ".join(errs))
    return cls


def _solve_config(r: _Reader) -> SolveConfig:
    kw = {}
    for key in ("tol_step", "tol_residual"):
        if r.has("solve", key):
            kw[key] = _number(*r.get("solve", key))
    if r.has("solve", "max_iter"):
        kw["max_iter"] = _int(*r.get("solve", "max_iter"), "solve.max_iter")
    if r.has("solve", "hypothesis_mode"):
        mode, ln = r.get("solve", "hypothesis_mode")
        if mode not in HYPOTHESIS_MODES:
            raise ProblemSyntaxError(
                f"solve.hypothesis_mode must be one of {', '.join(HYPOTHESIS_MODES)}", ln)
        kw["hypothesis_mode"] = mode
    try:
        return SolveConfig(**kw)
    except ConfigError as exc:
        raise ConfigError(f"line {r.line('solve')}: {exc}") from None


def parse_problem(text: str) -> ProblemFile:
    """Parse and fully validate a problem file."""
    r = _Reader(_tokenize(text), len(text.splitlines()))
    X = _space(r, "space_X")
    Y = _space(r, "space_Y")
    F = _map(r, "map_F", X.dim, X.dim, Y.dim)
    G = _map(r, "map_G", Y.dim, Y.dim, X.dim)
    cls = _class(r) if r.has("class") else None
    seed = None
    if r.has("seed"):
        xs, xl = r.get("seed", "x")
        ys, yl = r.get("seed", "y")
        try:
            seed = ProductPoint(X.point(_vector(xs, xl)), Y.point(_vector(ys, yl)))
        except InputError as exc:
            raise InputError(f"line {xl}: seed: {exc}") from None
    cfg = _solve_config(r) if r.has("solve") else None
    return ProblemFile(X, Y, F, G, cls, seed, cfg)


# -- emitting ----------------------------------------------------------------

def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _fmt_vec(v) -> str:
    return ", ".join(_fmt(x) for x in np.ravel(v))


def _fmt_mat(m) -> str:
    return "; ".join(_fmt_vec(row) for row in np.atleast_2d(m))


def emit_problem(problem: ProblemFile) -> str:
    """Text that ``parse_problem`` maps back to an equal ProblemFile."""
    out = []
    for name, sp in (("space_X", problem.X), ("space_Y", problem.Y)):
        out += [f"{name}.dim = {sp.dim}",
                f"{name}.lower = {_fmt_vec(sp.lower)}",
                f"{name}.upper = {_fmt_vec(sp.upper)}"]
    for name, m in (("map_F", problem.F), ("map_G", problem.G)):
        out.append(f"{name}.kind = {m.kind}")
        if m.kind == "affine":
            out += [f"{name}.A = {_fmt_mat(m.A)}",
                    f"{name}.B = {_fmt_mat(m.B)}",
                    f"{name}.offset = {_fmt_vec(m.offset)}"]
        else:
            out.append(f"{name}.name = {m.name}")
    if problem.cls is not None:
        out.append(f"class.type = {problem.cls.tag}")
        out += [f"class.{k} = {_fmt(v)}" for k, v in problem.cls.as_dict().items()]
    if problem.seed is not None:
        out += [f"seed.x = {_fmt_vec(problem.seed.x)}", f"seed.y = {_fmt_vec(problem.seed.y)}"]
    if problem.solve is not None:
        s = problem.solve
        out += [f"solve.tol_step = {_fmt(s.tol_step)}",
                f"solve.tol_residual = {_fmt(s.tol_residual)}",
                f"solve.max_iter = {s.max_iter}",
                f"solve.hypothesis_mode = {s.hypothesis_mode}"]
    return "\n".join(out) + "\n"


def packaged_problem(name: str) -> Path:
    return Path(str(resources.files("fgcoupled") / "problems" / name))


def load_problem(path: str | Path) -> ProblemFile:
    """Read a problem file; a missing path falls back to the shipped file of the same name."""
    p = Path(path)
    if not p.exists():
        shipped = packaged_problem(p.name)
        if not shipped.exists():
            raise InputError(f"no such problem file: {path}")
        p = shipped
    return parse_problem(p.read_text(encoding="utf-8"))


# -- reports -----------------------------------------------------------------

def _g(v) -> str:
    return "%.17g" % v


def _gv(v) -> str:
    return ",".join(_g(x) for x in np.ravel(v))


def _b(v) -> str:
    return "true" if v else "false"


class Report:
    def __init__(self, command: str, path: str):
        self.lines = [f"command={command}", f"problem={path}"]

    def kv(self, key, value):
        self.lines.append(f"{key}={value}")

    def table(self, header: list[str], rows: list[list[str]]):
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(header)]
        self.lines.append("")
        self.lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
        for r in rows:
            self.lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _class_str(cls: ContractionClass) -> str:
    return f"{cls.tag}(" + ", ".join(f"{k}={_g(v)}" for k, v in cls.as_dict().items()) + ")"


def _point_str(p: ProductPoint) -> str:
    return f"({_gv(p.x)}; {_gv(p.y)})"


def _violation_lines(rep, prefix, report):
    rep.kv(f"{prefix}_samples", report.samples_checked)
    rep.kv(f"{prefix}_violations", report.violation_count)
    rep.kv(f"{prefix}_worst_slack", _g(report.worst_slack))
    for i, v in enumerate(report.violations[:5]):
        rep.kv(f"{prefix}_witness_{i}",
               f"a={_point_str(v.a)} b={_point_str(v.b)} slack_F={_g(v.slack_F)} "
               f"slack_G={_g(v.slack_G)}")


def _need_seed(problem: ProblemFile) -> ProductPoint:
    if problem.seed is None:
        raise InputError("problem file has no seed section")
    return problem.seed


def _need_class(problem: ProblemFile) -> ContractionClass:
    if problem.cls is None:
        raise InputError("problem file has no class section")
    return problem.cls


def _effective_config(problem: ProblemFile, args) -> SolveConfig:
    base = problem.solve or SolveConfig()
    kw = dict(tol_step=base.tol_step, tol_residual=base.tol_residual,
              max_iter=base.max_iter, hypothesis_mode=base.hypothesis_mode)
    if args.tol is not None:
        kw["tol_step"] = kw["tol_residual"] = args.tol
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    return SolveConfig(**kw)


def cmd_solve(problem, args, rep: Report) -> int:
    seed = _need_seed(problem)
    cfg = _effective_config(problem, args)
    try:
        res = solve(problem.pair, problem.cls, seed, cfg, args.sampler)
    except DivergenceError as exc:
        rep.kv("status", "diverged")
        rep.kv("error", str(exc))
        return EXIT_FLAGGED
    hr = res.hypothesis_report
    rep.kv("class", _class_str(problem.cls) if problem.cls else "none")
    rep.kv("seed_point", _point_str(seed))
    rep.kv("tol_step", _g(cfg.tol_step))
    rep.kv("tol_residual", _g(cfg.tol_residual))
    rep.kv("max_iter", cfg.max_iter)
    rep.kv("hypothesis_mode", hr.hypothesis_mode)
    rep.kv("hypothesis_note", hr.note)
    rep.kv("seed_ok", _b(hr.seed_ok))
    rep.kv("mixed_monotone_ok", _b(hr.monotone.ok))
    rep.kv("closure_violations", len(hr.closure_violations))
    if hr.condition is not None:
        rep.kv("condition_violations", hr.condition.violation_count)
        rep.kv("condition_worst_slack", _g(hr.condition.worst_slack))
    rep.kv("trajectory_monotone", "unchecked" if hr.trajectory_monotone is None
           else _b(hr.trajectory_monotone))
    rep.kv("hypotheses_ok", _b(hr.ok))
    rep.kv("converged", _b(res.converged))
    rep.kv("iterations", res.iterations)
    rep.kv("residual", _g(res.residual))
    rep.kv("point", _point_str(res.point))
    cert = res.certificate
    if cert is not None:
        rep.kv("bound_form", cert.bound_form)
        rep.kv("delta1", _g(cert.delta1))
        rep.kv("delta2", _g(cert.delta2))
        rep.kv("D1", _g(cert.D1))
    rows = []
    tr = res.trace
    for j in range(len(tr)):
        step = _g(tr.step_distances[j - 1]) if j else "-"
        bx, by = apriori_bound(cert, j) if cert is not None else ("-", "-")
        rows.append([str(j), _gv(tr.xs[j]), _gv(tr.ys[j]), step, _g(tr.residuals[j]),
                     bx if cert is None else _g(bx), by if cert is None else _g(by)])
    rep.table(["j", "x", "y", "step", "residual", "bound_X", "bound_Y"], rows)
    return EXIT_OK if res.converged and hr.ok else EXIT_FLAGGED


def cmd_verify(problem, args, rep: Report) -> int:
    pair = problem.pair
    ok = True
    mono = check_mixed_monotone(pair, args.sampler)
    rep.kv("mixed_monotone_samples", mono.samples_checked)
    rep.kv("mixed_monotone_violations", len(mono.violations))
    ok &= mono.ok
    closure = check_closure(pair, args.sampler)
    rep.kv("closure_violations", len(closure))
    ok &= not closure
    if problem.seed is not None:
        seed_ok = check_seed(pair, problem.seed)
        rep.kv("seed_point", _point_str(problem.seed))
        rep.kv("seed_ok", _b(seed_ok))
        ok &= seed_ok
    else:
        rep.kv("seed_ok", "unchecked")
    if problem.cls is not None:
        rep.kv("class", _class_str(problem.cls))
        report = verify_condition(problem.cls, pair, args.sampler)
        _violation_lines(rep, "condition", report)
        ok &= report.ok
    rep.kv("verdict", "ok" if ok else "violated")
    return EXIT_OK if ok else EXIT_FLAGGED


def cmd_estimate(problem, args, rep: Report) -> int:
    tag = args.cls or (problem.cls.tag if problem.cls else None)
    if tag is None:
        raise InputError("estimate needs --class or a class section")
    rep.kv("class_type", tag)
    try:
        est = estimate_constants(tag, problem.pair, args.sampler)
    except EstimationError as exc:
        rep.kv("status", "not-certifiable")
        rep.kv("error", str(exc))
        return EXIT_FLAGGED
    rep.kv("status", "ok")
    for k, v in est.as_dict().items():
        rep.kv(k, _g(v))
    return EXIT_OK


def cmd_certify(problem, args, rep: Report) -> int:
    cls = _need_class(problem)
    seed = _need_seed(problem)
    pair = problem.pair
    cert = make_certificate(cls, seed, iterate_step(pair, seed))
    rep.kv("class", _class_str(cls))
    rep.kv("seed_point", _point_str(seed))
    rep.kv("seed_ok", _b(check_seed(pair, seed)))
    rep.kv("bound_form", cert.bound_form)
    rep.kv("delta1", _g(cert.delta1))
    rep.kv("delta2", _g(cert.delta2))
    rep.kv("D1", _g(cert.D1))
    rows = [[str(j), *map(_g, apriori_bound(cert, j))] for j in range(args.steps + 1)]
    rep.table(["j", "bound_X", "bound_Y"], rows)
    return EXIT_OK


def cmd_oracle(problem, args, rep: Report) -> int:
    pair = problem.pair
    grid = GridSpec(args.grid)
    point, res = grid_residual_minimizer(pair, grid)
    rep.kv("grid_points_per_axis", grid.points_per_axis)
    rep.kv("clamp_radius", _g(grid.clamp_radius))
    rep.kv("minimizer", _point_str(point))
    rep.kv("minimizer_residual", _g(res))
    if problem.cls is None:
        return EXIT_OK
    pgrid = GridSpec(args.pair_grid)
    report = condition_brute_force(problem.cls, pair, pgrid)
    rep.kv("class", _class_str(problem.cls))
    rep.kv("pair_grid_points_per_axis", pgrid.points_per_axis)
    _violation_lines(rep, "condition", report)
    return EXIT_OK if report.ok else EXIT_FLAGGED


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "estimate": cmd_estimate,
    "certify": cmd_certify,
    "oracle": cmd_oracle,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(s):
    n = int(s)
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fgcoupled", description="Coupled fixed points of mixed monotone map pairs.")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("problem", help="problem file (shipped examples are found by name)")
    p.add_argument("--tol", type=float, help="step and residual tolerance")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=_positive_int, default=0, help="RNG seed for sampling")
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--grid", type=int, default=101, help="minimizer grid points per axis")
    p.add_argument("--pair-grid", type=int, default=21,
                   help="condition scan grid points per axis")
    p.add_argument("--class", dest="cls", choices=list(CLASSES))
    p.add_argument("--steps", type=_positive_int, default=20, help="certify table length")
    return p


def run_command(argv: list[str]) -> tuple[int, str]:
    """Run one subcommand; returns ``(exit_status, report_text)``."""
    try:
        args = build_parser().parse_args(argv)
        args.sampler = SamplerConfig(samples=args.samples, seed=args.seed)
        problem = load_problem(args.problem)
        rep = Report(args.command, args.problem)
        status = COMMANDS[args.command](problem, args, rep)
        return status, rep.text()
    except UsageError as exc:
        return EXIT_USAGE, f"error: {exc}\n"
    except FGCoupledError as exc:
        return EXIT_USAGE, f"error: {exc}\n"
    except OSError as exc:
        return EXIT_USAGE, f"error: {exc}\n"


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if argv and argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return EXIT_OK
    status, text = run_command(argv)
    (sys.stderr if text.startswith("error:") else sys.stdout).write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
