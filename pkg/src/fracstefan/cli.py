"""Command-line front end.

Subcommands: ``xi``, ``profile``, ``f2-scan``, ``verify``, ``limit-sweep``.
Exit status: 0 success, 1 usage or configuration error, 2 no root found,
3 verification failure.

A configuration file is a flat JSON object. Keys and units:

    k1, k2        thermal conductivity of solid / liquid   W m^-1 K^-1
    c1, c2        specific heat of solid / liquid          J kg^-1 K^-1
    rho           density                                  kg m^-3
    l             latent heat                              J kg^-1
    u0, um, ui    boundary, melting, initial temperature   K
    alpha         Caputo order, 0 < alpha <= 1             -
    series_terms_max, crossover_x, target_rel_err          Wright evaluation
    tol, scan_max                                          root solver
    format        "csv" or "json"
    out           output path, "-" for stdout
    x_min, x_max, n_x                                      profile grid   m
    times         list of profile times                    s
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .special import NonConvergenceError, WrightEvalConfig, gamma_ratio
from .stefan import (
    DEFAULT_SCAN_MAX,
    DEFAULT_TOL,
    InvalidProblemError,
    NoRootError,
    StefanProblem,
    build_solution,
    classical_neumann,
    f2,
    solve_xi,
)
from .verify import limit_sweep, run_verification

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_ROOT = 2
EXIT_VERIFY_FAILED = 3

SMALL_ORDER_ALPHAS = (1 / 16, 1 / 8, 1 / 4, 3 / 8, 1 / 2)
LARGE_ORDER_ALPHAS = (1 / 2, 5 / 8, 3 / 4, 7 / 8, 15 / 16)
DEFAULT_SWEEP_ALPHAS = (0.8, 0.9, 0.95, 0.99)

PROFILE_COLUMNS = ("x", "t", "phase", "u")
F2_COLUMNS = ("alpha", "x", "F2")
SWEEP_COLUMNS = ("alpha", "xi_alpha", "xi_gap", "sup_u_gap", "front_gap")


class ConfigError(ValueError):
    pass


def fmt(v: float) -> str:
    """17 significant digits, locale-free, so doubles round-trip exactly."""
    return format(float(v), ".17g")


@dataclass(frozen=True)
class RunConfig:
    problem: StefanProblem = field(default_factory=StefanProblem)
    eval: WrightEvalConfig = field(default_factory=WrightEvalConfig)
    tol: float = DEFAULT_TOL
    scan_max: float = DEFAULT_SCAN_MAX
    format: str = "csv"
    out: str = "-"
    x_min: float = 0.0
    x_max: float = 4.0
    n_x: int = 41
    times: tuple[float, ...] = (0.5, 1.0, 2.0)

    _PROBLEM_KEYS = tuple(f.name for f in dataclasses.fields(StefanProblem))
    _EVAL_KEYS = ("series_terms_max", "crossover_x", "target_rel_err")

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = set(cls._PROBLEM_KEYS) | set(cls._EVAL_KEYS) | {
            "tol", "scan_max", "format", "out", "x_min", "x_max", "n_x", "times"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        try:
            problem = StefanProblem(**{k: float(data[k]) for k in cls._PROBLEM_KEYS if k in data})
        except InvalidProblemError as exc:
            raise ConfigError(f"invalid problem: {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid problem value: {exc}") from None
        ev = {k: data[k] for k in cls._EVAL_KEYS if k in data}
        if "series_terms_max" in ev:
            ev["series_terms_max"] = int(ev["series_terms_max"])
        try:
            eval_cfg = WrightEvalConfig(**ev)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid evaluation settings: {exc}") from None
        kw: dict = {}
        for key, conv in (("tol", float), ("scan_max", float), ("x_min", float), ("x_max", float),
                          ("n_x", int), ("format", str), ("out", str)):
            if key in data:
                try:
                    kw[key] = conv(data[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"{key}: cannot convert {data[key]!r}") from None
        if "times" in data:
            try:
                kw["times"] = tuple(float(t) for t in data["times"])
            except (TypeError, ValueError):
                raise ConfigError("times must be a list of numbers") from None
        cfg = cls(problem=problem, eval=eval_cfg, **kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not 0 < self.tol <= 1e-4:
            raise ConfigError(f"tol must lie in (0, 1e-4], got {self.tol}")
        if not self.scan_max > 0:
            raise ConfigError(f"scan_max must be positive, got {self.scan_max}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {self.format!r}")
        if not (0 <= self.x_min < self.x_max):
            raise ConfigError(f"need 0 <= x_min < x_max, got {self.x_min}, {self.x_max}")
        if self.n_x < 2:
            raise ConfigError(f"n_x must be >= 2, got {self.n_x}")
        if not self.times or any(not (t > 0 and math.isfinite(t)) for t in self.times):
            raise ConfigError("times must be a nonempty list of positive numbers")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self.problem)
        d.update({k: getattr(self.eval, k) for k in self._EVAL_KEYS})
        d.update(tol=self.tol, scan_max=self.scan_max, format=self.format, out=self.out,
                 x_min=self.x_min, x_max=self.x_max, n_x=self.n_x, times=list(self.times))
        return d


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(data)


def parse_alphas(text: str) -> list[float]:
    try:
        return [float(Fraction(tok.strip())) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse alpha list {text!r}") from None


def _write_rows(rows: list[dict], columns, fmt_kind: str, out: str) -> None:
    if fmt_kind == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) if isinstance(r[c], float) else r[c] for c in columns])
        text = buf.getvalue()
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror}") from None


def _info(msg: str, args) -> None:
    # keep stdout clean when data is streamed there
    stream = sys.stderr if args.effective_out == "-" else sys.stdout
    print(msg, file=stream)


# -- commands -------------------------------------------------------------------


def cmd_xi(cfg: RunConfig, args) -> int:
    p = cfg.problem
    d = p.diffusivities
    print(f"alpha = {fmt(p.alpha)}")
    print(f"gamma_ratio = {fmt(gamma_ratio(p.alpha))}")
    print(f"lambda1 = {fmt(d.lambda1)}  lambda2 = {fmt(d.lambda2)}  lambda = {fmt(d.lambda_ratio)}")
    if p.alpha == 1.0:
        sol = classical_neumann(p, cfg.tol)
        print(f"classical Neumann: mu = {fmt(sol.mu)}  xi_1 = 2 mu = {fmt(sol.xi)}")
        return EXIT_OK
    rep = solve_xi(p, cfg.tol, cfg.scan_max, cfg.eval)
    for i, (r, res) in enumerate(zip(rep.roots, rep.residuals)):
        print(f"root {i}: xi = {fmt(r)}  residual = {res:.3e}")
    print(f"note: {rep.multiplicity_note}")
    return EXIT_OK


def profile_rows(cfg: RunConfig) -> list[dict]:
    p = cfg.problem
    if p.alpha == 1.0:
        sol = classical_neumann(p, cfg.tol)
    else:
        sol = build_solution(p, solve_xi(p, cfg.tol, cfg.scan_max, cfg.eval).xi, cfg.eval)
    xs = np.linspace(cfg.x_min, cfg.x_max, cfg.n_x)
    rows: list[dict] = []
    for t in cfg.times:
        s = sol.front(t)
        liquid = xs[xs < s]
        solid = xs[xs > s]
        for x, u in zip(liquid, np.atleast_1d(sol.u2(liquid, t)) if liquid.size else []):
            rows.append({"x": float(x), "t": float(t), "phase": "liquid", "u": float(u)})
        rows.append({"x": float(s), "t": float(t), "phase": "front", "u": float(p.um)})
        for x, u in zip(solid, np.atleast_1d(sol.u1(solid, t)) if solid.size else []):
            rows.append({"x": float(x), "t": float(t), "phase": "solid", "u": float(u)})
    return rows


def cmd_profile(cfg: RunConfig, args) -> int:
    _write_rows(profile_rows(cfg), PROFILE_COLUMNS, cfg.format, cfg.out)
    return EXIT_OK


def f2_scan(alphas, x_max: float, n: int, eval_cfg: WrightEvalConfig | None = None):
    """Rows of ``(alpha, x, F2)`` and, per alpha, whether the samples strictly increase."""
    if n < 2:
        raise ValueError("n must be >= 2")
    xs = np.linspace(0.0, x_max, n)
    rows = []
    increasing = {}
    for a in alphas:
        if not 0 < a < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {a}")
        vals = np.asarray(f2(xs, a, eval_cfg or WrightEvalConfig()))
        increasing[a] = bool(np.all(np.diff(vals) > 0))
        rows.extend({"alpha": float(a), "x": float(x), "F2": float(v)} for x, v in zip(xs, vals))
    return rows, increasing


def cmd_f2_scan(cfg: RunConfig, args) -> int:
    alphas = args.alphas if args.alphas else sorted(set(SMALL_ORDER_ALPHAS) | set(LARGE_ORDER_ALPHAS))
    rows, increasing = f2_scan(alphas, args.x_max, args.n, cfg.eval)
    _write_rows(rows, F2_COLUMNS, cfg.format, cfg.out)
    for a, inc in increasing.items():
        _info(f"alpha = {fmt(a)}: F2 strictly increasing on [0, {fmt(args.x_max)}]: "
              f"{'yes' if inc else 'no'}", args)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    p = cfg.problem
    if p.alpha == 1.0:
        sol = classical_neumann(p, cfg.tol)
    else:
        sol = build_solution(p, solve_xi(p, cfg.tol, cfg.scan_max, cfg.eval).xi, cfg.eval)
    print(f"alpha = {fmt(p.alpha)}  xi = {fmt(sol.xi)}")
    report = run_verification(sol, include_limit=not args.skip_limit)
    print(report.to_text())
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def sweep_rows(cfg: RunConfig, alphas) -> tuple[float, list[dict]]:
    mu, rows = limit_sweep(cfg.problem, alphas, tol=cfg.tol, scan_max=cfg.scan_max)
    out = []
    for r in rows:
        if r.error is not None:
            out.append({"alpha": r.alpha, "xi_alpha": "ERROR", "xi_gap": "ERROR",
                        "sup_u_gap": "ERROR", "front_gap": "ERROR", "error": r.error})
        else:
            out.append({"alpha": r.alpha, "xi_alpha": r.xi, "xi_gap": r.xi_gap,
                        "sup_u_gap": r.sup_u_gap, "front_gap": r.front_gap})
    out.append({"alpha": 1.0, "xi_alpha": 2 * mu, "xi_gap": 0.0, "sup_u_gap": 0.0, "front_gap": 0.0})
    return mu, out


def cmd_limit_sweep(cfg: RunConfig, args) -> int:
    alphas = args.alphas if args.alphas else list(DEFAULT_SWEEP_ALPHAS)
    mu, rows = sweep_rows(cfg, alphas)
    _write_rows(rows, SWEEP_COLUMNS, cfg.format, cfg.out)
    _info(f"classical mu = {fmt(mu)}  (xi_1 = 2 mu = {fmt(2 * mu)}, last row)", args)
    for r in rows:
        if "error" in r:
            _info(f"alpha = {fmt(r['alpha'])}: {r['error']}", args)
    return EXIT_OK


COMMANDS = {
    "xi": cmd_xi,
    "profile": cmd_profile,
    "f2-scan": cmd_f2_scan,
    "verify": cmd_verify,
    "limit-sweep": cmd_limit_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat JSON configuration file")
    common.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--tol", type=float, help="root bracket width")
    common.add_argument("--scan-max", type=float, help="upper end of the root scan")
    common.add_argument("--alpha", type=float, help="override the Caputo order")

    parser = argparse.ArgumentParser(prog="fracstefan",
                                     description="Generalized Neumann solution of the two-phase "
                                                 "fractional Stefan problem")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("xi", parents=[common], help="solve for the front coefficient")
    sub.add_parser("profile", parents=[common], help="temperature profiles and front positions")
    p = sub.add_parser("f2-scan", parents=[common], help="sample F2 over sets of alpha values")
    p.add_argument("--alphas", type=parse_alphas, help="comma list, fractions allowed (e.g. 1/16,3/8)")
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--n", type=int, default=500)
    p = sub.add_parser("verify", parents=[common], help="residual checks of the closed form")
    p.add_argument("--skip-limit", action="store_true", help="omit the alpha -> 1 sweep")
    p = sub.add_parser("limit-sweep", parents=[common], help="convergence table as alpha -> 1")
    p.add_argument("--alphas", type=parse_alphas)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config)
        overrides = {}
        for key in ("out", "format", "tol", "scan_max"):
            val = getattr(args, key, None)
            if val is not None:
                overrides[key] = val
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        if args.alpha is not None:
            try:
                cfg = dataclasses.replace(cfg, problem=cfg.problem.with_alpha(args.alpha))
            except InvalidProblemError as exc:
                raise ConfigError(str(exc)) from None
        cfg.validate()
        if args.command == "f2-scan" and (args.n < 2 or not args.x_max > 0):
            raise ConfigError("f2-scan needs --n >= 2 and --x-max > 0")
        if getattr(args, "alphas", None) and args.command == "limit-sweep":
            if any(not 0 < a < 1 for a in args.alphas) or sorted(set(args.alphas)) != list(args.alphas):
                raise ConfigError("--alphas must be strictly ascending values in (0, 1)")
        if getattr(args, "alphas", None) and args.command == "f2-scan":
            if any(not 0 < a < 1 for a in args.alphas):
                raise ConfigError("--alphas must lie in (0, 1)")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args.effective_out = cfg.out
    try:
        return COMMANDS[args.command](cfg, args)
    except NoRootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except (OSError, NonConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
