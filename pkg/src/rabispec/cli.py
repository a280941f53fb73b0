"""Command line front end.

    rabispec spectrum  --lambda 0.3 --g-start 0 --g-stop 1 --g-step 0.01 --out spectrum.csv
    rabispec compare   --lambda 0.3 0.5 --out figure1/
    rabispec judd      --lambda 0.5 --g 0.4330127019
    rabispec classify  --lambda 0.3 --g 0.5 --E -0.4434

Exit codes: 0 success, 2 truncation budget exhausted, 64 usage error,
65 input outside the Juddian constraint.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .analytic import enumerate_zhang, nearest_zhang
from .bargmann import constraint_residual, judd_cross_check
from .eigensolve import ConvergenceError, converge_spectrum
from .emit import (
    SPECTRUM_HEADER,
    SUMMARY_HEADER,
    ZHANG_HEADER,
    csv_text,
    figure_svg,
    json_text,
    spectrum_rows,
    write_atomic,
)
from .model import ModelParams
from .recurrence import classify_energy

log = logging.getLogger("rabispec")

EX_OK = 0
EX_BUDGET = 2
EX_USAGE = 64
EX_DATAERR = 65

JUDD_CLI_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class SweepConfig:
    lambda_over_omega: tuple = (0.3,)
    g_start: float = 0.0
    g_stop: float = 1.0
    g_step: float = 0.01
    levels_per_parity: int = 6
    rel_tol: float = 1e-10
    n_cap: int = 4096
    out: str = ""
    workers: int = 1

    def validate(self):
        for name in ("g_start", "g_stop", "g_step", "rel_tol"):
            if not math.isfinite(getattr(self, name)):
                raise UsageError(f"{name} must be finite")
        if self.g_step <= 0:
            raise UsageError(f"g step must be positive, got {self.g_step}")
        if self.g_start > self.g_stop:
            raise UsageError(f"empty g grid: start {self.g_start} > stop {self.g_stop}")
        if self.g_start < 0:
            raise UsageError("g must be nonnegative")
        if self.levels_per_parity < 1:
            raise UsageError("levels per parity must be >= 1")
        if self.rel_tol <= 0:
            raise UsageError("rel_tol must be positive")
        if not self.lambda_over_omega:
            raise UsageError("at least one lambda is required")

    def g_grid(self) -> list[float]:
        count = int(math.floor((self.g_stop - self.g_start) / self.g_step + 1e-9)) + 1
        return [round(self.g_start + i * self.g_step, 12) for i in range(count)]


# config file keys -> SweepConfig fields
_CONFIG_KEYS = {
    "lambda": "lambda_over_omega",
    "g_start": "g_start",
    "g_stop": "g_stop",
    "g_step": "g_step",
    "levels": "levels_per_parity",
    "rel_tol": "rel_tol",
    "n_cap": "n_cap",
    "out": "out",
    "workers": "workers",
}


def read_config_file(path) -> dict:
    """key = value lines; '#' starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[_CONFIG_KEYS[key]] = value
    return values


def _coerce(field_name: str, value):
    try:
        if field_name == "lambda_over_omega":
            if isinstance(value, str):
                value = value.replace(",", " ").split()
            return tuple(float(v) for v in value)
        if field_name in ("levels_per_parity", "n_cap", "workers"):
            return int(value)
        if field_name == "out":
            return str(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {field_name}: {value!r}") from exc


def build_config(args, defaults: SweepConfig) -> SweepConfig:
    """CLI flags override the config file, which overrides built-in defaults."""
    cfg = defaults
    if getattr(args, "config", None):
        file_vals = read_config_file(args.config)
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in file_vals.items()})
    flags = {
        "lambda_over_omega": args.lam,
        "g_start": args.g_start,
        "g_stop": args.g_stop,
        "g_step": args.g_step,
        "levels_per_parity": args.levels,
        "rel_tol": args.rel_tol,
        "n_cap": args.n_cap,
        "out": args.out,
        "workers": args.workers,
    }
    cfg = replace(cfg, **{k: _coerce(k, v) for k, v in flags.items() if v is not None})
    if args.g is not None:
        cfg = replace(cfg, g_start=args.g, g_stop=args.g, g_step=1.0)
    cfg.validate()
    return cfg


def _solve_one(task):
    lam, g, k, rel_tol, n_cap = task
    try:
        spec, trunc = converge_spectrum(ModelParams(1.0, g, lam), k, rel_tol, n_cap=n_cap)
    except ConvergenceError as exc:
        return g, None, str(exc)
    return g, spec, None


def sweep(cfg: SweepConfig, lam: float):
    """Converged spectra along the g grid, in grid order."""
    tasks = [(lam, g, cfg.levels_per_parity, cfg.rel_tol, cfg.n_cap) for g in cfg.g_grid()]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_solve_one, tasks))
    else:
        results = [_solve_one(t) for t in tasks]
    for g, spec, err in results:
        if spec is None:
            raise ConvergenceError(f"no convergence at lambda={lam}, g={g}: {err}", g=g)
    return [(g, spec) for g, spec, _ in results]


def _sidecar(path: Path, command: str, cfg) -> None:
    meta = {
        "command": command,
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": {k: v for k, v in vars(cfg).items()},
    }
    write_atomic(path.with_name(path.name + ".meta.json"), json.dumps(meta, indent=2, default=str) + "\n")


def cmd_spectrum(cfg: SweepConfig) -> int:
    if len(cfg.lambda_over_omega) != 1:
        raise UsageError("spectrum takes a single --lambda")
    lam = cfg.lambda_over_omega[0]
    results = sweep(cfg, lam)
    rows = [row for g, spec in results for row in spectrum_rows(g, spec)]
    out = Path(cfg.out or "spectrum.csv")
    write_atomic(out, csv_text(SPECTRUM_HEADER, rows))
    _sidecar(out, "spectrum", cfg)
    log.info("wrote %d rows to %s", len(rows), out)
    return EX_OK


def summary_distance(spec, params: ModelParams) -> float:
    """Largest distance from any computed true level to its nearest ladder level."""
    return max(nearest_zhang(params, lv.energy)[1] for lv in spec.levels)


def compare_data(cfg: SweepConfig, lam: float) -> dict:
    results = sweep(cfg, lam)
    true_rows, zhang_rows, summary_rows = [], [], []
    true_panel, zhang_panel = [], []
    for g, spec in results:
        params = ModelParams(1.0, g, lam)
        rows = list(spectrum_rows(g, spec))
        true_rows += rows
        true_panel.append([(p, i, e) for _, p, i, e in rows])
        levels = enumerate_zhang(params, float(spec.energies.max()))
        zhang_panel.append(levels)
        zhang_rows += [(g, lv.subspectrum, lv.n, "+" if lv.branch > 0 else "-", lv.energy) for lv in levels]
        summary_rows.append((g, summary_distance(spec, params)))
    return {
        "lam": lam,
        "grid": [g for g, _ in results],
        "true": true_panel,
        "zhang": zhang_panel,
        "true_rows": true_rows,
        "zhang_rows": zhang_rows,
        "summary_rows": summary_rows,
    }


def cmd_compare(cfg: SweepConfig) -> int:
    outdir = Path(cfg.out or "compare")
    columns = [compare_data(cfg, lam) for lam in cfg.lambda_over_omega]
    for col in columns:
        tag = "%g" % col["lam"]
        write_atomic(outdir / f"spectrum_lambda{tag}.csv", csv_text(SPECTRUM_HEADER, col["true_rows"]))
        write_atomic(outdir / f"zhang_lambda{tag}.csv", csv_text(ZHANG_HEADER, col["zhang_rows"]))
        write_atomic(outdir / f"summary_lambda{tag}.csv", csv_text(SUMMARY_HEADER, col["summary_rows"]))
    svg = outdir / "figure1.svg"
    write_atomic(svg, figure_svg(columns))
    _sidecar(svg, "compare", cfg)
    log.info("wrote comparison for lambda in %s to %s", cfg.lambda_over_omega, outdir)
    return EX_OK


def _emit_json(obj, out) -> None:
    text = json_text(obj)
    if out:
        write_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def cmd_judd(lam: float, g: float, out=None) -> int:
    res = constraint_residual(lam, g)
    if not abs(res) < JUDD_CLI_TOL:
        print(f"constraint lambda^2 + 4 g^2 = 1 violated: residual {res:.6e}", file=sys.stderr)
        return EX_DATAERR
    # snap g onto the constraint curve; the reported residual is the input's
    g_on = math.copysign(math.sqrt((1 - lam * lam) / 4), g) if g != 0 else 0.0
    rep = judd_cross_check(lam, g_on)
    _emit_json(
        {
            "lambda": lam,
            "g": g_on,
            "constraint_residual": res,
            "energy": rep.energy,
            "found_in_parity_plus": rep.found_in_parity_plus,
            "found_in_parity_minus": rep.found_in_parity_minus,
            "miller_defect": rep.miller_defect,
            "nearest_zhang_distance": rep.nearest_zhang_distance,
            "ode_residual_max": rep.ode_residual_max,
            "pass": rep.passed,
        },
        out,
    )
    return EX_OK


def cmd_classify(lam: float, g: float, energy: float, tol: float = 1e-6, out=None) -> int:
    cls = classify_energy(ModelParams(1.0, g, lam), energy, tol)
    if cls.diagnostic:
        print(cls.diagnostic, file=sys.stderr)
    _emit_json(
        {
            "class": cls.label,
            "defect": cls.defect,
            "nearest_eigenvalue": cls.nearest_eigenvalue,
            "spectral_by_defect": cls.by_defect,
            "spectral_by_diagonalization": cls.by_spectrum,
        },
        out,
    )
    return EX_OK


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rabispec", description="Quantum Rabi spectrum vs. JC/AJC ladders")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sweep_flags(p, multi_lambda):
        p.add_argument("--lambda", dest="lam", type=_finite, nargs="+" if multi_lambda else None,
                       help="lambda/omega" + (" (one or more)" if multi_lambda else ""))
        p.add_argument("--g", type=_finite, help="single coupling g/omega instead of a grid")
        p.add_argument("--g-start", type=_finite)
        p.add_argument("--g-stop", type=_finite)
        p.add_argument("--g-step", type=_finite)
        p.add_argument("--levels", type=int, help="levels per parity")
        p.add_argument("--rel-tol", type=_finite)
        p.add_argument("--n-cap", type=int, help="largest truncation tried")
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("--config", help="key=value file; flags take precedence")

    sweep_flags(sub.add_parser("spectrum", help="converged QRM levels on a g grid (CSV)"), False)
    sweep_flags(sub.add_parser("compare", help="QRM vs JC/AJC ladders (CSV + SVG)"), True)

    p = sub.add_parser("judd", help="Juddian-point cross check (JSON)")
    p.add_argument("--lambda", dest="lam", type=_finite, required=True)
    p.add_argument("--g", type=_finite, required=True)
    p.add_argument("--out")

    p = sub.add_parser("classify", help="is E an eigenvalue? (JSON)")
    p.add_argument("--lambda", dest="lam", type=_finite, required=True)
    p.add_argument("--g", type=_finite, required=True)
    p.add_argument("--E", dest="energy", type=_finite, required=True)
    p.add_argument("--tol", type=_finite, default=1e-6)
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "spectrum":
            lam = args.lam
            args.lam = None if lam is None else [lam]
            return cmd_spectrum(build_config(args, SweepConfig()))
        if args.command == "compare":
            return cmd_compare(build_config(args, SweepConfig(lambda_over_omega=(0.3, 0.5))))
        if args.g < 0:
            raise UsageError("g must be nonnegative")
        if args.command == "judd":
            return cmd_judd(args.lam, args.g, args.out)
        if args.command == "classify":
            if args.g == 0:
                raise UsageError("classify needs g > 0")
            return cmd_classify(args.lam, args.g, args.energy, args.tol, args.out)
    except UsageError as exc:
        print(f"rabispec: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except ConvergenceError as exc:
        print(f"rabispec: {exc}", file=sys.stderr)
        return EX_BUDGET
    return EX_USAGE


if __name__ == "__main__":
    sys.exit(main())
