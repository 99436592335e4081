"""Command line front end.

Subcommands::

    verify       random weights vs. tight/conjectured constants
    sweep        the omega(p) family on a p-grid, kinds I-V
    uncertainty  qubit bound curves and their crossings
    gkls         relaxation-rate audit of random GKLS models
    optimize     full report for one weight

Exit codes: 0 clean, 1 usage or I/O error, 2 a counterexample was persisted.
Worker processes: ``OMEGA_BW_THREADS`` (default: CPU count). Output rows are
ordered by task index, so results do not depend on the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from . import __version__
from .bounds import BoundKind, loose_constant, ratio, tight_constant
from .ensembles import WEIGHT_ENSEMBLES, SeededStream, omega_sweep, random_gkls, random_weight, sweep_grid
from .linalg import Weight
from .optimize import DEFAULT_MAX_ITERS, DEFAULT_RESTARTS, DEFAULT_TOL, RatioResult, global_estimate
from .quantum import (
    DensityMatrix,
    GKLSModel,
    loose_uncertainty_bound,
    new_uncertainty_bound,
    qubit_mixture,
    rate_constraint_check,
    rate_formula_residual,
    rate_spectrum,
    robertson_bound,
    sum_rule_check,
    variance,
)

log = logging.getLogger("omegabw")

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_ERROR, EXIT_COUNTEREXAMPLE = 0, 1, 2

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

VERIFY_COLUMNS = ["trial", "kind", "n", "estimate", "constant", "gap", "converged"]
SWEEP_COLUMNS = ["p", "kind", "numerical_estimate", "tight_or_conjectured_constant", "loose_constant"]
UNCERTAINTY_COLUMNS = ["p", "robertson", "new", "loose", "variance_product"]
GKLS_COLUMNS = ["trial", "max_rate", "bound", "rate_formula_residual", "sum_rule_gap", "satisfied"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    n: list[int]
    kinds: list[BoundKind]
    trials: int
    restarts: int
    seed: int
    tol: float
    output_path: Path | None
    format: str = "csv"
    weight_path: Path | None = None
    random: bool = False
    jumps: int = 2
    grid: int = 200
    cex_dir: Path | None = None
    max_iters: int = DEFAULT_MAX_ITERS
    constant_scale: float = 1.0
    fixture: str | None = None
    ensemble: str = "wishart"

    def __post_init__(self):
        for name in ("trials", "restarts", "grid", "jumps", "max_iters"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if self.seed < 0:
            raise UsageError("--seed must be nonnegative")
        if any(n < 1 for n in self.n):
            raise UsageError("--n must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.ensemble not in WEIGHT_ENSEMBLES:
            raise UsageError(f"--ensemble must be one of {', '.join(WEIGHT_ENSEMBLES)}")

    def counterexample_dir(self) -> Path:
        if self.cex_dir is not None:
            return self.cex_dir
        base = self.output_path.parent if self.output_path is not None else Path.cwd()
        return base / "counterexamples"


# helpers ---------------------------------------------------------------------


def fmt(x) -> str:
    """Round-trip decimal formatting (17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".17g")
    return str(x)


def task_seed(master: int, *keys: int) -> int:
    seq = np.random.SeedSequence([master, *keys])
    return int(seq.generate_state(1, np.uint64)[0] >> np.uint64(1))


def worker_count() -> int:
    raw = os.environ.get("OMEGA_BW_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError(f"OMEGA_BW_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise UsageError("OMEGA_BW_THREADS must be >= 1")
    return value


def run_tasks(fn, tasks: list, workers: int | None = None) -> list:
    """Apply ``fn`` to every task; results come back in task order."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def matrix_entries(M: np.ndarray) -> list[list[float]]:
    """Row-major list of [re, im] pairs."""
    return [[float(z.real), float(z.imag)] for z in np.asarray(M).reshape(-1)]


def matrix_from_entries(entries, n: int) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (n * n, 2):
        raise ValueError(f"expected {n * n} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)


def load_weight(path: Path) -> Weight:
    """Read ``{"dim": n, "entries": [[re, im], ...]}`` or ``{"diag": [...]}``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read weight file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"weight file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("weight file must hold a JSON object")
    try:
        if "diag" in data:
            return Weight.diag(data["diag"])
        if "dim" in data and "entries" in data:
            n = int(data["dim"])
            return Weight(matrix_from_entries(data["entries"], n))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid weight in {path}: {exc}") from exc
    raise UsageError('weight file needs either "diag" or "dim" and "entries"')


def write_table(cfg: RunConfig, columns: list[str], rows: list[list], extra: dict | None = None) -> None:
    if cfg.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
        text = buf.getvalue()
    else:
        body = {"schema_version": SCHEMA_VERSION, "subcommand": cfg.subcommand, "columns": columns}
        body["rows"] = [dict(zip(columns, (_jsonable(v) for v in row))) for row in rows]
        if extra:
            body.update(extra)
        text = json.dumps(body, indent=2) + "\n"
    emit(cfg.output_path, text)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def emit(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def persist_record(directory: Path, stem: str, record: dict) -> Path:
    """Write ``record`` as JSON; an existing file is never overwritten."""
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{stem}.json"
        k = 1
        while path.exists():
            path = directory / f"{stem}_{k}.json"
            k += 1
        path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot persist counterexample in {directory}: {exc}") from exc
    log.warning("counterexample candidate written to %s", path)
    return path


def counterexample_record(w: Weight, res: RatioResult, seed: int, trial: int) -> dict:
    """Self-contained record: re-evaluating the ratio from the stored matrices reproduces it."""
    achieved = ratio(res.kind, w, res.A, res.B)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": res.kind.name,
        "dim": w.dim,
        "weight": matrix_entries(w.matrix),
        "A": matrix_entries(res.A),
        "B": matrix_entries(res.B),
        "achieved": achieved,
        "constant": res.constant,
        "excess": achieved - res.constant,
        "provenance": {"master_seed": seed, "restart_index": res.restart_index, "trial_index": trial},
    }


def record_ratio(record: dict) -> float:
    """Recompute the ratio stored in a counterexample record."""
    n = int(record["dim"])
    w = Weight(matrix_from_entries(record["weight"], n))
    A = matrix_from_entries(record["A"], n)
    B = matrix_from_entries(record["B"], n)
    return ratio(BoundKind[record["kind"]], w, A, B)


# verify ----------------------------------------------------------------------


def _verify_task(task):
    trial, n, kind, cfg = task
    w = WEIGHT_ENSEMBLES[cfg.ensemble](n, SeededStream(cfg.seed, trial).child(n))
    constant = tight_constant(kind, w)[0] * cfg.constant_scale
    res = global_estimate(
        kind,
        w,
        cfg.restarts,
        task_seed(cfg.seed, trial, n, list(BoundKind).index(kind)),
        max_iters=cfg.max_iters,
        tol=cfg.tol,
        constant=constant,
    )
    return trial, n, kind, w, res


def cmd_verify(cfg: RunConfig) -> int:
    tasks = [(t, n, k, cfg) for t in range(cfg.trials) for n in cfg.n for k in cfg.kinds]
    results = run_tasks(_verify_task, tasks)
    rows, found = [], False
    for trial, n, kind, w, res in results:
        rows.append([trial, kind.name, n, res.value, res.constant, abs(res.value - res.constant), res.converged])
        if res.candidate:
            found = True
            stem = f"cex_{kind.name}_seed{cfg.seed}_trial{trial}_n{n}"
            persist_record(cfg.counterexample_dir(), stem, counterexample_record(w, res, cfg.seed, trial))
    write_table(cfg, VERIFY_COLUMNS, rows)
    return EXIT_COUNTEREXAMPLE if found else EXIT_OK


# sweep -----------------------------------------------------------------------


def _sweep_task(task):
    index, p, kind, cfg = task
    w = omega_sweep(p)
    res = global_estimate(
        kind,
        w,
        cfg.restarts,
        task_seed(cfg.seed, index, list(BoundKind).index(kind)),
        max_iters=cfg.max_iters,
        tol=cfg.tol,
    )
    return index, p, kind, w, res


def cmd_sweep(cfg: RunConfig) -> int:
    kinds = [k for k in cfg.kinds if k is not BoundKind.VI]
    if not kinds:
        raise UsageError("sweep needs at least one of the kinds I-V")
    grid = sweep_grid(cfg.grid)
    tasks = [(i, float(p), k, cfg) for i, p in enumerate(grid) for k in kinds]
    rows, found = [], False
    for index, p, kind, w, res in run_tasks(_sweep_task, tasks):
        rows.append([p, kind.name, res.value, res.constant, loose_constant(kind, w)])
        if res.candidate:
            found = True
            stem = f"cex_{kind.name}_seed{cfg.seed}_trial{index}_sweep"
            persist_record(cfg.counterexample_dir(), stem, counterexample_record(w, res, cfg.seed, index))
    write_table(cfg, SWEEP_COLUMNS, rows)
    return EXIT_COUNTEREXAMPLE if found else EXIT_OK


# uncertainty -----------------------------------------------------------------


def qubit_bounds(p: float) -> tuple[float, float, float, float]:
    """Robertson, new, loose bounds and the variance product for (sigma_x, sigma_y, rho(p))."""
    rho = qubit_mixture(p)
    return (
        robertson_bound(SIGMA_X, SIGMA_Y, rho),
        new_uncertainty_bound(SIGMA_X, SIGMA_Y, rho),
        loose_uncertainty_bound(SIGMA_X, SIGMA_Y, rho),
        variance(SIGMA_X, rho) * variance(SIGMA_Y, rho),
    )


def qubit_crossings(xtol: float = 1e-12) -> dict[str, float]:
    """p where the new and the loose bound overtake the Robertson bound."""

    def diff(which):
        return lambda p: qubit_bounds(p)[which] - qubit_bounds(p)[0]

    return {
        "robertson_new": bisect(diff(1), 1e-6, 1.0, xtol=xtol),
        "robertson_loose": bisect(diff(2), 1e-6, 1.0, xtol=xtol),
    }


def cmd_uncertainty(cfg: RunConfig) -> int:
    rows = [[float(p), *qubit_bounds(float(p))] for p in sweep_grid(cfg.grid)]
    crossings = qubit_crossings()
    write_table(cfg, UNCERTAINTY_COLUMNS, rows, extra={"crossings": crossings})
    if cfg.format == "csv":
        text = "crossing,p\n" + "".join(f"{k},{fmt(v)}\n" for k, v in crossings.items())
        if cfg.output_path is None:
            sys.stdout.write(text)
        else:
            emit(cfg.output_path.with_suffix(".crossings.csv"), text)
    return EXIT_OK


# gkls ------------------------------------------------------------------------


def gkls_fixture(name: str) -> GKLSModel:
    if name == "dephasing":
        return GKLSModel.dephasing(1.0)
    if name == "unitary":
        return GKLSModel(np.diag([1.0, -1.0]), [])
    raise UsageError(f"unknown fixture {name!r} (dephasing, unitary)")


def audit_model(m: GKLSModel) -> tuple[list | None, str | None]:
    """One audit row (without the trial index), or a skip reason."""
    try:
        s = rate_spectrum(m)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return None, str(exc)
    lhs, rhs = sum_rule_check(m, s)
    c = rate_constraint_check(m, s)
    return [c.max_rate, c.bound, rate_formula_residual(m, s), abs(lhs - rhs), c.satisfied], None


def _gkls_task(task):
    trial, n, cfg = task
    m = random_gkls(n, cfg.jumps, SeededStream(cfg.seed, trial))
    row, reason = audit_model(m)
    return trial, m, row, reason


def _model_record(m: GKLSModel, row: list, seed: int, trial: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": m.dim,
        "H": matrix_entries(m.H),
        "jumps": [{"L": matrix_entries(L), "rate": g} for L, g in m.jumps],
        "max_rate": row[0],
        "bound": row[1],
        "excess": row[0] - row[1],
        "provenance": {"master_seed": seed, "trial_index": trial},
    }


def cmd_gkls(cfg: RunConfig) -> int:
    if cfg.fixture is not None:
        results = [(0, gkls_fixture(cfg.fixture), *audit_model(gkls_fixture(cfg.fixture)))]
    else:
        if any(n < 2 for n in cfg.n):
            raise UsageError("gkls needs n >= 2")
        tasks = [(t, cfg.n[t % len(cfg.n)], cfg) for t in range(cfg.trials)]
        results = run_tasks(_gkls_task, tasks)
    rows, found = [], False
    for trial, m, row, reason in results:
        if row is None:
            log.warning("trial %d skipped: %s", trial, reason)
            continue
        rows.append([trial, *row])
        if not row[-1]:
            found = True
            persist_record(cfg.counterexample_dir(), f"cex_gkls_seed{cfg.seed}_trial{trial}", _model_record(m, row, cfg.seed, trial))
    write_table(cfg, GKLS_COLUMNS, rows)
    return EXIT_COUNTEREXAMPLE if found else EXIT_OK


# optimize --------------------------------------------------------------------


def optimize_report(w: Weight, cfg: RunConfig) -> dict:
    results = []
    for kind in cfg.kinds:
        res = global_estimate(
            kind, w, cfg.restarts, task_seed(cfg.seed, list(BoundKind).index(kind)), max_iters=cfg.max_iters, tol=cfg.tol
        )
        results.append(
            {
                "kind": kind.name,
                "estimate": res.value,
                "constant": res.constant,
                "status": kind.status,
                "counterexample_candidate": res.candidate,
                "converged": res.converged,
                "iterations": res.iterations,
                "restart_index": res.restart_index,
                "A": matrix_entries(res.A),
                "B": matrix_entries(res.B),
                "trace": [float(v) for v in res.trace],
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "subcommand": "optimize",
        "dim": w.dim,
        "weight": matrix_entries(w.matrix),
        "eigenvalues": [float(v) for v in w.eigenvalues],
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "results": results,
    }


def cmd_optimize(cfg: RunConfig) -> int:
    if (cfg.weight_path is None) == (not cfg.random):
        raise UsageError("optimize needs exactly one of --weight PATH or --random")
    if cfg.weight_path is not None:
        w = load_weight(cfg.weight_path)
    else:
        if len(cfg.n) != 1:
            raise UsageError("--random needs a single --n")
        w = random_weight(cfg.n[0], SeededStream(cfg.seed, 0))
    if w.dim < 2:
        raise UsageError("optimize needs dim >= 2")
    report = optimize_report(w, cfg)
    emit(cfg.output_path, json.dumps(report, indent=2) + "\n")
    found = any(r["counterexample_candidate"] for r in report["results"])
    return EXIT_COUNTEREXAMPLE if found else EXIT_OK


# argument parsing --------------------------------------------------------------


COMMANDS = {
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "uncertainty": cmd_uncertainty,
    "gkls": cmd_gkls,
    "optimize": cmd_optimize,
}

DEFAULT_N = {"verify": "2-8", "sweep": "5", "uncertainty": "2", "gkls": "2,3", "optimize": "3"}
DEFAULT_TRIALS = {"verify": 10, "gkls": 500}


def parse_dims(text: str) -> list[int]:
    """'3', '2,3,5' or '2-8'."""
    dims = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                dims.extend(range(lo, hi + 1))
            else:
                dims.append(int(part))
    except ValueError as exc:
        raise UsageError(f"cannot parse --n {text!r}") from exc
    if not dims:
        raise UsageError("--n is empty")
    return dims


def parse_kinds(text: str) -> list[BoundKind]:
    try:
        kinds = [BoundKind.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not kinds:
        raise UsageError("--kinds is empty")
    return kinds


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="dimension(s): 3, 2,3 or 2-8")
    common.add_argument("--kinds", default="i,ii,iii,iv,v,vi", help="comma list of i..vi")
    common.add_argument("--trials", type=int)
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--weight", type=Path, help="weight JSON file (optimize)")
    common.add_argument("--random", action="store_true", help="random weight (optimize)")
    common.add_argument("--jumps", type=int, default=2, help="jump operators per GKLS model")
    common.add_argument("--grid", type=int, default=200, help="p-grid points")
    common.add_argument("--fixture", help="gkls fixture model: dephasing or unitary")
    common.add_argument("--ensemble", default="wishart", help="random weight ensemble: " + ", ".join(WEIGHT_ENSEMBLES))
    common.add_argument("--cex-dir", type=Path, help="counterexample directory")
    common.add_argument("-v", "--verbose", action="store_true")
    # test hook: scales the reference constant so the counterexample path can be exercised
    common.add_argument("--constant-scale", type=float, default=1.0, help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="omegabw", description="Weighted commutator-norm bounds: numerics and audits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__doc__ or name)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    name = args.subcommand
    return RunConfig(
        subcommand=name,
        n=parse_dims(args.n or DEFAULT_N[name]),
        kinds=parse_kinds(args.kinds),
        trials=args.trials if args.trials is not None else DEFAULT_TRIALS.get(name, 1),
        restarts=args.restarts,
        seed=args.seed,
        tol=args.tol,
        output_path=args.out,
        format=args.format,
        weight_path=args.weight,
        random=args.random,
        jumps=args.jumps,
        grid=args.grid,
        cex_dir=args.cex_dir,
        max_iters=args.max_iters,
        constant_scale=args.constant_scale,
        fixture=args.fixture,
        ensemble=args.ensemble,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"omegabw: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
