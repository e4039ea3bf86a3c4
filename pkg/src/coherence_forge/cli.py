"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 solver numerical failure, 3 infeasible.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .coherence import bound_report, f_lower_bound, l1_coherence, robustness_of_coherence
from .discrimination import DiscriminationGame, evaluate_game
from .linalg import ValidationError, as_density_matrix
from .randgen import MEASURE_MIXED, SeededSource, random_density_matrix
from .robustness import bound_chain_purity, estimate_from_data, robustness_of_asymmetry, witness_from_data
from .sdp import SolverOptions, Status
from .symmetry import CyclicRep, parse_rep

log = logging.getLogger("coherence_forge")

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 1, 2, 3
SCATTER_COLUMNS = ("seed_index", "d", "c_l1", "c_r", "lower_l1", "upper_l1", "f_bound", "purity_chain_1")
THREADS_ENV = "COHERENCE_FORGE_THREADS"


def exit_code(status: Status) -> int:
    return {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_INFEASIBLE}.get(status, EXIT_NUMERICAL)


@dataclass
class JobSpec:
    """One CLI invocation, as parsed from flags or from a job file."""

    command: str
    state: str | None = None
    rep: object = None
    priors: object = None
    observables: str | None = None
    values: object = None
    d: int | None = None
    n: int | None = None
    rank: int | None = None
    seed: int = 0
    options: SolverOptions = field(default_factory=SolverOptions)
    verify_sdp: bool = False
    dual_form: str = "x"
    out: str | None = None

    @classmethod
    def from_json(cls, obj: dict, base: Path = Path(".")) -> "JobSpec":
        if not isinstance(obj, dict) or "command" not in obj:
            raise ValidationError("job file must be an object with a 'command' field")
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValidationError(f"unknown job fields: {sorted(unknown)}")
        kw = dict(obj)
        kw["options"] = SolverOptions(**kw.get("options", {}))
        for key in ("state", "observables"):
            if kw.get(key) is not None:
                kw[key] = str(base / kw[key])
        return cls(**kw)


# ---------------------------------------------------------------------------
# input helpers


def _load_values(spec) -> np.ndarray:
    if isinstance(spec, (list, tuple)):
        data = spec
    elif isinstance(spec, str) and Path(spec).exists():
        data = io.load_json(spec)
    else:
        try:
            data = json.loads(spec)
        except (TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"values must be a JSON array or a file containing one: {spec!r}") from exc
    if isinstance(data, dict) and "values" in data:
        data = data["values"]
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 1:
        raise ValidationError("values must be a flat list of numbers")
    return arr


def _load_rep(spec, d: int | None = None):
    if spec is None:
        if d is None:
            raise ValidationError("--rep is required")
        return CyclicRep(d)
    if isinstance(spec, str) and Path(spec).exists():
        spec = io.load_json(spec)
    return parse_rep(spec)


def _load_priors(spec, order: int) -> np.ndarray:
    if spec is None or spec == "uniform":
        return np.full(order, 1.0 / order)
    return _load_values(spec)


def _need(job: JobSpec, name: str):
    val = getattr(job, name)
    if val is None:
        raise ValidationError(f"--{name.replace('_', '-')} is required for '{job.command}'")
    return val


def _emit(job: JobSpec, record: dict) -> None:
    text = json.dumps(io.to_jsonable(record), indent=2, allow_nan=False)
    if job.out:
        Path(job.out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_roa(job: JobSpec) -> int:
    rho = as_density_matrix(io.load_matrix(_need(job, "state")))
    rep = _load_rep(job.rep, rho.shape[0])
    cert = robustness_of_asymmetry(rep, rho, job.options, job.dual_form)
    _emit(job, cert.to_json())
    return exit_code(cert.status)


def cmd_roc(job: JobSpec) -> int:
    rho = as_density_matrix(io.load_matrix(_need(job, "state")))
    cert = robustness_of_coherence(rho, job.options, verify_sdp=job.verify_sdp, dual_form=job.dual_form)
    _emit(job, cert.to_json())
    return exit_code(cert.status)


def cmd_bounds(job: JobSpec) -> int:
    rho = as_density_matrix(io.load_matrix(_need(job, "state")))
    report = bound_report(rho)
    record = report.to_json()
    if job.verify_sdp:
        cert = robustness_of_asymmetry(CyclicRep(rho.shape[0]), rho, job.options)
        record["sdp_value"] = cert.value
        record["sdp_status"] = cert.status.value
        _emit(job, record)
        return exit_code(cert.status)
    _emit(job, record)
    return EXIT_OK


def _data_inputs(job: JobSpec):
    obs = io.load_matrix_list(_need(job, "observables"))
    vals = _load_values(_need(job, "values"))
    rep = _load_rep(job.rep, obs[0].shape[0])
    return obs, vals, rep


def cmd_witness_from_data(job: JobSpec) -> int:
    obs, vals, rep = _data_inputs(job)
    est = witness_from_data(obs, vals, rep, job.options)
    _emit(job, est.to_json())
    return exit_code(est.status)


def cmd_estimate_from_data(job: JobSpec) -> int:
    obs, vals, rep = _data_inputs(job)
    est = estimate_from_data(obs, vals, rep, job.options)
    _emit(job, est.to_json())
    return exit_code(est.status)


def cmd_discriminate(job: JobSpec) -> int:
    probe = as_density_matrix(io.load_matrix(_need(job, "state")))
    rep = _load_rep(job.rep, probe.shape[0])
    game = DiscriminationGame(rep, _load_priors(job.priors, rep.order), probe)
    rec = evaluate_game(game, job.options)
    _emit(job, rec.to_json())
    return EXIT_OK


def scatter_row(seed: int, index: int, d: int, rank: int | None, options: SolverOptions) -> tuple:
    """One Fig.-1-style data row for sample ``index`` of the stream ``seed``."""
    rho = random_density_matrix(d, rank, SeededSource(seed).spawn(index))
    c = l1_coherence(rho)
    cert = robustness_of_coherence(rho, options)
    if cert.status is not Status.OPTIMAL:
        raise RuntimeError(f"sample {index}: solver status {cert.status.value}")
    chain = bound_chain_purity(CyclicRep(d), rho)
    return (index, d, c, cert.value, c / (d - 1), c, f_lower_bound(c, d), chain.by_operator_norm)


def _worker_count(n: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    avail = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    workers = min(avail, int(cap)) if cap else avail
    return max(1, min(workers, n))


def _fmt(v) -> str:
    return repr(int(v)) if isinstance(v, (int, np.integer)) else format(float(v), ".17g")


def scatter_rows(d: int, n: int, seed: int, rank: int | None = None, options: SolverOptions | None = None, workers: int | None = None) -> list[tuple]:
    options = options or SolverOptions()
    workers = workers or _worker_count(n)
    args = [(seed, i, d, rank, options) for i in range(n)]
    if workers == 1:
        return [scatter_row(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order, so rows stay sorted by seed_index
        return list(pool.map(scatter_row, *zip(*args), chunksize=max(1, n // (4 * workers))))


def write_scatter_csv(stream, rows, d: int, n: int, seed: int, rank: int | None) -> None:
    stream.write(f"# seed={seed}\n# d={d} n={n} rank={rank if rank else d}\n# measure={MEASURE_MIXED}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SCATTER_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def cmd_scatter(job: JobSpec) -> int:
    d, n = int(_need(job, "d")), int(_need(job, "n"))
    if d < 2 or n < 1:
        raise ValidationError("scatter needs d >= 2 and n >= 1")
    rows = scatter_rows(d, n, job.seed, job.rank, job.options)
    if job.out:
        with open(job.out, "w", newline="") as f:
            write_scatter_csv(f, rows, d, n, job.seed, job.rank)
    else:
        write_scatter_csv(sys.stdout, rows, d, n, job.seed, job.rank)
    return EXIT_OK


COMMANDS = {
    "roa": cmd_roa,
    "roc": cmd_roc,
    "bounds": cmd_bounds,
    "witness-from-data": cmd_witness_from_data,
    "estimate-from-data": cmd_estimate_from_data,
    "discriminate": cmd_discriminate,
    "scatter": cmd_scatter,
}


def run_job(job: JobSpec) -> int:
    if job.command not in COMMANDS:
        raise ValidationError(f"unknown command {job.command!r}")
    return COMMANDS[job.command](job)


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share exit code 1 with every other input problem
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"error: {message}\n")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gap-tol", type=float, default=1e-8)
    p.add_argument("--feas-tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coherence-forge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in [("roa", "robustness of asymmetry"), ("roc", "robustness of coherence"), ("bounds", "closed-form coherence bounds")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--state", required=True, help="matrix JSON file")
        if name == "roa":
            p.add_argument("--rep", help="'cyclic:d', 'trivial:d' or a JSON file (default cyclic)")
        if name != "bounds":
            p.add_argument("--dual-form", choices=["x", "witness"], default="x")
        p.add_argument("--verify-sdp", action="store_true")
        _add_solver_flags(p)

    data_help = {
        "witness-from-data": "best witness lower bound from measured expectation values",
        "estimate-from-data": "least robustness consistent with measured expectation values",
    }
    for name, text in data_help.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--rep")
        p.add_argument("--observables", required=True, help="JSON list of matrices")
        p.add_argument("--values", required=True, help="JSON array or file with one")
        _add_solver_flags(p)

    p = sub.add_parser("discriminate", help="channel-discrimination game")
    p.add_argument("--rep")
    p.add_argument("--state", "--probe", dest="state", required=True, help="probe matrix JSON file")
    p.add_argument("--priors", default="uniform", help="'uniform', a JSON array or a file")
    _add_solver_flags(p)

    p = sub.add_parser("scatter", help="CSV of l1 coherence against robustness for random states")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)

    p = sub.add_parser("job", help="run a JSON job file")
    p.add_argument("path")
    return parser


def job_from_args(args: argparse.Namespace) -> JobSpec:
    if args.command == "job":
        path = Path(args.path)
        return JobSpec.from_json(io.load_json(path), base=path.parent)
    opts = SolverOptions(gap_tol=args.gap_tol, feas_tol=args.feas_tol, max_iters=args.max_iters)
    kw = {k: v for k, v in vars(args).items() if k in JobSpec.__dataclass_fields__ and k not in ("command",)}
    return JobSpec(command=args.command, options=opts, **kw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        job = job_from_args(args)
        return run_job(job)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
