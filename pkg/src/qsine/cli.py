"""Command-line experiment runner.

Each experiment writes ``<out>/<experiment>.csv`` plus ``<out>/manifest.json``;
gate-count experiments also write ``<out>/polylog.csv``. Output is a pure
function of the arguments, so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from . import classical as cl
from . import io as qio
from .gateset import count_gates, transpile
from .polyenc import uniform_partition, write_fit_report
from .reflection import build_forward_shift, build_reflection_unitary
from .solver import (
    build_diagonal,
    build_solver_circuit,
    quantum_covariance_row,
    quantum_solve,
)

EXPERIMENTS = (
    "poisson1d",
    "poisson1d-inhom",
    "fractional1d",
    "poisson2d",
    "fractional2d",
    "gatecount-uf",
    "gatecount-ur",
    "gatecount-solver",
)

COLUMNS = {
    "poisson1d": ("N", "p", "shift", "l2_error_quantum", "l2_error_classical",
                  "success_probability", "num_qubits"),
    "fractional1d": ("N", "beta", "p", "shift", "rel_l2_classical", "rel_l2_quantum",
                     "fit_error", "amplitude_ratio"),
    "poisson2d": ("N", "p", "k_split", "shift", "l2_error_quantum", "l2_error_classical",
                  "success_probability", "num_qubits"),
    "fractional2d": ("N", "p", "k_split", "shift", "rel_l2_quantum", "rel_l2_exact",
                     "fit_error", "amplitude_ratio"),
    "gatecount": ("shift", "p", "n", "n_qubits", "n_ancilla", "cnot", "u3", "total"),
}
COLUMNS["poisson1d-inhom"] = COLUMNS["poisson1d"]
for _name in ("gatecount-uf", "gatecount-ur", "gatecount-solver"):
    COLUMNS[_name] = COLUMNS["gatecount"]

POLYLOG_COLUMNS = ("series", "exponent", "bound", "bounded")
PLOT_COLUMNS = ("series", "x", "y")
POLYLOG_BOUND = 4.0
MAX_N_1D = 1024
MAX_N_2D = 64

DEFAULT_N = {
    "poisson1d": [16, 32, 64, 128, 256, 512, 1024],
    "poisson1d-inhom": [16, 32, 64, 128, 256, 512, 1024],
    "fractional1d": [16, 32, 64, 128, 256],
    "poisson2d": [8, 16, 32, 64],
    "fractional2d": [16, 32],
    "gatecount-uf": list(range(2, 11)),
    "gatecount-ur": list(range(3, 11)),
    "gatecount-solver": [16, 32, 64, 128, 256],
}
DEFAULT_P = {
    "poisson1d": [3, 4],
    "poisson1d-inhom": [3, 4],
    "fractional1d": [3, 4],
    "poisson2d": [4],
    "fractional2d": [3, 4],
    "gatecount-solver": [3, 4],
}

EPILOG = """\
experiments and CSV columns (header row, comma-separated, '.' decimal):
  poisson1d, poisson1d-inhom
      N,p,shift,l2_error_quantum,l2_error_classical,success_probability,num_qubits
      --n: physical grid sizes (default 16..1024)
  fractional1d
      N,beta,p,shift,rel_l2_classical,rel_l2_quantum,fit_error,amplitude_ratio
      central covariance row vs the Matern closed form; --beta list,
      --kappa (40), --tau (4.279e-5). --samples K also writes
      fractional1d_samples.csv: N,beta,sample,mean_sq_second_difference
  poisson2d
      N,p,k_split,shift,l2_error_quantum,l2_error_classical,success_probability,num_qubits
      errors against a 512^2 classical reference; --n up to 64
  fractional2d
      N,p,k_split,shift,rel_l2_quantum,rel_l2_exact,fit_error,amplitude_ratio
      --kappa (10/sqrt2), --beta (1), --tau (0.01995)
  gatecount-uf, gatecount-ur, gatecount-solver
      shift,p,n,n_qubits,n_ancilla,cnot,u3,total
      --n: data qubits m (uf), grid qubits n (ur), physical grid sizes (solver;
      the n column then holds log2 of the extended grid). Also writes
      polylog.csv: series,exponent,bound,bounded with the log-log slope of
      total vs n per series.

plotdata CSV [--out FILE]
      reshape any experiment CSV into long form: series,x,y

exit status: 0 ok, 2 invalid arguments, 3 a polylog bound failed under
--strict-polylog. QSINE_THREADS sets the worker pool size (default 1).
"""


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    n: list[int]
    p: list[int]
    shift: list[str]
    seed: int = 0
    out: Path = Path("out")
    partition: str = "geometric"
    k_split: int | None = None
    beta: list[float] | None = None
    kappa: float | None = None
    tau: float | None = None
    samples: int = 0
    strict_polylog: bool = False
    no_limits: bool = False

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {self.experiment!r}")
        if not self.n:
            raise UsageError("--n needs at least one value")
        gate_sizes = self.experiment in ("gatecount-uf", "gatecount-ur")
        for v in self.n:
            if gate_sizes:
                low = 2 if self.experiment == "gatecount-uf" else 3
                if v < low:
                    raise UsageError(f"--n values must be >= {low}, got {v}")
            elif v < 4 or v & (v - 1):
                raise UsageError(f"grid sizes must be powers of two >= 4, got {v}")
        for p in self.p:
            if not 1 <= p <= 6:
                raise UsageError(f"--p must lie in 1..6, got {p}")
        for s in self.shift:
            if s not in ("mcx", "ripple"):
                raise UsageError(f"--shift must be mcx or ripple, got {s!r}")
        if self.samples < 0:
            raise UsageError("--samples must be >= 0")
        if self.k_split is not None and self.k_split < 2:
            raise UsageError("--k-split must be >= 2")
        self._partition_fn()
        if not self.no_limits and not gate_sizes:
            cap = MAX_N_2D if self.experiment in ("poisson2d", "fractional2d") else MAX_N_1D
            if max(self.n) > cap:
                raise UsageError(f"grid size {max(self.n)} above the default limit {cap}; "
                                 "pass --no-limits to override")

    def _partition_fn(self) -> Callable[[int], list | None]:
        spec = self.partition
        if spec == "geometric":
            return lambda M: None
        if spec.startswith("uniform:"):
            try:
                pieces = int(spec.split(":", 1)[1])
            except ValueError:
                raise UsageError(f"bad partition {spec!r}") from None
            if pieces < 1:
                raise UsageError("uniform partition needs at least one piece")
            return lambda M: uniform_partition(M, pieces)
        raise UsageError(f"partition must be 'geometric' or 'uniform:K', got {spec!r}")

    def partition_for(self, M: int):
        return self._partition_fn()(M)


def pool_size() -> int:
    raw = os.environ.get("QSINE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"QSINE_THREADS must be an integer, got {raw!r}") from None


def _map(fn, items: Sequence):
    workers = pool_size()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


# Solve experiments -----------------------------------------------------------

def _run_poisson1d(cfg: ExperimentConfig, inhom: bool):
    def point(args):
        M, p, shift = args
        x = cl.grid_points(M)
        if inhom:
            lifted = cl.poisson_1d_inhom_problem(M)
            spec, exact = lifted.spec, cl.exact_poisson_1d_inhom(x)
            finish = lifted.reconstruct
        else:
            spec, exact = cl.poisson_1d_spec(M), cl.exact_poisson_1d(x)
            finish = lambda u: u  # noqa: E731
        res = quantum_solve(spec, p=p, partition=cfg.partition_for(M), shift_impl=shift)
        u_c = finish(cl.solve_classical(spec).u)
        u_q = finish(res.u)
        row = {
            "N": M, "p": p, "shift": shift,
            "l2_error_quantum": cl.l2_error(u_q, exact, spec.h),
            "l2_error_classical": cl.l2_error(u_c, exact, spec.h),
            "success_probability": res.success_probability,
            "num_qubits": res.circuit.num_qubits,
        }
        return row, res, u_q

    points = [(M, p, s) for M in cfg.n for p in cfg.p for s in cfg.shift]
    results = _map(point, points)
    rows, extra = [], {"scale_chain": {}, "fit_reports": []}
    for (M, p, s), (row, res, u_q) in zip(points, results):
        rows.append(row)
        tag = f"N{M}_p{p}_{s}"
        extra["scale_chain"][tag] = res.scale_chain
        write_fit_report(cfg.out / f"fit_{tag}.csv", res.diag.fit)
        extra["fit_reports"].append(f"fit_{tag}.csv")
        qio.write_grid_csv(cfg.out / f"u_{tag}.csv", u_q)
        qio.write_binary(cfg.out / f"u_{tag}.bin", u_q)
    return rows, extra


def _amplitude_ratio(row, ref) -> float:
    return float(np.vdot(ref, row).real / np.vdot(ref, ref).real)


def _mean_sq_second_difference(u: np.ndarray) -> float:
    return float(np.mean(np.diff(u, 2) ** 2))


def _run_fractional1d(cfg: ExperimentConfig):
    kappa = 40.0 if cfg.kappa is None else cfg.kappa
    tau = 4.279e-5 if cfg.tau is None else cfg.tau

    def point(args):
        M, beta, p, shift = args
        spec = cl.ProblemSpec(cl.FRACTIONAL, 1, 1.0, M, np.zeros(M), kappa, beta, tau)
        j = M // 2
        ref = cl.matern_reference_row(spec, j)
        exact_row = cl.covariance_row(spec, j)
        diag = build_diagonal(spec, p, cfg.partition_for(M))
        q_row = quantum_covariance_row(spec, j, shift_impl=shift, diag=diag)
        return {
            "N": M, "beta": beta, "p": p, "shift": shift,
            "rel_l2_classical": cl.relative_l2(exact_row, ref),
            "rel_l2_quantum": cl.relative_l2(q_row, ref),
            "fit_error": cl.relative_l2(q_row, exact_row),
            "amplitude_ratio": _amplitude_ratio(exact_row, ref),
        }

    betas = cfg.beta or [0.5, 1.0, 1.5]
    points = [(M, b, p, s) for M in cfg.n for b in betas for p in cfg.p for s in cfg.shift]
    rows = _map(point, points)
    extra = {"kappa": kappa, "tau": tau}
    if cfg.samples:
        from .solver import sample_random_field_quantum

        sample_rows = []
        for M in cfg.n:
            for beta in betas:
                spec = cl.ProblemSpec(cl.FRACTIONAL, 1, 1.0, M, np.zeros(M), kappa, beta, tau)
                fields = sample_random_field_quantum(
                    spec, cfg.samples, cfg.seed, p=max(cfg.p), partition=cfg.partition_for(M),
                    shift_impl=cfg.shift[0])
                for i, u in enumerate(fields):
                    sample_rows.append({"N": M, "beta": beta, "sample": i,
                                        "mean_sq_second_difference": _mean_sq_second_difference(u)})
                    qio.write_binary(cfg.out / f"sample_N{M}_beta{beta}_{i}.bin", u)
        _write_csv(cfg.out / "fractional1d_samples.csv",
                   ("N", "beta", "sample", "mean_sq_second_difference"), sample_rows)
        extra["samples"] = cfg.samples
    return rows, extra


def _default_k_split(p: int) -> int:
    # 6 for cubic fits and 8 otherwise, the cut-offs used for the 2D Poisson runs.
    return 6 if p == 3 else 8


def _run_poisson2d(cfg: ExperimentConfig):
    reference = cl.poisson_2d_reference(512)

    def point(args):
        M, p, shift = args
        ks = cfg.k_split if cfg.k_split is not None else _default_k_split(p)
        lifted = cl.poisson_2d_problem(M)
        res = quantum_solve(lifted.spec, p=p, k_split=ks, shift_impl=shift)
        ref = cl.subsample(reference, M)
        u_q = lifted.reconstruct(res.u)
        u_c = lifted.reconstruct(cl.solve_classical(lifted.spec).u)
        row = {
            "N": M, "p": p, "k_split": ks, "shift": shift,
            "l2_error_quantum": cl.l2_error(u_q, ref, lifted.spec.h),
            "l2_error_classical": cl.l2_error(u_c, ref, lifted.spec.h),
            "success_probability": res.success_probability,
            "num_qubits": res.circuit.num_qubits,
        }
        return row, res, u_q

    points = [(M, p, s) for M in cfg.n for p in cfg.p for s in cfg.shift]
    rows, extra = [], {"scale_chain": {}, "reference_grid": 512}
    for (M, p, s), (row, res, u_q) in zip(points, _map(point, points)):
        rows.append(row)
        tag = f"N{M}_p{p}_{s}"
        extra["scale_chain"][tag] = res.scale_chain
        qio.write_grid_csv(cfg.out / f"u_{tag}.csv", u_q)
        qio.write_binary(cfg.out / f"u_{tag}.bin", u_q)
    return rows, extra


def _run_fractional2d(cfg: ExperimentConfig):
    kappa = 10 / math.sqrt(2) if cfg.kappa is None else cfg.kappa
    tau = 0.01995 if cfg.tau is None else cfg.tau
    if cfg.beta and len(cfg.beta) != 1:
        raise UsageError("fractional2d takes a single --beta")
    beta = cfg.beta[0] if cfg.beta else 1.0
    ks = 8 if cfg.k_split is None else cfg.k_split

    def point(args):
        M, p, shift = args
        spec = cl.ProblemSpec(cl.FRACTIONAL, 2, 1.0, M, np.zeros((M, M)), kappa, beta, tau)
        j = (M // 2, M // 2)
        ref = cl.matern_reference_row(spec, j)
        exact_row = cl.covariance_row(spec, j)
        diag = build_diagonal(spec, p, k_split=ks)
        q_row = quantum_covariance_row(spec, j, shift_impl=shift, diag=diag)
        qio.write_binary(cfg.out / f"row_N{M}_p{p}_{shift}.bin", q_row)
        return {
            "N": M, "p": p, "k_split": ks, "shift": shift,
            "rel_l2_quantum": cl.relative_l2(q_row, ref),
            "rel_l2_exact": cl.relative_l2(exact_row, ref),
            "fit_error": cl.relative_l2(q_row, exact_row),
            "amplitude_ratio": _amplitude_ratio(exact_row, ref),
        }

    points = [(M, p, s) for M in cfg.n for p in cfg.p for s in cfg.shift]
    return _map(point, points), {"kappa": kappa, "tau": tau, "beta": beta}


# Gate counts -----------------------------------------------------------------

def polylog_exponent(ns: Sequence[float], totals: Sequence[float]) -> float:
    """Slope of ``log(total)`` against ``log(n)``."""
    if len(ns) < 2:
        return float("nan")
    return float(np.polyfit(np.log(ns), np.log(totals), 1)[0])


def _count_row(circ, shift, p, n):
    g = count_gates(transpile(circ))
    return {"shift": shift, "p": p, "n": n, "n_qubits": circ.num_qubits,
            "n_ancilla": g.num_ancilla, "cnot": g.cnot_count, "u3": g.u3_count, "total": g.total}


def _run_gatecount(cfg: ExperimentConfig):
    exp = cfg.experiment
    if exp == "gatecount-solver":
        def point(args):
            M, p, shift = args
            spec = cl.poisson_1d_spec(M)
            diag = build_diagonal(spec, p, cfg.partition_for(M))
            circ = build_solver_circuit(spec, diag, shift)
            return _count_row(circ, shift, p, int(math.log2(M)) + 1)
        points = [(M, p, s) for s in cfg.shift for p in cfg.p for M in cfg.n]
    else:
        def point(args):
            n, _, shift = args
            if exp == "gatecount-uf":
                circ = build_forward_shift(n, shift)
            else:
                circ = build_reflection_unitary(n, shift).circuit
            return _count_row(circ, shift, "", n)
        points = [(n, "", s) for s in cfg.shift for n in cfg.n]
    rows = _map(point, points)
    return rows, {}


def polylog_rows(rows: Sequence[dict]) -> list[dict]:
    series: dict[str, list] = {}
    for r in rows:
        key = r["shift"] if r["p"] == "" else f"{r['shift']}_p{r['p']}"
        series.setdefault(key, []).append((r["n"], r["total"]))
    out = []
    for key, pts in series.items():
        pts.sort()
        e = polylog_exponent([a for a, _ in pts], [b for _, b in pts])
        out.append({"series": key, "exponent": e, "bound": POLYLOG_BOUND,
                    "bounded": bool(e <= POLYLOG_BOUND)})
    return out


# Plot data -------------------------------------------------------------------

_GROUP_KEYS = ("series", "shift", "p", "beta", "k_split")


def emit_plotdata(csv_path, out_path=None) -> list[dict]:
    """Melt an experiment CSV into long ``series, x, y`` rows.

    ``x`` is the ``N`` or ``n`` column when present, else the first column.
    Grouping columns (shift, p, beta, k_split) tag the series; every other
    column becomes its own series. A CSV that is
    already ``series, x, y`` passes through unchanged.
    """
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        body = list(reader)
    rows: list[dict] = []
    if header is not None and body:
        if list(header) == list(PLOT_COLUMNS):
            rows = [dict(zip(header, r)) for r in body]
        else:
            xcol = next((c for c in ("N", "n") if c in header), header[0])
            rest = [c for c in header if c != xcol]
            groups = [c for c in rest if c in _GROUP_KEYS]
            values = [c for c in rest if c not in _GROUP_KEYS]
            for r in body:
                rec = dict(zip(header, r))
                tag = ";".join(f"{g}={rec[g]}" for g in groups if rec[g] != "")
                for v in values:
                    name = f"{v}[{tag}]" if tag else v
                    rows.append({"series": name, "x": rec[xcol], "y": rec[v]})
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(PLOT_COLUMNS)
            for r in rows:
                w.writerow([r[c] for c in PLOT_COLUMNS])
    return rows


# Driver ------------------------------------------------------------------------

_RUNNERS = {
    "poisson1d": lambda cfg: _run_poisson1d(cfg, inhom=False),
    "poisson1d-inhom": lambda cfg: _run_poisson1d(cfg, inhom=True),
    "fractional1d": _run_fractional1d,
    "poisson2d": _run_poisson2d,
    "fractional2d": _run_fractional2d,
    "gatecount-uf": _run_gatecount,
    "gatecount-ur": _run_gatecount,
    "gatecount-solver": _run_gatecount,
}


def run_experiment(cfg: ExperimentConfig) -> int:
    cfg.validate()
    cfg.out = qio.ensure_dir(cfg.out)
    np.random.seed(cfg.seed)
    rows, extra = _RUNNERS[cfg.experiment](cfg)
    _write_csv(cfg.out / f"{cfg.experiment}.csv", COLUMNS[cfg.experiment], rows)
    status = 0
    manifest = {"version": __version__, "config": asdict(cfg), "rows": len(rows), **extra}
    if cfg.experiment.startswith("gatecount"):
        poly = polylog_rows(rows)
        _write_csv(cfg.out / "polylog.csv", POLYLOG_COLUMNS, poly)
        manifest["polylog"] = poly
        manifest["gate_counts"] = rows
        bad = [r["series"] for r in poly if not r["bounded"]]
        if bad:
            print(f"polylog exponent above {POLYLOG_BOUND} for: {', '.join(bad)}", file=sys.stderr)
            if cfg.strict_polylog:
                status = 3
    qio.write_manifest(cfg.out / "manifest.json", manifest)
    return status


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qsine",
        description="Run quantum sine-transform solver experiments and write plot data.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("experiment", choices=EXPERIMENTS + ("plotdata",))
    ap.add_argument("csv", nargs="?", help="input CSV for plotdata")
    ap.add_argument("--n", type=int, nargs="+", help="grid sizes or qubit counts")
    ap.add_argument("--p", type=int, nargs="+", help="polynomial degrees")
    ap.add_argument("--shift", nargs="+", choices=("mcx", "ripple"), help="forward-shift variants")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out", help="output directory (plotdata: output file)")
    ap.add_argument("--partition", default="geometric", help="geometric or uniform:K")
    ap.add_argument("--k-split", type=int, default=None)
    ap.add_argument("--beta", type=float, nargs="+", default=None)
    ap.add_argument("--kappa", type=float, default=None)
    ap.add_argument("--tau", type=float, default=None)
    ap.add_argument("--samples", type=int, default=0)
    ap.add_argument("--strict-polylog", action="store_true")
    ap.add_argument("--no-limits", action="store_true")
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    exp = ns.experiment
    gate = exp.startswith("gatecount")
    shift = ns.shift or (["mcx", "ripple"] if gate else ["mcx"])
    p = ns.p or DEFAULT_P.get(exp, [4])
    if exp in ("gatecount-uf", "gatecount-ur") and ns.p:
        raise UsageError("--p does not apply to shift and reflection counts")
    if exp in ("gatecount-uf", "gatecount-ur"):
        p = []
    return ExperimentConfig(
        experiment=exp,
        n=ns.n or DEFAULT_N[exp],
        p=p,
        shift=shift,
        seed=ns.seed,
        out=Path(ns.out),
        partition=ns.partition,
        k_split=ns.k_split,
        beta=ns.beta,
        kappa=ns.kappa,
        tau=ns.tau,
        samples=ns.samples,
        strict_polylog=ns.strict_polylog,
        no_limits=ns.no_limits,
    )


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    ns = ap.parse_args(argv)
    try:
        if ns.experiment == "plotdata":
            if not ns.csv:
                raise UsageError("plotdata needs an input CSV")
            out = ns.out if ns.out != "out" else None
            rows = emit_plotdata(ns.csv, out)
            if out is None:
                w = csv.writer(sys.stdout, lineterminator="\n")
                w.writerow(PLOT_COLUMNS)
                for r in rows:
                    w.writerow([r[c] for c in PLOT_COLUMNS])
            return 0
        if ns.csv:
            raise UsageError(f"unexpected argument {ns.csv!r}")
        return run_experiment(config_from_args(ns))
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"qsine: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
