"""Benchmark orchestration: run solver suites over generated instances and emit
CSV reports (per-run results, per-instance summary with percentage deltas against
the probability-relaxation baseline, degree statistics, and wall times).

All report files except times.csv are deterministic for a given config; wall
clock goes to times.csv only.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .graphs import cut_size, degree_stats, generate_graph
from .solvers.grl import GrlQuboSolver
from .solvers.mcts import MctsGnnSolver
from .solvers.pignn import PignnSolver

__all__ = ["BenchConfig", "RunRecord", "parse_bench_config", "run_benchmark", "pct_delta", "SOLVERS"]

SOLVERS = {
    "pignn": PignnSolver,
    "grl": GrlQuboSolver,
    "mcts": MctsGnnSolver,
}

BASELINE = "pignn"


@dataclass
class BenchConfig:
    instances: list  # (n, m, generation seed)
    solvers: dict  # name -> hyperparameter dict
    run_seeds: list
    output_dir: str
    workers: int = 1

    def __post_init__(self):
        if not self.instances:
            raise ValueError("config lists no instances")
        if not self.solvers:
            raise ValueError("config selects no solvers")
        if not self.run_seeds:
            raise ValueError("config lists no run seeds")
        for name in self.solvers:
            if name not in SOLVERS:
                raise ValueError(f"unknown solver {name!r}")


@dataclass
class RunRecord:
    instance: str
    n: int
    m: int
    solver: str
    seed: int
    cut: int
    time_s: float
    iters: int
    trace_path: str = ""
    error: str = ""


def _parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    if text == "none":
        return None
    return text


def parse_bench_config(path):
    """Flat key-value config: global keys, "instance n m seed" lines, and
    [solver] sections whose key = value pairs become constructor arguments."""
    instances = []
    solvers = {}
    run_seeds = []
    output_dir = "bench_out"
    workers = 1
    section = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                solvers.setdefault(section, {})
                continue
            if section is None and line.startswith("instance"):
                fields = line.split()
                if len(fields) != 4:
                    raise ValueError(f"line {lineno}: instance lines are 'instance n m seed'")
                instances.append((int(fields[1]), int(fields[2]), int(fields[3])))
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if section is not None:
                solvers[section][key] = _parse_value(value)
            elif key == "seeds":
                run_seeds = [int(tok) for tok in value.replace(",", " ").split()]
            elif key == "output_dir":
                output_dir = value
            elif key == "workers":
                workers = int(value)
            else:
                raise ValueError(f"line {lineno}: unknown global key {key!r}")
    return BenchConfig(instances, solvers, run_seeds, output_dir, workers)


def pct_delta(base, value):
    """Percent change versus the baseline, rounded to one decimal."""
    if base == 0:
        raise ValueError("baseline value is zero")
    return round((value - base) / base * 100.0, 1)


def _run_one(inst_id, g, name, params, seed, traces_dir):
    solver = SOLVERS[name](**params, seed=seed)
    solver.fit(g)
    if solver.cut_ != cut_size(g, solver.labels_):
        raise AssertionError(f"{name} reported a cut that does not match its labels")
    trace_path = os.path.join(traces_dir, f"{inst_id}_{name}_s{seed}.csv")
    solver.export_trace(trace_path)
    iters = getattr(solver, "iterations_", None) or solver.epochs_
    return RunRecord(inst_id, g.n, g.m, name, seed, solver.cut_, solver.time_s_,
                     iters, trace_path)


def run_benchmark(config):
    """Execute every (instance, solver, seed) job and write the report CSVs.

    Failing runs are recorded in failures.csv and skipped in the summary;
    everything else aborts loudly. Returns the successful RunRecords.
    """
    os.makedirs(config.output_dir, exist_ok=True)
    traces_dir = os.path.join(config.output_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)

    graphs = {}
    for n, m, gseed in config.instances:
        inst_id = f"{n}-{m}-{gseed}"
        graphs[inst_id] = generate_graph(n, m, gseed)

    jobs = []
    for n, m, gseed in config.instances:
        inst_id = f"{n}-{m}-{gseed}"
        for name in sorted(config.solvers):
            for seed in config.run_seeds:
                jobs.append((inst_id, name, seed))

    records = []
    failures = []

    def execute(job):
        inst_id, name, seed = job
        try:
            return _run_one(inst_id, graphs[inst_id], name, config.solvers[name], seed, traces_dir)
        except Exception as exc:  # a failing solver must not sink the suite
            return RunRecord(inst_id, graphs[inst_id].n, graphs[inst_id].m, name, seed,
                             -1, 0.0, 0, error=f"{type(exc).__name__}: {exc}")

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(execute, jobs))
    else:
        results = [execute(job) for job in jobs]
    for rec in results:
        (failures if rec.error else records).append(rec)

    records.sort(key=lambda r: (r.instance, r.solver, r.seed))
    _write_reports(config, graphs, records, failures)
    return records


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def _write_reports(config, graphs, records, failures):
    out = config.output_dir
    _write_csv(os.path.join(out, "runs.csv"),
               ["instance", "n", "m", "solver", "seed", "cut", "iters"],
               [(r.instance, r.n, r.m, r.solver, r.seed, r.cut, r.iters) for r in records])
    _write_csv(os.path.join(out, "times.csv"),
               ["instance", "n", "m", "solver", "seed", "time_s"],
               [(r.instance, r.n, r.m, r.solver, r.seed, f"{r.time_s:.3f}") for r in records])
    _write_csv(os.path.join(out, "degree_stats.csv"),
               ["instance", "n", "m", "max_degree", "min_degree", "mean_degree"],
               [(inst, g.n, g.m, *_fmt_stats(g)) for inst, g in sorted(graphs.items())])
    if failures:
        _write_csv(os.path.join(out, "failures.csv"),
                   ["instance", "n", "m", "solver", "seed", "error"],
                   [(r.instance, r.n, r.m, r.solver, r.seed, r.error.replace(",", ";"))
                    for r in failures])

    # per-instance best cut over seeds, starred best solver, deltas vs the baseline
    summary_rows = []
    for inst_id in sorted({r.instance for r in records}):
        inst_recs = [r for r in records if r.instance == inst_id]
        best_by_solver = {}
        for r in inst_recs:
            if r.solver not in best_by_solver or r.cut > best_by_solver[r.solver]:
                best_by_solver[r.solver] = r.cut
        top = max(best_by_solver.values())
        base = best_by_solver.get(BASELINE)
        for name in sorted(best_by_solver):
            cut = best_by_solver[name]
            delta = "" if base in (None, 0) else f"{pct_delta(base, cut):.1f}"
            summary_rows.append((inst_id, inst_recs[0].n, inst_recs[0].m, name, cut,
                                 str(cut == top).lower(), delta))
    _write_csv(os.path.join(out, "summary.csv"),
               ["instance", "n", "m", "solver", "best_cut", "best", "pct_vs_pignn"],
               summary_rows)


def _fmt_stats(g):
    dmax, dmin, dmean = degree_stats(g)
    return dmax, dmin, f"{dmean:.6g}"
