"""Command line interface: generate instances, solve them, run benchmark suites,
and query the exhaustive oracle. Exit codes: 0 success, 1 usage error, 2 runtime failure."""

import argparse
import json
import sys

from .bench import parse_bench_config, run_benchmark
from .graphs import cut_size, generate_graph, load_graph, save_graph
from .oracle import brute_force_best
from .qubo import build_maxcut_qubo
from .solvers.grl import GrlQuboSolver
from .solvers.mcts import MctsGnnSolver
from .solvers.pignn import PignnSolver

FORMAT_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse defaults to exit code 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="qubograd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("n", type=int)
    gen.add_argument("m", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    solve = sub.add_parser("solve", help="run one solver on a graph file")
    solve.add_argument("graph")
    solve.add_argument("--algo", required=True, choices=("pignn", "grl", "mcts"))
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--json", help="write the result JSON here instead of stdout")
    solve.add_argument("--trace", help="write the per-epoch trace CSV here")
    solve.add_argument("--lr", type=float)
    solve.add_argument("--patience", type=int)
    solve.add_argument("--max-epochs", type=int)
    solve.add_argument("--beta", type=float)
    solve.add_argument("--stopping", choices=("fuzzy", "strict"))
    solve.add_argument("--tol", type=float)
    solve.add_argument("--restarts", type=int)
    solve.add_argument("--dropout-rate", type=float)
    solve.add_argument("--clip-c", type=float)
    solve.add_argument("--log-prob", action="store_true", default=None)
    solve.add_argument("--alpha", type=float)
    solve.add_argument("--max-children", type=int)
    solve.add_argument("--rollout-patience", type=int)
    solve.add_argument("--rollout-max-epochs", type=int)
    solve.add_argument("--max-iters", type=int)
    solve.set_defaults(func=_cmd_solve)

    bench = sub.add_parser("bench", help="run a benchmark config")
    bench.add_argument("config")
    bench.set_defaults(func=_cmd_bench)

    oracle = sub.add_parser("oracle", help="exhaustive optimum of a small graph")
    oracle.add_argument("graph")
    oracle.set_defaults(func=_cmd_oracle)

    return parser


def _cmd_gen(args):
    g = generate_graph(args.n, args.m, args.seed)
    save_graph(g, args.out)
    print(f"wrote {args.out} (n={g.n}, m={g.m})")
    return 0


_SOLVE_FLAGS = {
    "pignn": ("lr", "patience", "max_epochs", "beta", "stopping", "tol",
              "restarts", "dropout_rate"),
    "grl": ("lr", "patience", "max_epochs", "beta", "clip_c", "log_prob"),
    "mcts": ("lr", "max_epochs", "beta", "alpha", "max_children",
             "rollout_patience", "rollout_max_epochs", "max_iters", "patience",
             "dropout_rate"),
}
_SOLVERS = {"pignn": PignnSolver, "grl": GrlQuboSolver, "mcts": MctsGnnSolver}


def _cmd_solve(args):
    g = load_graph(args.graph)
    kwargs = {}
    for flag in _SOLVE_FLAGS[args.algo]:
        value = getattr(args, flag, None)
        if value is None:
            continue
        if args.algo == "mcts" and flag == "patience":
            kwargs["search_patience"] = value
        elif args.algo == "mcts" and flag == "max_epochs":
            continue  # epoch budgets for mcts come from the rollout flags
        else:
            kwargs[flag] = value
    solver = _SOLVERS[args.algo](**kwargs, seed=args.seed)
    solver.fit(g)
    result = {
        "format_version": FORMAT_VERSION,
        "algo": args.algo,
        "graph": args.graph,
        "n": g.n,
        "m": g.m,
        "seed": args.seed,
        "cut": int(solver.cut_),
        "time_s": round(solver.time_s_, 3),
        "epochs": int(getattr(solver, "iterations_", None) or solver.epochs_),
    }
    payload = json.dumps(result, indent=2) + "\n"
    if args.json:
        with open(args.json, "w", encoding="ascii") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    if args.trace:
        solver.export_trace(args.trace)
    return 0


def _cmd_bench(args):
    config = parse_bench_config(args.config)
    records = run_benchmark(config)
    print(f"{len(records)} runs written to {config.output_dir}")
    return 0


def _cmd_oracle(args):
    g = load_graph(args.graph)
    labels, best_h = brute_force_best(build_maxcut_qubo(g))
    print(f"optimal_cut={cut_size(g, labels)}")
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
