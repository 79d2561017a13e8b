"""Max-Cut QUBO toolkit: graph instances, a small autodiff tape, and three
trainable solvers (probability relaxation, policy-gradient decoding, and
GNN-guided tree search) with exhaustive and greedy references."""

from .autodiff import Adam, NonFiniteError, Tensor, concat_rows, dropout, finite_diff_check, gather_rows, masked_select
from .bench import BenchConfig, RunRecord, parse_bench_config, pct_delta, run_benchmark
from .graphs import Graph, GraphFormatError, cut_size, degree_stats, generate_graph, load_graph, save_graph
from .layers import GatLayer, GcnLayer, NodeEmbedding, attention_mask, embedding_init, feature_dims, gat_forward, gcn_forward, mean_adjacency
from .oracle import brute_force_best, greedy_maxcut
from .qubo import QuboMatrix, build_maxcut_qubo, hamiltonian
from .solvers.base import GraphSolver
from .solvers.grl import EncoderDecoderModel, GrlQuboSolver, attention_score, decode_episode, incremental_reward, policy_loss
from .solvers.mcts import MctsGnnSolver, PerturbedGnn, SearchNode, backpropagate, expand, gnn_predict, perturbed_loss, select_path, ucb
from .solvers.pignn import PignnSolver, ProbabilityModel, project, qubo_relaxed_loss
from .stopping import StoppingPolicy, TrainTrace, should_stop
from .validation import ensure_assignment, ensure_graph, ensure_probabilities

__version__ = "0.1.0"

__all__ = [
    "Adam", "NonFiniteError", "Tensor", "concat_rows", "dropout",
    "finite_diff_check", "gather_rows", "masked_select",
    "BenchConfig", "RunRecord", "parse_bench_config", "pct_delta", "run_benchmark",
    "Graph", "GraphFormatError", "cut_size", "degree_stats", "generate_graph",
    "load_graph", "save_graph",
    "GatLayer", "GcnLayer", "NodeEmbedding", "attention_mask", "embedding_init",
    "feature_dims", "gat_forward", "gcn_forward", "mean_adjacency",
    "brute_force_best", "greedy_maxcut",
    "QuboMatrix", "build_maxcut_qubo", "hamiltonian",
    "GraphSolver",
    "EncoderDecoderModel", "GrlQuboSolver", "attention_score", "decode_episode", "incremental_reward", "policy_loss",
    "MctsGnnSolver", "PerturbedGnn", "SearchNode", "backpropagate", "expand",
    "gnn_predict", "perturbed_loss", "select_path", "ucb",
    "PignnSolver", "ProbabilityModel", "project", "qubo_relaxed_loss",
    "StoppingPolicy", "TrainTrace", "should_stop",
    "ensure_assignment", "ensure_graph", "ensure_probabilities",
]
