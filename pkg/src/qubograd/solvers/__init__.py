from .base import GraphSolver
from .grl import GrlQuboSolver
from .mcts import MctsGnnSolver
from .pignn import PignnSolver

__all__ = ["GraphSolver", "GrlQuboSolver", "MctsGnnSolver", "PignnSolver"]
