from .symmetrization_agent import SymmetrizationAgent
from .optimizer_agent import EnergyOptimizer

__all__ = ['SymmetrizationAgent', 'EnergyOptimizer']
