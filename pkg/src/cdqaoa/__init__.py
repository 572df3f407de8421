"""Counterdiabatic QAOA for budget-constrained portfolio optimisation, simulated exactly."""
from ._backend import BACKEND
from .agp import OperatorPool, build_action_system, generate_pool, solve_coefficients
from .gatecost import CostReport, gate_cost
from .pauli import PauliString, PauliSum, commutator, hs_inner, parse, render
from .portfolio import (PortfolioInstance, exact_extrema, load_instance, random_instance,
                        save_instance, to_ising, to_penalty_ising)
from .qaoa import AnsatzConfig, build_ansatz, evaluate, metrics, optimize, run
from .statevector import (DiagonalCost, QuantumState, cvar_expectation, dicke_state, expectation,
                          plus_state)

__all__ = [
    "BACKEND", "AnsatzConfig", "CostReport", "DiagonalCost", "OperatorPool", "PauliString",
    "PauliSum", "PortfolioInstance", "QuantumState", "build_action_system", "build_ansatz",
    "commutator", "cvar_expectation", "dicke_state", "evaluate", "exact_extrema", "expectation",
    "gate_cost", "generate_pool", "hs_inner", "load_instance", "metrics", "optimize", "parse",
    "plus_state", "random_instance", "render", "run", "save_instance", "solve_coefficients",
    "to_ising", "to_penalty_ising",
]
