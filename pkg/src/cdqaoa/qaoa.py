"""Layered ansatz programs for the four constrained-QAOA families and their optimisation.

Methods
-------
``xy``       Dicke start, cost phase, XY mixer per layer.
``xy_cd``    as ``xy`` plus counterdiabatic Pauli rotations after the mixer.
``grover``   Dicke start, cost phase, ``exp(-i beta |F><F|)`` mixer.
``penalty``  ``|+>`` start, penalised cost phase, transverse-field mixer.

Parameters are laid out layer-major: ``gamma_k, beta_k[, eta_k...]``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import agp
from .pauli import PauliString, xy_mixer
from .gatecost import CostReport, gate_cost
from .portfolio import (Extrema, IsingModel, PortfolioInstance, exact_extrema, to_ising,
                        to_penalty_ising)
from .statevector import (DiagonalCost, QuantumState, TOPOLOGIES, _weights, apply_grover_mixer,
                          cvar_from_distribution, dicke_state, edges, plus_state, sample)
from ._backend import kernels

METHODS = ("xy", "xy_cd", "grover", "penalty")
CD_MODES = ("single_eta_per_layer", "eta_per_generator")
INIT_STRATEGIES = ("linear_ramp", "agp_seeded", "random")
RAMP_SCALE = 0.6
SIMPLEX_STEP = 0.1
RESTART_JITTER = 0.2


@dataclass(frozen=True)
class AnsatzConfig:
    method: str
    depth: int = 1
    topology: str | None = None
    cvar_alpha: float = 1.0
    cd_mode: str | None = None
    init_strategy: str = "linear_ramp"
    max_evals: int | None = None
    restarts: int = 3
    penalty_alpha: float | None = None
    seed: int = 0
    pool_max_weight: int = 3
    nested_order: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.depth < 1:
            raise ValueError("depth must be positive")
        if not 0.0 < self.cvar_alpha <= 1.0:
            raise ValueError("cvar_alpha must lie in (0, 1]")
        xy_family = self.method in ("xy", "xy_cd")
        if xy_family:
            if self.topology is None:
                object.__setattr__(self, "topology", "ring")
            if self.topology not in TOPOLOGIES:
                raise ValueError(f"unknown topology {self.topology!r}")
        elif self.topology is not None:
            raise ValueError(f"topology does not apply to method {self.method!r}")
        if self.method == "xy_cd":
            if self.cd_mode is None:
                object.__setattr__(self, "cd_mode", "single_eta_per_layer")
            if self.cd_mode not in CD_MODES:
                raise ValueError(f"unknown cd_mode {self.cd_mode!r}")
        elif self.cd_mode is not None:
            raise ValueError("cd_mode only applies to xy_cd")
        if self.penalty_alpha is not None and self.method != "penalty":
            raise ValueError("penalty_alpha only applies to the penalty method")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"unknown init_strategy {self.init_strategy!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_evals is not None and self.max_evals < 0:
            raise ValueError("max_evals must be nonnegative")


@dataclass(frozen=True)
class Gate:
    kind: str  # diagonal_phase | xy_layer | grover_mixer | transverse_layer | pauli_exp
    slot: int
    edges: tuple[tuple[int, int], ...] = ()
    strings: tuple[tuple[float, PauliString], ...] = ()
    weight: float = 1.0
    generator: int = -1


@dataclass
class GateProgram:
    method: str
    n_qubits: int
    budget: int
    depth: int
    init: str  # dicke | plus
    gates: list[Gate]
    slot_names: list[str]
    objective_cost: DiagonalCost
    report_cost: DiagonalCost
    pool: agp.OperatorPool | None = None
    schedule: list[agp.AGPSolve] = field(default_factory=list)
    topology: str | None = None
    objective_ising: IsingModel | None = None

    @property
    def n_params(self) -> int:
        return len(self.slot_names)

    def initial_state(self) -> QuantumState:
        return dicke_state(self.n_qubits, self.budget) if self.init == "dicke" else plus_state(self.n_qubits)

    @cached_property
    def _compiled(self) -> list[tuple]:
        """Gate list fused into kernel calls; consecutive Pauli rotations share one call."""
        ops: list[tuple] = []
        pending: list[tuple[int, float, PauliString]] = []

        def flush():
            if pending:
                slots = np.array([s for s, _, _ in pending], dtype=np.int64)
                base = np.array([w for _, w, _ in pending])
                xs = np.array([p.x_bits for _, _, p in pending], dtype=np.int64)
                zs = np.array([p.z_bits for _, _, p in pending], dtype=np.int64)
                ph = np.array([p.phase_power for _, _, p in pending], dtype=np.int64)
                ops.append(("paulis", slots, base, xs, zs, ph))
                pending.clear()

        for g in self.gates:
            if g.kind == "pauli_exp":
                for c, p in g.strings:
                    pending.append((g.slot, g.weight * c, p))
                continue
            flush()
            if g.kind == "diagonal_phase":
                ops.append(("phase", g.slot))
            elif g.kind == "xy_layer":
                ops.append(("xy", g.slot, np.array([e[0] for e in g.edges], dtype=np.int64),
                            np.array([e[1] for e in g.edges], dtype=np.int64)))
            elif g.kind == "grover_mixer":
                ops.append(("grover", g.slot))
            elif g.kind == "transverse_layer":
                ops.append(("rx", g.slot))
            else:
                raise ValueError(f"unknown gate kind {g.kind!r}")
        flush()
        return ops

    def simulate(self, params) -> QuantumState:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {params.shape}")
        state = self.initial_state()
        amps = state.amplitudes
        for op in self._compiled:
            kind = op[0]
            if kind == "phase":
                kernels.apply_phase(amps, self.objective_cost.energies, params[op[1]])
            elif kind == "xy":
                kernels.apply_xy_edges(amps, op[2], op[3], params[op[1]])
            elif kind == "paulis":
                _, slots, base, xs, zs, ph = op
                kernels.apply_pauli_rotations(amps, xs, zs, ph, np.ascontiguousarray(params[slots] * base))
            elif kind == "grover":
                apply_grover_mixer(state, params[op[1]], self.budget)
            elif kind == "rx":
                kernels.apply_rx_all(amps, self.n_qubits, params[op[1]])
        return state


def cost_hamiltonian(instance: PortfolioInstance):
    return to_ising(instance).to_pauli(include_offset=False)


def cd_schedule_grid(depth: int) -> list[float]:
    return [k / (depth + 1) for k in range(1, depth + 1)]


def build_ansatz(config: AnsatzConfig, instance: PortfolioInstance) -> GateProgram:
    n, b, p = instance.n_assets, instance.budget, config.depth
    ising = to_ising(instance)
    report = DiagonalCost.from_ising(ising)
    gates: list[Gate] = []
    names: list[str] = []
    pool = None
    schedule: list[agp.AGPSolve] = []

    if config.method == "penalty":
        obj_ising = to_penalty_ising(instance, config.penalty_alpha)
        objective = DiagonalCost.from_ising(obj_ising)
        init = "plus"
    else:
        obj_ising = ising
        objective = report
        init = "dicke"

    edge_list = tuple(edges(n, config.topology)) if config.topology else ()
    if config.method == "xy_cd":
        h_c = ising.to_pauli(include_offset=False)
        h_m = xy_mixer(n, edge_list)
        pool = agp.generate_pool(h_c, h_m, config.pool_max_weight, config.nested_order)
        schedule = agp.agp_schedule(h_c, h_m, pool, cd_schedule_grid(p))

    for k in range(1, p + 1):
        names.append(f"gamma_{k}")
        gates.append(Gate("diagonal_phase", len(names) - 1))
        names.append(f"beta_{k}")
        beta_slot = len(names) - 1
        if config.method in ("xy", "xy_cd"):
            gates.append(Gate("xy_layer", beta_slot, edges=edge_list))
        elif config.method == "grover":
            gates.append(Gate("grover_mixer", beta_slot))
        else:
            gates.append(Gate("transverse_layer", beta_slot))
        if config.method == "xy_cd" and pool is not None and not pool.empty:
            coeffs = schedule[k - 1].coefficients
            if config.cd_mode == "single_eta_per_layer":
                names.append(f"eta_{k}")
                scale = float(np.abs(coeffs).max()) or 1.0
                for j, g in enumerate(pool):
                    gates.append(Gate("pauli_exp", len(names) - 1, strings=tuple(g.strings()),
                                      weight=float(coeffs[j]) / scale, generator=j))
            else:
                for j, g in enumerate(pool):
                    names.append(f"eta_{k}_{j}")
                    gates.append(Gate("pauli_exp", len(names) - 1, strings=tuple(g.strings()),
                                      generator=j))
    return GateProgram(config.method, n, b, p, init, gates, names, objective, report, pool,
                       schedule, config.topology, obj_ising)


def evaluate(program: GateProgram, params, cost: DiagonalCost | None = None,
             cvar_alpha: float = 1.0) -> float:
    """CVaR of ``cost`` (default: the unpenalised cost) over the exact output distribution."""
    cost = program.report_cost if cost is None else cost
    probs = program.simulate(params).probabilities()
    return cvar_from_distribution(probs, cost.energies, cvar_alpha, cost.order)


def initial_point(program: GateProgram, config: AnsatzConfig, rng: np.random.Generator) -> np.ndarray:
    p = program.depth
    x = np.zeros(program.n_params)
    if config.init_strategy == "random":
        return rng.uniform(0.0, 1.0, program.n_params)
    for k in range(1, p + 1):
        x[program.slot_names.index(f"gamma_{k}")] = RAMP_SCALE * k / p
        x[program.slot_names.index(f"beta_{k}")] = RAMP_SCALE * (1 - k / p)
    if config.init_strategy == "agp_seeded" and program.schedule:
        dlam = 1.0 / (p + 1)
        for k in range(1, p + 1):
            coeffs = program.schedule[k - 1].coefficients
            if config.cd_mode == "single_eta_per_layer":
                x[program.slot_names.index(f"eta_{k}")] = dlam * float(np.abs(coeffs).max())
            else:
                for j, c in enumerate(coeffs):
                    x[program.slot_names.index(f"eta_{k}_{j}")] = dlam * c
    return x


@dataclass
class Metrics:
    approximation_ratio: float
    ground_state_probability: float
    feasible_mass: float
    expectation: float

    @property
    def ratio_unclamped(self) -> bool:
        return not 0.0 <= self.approximation_ratio <= 1.0


def metrics(state: QuantumState, instance: PortfolioInstance, extrema: Extrema,
            cost: DiagonalCost | None = None) -> Metrics:
    """Approximation ratio, ground-state probability and feasible mass of a final state.

    A degenerate feasible spectrum (``E_min == E_max``) gives ratio 1.
    """
    cost = DiagonalCost.from_ising(to_ising(instance)) if cost is None else cost
    probs = state.probabilities()
    mean = float(probs @ cost.energies)
    if extrema.e_min == extrema.e_max:
        r = 1.0
    else:
        r = (mean - extrema.e_max) / (extrema.e_min - extrema.e_max)
    gs = sum(1 << q for q, ch in enumerate(extrema.argmin) if ch == "1")
    feas = float(probs[_weights(state.n_qubits) == instance.budget].sum())
    # probabilities are clipped only against rounding; the ratio is left unclamped
    return Metrics(float(r), min(float(probs[gs]), 1.0), min(feas, 1.0), mean)


@dataclass
class RunResult:
    config: AnsatzConfig
    best_params: np.ndarray
    best_cvar: float
    approximation_ratio: float
    ground_state_probability: float
    feasible_mass: float
    best_bitstring: str
    evals_used: int
    converged: bool
    evaluations: list[float]
    best_so_far: list[float]
    restart_values: list[float]
    gate_cost: CostReport
    wall_ms: float

    @property
    def ratio_unclamped(self) -> bool:
        return not 0.0 <= self.approximation_ratio <= 1.0


def default_budget(n_params: int) -> int:
    return 200 * n_params


def optimize(program: GateProgram, config: AnsatzConfig, instance: PortfolioInstance,
             extrema: Extrema | None = None, shots: int = 1024) -> RunResult:
    """Multi-start Nelder-Mead on the CVaR objective; best restart wins.

    Restart 0 starts at the strategy's point, later restarts add seeded Gaussian
    jitter (or redraw, for ``random``).  A zero budget evaluates the start point once.
    """
    t0 = time.perf_counter()
    budget = default_budget(program.n_params) if config.max_evals is None else config.max_evals
    evaluations: list[float] = []

    def objective(x):
        val = evaluate(program, x, program.objective_cost, config.cvar_alpha)
        evaluations.append(val)
        return val

    best_x, best_val, converged = None, math.inf, False
    restart_values = []
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        x0 = initial_point(program, config, rng)
        if r > 0 and config.init_strategy != "random":
            x0 = x0 + rng.normal(0.0, RESTART_JITTER, x0.shape)
        if budget == 0:
            x, val, ok = x0, objective(x0), False
        else:
            dim = x0.shape[0]
            simplex = np.vstack([x0] + [x0 + SIMPLEX_STEP * e for e in np.eye(dim)])
            res = minimize(objective, x0, method="Nelder-Mead",
                           options={"maxfev": budget, "initial_simplex": simplex,
                                    "xatol": 1e-5, "fatol": 1e-7, "adaptive": dim > 4})
            x, val, ok = res.x, float(res.fun), bool(res.success)
        restart_values.append(val)
        if val < best_val:
            best_x, best_val, converged = np.array(x, dtype=float), val, ok

    state = program.simulate(best_x)
    ext = exact_extrema(to_ising(instance), instance.n_assets, instance.budget) if extrema is None else extrema
    m = metrics(state, instance, ext, program.report_cost)
    shots_drawn = sample(state, shots, config.seed)
    energies = program.objective_cost.energies
    best_bits = min(shots_drawn, key=lambda s: (energies[sum(1 << q for q, c in enumerate(s) if c == "1")], s))
    best_so_far = np.minimum.accumulate(evaluations).tolist() if evaluations else []
    return RunResult(config, best_x, best_val, m.approximation_ratio, m.ground_state_probability,
                     m.feasible_mass, best_bits, len(evaluations), converged, evaluations,
                     best_so_far, restart_values, gate_cost(program),
                     (time.perf_counter() - t0) * 1e3)


def run(config: AnsatzConfig, instance: PortfolioInstance, extrema: Extrema | None = None) -> RunResult:
    return optimize(build_ansatz(config, instance), config, instance, extrema)
