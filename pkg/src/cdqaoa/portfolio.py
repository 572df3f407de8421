"""Portfolio instances, their Ising encodings and brute-force feasible-subspace oracles.

Bitstrings are written qubit 0 first: ``"10"`` selects asset 0 only.  The basis
index of a bitstring is ``sum_k x_k 2**k`` (qubit 0 is the least significant bit).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .pauli import PauliSum

GENERATOR_ID = "numpy-pcg64:mu=uniform[0,1):sigma=GG^T/n:v1"
ENUMERATION_GUARD = 10**7
INSTANCE_FIELDS = ("n_assets", "budget", "risk_aversion", "mu", "sigma", "seed", "generator_id")


class EnumerationGuardError(ValueError):
    pass


@dataclass
class PortfolioInstance:
    mu: np.ndarray
    sigma: np.ndarray
    risk_aversion: float
    budget: int
    seed: int | None = None
    generator_id: str | None = None

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        n = self.mu.shape[0]
        if n < 1 or self.sigma.shape != (n, n):
            raise ValueError("mu must have length n and sigma shape (n, n)")
        if not 0 < self.budget < n:
            raise ValueError(f"budget must satisfy 0 < B < n, got B={self.budget}, n={n}")
        if self.risk_aversion < 0:
            raise ValueError("risk_aversion must be nonnegative")
        if not np.allclose(self.sigma, self.sigma.T, atol=1e-10, rtol=0):
            raise ValueError("sigma is not symmetric")
        if np.linalg.eigvalsh(self.sigma).min() < -1e-8:
            raise ValueError("sigma is not positive semidefinite")

    @property
    def n_assets(self) -> int:
        return int(self.mu.shape[0])

    def cost(self, x) -> float:
        """Classical mean-variance cost of a 0/1 selection vector."""
        x = np.asarray(x, dtype=float)
        return float(self.risk_aversion * x @ self.sigma @ x - self.mu @ x)

    def to_json(self) -> dict:
        d = {
            "n_assets": self.n_assets,
            "budget": int(self.budget),
            "risk_aversion": float(self.risk_aversion),
            "mu": [float(v) for v in self.mu],
            "sigma": [[float(v) for v in row] for row in self.sigma],
        }
        if self.seed is not None:
            d["seed"] = int(self.seed)
        if self.generator_id is not None:
            d["generator_id"] = self.generator_id
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PortfolioInstance":
        missing = [k for k in ("n_assets", "budget", "risk_aversion", "mu", "sigma") if k not in d]
        if missing:
            raise ValueError(f"instance is missing fields {missing}")
        inst = cls(mu=d["mu"], sigma=d["sigma"], risk_aversion=d["risk_aversion"],
                   budget=int(d["budget"]), seed=d.get("seed"), generator_id=d.get("generator_id"))
        if inst.n_assets != int(d["n_assets"]):
            raise ValueError("n_assets does not match length of mu")
        return inst


def save_instance(inst: PortfolioInstance, path: str | Path) -> None:
    # json writes floats with repr(), which round-trips every double exactly
    Path(path).write_text(json.dumps(inst.to_json(), indent=1) + "\n")


def load_instance(path: str | Path) -> PortfolioInstance:
    return PortfolioInstance.from_json(json.loads(Path(path).read_text()))


def random_instance(seed: int, n_assets: int = 12, budget: int = 4,
                    risk_aversion: float = 0.5) -> PortfolioInstance:
    """Seeded synthetic instance: ``mu ~ U[0,1)``, ``sigma = G G^T / n`` with Gaussian ``G``.

    Draws come from ``numpy.random.default_rng(seed)`` (PCG64): first ``n`` uniforms
    for ``mu``, then ``n*n`` standard normals (row-major) for ``G``.
    """
    if n_assets < 2:
        raise ValueError("need at least two assets")
    if not 0 < budget < n_assets:
        raise ValueError(f"budget must satisfy 0 < B < n, got B={budget}, n={n_assets}")
    rng = np.random.default_rng(seed)
    mu = rng.random(n_assets)
    g = rng.standard_normal((n_assets, n_assets))
    sigma = g @ g.T / n_assets
    sigma = 0.5 * (sigma + sigma.T)
    return PortfolioInstance(mu, sigma, float(risk_aversion), int(budget), seed=int(seed),
                             generator_id=GENERATOR_ID)


@dataclass
class IsingModel:
    """``E(z) = offset + sum_i h_i z_i + sum_{i<j} J_ij z_i z_j`` with ``z = 1 - 2x``."""

    n_qubits: int
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)
    fields: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        if self.fields is None:
            self.fields = np.zeros(self.n_qubits)
        self.fields = np.asarray(self.fields, dtype=float)
        for i, j in self.couplings:
            if not 0 <= i < j < self.n_qubits:
                raise ValueError(f"coupling key {(i, j)} must satisfy i < j < n")

    def to_pauli(self, include_offset: bool = True) -> PauliSum:
        n = self.n_qubits
        terms: dict[tuple[int, int], complex] = {}
        if include_offset:
            terms[(0, 0)] = self.offset
        for i, h in enumerate(self.fields):
            terms[(0, 1 << i)] = h
        for (i, j), v in self.couplings.items():
            terms[(0, (1 << i) | (1 << j))] = v
        return PauliSum(n, terms)

    def energies(self) -> np.ndarray:
        """Diagonal of the Hamiltonian over all ``2**n`` basis indices."""
        n = self.n_qubits
        idx = np.arange(1 << n, dtype=np.int64)
        z = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
        e = np.full(1 << n, self.offset) + z @ self.fields
        for (i, j), v in sorted(self.couplings.items()):
            e += v * z[:, i] * z[:, j]
        return e


def _quadratic_to_ising(q: np.ndarray, lin: np.ndarray, const: float) -> IsingModel:
    """Ising form of ``x^T Q x + lin . x + const`` over binary x (Q symmetric)."""
    n = lin.shape[0]
    diag = np.diag(q)
    off = q - np.diag(diag)
    # x_i = (1 - z_i)/2; x_i^2 = x_i; pairs i != j counted twice in x^T Q x
    offset = const + 0.5 * diag.sum() + 0.5 * lin.sum() + 0.25 * off.sum()
    fields = -0.5 * diag - 0.5 * lin - 0.5 * off.sum(axis=1)
    couplings = {(i, j): 0.5 * off[i, j] for i in range(n) for j in range(i + 1, n)
                 if off[i, j] != 0.0}
    return IsingModel(n, couplings, fields, float(offset))


def to_ising(inst: PortfolioInstance) -> IsingModel:
    """Unconstrained cost ``q x^T Sigma x - mu . x`` as an Ising model (no budget terms)."""
    return _quadratic_to_ising(inst.risk_aversion * inst.sigma, -inst.mu, 0.0)


def heuristic_penalty(inst: PortfolioInstance) -> float:
    """``max(1, max|mu| + q max|Sigma| n)``: the closed-form penalty scale."""
    return max(1.0, float(np.abs(inst.mu).max()
                          + inst.risk_aversion * np.abs(inst.sigma).max() * inst.n_assets))


def separating_penalty(inst: PortfolioInstance) -> float:
    """Smallest ``alpha`` at which every feasible string undercuts every infeasible one.

    Brute force over all ``2**n`` strings: the supremum over infeasible ``x`` of
    ``(max_feasible C - C(x)) / (|x| - B)**2``.
    """
    n, b = inst.n_assets, inst.budget
    if (1 << n) > ENUMERATION_GUARD:
        raise EnumerationGuardError(f"2**{n} strings exceed enumeration guard")
    e = to_ising(inst).energies()
    w = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)
    feas = w == b
    d = (w[~feas] - b) ** 2
    return float(((e[feas].max() - e[~feas]) / d).max())


def default_penalty(inst: PortfolioInstance) -> float:
    """Heuristic scale, raised to 1.1x the separating value when the heuristic falls short.

    The heuristic alone does not always separate feasible from infeasible strings
    (e.g. with zero risk aversion); instances too large to enumerate keep the heuristic.
    """
    a = heuristic_penalty(inst)
    if (1 << inst.n_assets) > ENUMERATION_GUARD:
        return a
    need = separating_penalty(inst)
    return a if a > need else 1.1 * need


def to_penalty_ising(inst: PortfolioInstance, penalty_alpha: float | None = None) -> IsingModel:
    """Cost plus ``alpha (sum x - B)^2``; ``alpha`` defaults to :func:`default_penalty`."""
    a = default_penalty(inst) if penalty_alpha is None else float(penalty_alpha)
    if a < 0:
        raise ValueError("penalty_alpha must be nonnegative")
    n, b = inst.n_assets, inst.budget
    q = inst.risk_aversion * inst.sigma + a * np.ones((n, n))
    lin = -inst.mu - 2.0 * a * b * np.ones(n)
    return _quadratic_to_ising(q, lin, a * b * b)


def bits_of(x: str | int | np.ndarray, n: int) -> np.ndarray:
    if isinstance(x, str):
        if len(x) != n:
            raise ValueError(f"bitstring length {len(x)} != {n}")
        return np.array([int(c) for c in x], dtype=np.int64)
    if isinstance(x, (int, np.integer)):
        return (int(x) >> np.arange(n)) & 1
    arr = np.asarray(x, dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"bit vector length {arr.shape} != ({n},)")
    return arr


def bitstring(index: int, n: int) -> str:
    return "".join(str((index >> q) & 1) for q in range(n))


def index_of(bits: str) -> int:
    return sum(1 << q for q, c in enumerate(bits) if c == "1")


def cost_of_bitstring(ising: IsingModel, x) -> float:
    z = 1.0 - 2.0 * bits_of(x, ising.n_qubits)
    e = ising.offset + float(ising.fields @ z)
    for (i, j), v in ising.couplings.items():
        e += v * z[i] * z[j]
    return float(e)


def feasible_indices(n: int, budget: int) -> np.ndarray:
    """Basis indices of weight-``budget`` strings, ordered lexicographically by bitstring."""
    if math.comb(n, budget) > ENUMERATION_GUARD:
        raise EnumerationGuardError(f"C({n},{budget}) exceeds enumeration guard")
    # combinations() over positions yields strings in descending lexicographic order
    # of the qubit-0-first text; reverse to get ascending.
    idx = [sum(1 << q for q in c) for c in combinations(range(n), budget)]
    return np.array(idx[::-1], dtype=np.int64)


@dataclass(frozen=True)
class Extrema:
    e_min: float
    e_max: float
    argmin: str
    argmax: str
    n_scanned: int

    @property
    def degenerate(self) -> bool:
        return self.e_min == self.e_max


def exact_extrema(ising: IsingModel, n: int, budget: int) -> Extrema:
    """Exhaustive scan of the weight-``budget`` subspace.

    Ties are broken by the lexicographically smallest bitstring.
    """
    if n != ising.n_qubits:
        raise ValueError("n does not match the Ising model")
    if not 0 < budget < n:
        raise ValueError("budget must satisfy 0 < B < n")
    idx = feasible_indices(n, budget)
    z = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
    e = np.full(idx.shape[0], ising.offset) + z @ ising.fields
    for (i, j), v in sorted(ising.couplings.items()):
        e += v * z[:, i] * z[:, j]
    lo, hi = int(np.argmin(e)), int(np.argmax(e))
    return Extrema(float(e[lo]), float(e[hi]), bitstring(int(idx[lo]), n),
                   bitstring(int(idx[hi]), n), int(idx.shape[0]))
