"""Core domain types: game parameters, transfer models, networks, opportunity distributions.

Conventions used throughout the package:
  - individuals are 0-indexed integers,
  - edges are stored canonically as (min, max) pairs and iterated in sorted
    order so that every downstream computation is deterministic,
  - probability comparisons use an absolute tolerance of ``PROB_TOL``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

# Absolute tolerance for probability / boundary comparisons. All closed forms
# are short products of well-scaled factors, so double precision is ample.
PROB_TOL = 1e-12

UNINFORMED = "uninformed"
INFORMED = "informed"
TRANSFER_MODELS = (UNINFORMED, INFORMED)


class ParameterError(ValueError):
    """A model parameter violates a hard invariant."""


class GraphError(ValueError):
    """A graph operation received an ill-formed or infeasible input."""


class EnumerationCapError(RuntimeError):
    """Exact informed-model enumeration would exceed the neighbourhood cap.

    Callers should fall back to Monte Carlo estimation."""


class InvariantError(RuntimeError):
    """An internal self-check failed; indicates a bug, not bad user input."""


def validate_model(model: str) -> str:
    if model not in TRANSFER_MODELS:
        raise ParameterError(f"unknown transfer model {model!r}; expected one of {TRANSFER_MODELS}")
    return model


def validate_params(q: float, p: float, gamma: float = 0.0) -> None:
    """Check the hard parameter invariants, raising ParameterError on failure.

    q is the probability of drawing zero exogenous opportunities, p the
    probability of drawing two, gamma the per-edge connection cost.  p > q is
    legal but unusual (the surplus-heavy regime); it triggers a warning only.
    """
    if not (0.0 < q < 1.0):
        raise ParameterError(f"q must lie strictly in (0, 1); got q={q}")
    if not (p > 0.0):
        raise ParameterError(f"p must be strictly positive; got p={p}")
    if p + q > 1.0 + PROB_TOL:
        raise ParameterError(f"p + q must not exceed 1; got p+q={p + q}")
    if gamma < 0.0:
        raise ParameterError(f"gamma must be nonnegative; got gamma={gamma}")
    if p > q:
        warnings.warn(
            f"p={p} exceeds q={q}: surplus-heavy regime outside the usual parameter range",
            stacklevel=2,
        )


@dataclass(frozen=True)
class ModelParams:
    """Opportunity-distribution and cost parameters.

    q: probability an individual draws zero exogenous opportunities,
    p: probability of drawing two (one of which is surplus),
    gamma: utility cost borne by each endpoint of every edge.
    """

    q: float
    p: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        validate_params(self.q, self.p, self.gamma)

    @property
    def p_one(self) -> float:
        """Probability of drawing exactly one opportunity."""
        return 1.0 - self.p - self.q

    def to_json_dict(self, model: str = UNINFORMED) -> dict:
        return {"q": self.q, "p": self.p, "gamma": self.gamma, "model": model}


class Network:
    """Simple undirected graph on n individuals.

    Immutable after construction; `with_edge`/`without_edge` return modified
    copies, which keeps concurrent read-only sharing safe.
    """

    __slots__ = ("n", "edges", "_adj", "_deg", "_edge_set")

    def __init__(self, n: int, edges=()):
        if n < 0:
            raise GraphError(f"individual count must be nonnegative; got n={n}")
        canon = set()
        for e in edges:
            i, j = e
            if i == j:
                raise GraphError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
            canon.add((i, j) if i < j else (j, i))
        self.n = n
        self.edges = tuple(sorted(canon))
        self._edge_set = frozenset(self.edges)
        adj = [[] for _ in range(n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        self._deg = np.array([len(a) for a in self._adj], dtype=np.int64)

    # -- queries ------------------------------------------------------------

    def neighbors(self, i: int) -> tuple:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return int(self._deg[i])

    @property
    def degrees(self) -> np.ndarray:
        """Degree of every individual (read-only view)."""
        return self._deg

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return ((i, j) if i < j else (j, i)) in self._edge_set

    def non_edges(self):
        """All unordered non-adjacent pairs in canonical order."""
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if (i, j) not in self._edge_set:
                    yield (i, j)

    # -- functional mutation -------------------------------------------------

    def with_edge(self, i: int, j: int) -> "Network":
        if self.has_edge(i, j):
            raise GraphError(f"edge ({i}, {j}) already present")
        return Network(self.n, self.edges + (((i, j) if i < j else (j, i)),))

    def without_edge(self, i: int, j: int) -> "Network":
        e = (i, j) if i < j else (j, i)
        if e not in self._edge_set:
            raise GraphError(f"edge ({i}, {j}) not present")
        return Network(self.n, tuple(x for x in self.edges if x != e))

    def with_changes(self, add=(), remove=()) -> "Network":
        """Apply a batch of edge additions and removals in one copy."""
        rem = {tuple(sorted(e)) for e in remove}
        new_edges = [e for e in self.edges if e not in rem]
        for e in add:
            new_edges.append(tuple(sorted(e)))
        return Network(self.n, new_edges)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "Network":
        return cls(int(d["n"]), [tuple(e) for e in d["edges"]])

    @classmethod
    def from_json(cls, s: str) -> "Network":
        return cls.from_json_dict(json.loads(s))

    # -- equality / repr -------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Network) and self.n == other.n and self._edge_set == other._edge_set

    def __hash__(self) -> int:
        return hash((self.n, self._edge_set))

    def __repr__(self) -> str:
        return f"Network(n={self.n}, m={self.num_edges})"


class ExogenousDistribution:
    """Per-individual pmf over exogenous opportunity counts 0..K.

    Stored as an (n, K+1) array; each row must be a probability vector.
    """

    __slots__ = ("pmf",)

    def __init__(self, pmf) -> None:
        arr = np.asarray(pmf, dtype=float)
        if arr.ndim != 2:
            raise ParameterError(f"pmf must be a 2-d array (individuals x support); got shape {arr.shape}")
        if arr.shape[1] < 1:
            raise ParameterError("pmf support must be nonempty")
        if np.any(arr < -PROB_TOL):
            raise ParameterError("pmf entries must be nonnegative")
        sums = arr.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > PROB_TOL)[0]
        if bad.size:
            raise ParameterError(f"pmf row {bad[0]} sums to {sums[bad[0]]}, not 1")
        self.pmf = np.clip(arr, 0.0, None)

    @property
    def n(self) -> int:
        return self.pmf.shape[0]

    @property
    def support_max(self) -> int:
        return self.pmf.shape[1] - 1

    def row(self, i: int) -> np.ndarray:
        return self.pmf[i]

    @classmethod
    def constant(cls, row, n: int) -> "ExogenousDistribution":
        return cls(np.tile(np.asarray(row, dtype=float), (n, 1)))


def base_distribution(params: ModelParams, n: int) -> ExogenousDistribution:
    """Three-point pmf (q, 1-p-q, p) over counts {0, 1, 2}, one row per individual."""
    row = np.array([params.q, max(params.p_one, 0.0), params.p])
    return ExogenousDistribution.constant(row, n)


def load_params_file(path: str) -> tuple[ModelParams, str]:
    """Read a params JSON file {"q":..., "p":..., "gamma":..., "model":...}."""
    with open(path, "r", encoding="utf-8") as f:
        d = json.load(f)
    try:
        params = ModelParams(float(d["q"]), float(d["p"]), float(d.get("gamma", 0.0)))
    except KeyError as exc:
        raise ParameterError(f"params file missing key {exc}") from exc
    model = validate_model(d.get("model", UNINFORMED))
    return params, model


def load_graph_file(path: str) -> Network:
    """Read a graph JSON file {"n": int, "edges": [[i, j], ...]}."""
    with open(path, "r", encoding="utf-8") as f:
        return Network.from_json_dict(json.load(f))
