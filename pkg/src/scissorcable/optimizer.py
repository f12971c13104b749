"""Weight minimisation of member areas by teaching-learning-based optimisation.

Constraint violations inflate the weight multiplicatively:
``F = (1 + stress_penalty + deflection_penalty) ** eps * w``.

Randomness contract: one ``numpy.random.Generator`` seeded from the config
draws, in this order, the initial population (``NP x n`` uniforms), then per
iteration the teacher phase (per candidate: TF in {1, 2}, then ``n``
uniforms) and the learner phase (per candidate: partner index, then ``n``
uniforms).  Candidate evaluations consume no randomness, so results do not
depend on how many workers evaluate them.
"""
from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import Model
from .solver import CableIterationError, UnstableStructureError, iterate_cable_status

# penalty sum assigned to designs the solver cannot analyse
UNSTABLE_VIOLATION = 1e3


class ConfigError(ValueError):
    pass


@dataclass
class DesignSpace:
    """Areas (mm^2) grouped into design variables, with their limits."""

    groups: list[np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    stress_limit: float
    deflection_limit: float
    penalty_exponent: float = 2.0
    catalog: np.ndarray | None = None
    n_members: int = 0

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.catalog is not None:
            self.catalog = np.sort(np.asarray(self.catalog, dtype=float))
        if len(self.lower) != len(self.groups) or len(self.upper) != len(self.groups):
            raise ConfigError("one lower and upper bound per design variable")
        if np.any(self.lower <= 0) or np.any(self.lower > self.upper):
            raise ConfigError("bounds must satisfy 0 < lower <= upper")
        if not self.penalty_exponent > 0:
            raise ConfigError("penalty exponent must be positive")
        if not (self.stress_limit > 0 and self.deflection_limit > 0):
            raise ConfigError("stress and deflection limits must be positive")
        if self.catalog is not None and (
            self.catalog.size == 0
            or self.catalog[0] < self.lower.min()
            or self.catalog[-1] > self.upper.max()
        ):
            raise ConfigError("catalog must be non-empty and lie within the bounds")

    @classmethod
    def for_model(
        cls,
        model: Model,
        lower: float,
        upper: float,
        stress_limit: float,
        deflection_limit: float,
        penalty_exponent: float = 2.0,
        catalog=None,
        groups=None,
    ) -> "DesignSpace":
        """One variable per member, or per group of member ids when ``groups`` is given.

        Members left out of every group become variables of their own.
        """
        index = model.member_index
        if groups is None:
            member_groups = [np.array([k]) for k in range(len(model.members))]
        else:
            member_groups, used = [], set()
            for g in groups:
                try:
                    idx = np.array([index[mid] for mid in g])
                except KeyError as exc:
                    raise ConfigError(f"group references unknown member {exc.args[0]}") from None
                if used & set(idx.tolist()):
                    raise ConfigError("a member appears in more than one group")
                used |= set(idx.tolist())
                member_groups.append(idx)
            member_groups += [np.array([k]) for k in range(len(model.members)) if k not in used]
        n = len(member_groups)
        return cls(
            groups=member_groups,
            lower=np.full(n, float(lower)),
            upper=np.full(n, float(upper)),
            stress_limit=stress_limit,
            deflection_limit=deflection_limit,
            penalty_exponent=penalty_exponent,
            catalog=catalog,
            n_members=len(model.members),
        )

    @property
    def n_vars(self) -> int:
        return len(self.groups)

    def member_areas(self, x) -> np.ndarray:
        areas = np.empty(self.n_members)
        for value, idx in zip(np.asarray(x, dtype=float), self.groups):
            areas[idx] = value
        return areas

    def variables_from_areas(self, areas) -> np.ndarray:
        areas = np.asarray(areas, dtype=float)
        return np.array([areas[idx].mean() for idx in self.groups])

    def repair(self, x) -> np.ndarray:
        """Clip to bounds, then snap to the smallest catalog size not below each value."""
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        if self.catalog is not None:
            pos = np.searchsorted(self.catalog, x - 1e-12 * np.abs(x), side="left")
            x = self.catalog[np.minimum(pos, self.catalog.size - 1)]
        return x


@dataclass(frozen=True)
class Candidate:
    x: np.ndarray
    weight: float  # kg
    stress_penalty: float
    deflection_penalty: float
    penalty: float
    fitness: float
    feasible: bool
    stable: bool = True
    max_stress: float = float("nan")
    max_deflection: float = float("nan")


def evaluate_candidate(model: Model, space: DesignSpace, x) -> Candidate:
    x = np.asarray(x, dtype=float)
    areas = space.member_areas(x)
    weight = model.weight(areas)
    eps = space.penalty_exponent
    try:
        result = iterate_cable_status(model, areas)
    except (UnstableStructureError, CableIterationError):
        psi = (1.0 + UNSTABLE_VIOLATION) ** eps
        return Candidate(x, weight, float("nan"), float("nan"), psi, psi * weight, False, False)

    stress = np.abs(result.forces) / areas
    over = stress[stress > space.stress_limit]
    stress_pen = float(np.sum((over - space.stress_limit) / space.stress_limit))
    defl = np.abs(result.displacements).ravel()
    over = defl[defl > space.deflection_limit]
    defl_pen = float(np.sum((over - space.deflection_limit) / space.deflection_limit))
    psi = (1.0 + stress_pen + defl_pen) ** eps
    return Candidate(
        x=x,
        weight=weight,
        stress_penalty=stress_pen,
        deflection_penalty=defl_pen,
        penalty=psi,
        fitness=psi * weight,
        feasible=stress_pen == 0.0 and defl_pen == 0.0,
        max_stress=float(stress.max(initial=0.0)),
        max_deflection=float(defl.max(initial=0.0)),
    )


@dataclass(frozen=True)
class TLBOConfig:
    population: int = 25
    iterations: int = 100
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.population < 2:
            raise ConfigError("population size must be at least 2")
        if self.iterations < 1:
            raise ConfigError("at least one iteration is required")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


_WORKER_STATE: tuple | None = None


def _init_worker(model, space):
    global _WORKER_STATE
    _WORKER_STATE = (model, space)


def _evaluate_in_worker(x):
    model, space = _WORKER_STATE
    return evaluate_candidate(model, space, x)


class Evaluator:
    """Evaluates batches of designs, in order, optionally across processes."""

    def __init__(self, model: Model, space: DesignSpace, workers: int = 1):
        self.model = model
        self.space = space
        self.workers = workers
        self.count = 0
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(
                self.workers, initializer=_init_worker, initargs=(self.model, self.space)
            )
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __call__(self, xs) -> list[Candidate]:
        xs = list(xs)
        self.count += len(xs)
        if self._pool is None:
            return [evaluate_candidate(self.model, self.space, x) for x in xs]
        chunk = max(1, len(xs) // (4 * self.workers))
        return list(self._pool.map(_evaluate_in_worker, xs, chunksize=chunk))


@dataclass
class Population:
    candidates: list[Candidate]
    iteration: int = 0
    evaluations: int = 0

    @property
    def X(self) -> np.ndarray:
        return np.array([c.x for c in self.candidates])

    @property
    def fitness(self) -> np.ndarray:
        return np.array([c.fitness for c in self.candidates])

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.fitness))

    @property
    def teacher(self) -> Candidate:
        return self.candidates[self.best_index]

    @property
    def mean(self) -> np.ndarray:
        return self.X.mean(axis=0)

    @property
    def size(self) -> int:
        return len(self.candidates)


def teacher_proposal(x_old, teacher, mean, tf, r) -> np.ndarray:
    return np.asarray(x_old) + np.asarray(r) * (np.asarray(teacher) - tf * np.asarray(mean))


def learner_proposal(x_p, x_q, p_is_better: bool, r) -> np.ndarray:
    x_p, x_q = np.asarray(x_p), np.asarray(x_q)
    step = x_p - x_q if p_is_better else x_q - x_p
    return x_p + np.asarray(r) * step


def _greedy(pop: Population, proposals: list[Candidate]) -> Population:
    merged = [new if new.fitness < old.fitness else old
              for old, new in zip(pop.candidates, proposals)]
    return Population(merged, pop.iteration, pop.evaluations + len(proposals))


def teacher_step(pop: Population, space: DesignSpace, rng: np.random.Generator, evaluate) -> Population:
    X = pop.X
    teacher = pop.teacher.x
    mean = X.mean(axis=0)
    xs = []
    for i in range(pop.size):
        tf = int(rng.integers(1, 3))
        r = rng.random(space.n_vars)
        xs.append(space.repair(teacher_proposal(X[i], teacher, mean, tf, r)))
    return _greedy(pop, evaluate(xs))


def learner_step(pop: Population, space: DesignSpace, rng: np.random.Generator, evaluate) -> Population:
    if pop.size < 2:
        raise ConfigError("learner phase needs at least two candidates")
    X, F = pop.X, pop.fitness
    xs = []
    for p in range(pop.size):
        q = int(rng.integers(pop.size - 1))
        q += q >= p
        r = rng.random(space.n_vars)
        xs.append(space.repair(learner_proposal(X[p], X[q], F[p] < F[q], r)))
    return _greedy(pop, evaluate(xs))


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    function_evaluations: int
    best_fitness: float
    best_weight: float
    feasible: bool


@dataclass
class ConvergenceHistory:
    rows: list[HistoryRow] = field(default_factory=list)

    COLUMNS = ("iteration", "function_evaluations", "best_fitness_kg", "best_weight_kg", "feasible_flag")

    def append(self, pop: Population):
        best = pop.teacher
        self.rows.append(HistoryRow(pop.iteration, pop.evaluations, best.fitness, best.weight, best.feasible))

    @property
    def best_fitness(self) -> np.ndarray:
        return np.array([r.best_fitness for r in self.rows])

    @property
    def evaluations(self) -> np.ndarray:
        return np.array([r.function_evaluations for r in self.rows])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.COLUMNS) + "\n")
        for r in self.rows:
            out.write(f"{r.iteration},{r.function_evaluations},{r.best_fitness!r},{r.best_weight!r},{int(r.feasible)}\n")
        return out.getvalue()


@dataclass
class OptimizationResult:
    best: Candidate
    history: ConvergenceHistory
    population: Population
    initial: Candidate  # the model's own areas, for comparison
    space: DesignSpace | None = None

    @property
    def weight_reduction(self) -> float:
        return 1.0 - self.best.weight / self.initial.weight


def initial_population(space: DesignSpace, size: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((size, space.n_vars))
    return np.array([space.repair(x) for x in space.lower + u * (space.upper - space.lower)])


def optimize(model: Model, space: DesignSpace, config: TLBOConfig = TLBOConfig()) -> OptimizationResult:
    rng = np.random.default_rng(config.seed)
    history = ConvergenceHistory()
    initial = evaluate_candidate(model, space, space.variables_from_areas(model.areas))
    with Evaluator(model, space, config.workers) as evaluate:
        X0 = initial_population(space, config.population, rng)
        pop = Population(evaluate(X0), 0, config.population)
        history.append(pop)
        for it in range(1, config.iterations + 1):
            pop = teacher_step(pop, space, rng, evaluate)
            pop = learner_step(pop, space, rng, evaluate)
            pop.iteration = it
            history.append(pop)
    return OptimizationResult(best=pop.teacher, history=history, population=pop, initial=initial, space=space)
