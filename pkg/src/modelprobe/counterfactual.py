"""Contrastive explanation search: the nearest alternative input reaching a target.

The search minimizes lambda * violation(f(c)) + d(c, x) with an increasing
penalty schedule: start from a small lambda, minimize with a derivative-free
inner optimizer, and multiply lambda until the target constraint is met or
the outer budget runs out. Score targets use the two-sided violation
(f(c) - T)^2; class targets are translated to crossing the 0.5 decision
threshold on the target class's probability, so their violation is one-sided
(max(0, T - f)^2 with T = 0.5 + tolerance).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConfigError, SchemaViolation
from .models import Model, ScalarView
from .optimizers import (
    EvalBudget,
    OPTIMIZERS,
    ProjectedObjective,
    choose_optimizer,
    run_inner,
)
from .schema import Dataset, Schema


@dataclass(frozen=True)
class TargetSpec:
    """Either a desired score T or a target class; tolerance bounds acceptance."""

    score: float | None = None
    target_class: str | None = None
    tolerance: float = 0.01

    def __post_init__(self):
        if (self.score is None) == (self.target_class is None):
            raise ConfigError("set exactly one of score / target_class")
        if not (self.tolerance > 0):
            raise ConfigError("tolerance must be positive")

    def resolve(self, model: Model) -> "_ResolvedTarget":
        if self.score is not None:
            if model.output_kind == "class_probabilities":
                raise ConfigError(
                    "score target on a class-probability model; use target_class"
                )
            return _ResolvedTarget(
                value=float(self.score), tolerance=self.tolerance,
                one_sided=False, view=ScalarView.resolve(model),
            )
        if model.output_kind != "class_probabilities":
            raise ConfigError("target_class needs a class-probability model")
        if self.target_class not in model.classes:
            raise ConfigError(
                f"unknown class {self.target_class!r}; model classes: {list(model.classes)}"
            )
        idx = model.classes.index(self.target_class)
        # Decision-threshold crossing: feasible iff P(class) >= T - tol = 0.5.
        return _ResolvedTarget(
            value=0.5 + self.tolerance, tolerance=self.tolerance,
            one_sided=True, view=ScalarView.resolve(model, class_index=idx),
        )

    def to_document(self) -> dict:
        if self.score is not None:
            return {"score": self.score, "tolerance": self.tolerance}
        return {"class": self.target_class, "tolerance": self.tolerance}


@dataclass(frozen=True)
class _ResolvedTarget:
    value: float
    tolerance: float
    one_sided: bool
    view: ScalarView

    def violation(self, f_value: float) -> float:
        gap = self.value - f_value if self.one_sided else f_value - self.value
        if self.one_sided and gap <= 0:
            return 0.0
        return gap * gap

    def feasible(self, f_value: float) -> bool:
        if self.one_sided:
            return f_value >= self.value - self.tolerance
        return abs(f_value - self.value) <= self.tolerance


DISTANCE_KINDS = ("mad_weighted_l1", "l2", "custom_weights")


@dataclass(frozen=True)
class DistanceConfig:
    """Distance d(c, x) plus the set of features the search may never touch."""

    kind: str
    weights: np.ndarray
    locked: frozenset[int] = frozenset()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ConfigError("distance weights must be finite and positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "locked", frozenset(int(i) for i in self.locked))

    @staticmethod
    def l2(schema: Schema, locked=()) -> "DistanceConfig":
        return DistanceConfig("l2", np.ones(schema.dimension), frozenset(locked))

    @staticmethod
    def mad_weighted(dataset: Dataset, locked=()) -> "DistanceConfig":
        return DistanceConfig(
            "mad_weighted_l1", 1.0 / dataset.effective_scale(), frozenset(locked)
        )

    @staticmethod
    def unit_l1(schema: Schema, locked=()) -> "DistanceConfig":
        """MAD-weighted L1 with unit scales, for when no dataset is available."""
        return DistanceConfig("mad_weighted_l1", np.ones(schema.dimension), frozenset(locked))

    @staticmethod
    def custom(weights, locked=()) -> "DistanceConfig":
        return DistanceConfig(
            "custom_weights", np.asarray(weights, dtype=np.float64), frozenset(locked)
        )

    def __call__(self, c: np.ndarray, x: np.ndarray) -> float:
        delta = np.asarray(c, dtype=np.float64) - np.asarray(x, dtype=np.float64)
        if self.kind == "l2":
            return float(np.linalg.norm(delta))
        return float(self.weights @ np.abs(delta))

    def scales(self) -> np.ndarray:
        """Per-feature step scale for perturbations: the inverse weight."""
        if self.kind == "l2":
            return np.ones_like(self.weights)
        return 1.0 / self.weights

    def to_document(self) -> dict:
        return {
            "kind": self.kind,
            "weights": [float(w) for w in self.weights],
            "locked_features": sorted(self.locked),
        }


@dataclass(frozen=True)
class SearchConfig:
    lambda_init: float = 0.1
    lambda_growth: float = 10.0
    max_outer: int = 10
    inner_optimizer: str | None = None  # None -> choose by schema
    inner_step: float | None = None
    max_inner_evals: int = 400
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.lambda_init <= 0 or self.lambda_growth <= 1:
            raise ConfigError("need lambda_init > 0 and lambda_growth > 1")
        if self.max_outer < 1 or self.max_inner_evals < 1 or self.restarts < 1:
            raise ConfigError("outer/inner/restart budgets must be >= 1")
        if self.inner_optimizer is not None and self.inner_optimizer not in OPTIMIZERS:
            raise ConfigError(
                f"unknown inner optimizer {self.inner_optimizer!r} "
                f"(expected one of {OPTIMIZERS})"
            )

    def to_document(self) -> dict:
        return {
            "lambda_init": self.lambda_init,
            "lambda_growth": self.lambda_growth,
            "max_outer": self.max_outer,
            "inner_optimizer": self.inner_optimizer,
            "max_inner_evals": self.max_inner_evals,
            "restarts": self.restarts,
        }


@dataclass(frozen=True)
class CounterfactualResult:
    c: np.ndarray
    score_at_c: float
    distance: float
    converged: bool
    lambda_trace: tuple[tuple[float, float], ...]
    n_model_evals: int
    violation_trace: tuple[float, ...] = ()  # parallels lambda_trace; not serialized


class _Tracker:
    """Best-feasible-else-least-violating selection over every evaluated point.

    ``penalty`` augments the distance both in the objective and in the
    feasible ranking; diverse search uses it to repel earlier solutions.
    """

    def __init__(self, x, target: _ResolvedTarget, distance: DistanceConfig,
                 penalty: Callable[[np.ndarray], float] | None = None):
        self.x = x
        self.target = target
        self.distance = distance
        self.penalty = penalty
        self.n_evals = 0
        self.best_feasible = None   # (ranked distance, tuple(c), c, f)
        self.best_infeasible = None  # (violation, distance, tuple(c), c, f)

    def evaluate(self, c: np.ndarray, lam: float) -> float:
        f_c = self.target.view(c)
        self.n_evals += 1
        dist = self.distance(c, self.x)
        extra = self.penalty(c) if self.penalty is not None else 0.0
        viol = self.target.violation(f_c)
        key = tuple(c)
        if self.target.feasible(f_c):
            cand = (dist + extra, key, c.copy(), f_c)
            if self.best_feasible is None or cand[:2] < self.best_feasible[:2]:
                self.best_feasible = cand
        else:
            cand = (viol, dist + extra, key, c.copy(), f_c)
            if self.best_infeasible is None or cand[:3] < self.best_infeasible[:3]:
                self.best_infeasible = cand
        return lam * viol + dist + extra


def _locked_free(schema: Schema, distance: DistanceConfig) -> np.ndarray:
    bad = [i for i in distance.locked if not (0 <= i < schema.dimension)]
    if bad:
        raise ConfigError(f"locked feature indices out of range: {sorted(bad)}")
    free = np.array(
        [i for i in range(schema.dimension) if i not in distance.locked], dtype=np.int64
    )
    if free.size == 0:
        raise ConfigError("every feature is locked; nothing to search")
    return free


def find_counterfactual(model: Model, x, target: TargetSpec,
                        distance: DistanceConfig, search: SearchConfig,
                        _penalty: Callable[[np.ndarray], float] | None = None,
                        ) -> CounterfactualResult:
    """Search for the nearest point whose model response meets the target.

    Outer loop: minimize lambda * violation + distance, growing lambda by
    lambda_growth whenever the best point still misses the target, warm-started
    from the previous accepted iterate. A new iterate is accepted only if it
    does not increase the constraint violation, which keeps the violation
    non-increasing along the trace. Restart 0 starts from x; later restarts
    from seeded scale-sized perturbations of x. Non-convergence is reported,
    not raised.
    """
    schema = model.schema
    point = schema.validate_point(x)
    resolved = target.resolve(model)
    if distance.weights.shape != (schema.dimension,):
        raise ConfigError("distance weights length does not match the schema")
    free = _locked_free(schema, distance)
    scales_full = distance.scales()
    scales = scales_full[free]
    inner = search.inner_optimizer or choose_optimizer(schema, free)
    tracker = _Tracker(point, resolved, distance, penalty=_penalty)

    best_trace: tuple[tuple[float, float], ...] = ()
    best_viol_trace: tuple[float, ...] = ()
    best_rank = None
    rng = np.random.default_rng(search.seed)
    for restart in range(search.restarts):
        if restart == 0:
            start = point.copy()
        else:
            jitter = rng.uniform(-1.0, 1.0, size=schema.dimension) * scales_full
            raw = point + jitter
            raw[list(distance.locked)] = point[list(distance.locked)]
            start = schema.project(raw)
            start[list(distance.locked)] = point[list(distance.locked)]
        lam = search.lambda_init
        accepted = schema.project(start)
        accepted_f = resolved.view(accepted)
        tracker.n_evals += 1
        accepted_viol = resolved.violation(accepted_f)
        trace: list[tuple[float, float]] = []
        viols: list[float] = []
        feasible_rounds = 0
        for _ in range(search.max_outer):
            budget = EvalBudget(limit=search.max_inner_evals)
            objective = ProjectedObjective(
                fn=lambda c, lam=lam: tracker.evaluate(c, lam),
                schema=schema, base=accepted, free=free, budget=budget,
            )
            z0 = accepted[free]
            z_best, _ = run_inner(inner, objective, z0, schema, free, scales,
                                  step=search.inner_step)
            cand = objective.full_point(z_best)
            cand_f = resolved.view(cand)
            tracker.n_evals += 1
            cand_viol = resolved.violation(cand_f)
            if cand_viol <= accepted_viol + 1e-15:
                accepted, accepted_f, accepted_viol = cand, cand_f, cand_viol
            obj = lam * accepted_viol + distance(accepted, point)
            trace.append((lam, obj))
            viols.append(accepted_viol)
            if resolved.feasible(accepted_f):
                # one polishing round at the next penalty level: with the
                # constraint now expensive to break, the inner optimizer
                # spends its budget cutting distance inside the feasible set
                feasible_rounds += 1
                if feasible_rounds >= 2:
                    break
            lam *= search.lambda_growth
        rank = (0, distance(accepted, point)) if resolved.feasible(accepted_f) \
            else (1, accepted_viol)
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best_trace = tuple(trace)
            best_viol_trace = tuple(viols)

    if tracker.best_feasible is not None:
        _, _, c, f_c = tracker.best_feasible
        converged = True
    else:
        _, _, _, c, f_c = tracker.best_infeasible
        converged = False
    return CounterfactualResult(
        c=c,
        score_at_c=float(f_c),
        distance=distance(c, point),
        converged=converged,
        lambda_trace=best_trace,
        n_model_evals=tracker.n_evals,
        violation_trace=best_viol_trace,
    )


@dataclass(frozen=True)
class DiverseCounterfactuals:
    results: tuple[CounterfactualResult, ...]
    requested: int
    complete: bool  # False when fewer distinct solutions were found


def diverse_counterfactuals(model: Model, x, target: TargetSpec,
                            distance: DistanceConfig, search: SearchConfig,
                            n: int, dedup_tolerance: float = 1e-6,
                            repulsion_delta: float = 1e-3,
                            ) -> DiverseCounterfactuals:
    """Run n searches, repelling each new search from the solutions so far.

    After each solution c*, later objectives add rho / (delta + d(c, c*)) with
    rho scaled to the first solution's distance from x, so the repulsion is
    commensurate with the problem. Near-duplicates (pairwise d < tolerance)
    are dropped; results come back sorted by distance.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    point = model.schema.validate_point(x)
    found: list[CounterfactualResult] = []
    rho = 0.0
    for i in range(n):
        anchors = [r.c for r in found]

        def penalty(c, anchors=tuple(anchors), rho_now=rho):
            if not anchors or rho_now == 0.0:
                return 0.0
            return float(
                sum(rho_now / (repulsion_delta + distance(c, a)) for a in anchors)
            )

        result = find_counterfactual(
            model, point, target, distance,
            replace(search, seed=search.seed + i),
            _penalty=penalty if anchors else None,
        )
        if result.converged:
            if not found:
                rho = 0.1 * result.distance
            found.append(result)
    unique: list[CounterfactualResult] = []
    for r in sorted(found, key=lambda r: (r.distance, tuple(r.c))):
        if all(distance(r.c, u.c) >= dedup_tolerance for u in unique):
            unique.append(r)
    return DiverseCounterfactuals(
        results=tuple(unique), requested=n, complete=len(unique) >= n
    )


def oracle_grid_search(model: Model, x, target: TargetSpec,
                       distance: DistanceConfig, grid: list,
                       max_points: int = 10_000_000) -> CounterfactualResult:
    """Exhaustive search over a cartesian grid; the brute-force reference.

    Returns the feasible grid point of minimum distance (ties resolved toward
    the lexicographically smallest point), or the least-violating point with
    converged=False when nothing on the grid is feasible. Locked features are
    pinned to their value at x regardless of the supplied grid.
    """
    schema = model.schema
    point = schema.validate_point(x)
    resolved = target.resolve(model)
    if len(grid) != schema.dimension:
        raise ConfigError("grid needs one value list per feature")
    axes = []
    for i, axis in enumerate(grid):
        if i in distance.locked:
            axes.append(np.array([point[i]]))
            continue
        arr = np.asarray(axis, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ConfigError(f"grid axis {i} must be a non-empty 1-D list")
        axes.append(np.sort(arr))
    total = int(np.prod([a.size for a in axes], dtype=np.int64))
    if total > max_points:
        raise ConfigError(f"grid has {total} points, above the {max_points} cap")
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    values = resolved.view.many(points)
    deltas = points - point
    if distance.kind == "l2":
        dists = np.sqrt((deltas ** 2).sum(axis=1))
    else:
        dists = np.abs(deltas) @ distance.weights
    if resolved.one_sided:
        feas = values >= resolved.value - resolved.tolerance
        viols = np.maximum(0.0, resolved.value - values) ** 2
    else:
        feas = np.abs(values - resolved.value) <= resolved.tolerance
        viols = (values - resolved.value) ** 2
    if feas.any():
        idx = np.flatnonzero(feas)
        best = _argmin_lex(dists[idx], points[idx])
        sel = idx[best]
        converged = True
    else:
        sel = _argmin_lex(np.stack([viols, dists], axis=1), points)
        converged = False
    c = points[sel].copy()
    return CounterfactualResult(
        c=c,
        score_at_c=float(values[sel]),
        distance=float(dists[sel]),
        converged=converged,
        lambda_trace=(),
        n_model_evals=total,
    )


def _argmin_lex(keys: np.ndarray, points: np.ndarray) -> int:
    """Index minimizing (keys..., then point coordinates lexicographically)."""
    keys = np.atleast_2d(keys.T).T if keys.ndim == 1 else keys
    columns = [points[:, j] for j in range(points.shape[1] - 1, -1, -1)]
    columns += [keys[:, j] for j in range(keys.shape[1] - 1, -1, -1)]
    return int(np.lexsort(columns)[0])


@dataclass(frozen=True)
class ContrastStatement:
    text: str
    changed_features: tuple[tuple[str, object, object], ...]

    def to_document(self) -> dict:
        return {
            "statement": self.text,
            "changed_features": [
                {"feature": name, "from": frm, "to": to}
                for name, frm, to in self.changed_features
            ],
        }


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return f"{value:.6g}"


def render_contrast(model: Model, x, result: CounterfactualResult) -> ContrastStatement:
    """Template the result as an 'if your data had looked like this' statement."""
    schema = model.schema
    point = schema.validate_point(x)
    c = schema.validate_point(result.c)
    changes = []
    for i, f in enumerate(schema.features):
        if abs(c[i] - point[i]) > 1e-9:
            changes.append((f.name, f.display_value(point[i]), f.display_value(c[i])))
    if not changes:
        return ContrastStatement(
            text="No change required: the data point already receives this outcome.",
            changed_features=(),
        )
    clauses = " and ".join(
        f"{name} had been {_fmt(to)} (instead of {_fmt(frm)})"
        for name, frm, to in changes
    )
    before = model.score(point)
    after = model.score(c)
    if model.output_kind == "class_probabilities":
        outcome = (
            f"the classification would have been {after.predicted_class} "
            f"(instead of {before.predicted_class})"
        )
    else:
        outcome = (
            f"you would have received score {_fmt(after.score)} "
            f"(instead of {_fmt(before.score)})"
        )
    return ContrastStatement(
        text=f"If {clauses}, {outcome}.",
        changed_features=tuple(changes),
    )
