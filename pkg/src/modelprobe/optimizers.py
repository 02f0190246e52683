"""Derivative-free inner optimizers for the constrained search loop.

All three optimizers work on the free (unlocked) coordinates of a point and
never evaluate the objective outside the schema's feasible set: candidates
pass through a projection (bound clipping plus integer rounding for count and
categorical features) before every evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .schema import Schema


@dataclass
class EvalBudget:
    limit: int
    used: int = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def spend(self) -> None:
        self.used += 1


class ProjectedObjective:
    """Wraps L(c) so optimizers see a projected, budgeted scalar function."""

    def __init__(self, fn: Callable[[np.ndarray], float], schema: Schema,
                 base: np.ndarray, free: np.ndarray, budget: EvalBudget):
        self.fn = fn
        self.schema = schema
        self.base = np.asarray(base, dtype=np.float64)
        self.free = np.asarray(free, dtype=np.int64)
        self.budget = budget

    def full_point(self, z: np.ndarray) -> np.ndarray:
        c = self.base.copy()
        c[self.free] = z
        return self.schema.project(c)

    def __call__(self, z: np.ndarray) -> float:
        if self.budget.exhausted:
            raise _BudgetExhausted
        self.budget.spend()
        return self.fn(self.full_point(z))


class _BudgetExhausted(Exception):
    pass


def _guard(fn, z, fallback=np.inf):
    try:
        return fn(z)
    except _BudgetExhausted:
        return fallback


def nelder_mead(objective: ProjectedObjective, z0: np.ndarray, steps: np.ndarray,
                lows: np.ndarray, highs: np.ndarray,
                shrink_tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Simplex descent with projection applied inside every evaluation.

    Standard reflect/expand/contract/shrink moves. Vertices are clipped to
    the box before evaluation: letting internal coordinates wander outside
    would flatten the projected objective into plateaus that stall the
    simplex against a bound.
    """
    m = z0.shape[0]

    def clip(v: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(v, lows), highs)

    verts = [clip(z0)]
    for i in range(m):
        v = z0.copy()
        step = steps[i] if steps[i] != 0 else 0.1
        v[i] += step if v[i] + step <= highs[i] else -step
        verts.append(clip(v))
    try:
        vals = [objective(v) for v in verts]
    except _BudgetExhausted:
        return z0, np.inf
    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    while not objective.budget.exhausted:
        order = np.argsort(vals, kind="stable")
        verts = [verts[i] for i in order]
        vals = [vals[i] for i in order]
        spread = vals[-1] - vals[0]
        width = max(np.max(np.abs(v - verts[0])) for v in verts[1:])
        if spread < shrink_tol and width < shrink_tol:
            break
        centroid = np.mean(verts[:-1], axis=0)
        worst = verts[-1]
        reflected = clip(centroid + alpha * (centroid - worst))
        f_r = _guard(objective, reflected)
        if vals[0] <= f_r < vals[-2]:
            verts[-1], vals[-1] = reflected, f_r
            continue
        if f_r < vals[0]:
            expanded = clip(centroid + gamma * (reflected - centroid))
            f_e = _guard(objective, expanded)
            if f_e < f_r:
                verts[-1], vals[-1] = expanded, f_e
            else:
                verts[-1], vals[-1] = reflected, f_r
            continue
        contracted = clip(centroid + rho * (worst - centroid))
        f_c = _guard(objective, contracted)
        if f_c < vals[-1]:
            verts[-1], vals[-1] = contracted, f_c
            continue
        # shrink toward the best vertex
        for i in range(1, len(verts)):
            verts[i] = verts[0] + sigma * (verts[i] - verts[0])
            vals[i] = _guard(objective, verts[i])
    best = int(np.argmin(vals))
    return verts[best], vals[best]


def coordinate_descent(objective: ProjectedObjective, z0: np.ndarray,
                       schema: Schema, free: np.ndarray, scales: np.ndarray,
                       max_passes: int = 12) -> tuple[np.ndarray, float]:
    """Cyclic per-coordinate minimization.

    Categorical coordinates sweep every category; count coordinates sweep the
    integer range exhaustively when small, a coarse-then-local set otherwise;
    continuous coordinates do a coarse scan of an expanding window followed by
    golden-section refinement. Exhaustive sweeps let the search cross flat
    plateaus that defeat purely local moves.
    """
    z = z0.copy()
    f_z = _guard(objective, z)
    for _ in range(max_passes):
        improved = False
        for pos, coord in enumerate(free):
            if objective.budget.exhausted:
                return z, f_z
            feature = schema.features[coord]
            lo, hi = feature.effective_bounds()
            if feature.kind == "categorical":
                candidates = np.arange(int(lo), int(hi) + 1, dtype=np.float64)
            elif feature.kind == "count":
                candidates = _count_candidates(z[pos], lo, hi, scales[pos])
            else:
                z_new, f_new = _line_search(objective, z, pos, lo, hi, scales[pos], f_z)
                if f_new < f_z - 1e-15:
                    z, f_z = z_new, f_new
                    improved = True
                continue
            best_v, best_f = z[pos], f_z
            for v in candidates:
                if v == z[pos]:
                    continue
                trial = z.copy()
                trial[pos] = v
                f_t = _guard(objective, trial)
                if f_t < best_f - 1e-15:
                    best_v, best_f = v, f_t
            if best_v != z[pos]:
                z = z.copy()
                z[pos] = best_v
                f_z = best_f
                improved = True
        if not improved:
            break
    return z, f_z


def _count_candidates(current: float, lo: float, hi: float, scale: float) -> np.ndarray:
    lo_i = int(np.ceil(lo)) if np.isfinite(lo) else int(round(current - 8 * max(scale, 1.0)))
    hi_i = int(np.floor(hi)) if np.isfinite(hi) else int(round(current + 8 * max(scale, 1.0)))
    if hi_i - lo_i <= 4096:
        return np.arange(lo_i, hi_i + 1, dtype=np.float64)
    coarse = np.unique(np.round(np.linspace(lo_i, hi_i, 33)))
    local = np.arange(round(current) - 8, round(current) + 9)
    cand = np.unique(np.concatenate([coarse, local]))
    return cand[(cand >= lo_i) & (cand <= hi_i)].astype(np.float64)


def _line_search(objective: ProjectedObjective, z: np.ndarray, pos: int,
                 lo: float, hi: float, scale: float, f_current: float,
                 n_coarse: int = 17) -> tuple[np.ndarray, float]:
    """Coarse scan over a window (expanding while the edge wins), then refine."""
    width = 4.0 * max(scale, 1e-8)
    for _ in range(10):
        a = max(lo, z[pos] - width)
        b = min(hi, z[pos] + width)
        grid = np.linspace(a, b, n_coarse)
        best_v, best_f = z[pos], f_current
        for v in grid:
            trial = z.copy()
            trial[pos] = v
            f_t = _guard(objective, trial)
            if f_t < best_f - 1e-15:
                best_v, best_f = v, f_t
        at_edge = (abs(best_v - a) < 1e-12 and a > lo) or (abs(best_v - b) < 1e-12 and b < hi)
        if not at_edge:
            break
        width *= 4.0
    # golden-section refinement around the coarse winner
    step = (b - a) / (n_coarse - 1) if b > a else 0.0
    ga, gb = max(lo, best_v - step), min(hi, best_v + step)
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = gb - invphi * (gb - ga)
    e = ga + invphi * (gb - ga)
    trial = z.copy()
    trial[pos] = c
    f_c = _guard(objective, trial)
    trial = z.copy()
    trial[pos] = e
    f_e = _guard(objective, trial)
    for _ in range(24):
        if objective.budget.exhausted or gb - ga < 1e-10:
            break
        if f_c < f_e:
            gb, e, f_e = e, c, f_c
            c = gb - invphi * (gb - ga)
            trial = z.copy()
            trial[pos] = c
            f_c = _guard(objective, trial)
        else:
            ga, c, f_c = c, e, f_e
            e = ga + invphi * (gb - ga)
            trial = z.copy()
            trial[pos] = e
            f_e = _guard(objective, trial)
    for v, f_v in ((c, f_c), (e, f_e)):
        if f_v < best_f - 1e-15:
            best_v, best_f = v, f_v
    out = z.copy()
    out[pos] = best_v
    return out, best_f


def fd_gradient_descent(objective: ProjectedObjective, z0: np.ndarray,
                        scales: np.ndarray, step: float = 0.1,
                        h: float = 1e-5) -> tuple[np.ndarray, float]:
    """Projected descent along a central-difference gradient estimate."""
    z = z0.copy()
    f_z = _guard(objective, z)
    alpha = step
    m = z.shape[0]
    while not objective.budget.exhausted:
        grad = np.zeros(m)
        for i in range(m):
            hp = h * max(scales[i], 1e-6)
            zp, zm = z.copy(), z.copy()
            zp[i] += hp
            zm[i] -= hp
            grad[i] = (_guard(objective, zp) - _guard(objective, zm)) / (2 * hp)
        norm = float(np.linalg.norm(grad))
        if norm < 1e-12:
            break
        trial = z - alpha * scales * grad / norm
        f_t = _guard(objective, trial)
        if f_t < f_z - 1e-15:
            z, f_z = trial, f_t
            alpha = min(alpha * 1.5, 10.0 * step)
        else:
            alpha *= 0.5
            if alpha < 1e-8:
                break
    return z, f_z


def choose_optimizer(schema: Schema, free: np.ndarray) -> str:
    """Default routing: simplex for small all-continuous problems, otherwise CD."""
    kinds = [schema.features[int(i)].kind for i in free]
    if any(k in ("categorical", "count") for k in kinds):
        return "coordinate_descent"
    return "nelder_mead" if len(free) <= 10 else "coordinate_descent"


OPTIMIZERS = ("nelder_mead", "coordinate_descent", "fd_gradient_descent")


def run_inner(name: str, objective: ProjectedObjective, z0: np.ndarray,
              schema: Schema, free: np.ndarray, scales: np.ndarray,
              step: float | None = None) -> tuple[np.ndarray, float]:
    if name == "nelder_mead":
        all_lo, all_hi = schema.bounds_arrays()
        lows, highs = all_lo[free], all_hi[free]
        steps = 0.5 * np.maximum(scales, 1e-3)
        widths = highs - lows
        finite = np.isfinite(widths)
        steps[finite] = np.minimum(steps[finite], 0.25 * widths[finite])
        return nelder_mead(objective, z0, steps, lows, highs)
    if name == "coordinate_descent":
        return coordinate_descent(objective, z0, schema, free, scales)
    if name == "fd_gradient_descent":
        return fd_gradient_descent(objective, z0, scales, step=step if step else 0.1)
    raise ConfigError(f"unknown inner optimizer {name!r} (expected one of {OPTIMIZERS})")
