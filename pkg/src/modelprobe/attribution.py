"""Local linear attributions over the on/off contrast cube, plus gradient sensitivity.

Every binarized scheme shares one geometry: fix an anchor point x and a
baseline b, and consider the 2^d vertices where each feature independently
keeps its original value (bit 1) or is substituted by the baseline value
(bit 0). The schemes differ only in which vertices they look at and how they
weight them:

- edge:     the d single-flip edges touching the anchor vertex.
- shapley:  marginal contributions averaged over feature orderings
            (subset-size weighted average over all edges).
- banzhaf:  the unweighted mean over all edges in each direction.
- lime:     a kernel-weighted least-squares fit over sampled vertices.

Continuous features are never fractionally interpolated here: a bit selects
either x_k or b_k, exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ExactLimitExceeded, SchemaViolation
from .models import Model, ScalarView, gradient
from .schema import Dataset, Schema

EXACT_LIMIT = 16

BASELINE_STRATEGIES = ("zero", "reference", "dataset_median", "dataset_mean")


@dataclass(frozen=True)
class BaselineConfig:
    """A baseline strategy together with its materialized point."""

    strategy: str
    resolved: np.ndarray

    @staticmethod
    def zero(schema: Schema) -> "BaselineConfig":
        values = np.zeros(schema.dimension)
        for f in schema.features:
            lo, hi = f.effective_bounds()
            if lo > 0.0 or hi < 0.0:
                raise ConfigError(
                    f"zero baseline invalid: feature {f.name!r} bounds [{lo}, {hi}] "
                    "exclude 0; use a reference baseline instead"
                )
        return BaselineConfig("zero", schema.validate_point(values))

    @staticmethod
    def reference(schema: Schema, point) -> "BaselineConfig":
        return BaselineConfig("reference", schema.point(point))

    @staticmethod
    def dataset_median(dataset: Dataset) -> "BaselineConfig":
        return BaselineConfig(
            "dataset_median", dataset.schema.project(dataset.stats.median)
        )

    @staticmethod
    def dataset_mean(dataset: Dataset) -> "BaselineConfig":
        return BaselineConfig("dataset_mean", dataset.schema.project(dataset.stats.mean))

    def to_document(self, schema: Schema) -> dict:
        return {
            "strategy": self.strategy,
            "values": [float(v) for v in self.resolved],
        }


def resolve_baseline(schema: Schema, strategy: str, reference=None,
                     dataset: Dataset | None = None) -> BaselineConfig:
    if strategy == "zero":
        return BaselineConfig.zero(schema)
    if strategy == "reference":
        if reference is None:
            raise ConfigError("reference baseline needs a reference point")
        return BaselineConfig.reference(schema, reference)
    if strategy in ("dataset_median", "dataset_mean"):
        if dataset is None:
            raise ConfigError(f"{strategy} baseline needs a dataset")
        maker = BaselineConfig.dataset_median if strategy == "dataset_median" else BaselineConfig.dataset_mean
        return maker(dataset)
    raise ConfigError(
        f"unknown baseline strategy {strategy!r} (expected one of {BASELINE_STRATEGIES})"
    )


def materialize(bits, x, baseline) -> np.ndarray:
    """Vertex of the contrast cube: value_k = x_k where bit 1, baseline_k where 0."""
    bits = np.asarray(bits)
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(baseline, dtype=np.float64)
    if bits.shape != x.shape or x.shape != b.shape:
        raise SchemaViolation(
            f"pattern/point/baseline dimensions differ: {bits.shape}, {x.shape}, {b.shape}"
        )
    return np.where(bits.astype(bool), x, b)


@dataclass(frozen=True)
class Scheme:
    """Attribution scheme identifier plus its sampling parameters."""

    kind: str
    n: int | None = None          # permutations (shapley) or samples (banzhaf/lime)
    sigma: float | None = None    # lime kernel width
    seed: int | None = None

    def to_document(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "shapley_sampled":
            doc["n_permutations"] = self.n
        elif self.kind == "banzhaf_sampled":
            doc["n_samples"] = self.n
        elif self.kind == "lime_kernel":
            doc["n_samples"] = self.n
            doc["kernel_width"] = self.sigma
        return doc


@dataclass(frozen=True)
class SurrogateExplanation:
    """A fitted local linear model: per-feature weights plus its provenance.

    ``mapping`` records how the surrogate reads an arbitrary point p:
    ``binary_cube`` projects p onto contrast bits (bit 1 when p_k is at least
    as close to x_k as to b_k), ``raw`` multiplies the weights into p itself.
    """

    schema: Schema
    anchor: np.ndarray
    weights: np.ndarray
    intercept: float
    scheme: Scheme
    baseline: BaselineConfig | None
    mapping: str  # "binary_cube" | "raw"
    diagnostics: dict = field(default_factory=dict)
    class_index: int | None = None

    def pattern_of(self, points: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=np.float64))
        x = self.anchor
        b = self.baseline.resolved
        return (np.abs(P - x) <= np.abs(P - b)).astype(np.float64)

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.mapping == "raw":
            return self.intercept + P @ self.weights
        return self.intercept + self.pattern_of(P) @ self.weights

    def predict(self, point) -> float:
        return float(self.predict_many(np.asarray(point)[None, :])[0])

    def to_document(self, seed: int | None = None) -> dict:
        from . import __version__

        baseline_doc = (
            {"strategy": "none", "values": None}
            if self.baseline is None
            else self.baseline.to_document(self.schema)
        )
        return {
            "scheme": self.scheme.to_document(),
            "baseline": baseline_doc,
            "anchor": [float(v) for v in self.anchor],
            "weights": [float(w) for w in self.weights],
            "intercept": float(self.intercept),
            "diagnostics": dict(self.diagnostics),
            "engine_version": __version__,
            "seed": seed if seed is not None else self.scheme.seed,
        }


class _CubeOracle:
    """Memoized scalar evaluations over contrast patterns (one per distinct mask)."""

    def __init__(self, view: ScalarView, x: np.ndarray, baseline: np.ndarray):
        self.view = view
        self.x = x
        self.b = baseline
        self.d = x.shape[0]
        self._cache: dict[int, float] = {}

    def _point(self, mask: int) -> np.ndarray:
        bits = np.array([(mask >> k) & 1 for k in range(self.d)], dtype=bool)
        return np.where(bits, self.x, self.b)

    def values(self, masks) -> np.ndarray:
        missing = [m for m in masks if m not in self._cache]
        if missing:
            pts = np.stack([self._point(m) for m in missing])
            vals = self.view.many(pts)
            for m, v in zip(missing, vals):
                self._cache[int(m)] = float(v)
        return np.array([self._cache[int(m)] for m in masks])

    def value(self, mask: int) -> float:
        return float(self.values([mask])[0])

    @property
    def n_evaluations(self) -> int:
        return len(self._cache)


def _prepare(model: Model, x, baseline: BaselineConfig, class_index):
    anchor = model.schema.validate_point(x)
    if baseline.resolved.shape != anchor.shape:
        raise SchemaViolation("baseline dimension does not match anchor")
    view = ScalarView.resolve(model, anchor, class_index)
    return anchor, view


def edge_attribution(model: Model, x, baseline: BaselineConfig,
                     class_index: int | None = None) -> SurrogateExplanation:
    """Fit only the single-flip edges touching the anchor vertex.

    weight_k = f(x) - f(x with feature k switched to the baseline). Exactly
    d+1 model evaluations: the anchor and its d flips. The intercept is the
    fitted plane's value at the all-baseline vertex, f(x) - sum(w); it equals
    f(baseline) exactly whenever the model is additive over the cube, and the
    surrogate reproduces f(x) at the anchor by construction.
    """
    anchor, view = _prepare(model, x, baseline, class_index)
    d = anchor.shape[0]
    full = (1 << d) - 1
    oracle = _CubeOracle(view, anchor, baseline.resolved)
    masks = [full] + [full ^ (1 << k) for k in range(d)]
    vals = oracle.values(masks)
    f_x = vals[0]
    weights = f_x - vals[1 : d + 1]
    return SurrogateExplanation(
        schema=model.schema,
        anchor=anchor,
        weights=weights,
        intercept=float(f_x - weights.sum()),
        scheme=Scheme(kind="edge_from_data"),
        baseline=baseline,
        mapping="binary_cube",
        diagnostics={"n_evaluations": oracle.n_evaluations},
        class_index=view.class_index,
    )


def _mask_popcounts(d: int) -> np.ndarray:
    return np.array([int(m).bit_count() for m in range(1 << d)])


def _exact_masks(model, x, baseline, class_index, exact_limit):
    anchor, view = _prepare(model, x, baseline, class_index)
    d = anchor.shape[0]
    if d > exact_limit:
        raise ExactLimitExceeded(
            f"exact enumeration needs 2^{d} evaluations; with dimension {d} > "
            f"{exact_limit}, use the sampled mode instead"
        )
    oracle = _CubeOracle(view, anchor, baseline.resolved)
    values = oracle.values(range(1 << d))
    return anchor, view, oracle, values, d


def shapley_attribution(model: Model, x, baseline: BaselineConfig,
                        mode: str = "exact", n_permutations: int | None = None,
                        seed: int | None = None, exact_limit: int = EXACT_LIMIT,
                        class_index: int | None = None) -> SurrogateExplanation:
    """Ordering-averaged marginal contributions over the contrast cube.

    Exact mode enumerates all subsets with weights |S|!(d-|S|-1)!/d!, so the
    efficiency identity sum(phi) = f(x) - f(baseline) holds to float
    round-off. Sampled mode draws feature orderings (each one also applied
    reversed, which cancels a large share of the variance at no extra model
    calls) and averages the observed marginals.
    """
    if mode == "exact":
        anchor, view, oracle, values, d = _exact_masks(
            model, x, baseline, class_index, exact_limit
        )
        pop = _mask_popcounts(d)
        fact = [math.factorial(i) for i in range(d + 1)]
        subset_w = np.array(
            [fact[s] * fact[d - s - 1] / fact[d] for s in range(d)]
        )
        masks = np.arange(1 << d)
        phi = np.empty(d)
        for k in range(d):
            without = masks[(masks >> k) & 1 == 0]
            gain = values[without | (1 << k)] - values[without]
            phi[k] = float(subset_w[pop[without]] @ gain)
        scheme = Scheme(kind="shapley_exact")
        diagnostics = {"n_evaluations": oracle.n_evaluations}
        intercept = float(values[0])
    elif mode == "sampled":
        if n_permutations is None or n_permutations < 1:
            raise ConfigError("sampled mode needs n_permutations >= 1")
        if seed is None:
            raise ConfigError("sampled mode needs a fixed seed")
        anchor, view = _prepare(model, x, baseline, class_index)
        d = anchor.shape[0]
        oracle = _CubeOracle(view, anchor, baseline.resolved)
        rng = np.random.default_rng(seed)
        phi = np.zeros(d)
        n_draws = (n_permutations + 1) // 2
        count = 0
        for _ in range(n_draws):
            perm = rng.permutation(d)
            for order in (perm, perm[::-1]):
                mask = 0
                prev = oracle.value(0)
                for k in order:
                    mask |= 1 << int(k)
                    cur = oracle.value(mask)
                    phi[k] += cur - prev
                    prev = cur
                count += 1
        phi /= count
        scheme = Scheme(kind="shapley_sampled", n=n_permutations, seed=seed)
        diagnostics = {
            "n_evaluations": oracle.n_evaluations,
            "n_permutations_used": count,
        }
        intercept = oracle.value(0)
    else:
        raise ConfigError(f"unknown shapley mode {mode!r}")
    return SurrogateExplanation(
        schema=model.schema,
        anchor=anchor,
        weights=phi,
        intercept=intercept,
        scheme=scheme,
        baseline=baseline,
        mapping="binary_cube",
        diagnostics=diagnostics,
        class_index=view.class_index,
    )


def banzhaf_attribution(model: Model, x, baseline: BaselineConfig,
                        mode: str = "exact", n_samples: int | None = None,
                        seed: int | None = None, exact_limit: int = EXACT_LIMIT,
                        class_index: int | None = None) -> SurrogateExplanation:
    """Unweighted mean over all cube edges in each feature's direction.

    phi_k = 2^-(d-1) * sum over subsets S not containing k of
    f(S u {k}) - f(S). Sampled mode averages the flip pair over uniformly
    drawn patterns instead.
    """
    if mode == "exact":
        anchor, view, oracle, values, d = _exact_masks(
            model, x, baseline, class_index, exact_limit
        )
        masks = np.arange(1 << d)
        phi = np.empty(d)
        for k in range(d):
            without = masks[(masks >> k) & 1 == 0]
            phi[k] = float(np.mean(values[without | (1 << k)] - values[without]))
        scheme = Scheme(kind="banzhaf_exact")
        diagnostics = {"n_evaluations": oracle.n_evaluations}
        intercept = float(values[0])
    elif mode == "sampled":
        if n_samples is None or n_samples < 1:
            raise ConfigError("sampled mode needs n_samples >= 1")
        if seed is None:
            raise ConfigError("sampled mode needs a fixed seed")
        anchor, view = _prepare(model, x, baseline, class_index)
        d = anchor.shape[0]
        oracle = _CubeOracle(view, anchor, baseline.resolved)
        rng = np.random.default_rng(seed)
        draws = rng.integers(0, 1 << d, size=n_samples, dtype=np.uint64)
        phi = np.zeros(d)
        for k in range(d):
            on = [int(m) | (1 << k) for m in draws]
            off = [int(m) & ~(1 << k) for m in draws]
            phi[k] = float(np.mean(oracle.values(on) - oracle.values(off)))
        scheme = Scheme(kind="banzhaf_sampled", n=n_samples, seed=seed)
        diagnostics = {"n_evaluations": oracle.n_evaluations}
        intercept = oracle.value(0)
    else:
        raise ConfigError(f"unknown banzhaf mode {mode!r}")
    return SurrogateExplanation(
        schema=model.schema,
        anchor=anchor,
        weights=phi,
        intercept=intercept,
        scheme=scheme,
        baseline=baseline,
        mapping="binary_cube",
        diagnostics=diagnostics,
        class_index=view.class_index,
    )


def default_kernel_width(d: int) -> float:
    return 0.75 * math.sqrt(d)


def lime_fit(model: Model, x, baseline: BaselineConfig, n_samples: int,
             sigma: float | None = None, seed: int = 0,
             class_index: int | None = None) -> SurrogateExplanation:
    """Kernel-weighted least-squares fit of a linear model over cube vertices.

    Vertices are weighted by exp(-hamming(pattern, all-ones)^2 / sigma^2), so
    vertices near the anchor dominate the fit. When n_samples covers the whole
    cube (n >= 2^d for manageable d) the vertex set is enumerated exactly
    instead of sampled, which makes small-d results deterministic regardless
    of seed. Rank-deficient fits fall back to a tiny ridge penalty, flagged in
    the diagnostics.
    """
    anchor, view = _prepare(model, x, baseline, class_index)
    d = anchor.shape[0]
    if n_samples < d + 1:
        raise ConfigError(f"lime needs n_samples >= d+1 = {d + 1}, got {n_samples}")
    if sigma is None:
        sigma = default_kernel_width(d)
    if sigma <= 0:
        raise ConfigError("kernel width sigma must be positive")
    enumerated = d <= 20 and n_samples >= (1 << d)
    rng = np.random.default_rng(seed)
    if enumerated:
        masks = np.arange(1 << d)
        Z = ((masks[:, None] >> np.arange(d)) & 1).astype(np.float64)
    else:
        Z = rng.integers(0, 2, size=(n_samples, d)).astype(np.float64)
    uniq, inverse = np.unique(Z, axis=0, return_inverse=True)
    points = uniq * anchor + (1.0 - uniq) * baseline.resolved
    uniq_vals = view.many(points)
    y = uniq_vals[inverse]
    hamming = d - Z.sum(axis=1)
    w = np.exp(-(hamming ** 2) / (sigma ** 2))
    X = np.hstack([np.ones((Z.shape[0], 1)), Z])
    sw = np.sqrt(w)
    Xw = X * sw[:, None]
    yw = y * sw
    ridge_fallback = False
    XtX = Xw.T @ Xw
    Xty = Xw.T @ yw
    if np.linalg.matrix_rank(Xw) < d + 1:
        ridge_fallback = True
        beta = np.linalg.solve(XtX + 1e-8 * np.eye(d + 1), Xty)
    else:
        beta = np.linalg.solve(XtX, Xty)
    intercept, weights = float(beta[0]), beta[1:]
    fitted = X @ beta
    wsum = float(w.sum())
    ybar = float((w * y).sum() / wsum)
    ss_res = float((w * (y - fitted) ** 2).sum())
    ss_tot = float((w * (y - ybar) ** 2).sum())
    if ss_tot <= 1e-18:
        r_squared = 1.0 if ss_res <= 1e-18 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    diagnostics = {
        "r_squared": r_squared,
        "n_evaluations": uniq.shape[0],
        "ridge_fallback": ridge_fallback,
        "enumerated": enumerated,
    }
    return SurrogateExplanation(
        schema=model.schema,
        anchor=anchor,
        weights=weights,
        intercept=intercept,
        scheme=Scheme(kind="lime_kernel", n=n_samples, sigma=sigma, seed=seed),
        baseline=baseline,
        mapping="binary_cube",
        diagnostics=diagnostics,
        class_index=view.class_index,
    )


def gradient_attribution(model: Model, x, method: str = "analytic", h: float = 1e-5,
                         class_index: int | None = None, scale=None) -> SurrogateExplanation:
    """Tangent-plane surrogate: weights are the gradient at the anchor.

    The intercept is chosen so the surrogate reproduces f(x) at the anchor;
    no baseline is involved (the fit's domain has size zero).
    """
    anchor = model.schema.validate_point(x)
    view = ScalarView.resolve(model, anchor, class_index)
    weights = gradient(
        model, anchor, method=method, h=h, class_index=view.class_index, scale=scale
    )
    f_x = view(anchor)
    n_evals = 1 + (0 if method == "analytic" else 2 * anchor.shape[0])
    return SurrogateExplanation(
        schema=model.schema,
        anchor=anchor,
        weights=weights,
        intercept=float(f_x - weights @ anchor),
        scheme=Scheme(kind="gradient"),
        baseline=None,
        mapping="raw",
        diagnostics={"n_evaluations": n_evals, "method": method},
        class_index=view.class_index,
    )


def attribute(model: Model, x, scheme: Scheme, baseline: BaselineConfig | None = None,
              class_index: int | None = None,
              exact_limit: int = EXACT_LIMIT) -> SurrogateExplanation:
    """Dispatch an attribution request described by a Scheme value."""
    kind = scheme.kind
    if kind == "gradient":
        method = "analytic" if model.supports_analytic_gradient else "central_difference"
        return gradient_attribution(model, x, method=method, class_index=class_index)
    if baseline is None:
        raise ConfigError(f"scheme {kind!r} needs a baseline")
    if kind == "edge_from_data":
        return edge_attribution(model, x, baseline, class_index=class_index)
    if kind == "shapley_exact":
        return shapley_attribution(
            model, x, baseline, mode="exact", exact_limit=exact_limit,
            class_index=class_index,
        )
    if kind == "shapley_sampled":
        return shapley_attribution(
            model, x, baseline, mode="sampled", n_permutations=scheme.n,
            seed=scheme.seed, class_index=class_index,
        )
    if kind == "banzhaf_exact":
        return banzhaf_attribution(
            model, x, baseline, mode="exact", exact_limit=exact_limit,
            class_index=class_index,
        )
    if kind == "banzhaf_sampled":
        return banzhaf_attribution(
            model, x, baseline, mode="sampled", n_samples=scheme.n, seed=scheme.seed,
            class_index=class_index,
        )
    if kind == "lime_kernel":
        if scheme.n is None:
            raise ConfigError("lime_kernel needs n_samples")
        return lime_fit(
            model, x, baseline, n_samples=scheme.n, sigma=scheme.sigma,
            seed=scheme.seed if scheme.seed is not None else 0, class_index=class_index,
        )
    raise ConfigError(f"unknown attribution scheme {kind!r}")


def scheme_from_document(doc: dict) -> Scheme:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("scheme must be an object with a 'kind'")
    kind = doc["kind"]
    n = doc.get("n_permutations") if kind == "shapley_sampled" else doc.get("n_samples")
    return Scheme(kind=kind, n=n, sigma=doc.get("kernel_width"), seed=doc.get("seed"))
