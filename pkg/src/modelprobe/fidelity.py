"""Surrogate validity diagnostics: where is an explanation a trustworthy model?

Radii are measured in scale units (one unit = one robust spread per feature,
taken from dataset MAD when available), so profiles are comparable across
datasets. Agreement between the black box f and a surrogate g is the median
absolute residual normalized by the interquartile range of f over the region
for score models, and the label-match rate for classifiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attribution import BaselineConfig, Scheme, SurrogateExplanation, attribute
from .errors import ConfigError
from .models import Model, ScalarView
from .schema import Dataset, Schema


@dataclass(frozen=True)
class RegionSpec:
    """Uniform sampling box [center +/- radius * scale] clipped to schema bounds.

    Categorical features are resampled uniformly over their categories with
    probability min(1, radius); count features are rounded to integers.
    """

    schema: Schema
    center: np.ndarray
    radius: float
    n_samples: int
    seed: int
    scales: np.ndarray

    @staticmethod
    def around(schema: Schema, center, radius: float, n_samples: int, seed: int,
               dataset: Dataset | None = None, scales=None) -> "RegionSpec":
        point = schema.validate_point(center)
        if scales is None:
            scales = dataset.effective_scale() if dataset is not None else np.ones(schema.dimension)
        return RegionSpec(
            schema=schema, center=point, radius=float(radius),
            n_samples=int(n_samples), seed=int(seed),
            scales=np.asarray(scales, dtype=np.float64),
        )

    def __post_init__(self):
        if self.radius < 0:
            raise ConfigError("radius must be >= 0")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if np.any(self.scales <= 0):
            raise ConfigError("scales must be positive")

    def sample(self, rng: np.random.Generator | None = None) -> np.ndarray:
        rng = rng if rng is not None else np.random.default_rng(self.seed)
        d = self.schema.dimension
        half = self.radius * self.scales
        lows, highs = self.schema.bounds_arrays()
        a = np.maximum(self.center - half, lows)
        b = np.minimum(self.center + half, highs)
        X = rng.uniform(a, b, size=(self.n_samples, d))
        for i, f in enumerate(self.schema.features):
            if f.kind == "categorical":
                flip = rng.random(self.n_samples) < min(1.0, self.radius)
                draws = rng.integers(0, len(f.categories), size=self.n_samples)
                X[:, i] = np.where(flip, draws, self.center[i])
            elif f.kind == "count":
                X[:, i] = np.clip(np.round(X[:, i]), a[i], b[i])
        return X


def _surrogate_values(explanation: SurrogateExplanation, P: np.ndarray) -> np.ndarray:
    return explanation.predict_many(P)


def _agreement(model: Model, explanation: SurrogateExplanation,
               region: RegionSpec, rng: np.random.Generator | None = None) -> float:
    P = region.sample(rng)
    view = ScalarView.resolve(model, region.center, explanation.class_index)
    f_vals = view.many(P)
    g_vals = _surrogate_values(explanation, P)
    if model.output_kind == "class_probabilities":
        # One-vs-rest on the explained class at the 0.5 decision threshold.
        return float(np.mean((f_vals >= 0.5) == (g_vals >= 0.5)))
    resid = float(np.median(np.abs(f_vals - g_vals)))
    if resid <= 1e-12:  # double-precision zero: exact at this radius
        return 1.0
    q75, q25 = np.percentile(f_vals, [75, 25])
    scale = max(float(q75 - q25), 1e-6)
    return float(min(1.0, max(0.0, 1.0 - resid / scale)))


def agreement_at(model: Model, explanation: SurrogateExplanation,
                 region: RegionSpec) -> float:
    """Agreement in [0, 1] between model and surrogate over a sampled region."""
    return _agreement(model, explanation, region)


@dataclass(frozen=True)
class ValidityProfile:
    radii: tuple[float, ...]
    agreement: tuple[float, ...]
    threshold: float
    validity_radius: float | None

    def to_document(self, n_samples: int, seed: int) -> dict:
        return {
            "radii": list(self.radii),
            "agreement": list(self.agreement),
            "threshold": self.threshold,
            "validity_radius": self.validity_radius,
            "n_samples": n_samples,
            "seed": seed,
        }

    def to_csv(self) -> str:
        lines = ["radius,agreement"]
        lines += [f"{r!r},{a!r}" for r, a in zip(self.radii, self.agreement)]
        return "\n".join(lines) + "\n"


def validity_profile(model: Model, explanation: SurrogateExplanation, center,
                     radii, threshold: float, n_samples: int, seed: int,
                     dataset: Dataset | None = None, scales=None) -> ValidityProfile:
    """Agreement per radius, plus the largest prefix radius staying above threshold.

    Each radius gets an independent seeded draw. The validity radius is the
    largest tested radius r such that every tested radius up to and including
    r meets the threshold; None when the smallest already fails.
    """
    radii = [float(r) for r in radii]
    if not radii or any(b < a for a, b in zip(radii, radii[1:])):
        raise ConfigError("radii must be a non-empty ascending list")
    agreements = []
    for i, r in enumerate(radii):
        region = RegionSpec.around(
            model.schema, center, r, n_samples, seed, dataset=dataset, scales=scales
        )
        # independent stream per radius, all derived from the caller's seed
        rng = np.random.default_rng([seed, i])
        agreements.append(_agreement(model, explanation, region, rng))
    return ValidityProfile(
        radii=tuple(radii),
        agreement=tuple(agreements),
        threshold=float(threshold),
        validity_radius=_prefix_radius(radii, agreements, threshold),
    )


def _prefix_radius(radii, agreements, threshold) -> float | None:
    best = None
    for r, a in zip(radii, agreements):
        if a >= threshold:
            best = r
        else:
            break
    return best


ANALOGY_CLASSES = ("positive", "negative", "neutral")


@dataclass(frozen=True)
class FeatureAnalogy:
    name: str
    classification: str
    effect_correlation: float
    n_effective: int


@dataclass(frozen=True)
class AnalogyReport:
    features: tuple[FeatureAnalogy, ...]
    tau_plus: float
    tau_minus: float
    min_samples: int

    def to_document(self, seed: int) -> dict:
        return {
            "features": [
                {
                    "name": f.name,
                    "classification": f.classification,
                    "effect_correlation": f.effect_correlation,
                    "n_effective": f.n_effective,
                }
                for f in self.features
            ],
            "tau_plus": self.tau_plus,
            "tau_minus": self.tau_minus,
            "min_samples": self.min_samples,
            "seed": seed,
        }


def classify_analogies(model: Model, explanation: SurrogateExplanation,
                       region: RegionSpec, tau_plus: float = 0.5,
                       tau_minus: float = 0.0, min_samples: int = 30,
                       noise_floor: float = 1e-9,
                       delta_fraction: float = 0.25) -> AnalogyReport:
    """Classify each feature's surrogate behaviour against the model's.

    For feature k, paired perturbations (p, p + delta e_k) yield empirical
    effects Delta f and surrogate effects Delta g; their Pearson correlation
    (Fisher-z 95% interval) decides: positive when the lower bound clears
    tau_plus, negative when the upper bound sits below tau_minus, neutral
    otherwise or when evidence is too thin. Features where both effects are
    quiet (below the noise floor on >= 95% of pairs) count as positive: the
    surrogate and the model agree there is nothing to see.
    """
    schema = model.schema
    view = ScalarView.resolve(model, region.center, explanation.class_index)
    lows, highs = schema.bounds_arrays()
    reports = []
    for k, feature in enumerate(schema.features):
        rng = np.random.default_rng([region.seed, 7001 + k])
        P = region.sample(rng)
        n = P.shape[0]
        P2 = P.copy()
        if feature.kind == "categorical":
            n_cat = len(feature.categories)
            shift = rng.integers(1, n_cat, size=n)
            P2[:, k] = np.mod(P[:, k] + shift, n_cat)
        else:
            delta = delta_fraction * region.radius * region.scales[k]
            if feature.kind == "count":
                delta = max(1.0, round(delta))
            # Fixed magnitude, random sign (flipped where it would leave the
            # bounds). Varying the direction keeps the effect pairs
            # non-constant, so the correlation below is defined even for
            # exactly linear models.
            step = np.where(rng.random(n) < 0.5, delta, -delta)
            step = np.where((step > 0) & (P[:, k] + delta > highs[k]), -delta, step)
            step = np.where((step < 0) & (P[:, k] - delta < lows[k]), delta, step)
            P2[:, k] = np.clip(P[:, k] + step, lows[k], highs[k])
        df = view.many(P2) - view.many(P)
        dg = _surrogate_values(explanation, P2) - _surrogate_values(explanation, P)
        quiet = (np.abs(df) < noise_floor) & (np.abs(dg) < noise_floor)
        informative = ~quiet
        n_eff = int(informative.sum())
        if n < min_samples:
            reports.append(FeatureAnalogy(feature.name, "neutral", 0.0, n_eff))
            continue
        if quiet.mean() >= 0.95:
            reports.append(FeatureAnalogy(feature.name, "positive", 1.0, n_eff))
            continue
        r = _pearson(df[informative], dg[informative])
        if n_eff < min_samples or n_eff < 4:
            reports.append(FeatureAnalogy(feature.name, "neutral", r, n_eff))
            continue
        lo, hi = _fisher_interval(r, n_eff)
        if lo > tau_plus:
            cls = "positive"
        elif hi < tau_minus:
            cls = "negative"
        else:
            cls = "neutral"
        reports.append(FeatureAnalogy(feature.name, cls, r, n_eff))
    return AnalogyReport(
        features=tuple(reports),
        tau_plus=tau_plus,
        tau_minus=tau_minus,
        min_samples=min_samples,
    )


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    if a.size < 2:
        return 0.0
    sa, sb = a.std(), b.std()
    if sa <= 1e-15 or sb <= 1e-15:
        return 0.0
    return float(np.clip(np.corrcoef(a, b)[0, 1], -1.0, 1.0))


def _fisher_interval(r: float, n: int, z_crit: float = 1.959963984540054):
    r = min(max(r, -0.9999999), 0.9999999)
    z = math.atanh(r)
    se = 1.0 / math.sqrt(n - 3)
    return math.tanh(z - z_crit * se), math.tanh(z + z_crit * se)


@dataclass(frozen=True)
class DivergenceMatrix:
    """Pairwise normalized L1 distances between explanation weight vectors."""

    labels: tuple[str, ...]
    divergence: np.ndarray          # NaN marks failed cells
    argmax_agreement: np.ndarray    # -1 absent, 0 disagree, 1 agree
    argmax_features: tuple[str | None, ...]
    errors: dict

    def to_document(self) -> dict:
        div = [
            [None if math.isnan(v) else float(v) for v in row]
            for row in self.divergence
        ]
        agree = [
            [None if v < 0 else bool(v) for v in row]
            for row in self.argmax_agreement
        ]
        return {
            "labels": list(self.labels),
            "divergence": div,
            "argmax_agreement": agree,
            "argmax_features": list(self.argmax_features),
            "errors": {k: v for k, v in self.errors.items()},
        }


def normalized_l1(a: np.ndarray, b: np.ndarray) -> float:
    num = float(np.abs(a - b).sum())
    den = max(float(np.abs(a).sum()), float(np.abs(b).sum()), 1e-12)
    return num / den


def argmax_feature(schema: Schema, weights: np.ndarray) -> str:
    return schema.features[int(np.argmax(np.abs(weights)))].name


def compare_schemes(model: Model, x, combos: list[tuple[Scheme, BaselineConfig | None]],
                    class_index: int | None = None) -> DivergenceMatrix:
    """Cross-compare attribution outputs produced by different configurations.

    Each combo is computed independently; failures mark their row/column as
    absent instead of failing the whole comparison.
    """
    if len(combos) < 2:
        raise ConfigError("need at least 2 (scheme, baseline) combinations")
    labels = []
    weights: list[np.ndarray | None] = []
    argmaxes: list[str | None] = []
    errors: dict[str, str] = {}
    for scheme, baseline in combos:
        label = scheme.kind
        if baseline is not None:
            label += f"@{baseline.strategy}"
        if label in labels:
            label += f"#{labels.count(label) + sum(1 for l in labels if l.startswith(label + '#'))}"
        labels.append(label)
        try:
            expl = attribute(model, x, scheme, baseline, class_index=class_index)
            weights.append(expl.weights)
            argmaxes.append(argmax_feature(model.schema, expl.weights))
        except Exception as exc:  # failed cells are data, not a crash
            weights.append(None)
            argmaxes.append(None)
            errors[label] = str(exc)
    m = len(combos)
    div = np.full((m, m), np.nan)
    agree = np.full((m, m), -1, dtype=np.int8)
    for i in range(m):
        if weights[i] is None:
            continue
        div[i, i] = 0.0
        agree[i, i] = 1
        for j in range(i + 1, m):
            if weights[j] is None:
                continue
            v = normalized_l1(weights[i], weights[j])
            div[i, j] = div[j, i] = v
            same = 1 if argmaxes[i] == argmaxes[j] else 0
            agree[i, j] = agree[j, i] = same
    return DivergenceMatrix(
        labels=tuple(labels),
        divergence=div,
        argmax_agreement=agree,
        argmax_features=tuple(argmaxes),
        errors=errors,
    )
