"""Black-box model zoo and the scoring / gradient operations over it.

The zoo is intentionally minimal: linear (with optional logistic link),
feed-forward MLP, axis-aligned binary tree, ordered rule set, and an external
subprocess model (see ``external.py``). Everything the engine explains goes
through the same deterministic scoring surface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import SchemaViolation, SpecError, UnsupportedMethod
from .schema import Schema, schema_from_documents

OUTPUT_KINDS = ("score", "class_probabilities")
ACTIVATIONS = ("relu", "tanh", "identity")

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class PredictionOutput:
    """A single model response: scalar score or per-class probabilities."""

    score: float | None = None
    probabilities: np.ndarray | None = None
    classes: tuple[str, ...] | None = None
    predicted_class: str | None = None

    @staticmethod
    def from_value(value, classes: tuple[str, ...] | None) -> "PredictionOutput":
        if np.ndim(value) == 0:
            v = float(value)
            if not math.isfinite(v):
                raise SchemaViolation(f"model produced non-finite score {v!r}")
            return PredictionOutput(score=v)
        probs = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(probs)):
            raise SchemaViolation("model produced non-finite probabilities")
        if np.any(probs < -_PROB_TOL) or np.any(probs > 1 + _PROB_TOL):
            raise SchemaViolation(f"probabilities outside [0,1]: {probs.tolist()}")
        if abs(float(probs.sum()) - 1.0) > _PROB_TOL:
            raise SchemaViolation(
                f"probabilities sum to {float(probs.sum())!r}, expected 1 +/- {_PROB_TOL}"
            )
        if classes is None:
            classes = tuple(f"class_{i}" for i in range(len(probs)))
        if len(classes) != len(probs):
            raise SchemaViolation(
                f"{len(probs)} probabilities for {len(classes)} classes"
            )
        # Argmax ties break toward the lowest class index.
        idx = int(np.argmax(probs))
        return PredictionOutput(
            probabilities=probs, classes=classes, predicted_class=classes[idx]
        )

    def to_document(self) -> dict:
        if self.probabilities is None:
            return {"score": self.score}
        return {
            "probabilities": [float(p) for p in self.probabilities],
            "classes": list(self.classes),
            "predicted_class": self.predicted_class,
        }


class Model:
    """Base class: deterministic scoring over a fixed schema."""

    kind: str = "abstract"

    def __init__(self, schema: Schema, output_kind: str, classes: tuple[str, ...] | None):
        if output_kind not in OUTPUT_KINDS:
            raise SpecError(f"unknown output kind {output_kind!r}", locus="output")
        self.schema = schema
        self.output_kind = output_kind
        self.classes = classes

    # -- raw scoring (no schema validation; hot path) -----------------------

    def score_value(self, x: np.ndarray):
        """Scalar score, or probability vector for class models."""
        raise NotImplementedError

    def score_many(self, X: np.ndarray) -> np.ndarray:
        """Vectorized scoring; default falls back to a Python loop."""
        X = np.asarray(X, dtype=np.float64)
        return np.array([self.score_value(x) for x in X])

    # -- validated public surface -------------------------------------------

    def score(self, x) -> PredictionOutput:
        point = self.schema.validate_point(x)
        return PredictionOutput.from_value(self.score_value(point), self.classes)

    def score_batch(self, xs: Sequence) -> list[PredictionOutput]:
        out = []
        for i, x in enumerate(xs):
            try:
                out.append(self.score(x))
            except Exception as exc:
                raise type(exc)(f"row {i}: {exc}") from exc
        return out

    @property
    def supports_analytic_gradient(self) -> bool:
        return False

    def analytic_gradient(self, x: np.ndarray, class_index: int | None = None) -> np.ndarray:
        raise UnsupportedMethod(
            f"analytic gradient is not defined for {self.kind} models; "
            "request central differences instead"
        )


class LinearModel(Model):
    kind = "linear"

    def __init__(self, schema, weights, bias=0.0, link="identity",
                 output_kind="score", classes=None):
        super().__init__(schema, output_kind, classes)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)
        if self.weights.shape != (schema.dimension,):
            raise SpecError(
                f"{self.weights.size} weights for {schema.dimension} features",
                locus="model.weights",
            )
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise SpecError("linear weights/bias must be finite", locus="model.weights")
        if link not in ("identity", "logistic"):
            raise SpecError(f"unknown link {link!r}", locus="model.link")
        self.link = link
        if output_kind == "class_probabilities":
            if link != "logistic":
                raise SpecError(
                    "class_probabilities requires the logistic link", locus="model.link"
                )
            if classes is None or len(classes) != 2:
                raise SpecError(
                    "logistic class model needs exactly 2 classes", locus="model.classes"
                )

    def _raw(self, x: np.ndarray) -> float:
        return float(self.weights @ x + self.bias)

    def score_value(self, x):
        z = self._raw(x)
        if self.link == "logistic":
            p = 1.0 / (1.0 + math.exp(-z))
            if self.output_kind == "class_probabilities":
                return np.array([1.0 - p, p])
            return p
        return z

    def score_many(self, X):
        X = np.asarray(X, dtype=np.float64)
        z = X @ self.weights + self.bias
        if self.link == "logistic":
            p = 1.0 / (1.0 + np.exp(-z))
            if self.output_kind == "class_probabilities":
                return np.stack([1.0 - p, p], axis=1)
            return p
        return z

    @property
    def supports_analytic_gradient(self) -> bool:
        return True

    def analytic_gradient(self, x, class_index=None):
        if self.link == "identity":
            return self.weights.copy()
        p = 1.0 / (1.0 + math.exp(-self._raw(x)))
        grad = p * (1.0 - p) * self.weights
        if self.output_kind == "class_probabilities" and class_index == 0:
            return -grad
        return grad


class MlpModel(Model):
    """Feed-forward layers (W @ h + b, then activation); softmax for class output."""

    kind = "mlp"

    def __init__(self, schema, layers, output_kind="score", classes=None):
        super().__init__(schema, output_kind, classes)
        self.layers = []
        in_dim = schema.dimension
        for li, (W, b, act) in enumerate(layers):
            W = np.asarray(W, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if W.ndim != 2 or W.shape[1] != in_dim:
                raise SpecError(
                    f"layer {li} weights shape {W.shape} incompatible with input {in_dim}",
                    locus=f"model.layers[{li}].weights",
                )
            if b.shape != (W.shape[0],):
                raise SpecError(
                    f"layer {li} bias shape {b.shape} incompatible with {W.shape[0]} units",
                    locus=f"model.layers[{li}].bias",
                )
            if act not in ACTIVATIONS:
                raise SpecError(
                    f"unknown activation {act!r}", locus=f"model.layers[{li}].activation"
                )
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise SpecError("MLP parameters must be finite", locus=f"model.layers[{li}]")
            self.layers.append((W, b, act))
            in_dim = W.shape[0]
        self.out_dim = in_dim
        if output_kind == "score" and self.out_dim != 1:
            raise SpecError(
                f"score MLP must end in one unit, got {self.out_dim}", locus="model.layers"
            )
        if output_kind == "class_probabilities":
            if classes is None:
                raise SpecError("class MLP needs a classes list", locus="model.classes")
            if len(classes) != self.out_dim:
                raise SpecError(
                    f"{self.out_dim} outputs for {len(classes)} classes",
                    locus="model.classes",
                )

    @staticmethod
    def _activate(z: np.ndarray, act: str) -> np.ndarray:
        if act == "relu":
            return np.maximum(z, 0.0)
        if act == "tanh":
            return np.tanh(z)
        return z

    def _forward(self, x: np.ndarray) -> list[np.ndarray]:
        """Returns pre-activations per layer (for backprop)."""
        pre = []
        h = x
        for W, b, act in self.layers:
            z = W @ h + b
            pre.append(z)
            h = self._activate(z, act)
        return pre

    def score_value(self, x):
        h = np.asarray(x, dtype=np.float64)
        for W, b, act in self.layers:
            h = self._activate(W @ h + b, act)
        if self.output_kind == "class_probabilities":
            return _softmax(h)
        return float(h[0])

    def score_many(self, X):
        H = np.asarray(X, dtype=np.float64)
        for W, b, act in self.layers:
            H = self._activate(H @ W.T + b, act)
        if self.output_kind == "class_probabilities":
            Z = H - H.max(axis=1, keepdims=True)
            E = np.exp(Z)
            return E / E.sum(axis=1, keepdims=True)
        return H[:, 0]

    @property
    def supports_analytic_gradient(self) -> bool:
        # relu is not differentiable; such models must request finite differences
        return all(act != "relu" for _, _, act in self.layers)

    def analytic_gradient(self, x, class_index=None):
        if not self.supports_analytic_gradient:
            raise UnsupportedMethod(
                "analytic gradient undefined for relu activations; "
                "request central differences instead"
            )
        # Reverse-mode through the stored pre-activations.
        x = np.asarray(x, dtype=np.float64)
        pre = self._forward(x)
        if self.output_kind == "class_probabilities":
            if class_index is None:
                raise UnsupportedMethod("class model gradient needs a class index")
            p = _softmax(self._activate(pre[-1], self.layers[-1][2]))
            # d p_c / d h_j for softmax over the final activations
            grad_out = p[class_index] * (np.eye(len(p))[class_index] - p)
        else:
            grad_out = np.ones(1)
        g = grad_out
        for (W, b, act), z in zip(reversed(self.layers), reversed(pre)):
            if act == "tanh":
                g = g * (1.0 - np.tanh(z) ** 2)
            g = g @ W
        return g


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


class TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, value=None, feature=None, threshold=None, left=None, right=None):
        self.value = value
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_document(self, schema: Schema) -> dict:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": schema.features[self.feature].name,
            "threshold": self.threshold,
            "left": self.left.to_document(schema),
            "right": self.right.to_document(schema),
        }


class TreeModel(Model):
    """Axis-aligned binary tree; x[feature] <= threshold routes left."""

    kind = "tree"

    def __init__(self, schema, root: TreeNode, output_kind="score", classes=None):
        super().__init__(schema, output_kind, classes)
        self.root = root
        self._validate(root, "model.root")

    def _validate(self, node: TreeNode, locus: str):
        if node.is_leaf:
            leaf = np.atleast_1d(np.asarray(node.value, dtype=np.float64))
            if not np.all(np.isfinite(leaf)):
                raise SpecError("leaf value must be finite", locus=locus)
            return
        if not (0 <= node.feature < self.schema.dimension):
            raise SpecError(
                f"split feature index {node.feature} out of range", locus=locus
            )
        if not math.isfinite(node.threshold):
            raise SpecError("split threshold must be finite", locus=locus)
        self._validate(node.left, locus + ".left")
        self._validate(node.right, locus + ".right")

    def score_value(self, x):
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        if self.output_kind == "class_probabilities":
            return np.asarray(node.value, dtype=np.float64)
        return float(node.value)

    def score_many(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.output_kind == "class_probabilities":
            out = np.empty((X.shape[0], len(self.classes)))
        else:
            out = np.empty(X.shape[0])
        self._fill(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _fill(self, node, X, idx, out):
        if idx.size == 0:
            return
        if node.is_leaf:
            out[idx] = node.value
            return
        mask = X[idx, node.feature] <= node.threshold
        self._fill(node.left, X, idx[mask], out)
        self._fill(node.right, X, idx[~mask], out)

    def max_depth(self) -> int:
        return self.root.depth()


_OPS: dict[str, Callable[[float, float], bool]] = {
    "==": lambda a, b: abs(a - b) <= 1e-12,
    "!=": lambda a, b: abs(a - b) > 1e-12,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}

_VEC_OPS = {
    "==": lambda a, b: np.abs(a - b) <= 1e-12,
    "!=": lambda a, b: np.abs(a - b) > 1e-12,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


@dataclass(frozen=True)
class Predicate:
    feature: int
    op: str
    value: float


@dataclass(frozen=True)
class Rule:
    predicates: tuple[Predicate, ...]
    outcome: float | np.ndarray  # scalar for score models, probability vector otherwise


class RuleSetModel(Model):
    """Ordered rules; the first rule whose conjunction holds decides the output."""

    kind = "rules"

    def __init__(self, schema, rules: Sequence[Rule], output_kind="score", classes=None):
        super().__init__(schema, output_kind, classes)
        if not rules:
            raise SpecError("rule set needs at least one rule", locus="model.rules")
        self.rules = tuple(rules)

    def score_value(self, x):
        for rule in self.rules:
            if all(_OPS[p.op](float(x[p.feature]), p.value) for p in rule.predicates):
                return rule.outcome
        raise SchemaViolation(
            f"no rule matched point {np.asarray(x).tolist()}; add a default rule"
        )

    def score_many(self, X):
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        if self.output_kind == "class_probabilities":
            out = np.empty((n, len(self.classes)))
        else:
            out = np.empty(n)
        remaining = np.ones(n, dtype=bool)
        for rule in self.rules:
            mask = remaining.copy()
            for p in rule.predicates:
                mask &= _VEC_OPS[p.op](X[:, p.feature], p.value)
            out[mask] = rule.outcome
            remaining &= ~mask
        if remaining.any():
            bad = int(np.argmax(remaining))
            raise SchemaViolation(
                f"no rule matched row {bad}: {X[bad].tolist()}; add a default rule"
            )
        return out


# ---------------------------------------------------------------------------
# Gradients
# ---------------------------------------------------------------------------

def gradient(model: Model, x, method: str = "analytic", h: float = 1e-5,
             class_index: int | None = None, scale=None) -> np.ndarray:
    """Sensitivity of the model's scalar view at x.

    ``analytic`` is only defined for linear/MLP models; everything else must
    explicitly request ``central_difference``. ``scale`` optionally stretches
    the step per feature (h_k = h * scale_k), which keeps truncation error
    balanced when features live on very different scales.
    """
    point = model.schema.validate_point(x)
    if method == "analytic":
        if not model.supports_analytic_gradient:
            raise UnsupportedMethod(
                f"analytic gradient is not defined for {model.kind} models; "
                "request central differences instead"
            )
        if model.output_kind == "class_probabilities" and class_index is None:
            probs = np.asarray(model.score_value(point))
            class_index = int(np.argmax(probs))
        return model.analytic_gradient(point, class_index=class_index)
    if method != "central_difference":
        raise UnsupportedMethod(f"unknown gradient method {method!r}")
    if h <= 0:
        raise UnsupportedMethod("central difference step h must be positive")
    view = ScalarView.resolve(model, point, class_index)
    d = model.schema.dimension
    steps = np.full(d, h) if scale is None else h * np.asarray(scale, dtype=np.float64)
    # Probe points may sit just outside declared bounds; the zoo functions are
    # all defined on the full real vector space, so scoring skips validation.
    probes = np.repeat(point[None, :], 2 * d, axis=0)
    for k in range(d):
        probes[2 * k, k] += steps[k]
        probes[2 * k + 1, k] -= steps[k]
    vals = view.many(probes)
    return (vals[0::2] - vals[1::2]) / (2.0 * steps)


@dataclass(frozen=True)
class ScalarView:
    """Scalar lens over a model: the score, or one class's probability."""

    model: Model
    class_index: int | None = None

    @staticmethod
    def resolve(model: Model, anchor=None, class_index: int | None = None) -> "ScalarView":
        if model.output_kind != "class_probabilities":
            return ScalarView(model, None)
        if class_index is None:
            if anchor is None:
                raise UnsupportedMethod(
                    "class-probability model needs a class index or an anchor point"
                )
            probs = np.asarray(model.score_value(np.asarray(anchor, dtype=np.float64)))
            class_index = int(np.argmax(probs))
        if not (0 <= class_index < len(model.classes)):
            raise SchemaViolation(f"class index {class_index} out of range")
        return ScalarView(model, class_index)

    def __call__(self, x: np.ndarray) -> float:
        v = self.model.score_value(x)
        if self.class_index is None:
            return float(v)
        return float(v[self.class_index])

    def many(self, X: np.ndarray) -> np.ndarray:
        V = self.model.score_many(X)
        if self.class_index is None:
            return np.asarray(V, dtype=np.float64)
        return np.asarray(V[:, self.class_index], dtype=np.float64)


# ---------------------------------------------------------------------------
# Model-spec documents
# ---------------------------------------------------------------------------

def load_model(document) -> Model:
    """Build a Model from a model-spec document (JSON text or parsed dict).

    The document layout is defined by schemas/model_spec.schema.json. Errors
    carry a locus pointing at the offending field.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SpecError(
                f"invalid JSON: {exc.msg}", locus=f"line {exc.lineno} column {exc.colno}"
            ) from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise SpecError("model-spec document must be a JSON object", locus="$")
    unknown = set(doc) - {"schema", "model", "output"}
    if unknown:
        raise SpecError(f"unknown top-level fields {sorted(unknown)}", locus="$")
    if "schema" not in doc:
        raise SpecError("missing schema section", locus="schema")
    if "model" not in doc:
        raise SpecError("missing model section", locus="model")
    schema = schema_from_documents(doc["schema"])
    output_kind = doc.get("output", "score")
    if output_kind not in OUTPUT_KINDS:
        raise SpecError(f"unknown output kind {output_kind!r}", locus="output")
    mdoc = doc["model"]
    if not isinstance(mdoc, Mapping):
        raise SpecError("model section must be an object", locus="model")
    mtype = mdoc.get("type")
    builder = _BUILDERS.get(mtype)
    if builder is None:
        raise SpecError(
            f"unknown model type {mtype!r} (expected one of {sorted(_BUILDERS)})",
            locus="model.type",
        )
    return builder(schema, mdoc, output_kind)


def _classes_from(mdoc, output_kind, locus="model.classes"):
    classes = mdoc.get("classes")
    if classes is not None:
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise SpecError("classes must be a list of strings", locus=locus)
        classes = tuple(classes)
    if output_kind == "class_probabilities" and classes is None:
        raise SpecError("class_probabilities output needs a classes list", locus=locus)
    return classes


def _build_linear(schema, mdoc, output_kind):
    if "weights" not in mdoc:
        raise SpecError("linear model needs weights", locus="model.weights")
    return LinearModel(
        schema,
        weights=mdoc["weights"],
        bias=mdoc.get("bias", 0.0),
        link=mdoc.get("link", "identity"),
        output_kind=output_kind,
        classes=_classes_from(mdoc, output_kind),
    )


def _build_mlp(schema, mdoc, output_kind):
    layers_doc = mdoc.get("layers")
    if not isinstance(layers_doc, list) or not layers_doc:
        raise SpecError("mlp model needs a non-empty layers list", locus="model.layers")
    layers = []
    for i, ld in enumerate(layers_doc):
        if not isinstance(ld, Mapping) or "weights" not in ld or "bias" not in ld:
            raise SpecError(
                "layer needs weights and bias", locus=f"model.layers[{i}]"
            )
        layers.append((ld["weights"], ld["bias"], ld.get("activation", "identity")))
    return MlpModel(
        schema, layers, output_kind=output_kind, classes=_classes_from(mdoc, output_kind)
    )


def _tree_node_from(doc, schema, locus):
    if not isinstance(doc, Mapping):
        raise SpecError("tree node must be an object", locus=locus)
    if "value" in doc:
        return TreeNode(value=doc["value"])
    for key in ("feature", "threshold", "left", "right"):
        if key not in doc:
            raise SpecError(f"split node missing {key!r}", locus=locus)
    feat = doc["feature"]
    if isinstance(feat, str):
        try:
            feat = schema.index_of(feat)
        except SchemaViolation as exc:
            raise SpecError(str(exc), locus=f"{locus}.feature") from None
    if not isinstance(feat, int):
        raise SpecError("feature must be an index or name", locus=f"{locus}.feature")
    return TreeNode(
        feature=feat,
        threshold=float(doc["threshold"]),
        left=_tree_node_from(doc["left"], schema, locus + ".left"),
        right=_tree_node_from(doc["right"], schema, locus + ".right"),
    )


def _build_tree(schema, mdoc, output_kind):
    if "root" not in mdoc:
        raise SpecError("tree model needs a root node", locus="model.root")
    root = _tree_node_from(mdoc["root"], schema, "model.root")
    return TreeModel(
        schema, root, output_kind=output_kind, classes=_classes_from(mdoc, output_kind)
    )


def _build_rules(schema, mdoc, output_kind):
    rules_doc = mdoc.get("rules")
    if not isinstance(rules_doc, list) or not rules_doc:
        raise SpecError("rules model needs a non-empty rules list", locus="model.rules")
    classes = _classes_from(mdoc, output_kind)
    rules = []
    for i, rd in enumerate(rules_doc):
        locus = f"model.rules[{i}]"
        if not isinstance(rd, Mapping) or "if" not in rd or "then" not in rd:
            raise SpecError("rule needs 'if' and 'then'", locus=locus)
        preds = []
        for j, pd in enumerate(rd["if"]):
            ploc = f"{locus}.if[{j}]"
            if not isinstance(pd, Mapping):
                raise SpecError("predicate must be an object", locus=ploc)
            try:
                fi = schema.index_of(pd["feature"]) if isinstance(pd.get("feature"), str) else int(pd["feature"])
            except (KeyError, TypeError, ValueError, SchemaViolation):
                raise SpecError("predicate needs a valid feature", locus=ploc) from None
            op = pd.get("op")
            if op not in _OPS:
                raise SpecError(f"unknown operator {op!r}", locus=ploc)
            feature = schema.features[fi]
            try:
                value = feature.code_value(pd["value"])
            except (KeyError, SchemaViolation) as exc:
                raise SpecError(f"bad predicate value: {exc}", locus=ploc) from None
            preds.append(Predicate(feature=fi, op=op, value=value))
        then = rd["then"]
        if output_kind == "class_probabilities":
            if isinstance(then, str):
                if then not in classes:
                    raise SpecError(f"unknown class {then!r}", locus=f"{locus}.then")
                outcome = np.zeros(len(classes))
                outcome[classes.index(then)] = 1.0
            else:
                outcome = np.asarray(then, dtype=np.float64)
                if outcome.shape != (len(classes),):
                    raise SpecError(
                        f"score vector length {outcome.size} != {len(classes)} classes",
                        locus=f"{locus}.then",
                    )
            outcome.setflags(write=False)
        else:
            try:
                outcome = float(then)
            except (TypeError, ValueError):
                raise SpecError(
                    "score rule outcome must be a number", locus=f"{locus}.then"
                ) from None
        rules.append(Rule(predicates=tuple(preds), outcome=outcome))
    return RuleSetModel(schema, rules, output_kind=output_kind, classes=classes)


def _build_external(schema, mdoc, output_kind):
    from .external import ExternalModel  # deferred: keeps subprocess glue optional

    command = mdoc.get("command")
    if not command or not isinstance(command, str):
        raise SpecError("external model needs a command string", locus="model.command")
    return ExternalModel(
        schema,
        command=command,
        timeout=float(mdoc.get("timeout", 10.0)),
        output_kind=output_kind,
        classes=_classes_from(mdoc, output_kind),
    )


_BUILDERS = {
    "linear": _build_linear,
    "mlp": _build_mlp,
    "tree": _build_tree,
    "rules": _build_rules,
    "external": _build_external,
}
