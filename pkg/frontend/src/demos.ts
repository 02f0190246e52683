/**
 * Preloaded demo sessions mirroring the engine's shipped fixtures, so every
 * walkthrough in the docs is explorable in one click. Generated from the
 * fixture documents; keep in sync with the engine package.
 */

export interface Demo {
  name: string;
  title: string;
  blurb: string;
  point: Record<string, number | string>;
  datasetCsv: string | null;
  model: unknown;
}

export const DEMOS: Demo[] = [
  {
    name: "bee",
    title: "Bee / fly / spider",
    blurb: "Ordered rules over wings and legs. Drop wings to 2 and watch the class flip.",
    point: {"legs": 6, "wings": 4},
    datasetCsv: null,
    model: {"schema": [{"name": "legs", "kind": "count", "lower": 0, "upper": 10}, {"name": "wings", "kind": "count", "lower": 0, "upper": 8}], "model": {"type": "rules", "classes": ["spider", "fly", "bee"], "rules": [{"if": [{"feature": "wings", "op": "==", "value": 0}, {"feature": "legs", "op": "==", "value": 8}], "then": "spider"}, {"if": [{"feature": "wings", "op": "<=", "value": 2}], "then": "fly"}, {"if": [], "then": "bee"}]}, "output": "class_probabilities"},
  },
  {
    name: "linear2",
    title: "Two-feature linear",
    blurb: "f = x1 + x2 on the unit square; every attribution scheme agrees here.",
    point: {"x1": 0.0, "x2": 0.0},
    datasetCsv: null,
    model: {"schema": [{"name": "x1", "kind": "continuous", "lower": 0, "upper": 1}, {"name": "x2", "kind": "continuous", "lower": 0, "upper": 1}], "model": {"type": "linear", "weights": [1.0, 1.0], "bias": 0.0, "link": "identity"}, "output": "score"},
  },
  {
    name: "and",
    title: "AND cube",
    blurb: "Both switches must be on. Edge and ordering-averaged weights differ: (1,1) vs (0.5,0.5).",
    point: {"z1": 1.0, "z2": 1.0},
    datasetCsv: null,
    model: {"schema": [{"name": "z1", "kind": "continuous", "lower": 0, "upper": 1}, {"name": "z2", "kind": "continuous", "lower": 0, "upper": 1}], "model": {"type": "tree", "root": {"feature": "z1", "threshold": 0.5, "left": {"value": 0.0}, "right": {"feature": "z2", "threshold": 0.5, "left": {"value": 0.0}, "right": {"value": 1.0}}}}, "output": "score"},
  },
  {
    name: "or",
    title: "OR cube",
    blurb: "Either switch suffices; symmetric weights split the credit.",
    point: {"z1": 1.0, "z2": 1.0},
    datasetCsv: null,
    model: {"schema": [{"name": "z1", "kind": "continuous", "lower": 0, "upper": 1}, {"name": "z2", "kind": "continuous", "lower": 0, "upper": 1}], "model": {"type": "tree", "root": {"feature": "z1", "threshold": 0.5, "left": {"feature": "z2", "threshold": 0.5, "left": {"value": 0.0}, "right": {"value": 1.0}}, "right": {"value": 1.0}}}, "output": "score"},
  },
  {
    name: "kink4",
    title: "Piecewise kink",
    blurb: "Linear near the center, slope x10 beyond distance 2: the tangent surrogate's validity radius is finite.",
    point: {"x1": 0.0, "x2": 0.0, "x3": 0.0, "x4": 0.0},
    datasetCsv: "x1,x2,x3,x4\n-1.0,-1.0,-1.0,-1.0\n0.0,0.0,0.0,0.0\n1.0,1.0,1.0,1.0\n",
    model: {"schema": [{"name": "x1", "kind": "continuous", "lower": -6, "upper": 6}, {"name": "x2", "kind": "continuous", "lower": -6, "upper": 6}, {"name": "x3", "kind": "continuous", "lower": -6, "upper": 6}, {"name": "x4", "kind": "continuous", "lower": -6, "upper": 6}], "model": {"type": "mlp", "layers": [{"weights": [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, -1.0]], "bias": [0.0, 0.0, -2.0, -2.0, 0.0, 0.0, -2.0, -2.0, 0.0, 0.0, -2.0, -2.0, 0.0, 0.0, -2.0, -2.0], "activation": "relu"}, {"weights": [[1.0, -1.0, 9.0, 9.0, 1.0, -1.0, 9.0, 9.0, 1.0, -1.0, 9.0, 9.0, 1.0, -1.0, 9.0, 9.0]], "bias": [0.0], "activation": "identity"}]}, "output": "score"},
  },
];
