/**
 * Display helpers. Every number shown to the user is the JSON-normalized
 * rendering of a server value (JSON.stringify of the parsed number), so the
 * pixels can be compared byte-for-byte against the wire payload. The only
 * arithmetic allowed here is display scaling (bar widths).
 */

export function displayNumber(value: number | null): string {
  return value === null ? "none" : JSON.stringify(value);
}

export function displayValue(value: number | string): string {
  return typeof value === "string" ? value : JSON.stringify(value);
}

/** Width in percent for a weight bar under a shared axis scale. */
export function barWidthPercent(weight: number, axisMax: number): number {
  if (axisMax <= 0) return 0;
  return Math.min(100, (Math.abs(weight) / axisMax) * 100);
}

/** Shared axis scale across every chart in one compare view. */
export function sharedAxisMax(weightSets: number[][]): number {
  let max = 0;
  for (const weights of weightSets) {
    for (const w of weights) {
      const a = Math.abs(w);
      if (a > max) max = a;
    }
  }
  return max;
}

/** Index of the dominant (largest |weight|) feature; ties go to the lowest index. */
export function argmaxIndex(weights: number[]): number {
  let best = 0;
  for (let i = 1; i < weights.length; i += 1) {
    if (Math.abs(weights[i]) > Math.abs(weights[best])) best = i;
  }
  return best;
}
