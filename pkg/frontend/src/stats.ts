/** Boxplot statistics with the survey-plot conventions: box at the first
 * and third quartile with the median line inside, whiskers out to the most
 * extreme values within 1.5 times the inter-quartile range, everything
 * beyond drawn as individual points. */

export interface BoxStats {
  q1: number;
  median: number;
  q3: number;
  whiskerLow: number;
  whiskerHigh: number;
  outliers: number[];
  mean: number;
  count: number;
}

/** Linear-interpolation quantile (R type 7): index (n-1)p into the sorted
 * sample. For a 9-point sample the quartiles land exactly on elements
 * 2, 4 and 6, which keeps hand computation trivial. */
export function quantile(sorted: number[], p: number): number {
  if (sorted.length === 0) throw new Error("quantile of empty sample");
  if (sorted.length === 1) return sorted[0];
  const pos = (sorted.length - 1) * p;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export function boxStats(values: number[]): BoxStats {
  if (values.length === 0) throw new Error("boxStats of empty sample");
  const sorted = [...values].sort((a, b) => a - b);
  const q1 = quantile(sorted, 0.25);
  const median = quantile(sorted, 0.5);
  const q3 = quantile(sorted, 0.75);
  const iqr = q3 - q1;
  const loFence = q1 - 1.5 * iqr;
  const hiFence = q3 + 1.5 * iqr;
  const inside = sorted.filter((v) => v >= loFence && v <= hiFence);
  const whiskerLow = inside.length ? inside[0] : q1;
  const whiskerHigh = inside.length ? inside[inside.length - 1] : q3;
  const outliers = sorted.filter((v) => v < loFence || v > hiFence);
  const mean = sorted.reduce((a, b) => a + b, 0) / sorted.length;
  return { q1, median, q3, whiskerLow, whiskerHigh, outliers, mean, count: sorted.length };
}

export function mean(values: number[]): number {
  if (values.length === 0) throw new Error("mean of empty sample");
  return values.reduce((a, b) => a + b, 0) / values.length;
}
