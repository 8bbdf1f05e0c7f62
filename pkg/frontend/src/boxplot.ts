/** Grouped boxplot rendering.
 *
 * One box per group, whiskers no further than 1.5 IQR from the box,
 * values beyond plotted individually.  Optional truncation: the axis is
 * clipped at the given value and a black dot marks each group's mean so
 * clipped distributions stay comparable.
 */

import { BoxStats, boxStats } from "./stats.js";
import { Scale, SvgDoc, linearScale, logScale } from "./svg.js";

export interface BoxplotOptions {
  title?: string;
  yLabel?: string;
  log?: boolean;
  truncateAt?: number;
  width?: number;
  height?: number;
  meanDot?: boolean;
}

export interface GroupData {
  label: string;
  values: number[];
}

export function renderBoxplots(groups: GroupData[], opts: BoxplotOptions = {}): string {
  const kept = groups.filter((g) => g.values.length > 0);
  for (const g of groups) {
    if (g.values.length === 0) {
      console.warn(`skipping empty group: ${g.label}`);
    }
  }
  if (kept.length === 0) throw new Error("no non-empty groups to plot");

  const width = opts.width ?? Math.max(420, 70 * kept.length + 90);
  const height = opts.height ?? 360;
  const margin = { left: 62, right: 16, top: 30, bottom: 78 };
  const doc = new SvgDoc(width, height);

  const stats = kept.map((g) => boxStats(g.values));
  let lo = Math.min(...stats.map((s) => Math.min(s.whiskerLow, ...s.outliers, s.mean)));
  let hi = Math.max(...stats.map((s) => Math.max(s.whiskerHigh, ...s.outliers, s.mean)));
  const truncated = opts.truncateAt !== undefined && hi > opts.truncateAt;
  if (truncated) hi = opts.truncateAt!;
  const pad = opts.log ? 0 : 0.05 * (hi - lo || 1);
  const y: Scale = opts.log
    ? logScale(lo, hi, height - margin.bottom, margin.top)
    : linearScale(lo - pad, hi + pad, height - margin.bottom, margin.top);

  // axis
  doc.line(margin.left, margin.top, margin.left, height - margin.bottom);
  for (const t of y.ticks) {
    doc.line(margin.left - 4, y(t), margin.left, y(t));
    doc.text(margin.left - 7, y(t) + 4, y.label(t), "end", 10);
    doc.line(margin.left, y(t), width - margin.right, y(t), "#eee");
  }
  if (opts.yLabel) doc.text(16, (margin.top + height - margin.bottom) / 2, opts.yLabel, "middle", 11, -90);
  if (opts.title) doc.text((margin.left + width - margin.right) / 2, 18, opts.title, "middle", 13);
  if (truncated) {
    doc.line(margin.left, y(opts.truncateAt!), width - margin.right, y(opts.truncateAt!), "#999");
    doc.text(width - margin.right, y(opts.truncateAt!) - 4, `clipped at ${opts.truncateAt}`, "end", 9);
  }

  const slot = (width - margin.left - margin.right) / kept.length;
  const boxW = Math.min(36, slot * 0.5);
  kept.forEach((g, i) => {
    const cx = margin.left + slot * (i + 0.5);
    drawBox(doc, stats[i], cx, boxW, y, opts, truncated);
    doc.text(cx, height - margin.bottom + 14, g.label, "end", 10, -35);
  });
  return doc.render();
}

function clipY(v: number, opts: BoxplotOptions): number | null {
  if (opts.truncateAt !== undefined && v > opts.truncateAt) return null;
  return v;
}

function drawBox(
  doc: SvgDoc,
  s: BoxStats,
  cx: number,
  boxW: number,
  y: Scale,
  opts: BoxplotOptions,
  truncated: boolean,
) {
  const half = boxW / 2;
  const q1 = clipY(s.q1, opts);
  const q3 = clipY(s.q3, opts);
  const med = clipY(s.median, opts);
  const wLo = clipY(s.whiskerLow, opts);
  const wHi = clipY(s.whiskerHigh, opts);
  if (q1 !== null && q3 !== null) {
    doc.rect(cx - half, y(q3), boxW, Math.abs(y(q1) - y(q3)), "#d8e6f3");
  }
  if (med !== null) doc.line(cx - half, y(med), cx + half, y(med), "#1f4e79", 2);
  if (wLo !== null && q1 !== null) {
    doc.line(cx, y(q1), cx, y(wLo));
    doc.line(cx - half / 2, y(wLo), cx + half / 2, y(wLo));
  }
  if (wHi !== null && q3 !== null) {
    doc.line(cx, y(q3), cx, y(wHi));
    doc.line(cx - half / 2, y(wHi), cx + half / 2, y(wHi));
  }
  for (const o of s.outliers) {
    const v = clipY(o, opts);
    if (v !== null) doc.circle(cx, y(v), 2, "#555", "outlier");
  }
  if (opts.meanDot || truncated) {
    const v = Math.min(s.mean, opts.truncateAt ?? s.mean);
    doc.circle(cx, y(v), 3.2, "#000", "mean-dot");
  }
}
