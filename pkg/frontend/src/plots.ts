/** The three figure styles produced from a results CSV: normalized-ratio
 * boxplots grouped by a column, log-scale runtime boxplots, and mean
 * ratio versus tile count for the task-graph benchmarks. */

import { GroupData, renderBoxplots } from "./boxplot.js";
import { ResultRow, SchemaError, groupBy, tileCountOf } from "./csv.js";
import { mean } from "./stats.js";
import { SvgDoc, linearScale } from "./svg.js";

export type GroupKey = "algorithm" | "family" | "platform";

function keyOf(row: ResultRow, by: GroupKey): string {
  if (by === "algorithm") return row.algorithm;
  if (by === "family") return row.family;
  return `${row.m}:${row.k}`;
}

export interface RatioPlotOptions {
  groupBy?: GroupKey;
  truncateAt?: number;
}

export function plotRatios(rows: ResultRow[], opts: RatioPlotOptions = {}): string {
  const by = opts.groupBy ?? "algorithm";
  const usable = rows.filter((r) => r.ratio !== null);
  if (usable.length === 0) throw new SchemaError("no rows with a ratio value");
  const grouped = groupBy(usable, (r) => keyOf(r, by));
  const groups: GroupData[] = [...grouped.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, rs]) => ({ label, values: rs.map((r) => r.ratio!) }));
  return renderBoxplots(groups, {
    title: "Makespan over lower bound",
    yLabel: "ratio",
    truncateAt: opts.truncateAt,
    meanDot: opts.truncateAt !== undefined,
  });
}

export function plotRuntimes(rows: ResultRow[], opts: { groupBy?: GroupKey } = {}): string {
  const by = opts.groupBy ?? "algorithm";
  const usable = rows.filter((r) => r.runtime_us > 0);
  if (usable.length === 0) throw new SchemaError("no rows with a runtime value");
  const grouped = groupBy(usable, (r) => keyOf(r, by));
  const groups: GroupData[] = [...grouped.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, rs]) => ({ label, values: rs.map((r) => r.runtime_us) }));
  return renderBoxplots(groups, {
    title: "Algorithm runtime",
    yLabel: "microseconds (log)",
    log: true,
  });
}

/** Mean ratio per tile count, averaged over applications and platform
 * sizes, one polyline per algorithm. */
export function plotDagCurves(rows: ResultRow[]): string {
  const usable = rows.filter((r) => r.ratio !== null && tileCountOf(r.instance) !== null);
  if (usable.length === 0) {
    throw new SchemaError("no rows with both a ratio and a -t<tiles> instance name");
  }
  const perAlgo = groupBy(usable, (r) => r.algorithm);
  const tiles = [...new Set(usable.map((r) => tileCountOf(r.instance)!))].sort((a, b) => a - b);
  const series = [...perAlgo.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([algo, rs]) => {
      const byTile = groupBy(rs, (r) => String(tileCountOf(r.instance)));
      const points = tiles
        .filter((t) => byTile.has(String(t)))
        .map((t) => ({ t, v: mean(byTile.get(String(t))!.map((r) => r.ratio!)) }));
      return { algo, points };
    });

  const width = 640;
  const height = 400;
  const margin = { left: 60, right: 150, top: 30, bottom: 46 };
  const doc = new SvgDoc(width, height);
  const xs = linearScale(tiles[0], tiles[tiles.length - 1], margin.left, width - margin.right);
  const vals = series.flatMap((s) => s.points.map((p) => p.v));
  const ys = linearScale(Math.min(...vals, 1.0), Math.max(...vals), height - margin.bottom, margin.top);

  doc.line(margin.left, height - margin.bottom, width - margin.right, height - margin.bottom);
  doc.line(margin.left, margin.top, margin.left, height - margin.bottom);
  for (const t of xs.ticks) {
    doc.line(xs(t), height - margin.bottom, xs(t), height - margin.bottom + 4);
    doc.text(xs(t), height - margin.bottom + 16, xs.label(t), "middle", 10);
  }
  for (const t of ys.ticks) {
    doc.line(margin.left - 4, ys(t), margin.left, ys(t));
    doc.text(margin.left - 7, ys(t) + 4, ys.label(t), "end", 10);
    doc.line(margin.left, ys(t), width - margin.right, ys(t), "#eee");
  }
  doc.text((margin.left + width - margin.right) / 2, height - 10, "tiles", "middle", 11);
  doc.text(16, (margin.top + height - margin.bottom) / 2, "mean ratio", "middle", 11, -90);
  doc.text((margin.left + width - margin.right) / 2, 18, "Mean ratio by tile count", "middle", 13);

  const palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];
  series.forEach((s, i) => {
    const color = palette[i % palette.length];
    const path = s.points.map((p) => `${xs(p.t).toFixed(2)},${ys(p.v).toFixed(2)}`).join(" ");
    doc.add(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    for (const p of s.points) doc.circle(xs(p.t), ys(p.v), 2, color);
    const ly = margin.top + 14 * i;
    doc.line(width - margin.right + 8, ly, width - margin.right + 26, ly, color, 2);
    doc.text(width - margin.right + 30, ly + 4, s.algo, "start", 10);
  });
  return doc.render();
}
