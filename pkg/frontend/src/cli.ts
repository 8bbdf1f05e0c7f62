#!/usr/bin/env node
/** Command line: render a results CSV into SVG figures.
 *
 *   hybridsched-plots ratios    results.csv out.svg [--group-by algorithm|family|platform] [--truncate-at 2]
 *   hybridsched-plots runtimes  results.csv out.svg [--group-by ...]
 *   hybridsched-plots dag-curves results.csv out.svg
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseResultsCsv } from "./csv.js";
import { GroupKey, plotDagCurves, plotRatios, plotRuntimes } from "./plots.js";

function usage(): never {
  console.error(
    "usage: hybridsched-plots <ratios|runtimes|dag-curves> <results.csv> <out.svg> " +
      "[--group-by algorithm|family|platform] [--truncate-at N]",
  );
  process.exit(1);
}

export function main(argv: string[]): number {
  if (argv.length < 3) usage();
  const [command, input, output, ...rest] = argv;
  let groupByKey: GroupKey = "algorithm";
  let truncateAt: number | undefined;
  for (let i = 0; i < rest.length; i++) {
    if (rest[i] === "--group-by") {
      const v = rest[++i];
      if (v !== "algorithm" && v !== "family" && v !== "platform") usage();
      groupByKey = v;
    } else if (rest[i] === "--truncate-at") {
      truncateAt = Number(rest[++i]);
      if (!Number.isFinite(truncateAt)) usage();
    } else {
      usage();
    }
  }
  const rows = parseResultsCsv(readFileSync(input, "utf8"));
  let svg: string;
  if (command === "ratios") {
    svg = plotRatios(rows, { groupBy: groupByKey, truncateAt });
  } else if (command === "runtimes") {
    svg = plotRuntimes(rows, { groupBy: groupByKey });
  } else if (command === "dag-curves") {
    svg = plotDagCurves(rows);
  } else {
    usage();
  }
  writeFileSync(output, svg + "\n");
  console.log(`wrote ${output}`);
  return 0;
}

const isMain = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
