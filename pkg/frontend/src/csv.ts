/** Reader for the scheduler benchmark results CSV.
 *
 * Schema (one header row, `#` comment lines ignored):
 *   instance,family,n,m,k,algorithm,makespan,lower_bound,ratio,runtime_us,valid
 */

export interface ResultRow {
  instance: string;
  family: string;
  n: number;
  m: number;
  k: number;
  algorithm: string;
  makespan: number;
  lower_bound: number;
  ratio: number | null;
  runtime_us: number;
  valid: boolean;
}

export const REQUIRED_COLUMNS = [
  "instance",
  "family",
  "n",
  "m",
  "k",
  "algorithm",
  "makespan",
  "lower_bound",
  "ratio",
  "runtime_us",
  "valid",
] as const;

export class SchemaError extends Error {}

function splitLine(line: string): string[] {
  // the schema never quotes fields; plain comma split is exact
  return line.split(",").map((s) => s.trim());
}

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text
    .split(/\r?\n/)
    .filter((ln) => ln.length > 0 && !ln.startsWith("#"));
  if (lines.length === 0) throw new SchemaError("empty results file");
  const header = splitLine(lines[0]);
  const index = new Map(header.map((name, i) => [name, i]));
  for (const col of REQUIRED_COLUMNS) {
    if (!index.has(col)) throw new SchemaError(`missing column: ${col}`);
  }
  const rows: ResultRow[] = [];
  for (const line of lines.slice(1)) {
    const f = splitLine(line);
    const get = (c: string) => f[index.get(c)!] ?? "";
    const ratioText = get("ratio");
    rows.push({
      instance: get("instance"),
      family: get("family"),
      n: Number(get("n")),
      m: Number(get("m")),
      k: Number(get("k")),
      algorithm: get("algorithm"),
      makespan: Number(get("makespan")),
      lower_bound: Number(get("lower_bound")),
      ratio: ratioText === "" ? null : Number(ratioText),
      runtime_us: Number(get("runtime_us")),
      valid: get("valid") === "true",
    });
  }
  return rows;
}

/** Tile count parsed from generated instance names like `cholesky-t08`. */
export function tileCountOf(instance: string): number | null {
  const m = /-t(\d+)/.exec(instance);
  return m ? Number(m[1]) : null;
}

export function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}
