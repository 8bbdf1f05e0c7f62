/** Minimal deterministic SVG assembly: fixed formatting, no DOM. */

export function fmt(v: number): string {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export interface Scale {
  (v: number): number;
  ticks: number[];
  label: (v: number) => string;
}

export function linearScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
  tickCount = 6,
): Scale {
  if (hi <= lo) hi = lo + 1;
  const f = ((v: number) => pxLo + ((v - lo) / (hi - lo)) * (pxHi - pxLo)) as Scale;
  const step = niceStep((hi - lo) / tickCount);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) ticks.push(t);
  f.ticks = ticks;
  f.label = (v) => (Math.abs(v) >= 1000 ? v.toExponential(0) : trimNum(v));
  return f;
}

export function logScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const llo = Math.log10(Math.max(lo, 1e-12));
  const lhi = Math.log10(Math.max(hi, lo * 10));
  const f = ((v: number) =>
    pxLo + ((Math.log10(Math.max(v, 1e-12)) - llo) / (lhi - llo)) * (pxHi - pxLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.floor(llo); e <= Math.ceil(lhi); e++) ticks.push(10 ** e);
  f.ticks = ticks;
  f.label = (v) => {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  };
  return f;
}

function trimNum(v: number): string {
  const s = v.toFixed(3);
  return s.replace(/\.?0+$/, "");
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(raw));
  const r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2 * mag;
  if (r < 7.5) return 5 * mag;
  return 10 * mag;
}

export class SvgDoc {
  private parts: string[] = [];
  constructor(readonly width: number, readonly height: number) {}

  add(part: string) {
    this.parts.push(part);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#333", width = 1) {
    this.add(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill = "none", stroke = "#333") {
    this.add(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill = "#000", cls = "") {
    const c = cls ? ` class="${cls}"` : "";
    this.add(`<circle${c} cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, anchor = "middle", size = 11, rotate = 0) {
    const tr = rotate ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
    this.add(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}" font-family="sans-serif"${tr}>${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
