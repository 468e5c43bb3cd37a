/**
 * Minimal SVG assembly: enough shapes for line charts, bar charts, and
 * heatmaps, with deterministic output (fixed dimensions, fixed fonts, no
 * timestamps). Every figure embeds the plotted values verbatim inside a
 * <metadata> element so downstream checks can compare them byte-for-byte
 * with the source CSVs.
 */

export const WIDTH = 760;
export const HEIGHT = 420;
export const MARGIN = { top: 34, right: 24, bottom: 46, left: 64 };

export const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
];

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const fmt = (v: number) => (Number.isInteger(v) ? String(v) : v.toFixed(2));

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width = WIDTH, readonly height = HEIGHT) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.6): void {
    const attr = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${attr}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; fill?: string } = {}): void {
    const { size = 11, anchor = "start", fill = "#222" } = opts;
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,Arial,sans-serif" font-size="${size}" text-anchor="${anchor}" fill="${fill}">${esc(content)}</text>`,
    );
  }

  metadata(payload: unknown): void {
    this.parts.push(`<metadata id="plotkit-data">${esc(JSON.stringify(payload))}</metadata>`);
  }

  render(): string {
    return (
      `<?xml version="1.0" encoding="UTF-8"?>\n` +
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      `\n</svg>\n`
    );
  }
}

export interface Scale {
  (value: number): number;
  ticks: number[];
  label: (v: number) => string;
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  const scale = ((value: number) => outLo + ((value - lo) / span) * (outHi - outLo)) as Scale;
  const step = span / 5;
  scale.ticks = Array.from({ length: 6 }, (_, i) => lo + i * step);
  scale.label = (v) => (Math.abs(v) >= 1000 || (v !== 0 && Math.abs(v) < 0.01) ? v.toExponential(1) : String(Math.round(v * 100) / 100));
  return scale;
}

/** Log10 scale; the caller guarantees lo and hi are positive. */
export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const scale = ((value: number) => outLo + ((Math.log10(value) - llo) / span) * (outHi - outLo)) as Scale;
  const first = Math.ceil(llo);
  const last = Math.floor(lhi);
  const decades: number[] = [];
  const stride = Math.max(1, Math.round((last - first) / 6));
  for (let d = first; d <= last; d += stride) {
    decades.push(10 ** d);
  }
  scale.ticks = decades.length > 0 ? decades : [lo, hi];
  scale.label = (v) => `1e${Math.round(Math.log10(v))}`;
  return scale;
}

/** Two-ramp heat color for values in [0, 1]: white -> blue -> dark. */
export function heatColor(v: number): string {
  const t = Math.max(0, Math.min(1, v));
  const r = Math.round(255 - 205 * t);
  const g = Math.round(255 - 170 * t);
  const b = Math.round(255 - 75 * t);
  return `rgb(${r},${g},${b})`;
}
