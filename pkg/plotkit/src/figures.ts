/**
 * The three figure classes rebuilt from run artifacts: exploitability
 * curves (log-scale by default), final mean-field and policy views, and
 * per-hyperparameter sweep panels.
 *
 * Presentation only: every number shown is read from the artifact files,
 * and the exact source strings ride along inside the SVG metadata.
 */

import { basename, relative } from "node:path";

import {
  findRunDirs,
  readMeanField,
  readMetrics,
  readPolicy,
  readSummary,
} from "./artifacts.js";
import { MissingInput, ShapeMismatch } from "./errors.js";
import { HEIGHT, MARGIN, PALETTE, Scale, SvgDoc, WIDTH, heatColor, linearScale, logScale } from "./svg.js";

export interface CurveSeries {
  label: string;
  source: string;
  iteration: string[];
  exploitability: string[];
}

export interface CurveOptions {
  logY?: boolean; // default true
  title?: string;
}

const plotArea = () => ({
  x0: MARGIN.left,
  x1: WIDTH - MARGIN.right,
  y0: HEIGHT - MARGIN.bottom,
  y1: MARGIN.top,
});

function drawAxes(doc: SvgDoc, xScale: Scale, yScale: Scale, xLabel: string, yLabel: string): void {
  const { x0, x1, y0, y1 } = plotArea();
  doc.line(x0, y0, x1, y0, "#222");
  doc.line(x0, y0, x0, y1, "#222");
  for (const t of xScale.ticks) {
    const x = xScale(t);
    doc.line(x, y0, x, y0 + 4, "#222");
    doc.text(x, y0 + 16, xScale.label(t), { anchor: "middle" });
  }
  for (const t of yScale.ticks) {
    const y = yScale(t);
    doc.line(x0 - 4, y, x0, y, "#222");
    doc.line(x0, y, x1, y, "#eee");
    doc.text(x0 - 7, y + 3, yScale.label(t), { anchor: "end" });
  }
  doc.text((x0 + x1) / 2, HEIGHT - 10, xLabel, { anchor: "middle", size: 12 });
  doc.text(14, (y0 + y1) / 2, yLabel, { anchor: "middle", size: 12 });
}

function drawLegend(doc: SvgDoc, entries: Array<[string, string]>): void {
  const { x1, y1 } = plotArea();
  entries.forEach(([label, color], i) => {
    const y = y1 + 14 * i;
    doc.line(x1 - 150, y, x1 - 132, y, color, 2.5);
    doc.text(x1 - 126, y + 3, label, { size: 10 });
  });
}

function drawCurves(series: CurveSeries[], colorOf: (i: number) => string, opts: CurveOptions): SvgDoc {
  const logY = opts.logY !== false;
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();

  const xs = series.flatMap((s) => s.iteration.map(Number));
  const ys = series.flatMap((s) => s.exploitability.map(Number));
  const xScale = linearScale(Math.min(...xs), Math.max(...xs), x0, x1);

  let yScale: Scale;
  let floor = 0;
  if (logY) {
    const positive = ys.filter((v) => v > 0);
    const hi = positive.length > 0 ? Math.max(...positive) : 1;
    const lo = positive.length > 0 ? Math.min(...positive) : 1e-12;
    floor = lo / 10; // display clamp for zeros and sub-floor noise
    yScale = logScale(floor, Math.max(hi, floor * 10), y0, y1);
  } else {
    yScale = linearScale(Math.min(...ys, 0), Math.max(...ys, 1e-12), y0, y1);
  }

  drawAxes(doc, xScale, yScale, "iteration", logY ? "exploitability (log)" : "exploitability");
  series.forEach((s, i) => {
    const pts: Array<[number, number]> = s.iteration.map((it, j) => {
      const raw = Number(s.exploitability[j]);
      const shown = logY ? Math.max(raw, floor) : raw;
      return [xScale(Number(it)), yScale(shown)];
    });
    doc.polyline(pts, colorOf(i));
  });
  if (opts.title) {
    doc.text(WIDTH / 2, 18, opts.title, { anchor: "middle", size: 13 });
  }
  return doc;
}

/** One exploitability curve per input run directory, log-scale y by default. */
export function plotExploitabilityCurves(runDirs: string[], opts: CurveOptions = {}): string {
  if (runDirs.length === 0) {
    throw new MissingInput("no input run directories");
  }
  const series: CurveSeries[] = runDirs.map((dir) => {
    const metrics = readMetrics(dir);
    const summary = readSummary(dir);
    return {
      label: summary?.algo ?? basename(dir),
      source: dir,
      iteration: metrics.iteration,
      exploitability: metrics.exploitability,
    };
  });
  const doc = drawCurves(series, (i) => PALETTE[i % PALETTE.length], opts);
  drawLegend(doc, series.map((s, i) => [s.label, PALETTE[i % PALETTE.length]]));
  doc.metadata({ kind: "curves", logY: opts.logY !== false, series });
  return doc.render();
}

interface GridInfo {
  rows: number;
  cols: number;
  cellOf: number[]; // state index -> flat row*cols+col cell
}

function gridInfo(params: Record<string, number | string> | undefined, nStates: number): GridInfo | null {
  if (!params || params.grid_rows === undefined || params.grid_cols === undefined) {
    return null;
  }
  const rows = Number(params.grid_rows);
  const cols = Number(params.grid_cols);
  const cellOf: number[] = [];
  for (let i = 0; i < nStates; i++) {
    const flat = params[`navigable_${i}`];
    if (flat === undefined) {
      throw new ShapeMismatch(`grid metadata lists ${i} navigable cells but the mean field has ${nStates} states`);
    }
    cellOf.push(Number(flat));
  }
  return { rows, cols, cellOf };
}

/** Final mean field: bar chart for 1-D games, grid heatmap when the run's
 * params carry grid metadata. */
export function plotMeanField(runDir: string, opts: { title?: string } = {}): string {
  const values = readMeanField(runDir);
  const summary = readSummary(runDir);
  const grid = gridInfo(summary?.params, values.length);
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();

  if (grid) {
    const cell = Math.min((x1 - x0) / grid.cols, (y0 - y1) / grid.rows);
    const maxV = Math.max(...values.map(Number), 1e-12);
    for (let r = 0; r < grid.rows; r++) {
      for (let c = 0; c < grid.cols; c++) {
        doc.rect(x0 + c * cell, y1 + r * cell, cell, cell, "#555", "#999");
      }
    }
    values.forEach((v, i) => {
      const flat = grid.cellOf[i];
      const r = Math.floor(flat / grid.cols);
      const c = flat % grid.cols;
      doc.rect(x0 + c * cell, y1 + r * cell, cell, cell, heatColor(Number(v) / maxV), "#999");
    });
  } else {
    const n = values.length;
    const maxV = Math.max(...values.map(Number), 1e-12);
    const yScale = linearScale(0, maxV, y0, y1);
    const band = (x1 - x0) / n;
    values.forEach((v, i) => {
      const h = y0 - yScale(Number(v));
      doc.rect(x0 + i * band + band * 0.1, y0 - h, band * 0.8, h, PALETTE[0]);
      doc.text(x0 + i * band + band / 2, y0 + 14, String(i), { anchor: "middle" });
    });
    for (const t of yScale.ticks) {
      doc.text(x0 - 7, yScale(t) + 3, yScale.label(t), { anchor: "end" });
      doc.line(x0 - 4, yScale(t), x0, yScale(t), "#222");
    }
    doc.line(x0, y0, x1, y0, "#222");
    doc.line(x0, y0, x0, y1, "#222");
    doc.text((x0 + x1) / 2, HEIGHT - 10, "state", { anchor: "middle", size: 12 });
  }
  doc.text(WIDTH / 2, 18, opts.title ?? "final mean field", { anchor: "middle", size: 13 });
  doc.metadata({ kind: "mean_field", source: runDir, values });
  return doc.render();
}

/** Final policy as an |X| x |A| heatmap of action probabilities. */
export function plotPolicy(runDir: string, opts: { title?: string } = {}): string {
  const rows = readPolicy(runDir);
  const doc = new SvgDoc();
  const { x0, x1, y0, y1 } = plotArea();
  const nStates = rows.length;
  const nActions = rows[0].length;
  const cw = (x1 - x0) / nActions;
  const ch = (y0 - y1) / nStates;
  rows.forEach((row, x) => {
    row.forEach((v, a) => {
      doc.rect(x0 + a * cw, y1 + x * ch, cw, ch, heatColor(Number(v)), "#ddd");
    });
  });
  if (nStates <= 30) {
    rows.forEach((_, x) => doc.text(x0 - 7, y1 + x * ch + ch / 2 + 3, String(x), { anchor: "end" }));
  }
  for (let a = 0; a < nActions; a++) {
    doc.text(x0 + a * cw + cw / 2, y0 + 14, String(a), { anchor: "middle" });
  }
  doc.text((x0 + x1) / 2, HEIGHT - 10, "action", { anchor: "middle", size: 12 });
  doc.text(14, (y0 + y1) / 2, "state", { anchor: "middle", size: 12 });
  doc.text(WIDTH / 2, 18, opts.title ?? "final policy", { anchor: "middle", size: 13 });
  doc.metadata({ kind: "policy", source: runDir, rows });
  return doc.render();
}

export interface EquilibriumFigures {
  meanField: string;
  policy: string;
}

/** Both equilibrium views of one run: the final mean field and the final
 * policy, as two separate images. */
export function plotMeanFieldAndPolicy(runDir: string, titlePrefix?: string): EquilibriumFigures {
  const prefix = titlePrefix ? `${titlePrefix} ` : "";
  return {
    meanField: plotMeanField(runDir, { title: `${prefix}final mean field` }),
    policy: plotPolicy(runDir, { title: `${prefix}final policy` }),
  };
}

export interface SweepPanel {
  svg: string;
  warnings: string[];
}

function configLabel(config: Record<string, unknown> | undefined, varying: string[]): string | null {
  if (!config) {
    return null;
  }
  if (varying.length === 0) {
    return "base config";
  }
  return varying.map((k) => `${k}=${String(config[k])}`).join(", ");
}

/** One curve per run under the sweep root, colored and labeled by the
 * hyperparameter values that vary across configs. Runs lacking summary.json
 * still get a curve (labeled by path) plus a warning. */
export function plotSweepPanel(root: string, opts: CurveOptions = {}): SweepPanel {
  const dirs = findRunDirs(root);
  if (dirs.length === 0) {
    throw new MissingInput(`no run directories with metrics.csv under ${root}`);
  }
  const warnings: string[] = [];
  const summaries = dirs.map((d) => readSummary(d));

  // find solver-config keys whose values differ between runs
  const keyValues = new Map<string, Set<string>>();
  for (const s of summaries) {
    for (const [k, v] of Object.entries(s?.config ?? {})) {
      if (!keyValues.has(k)) {
        keyValues.set(k, new Set());
      }
      keyValues.get(k)!.add(String(v));
    }
  }
  const varying = [...keyValues.entries()]
    .filter(([, vals]) => vals.size > 1)
    .map(([k]) => k)
    .sort();

  const series: CurveSeries[] = [];
  const labels: string[] = [];
  dirs.forEach((dir, i) => {
    const metrics = readMetrics(dir);
    let label = configLabel(summaries[i]?.config, varying);
    if (label === null) {
      label = relative(root, dir);
      warnings.push(`no summary.json for ${dir}; labeling curve by path`);
    }
    labels.push(label);
    series.push({ label, source: dir, iteration: metrics.iteration, exploitability: metrics.exploitability });
  });

  const distinct = [...new Set(labels)];
  const colorOf = (i: number) => PALETTE[distinct.indexOf(labels[i]) % PALETTE.length];
  const doc = drawCurves(series, colorOf, opts);
  drawLegend(doc, distinct.map((l) => [l, PALETTE[distinct.indexOf(l) % PALETTE.length]]));
  doc.metadata({ kind: "sweep_panel", root, varying, series });
  return { svg: doc.render(), warnings };
}
