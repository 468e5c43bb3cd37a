/**
 * Readers for the files a benchmark run persists:
 *   metrics.csv     iteration,exploitability,wall_time_ms
 *   mean_field.csv  one row, the final population distribution
 *   policy.csv      |X| rows x |A| columns
 *   summary.json    run metadata (env, params echo, solver config, ...)
 *
 * Numbers are kept as the exact decimal strings found on disk; figures embed
 * those strings verbatim so plotted data can be checksummed against the
 * source files. This module never computes anything from them.
 */

import { existsSync, readFileSync, readdirSync, statSync } from "node:fs";
import { join } from "node:path";

import { MissingInput, ShapeMismatch } from "./errors.js";

export interface Metrics {
  iteration: string[];
  exploitability: string[];
  wallTimeMs: string[];
}

export interface RunSummary {
  env?: string;
  algo?: string;
  seed?: number;
  config?: Record<string, unknown>;
  params?: Record<string, number | string>;
  final_exploitability?: number;
  [key: string]: unknown;
}

export function parseCsvRows(text: string): string[][] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

export function readMetrics(runDir: string): Metrics {
  const path = join(runDir, "metrics.csv");
  if (!existsSync(path)) {
    throw new MissingInput(`no metrics.csv in ${runDir}`);
  }
  const rows = parseCsvRows(readFileSync(path, "utf8"));
  if (rows.length < 2 || rows[0].join(",") !== "iteration,exploitability,wall_time_ms") {
    throw new ShapeMismatch(`unexpected metrics.csv header in ${runDir}`);
  }
  const body = rows.slice(1);
  if (body.some((r) => r.length !== 3)) {
    throw new ShapeMismatch(`metrics.csv rows must have 3 columns in ${runDir}`);
  }
  return {
    iteration: body.map((r) => r[0]),
    exploitability: body.map((r) => r[1]),
    wallTimeMs: body.map((r) => r[2]),
  };
}

export function readMeanField(runDir: string): string[] {
  const path = join(runDir, "mean_field.csv");
  if (!existsSync(path)) {
    throw new MissingInput(`no mean_field.csv in ${runDir}`);
  }
  const rows = parseCsvRows(readFileSync(path, "utf8"));
  if (rows.length !== 1) {
    throw new ShapeMismatch(`mean_field.csv must hold exactly one row, got ${rows.length}`);
  }
  return rows[0];
}

export function readPolicy(runDir: string): string[][] {
  const path = join(runDir, "policy.csv");
  if (!existsSync(path)) {
    throw new MissingInput(`no policy.csv in ${runDir}`);
  }
  const rows = parseCsvRows(readFileSync(path, "utf8"));
  if (rows.length === 0) {
    throw new MissingInput(`policy.csv is empty in ${runDir}`);
  }
  const width = rows[0].length;
  if (rows.some((r) => r.length !== width)) {
    throw new ShapeMismatch(`policy.csv rows have inconsistent column counts in ${runDir}`);
  }
  return rows;
}

export function readSummary(runDir: string): RunSummary | null {
  const path = join(runDir, "summary.json");
  if (!existsSync(path)) {
    return null;
  }
  return JSON.parse(readFileSync(path, "utf8")) as RunSummary;
}

/** Recursively collect directories that contain a metrics.csv. */
export function findRunDirs(root: string): string[] {
  if (!existsSync(root)) {
    throw new MissingInput(`input directory ${root} does not exist`);
  }
  const out: string[] = [];
  const walk = (dir: string) => {
    if (existsSync(join(dir, "metrics.csv"))) {
      out.push(dir);
    }
    for (const entry of readdirSync(dir)) {
      const child = join(dir, entry);
      if (statSync(child).isDirectory()) {
        walk(child);
      }
    }
  };
  walk(root);
  return out.sort();
}
