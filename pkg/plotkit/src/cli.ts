#!/usr/bin/env node
/**
 * plotkit <kind> --in <dir> [--in <dir> ...] --out <path> [--linear-y] [--title t]
 *
 * Kinds:
 *   curves       one exploitability curve per input run directory
 *   mean_field   final mean field of a single run (bar chart or grid heatmap)
 *   policy       final policy heatmap of a single run
 *   sweep_panel  every run found under one sweep root, labeled by config
 */

import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { MissingInput, ShapeMismatch } from "./errors.js";
import { plotExploitabilityCurves, plotMeanField, plotPolicy, plotSweepPanel } from "./figures.js";

const KINDS = ["curves", "mean_field", "policy", "sweep_panel"];

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string", multiple: true },
        out: { type: "string" },
        "linear-y": { type: "boolean", default: false },
        title: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  const kind = args.positionals[0];
  const inputs = args.values.in ?? [];
  const out = args.values.out;
  if (!kind || !KINDS.includes(kind) || inputs.length === 0 || !out) {
    console.error(`usage: plotkit <${KINDS.join("|")}> --in <dir> [--in <dir>...] --out <path>`);
    return 2;
  }
  const opts = { logY: !args.values["linear-y"], title: args.values.title };

  try {
    let svg: string;
    if (kind === "curves") {
      svg = plotExploitabilityCurves(inputs, opts);
    } else if (kind === "mean_field") {
      svg = plotMeanField(inputs[0], { title: args.values.title });
    } else if (kind === "policy") {
      svg = plotPolicy(inputs[0], { title: args.values.title });
    } else {
      const panel = plotSweepPanel(inputs[0], opts);
      for (const w of panel.warnings) {
        console.warn(`warning: ${w}`);
      }
      svg = panel.svg;
    }
    writeFileSync(out, svg);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof MissingInput || err instanceof ShapeMismatch) {
      console.error(`${(err as Error).name}: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

process.exitCode = main(process.argv.slice(2));
