import { createHash } from "node:crypto";
import { execFileSync } from "node:child_process";
import { mkdtempSync, mkdirSync, readFileSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { MissingInput, ShapeMismatch } from "../src/errors.js";
import {
  plotExploitabilityCurves,
  plotMeanField,
  plotMeanFieldAndPolicy,
  plotPolicy,
  plotSweepPanel,
} from "../src/figures.js";
import { readMetrics } from "../src/artifacts.js";

const root = mkdtempSync(join(tmpdir(), "plotkit-"));

interface FakeRun {
  algo?: string;
  config?: Record<string, unknown>;
  params?: Record<string, number>;
  metrics?: Array<[number, string, string]>;
  meanField?: string[];
  policy?: string[][];
  writeSummary?: boolean;
}

let runCounter = 0;

function makeRun(spec: FakeRun, dir?: string): string {
  const runDir = dir ?? join(root, `run${runCounter++}`);
  mkdirSync(runDir, { recursive: true });
  const metrics = spec.metrics ?? [
    [0, "12.5", "1.0"],
    [1, "0.25", "2.0"],
    [2, "0.0050000000000000001", "3.0"],
  ];
  const lines = ["iteration,exploitability,wall_time_ms"];
  for (const [it, e, w] of metrics) {
    lines.push(`${it},${e},${w}`);
  }
  writeFileSync(join(runDir, "metrics.csv"), lines.join("\n") + "\n");
  if (spec.meanField) {
    writeFileSync(join(runDir, "mean_field.csv"), spec.meanField.join(",") + "\n");
  }
  if (spec.policy) {
    writeFileSync(join(runDir, "policy.csv"), spec.policy.map((r) => r.join(",")).join("\n") + "\n");
  }
  if (spec.writeSummary !== false) {
    writeFileSync(
      join(runDir, "summary.json"),
      JSON.stringify({
        env: "beach_bar",
        algo: spec.algo ?? "pure_fp",
        seed: 0,
        config: spec.config ?? {},
        params: spec.params ?? {},
        final_exploitability: Number(metrics[metrics.length - 1][1]),
      }),
    );
  }
  return runDir;
}

function metadataOf(svg: string): any {
  const m = svg.match(/<metadata id="plotkit-data">(.*)<\/metadata>/s);
  expect(m).not.toBeNull();
  const unescaped = m![1]
    .replaceAll("&lt;", "<")
    .replaceAll("&gt;", ">")
    .replaceAll("&quot;", '"')
    .replaceAll("&amp;", "&");
  return JSON.parse(unescaped);
}

const sha = (x: unknown) => createHash("sha256").update(JSON.stringify(x)).digest("hex");

describe("exploitability curves", () => {
  it("draws one polyline per run and embeds the source values verbatim", () => {
    const a = makeRun({ algo: "pure_fp" });
    const b = makeRun({
      algo: "omd",
      metrics: [
        [0, "3.0", "1"],
        [1, "0.125", "2"],
        [2, "1e-06", "3"],
      ],
    });
    const svg = plotExploitabilityCurves([a, b]);
    expect(svg.startsWith('<?xml version="1.0"')).toBe(true);
    expect(svg).toContain("<svg xmlns=");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect(svg).toContain("exploitability (log)");

    const meta = metadataOf(svg);
    expect(meta.series.map((s: any) => s.label)).toEqual(["pure_fp", "omd"]);
    // checksum equality against the CSVs: no numeric recomputation
    for (const s of meta.series) {
      const metrics = readMetrics(s.source);
      expect(sha(s.exploitability)).toBe(sha(metrics.exploitability));
      expect(sha(s.iteration)).toBe(sha(metrics.iteration));
    }
  });

  it("handles zero exploitability under the log scale via a display floor", () => {
    const run = makeRun({
      metrics: [
        [0, "1.0", "1"],
        [1, "0", "2"],
      ],
    });
    const svg = plotExploitabilityCurves([run]);
    expect(metadataOf(svg).series[0].exploitability).toEqual(["1.0", "0"]);
  });

  it("rejects empty input", () => {
    expect(() => plotExploitabilityCurves([])).toThrow(MissingInput);
    const empty = join(root, "empty-run");
    mkdirSync(empty, { recursive: true });
    expect(() => plotExploitabilityCurves([empty])).toThrow(MissingInput);
  });
});

describe("mean field and policy figures", () => {
  it("renders a bar chart for 1-D games with verbatim values", () => {
    const mu = ["0.019999999999999997", "0.18", "0.6", "0.18", "0.02", "0", "0"];
    const run = makeRun({ meanField: mu, policy: [["1", "0", "0"]] });
    const svg = plotMeanField(run);
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThanOrEqual(7);
    expect(metadataOf(svg).values).toEqual(mu);
  });

  it("renders a grid heatmap when grid metadata is present", () => {
    const params: Record<string, number> = { grid_rows: 2, grid_cols: 2 };
    ["0", "1", "2", "3"].forEach((f, i) => (params[`navigable_${i}`] = Number(f)));
    const run = makeRun({ params, meanField: ["0.25", "0.25", "0.25", "0.25"] });
    const svg = plotMeanField(run);
    expect(metadataOf(svg).values.length).toBe(4);
  });

  it("raises ShapeMismatch when grid metadata disagrees with the vector", () => {
    const run = makeRun({
      params: { grid_rows: 2, grid_cols: 2, navigable_0: 0 },
      meanField: ["0.5", "0.25", "0.25"],
    });
    expect(() => plotMeanField(run)).toThrow(ShapeMismatch);
  });

  it("produces both equilibrium views in one call", () => {
    const run = makeRun({
      meanField: ["0.4", "0.6"],
      policy: [
        ["1", "0"],
        ["0", "1"],
      ],
    });
    const figs = plotMeanFieldAndPolicy(run, "beach bar");
    expect(metadataOf(figs.meanField).values).toEqual(["0.4", "0.6"]);
    expect(metadataOf(figs.policy).rows).toEqual([
      ["1", "0"],
      ["0", "1"],
    ]);
    expect(figs.meanField).toContain("beach bar final mean field");
  });

  it("renders the policy heatmap and rejects ragged files", () => {
    const rows = [
      ["0.5", "0.5"],
      ["1", "0"],
      ["0", "1"],
    ];
    const run = makeRun({ policy: rows });
    const svg = plotPolicy(run);
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThanOrEqual(6);
    expect(metadataOf(svg).rows).toEqual(rows);

    const bad = makeRun({});
    writeFileSync(join(bad, "policy.csv"), "0.5,0.5\n1\n");
    expect(() => plotPolicy(bad)).toThrow(ShapeMismatch);
  });
});

describe("sweep panel", () => {
  it("labels curves by the varying hyperparameter", () => {
    const sweepRoot = join(root, "sweep1");
    for (const [i, damping] of ["0.1", "0.5", "1.0"].entries()) {
      for (const seed of [0, 1]) {
        makeRun(
          { algo: "damped_fp", config: { damping: Number(damping), iterations: 5 } },
          join(sweepRoot, `cfg${i}`, String(seed)),
        );
      }
    }
    const { svg, warnings } = plotSweepPanel(sweepRoot);
    expect(warnings).toEqual([]);
    expect((svg.match(/<polyline/g) ?? []).length).toBe(6);
    expect(svg).toContain("damping=0.1");
    expect(svg).toContain("damping=0.5");
    expect(svg).toContain("damping=1");
    const meta = metadataOf(svg);
    expect(meta.varying).toEqual(["damping"]);
  });

  it("still draws curves when summary.json is missing, with a warning", () => {
    const sweepRoot = join(root, "sweep2");
    makeRun({ config: { damping: 0.5 } }, join(sweepRoot, "a", "0"));
    makeRun({ writeSummary: false }, join(sweepRoot, "b", "0"));
    const { svg, warnings } = plotSweepPanel(sweepRoot);
    expect(warnings.length).toBe(1);
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  it("single config is degenerate but valid", () => {
    const sweepRoot = join(root, "sweep3");
    makeRun({ config: { damping: 0.5 } }, join(sweepRoot, "only", "0"));
    const { svg } = plotSweepPanel(sweepRoot);
    expect((svg.match(/<polyline/g) ?? []).length).toBe(1);
    expect(svg).toContain("base config");
  });

  it("rejects roots without any runs", () => {
    const deadRoot = join(root, "sweep4");
    mkdirSync(deadRoot, { recursive: true });
    expect(() => plotSweepPanel(deadRoot)).toThrow(MissingInput);
  });
});

describe("cli", () => {
  it("writes an SVG file end to end", () => {
    const run = makeRun({ meanField: ["0.5", "0.5"] });
    const out = join(root, "cli.svg");
    const cli = join(import.meta.dirname, "..", "dist", "cli.js");
    if (!existsSync(cli)) {
      throw new Error("dist/cli.js missing; run `npm run build` before tests");
    }
    execFileSync("node", [cli, "curves", "--in", run, "--out", out]);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("<svg xmlns=");
    execFileSync("node", [cli, "mean_field", "--in", run, "--out", join(root, "mu.svg")]);
    expect(readFileSync(join(root, "mu.svg"), "utf8")).toContain("plotkit-data");
  });

  it("maps missing input to exit code 1", () => {
    const cli = join(import.meta.dirname, "..", "dist", "cli.js");
    const empty = join(root, "cli-empty");
    mkdirSync(empty, { recursive: true });
    let code = 0;
    try {
      execFileSync("node", [cli, "curves", "--in", empty, "--out", join(root, "x.svg")], { stdio: "pipe" });
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(1);
  });
});

afterAll(() => {
  // tmp dirs cleaned up by the OS; nothing persistent to remove
});
