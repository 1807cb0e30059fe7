/**
 * Figure builders for the four simulator output kinds.
 *
 * Each builder reads only the documented CSV/JSON files produced by the
 * `ifnsim` CLI (no simulator internals), assembles panel specs, and writes
 * an SVG plus a PNG rasterization. Rendering is read-only and
 * deterministic: rerunning on the same inputs reproduces identical bytes.
 */
import fs from "node:fs";
import path from "node:path";

import { Resvg } from "@resvg/resvg-js";

import { readCsv, readJson } from "./csv.js";
import { PanelSpec, render } from "./svg.js";
import { overThresholdSpans, overThresholdWindow } from "./window.js";

export type FigureKind = "waveform" | "pair" | "stdp" | "pavlov";

export interface FigureSpec {
  kind: FigureKind;
  /** Directory holding the CLI outputs for this figure kind. */
  inputDir: string;
  /** Output path without extension; .svg and .png are written. */
  outBase: string;
  /** Optional potentiation-threshold annotation override (volts). */
  vTp?: number;
}

export interface RenderResult {
  svgPath: string;
  pngPath: string;
  /** Pair figure only: the over-threshold window printed in the legend. */
  windowSeconds?: number;
}

interface WaveformReport {
  pair_delta_t_s: number;
  sample_dt_s: number;
  v_tp_V: number;
  v_tm_V: number;
  over_threshold_window_s: number;
  peak_v_net_V: number;
  v_refr_V: number;
}

interface PavlovPhase {
  name: string;
  stimulus: Record<string, number[]>;
  ifn3_fires: number[];
  r2_trajectory: Array<[number, number]>;
}

interface PavlovReport {
  passed_before: boolean;
  passed_training: boolean;
  passed_after: boolean;
  trials_used: number;
  r2_initial_ohms: number;
  r2_final_ohms: number;
  phases: PavlovPhase[];
}

const US = 1e6;
const MS = 1e3;

function waveformPanels(dir: string): PanelSpec[] {
  const spike = readCsv(path.join(dir, "spike.csv"));
  const report = readJson<WaveformReport>(path.join(dir, "waveform_report.json"));
  const t = spike.column("t_s").map((v) => v * US);
  const v = spike.column("v_spk_V");
  return [
    {
      title: "Action-potential waveform",
      xLabel: "time (us)",
      yLabel: "port voltage (V)",
      series: [{ x: t, y: v, color: "#1f6fb2", label: "spike" }],
      hlines: [{ y: report.v_refr_V, color: "#888", label: "v_refr" }],
    },
  ];
}

function pairPanels(dir: string, vTpOverride?: number): { panels: PanelSpec[]; window: number } {
  const pair = readCsv(path.join(dir, "pair.csv"));
  const report = readJson<WaveformReport>(path.join(dir, "waveform_report.json"));
  const vTp = vTpOverride ?? report.v_tp_V;
  const t = pair.column("t_s");
  const vPre = pair.column("v_pre_V");
  const vPost = pair.column("v_post_V");
  const vNet = pair.column("v_net_V");
  const windowS = overThresholdWindow(t, vNet, vTp);
  const spans = overThresholdSpans(t, vNet, vTp);
  const tUs = t.map((v) => v * US);
  const panels: PanelSpec[] = [
    {
      title: `Spike pair, onset offset ${(report.pair_delta_t_s * US).toFixed(2)} us`,
      xLabel: "time (us)",
      yLabel: "voltage (V)",
      series: [
        { x: tUs, y: vPre, color: "#888", label: "pre spike", dash: "4 3" },
        { x: tUs, y: vPost, color: "#444", label: "post spike" },
      ],
    },
    {
      title: "Net potential across the synapse",
      xLabel: "time (us)",
      yLabel: "v_net (V)",
      series: [{ x: tUs, y: vNet, color: "#1f6fb2", label: "v_net = v_post - v_pre" }],
      hlines: [{ y: vTp, color: "#c23333", label: `v_tp = ${vTp.toFixed(3)} V` }],
      bands: spans.map(([a, b]) => ({ x0: a * US, x1: b * US, color: "#c23333", opacity: 0.18 })),
      notes: [`over-threshold window: ${(windowS * US).toFixed(4)} us`],
    },
  ];
  return { panels, window: windowS };
}

function stdpPanels(dir: string): PanelSpec[] {
  const curve = readCsv(path.join(dir, "stdp.csv"));
  const dt = curve.column("delta_t_s").map((v) => v * US);
  const dg = curve.column("delta_g_S").map((v) => v * US); // uS
  return [
    {
      title: "Pair response: conductance change vs onset offset",
      xLabel: "delta_t (us), pre before post is positive",
      yLabel: "delta_g (uS)",
      series: [{ x: dt, y: dg, color: "#1f6fb2", label: "single pair" }],
      hlines: [{ y: 0, color: "#888", dash: "2 3" }],
      yInclude: [0],
    },
  ];
}

function firesOf(dir: string, stem: string, neuron: string): number[] {
  const table = readCsv(path.join(dir, `${stem}_fires.csv`));
  const ids = table.text("neuron_id");
  const times = table.column("t_onset_s");
  return times.filter((_, i) => ids[i] === neuron);
}

function pavlovPanels(dir: string): PanelSpec[] {
  const report = readJson<PavlovReport>(path.join(dir, "pavlov_report.json"));
  const phase = (name: string): PavlovPhase => {
    const p = report.phases.find((q) => q.name === name);
    if (!p) throw new Error(`pavlov_report.json has no phase '${name}'`);
    return p;
  };

  const sight = readCsv(path.join(dir, "before_sight.csv"));
  const sound = readCsv(path.join(dir, "before_sound.csv"));
  const after = readCsv(path.join(dir, "after.csv"));
  const training = phase("training");

  const mark = (ts: number[]) => ts.map((x) => ({ x: x * MS, color: "#c23333" }));
  const vCol = (t: ReturnType<typeof readCsv>) => t.column("v_mem_ifn3");
  const tCol = (t: ReturnType<typeof readCsv>) => t.column("t_s").map((v) => v * MS);

  const trainT = training.r2_trajectory.map(([t]) => t * MS);
  const trainR = training.r2_trajectory.map(([, r]) => r / 1e3); // kOhm

  const verdict = (ok: boolean) => (ok ? "pass" : "FAIL");
  return [
    {
      title: `Before learning (${verdict(report.passed_before)}): output follows the sight pathway only`,
      xLabel: "time (ms)",
      yLabel: "output v_mem (V)",
      series: [
        { x: tCol(sight), y: vCol(sight), color: "#1f6fb2", label: "sight stimulus trials" },
        { x: tCol(sound), y: vCol(sound), color: "#e08c1f", label: "sound stimulus trials", dash: "4 3" },
      ],
      ticks: mark(firesOf(dir, "before_sight", "ifn3")),
      notes: [
        `output fires, sight alone: ${phase("before_sight").ifn3_fires.length}`,
        `output fires, sound alone: ${phase("before_sound").ifn3_fires.length}`,
      ],
    },
    {
      title: `Training (${verdict(report.passed_training)}): co-stimulation strengthens the sound synapse`,
      xLabel: "time (ms)",
      yLabel: "sound-synapse resistance (kOhm)",
      series: [{ x: trainT, y: trainR, color: "#2a7f3f", label: "resistance trajectory" }],
      ticks: mark(training.ifn3_fires),
      notes: [
        `co-stimulation trials: ${report.trials_used}`,
        `${(report.r2_initial_ohms / 1e3).toFixed(0)} kOhm -> ${(report.r2_final_ohms / 1e3).toFixed(1)} kOhm`,
      ],
    },
    {
      title: `After learning (${verdict(report.passed_after)}): sound alone drives the output`,
      xLabel: "time (ms)",
      yLabel: "output v_mem (V)",
      series: [
        { x: tCol(after), y: vCol(after), color: "#e08c1f", label: "sound stimulus trials" },
      ],
      ticks: mark(firesOf(dir, "after", "ifn3")),
      notes: [`output fires, sound alone: ${phase("after").ifn3_fires.length}`],
    },
  ];
}

export function renderFigure(spec: FigureSpec): RenderResult {
  let panels: PanelSpec[];
  let windowSeconds: number | undefined;
  switch (spec.kind) {
    case "waveform":
      panels = waveformPanels(spec.inputDir);
      break;
    case "pair": {
      const built = pairPanels(spec.inputDir, spec.vTp);
      panels = built.panels;
      windowSeconds = built.window;
      break;
    }
    case "stdp":
      panels = stdpPanels(spec.inputDir);
      break;
    case "pavlov":
      panels = pavlovPanels(spec.inputDir);
      break;
    default:
      throw new Error(`unknown figure kind '${spec.kind as string}'`);
  }
  const svg = render(panels);
  const svgPath = `${spec.outBase}.svg`;
  const pngPath = `${spec.outBase}.png`;
  fs.mkdirSync(path.dirname(svgPath), { recursive: true });
  fs.writeFileSync(svgPath, svg);
  fs.writeFileSync(pngPath, new Resvg(svg).render().asPng());
  return { svgPath, pngPath, windowSeconds };
}
