// Pure view-model builders: every displayed number is copied from the
// service payload (no client-side metric computation). DOM code in main.ts
// renders these models verbatim.

import type { RunPayload, TrajectoryPoint } from "./types";

export interface MetricRow {
  label: string;
  value: string;
  raw: number;
}

export interface RunCardModel {
  runId: string;
  instruction: string;
  rationale: string;
  metricRows: MetricRow[];
  eMaxBand: number;
  trajectoryPath: string;
  bandUpperPath: string;
  bandLowerPath: string;
  centerlinePath: string;
  posteriorMeanPath: string;
  posteriorBandPath: string;
  trajectoryPointCount: number;
  posteriorPointCount: number;
  placeholder: string | null;
}

const fmt = (v: number, digits = 3) => v.toFixed(digits);

// Table columns follow the study report layout: Lateral, Speed, Safety,
// Prior, Posterior.
export function metricRows(payload: RunPayload): MetricRow[] {
  const d = payload.digest!;
  return [
    { label: "Lateral", value: `${fmt(d.lateral_mean)} ± ${fmt(d.lateral_std)} m`, raw: d.lateral_mean },
    { label: "Speed", value: `${fmt(d.speed_mean)} ± ${fmt(d.speed_std)} m/s`, raw: d.speed_mean },
    { label: "Safety", value: `${fmt(100 * d.safety, 1)}%`, raw: d.safety },
    { label: "Prior", value: `${fmt(d.prior_mean)} ± ${fmt(d.prior_std)}`, raw: d.prior_mean },
    { label: "Posterior", value: `${fmt(d.posterior_mean)} ± ${fmt(d.posterior_std)}`, raw: d.posterior_mean },
  ];
}

// Road-frame to plane conversion for drawing: integrate the piecewise
// constant-curvature centerline, then offset laterally by e.
export function roadFrame(segments: [number, number][], ds = 2.0) {
  const sGrid: number[] = [0];
  const x: number[] = [0];
  const y: number[] = [0];
  const th: number[] = [0];
  const total = segments.reduce((acc, seg) => acc + seg[0], 0);
  let si = 0;
  while (si < total) {
    const h = Math.min(ds, total - si);
    let acc = 0;
    let rho = 0;
    for (const [len, r] of segments) {
      acc += len;
      if (si < acc) {
        rho = r;
        break;
      }
    }
    const thNew = th[th.length - 1] + rho * h;
    const thMid = (th[th.length - 1] + thNew) / 2;
    x.push(x[x.length - 1] + h * Math.cos(thMid));
    y.push(y[y.length - 1] + h * Math.sin(thMid));
    th.push(thNew);
    si += h;
    sGrid.push(si);
  }
  const at = (s: number): [number, number, number] => {
    const sm = Math.max(0, Math.min(s, total));
    let i = sGrid.findIndex((v) => v >= sm);
    if (i <= 0) i = 1;
    const w = (sm - sGrid[i - 1]) / (sGrid[i] - sGrid[i - 1]);
    return [
      x[i - 1] + w * (x[i] - x[i - 1]),
      y[i - 1] + w * (y[i] - y[i - 1]),
      th[i - 1] + w * (th[i] - th[i - 1]),
    ];
  };
  return { total, at, sGrid };
}

export function toXY(segments: [number, number][], s: number, e: number): [number, number] {
  const frame = roadFrame(segments);
  const [cx, cy, cth] = frame.at(s);
  return [cx - e * Math.sin(cth), cy + e * Math.cos(cth)];
}

function pathFrom(points: [number, number][]): string {
  return points.map(([px, py], i) => `${i === 0 ? "M" : "L"}${px.toFixed(2)},${py.toFixed(2)}`).join(" ");
}

export function trajectoryPaths(payload: RunPayload) {
  const segments = payload.road_segments!;
  const frame = roadFrame(segments);
  const band = payload.executables!.e_max;
  const offset = (e: number) =>
    frame.sGrid.filter((_, i) => i % 5 === 0).map((s) => {
      const [cx, cy, cth] = frame.at(s);
      return [cx - e * Math.sin(cth), cy + e * Math.cos(cth)] as [number, number];
    });
  const traj = payload.trajectory!.map((p: TrajectoryPoint) => {
    const [cx, cy, cth] = frame.at(p.s);
    return [cx - p.e * Math.sin(cth), cy + p.e * Math.cos(cth)] as [number, number];
  });
  return {
    trajectory: pathFrom(traj),
    centerline: pathFrom(offset(0)),
    bandUpper: pathFrom(offset(band)),
    bandLower: pathFrom(offset(-band)),
  };
}

export function posteriorPaths(payload: RunPayload, width = 360, height = 120) {
  const pts = payload.posterior!;
  const t0 = pts[0].t;
  const t1 = pts[pts.length - 1].t || 1;
  const xs = (t: number) => ((t - t0) / (t1 - t0 || 1)) * width;
  const ys = (v: number) => height - v * height; // friction in [0, 1.2] clipped visually
  const mean = pts.map((p) => [xs(p.t), ys(p.mean)] as [number, number]);
  const upper = pts.map((p) => [xs(p.t), ys(p.mean + Math.sqrt(p.var))] as [number, number]);
  const lower = [...pts].reverse().map((p) => [xs(p.t), ys(p.mean - Math.sqrt(p.var))] as [number, number]);
  return {
    meanPath: pathFrom(mean),
    bandPath: pathFrom(upper.concat(lower)) + " Z",
  };
}

export function renderRun(payload: RunPayload): RunCardModel {
  const missing: string[] = [];
  for (const key of ["digest", "trajectory", "posterior", "executables", "road_segments"]) {
    if (!(payload as unknown as Record<string, unknown>)[key]) missing.push(key);
  }
  if (missing.length > 0) {
    return {
      runId: payload.run_id,
      instruction: payload.instruction ?? "",
      rationale: payload.rationale ?? "",
      metricRows: [],
      eMaxBand: NaN,
      trajectoryPath: "",
      bandUpperPath: "",
      bandLowerPath: "",
      centerlinePath: "",
      posteriorMeanPath: "",
      posteriorBandPath: "",
      trajectoryPointCount: 0,
      posteriorPointCount: 0,
      placeholder: `partial payload: missing ${missing.join(", ")}`,
    };
  }
  const paths = trajectoryPaths(payload);
  const post = posteriorPaths(payload);
  return {
    runId: payload.run_id,
    instruction: payload.instruction ?? "",
    rationale: payload.rationale ?? "",
    metricRows: metricRows(payload),
    eMaxBand: payload.executables!.e_max,
    trajectoryPath: paths.trajectory,
    bandUpperPath: paths.bandUpper,
    bandLowerPath: paths.bandLower,
    centerlinePath: paths.centerline,
    posteriorMeanPath: post.meanPath,
    posteriorBandPath: post.bandPath,
    trajectoryPointCount: payload.trajectory!.length,
    posteriorPointCount: payload.posterior!.length,
    placeholder: null,
  };
}

// Input is enabled only when the session can accept a new instruction.
export function isInputDisabled(status: string): boolean {
  return !["idle", "done", "error"].includes(status);
}
