// Console wiring: one session per page, instruction box, run cards,
// comparison table. All values rendered from service payloads.

import { ApiError, ServiceClient } from "./api";
import { compareRuns } from "./compare";
import { isInputDisabled, renderRun, RunCardModel } from "./render";
import { pollRun } from "./poll";
import type { RunPayload } from "./types";

const baseUrl = (window as unknown as { PSCLAB_SERVICE_URL?: string }).PSCLAB_SERVICE_URL
  ?? "http://127.0.0.1:8008";
const client = new ServiceClient(baseUrl);

const el = (id: string) => document.getElementById(id)!;
const runs: RunPayload[] = [];
let sessionId: string | null = null;

function setBusy(status: string) {
  (el("instruction") as HTMLInputElement).disabled = isInputDisabled(status);
  (el("submit") as HTMLButtonElement).disabled = isInputDisabled(status);
  el("status").textContent = status;
}

function svg(paths: { d: string; cls: string }[], viewBox: string): string {
  const body = paths
    .filter((p) => p.d)
    .map((p) => `<path d="${p.d}" class="${p.cls}" fill="none"/>`)
    .join("");
  return `<svg viewBox="${viewBox}" preserveAspectRatio="xMidYMid meet">${body}</svg>`;
}

function cardHtml(model: RunCardModel): string {
  if (model.placeholder) {
    return `<div class="card"><h3>${model.runId}</h3><p class="placeholder">${model.placeholder}</p></div>`;
  }
  const rows = model.metricRows
    .map((r) => `<tr><td>${r.label}</td><td>${r.value}</td></tr>`)
    .join("");
  return `
    <div class="card" data-run="${model.runId}">
      <h3>${model.runId}</h3>
      <p class="instruction">${model.instruction}</p>
      <p class="rationale">${model.rationale}</p>
      <table class="metrics">${rows}</table>
      <div class="chart">${svg(
        [
          { d: model.bandUpperPath, cls: "band" },
          { d: model.bandLowerPath, cls: "band" },
          { d: model.centerlinePath, cls: "center" },
          { d: model.trajectoryPath, cls: "traj" },
        ],
        "-20 -40 260 200",
      )}</div>
      <div class="chart">${svg(
        [
          { d: model.posteriorBandPath, cls: "postband" },
          { d: model.posteriorMeanPath, cls: "postmean" },
        ],
        "0 0 360 120",
      )}</div>
    </div>`;
}

function renderComparison() {
  const done = runs.filter((r) => r.status === "done");
  if (done.length < 2) {
    el("comparison").innerHTML = "";
    return;
  }
  const model = compareRuns(done[done.length - 2], done[done.length - 1]);
  const rows = model.rows
    .map((r) => `<tr><td>${r.label}</td><td>${r.a}</td><td>${r.b}</td><td>${r.deltaText}</td></tr>`)
    .join("");
  el("comparison").innerHTML = `
    <h3>${model.runA} vs ${model.runB}</h3>
    <table><tr><th></th><th>${model.runA}</th><th>${model.runB}</th><th>difference</th></tr>${rows}</table>`;
}

async function submit() {
  const box = el("instruction") as HTMLInputElement;
  const text = box.value.trim();
  if (!text) return;
  el("error").textContent = "";
  try {
    if (!sessionId) {
      sessionId = (await client.createSession()).session_id;
      el("session").textContent = sessionId;
    }
    setBusy("planning");
    const { run_id } = await client.submitRun(sessionId, { instruction: text });
    const payload = await pollRun(client, sessionId, run_id, {
      onTick: (p) => setBusy(p.status),
    });
    runs.push(payload);
    if (payload.status === "done") {
      const card = document.createElement("div");
      card.innerHTML = cardHtml(renderRun(payload));
      el("runs").appendChild(card);
      renderComparison();
      box.value = "";
    } else {
      el("error").textContent = `run failed: ${payload.error ?? "unknown"}`;
    }
    setBusy("done");
  } catch (err) {
    setBusy("error");
    el("error").textContent =
      err instanceof ApiError ? `service rejected the request: ${err.message}` : String(err);
  }
}

export function init() {
  el("submit").addEventListener("click", () => void submit());
  setBusy("idle");
}

if (typeof document !== "undefined" && document.getElementById("submit")) {
  init();
}
