// Run polling: 1 s interval with multiplicative backoff, injectable sleeper
// so tests run instantly.

import type { ServiceClient } from "./api";
import type { RunPayload } from "./types";

export interface PollOptions {
  intervalMs?: number;
  backoff?: number;
  maxIntervalMs?: number;
  maxAttempts?: number;
  sleeper?: (ms: number) => Promise<void>;
  onTick?: (payload: RunPayload) => void;
}

const defaultSleeper = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export async function pollRun(
  client: ServiceClient,
  sid: string,
  rid: string,
  opts: PollOptions = {},
): Promise<RunPayload> {
  const sleep = opts.sleeper ?? defaultSleeper;
  let interval = opts.intervalMs ?? 1000;
  const backoff = opts.backoff ?? 1.5;
  const maxInterval = opts.maxIntervalMs ?? 10_000;
  const maxAttempts = opts.maxAttempts ?? 600;
  for (let attempt = 0; attempt < maxAttempts; attempt++) {
    const payload = await client.getRun(sid, rid);
    opts.onTick?.(payload);
    if (payload.status === "done" || payload.status === "error") {
      return payload;
    }
    await sleep(interval);
    interval = Math.min(interval * backoff, maxInterval);
  }
  throw new Error(`run ${rid} did not finish within ${maxAttempts} polls`);
}
