import type { ApiClient } from "./api.js";
import type { RunHandle } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  /** Called after every poll; lets the UI show queued/running progress. */
  onUpdate?: (handle: RunHandle) => void;
}

/**
 * Poll a run until it reaches a terminal state. Resolves with the final
 * handle when the run is done; rejects when it failed or the timeout passed.
 */
export function pollRun(
  api: ApiClient,
  runId: string,
  options: PollOptions = {},
): Promise<RunHandle> {
  const intervalMs = options.intervalMs ?? 500;
  const timeoutMs = options.timeoutMs ?? 120_000;
  const startedAt = Date.now();

  return new Promise((resolve, reject) => {
    const tick = async () => {
      let handle: RunHandle;
      try {
        handle = await api.getRun(runId);
      } catch (err) {
        reject(err);
        return;
      }
      options.onUpdate?.(handle);
      if (handle.status === "done") {
        resolve(handle);
      } else if (handle.status === "failed") {
        reject(new Error(handle.error?.message ?? `run ${runId} failed`));
      } else if (Date.now() - startedAt >= timeoutMs) {
        reject(new Error(`run ${runId} still ${handle.status} after ${timeoutMs}ms`));
      } else {
        setTimeout(tick, intervalMs);
      }
    };
    void tick();
  });
}
