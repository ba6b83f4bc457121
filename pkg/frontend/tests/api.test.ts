import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError, type FetchLike } from "../src/api";

interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: string | undefined;
}

function fakeFetch(
  status: number,
  payload: unknown,
): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      headers: (init?.headers as Record<string, string>) ?? {},
      body: typeof init?.body === "string" ? init.body : undefined,
    });
    return {
      ok: status < 400,
      status,
      json: async () => payload,
    } as Response;
  };
  return { fetchFn, calls };
}

describe("ApiClient request shapes", () => {
  it("uploads dataset text as a plain-text POST", async () => {
    const { fetchFn, calls } = fakeFetch(201, { dataset_id: "dataset-1" });
    const api = new ApiClient("http://svc", fetchFn);
    await api.uploadDataset("p1;401,428\n");
    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("http://svc/datasets");
    expect(calls[0].method).toBe("POST");
    expect(calls[0].headers["content-type"]).toBe("text/plain");
    expect(calls[0].body).toBe("p1;401,428\n");
  });

  it("threads min_codes through as a query parameter", async () => {
    const { fetchFn, calls } = fakeFetch(201, {});
    await new ApiClient("", fetchFn).uploadDataset("p1;401\n", 1);
    expect(calls[0].url).toBe("/datasets?min_codes=1");
  });

  it("strips a trailing slash from the base url", async () => {
    const { fetchFn, calls } = fakeFetch(200, {});
    await new ApiClient("http://svc:8799/", fetchFn).getDataset("dataset-2");
    expect(calls[0].url).toBe("http://svc:8799/datasets/dataset-2");
  });

  it("starts cluster runs with a JSON body", async () => {
    const { fetchFn, calls } = fakeFetch(202, { run_id: "run-1" });
    const api = new ApiClient("", fetchFn);
    await api.startCluster("dataset-1", { k: 5, feature_filter: { exclude: ["999"] } });
    expect(calls[0].url).toBe("/datasets/dataset-1/cluster");
    expect(calls[0].headers["content-type"]).toBe("application/json");
    expect(JSON.parse(calls[0].body ?? "")).toEqual({
      k: 5,
      feature_filter: { exclude: ["999"] },
    });
  });

  it("starts sub-cluster runs against the parent run id", async () => {
    const { fetchFn, calls } = fakeFetch(202, { run_id: "run-2" });
    await new ApiClient("", fetchFn).startSubcluster("run-1", { k: 2, cluster_index: 3 });
    expect(calls[0].url).toBe("/runs/run-1/subcluster");
    expect(JSON.parse(calls[0].body ?? "")).toEqual({ k: 2, cluster_index: 3 });
  });

  it("requests reports with every display option in the query string", async () => {
    const { fetchFn, calls } = fakeFetch(200, {});
    await new ApiClient("", fetchFn).getReport("run-1", {
      top_chart: 20,
      top_heatmap: 40,
      top_relevance: 10,
      lambda: 1.0,
    });
    const url = new URL(`http://x${calls[0].url}`);
    expect(url.pathname).toBe("/runs/run-1/report");
    expect(url.searchParams.get("top_chart")).toBe("20");
    expect(url.searchParams.get("top_heatmap")).toBe("40");
    expect(url.searchParams.get("top_relevance")).toBe("10");
    expect(url.searchParams.get("lambda")).toBe("1");
  });

  it("omits the query string when no report options are set", async () => {
    const { fetchFn, calls } = fakeFetch(200, {});
    await new ApiClient("", fetchFn).getReport("run-1");
    expect(calls[0].url).toBe("/runs/run-1/report");
  });

  it("posts stability checks as JSON", async () => {
    const { fetchFn, calls } = fakeFetch(200, { ari: 1.0 });
    await new ApiClient("", fetchFn).checkStability("dataset-1", { k: 4, overlap: 0.5 });
    expect(calls[0].url).toBe("/datasets/dataset-1/stability");
    expect(JSON.parse(calls[0].body ?? "")).toEqual({ k: 4, overlap: 0.5 });
  });
});

describe("ApiClient error handling", () => {
  it("decodes the {code, message} envelope into ApiRequestError", async () => {
    const { fetchFn } = fakeFetch(404, {
      code: "unknown_run",
      message: "no run named run-9",
    });
    const err = await new ApiClient("", fetchFn)
      .getRun("run-9")
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(ApiRequestError);
    const apiErr = err as ApiRequestError;
    expect(apiErr.status).toBe(404);
    expect(apiErr.code).toBe("unknown_run");
    expect(apiErr.message).toBe("no run named run-9");
  });

  it("maps a non-JSON error body to a bad_response error", async () => {
    const fetchFn: FetchLike = async () =>
      ({
        ok: false,
        status: 502,
        json: async () => {
          throw new Error("not json");
        },
      }) as unknown as Response;
    const err = await new ApiClient("", fetchFn)
      .getDataset("dataset-1")
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(ApiRequestError);
    expect((err as ApiRequestError).code).toBe("bad_response");
    expect((err as ApiRequestError).status).toBe(502);
  });

  it("returns the parsed body on success", async () => {
    const { fetchFn } = fakeFetch(200, { dataset_id: "dataset-1", n_rows: 5 });
    const summary = await new ApiClient("", fetchFn).getDataset("dataset-1");
    expect(summary.dataset_id).toBe("dataset-1");
    expect(summary.n_rows).toBe(5);
  });
});
