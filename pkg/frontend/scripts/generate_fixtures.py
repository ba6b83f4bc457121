#!/usr/bin/env python3
"""Record real service payloads as frontend test fixtures.

Drives the clustering service over its HTTP interface (in-process ASGI
client) and writes the JSON bodies, byte-for-byte as served, into
frontend/fixtures/.  Rerun after any service payload change:

    python3 frontend/scripts/generate_fixtures.py
"""

import json
import sys
import time
from pathlib import Path

from fastapi.testclient import TestClient

import binmix
from binmix.dataset import format_records, synthetic_vocabulary
from binmix.service import create_app

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def wait_done(client, run_id, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/runs/{run_id}").json()
        if doc["status"] in ("done", "failed"):
            assert doc["status"] == "done", doc
            return doc
        time.sleep(0.05)
    raise RuntimeError(f"run {run_id} did not finish")


def dump(name, payload):
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path.relative_to(Path.cwd())}")


def main():
    FIXTURES.mkdir(exist_ok=True)
    d, k, n = 60, 5, 1200
    data, _ = binmix.generate_synthetic(d, k, n, seed=20260822)
    body = format_records(data, synthetic_vocabulary(d))

    with TestClient(create_app()) as client:
        summary = client.post("/datasets?min_codes=1", content=body).json()
        dataset_id = summary["dataset_id"]
        dump("dataset_summary.json", summary)

        run = client.post(f"/datasets/{dataset_id}/cluster", json={"k": k}).json()
        parent = wait_done(client, run["run_id"])
        dump("run_parent.json", parent)

        dump(
            "report_default.json",
            client.get(f"/runs/{run['run_id']}/report").json(),
        )
        dump(
            "report_lambda1.json",
            client.get(f"/runs/{run['run_id']}/report?lambda=1.0").json(),
        )

        target = max(range(k), key=lambda j: parent["sizes"][j])
        child = client.post(
            f"/runs/{run['run_id']}/subcluster",
            json={"cluster_index": target, "k": 2},
        ).json()
        child_done = wait_done(client, child["run_id"])
        dump("run_child.json", child_done)

        one = client.post(f"/datasets/{dataset_id}/cluster", json={"k": 1}).json()
        wait_done(client, one["run_id"])
        dump(
            "report_k1.json",
            client.get(f"/runs/{one['run_id']}/report").json(),
        )

        single_row = client.post(
            "/datasets?min_codes=1", content="solo;000,003,007\n"
        ).json()
        solo_run = client.post(
            f"/datasets/{single_row['dataset_id']}/cluster", json={"k": 1}
        ).json()
        wait_done(client, solo_run["run_id"])
        dump(
            "report_one_row.json",
            client.get(f"/runs/{solo_run['run_id']}/report").json(),
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
