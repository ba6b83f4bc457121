"""Command-line workflows: cluster a records file, check stability, benchmark.

Exit codes: 0 on success, 1 on numerical failures (rank, anchor, parameter),
2 on I/O or parse failures.  Every failure prints one machine-parsable line
``error:<class>:<message>`` on stderr.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import analysis, dataset as ds, decomposition, em
from .errors import BinmixError, ParseError

_IO_ERRORS = (ParseError, OSError, UnicodeDecodeError)


def _fail(exc: Exception, code: int) -> None:
    click.echo(f"error:{type(exc).__name__}:{exc}", err=True)
    sys.exit(code)


def _run_guarded(fn):
    try:
        fn()
    except _IO_ERRORS as exc:
        _fail(exc, 2)
    except BinmixError as exc:
        _fail(exc, 1)


@click.group()
def main():
    """Cluster sparse binary records via moment decomposition plus EM."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Records file: row_id;code,code,...")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--k", required=True, type=int, help="Number of clusters.")
@click.option("--min-codes", default=3, show_default=True, type=int, help="Minimum distinct codes per retained record.")
@click.option("--em-tol", default=0.01, show_default=True, type=float, help="Stop EM when the weight update norm drops below this.")
@click.option("--em-max-iters", default=500, show_default=True, type=int, help="EM iteration cap.")
@click.option("--prob-floor", default=1e-6, show_default=True, type=float, help="Clamp for conditional means.")
@click.option("--lambda", "lam", default=0.6, show_default=True, type=float, help="Relevance blend between frequency and lift.")
@click.option("--top-chart", default=20, show_default=True, type=int, help="Features in the frequency chart.")
@click.option("--top-heatmap", default=40, show_default=True, type=int, help="Features in the heatmap.")
@click.option("--record-sep", default=";", show_default=True, help="Separator between row id and code list.")
@click.option("--code-sep", default=",", show_default=True, help="Separator between codes.")
def cluster(input_path, out_dir, k, min_codes, em_tol, em_max_iters, prob_floor,
            lam, top_chart, top_heatmap, record_sep, code_sep):
    """Ingest a records file, fit k clusters, write model and report files.

    Writes model.json, assignments.csv, report.json, and trace.json into the
    output directory.  The same input and options always produce
    byte-identical model.json and report.json.
    """

    def run():
        records = ds.read_records_file(input_path, record_sep=record_sep, code_sep=code_sep)
        data, vocab = ds.ingest(records, min_codes=min_codes)
        config = em.EmConfig(omega_tol=em_tol, max_iters=em_max_iters, prob_floor=prob_floor)

        t0 = time.perf_counter()
        init, anchor = decomposition.asvtd_with_anchor(data, k)
        t1 = time.perf_counter()
        refined, trace = em.em_refine(data, init, config)
        t2 = time.perf_counter()
        model = analysis.assign(refined, data, prob_floor)

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        decomposition.save_model(refined, out / "model.json", anchor=anchor)
        with (out / "assignments.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row_id", "cluster_index", "max_posterior"])
            top = model.posteriors[np.arange(data.n_rows), model.assignments]
            for row_id, label, p in zip(data.row_ids, model.assignments, top):
                writer.writerow([row_id, int(label), f"{p:.12g}"])
        payload = analysis.report_payload(
            model, data, vocab, lam=lam, top_chart=top_chart, top_heatmap=top_heatmap
        )
        (out / "report.json").write_text(json.dumps(payload, indent=2), encoding="utf-8")
        trace_doc = {
            "iterations": trace.iterations,
            "converged": trace.converged,
            "loglik": [float(v) for v in trace.loglik],
            "omega_deltas": [float(v) for v in trace.omega_deltas],
            "decomposition_seconds": t1 - t0,
            "em_seconds": t2 - t1,
            "anchor_feature": anchor.feature,
            "anchor_gap": None if np.isinf(anchor.gap) else anchor.gap,
        }
        (out / "trace.json").write_text(json.dumps(trace_doc, indent=2), encoding="utf-8")
        click.echo(f"rows={data.n_rows} cols={data.n_cols} k={k}")
        click.echo("sizes=" + ",".join(str(int(s)) for s in model.cluster_sizes))
        click.echo(f"em_iterations={trace.iterations} converged={trace.converged}")

    _run_guarded(run)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Records file.")
@click.option("--k", required=True, type=int, help="Number of clusters.")
@click.option("--overlap", default=0.5, show_default=True, type=float, help="Fraction of rows shared by the two subsets.")
@click.option("--seed", default=0, show_default=True, type=int, help="Seed for the subset draw.")
@click.option("--min-codes", default=3, show_default=True, type=int)
@click.option("--em-tol", default=0.01, show_default=True, type=float)
@click.option("--em-max-iters", default=500, show_default=True, type=int)
@click.option("--duplicate-split", is_flag=True, hidden=True, help="Test hook: run both sides on all rows.")
def stability(input_path, k, overlap, seed, min_codes, em_tol, em_max_iters, duplicate_split):
    """Cluster two overlapping subsets independently and print their agreement.

    Prints the adjusted Rand index of the two assignments on the shared
    rows; values above 0.9 indicate a reproducible clustering.
    """

    def run():
        records = ds.read_records_file(input_path)
        data, _ = ds.ingest(records, min_codes=min_codes)
        config = em.EmConfig(omega_tol=em_tol, max_iters=em_max_iters)
        split = None
        if duplicate_split:
            everything = np.arange(data.n_rows)
            split = ds.SplitPair(everything, everything.copy(), everything.copy())
        ari = analysis.stability_check(
            data, k, overlap=overlap, seed=seed, em_config=config, split=split
        )
        click.echo(str(ari))

    _run_guarded(run)


@main.command()
@click.option("--grid", "grid", multiple=True, help="Grid point n,d,k (repeatable).")
@click.option("--seeds", default=5, show_default=True, type=int, help="Seeds per grid point.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="CSV output path.")
@click.option("--em-tol", default=0.01, show_default=True, type=float)
@click.option("--em-max-iters", default=500, show_default=True, type=int)
def benchmark(grid, seeds, out_path, em_tol, em_max_iters):
    """Score the pipeline against k-means on synthetic ground truth.

    For every n,d,k grid point and seed, draws a synthetic dataset, runs
    decomposition + EM and k-means, and writes mean/std adjusted Rand index
    plus timing splits to a CSV table.
    """

    def run():
        points = []
        for spec_str in grid:
            parts = spec_str.split(",")
            if len(parts) != 3:
                raise ParseError(f"grid point {spec_str!r} is not n,d,k")
            try:
                points.append(tuple(int(p) for p in parts))
            except ValueError as exc:
                raise ParseError(f"grid point {spec_str!r} is not numeric") from exc
        config = em.EmConfig(omega_tol=em_tol, max_iters=em_max_iters)
        rows = []
        for n, d, k in points:
            pipeline_ari, km_ari, t_decomp, t_em = [], [], [], []
            for seed in range(seeds):
                data, truth = ds.generate_synthetic(d, k, n, seed=seed)
                t0 = time.perf_counter()
                init = decomposition.asvtd(data, k)
                t1 = time.perf_counter()
                refined, _ = em.em_refine(data, init, config)
                t2 = time.perf_counter()
                model = analysis.assign(refined, data)
                pipeline_ari.append(
                    analysis.adjusted_rand_index(model.assignments, truth.labels)
                )
                km = analysis.kmeans_baseline(data, k, seed=seed)
                km_ari.append(analysis.adjusted_rand_index(km, truth.labels))
                t_decomp.append(t1 - t0)
                t_em.append(t2 - t1)
            rows.append(
                [
                    n, d, k, seeds,
                    f"{np.mean(pipeline_ari):.6f}", f"{np.std(pipeline_ari):.6f}",
                    f"{np.mean(km_ari):.6f}", f"{np.std(km_ari):.6f}",
                    f"{np.mean(t_decomp):.6f}", f"{np.mean(t_em):.6f}",
                ]
            )
        with Path(out_path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "n", "d", "k", "seeds",
                    "pipeline_ari_mean", "pipeline_ari_std",
                    "kmeans_ari_mean", "kmeans_ari_std",
                    "decomposition_seconds_mean", "em_seconds_mean",
                ]
            )
            writer.writerows(rows)
        click.echo(f"wrote {len(rows)} grid rows to {out_path}")

    _run_guarded(run)


if __name__ == "__main__":
    main()
