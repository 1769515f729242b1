"""Experiment stages wiring generation -> encoding -> gaps -> dynamics ->
schedules -> classical baseline -> fits, over append-only record files.

Each stage reads its upstream file, computes only the (config, id) pairs
not yet recorded, and appends results sorted by id, so reruns are
idempotent and interrupted runs resume.  With several workers the
per-instance work is farmed to processes and the canonical sort keeps the
output files byte-identical to a single-worker run.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import binpoly, dataset, mj as mjmod, scaling, schedules, spectra
from .dynamics import run_anneal
from .encoder import encode_instance
from .hamiltonian import AnnealSpec, Schedule
from .records import (
    ExperimentConfig,
    append_records,
    completed_ids,
    fmt_energy,
    iter_records,
    make_record,
)
from .sa import estimate_sa, SAParams, tune_sa
from .tuner import tune_annealing

FILES = {
    "generate": "instances.jsonl",
    "encode": "encodings.jsonl",
    "gap": "gaps.jsonl",
    "anneal": "anneal.jsonl",
    "tune": "tune.jsonl",
    "schedule": "schedules.jsonl",
    "probe": "probe.jsonl",
    "sa": "sa.jsonl",
    "fit": "fits.jsonl",
}
STAGES = tuple(FILES) + ("report",)


def _load_mj(cfg: ExperimentConfig):
    return mjmod.load_mj(cfg.mj_path) if cfg.mj_path else mjmod.load_default()


def _stage_path(cfg: ExperimentConfig, stage: str) -> str:
    return os.path.join(cfg.outdir, FILES[stage])


def _prepare(cfg: ExperimentConfig, stage: str, force: bool) -> str:
    os.makedirs(cfg.outdir, exist_ok=True)
    path = _stage_path(cfg, stage)
    if force and os.path.exists(path):
        os.remove(path)
    return path


def _instances(cfg: ExperimentConfig) -> list:
    path = _stage_path(cfg, "generate")
    recs = []
    for rec in iter_records(path, cfg.config_hash(), "generate"):
        recs.append(dataset.record_from_json_dict(rec["payload"]))
    return recs


def _schedule_of(cfg: ExperimentConfig) -> Schedule:
    return Schedule(cfg.schedule)


def _pmap(cfg: ExperimentConfig, fn, jobs: list) -> list:
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


# -- generate ---------------------------------------------------------------


def stage_generate(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "generate", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "generate")
    mj = _load_mj(cfg)
    new = []
    for length in cfg.lengths:
        recs = dataset.generate_dataset(cfg.dim, length, cfg.count, cfg.seed, mj)
        for r in recs:
            if r.id in done:
                continue
            new.append(make_record("generate", h, r.id, dataset.record_to_json_dict(r)))
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- encode -------------------------------------------------------------------


def stage_encode(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "encode", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "encode")
    mj = _load_mj(cfg)
    pubo_dir = os.path.join(cfg.outdir, "pubo")
    os.makedirs(pubo_dir, exist_ok=True)
    new = []
    for rec in _instances(cfg):
        if rec.id in done:
            continue
        enc = encode_instance(rec, mj)
        pubo_path = os.path.join(pubo_dir, f"{rec.id}.pubo")
        binpoly.write_pubo(enc.pubo, pubo_path)
        payload = {
            "num_qubits": enc.num_qubits,
            "penalty_weight": fmt_energy(enc.penalty_weight),
            "ground_energy": fmt_energy(enc.ground_energy),
            "ground_bitstrings": list(enc.ground_bitstrings),
            "pubo_file": os.path.relpath(pubo_path, cfg.outdir),
        }
        new.append(make_record("encode", h, rec.id, payload))
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- gap ----------------------------------------------------------------------


def _gap_job(args):
    line, mj_path = args
    mj = mjmod.load_mj(mj_path) if mj_path else mjmod.load_default()
    rec = dataset.record_from_json(line)
    enc = encode_instance(rec, mj)
    spec = AnnealSpec(enc, Schedule("linear"), total_time=1.0)
    g = spectra.min_gap(spec)
    return rec.id, {
        "delta": fmt_energy(g.delta),
        "s_star": round(g.s_star, 6),
        "degeneracy": g.degeneracy,
        "length": len(rec.peptide),
    }


def stage_gap(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "gap", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "gap")
    todo = [r for r in _instances(cfg) if r.id not in done]
    jobs = [(dataset.record_to_json(r), cfg.mj_path) for r in todo]
    results = _pmap(cfg, _gap_job, jobs)
    new = [make_record("gap", h, rid, payload) for rid, payload in results]
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- anneal (fixed-time baseline) ----------------------------------------------


def _anneal_job(args):
    line, mj_path, kind, total_time = args
    mj = mjmod.load_mj(mj_path) if mj_path else mjmod.load_default()
    rec = dataset.record_from_json(line)
    enc = encode_instance(rec, mj)
    out = run_anneal(AnnealSpec(enc, Schedule(kind), total_time=total_time))
    return rec.id, {
        "p_success": out.p_success,
        "total_time": out.total_time,
        "tts": out.tts if math.isfinite(out.tts) else "inf",
        "norm_drift": out.norm_drift,
        "step_count": out.step_count,
        "length": len(rec.peptide),
    }


def stage_anneal(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "anneal", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "anneal")
    todo = [r for r in _instances(cfg) if r.id not in done]
    jobs = [
        (dataset.record_to_json(r), cfg.mj_path, cfg.schedule, cfg.baseline_time)
        for r in todo
    ]
    results = _pmap(cfg, _anneal_job, jobs)
    new = [make_record("anneal", h, rid, payload) for rid, payload in results]
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- tune -----------------------------------------------------------------------


def _tune_job(args):
    line, mj_path, kind, catalyst, budget, baseline_time, seed = args
    mj = mjmod.load_mj(mj_path) if mj_path else mjmod.load_default()
    rec = dataset.record_from_json(line)
    enc = encode_instance(rec, mj)
    res = tune_annealing(enc, Schedule(kind), catalyst=catalyst, seed=seed,
                         budget=budget, baseline_time=baseline_time)
    trace = [
        {"order": i, "params": params, "objective": obj if math.isfinite(obj) else "inf"}
        for i, (params, obj) in enumerate(res.trace)
    ]
    return rec.id, {
        "best_params": res.best_params,
        "best_tts": res.best_objective if math.isfinite(res.best_objective) else "inf",
        "evaluations": len(res.trace),
        "length": len(rec.peptide),
        "trace": trace,
    }


def stage_tune(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "tune", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "tune")
    todo = [r for r in _instances(cfg) if r.id not in done]
    budget = cfg.catalyst_budget if cfg.catalyst != "none" else cfg.tune_budget
    jobs = [
        (dataset.record_to_json(r), cfg.mj_path, cfg.schedule, cfg.catalyst,
         budget, cfg.baseline_time, cfg.seed)
        for r in todo
    ]
    results = _pmap(cfg, _tune_job, jobs)
    new = [make_record("tune", h, rid, payload) for rid, payload in results]
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- schedule (R-score profiles) ---------------------------------------------


def stage_schedule(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "schedule", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "schedule")
    gaps = list(iter_records(_stage_path(cfg, "gap"), h, "gap"))
    samples = [
        (g["payload"]["length"], g["payload"]["s_star"], g["payload"]["delta"])
        for g in gaps
    ]
    new = []

    def profile_payload(profile):
        sched = schedules.tailored_schedule(profile)
        return {
            "weight_fn": profile.weight_fn,
            "bins": [round(float(v), 10) for v in profile.r],
            "breakpoints": [[round(u, 10), round(s, 10)] for u, s in sched.breakpoints],
        }

    if "all" not in done and len(samples) >= schedules.MIN_SAMPLES:
        prof = schedules.rscore(
            schedules.GapStats(tuple((s, d) for _, s, d in samples)), cfg.rscore_weight
        )
        new.append(make_record("schedule", h, "all", profile_payload(prof)))
    by_len = {}
    for length, s, d in samples:
        by_len.setdefault(length, []).append((s, d))
    for length, pairs in sorted(by_len.items()):
        rid = f"len{length}"
        if rid in done or len(pairs) < schedules.MIN_SAMPLES:
            continue
        prof = schedules.rscore(schedules.GapStats(tuple(pairs)), cfg.rscore_weight)
        new.append(make_record("schedule", h, rid, profile_payload(prof)))
    append_records(path, new)
    return len(new)


# -- probe ---------------------------------------------------------------------


def _probe_job(args):
    line, mj_path, t_probe, slowdown = args
    mj = mjmod.load_mj(mj_path) if mj_path else mjmod.load_default()
    rec = dataset.record_from_json(line)
    enc = encode_instance(rec, mj)
    est = schedules.probe_gap_position(enc, t_probe=t_probe, slowdown=slowdown)
    return rec.id, {"estimate": est, "length": len(rec.peptide)}


def stage_probe(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "probe", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "probe")
    todo = [r for r in _instances(cfg) if r.id not in done]
    jobs = [
        (dataset.record_to_json(r), cfg.mj_path, cfg.probe_time, cfg.probe_slowdown)
        for r in todo
    ]
    results = _pmap(cfg, _probe_job, jobs)
    new = [make_record("probe", h, rid, payload) for rid, payload in results]
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- sa --------------------------------------------------------------------------


def _sa_job(args):
    line, mj_path, budget, n_runs, max_moves, seed = args
    mj = mjmod.load_mj(mj_path) if mj_path else mjmod.load_default()
    rec = dataset.record_from_json(line)
    res = tune_sa(rec, mj, seed=seed, budget=budget, n_runs=n_runs, max_moves=max_moves)
    params = SAParams(
        tries_per_step=int(res.best_params["tries_per_step"]),
        iters_per_temperature=int(res.best_params["iters_per_temperature"]),
        t_initial=res.best_params["t_initial"],
        damping=res.best_params["damping"],
    )
    out = estimate_sa(rec, mj, params, n_runs=n_runs, seed=seed, max_moves=max_moves)
    return rec.id, {
        "best_params": res.best_params,
        "p_success": out.p_success,
        "moves_per_run": out.moves_per_run,
        "expected_moves_50": (
            out.expected_moves_50 if math.isfinite(out.expected_moves_50) else "inf"
        ),
        "length": len(rec.peptide),
    }


def stage_sa(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "sa", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "sa")
    todo = [r for r in _instances(cfg) if r.id not in done]
    jobs = [
        (dataset.record_to_json(r), cfg.mj_path, cfg.sa_budget, cfg.sa_runs,
         cfg.sa_max_moves, cfg.seed)
        for r in todo
    ]
    results = _pmap(cfg, _sa_job, jobs)
    new = [make_record("sa", h, rid, payload) for rid, payload in results]
    new.sort(key=lambda r: r["id"])
    append_records(path, new)
    return len(new)


# -- fit ---------------------------------------------------------------------------


def _finite_points(records, value_key):
    pts = []
    for rec in records:
        v = rec["payload"].get(value_key)
        if isinstance(v, (int, float)) and math.isfinite(v) and v > 0:
            pts.append((rec["payload"]["length"], float(v)))
    return pts


def _fit_payload(points) -> dict | None:
    lengths = {x for x, _ in points}
    if len(points) < 3 or len(lengths) < 2:
        return None
    fits = scaling.fit_all(points)
    sel = scaling.select_model(fits)
    return {
        "n": len(points),
        "selected": sel,
        "models": {
            m: {
                "alpha": round(f.alpha, 6),
                "alpha_stderr": round(f.alpha_stderr, 6),
                "beta": round(f.beta, 6),
                "aic": round(f.aic, 4),
                "bic": round(f.bic, 4),
                "mse_means": round(f.mse_means, 8),
            }
            for m, f in fits.items()
        },
    }


def stage_fit(cfg: ExperimentConfig, force: bool = False) -> int:
    path = _prepare(cfg, "fit", force)
    h = cfg.config_hash()
    done = completed_ids(path, h, "fit")
    sources = {
        "gap": (_stage_path(cfg, "gap"), "gap", "delta"),
        "baseline_tts": (_stage_path(cfg, "anneal"), "anneal", "tts"),
        "tuned_tts": (_stage_path(cfg, "tune"), "tune", "best_tts"),
        "sa_moves": (_stage_path(cfg, "sa"), "sa", "expected_moves_50"),
    }
    new = []
    for rid, (src, stage, key) in sources.items():
        if rid in done:
            continue
        points = _finite_points(iter_records(src, h, stage), key)
        payload = _fit_payload(points)
        if payload is not None:
            new.append(make_record("fit", h, rid, payload))
    append_records(path, new)
    return len(new)


# -- report and plot-data exports -----------------------------------------------


def export_plot_data(records, kind: str, path) -> int:
    """Tidy delimited tables for external plotting; returns row count."""
    rows = []
    if kind == "gap_violin":
        header = "length\tlog10_delta"
        for rec in records:
            p = rec["payload"]
            rows.append(f"{p['length']}\t{math.log10(p['delta']):.6f}")
    elif kind == "tts":
        header = "length\tlog10_tts"
        for rec in records:
            p = rec["payload"]
            v = p.get("tts", p.get("best_tts"))
            if isinstance(v, (int, float)) and math.isfinite(v):
                rows.append(f"{p['length']}\t{math.log10(v):.6f}")
    elif kind == "sa_moves":
        header = "length\tlog10_moves"
        for rec in records:
            p = rec["payload"]
            v = p.get("expected_moves_50")
            if isinstance(v, (int, float)) and math.isfinite(v):
                rows.append(f"{p['length']}\t{math.log10(v):.6f}")
    elif kind == "improvement":
        # ratio > 1 iff the second protocol beat the first
        header = "id\tratio"
        for rec in records:
            p = rec["payload"]
            base, new = p.get("baseline_tts"), p.get("tts")
            if all(isinstance(v, (int, float)) and v > 0 for v in (base, new)):
                rows.append(f"{rec['id']}\t{base / new:.6g}")
    else:
        raise ValueError(f"unknown export kind {kind!r}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
    return len(rows)


def stage_report(cfg: ExperimentConfig, force: bool = False) -> str:
    h = cfg.config_hash()
    os.makedirs(cfg.outdir, exist_ok=True)
    lines = [f"experiment report (config {h})", ""]

    gaps = list(iter_records(_stage_path(cfg, "gap"), h, "gap"))
    if gaps:
        by_len = {}
        for g in gaps:
            by_len.setdefault(g["payload"]["length"], []).append(g["payload"]["delta"])
        lines.append("minimum gaps (median per length):")
        for length, vals in sorted(by_len.items()):
            lines.append(
                f"  length {length}: n={len(vals)} median={np.median(vals):.4g} a.u."
            )
        export_plot_data(gaps, "gap_violin", os.path.join(cfg.outdir, "gap_violin.tsv"))
        lines.append("")

    anneal = {r["id"]: r for r in iter_records(_stage_path(cfg, "anneal"), h, "anneal")}
    tuned = {r["id"]: r for r in iter_records(_stage_path(cfg, "tune"), h, "tune")}
    if anneal and tuned:
        ratios = []
        merged = []
        for rid in sorted(set(anneal) & set(tuned)):
            base = anneal[rid]["payload"].get("tts")
            t = tuned[rid]["payload"].get("best_tts")
            if isinstance(base, (int, float)) and isinstance(t, (int, float)) and t > 0:
                ratios.append(base / t)
                merged.append(
                    {"id": rid, "payload": {"baseline_tts": base, "tts": t}}
                )
        if ratios:
            arr = np.array(ratios)
            lines.append(
                f"time optimization: n={len(arr)} improved={np.mean(arr > 1):.0%} "
                f"median speedup={np.median(arr):.3g}x"
            )
            export_plot_data(
                merged, "improvement", os.path.join(cfg.outdir, "improvement.tsv")
            )
            lines.append("")

    sa_recs = list(iter_records(_stage_path(cfg, "sa"), h, "sa"))
    if sa_recs:
        export_plot_data(sa_recs, "sa_moves", os.path.join(cfg.outdir, "sa_moves.tsv"))

    fits = list(iter_records(_stage_path(cfg, "fit"), h, "fit"))
    for rec in fits:
        sel = rec["payload"]["selected"]
        lines.append(
            f"scaling fit [{rec['id']}]: aic->{sel['aic']} bic->{sel['bic']} "
            f"mse->{sel['mse']} (n={rec['payload']['n']})"
        )
    if gaps and tuned:
        pairs = []
        for rid in sorted(set(r["id"] for r in gaps) & set(tuned)):
            d = next(g["payload"]["delta"] for g in gaps if g["id"] == rid)
            t = tuned[rid]["payload"].get("best_tts")
            if isinstance(t, (int, float)):
                pairs.append((d, t))
        if len(pairs) >= 3:
            c = scaling.correlations(pairs)
            lines.append(
                f"gap/time correlation: spearman={c.spearman_rho:.3f} "
                f"(p={c.spearman_p:.2g}) pearson={c.pearson_r:.3f} (p={c.pearson_p:.2g})"
            )

    text = "\n".join(lines).rstrip() + "\n"
    report_path = os.path.join(cfg.outdir, "report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return report_path


STAGE_FUNCS = {
    "generate": stage_generate,
    "encode": stage_encode,
    "gap": stage_gap,
    "anneal": stage_anneal,
    "tune": stage_tune,
    "schedule": stage_schedule,
    "probe": stage_probe,
    "sa": stage_sa,
    "fit": stage_fit,
    "report": stage_report,
}
