"""Experiment orchestration and result files.

Every file is written atomically (temporary file, then rename). Outputs
depend only on the configuration and seeds, so repeated runs produce
byte-identical files; wall-clock timing goes to ``timing.json`` instead of
the report.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

import pimc
from pimc.config import ExperimentConfig
from pimc.errors import ConfigurationError
from pimc.estimators import (
    HistogramAccumulator,
    collapse_metric,
    combine_estimates,
    constant_force_energy_diagnostic,
    thermodynamic_energy,
)
from pimc.sampler import RNG_ALGORITHM, MeasurementStream, run_chain

log = logging.getLogger(__name__)

ENERGIES_HEADER = (
    "sweep", "action_total", "spring_sum", "potential_sum", "e_thermo", "min_radius", "acceptance_rate",
)
HISTOGRAM_HEADER = ("r_lo", "r_hi", "density")
SCAN_HEADER = ("tau", "n_beads", "energy_mean", "energy_err", "min_radius_median", "acceptance")


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_atomic(path: FsPath, text: str) -> None:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def run_one_chain(cfg: ExperimentConfig, seed: int) -> MeasurementStream:
    stream = run_chain(
        cfg.disc, cfg.action_kind, cfg.proposal, cfg.schedule, seed,
        init=cfg.init_spec(seed), wall_radius=cfg.wall_radius, tune=cfg.tune_delta,
    )
    log.info("chain seed=%d done: %d observations, acceptance %.3f", seed, len(stream), stream.acceptance)
    return stream


def run_chains(cfg: ExperimentConfig, jobs: int = 1) -> list[MeasurementStream]:
    """One chain per seed, returned in seed order whatever ``jobs`` is."""
    if jobs > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_one_chain, [cfg] * len(cfg.seeds), cfg.seeds))
    return [run_one_chain(cfg, s) for s in cfg.seeds]


def _energy(cfg: ExperimentConfig, stream: MeasurementStream, include_tau_term=True):
    if len(stream) == 0:
        return None
    action = cfg.action_kind
    # Short streams fall back to the no-error-bar policy.
    n_blocks = cfg.n_blocks if len(stream) >= 100 else None
    if action.variant == "constant_force":
        return constant_force_energy_diagnostic(stream, n_blocks)
    return thermodynamic_energy(stream, cfg.disc, action, n_blocks, include_tau_term)


def _collapse_summary(cfg: ExperimentConfig, stream: MeasurementStream) -> dict:
    eps = cfg.collapse_epsilon
    final = stream.final_path.radii()
    out = {
        "epsilon": eps,
        "final": collapse_metric(final, eps),
        "final_median_radius": float(np.median(final)),
        "final_min_radius": float(final.min()),
    }
    if stream.radii is not None and len(stream):
        traj = [collapse_metric(r, eps) for r in stream.radii]
        out.update(mean=float(np.mean(traj)), max=float(np.max(traj)), last_observed=traj[-1])
    return out


@dataclass
class RunReport:
    config: ExperimentConfig
    chains: list[dict]
    energy: dict | None
    energy_no_tau_term: dict | None
    energy_kind: str
    collapse: dict
    histogram: dict
    wall_clock_seconds: float = math.nan
    streams: list[MeasurementStream] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "pimc_version": pimc.__version__,
            "rng_algorithm": RNG_ALGORITHM,
            "config": self.config.to_dict(),
            "energy_kind": self.energy_kind,
            "energy": self.energy,
            "energy_no_tau_term": self.energy_no_tau_term,
            "collapse": self.collapse,
            "histogram": self.histogram,
            "chains": self.chains,
        }


def summarize(cfg: ExperimentConfig, streams: list[MeasurementStream]) -> tuple[RunReport, HistogramAccumulator]:
    hist = HistogramAccumulator(cfg.bin_edges)
    chains, ests, ests_fixed = [], [], []
    for stream in streams:
        if stream.radii is not None:
            hist = hist.merge(_chain_hist(cfg, stream))
        est = _energy(cfg, stream)
        est_fixed = None
        if cfg.action == "simplified" and est is not None:
            est_fixed = _energy(cfg, stream, include_tau_term=False)
        if est is not None:
            ests.append(est)
        if est_fixed is not None:
            ests_fixed.append(est_fixed)
        chains.append({
            "seed": stream.seed,
            "acceptance": stream.acceptance,
            "delta": stream.delta,
            "n_observations": len(stream),
            "energy": est.as_dict() if est else None,
            "energy_no_tau_term": est_fixed.as_dict() if est_fixed else None,
            "collapse": _collapse_summary(cfg, stream),
        })
    finals = np.concatenate([s.final_path.radii() for s in streams])
    collapse = {
        "epsilon": cfg.collapse_epsilon,
        "final_mean": float(np.mean([c["collapse"]["final"] for c in chains])),
        "final_median_radius": float(np.median(finals)),
    }
    if all("mean" in c["collapse"] for c in chains):
        collapse["trajectory_mean"] = float(np.mean([c["collapse"]["mean"] for c in chains]))
    result = hist.result()
    histogram = {
        "file": "histogram.csv",
        "counts_total": int(hist.counts.sum()),
        "overflow": hist.overflow,
        "mode": result.mode if hist.counts.sum() else None,
    }
    energy_kind = "link_energy_diagnostic" if cfg.action == "constant_force" else "thermodynamic"
    report = RunReport(
        config=cfg,
        chains=chains,
        energy=combine_estimates(ests).as_dict() if ests else None,
        energy_no_tau_term=combine_estimates(ests_fixed).as_dict() if ests_fixed else None,
        energy_kind=energy_kind,
        collapse=collapse,
        histogram=histogram,
        streams=streams,
    )
    return report, hist


def _chain_hist(cfg: ExperimentConfig, stream: MeasurementStream) -> HistogramAccumulator:
    acc = HistogramAccumulator(cfg.bin_edges)
    acc.add(stream.radii)
    return acc


def write_outputs(report: RunReport, hist: HistogramAccumulator, out_dir: FsPath) -> None:
    out_dir = FsPath(out_dir)
    rows = []
    for s in report.streams:
        rows.extend(zip(
            s.sweep, s.action_total, s.spring_sum, s.potential_sum, s.e_thermo, s.min_radius, s.acceptance_rate,
        ))
    write_atomic(out_dir / "energies.csv", _csv_text(ENERGIES_HEADER, rows))
    h = hist.result()
    write_atomic(
        out_dir / "histogram.csv",
        _csv_text(HISTOGRAM_HEADER, zip(h.bin_edges[:-1], h.bin_edges[1:], h.density)),
    )
    write_atomic(out_dir / "report.json", _json_text(report.to_dict()))
    write_atomic(out_dir / "timing.json", _json_text({"wall_clock_seconds": report.wall_clock_seconds}))


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, write: bool = True) -> RunReport:
    """Run every chain of ``cfg`` and write energies.csv, histogram.csv, report.json."""
    t0 = time.perf_counter()
    streams = run_chains(cfg, jobs)
    report, hist = summarize(cfg, streams)
    report.wall_clock_seconds = time.perf_counter() - t0
    if write:
        write_outputs(report, hist, FsPath(cfg.output_dir))
    log.info("run finished in %.1f s", report.wall_clock_seconds)
    return report


def compare(cfg: ExperimentConfig, actions, jobs: int = 1) -> dict:
    """Run the same settings and seeds under several actions.

    Each action writes its files to ``<output_dir>/<action>/``; the summary
    goes to ``<output_dir>/compare.json``.
    """
    actions = list(actions)
    if not actions:
        raise ConfigurationError("compare needs at least one action")
    summary = {"rng_algorithm": RNG_ALGORITHM, "actions": {}}
    base_dir = FsPath(cfg.output_dir)
    for name in actions:
        sub = cfg.replace(
            action=name,
            A=cfg.A if name == "simplified" else None,
            output_dir=str(base_dir / name),
        )
        report = run_experiment(sub, jobs)
        summary["actions"][name] = {
            "config": sub.to_dict(),
            "energy_kind": report.energy_kind,
            "energy": report.energy,
            "collapse": report.collapse,
            "acceptance": [c["acceptance"] for c in report.chains],
        }
    if "primitive" in summary["actions"] and "simplified" in summary["actions"]:
        p = summary["actions"]["primitive"]["collapse"]["final_mean"]
        s = summary["actions"]["simplified"]["collapse"]["final_mean"]
        summary["collapse_ratio_primitive_over_simplified"] = (p / s) if s > 0 else (math.inf if p > 0 else None)
    write_atomic(base_dir / "compare.json", _json_text(_finite_or_str(summary)))
    return summary


def _finite_or_str(obj):
    if isinstance(obj, dict):
        return {k: _finite_or_str(v) for k, v in obj.items()}
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def beads_for(beta: float, tau: float) -> int:
    if not (beta > 0 and tau > 0):
        raise ConfigurationError(f"beta and tau must be positive, got beta={beta}, tau={tau}")
    ratio = beta / tau
    n = round(ratio)
    if abs(ratio - n) > 1e-9 or n < 2:
        raise ConfigurationError(f"beta={beta} / tau={tau} = {ratio!r} is not an integer bead count")
    return int(n)


def tau_scan(cfg: ExperimentConfig, taus, beta: float, jobs: int = 1) -> list[dict]:
    """One run per timestep at fixed ``beta``; writes ``scan.csv``."""
    taus = [float(t) for t in taus]
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise ConfigurationError(f"taus must be strictly decreasing, got {taus}")
    plan = [(tau, beads_for(beta, tau)) for tau in taus]
    rows = []
    for tau, n in plan:
        sub = cfg.replace(tau=tau, n_beads=n)
        streams = run_chains(sub, jobs)
        report, _ = summarize(sub, streams)
        energy = report.energy or {"mean": math.nan, "std_error": None}
        min_r = np.concatenate([s.min_radius for s in streams]) if streams else np.empty(0)
        rows.append({
            "tau": tau,
            "n_beads": n,
            "energy_mean": energy["mean"],
            "energy_err": energy["std_error"] if energy["std_error"] is not None else math.nan,
            "min_radius_median": float(np.median(min_r)) if min_r.size else math.nan,
            "acceptance": float(np.mean([s.acceptance for s in streams])),
        })
        log.info("tau=%g N=%d E=%s", tau, n, energy["mean"])
    write_atomic(
        FsPath(cfg.output_dir) / "scan.csv",
        _csv_text(SCAN_HEADER, ([r[k] for k in SCAN_HEADER] for r in rows)),
    )
    return rows

