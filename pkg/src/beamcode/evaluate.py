"""Detection metrics and the Monte Carlo SNR sweep."""

from __future__ import annotations

import csv
import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .beams import MeasurementPlan, build_plan
from .channel import ArrayGeometry, angular_from_paths, build_channel, sample_paths
from .config import SimConfig
from .discovery import GainAlphabet, SyndromeTable, build_table, cached_table, discover, lattice_alphabet
from .measure import NoiseConfig, Pilot, calibrated_adc, is_detectable

# Exhaustive-search counts and reductions quoted alongside the headline
# scenarios. The 15x15 count (255) disagrees with n_t * n_r = 225; both are
# reported, neither is reconciled.
REFERENCE_FIGURES = {
    (15, 15, 1): {"m_total": 16, "m_exhaustive": 255, "reduction_pct": 92.8},
    (8, 8, 2): {"m_total": 36, "m_exhaustive": 64, "reduction_pct": 43.7},
}


@dataclass
class TrialOutcome:
    true_paths: set
    estimated_paths: dict
    Qa_true: np.ndarray
    Qa_hat: np.ndarray
    paths: list = field(default_factory=list)


@dataclass(frozen=True)
class TrialScore:
    perfect: bool
    all: bool
    partial: bool
    incorrect: int
    mse: float


def support(Qa: np.ndarray) -> dict:
    """Nonzero entries of an angular channel as {(rx_bin, tx_bin): gain}."""
    rows, cols = np.nonzero(Qa)
    return {(int(r), int(c)): complex(Qa[r, c]) for r, c in zip(rows, cols)}


def normalized_mse(Qa: np.ndarray, Qa_hat: np.ndarray) -> float:
    ref = float(np.sum(np.abs(Qa) ** 2))
    err = float(np.sum(np.abs(Qa - Qa_hat) ** 2))
    if ref == 0:
        return 0.0 if err == 0 else float("inf")
    return err / ref


def score_trial(outcome: TrialOutcome) -> TrialScore:
    """Detection flags, incorrect-beam count and normalized MSE of one trial.

    With no detectable path in the ground truth, "all" and "partial" hold
    vacuously, which keeps perfect => all => partial for every trial.
    """
    truth = set(outcome.true_paths)
    est = set(outcome.estimated_paths)
    return TrialScore(
        perfect=est == truth,
        all=truth <= est,
        partial=bool(truth & est) or not truth,
        incorrect=len(est - truth),
        mse=normalized_mse(outcome.Qa_true, outcome.Qa_hat),
    )


def measurement_count(plan: MeasurementPlan) -> tuple[int, int, float]:
    """(measurements used, exhaustive n_t * n_r, percent reduction)."""
    g = plan.geometry
    m_total = plan.m_1 if g.n_t == 1 else plan.m_1 * plan.m_2
    m_exh = g.n_t * g.n_r
    return m_total, m_exh, 100.0 * (1 - m_total / m_exh)


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


@dataclass
class SnrPoint:
    snr_db: float
    trials: int
    p_perfect: float
    p_all: float
    p_partial: float
    ci_perfect: tuple
    ci_all: tuple
    ci_partial: tuple
    mse_mean: float
    mse_ci: tuple
    histogram: dict

    def p_incorrect(self, count: int) -> float:
        return self.histogram.get(count, 0.0)


@dataclass
class SweepReport:
    config: dict
    m_total: int
    m_exhaustive: int
    points: list = field(default_factory=list)
    # per-trial scores by SNR index, kept only on request
    trial_scores: dict | None = None

    def point(self, snr_db: float) -> SnrPoint:
        for p in self.points:
            if p.snr_db == snr_db:
                return p
        raise KeyError(snr_db)


def trial_rng(master_seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    """Independent stream per (SNR point, trial); independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(snr_index, trial_index)))


class _Simulator:
    """Per-process state: plan and (lattice) tables built once per config."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.geom = ArrayGeometry(config.n_t, config.n_r, config.delta_t, config.delta_r)
        self.plan = build_plan(self.geom, config.L)
        self.pilot = Pilot(config.pilot_power)
        self.tables = None
        if config.quantize:
            alphabet = lattice_alphabet(config.adc_b)
            self.tables = self._tables(alphabet, cache=config.table_cache)

    def _tables(self, alphabet: GainAlphabet, cache=None) -> tuple[SyndromeTable, SyndromeTable | None]:
        L = self.config.L
        path = lambda side: None if cache is None else Path(cache) / f"xi_{side}_n{self.geom.side(side)[0]}_L{L}.json"
        if cache is not None:
            Path(cache).mkdir(parents=True, exist_ok=True)
        xi1 = cached_table(path("rx"), self.plan.code_rx, L, alphabet)
        if self.plan.code_tx is None:
            return xi1, None
        if self.plan.code_tx.H.shape == self.plan.code_rx.H.shape and np.array_equal(self.plan.code_tx.H, self.plan.code_rx.H):
            return xi1, xi1
        return xi1, cached_table(path("tx"), self.plan.code_tx, L, alphabet)

    def run(self, snr_db: float, rng: np.random.Generator, paths=None) -> tuple[TrialOutcome, object]:
        """One trial; ``paths`` replays a fixed channel instead of sampling one."""
        cfg = self.config
        adc = calibrated_adc(cfg.adc_b, cfg.L, snr_db, cfg.snr_spread_db, cfg.noise_power, self.pilot) if cfg.quantize else None
        if paths is None:
            paths = sample_paths(cfg.L, snr_db, self.geom, cfg.noise_power, self.pilot.power, rng, cfg.snr_spread_db)
        if adc is None:
            # oracle alphabet: the true gains, in pilot-normalized units
            tables = self._tables(GainAlphabet(tuple(dict.fromkeys(p.gain for p in paths))))
        else:
            tables = self.tables
        Q = build_channel(paths, self.geom)
        noise = NoiseConfig(
            0.0 if cfg.noiseless else cfg.noise_power, rng, post_combiner=cfg.noise_model == "post_combiner"
        )
        result = discover(Q, self.plan, tables, self.pilot, noise, adc)
        truth = {(p.rx_bin, p.tx_bin) for p in paths if is_detectable(p.gain, self.pilot, adc)}
        Qa = angular_from_paths(paths, self.geom)
        outcome = TrialOutcome(truth, support(result.Qa_hat), Qa, result.Qa_hat, list(paths))
        return outcome, result

    def scores(self, snr_index: int, trial_indices) -> list[TrialScore]:
        snr_db = self.config.snr_grid_db[snr_index]
        return [
            score_trial(self.run(snr_db, trial_rng(self.config.master_seed, snr_index, t))[0]) for t in trial_indices
        ]


_worker: _Simulator | None = None


def _init_worker(config_dict: dict):
    global _worker
    _worker = _Simulator(SimConfig(**config_dict))


def _work(args):
    snr_index, lo, hi = args
    return snr_index, lo, _worker.scores(snr_index, range(lo, hi))


def run_trial(config: SimConfig, snr_index: int, trial_index: int, paths=None):
    """Replay a single trial of a sweep: (outcome, discovery result, score).

    Without ``paths`` the channel is the one the sweep draws for this trial.
    """
    sim = _Simulator(config.validate())
    if not 0 <= snr_index < len(config.snr_grid_db):
        raise IndexError(f"snr_index {snr_index} outside the {len(config.snr_grid_db)}-point grid")
    rng = trial_rng(config.master_seed, snr_index, trial_index)
    outcome, result = sim.run(config.snr_grid_db[snr_index], rng, paths)
    return outcome, result, score_trial(outcome)


def _aggregate(snr_db: float, scores: list[TrialScore]) -> SnrPoint:
    n = len(scores)
    perfect = sum(s.perfect for s in scores)
    all_ = sum(s.all for s in scores)
    partial = sum(s.partial for s in scores)
    mse = np.array([s.mse for s in scores], dtype=float)
    mse_mean = float(mse.mean())
    half = 1.96 * float(mse.std(ddof=1)) / np.sqrt(n) if n > 1 else float("nan")
    counts = Counter(s.incorrect for s in scores)
    hist = {k: counts[k] / n for k in sorted(counts)}
    return SnrPoint(
        snr_db=snr_db,
        trials=n,
        p_perfect=perfect / n,
        p_all=all_ / n,
        p_partial=partial / n,
        ci_perfect=wilson_interval(perfect, n),
        ci_all=wilson_interval(all_, n),
        ci_partial=wilson_interval(partial, n),
        mse_mean=mse_mean,
        mse_ci=(mse_mean - half, mse_mean + half),
        histogram=hist,
    )


def run_sweep(config: SimConfig, chunk: int = 500, keep_scores: bool = False) -> SweepReport:
    """Monte Carlo over the SNR grid; output depends only on the config.

    Each trial draws from its own seeded stream, and scores are reassembled
    in trial order before aggregation, so the thread count never changes
    the result.
    """
    config.validate()
    threads = config.threads or os.cpu_count() or 1
    per_snr: dict[int, list] = {}
    if threads == 1:
        sim = _Simulator(config)
        for s in range(len(config.snr_grid_db)):
            per_snr[s] = sim.scores(s, range(config.trials))
        plan = sim.plan
    else:
        plan = build_plan(ArrayGeometry(config.n_t, config.n_r, config.delta_t, config.delta_r), config.L)
        jobs = [
            (s, lo, min(lo + chunk, config.trials))
            for s in range(len(config.snr_grid_db))
            for lo in range(0, config.trials, chunk)
        ]
        parts: dict[int, dict[int, list]] = {}
        with ProcessPoolExecutor(threads, initializer=_init_worker, initargs=(config.to_dict(),)) as pool:
            for s, lo, scores in pool.map(_work, jobs):
                parts.setdefault(s, {})[lo] = scores
        for s, chunks in parts.items():
            per_snr[s] = [sc for lo in sorted(chunks) for sc in chunks[lo]]
    m_total, m_exh, _ = measurement_count(plan)
    report = SweepReport(config.to_dict(), m_total, m_exh)
    for s, snr in enumerate(config.snr_grid_db):
        report.points.append(_aggregate(snr, per_snr[s]))
    if keep_scores:
        report.trial_scores = per_snr
    return report


REPORT_COLUMNS = ["snr_db", "p_perfect", "p_all", "p_partial", "mse_mean", "mse_ci_lo", "mse_ci_hi", "trials"]


def write_report(report: SweepReport, outdir, provenance: str | None = None) -> dict:
    """Write report CSV, histogram CSV and a JSON mirror; return the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"report": outdir / "report.csv", "histogram": outdir / "histogram.csv", "json": outdir / "report.json"}
    with open(paths["report"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for p in report.points:
            w.writerow([p.snr_db, p.p_perfect, p.p_all, p.p_partial, p.mse_mean, p.mse_ci[0], p.mse_ci[1], p.trials])
    with open(paths["histogram"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "incorrect_count", "probability"])
        for p in report.points:
            for k, prob in p.histogram.items():
                w.writerow([p.snr_db, k, prob])
    doc = {
        "config": report.config,
        "provenance": provenance,
        "m_total": report.m_total,
        "m_exhaustive": report.m_exhaustive,
        "points": [{**asdict(p), "histogram": {str(k): v for k, v in p.histogram.items()}} for p in report.points],
    }
    paths["json"].write_text(json.dumps(doc, indent=2) + "\n")
    return paths
