"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed together in
the terminal summary (see conftest.py).
"""

import itertools
import time

import numpy as np
import pytest

from beamcode import gf2
from beamcode.beams import beam_matrix, build_plan
from beamcode.channel import ArrayGeometry, Path, angular_from_paths, build_channel, dft_matrix
from beamcode.codes import StandardArray, code_for, hamming_code, syndrome_decode
from beamcode.config import SimConfig
from beamcode.discovery import GainAlphabet, build_table, discover, lattice_alphabet, sufficiency_check
from beamcode.evaluate import run_sweep
from beamcode.measure import NoiseConfig, Pilot

from oracles import TABLE_15, all_codewords, min_distance_bruteforce, rational_rank

RESULTS: list[str] = []

SHIPPED_CODES = {
    "(3,1,3)": lambda: hamming_code(2),
    "(7,4,3)": lambda: hamming_code(3),
    "(15,11,3)": lambda: hamming_code(4),
    "(8,2,5)": lambda: code_for(8, 2),
}


def record(number: int, title: str, ok: bool, detail: str):
    RESULTS.append(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
    assert ok, detail


def test_criterion_1_measurement_counts():
    t0 = time.perf_counter()
    a = build_plan(ArrayGeometry(15, 15), 1)
    b = build_plan(ArrayGeometry(8, 8), 2)
    elapsed = time.perf_counter() - t0
    ok = (a.m_1, a.m_2, a.m_total) == (4, 4, 16) and b.m_total == 36 and elapsed < 1.0
    record(1, "measurement counts", ok,
           f"15x15/L=1 m1={a.m_1} m2={a.m_2} total={a.m_total}; 8x8/L=2 total={b.m_total}; {elapsed:.3f}s")  # fmt: skip


def test_criterion_2_published_table():
    t0 = time.perf_counter()
    T = build_table(hamming_code(4), 1, GainAlphabet((1,)))
    elapsed = time.perf_counter() - t0
    rows_ok = len(T) == 16
    for idx, (syn, bin_) in enumerate(TABLE_15):
        expected = np.zeros(15)
        if bin_ is not None:
            expected[bin_] = 1
        rows_ok &= T.syndromes[idx].tolist() == [complex(v) for v in syn]
        rows_ok &= bool(np.array_equal(T.channel(idx), expected))
    binary = set(np.unique(T.syndromes)) <= {0, 1}
    ok = bool(rows_ok and binary and elapsed < 1.0)
    record(2, "published syndrome table", ok, f"16/16 rows exact={rows_ok}, binary syndromes={binary}, {elapsed:.3f}s")


def test_criterion_3_noiseless_exactness():
    t0 = time.perf_counter()
    pilot = Pilot(1.0)
    noise = NoiseConfig(0.0)

    # (a) every single unit-gain path position of the 15x15 array
    g15 = ArrayGeometry(15, 15)
    plan15 = build_plan(g15, 1)
    xi15 = build_table(plan15.code_rx, 1, GainAlphabet((1,)))
    worst_a, count_a = 0.0, 0
    for r, t in itertools.product(range(15), range(15)):
        paths = [Path(r, t, 1.0)]
        res = discover(build_channel(paths, g15), plan15, (xi15, xi15), pilot, noise, None)
        worst_a = max(worst_a, float(np.max(np.abs(res.Qa_hat - angular_from_paths(paths, g15)))))
        count_a += 1

    # (b) all two-path 8x8 channels: RX pair x TX pair x both pairings x gains
    g8 = ArrayGeometry(8, 8)
    plan8 = build_plan(g8, 2)
    alphabet = GainAlphabet((1.0, -0.5 + 2j))
    xi8 = build_table(plan8.code_rx, 2, alphabet)
    worst_b, count_b = 0.0, 0
    for rx in itertools.combinations(range(8), 2):
        for tx in itertools.combinations(range(8), 2):
            for tx_order in (tx, tx[::-1]):
                for gains in itertools.product(alphabet.values, repeat=2):
                    paths = [Path(rx[0], tx_order[0], gains[0]), Path(rx[1], tx_order[1], gains[1])]
                    res = discover(build_channel(paths, g8), plan8, (xi8, xi8), pilot, noise, None)
                    err = float(np.max(np.abs(res.Qa_hat - angular_from_paths(paths, g8))))
                    worst_b = max(worst_b, err)
                    count_b += 1
    elapsed = time.perf_counter() - t0
    ok = worst_a < 1e-9 and worst_b < 1e-9 and count_b == 28 * 28 * 2 * 4 and elapsed < 60
    record(3, "noiseless exactness", ok,
           f"(a) {count_a} channels max err {worst_a:.1e}; (b) {count_b} channels max err {worst_b:.1e}; {elapsed:.1f}s")  # fmt: skip


def test_criterion_4_sufficiency_and_real_lift():
    t0 = time.perf_counter()
    alphabet = lattice_alphabet(3)
    details = []
    ok = True
    for code, L in ((hamming_code(3), 1), (hamming_code(4), 1), (code_for(8, 2), 2)):
        rep = sufficiency_check(code, L, alphabet)
        ok &= rep.passed and code.d >= 2 * L + 1
        details.append(f"{code}/L={L}: {rep.entries} entries, min delta {rep.min_distance:.3g}")
    rng = np.random.default_rng(20240601)
    lifted_ok, tried = 0, 0
    while tried < 1000:
        n = int(rng.integers(1, 17))
        A = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if gf2.rank(A) != n:
            continue
        tried += 1
        lifted_ok += rational_rank(gf2.lift_to_real(A).astype(int)) == n
    elapsed = time.perf_counter() - t0
    ok = bool(ok and lifted_ok == 1000 and elapsed < 120)
    record(4, "sufficiency and real lift", ok,
           "; ".join(details) + f"; real lift full rank {lifted_ok}/1000; {elapsed:.1f}s")  # fmt: skip


def test_criterion_5_code_validity():
    t0 = time.perf_counter()
    details = []
    ok = True
    for name, make in SHIPPED_CODES.items():
        code = make()
        d_ok = min_distance_bruteforce(code.G) == code.d
        orth = not gf2.matmul(code.G, code.H.T).any()
        sa = StandardArray(code)
        decoded = True
        for c in all_codewords(code.G).astype(np.uint8):
            for w in range(1, code.e_n + 1):
                for support in itertools.combinations(range(code.n), w):
                    r = c.copy()
                    r[list(support)] ^= 1
                    decoded &= bool(np.array_equal(syndrome_decode(r, code, sa)[0], c))
        ok &= d_ok and orth and decoded
        details.append(f"{name} d={d_ok} GH^T=0 {orth} decode {decoded}")
    elapsed = time.perf_counter() - t0
    ok = bool(ok and elapsed < 60)
    record(5, "code validity", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_6_orthogonality():
    gram = max(float(np.max(np.abs(dft_matrix(n).conj().T @ dft_matrix(n) - np.eye(n)))) for n in (7, 8, 15))
    arm = 0.0
    for make in SHIPPED_CODES.values():
        H = make().H
        n = H.shape[1]
        W = beam_matrix(H, ArrayGeometry(1, n))
        arm = max(arm, float(np.max(np.abs(W.conj() @ dft_matrix(n) - H))))
    ok = gram < 1e-12 and arm < 1e-12
    record(6, "steering orthogonality", ok, f"Gram deviation {gram:.1e}; arm selectivity deviation {arm:.1e}")


@pytest.fixture(scope="module")
def headline_sweep():
    cfg = SimConfig(n_t=15, n_r=15, L=1, adc_b=3, trials=10_000)
    t0 = time.perf_counter()
    report = run_sweep(cfg, keep_scores=True)
    return report, time.perf_counter() - t0


def test_criterion_7_headline(headline_sweep):
    report, elapsed = headline_sweep
    p = report.point(20.0)
    p0 = p.p_incorrect(0)
    ok = abs(p0 - 0.972) <= 0.03 and p.p_perfect >= 0.9 and elapsed < 300
    record(7, "Monte Carlo headline (20 dB)", ok,
           f"P(0 incorrect)={p0:.4f} (target 0.972+-0.03), P_perfect={p.p_perfect:.4f} (target >=0.9), "
           f"{p.trials} trials, sweep {elapsed:.0f}s")  # fmt: skip


def test_criterion_8_trends(headline_sweep):
    report, _ = headline_sweep
    implication = all(
        (not s.perfect or s.all) and (not s.all or s.partial)
        for scores in report.trial_scores.values()
        for s in scores
    )
    ordered = all(p.p_perfect <= p.p_all <= p.p_partial for p in report.points)
    mse = [report.point(s).mse_mean for s in (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)]
    decreasing = all(a > b for a, b in zip(mse, mse[1:]))
    low = report.point(-5.0)
    mode = max(low.histogram, key=low.histogram.get)
    ok = implication and ordered and decreasing and mode >= 1 and low.p_incorrect(0) <= 0.15
    record(8, "Monte Carlo trends", ok,
           f"implication per trial {implication}, ordering {ordered}, "
           f"MSE {' > '.join(f'{m:.3g}' for m in mse)} decreasing={decreasing}, "
           f"-5 dB histogram mode {mode}, P(0 incorrect)={low.p_incorrect(0):.4f}")  # fmt: skip
