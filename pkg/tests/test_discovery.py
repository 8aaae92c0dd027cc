import functools
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beamcode.beams import build_plan
from beamcode.channel import ArrayGeometry, ChannelMatrix, Path, angular_from_paths, build_channel
from beamcode.codes import code_for, hamming_code
from beamcode.discovery import (
    GainAlphabet,
    SyndromeTable,
    TableCapacityError,
    build_table,
    cached_table,
    check_table,
    discover,
    distance,
    lattice_alphabet,
    load_table,
    nearest,
    nearest_index,
    save_table,
    sufficiency_check,
    table_size,
)
from beamcode.measure import AdcConfig, NoiseConfig, Pilot

from oracles import H15, H7_TOY, TABLE_15

UNIT = GainAlphabet((1,))


def test_alphabet_validation():
    with pytest.raises(ValueError):
        GainAlphabet(())
    with pytest.raises(ValueError):
        GainAlphabet((1, 0))
    with pytest.raises(ValueError):
        GainAlphabet((1, 1 + 0j))


def test_lattice_alphabet():
    A = lattice_alphabet(3)
    assert len(A) == 80
    assert A.values[0] == -4 - 4j and A.values[-1] == 4 + 4j
    assert 0 not in A.values


def test_table_l0():
    T = build_table(hamming_code(4), 0, UNIT)
    assert len(T) == 1 and not T.syndromes.any() and not T.channel(0).any()


def test_table_reproduces_published_mapping():
    T = build_table(hamming_code(4), 1, UNIT)
    assert len(T) == 16
    assert set(np.unique(T.syndromes)) <= {0, 1}
    for idx, (syn, bin_) in enumerate(TABLE_15):
        assert T.syndromes[idx].real.tolist() == list(syn)
        expected = np.zeros(15)
        if bin_ is not None:
            expected[bin_] = 1
        assert np.array_equal(T.channel(idx), expected)


def test_toy_7_antenna_table():
    T = build_table(H7_TOY, 1, UNIT)
    assert len(T) == 8
    # path at cos(phi) = 5/7 sits in bin 5 -> syndrome is column 5 of H
    q = np.zeros(7)
    q[5] = 1
    idx = next(i for i in range(len(T)) if np.array_equal(T.channel(i), q))
    assert T.syndromes[idx].real.tolist() == H7_TOY[:, 5].tolist()


@pytest.mark.parametrize("n,L,A", [(15, 1, 80), (8, 2, 80), (7, 1, 3), (8, 2, 3)])
def test_table_size(n, L, A):
    from math import comb

    expected = sum(comb(n, t) * A**t for t in range(L + 1))
    assert table_size(n, L, A) == expected
    assert table_size(15, 1, 80) == 1201


def test_table_entries_and_order():
    code = code_for(8, 2)
    A = GainAlphabet((1, -1, 1j))
    T = build_table(code, 2, A)
    assert len(T) == 1 + 8 * 3 + 28 * 9
    assert not T.syndromes[0].any()
    # support size ascending, then lexicographic support, then alphabet order
    keys = []
    for i in range(len(T)):
        sup = tuple(int(s) for s in T.supports[i] if s >= 0)
        gains = tuple(A.values.index(g) for g in T.gains[i][: len(sup)])
        keys.append((len(sup), sup, gains))
    assert keys == sorted(keys)
    for i in range(len(T)):
        assert np.allclose(T.syndromes[i], code.H @ T.channel(i))


def test_capacity_error():
    with pytest.raises(TableCapacityError):
        build_table(code_for(8, 2), 2, lattice_alphabet(3), budget=1000)


def test_nearest_examples():
    T = build_table(hamming_code(4), 1, UNIT)
    q4 = np.zeros(15)
    q4[4] = 1
    assert np.array_equal(nearest(T, [1.1, 0.9, 0.05, -0.02]), q4)
    assert not nearest(T, np.zeros(4)).any()
    for i in range(len(T)):
        assert nearest_index(T, T.syndromes[i]) == i


def test_nearest_example_by_brute_force():
    y = np.array([1.1, 0.9, 0.05, -0.02])
    best = min(range(16), key=lambda j: np.linalg.norm(y - np.array(TABLE_15[j][0])))
    assert TABLE_15[best][1] == 4


def test_nearest_ties_pick_lowest_index():
    T = build_table(hamming_code(4), 1, UNIT)
    # equidistant from [0 0 0 0] and [1 0 0 0]
    assert nearest_index(T, [0.5, 0, 0, 0]) == 0
    # equidistant from [1 1 0 0] (bin 4, entry 5) and [1 0 0 0] (bin 0, entry 1)
    assert nearest_index(T, [1, 0.5, 0, 0]) == 1


def test_nearest_shape_check():
    T = build_table(hamming_code(4), 1, UNIT)
    with pytest.raises(ValueError):
        nearest(T, [1, 0, 0])


def test_distance():
    assert distance([1 + 1j, 0], [0, 0]) == pytest.approx(np.sqrt(2))


@given(st.integers(0, 1200), st.floats(0, 0.499), st.floats(0, 2 * np.pi), st.integers(0, 3))
def test_nearest_stable_within_half_min_distance(idx, frac, phase, axis):
    T = build_table(hamming_code(4), 1, lattice_alphabet(3))
    dmin = check_table(T).min_distance
    v = np.zeros(4, dtype=complex)
    v[axis] = np.exp(1j * phase)
    y = T.syndromes[idx] + frac * dmin * v
    assert nearest_index(T, y) == idx


def test_sufficiency_unit_alphabet():
    rep = sufficiency_check(hamming_code(4), 1, UNIT)
    assert rep.passed and rep.entries == 16
    assert rep.min_distance == pytest.approx(1.0)


def test_sufficiency_small_alphabet_two_paths():
    rep = sufficiency_check(code_for(8, 2), 2, GainAlphabet((1, -1, 1j)))
    assert rep.passed and rep.entries == 1 + 24 + 252


@pytest.mark.parametrize("code", [hamming_code(3), hamming_code(4)])
def test_sufficiency_failure_beyond_capability(code):
    rep = sufficiency_check(code, 2, UNIT)
    assert not rep.passed and rep.min_distance == 0
    a, b = rep.collision_channels
    assert not np.array_equal(a, b)
    assert np.allclose(code.H @ a, code.H @ b)


def test_sufficiency_matches_pairwise_brute_force():
    T = build_table(hamming_code(3), 1, GainAlphabet((1, -1, 2j)))
    d = min(np.linalg.norm(T.syndromes[i] - T.syndromes[j]) for i, j in itertools.combinations(range(len(T)), 2))
    assert check_table(T).min_distance == pytest.approx(d)


def test_table_json_round_trip(tmp_path):
    T = build_table(code_for(8, 2), 2, GainAlphabet((1, -1j)))
    save_table(tmp_path / "t.json", T)
    T2 = load_table(tmp_path / "t.json")
    assert np.array_equal(T2.syndromes, T.syndromes)
    assert np.array_equal(T2.supports, T.supports)
    assert np.array_equal(T2.gains, T.gains)
    assert T2.matches(T.H, 2, T.alphabet)


def test_cached_table_reuse(tmp_path):
    code = hamming_code(3)
    path = tmp_path / "xi.json"
    T1 = cached_table(path, code, 1, UNIT)
    stamp = path.stat().st_mtime_ns
    T2 = cached_table(path, code, 1, UNIT)
    assert path.stat().st_mtime_ns == stamp
    assert np.array_equal(T1.syndromes, T2.syndromes)
    # a different alphabet invalidates the cache
    T3 = cached_table(path, code, 1, GainAlphabet((1, -1)))
    assert len(T3) == 15


def _tables(plan, alphabet):
    xi1 = build_table(plan.code_rx, plan.code_rx.e_n, alphabet)
    xi2 = None if plan.code_tx is None else build_table(plan.code_tx, plan.code_tx.e_n, alphabet)
    return xi1, xi2


def test_discover_zero_channel():
    g = ArrayGeometry(15, 15)
    plan = build_plan(g, 1)
    res = discover(ChannelMatrix(g, np.zeros((15, 15), dtype=complex)), plan, _tables(plan, UNIT), Pilot(1.0))
    assert not res.Qa_hat.any() and res.xi2_calls == 0


def test_discover_single_antenna_tx():
    g = ArrayGeometry(1, 7)
    plan = build_plan(g, 1)
    tables = _tables(plan, UNIT)
    for j in range(7):
        res = discover(build_channel([Path(j, 0, 1.0)], g), plan, tables, Pilot(1.0))
        assert np.argmax(np.abs(res.Qa_hat[:, 0])) == j
        assert np.max(np.abs(res.Qa_hat - angular_from_paths([Path(j, 0, 1.0)], g))) < 1e-9


def test_discover_all_single_paths_15x15():
    g = ArrayGeometry(15, 15)
    plan = build_plan(g, 1)
    tables = _tables(plan, GainAlphabet((1, 0.5 - 2j)))
    for r, t in itertools.product(range(15), range(15)):
        for gain in (1, 0.5 - 2j):
            paths = [Path(r, t, gain)]
            res = discover(build_channel(paths, g), plan, tables, Pilot(1.0))
            assert np.max(np.abs(res.Qa_hat - angular_from_paths(paths, g))) < 1e-9
            assert res.xi2_calls == 1


def test_discover_randomized_15x15_pilot_scaling():
    g = ArrayGeometry(15, 15)
    plan = build_plan(g, 1)
    rng = np.random.default_rng(3)
    pilot = Pilot(9.0)
    for _ in range(50):
        gain = complex(rng.standard_normal(), rng.standard_normal())
        tables = _tables(plan, GainAlphabet((gain,)))
        paths = [Path(int(rng.integers(15)), int(rng.integers(15)), gain)]
        res = discover(build_channel(paths, g), plan, tables, pilot, NoiseConfig(0.0))
        assert np.max(np.abs(res.Qa_hat - angular_from_paths(paths, g))) < 1e-9


def test_discover_quantized_lattice_gain_is_exact():
    # a gain on the ADC lattice produces an exact table hit
    g = ArrayGeometry(15, 15)
    plan = build_plan(g, 1)
    adc = AdcConfig(3, 4.0)
    tables = _tables(plan, lattice_alphabet(3))
    paths = [Path(6, 11, 3 - 2j)]
    res = discover(build_channel(paths, g), plan, tables, Pilot(1.0), None, adc)
    assert np.max(np.abs(res.Qa_hat - angular_from_paths(paths, g))) < 1e-9


def test_discover_intermediates():
    g = ArrayGeometry(15, 15)
    plan = build_plan(g, 1)
    paths = [Path(4, 2, 1.0)]
    res = discover(build_channel(paths, g), plan, _tables(plan, UNIT), Pilot(1.0))
    # precoder j sees the path iff H[j, tx_bin] = 1
    for j in range(4):
        assert np.allclose(res.syndromes[j], H15[j, 2] * H15[:, 4])
    assert np.allclose(res.tx_syndromes[4], H15[:, 2])
    assert not np.delete(res.tx_syndromes, 4, axis=0).any()


def test_discover_shape_mismatch():
    g = ArrayGeometry(15, 15)
    plan = build_plan(g, 1)
    with pytest.raises(ValueError):
        discover(ChannelMatrix(ArrayGeometry(8, 8), np.zeros((8, 8))), plan, _tables(plan, UNIT), Pilot(1.0))


def test_discover_xi2_calls_bounded_under_noise():
    g = ArrayGeometry(8, 8)
    plan = build_plan(g, 2)
    tables = _tables(plan, GainAlphabet((1, -1)))
    rng = np.random.default_rng(0)
    for _ in range(20):
        Q = build_channel([Path(1, 2, 1.0), Path(5, 7, -1.0)], g)
        res = discover(Q, plan, tables, Pilot(1.0), NoiseConfig(0.5, rng))
        assert res.xi2_calls <= 8


@functools.lru_cache(maxsize=None)
def _big_table():
    return build_table(code_for(8, 2), 2, lattice_alphabet(3))


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 3.0))
def test_indexed_nearest_matches_linear_scan(seed, spread):
    from beamcode import discovery

    T = _big_table()
    rng = np.random.default_rng(seed)
    base = T.syndromes[rng.integers(len(T))]
    ys = [base + spread * (rng.standard_normal(6) + 1j * rng.standard_normal(6)),
          np.round(base + spread * rng.standard_normal(6) * 2) / 2]  # fmt: skip
    for y in ys:
        diff = T.syndromes - y
        d2 = (diff.real**2 + diff.imag**2).sum(axis=1)
        best = d2.min()
        expected = int(np.flatnonzero(d2 <= best + 1e-9 * (best + np.vdot(y, y).real))[0])
        assert len(T) >= discovery.INDEX_THRESHOLD
        assert nearest_index(T, y) == expected
