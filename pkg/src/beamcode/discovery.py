"""Syndrome tables and beam discovery over multi-armed measurements.

A table enumerates every measurable sparse angular channel (at most ``L``
nonzero bins, values drawn from a finite gain alphabet) together with its
noiseless syndrome ``H q``. Decoding picks the entry closest in Euclidean
distance to the received syndrome.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import gf2
from .beams import MeasurementPlan
from .channel import ChannelMatrix
from .codes import LinearBlockCode
from .measure import AdcConfig, NoiseConfig, Pilot, measure_syndrome

DEFAULT_TABLE_BUDGET = 10**7
# tables at least this long get a k-d tree to narrow the nearest-entry scan
INDEX_THRESHOLD = 4096


class TableCapacityError(RuntimeError):
    """The requested syndrome table exceeds the entry budget."""


@dataclass(frozen=True)
class GainAlphabet:
    values: tuple

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if not vals:
            raise ValueError("gain alphabet is empty")
        if any(v == 0 for v in vals):
            raise ValueError("gain alphabet must not contain 0")
        if len(set(vals)) != len(vals):
            raise ValueError("gain alphabet has duplicates")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)


def lattice_alphabet(b: int) -> GainAlphabet:
    """All nonzero points of the ADC output lattice, in units of one level.

    Ordered by in-phase level, then quadrature level, both ascending.
    """
    top = 2 ** (b - 1)
    levels = range(-top, top + 1)
    return GainAlphabet(tuple(complex(a, q) for a in levels for q in levels if (a, q) != (0, 0)))


def table_size(n: int, L: int, alphabet_size: int) -> int:
    return sum(comb(n, t) * alphabet_size**t for t in range(L + 1))


@dataclass
class SyndromeTable:
    """Enumerated (syndrome, channel) pairs.

    Entry order: support size ascending, then lexicographic support, then
    gains in alphabet order. ``supports`` is padded with -1.
    """

    H: np.ndarray
    L: int
    alphabet: GainAlphabet
    syndromes: np.ndarray
    supports: np.ndarray
    gains: np.ndarray
    _tree: object = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    def __len__(self) -> int:
        return self.syndromes.shape[0]

    def channel(self, idx: int) -> np.ndarray:
        q = np.zeros(self.n, dtype=complex)
        sup = self.supports[idx]
        keep = sup >= 0
        q[sup[keep]] = self.gains[idx][keep]
        return q

    def to_dict(self) -> dict:
        return {
            "H": self.H.tolist(),
            "L": self.L,
            "alphabet": [[v.real, v.imag] for v in self.alphabet.values],
            "syndromes_re": self.syndromes.real.tolist(),
            "syndromes_im": self.syndromes.imag.tolist(),
            "supports": self.supports.tolist(),
            "gains_re": self.gains.real.tolist(),
            "gains_im": self.gains.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SyndromeTable":
        H = gf2.as_gf2(doc["H"], ndim=2)
        L = int(doc["L"])
        m = H.shape[0]
        syn = np.array(doc["syndromes_re"], dtype=float).reshape(-1, m) + 1j * np.array(
            doc["syndromes_im"], dtype=float
        ).reshape(-1, m)
        sup = np.array(doc["supports"], dtype=np.int64).reshape(-1, L)
        gains = np.array(doc["gains_re"], dtype=float).reshape(-1, L) + 1j * np.array(
            doc["gains_im"], dtype=float
        ).reshape(-1, L)
        alphabet = GainAlphabet(tuple(complex(re, im) for re, im in doc["alphabet"]))
        return cls(H, L, alphabet, syn, sup, gains)

    def tree(self) -> cKDTree:
        """k-d tree over the real embedding of the syndromes, built on first use."""
        if self._tree is None:
            self._tree = cKDTree(_embed(self.syndromes))
        return self._tree

    def matches(self, H, L: int, alphabet: GainAlphabet) -> bool:
        return self.L == L and self.alphabet == alphabet and np.array_equal(self.H, gf2.as_gf2(H, ndim=2))


def build_table(
    code: LinearBlockCode | np.ndarray,
    L: int,
    alphabet: GainAlphabet,
    budget: int = DEFAULT_TABLE_BUDGET,
) -> SyndromeTable:
    """Enumerate all measurable channels of ``code`` and their syndromes.

    Raises:
        TableCapacityError: if the entry count exceeds ``budget``.
    """
    H = gf2.as_gf2(code.H if isinstance(code, LinearBlockCode) else code, ndim=2)
    m, n = H.shape
    if L < 0:
        raise ValueError("L must be >= 0")
    size = table_size(n, L, len(alphabet))
    if size > budget:
        raise TableCapacityError(f"table needs {size} entries, budget is {budget}")
    Hr = gf2.lift_to_real(H)
    A = alphabet.as_array()
    width = max(L, 1)

    syn = np.zeros((size, m), dtype=complex)
    sup = np.full((size, width), -1, dtype=np.int64)
    gains = np.zeros((size, width), dtype=complex)
    row = 1  # entry 0 is the all-zero channel
    for t in range(1, L + 1):
        # all t-tuples of alphabet values in product order
        idx = np.array(list(itertools.product(range(len(A)), repeat=t)), dtype=np.int64).reshape(-1, t)
        G = A[idx]
        for support in itertools.combinations(range(n), t):
            block = slice(row, row + G.shape[0])
            syn[block] = G @ Hr[:, list(support)].T
            sup[block, :t] = support
            gains[block, :t] = G
            row += G.shape[0]
    assert row == size
    return SyndromeTable(H, L, alphabet, syn, sup, gains)


def _embed(z: np.ndarray) -> np.ndarray:
    return np.hstack([z.real, z.imag]) if z.ndim == 2 else np.concatenate([z.real, z.imag])


def nearest_index(table: SyndromeTable, y) -> int:
    """Index of the entry at minimum distance from ``y`` (lowest index on ties).

    Small tables are scanned linearly. Large ones first ask the k-d tree for
    every entry within the optimal distance plus the tie tolerance, then
    apply the same rule to that candidate set, so both paths agree.
    """
    if len(table) == 0:
        raise ValueError("empty syndrome table")
    y = np.asarray(y, dtype=complex)
    if y.shape != (table.m,):
        raise gf2.ShapeError(f"syndrome length {y.shape} != ({table.m},)")
    yy = float(np.vdot(y, y).real)
    if len(table) < INDEX_THRESHOLD:
        cand = None
        diff = table.syndromes - y
    else:
        tree = table.tree()
        point = _embed(y)
        d, _ = tree.query(point)
        radius = np.sqrt(d * d + 1e-9 * (d * d + yy)) * (1 + 1e-9) + 1e-12
        cand = np.array(sorted(tree.query_ball_point(point, radius)), dtype=np.int64)
        diff = table.syndromes[cand] - y
    d2 = (diff.real**2 + diff.imag**2).sum(axis=1)
    best = d2.min()
    first = int(np.flatnonzero(d2 <= best + 1e-9 * (best + yy))[0])
    return first if cand is None else int(cand[first])


def nearest(table: SyndromeTable, y) -> np.ndarray:
    """Channel of the table entry closest to the received syndrome ``y``."""
    return table.channel(nearest_index(table, y))


def distance(a, b) -> float:
    """Euclidean distance between two complex syndrome vectors."""
    d = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    return float(np.sqrt(np.vdot(d, d).real))


@dataclass
class DiscoveryResult:
    """Estimated angular channel with the intermediate steps that produced it.

    ``Qa_hat`` is in path-gain units. ``syndromes[j]`` holds the measured
    (quantized) syndrome for precoder ``j``; ``rx_channels[j]`` is the
    RX-side estimate decoded from it (table units); ``tx_syndromes[p]`` is
    the TX syndrome assembled for RX bin ``p``.
    """

    Qa_hat: np.ndarray
    syndromes: np.ndarray
    rx_channels: np.ndarray
    tx_syndromes: np.ndarray
    xi2_calls: int
    unit: float


def discover(
    Q: ChannelMatrix,
    plan: MeasurementPlan,
    tables: tuple[SyndromeTable, SyndromeTable | None],
    pilot: Pilot,
    noise: NoiseConfig | None = None,
    adc: AdcConfig | None = None,
) -> DiscoveryResult:
    """Beam discovery with RX syndromes per precoder, then TX syndromes per RX bin.

    Measurements are normalized by one ADC level (or by the pilot symbol
    when quantization is bypassed) before table lookup, so tables are built
    in those units.
    """
    g = plan.geometry
    if Q.Q.shape != (g.n_r, g.n_t):
        raise gf2.ShapeError(f"channel shape {Q.Q.shape} does not match plan {g.n_r}x{g.n_t}")
    xi1, xi2 = tables
    unit = adc.step if adc is not None else pilot.symbol

    syndromes = np.zeros((plan.m_2, plan.m_1), dtype=complex)
    rx_channels = np.zeros((plan.m_2, g.n_r), dtype=complex)
    for j in range(plan.m_2):
        syndromes[j] = measure_syndrome(Q, plan, j, pilot, noise, adc)
        rx_channels[j] = nearest(xi1, syndromes[j] / unit)

    tx_syndromes = rx_channels.T.copy()
    est = np.zeros((g.n_r, g.n_t), dtype=complex)
    calls = 0
    if g.n_t == 1:
        est[:, 0] = rx_channels[0]
    else:
        if xi2 is None:
            raise ValueError("multi-antenna transmitter needs a TX syndrome table")
        for p in range(g.n_r):
            if not np.any(tx_syndromes[p]):
                continue
            est[p] = nearest(xi2, tx_syndromes[p])
            calls += 1
    return DiscoveryResult(est * unit / pilot.symbol, syndromes, rx_channels, tx_syndromes, calls, unit)


@dataclass
class SufficiencyReport:
    passed: bool
    entries: int
    min_distance: float
    collision: tuple[int, int] | None = None
    collision_channels: tuple[np.ndarray, np.ndarray] | None = None


def sufficiency_check(
    code: LinearBlockCode | np.ndarray,
    L: int,
    alphabet: GainAlphabet,
    budget: int = DEFAULT_TABLE_BUDGET,
) -> SufficiencyReport:
    """Verify that all table syndromes are pairwise distinct.

    Reports the minimum pairwise distance; on failure exhibits one colliding
    pair of channels.
    """
    return check_table(build_table(code, L, alphabet, budget))


def check_table(table: SyndromeTable) -> SufficiencyReport:
    """Pairwise-distinctness report for an already built table."""
    if len(table) < 2:
        return SufficiencyReport(True, len(table), float("inf"))
    pts = _embed(table.syndromes)
    scale = max(float(np.abs(pts).max()), 1.0)
    tree = table.tree()
    dist, idx = tree.query(pts, k=2)
    # with exact duplicates the first neighbour may be the twin, not the point
    own = idx[:, 0] == np.arange(len(pts))
    other = np.where(own, idx[:, 1], idx[:, 0])
    d = np.where(own, dist[:, 1], dist[:, 0])
    i = int(np.argmin(d))
    dmin = float(d[i])
    if dmin <= 1e-9 * scale:
        a, b = sorted((i, int(other[i])))
        return SufficiencyReport(False, len(table), dmin, (a, b), (table.channel(a), table.channel(b)))
    return SufficiencyReport(True, len(table), dmin)


def save_table(path, table: SyndromeTable) -> None:
    Path(path).write_text(json.dumps(table.to_dict()))


def load_table(path) -> SyndromeTable:
    return SyndromeTable.from_dict(json.loads(Path(path).read_text()))


def cached_table(path, code: LinearBlockCode, L: int, alphabet: GainAlphabet, budget: int = DEFAULT_TABLE_BUDGET):
    """Load a table from ``path`` if it matches, otherwise build and store it."""
    if path is not None and Path(path).exists():
        table = load_table(path)
        if table.matches(code.H, L, alphabet):
            return table
    table = build_table(code, L, alphabet, budget)
    if path is not None:
        save_table(path, table)
    return table
