"""Binary linear block codes: construction, search and syndrome decoding."""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gf2


class InfeasibleCodeError(ValueError):
    """No code exists (within the search bounds) for the requested parameters."""


MAX_SEARCH_LENGTH = 16
# set-update work allowed per parity length before moving on
SEARCH_BUDGET = 5_000_000

# (15,11,3) Hamming parity check used for the 15-antenna example; kept
# verbatim so syndrome <-> direction tables match the published mapping.
HAMMING_15_H = np.array(
    [
        [1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1],
        [0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0],
        [0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1, 0],
        [0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)

# Frozen result of search_code(8, 2): an (8,2,5) code in systematic form.
CODE_8_2_H = np.array(
    [
        [0, 1, 1, 0, 0, 0, 0, 0],
        [0, 1, 0, 1, 0, 0, 0, 0],
        [1, 0, 0, 0, 1, 0, 0, 0],
        [1, 0, 0, 0, 0, 1, 0, 0],
        [1, 1, 0, 0, 0, 0, 1, 0],
        [1, 1, 0, 0, 0, 0, 0, 1],
    ],
    dtype=np.uint8,
)


def error_capability(d: int) -> int:
    """Number of correctable errors for minimum distance ``d``."""
    if d < 1:
        raise ValueError(f"invalid minimum distance {d}")
    return (d - 1) // 2 if d % 2 else (d - 2) // 2


def _codewords(G: np.ndarray) -> np.ndarray:
    k = G.shape[0]
    info = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.uint8)
    return gf2.matmul(info, G)


def minimum_distance(G) -> int:
    """Brute-force minimum nonzero codeword weight (2^k codewords)."""
    words = _codewords(gf2.as_gf2(G, ndim=2))
    weights = words.sum(axis=1)
    nonzero = weights[weights > 0]
    if nonzero.size == 0:
        raise ValueError("code has no nonzero codewords")
    return int(nonzero.min())


@dataclass(frozen=True)
class LinearBlockCode:
    """An (n, k, d) binary linear block code with generator and parity check."""

    n: int
    k: int
    d: int
    G: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)

    @property
    def e_n(self) -> int:
        return error_capability(self.d)

    @property
    def m(self) -> int:
        """Number of parity bits, i.e. syndrome length n - k."""
        return self.n - self.k

    @classmethod
    def from_parity_check(cls, H) -> "LinearBlockCode":
        """Build a code from a full-row-rank parity check matrix."""
        H = gf2.as_gf2(H, ndim=2)
        m, n = H.shape
        if gf2.rank(H) != m:
            raise gf2.NotACodeError("parity check matrix is rank deficient")
        G = gf2.null_space(H)
        if G.shape[0] == 0:
            raise gf2.NotACodeError("parity check leaves only the zero codeword")
        return cls(n=n, k=G.shape[0], d=minimum_distance(G), G=G, H=H)

    def __str__(self) -> str:
        return f"({self.n},{self.k},{self.d})"


def _canonical_hamming_h(r: int) -> np.ndarray:
    # row 0 is the most significant bit of each column value
    bits = lambda v: [(v >> (r - 1 - i)) & 1 for i in range(r)]
    unit = {1 << (r - 1 - i) for i in range(r)}
    others = [v for v in range(1, 2**r) if v not in unit]
    cols = [bits(v) for v in others] + [bits(1 << (r - 1 - i)) for i in range(r)]
    return np.array(cols, dtype=np.uint8).T


def hamming_code(r: int) -> LinearBlockCode:
    """The (2^r - 1, 2^r - 1 - r, 3) Hamming code.

    For r = 4 the parity check is the published 4x15 matrix. Otherwise the
    last r columns form I_r and the remaining nonzero columns follow in
    increasing binary value (row 0 most significant).
    """
    if r < 2:
        raise ValueError("Hamming codes need r >= 2")
    H = HAMMING_15_H.copy() if r == 4 else _canonical_hamming_h(r)
    return LinearBlockCode.from_parity_check(H)


class _BudgetExhausted(Exception):
    pass


def _find_columns(n: int, m: int, span: int, budget: int) -> list[int] | None:
    """Backtrack for n-m non-unit m-bit columns so that, together with the m
    unit columns, every ``span`` columns are linearly independent.

    Columns are integers; candidates are tried in increasing value so the
    first solution found is canonical. Gives up (returns None) once the
    set-update work exceeds ``budget`` element operations.
    """
    unit = [1 << (m - 1 - i) for i in range(m)]
    # reach[j]: XORs of at most j chosen columns, j < span
    reach = [{0}]
    for j in range(1, span):
        reach.append(reach[-1] | {s ^ u for s in reach[-1] for u in unit})
    need = n - m
    # a column independent of any span-1 unit columns has weight >= span
    candidates = [v for v in range(1, 2**m) if v.bit_count() >= span]
    work = 0

    def extend(reach, start, chosen):
        nonlocal work
        if len(chosen) == need:
            return chosen
        for idx in range(start, len(candidates)):
            if len(candidates) - idx < need - len(chosen):
                return None
            c = candidates[idx]
            if c in reach[span - 1]:
                continue
            work += sum(len(r) for r in reach)
            if work > budget:
                raise _BudgetExhausted
            new = [reach[0]]
            for j in range(1, span):
                new.append(reach[j] | {s ^ c for s in reach[j - 1]})
            found = extend(new, idx + 1, chosen + [c])
            if found is not None:
                return found
        return None

    try:
        return extend(reach, 0, [])
    except _BudgetExhausted:
        return None


def _ball_size(n: int, e: int) -> int:
    return sum(comb(n, i) for i in range(e + 1))


def search_code(n: int, e_required: int, budget: int = SEARCH_BUDGET) -> LinearBlockCode:
    """Highest-rate length-n code correcting ``e_required`` errors.

    Perfect single-error lengths (n = 2^r - 1) return the Hamming code.
    Otherwise parity-check lengths m = 1, 2, ... are tried in turn and for
    each an exhaustive backtracking search over systematic parity checks
    ``[P^T | I_m]`` looks for n columns with every 2e of them independent,
    which is equivalent to d >= 2e + 1. The first m that succeeds gives
    k = n - m. A length m whose search exceeds ``budget`` set-update operations
    is skipped, so k is maximal only among exhaustively settled lengths;
    every shipped case (n <= 15 with e <= 2) settles well inside the budget.
    The search is deterministic.

    Raises:
        InfeasibleCodeError: if no code with k >= 1 exists.
    """
    if n < 1 or n > MAX_SEARCH_LENGTH:
        raise InfeasibleCodeError(f"code length n={n} outside 1..{MAX_SEARCH_LENGTH}")
    if e_required < 1:
        raise ValueError("e_required must be >= 1")
    r = (n + 1).bit_length() - 1
    if e_required == 1 and 2**r - 1 == n and r >= 2:
        return hamming_code(r)
    span = 2 * e_required
    for m in range(1, n):
        if min(span, n) > m or 2**m < _ball_size(n, e_required):
            # too few syndromes for the correctable patterns
            continue
        cols = _find_columns(n, m, span, budget)
        if cols is None:
            continue
        unit = [1 << (m - 1 - i) for i in range(m)]
        values = cols + unit
        H = np.array([[(v >> (m - 1 - i)) & 1 for v in values] for i in range(m)], dtype=np.uint8)
        code = LinearBlockCode.from_parity_check(H)
        if code.d < 2 * e_required + 1:  # pragma: no cover - search invariant
            raise AssertionError("column search produced a weak code")
        return code
    raise InfeasibleCodeError(f"no length-{n} code corrects {e_required} errors")


def code_for(n: int, e_required: int) -> LinearBlockCode:
    """Shipped code for (n, e): frozen fixtures first, then ``search_code``."""
    if (n, e_required) == (8, 2):
        return LinearBlockCode.from_parity_check(CODE_8_2_H)
    return search_code(n, e_required)


def encode(x, code: LinearBlockCode) -> np.ndarray:
    x = gf2.as_gf2(x, ndim=1)
    if x.size != code.k:
        raise gf2.ShapeError(f"information word length {x.size} != k={code.k}")
    return gf2.matmul(x, code.G)


def syndrome(r, code: LinearBlockCode) -> np.ndarray:
    r = gf2.as_gf2(r, ndim=1)
    if r.size != code.n:
        raise gf2.ShapeError(f"received word length {r.size} != n={code.n}")
    return gf2.matmul(r, code.H.T)


class StandardArray:
    """Syndrome -> coset leader lookup.

    Leaders are chosen by minimum weight, ties broken by the lexicographically
    smallest support (``itertools.combinations`` order).
    """

    def __init__(self, code: LinearBlockCode):
        self.code = code
        size = 2**code.m
        leaders: dict[bytes, np.ndarray] = {}
        for w in range(code.n + 1):
            for support in itertools.combinations(range(code.n), w):
                e = np.zeros(code.n, dtype=np.uint8)
                e[list(support)] = 1
                key = syndrome(e, code).tobytes()
                if key not in leaders:
                    leaders[key] = e
            if len(leaders) == size:
                break
        self._leaders = leaders

    def __len__(self) -> int:
        return len(self._leaders)

    def __getitem__(self, s) -> np.ndarray:
        return self._leaders[gf2.as_gf2(s, ndim=1).tobytes()].copy()

    def items(self):
        m = self.code.m
        for key, e in self._leaders.items():
            yield np.frombuffer(key, dtype=np.uint8)[:m].copy(), e.copy()


def syndrome_decode(r, code: LinearBlockCode, table: StandardArray) -> tuple[np.ndarray, np.ndarray]:
    """Hard-decision decoding by table lookup.

    Returns:
        (c_hat, e_hat)
    """
    r = gf2.as_gf2(r, ndim=1)
    e_hat = table[syndrome(r, code)]
    return r ^ e_hat, e_hat


def write_matrix(path, M) -> None:
    """Write a binary matrix as plain text, one space-separated row per line."""
    M = gf2.as_gf2(M, ndim=2)
    Path(path).write_text("\n".join(" ".join(str(int(b)) for b in row) for row in M) + "\n")


def read_matrix(path) -> np.ndarray:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    return gf2.as_gf2([[int(b) for b in row] for row in rows], ndim=2)
