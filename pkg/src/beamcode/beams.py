"""Multi-armed precoders and rx-combiners built from parity-check rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .channel import ArrayGeometry, spatial_signature
from .codes import LinearBlockCode, code_for


@dataclass(frozen=True)
class MeasurementPlan:
    """Combiners ``w_i`` (rows of ``combiners``) and precoders ``f_j``.

    ``code_tx`` is None for a single TX antenna; the plan then carries the
    trivial precoder ``[1]`` and ``m_2`` counts as 1 measurement slot.
    """

    geometry: ArrayGeometry
    code_rx: LinearBlockCode
    code_tx: LinearBlockCode | None
    combiners: np.ndarray
    precoders: np.ndarray

    @property
    def m_1(self) -> int:
        return self.combiners.shape[0]

    @property
    def m_2(self) -> int:
        return self.precoders.shape[0]

    @property
    def m_total(self) -> int:
        return self.m_1 * self.m_2


def combiner_from_row(H, i: int, geom: ArrayGeometry, side: str = "rx") -> np.ndarray:
    """Sum of the grid signatures selected by row ``i`` of ``H``.

    Arms are orthonormal, so the squared norm equals the row weight.
    Deliberately unnormalized: ``w^H e(Omega_j)`` is then exactly ``h_ij``.
    """
    H = gf2.as_gf2(H, ndim=2)
    n, delta = geom.side(side)
    if not 0 <= i < H.shape[0]:
        raise IndexError(f"row {i} out of range for {H.shape[0]} parity checks")
    if H.shape[1] != n:
        raise gf2.ShapeError(f"H has {H.shape[1]} columns but the {side} array has {n} antennas")
    length = n * delta
    w = np.zeros(n, dtype=complex)
    for j in np.flatnonzero(H[i]):
        w += spatial_signature(j / length, n, delta)
    return w


def beam_matrix(H, geom: ArrayGeometry, side: str = "rx") -> np.ndarray:
    """All multi-armed beams for ``H`` stacked as rows."""
    H = gf2.as_gf2(H, ndim=2)
    return np.vstack([combiner_from_row(H, i, geom, side) for i in range(H.shape[0])])


def build_plan(geom: ArrayGeometry, L: int) -> MeasurementPlan:
    """Pick codes matched to each array (length n, e_n >= L) and build beams.

    Raises:
        InfeasibleCodeError: propagated from the code search.
    """
    code_rx = code_for(geom.n_r, L)
    W = beam_matrix(code_rx.H, geom, "rx")
    if geom.n_t == 1:
        return MeasurementPlan(geom, code_rx, None, W, np.ones((1, 1), dtype=complex))
    code_tx = code_for(geom.n_t, L)
    F = beam_matrix(code_tx.H, geom, "tx")
    return MeasurementPlan(geom, code_rx, code_tx, W, F)


def wrap_cosine(omega: float, delta: float) -> float:
    """Alias a grid cosine into the visible period ``[-1/(2 delta), 1/(2 delta))``."""
    period = 1.0 / delta
    return (omega + period / 2) % period - period / 2


def pattern_at_cosines(w: np.ndarray, cosines, delta: float) -> np.ndarray:
    """Array gain ``|w^H e(cos)| * sqrt(n)`` at the given angular cosines."""
    n = w.size
    E = np.column_stack([spatial_signature(c, n, delta) for c in np.atleast_1d(cosines)])
    return np.abs(w.conj() @ E) * np.sqrt(n)


def beam_pattern(w: np.ndarray, geom: ArrayGeometry, phi_samples: int = 1024, side: str = "rx"):
    """Sample the beam gain uniformly over physical angle phi in [0, pi].

    Returns:
        (phi, gain) arrays of length ``phi_samples``.
    """
    if phi_samples < 2:
        raise ValueError("phi_samples must be >= 2")
    _, delta = geom.side(side)
    phi = np.linspace(0.0, np.pi, phi_samples)
    return phi, pattern_at_cosines(np.asarray(w), np.cos(phi), delta)


def count_peaks(gain: np.ndarray, rel_height: float = 0.5) -> int:
    """Local maxima of a sampled pattern reaching ``rel_height`` of the peak."""
    g = np.asarray(gain)
    inner = (g[1:-1] > g[:-2]) & (g[1:-1] >= g[2:])
    peaks = int(np.count_nonzero(inner & (g[1:-1] >= rel_height * g.max())))
    # endpoints count when the pattern is still rising into them
    peaks += int(g[0] > g[1] and g[0] >= rel_height * g.max())
    peaks += int(g[-1] > g[-2] and g[-1] >= rel_height * g.max())
    return peaks


def _weights_doc(V: np.ndarray) -> list[dict]:
    return [
        {
            "re": np.real(v).tolist(),
            "im": np.imag(v).tolist(),
            "magnitude": np.abs(v).tolist(),
            "phase_rad": np.angle(v).tolist(),
        }
        for v in V
    ]


def plan_to_dict(plan: MeasurementPlan) -> dict:
    """Per-antenna weights of every beam, as re/im and magnitude/phase pairs."""
    g = plan.geometry
    doc = {
        "geometry": {"n_t": g.n_t, "n_r": g.n_r, "delta_t": g.delta_t, "delta_r": g.delta_r},
        "code_rx": {"n": plan.code_rx.n, "k": plan.code_rx.k, "d": plan.code_rx.d, "H": plan.code_rx.H.tolist()},
        "code_tx": None,
        "m_1": plan.m_1,
        "m_2": plan.m_2,
        "combiners": _weights_doc(plan.combiners),
        "precoders": _weights_doc(plan.precoders),
    }
    if plan.code_tx is not None:
        c = plan.code_tx
        doc["code_tx"] = {"n": c.n, "k": c.k, "d": c.d, "H": c.H.tolist()}
    return doc
