"""On-grid sparse channels for uniform linear arrays.

Angular cosines are measured in grid units: bin ``j`` sits at
``Omega_j = j / L`` with ``L = n * delta`` the normalized array length.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path as _FsPath

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    n_t: int
    n_r: int
    delta_t: float = 0.5
    delta_r: float = 0.5

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.delta_t <= 0 or self.delta_r <= 0:
            raise ValueError("antenna spacing must be positive")

    @property
    def length_t(self) -> float:
        return self.n_t * self.delta_t

    @property
    def length_r(self) -> float:
        return self.n_r * self.delta_r

    def grid_cosine(self, j: int, side: str = "rx") -> float:
        return j / (self.length_r if side == "rx" else self.length_t)

    def side(self, side: str) -> tuple[int, float]:
        """(antenna count, spacing) for ``"rx"`` or ``"tx"``."""
        if side == "rx":
            return self.n_r, self.delta_r
        if side == "tx":
            return self.n_t, self.delta_t
        raise ValueError(f"side must be 'rx' or 'tx', got {side!r}")


@dataclass(frozen=True)
class Path:
    """One propagation path on the angular grid."""

    rx_bin: int
    tx_bin: int
    gain: complex


@dataclass
class ChannelMatrix:
    geometry: ArrayGeometry
    Q: np.ndarray


def spatial_signature(omega: float, n: int, delta: float) -> np.ndarray:
    """Unit-norm ULA spatial signature along angular cosine ``omega``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = np.arange(n)
    return np.exp(-2j * np.pi * m * delta * omega) / np.sqrt(n)


def dft_matrix(n: int, delta: float = 0.5) -> np.ndarray:
    """Unitary matrix whose column j is the signature of grid bin j."""
    length = n * delta
    return np.column_stack([spatial_signature(j / length, n, delta) for j in range(n)])


def _check_bins(paths, geom: ArrayGeometry):
    for p in paths:
        if not (0 <= p.rx_bin < geom.n_r and 0 <= p.tx_bin < geom.n_t):
            raise ValueError(f"path {p} outside a {geom.n_r}x{geom.n_t} grid")


def build_channel(paths, geom: ArrayGeometry) -> ChannelMatrix:
    """Sum of rank-one path contributions ``gain * e_r e_t^H``."""
    _check_bins(paths, geom)
    Q = np.zeros((geom.n_r, geom.n_t), dtype=complex)
    for p in paths:
        e_r = spatial_signature(geom.grid_cosine(p.rx_bin, "rx"), geom.n_r, geom.delta_r)
        e_t = spatial_signature(geom.grid_cosine(p.tx_bin, "tx"), geom.n_t, geom.delta_t)
        Q += p.gain * np.outer(e_r, e_t.conj())
    return ChannelMatrix(geom, Q)


def to_angular(ch: ChannelMatrix) -> np.ndarray:
    """Angular-domain channel ``U_r^H Q U_t``."""
    g = ch.geometry
    U_r = dft_matrix(g.n_r, g.delta_r)
    U_t = dft_matrix(g.n_t, g.delta_t)
    return U_r.conj().T @ ch.Q @ U_t


def from_angular(Qa: np.ndarray, geom: ArrayGeometry) -> ChannelMatrix:
    U_r = dft_matrix(geom.n_r, geom.delta_r)
    U_t = dft_matrix(geom.n_t, geom.delta_t)
    return ChannelMatrix(geom, U_r @ Qa @ U_t.conj().T)


def angular_from_paths(paths, geom: ArrayGeometry) -> np.ndarray:
    """Angular channel written down directly from on-grid paths."""
    _check_bins(paths, geom)
    Qa = np.zeros((geom.n_r, geom.n_t), dtype=complex)
    for p in paths:
        Qa[p.rx_bin, p.tx_bin] += p.gain
    return Qa


def gain_for_snr(snr_db: float, noise_power: float, pilot_power: float) -> float:
    """Path amplitude |alpha| giving per-path SNR ``(P/N0)|alpha|^2``."""
    return float(np.sqrt(noise_power / pilot_power * 10 ** (snr_db / 10)))


def path_snr_db(gain: complex, noise_power: float, pilot_power: float) -> float:
    return float(10 * np.log10(pilot_power / noise_power * abs(gain) ** 2))


def sample_paths(
    L: int,
    snr_min: float,
    geom: ArrayGeometry,
    noise_power: float,
    pilot_power: float,
    rng: np.random.Generator,
    snr_spread: float = 20.0,
) -> list[Path]:
    """Draw L paths on distinct RX bins and distinct TX bins.

    Per-path SNR is uniform in dB over ``[snr_min, snr_min + snr_spread]``;
    phases are uniform.
    """
    if L < 0 or L > min(geom.n_t, geom.n_r):
        raise ValueError(f"cannot place L={L} paths on a {geom.n_r}x{geom.n_t} grid")
    if L == 0:
        return []
    rx = rng.choice(geom.n_r, size=L, replace=False)
    tx = rng.choice(geom.n_t, size=L, replace=False)
    snr = rng.uniform(snr_min, snr_min + snr_spread, size=L)
    phase = rng.uniform(0.0, 2 * np.pi, size=L)
    return [
        Path(int(r), int(t), gain_for_snr(s, noise_power, pilot_power) * np.exp(1j * ph))
        for r, t, s, ph in zip(rx, tx, snr, phase)
    ]


def channel_to_dict(paths, geom: ArrayGeometry) -> dict:
    return {
        "geometry": asdict(geom),
        "paths": [
            {"rx_bin": p.rx_bin, "tx_bin": p.tx_bin, "gain_re": float(np.real(p.gain)), "gain_im": float(np.imag(p.gain))}
            for p in paths
        ],
    }


def channel_from_dict(doc: dict) -> tuple[list[Path], ArrayGeometry]:
    geom = ArrayGeometry(**doc["geometry"])
    paths = [Path(int(p["rx_bin"]), int(p["tx_bin"]), complex(p["gain_re"], p["gain_im"])) for p in doc["paths"]]
    _check_bins(paths, geom)
    return paths, geom


def save_channel(path, paths, geom: ArrayGeometry) -> None:
    _FsPath(path).write_text(json.dumps(channel_to_dict(paths, geom), indent=2) + "\n")


def load_channel(path) -> tuple[list[Path], ArrayGeometry]:
    return channel_from_dict(json.loads(_FsPath(path).read_text()))
