"""Unit measurements ``w^H Q f s + w^H n`` and mid-tread I/Q quantization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beams import MeasurementPlan
from .channel import ChannelMatrix, gain_for_snr


@dataclass(frozen=True)
class AdcConfig:
    """Mid-tread ADC pair with levels ``-2^(b-1) .. 2^(b-1)`` on each rail.

    ``full_scale`` is the rail amplitude mapped to the top level.
    """

    b: int = 3
    full_scale: float = 1.0

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("ADC resolution b must be >= 1")
        if not self.full_scale > 0:
            raise ValueError("full_scale must be positive")

    @property
    def top(self) -> int:
        return 2 ** (self.b - 1)

    @property
    def n_levels(self) -> int:
        return 2**self.b + 1

    @property
    def step(self) -> float:
        return self.full_scale / self.top


@dataclass
class NoiseConfig:
    """Receiver noise of power ``n0`` per antenna.

    With ``post_combiner=True`` the noise is instead injected after the
    combiner as CN(0, n0) per measurement, independent of the beam norm.
    """

    n0: float
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    post_combiner: bool = False

    def __post_init__(self):
        if self.n0 < 0:
            raise ValueError("noise power must be non-negative")


@dataclass(frozen=True)
class Pilot:
    """Pilot of power P; the symbol is the real root ``sqrt(P)`` (phase reference)."""

    power: float = 1.0

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError("pilot power must be positive")

    @property
    def symbol(self) -> float:
        return float(np.sqrt(self.power))


def _round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def quantize_levels(x, adc: AdcConfig):
    """Integer I/Q levels, returned as a complex array (or scalar)."""
    x = np.asarray(x, dtype=complex)
    scale = adc.top / adc.full_scale
    re = np.clip(_round_half_away(x.real * scale), -adc.top, adc.top)
    im = np.clip(_round_half_away(x.imag * scale), -adc.top, adc.top)
    return re + 1j * im


def quantize(x, adc: AdcConfig | None):
    """Quantize each rail independently; ``adc=None`` bypasses quantization."""
    if adc is None:
        return np.asarray(x, dtype=complex)
    return quantize_levels(x, adc) * adc.step


def _noise_block(noise: NoiseConfig | None, shape) -> np.ndarray:
    if noise is None or noise.n0 == 0:
        return np.zeros(shape, dtype=complex)
    z = noise.rng.standard_normal((2,) + tuple(shape))
    return np.sqrt(noise.n0 / 2) * (z[0] + 1j * z[1])


def raw_measure(Q: ChannelMatrix, f, w, pilot: Pilot, noise: NoiseConfig | None = None) -> complex:
    """One unquantized measurement with a fresh CN(0, N0 I) noise vector."""
    f = np.asarray(f, dtype=complex)
    w = np.asarray(w, dtype=complex)
    clean = w.conj() @ Q.Q @ f * pilot.symbol
    if noise is not None and noise.post_combiner:
        return complex(clean + _noise_block(noise, ())[()])
    return complex(clean + w.conj() @ _noise_block(noise, (w.size,)))


def measure_syndrome(
    Q: ChannelMatrix,
    plan: MeasurementPlan,
    j: int,
    pilot: Pilot,
    noise: NoiseConfig | None = None,
    adc: AdcConfig | None = None,
) -> np.ndarray:
    """Quantized measurements of all combiners while precoder ``j`` is active."""
    if plan.geometry.n_t == 1:
        j = 0
    f = plan.precoders[j]
    W = plan.combiners
    clean = W.conj() @ (Q.Q @ f) * pilot.symbol
    if noise is not None and noise.post_combiner:
        return quantize(clean + _noise_block(noise, (W.shape[0],)), adc)
    n = _noise_block(noise, W.shape)
    return quantize(clean + np.einsum("ij,ij->i", W.conj(), n), adc)


def calibrated_adc(b: int, L: int, snr_min: float, snr_spread: float, noise_power: float, pilot: Pilot) -> AdcConfig:
    """ADC whose full scale is the largest noiseless measurement magnitude.

    That is ``L`` paths at the strongest permitted SNR, each contributing its
    amplitude once per armed direction.
    """
    a_max = gain_for_snr(snr_min + snr_spread, noise_power, pilot.power)
    return AdcConfig(b=b, full_scale=max(L, 1) * a_max * pilot.symbol)


def is_detectable(gain: complex, pilot: Pilot, adc: AdcConfig | None) -> bool:
    """A path is detectable when its noiseless solo measurement leaves level 0."""
    if adc is None:
        return gain != 0
    return bool(quantize_levels(gain * pilot.symbol, adc) != 0)
