"""Beam discovery for sparse mmWave channels using linear block codes.

Parity-check rows of a binary code select the arms of multi-armed beams;
the resulting measurements form a channel syndrome that a lookup table
maps back to the angular channel.
"""

from .beams import MeasurementPlan, build_plan
from .channel import ArrayGeometry, ChannelMatrix, Path, build_channel, to_angular
from .codes import InfeasibleCodeError, LinearBlockCode, code_for, hamming_code, search_code
from .config import ConfigError, SimConfig
from .discovery import GainAlphabet, SyndromeTable, TableCapacityError, build_table, discover, lattice_alphabet
from .evaluate import run_sweep, run_trial, score_trial
from .measure import AdcConfig, NoiseConfig, Pilot

__version__ = "0.1.0"

__all__ = [
    "AdcConfig",
    "ArrayGeometry",
    "ChannelMatrix",
    "ConfigError",
    "GainAlphabet",
    "InfeasibleCodeError",
    "LinearBlockCode",
    "MeasurementPlan",
    "NoiseConfig",
    "Path",
    "Pilot",
    "SimConfig",
    "SyndromeTable",
    "TableCapacityError",
    "build_channel",
    "build_plan",
    "build_table",
    "code_for",
    "discover",
    "hamming_code",
    "lattice_alphabet",
    "run_sweep",
    "run_trial",
    "score_trial",
    "search_code",
    "to_angular",
]
