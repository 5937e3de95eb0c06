"""Synthetic congested-spectrum datasets, STFT preprocessing sweeps and mAP scoring."""

__version__ = "0.1.0"

from .charmetrics import Characterization, characterize
from .scenario import EmitterBurst, SceneConfig, SceneSpec, render_scene, sample_scenario
from .stft import Spectrogram, StftConfig, WindowType, make_window, render_image, spectrogram, stft, to_db
from .waveforms import BurstParams, IqBuffer, ModulationScheme, synthesize_burst

__all__ = [
    "BurstParams",
    "Characterization",
    "EmitterBurst",
    "IqBuffer",
    "ModulationScheme",
    "SceneConfig",
    "SceneSpec",
    "Spectrogram",
    "StftConfig",
    "WindowType",
    "characterize",
    "make_window",
    "render_image",
    "render_scene",
    "sample_scenario",
    "spectrogram",
    "stft",
    "synthesize_burst",
    "to_db",
]
