"""Python bindings for the dynamic spectrum access simulator."""

from ._dsa_sim import (
    FftLayout,
    SensorConfig,
    SimError,
    blackman_harris,
    capture,
    chunk_bandwidth,
    fft_layout,
    link_stats,
    run_dsa,
    run_scan,
    run_static,
    sense_dwell,
    sweep,
)

__all__ = [
    "FftLayout",
    "SensorConfig",
    "SimError",
    "blackman_harris",
    "capture",
    "chunk_bandwidth",
    "fft_layout",
    "link_stats",
    "run_dsa",
    "run_scan",
    "run_static",
    "sense_dwell",
    "sweep",
]
