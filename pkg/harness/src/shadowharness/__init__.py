"""shadowharness: experiment sweeps and plots driven purely by the shadowkit CLI."""

from .runner import SweepSpec, run_sweep, replay_manifest
from .plots import plot_results

__version__ = "0.1.0"
