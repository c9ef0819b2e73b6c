"""Shared fixtures: one small simulated acquisition reused across suites."""

from __future__ import annotations

import numpy as np
import pytest

from thermoseg.dataset import SequenceStore
from thermoseg.physics import (CFRP, PTFE, DefectSpec, PulseSpec, SimScene,
                               simulate_sequence)

# One circular inclusion at a 3-voxel depth; 120 frames at 10 Hz span the
# contrast peak (~2.7 s) plus enough decay that the trailing band really
# is post-transient, as residual-heat correction assumes.  Small enough to
# simulate in well under a second.
DEMO_ROWS = 24
DEMO_COLS = 24


def demo_scene(seed: int = 7, *, gaussian_sigma: float = 0.03,
               fixed_pattern_sigma: float = 0.02,
               illumination: np.ndarray | None = None,
               scene_id: str = "demo-0001") -> SimScene:
    return SimScene(
        rows=DEMO_ROWS, cols=DEMO_COLS, pixel_pitch=5e-4,
        thickness=4e-3, layers=16, material=CFRP,
        pulse=PulseSpec(energy=1.5e4, illumination_field=illumination),
        defects=(DefectSpec(shape="circle", center=(12.0, 12.0), size=5.0,
                            depth=7.5e-4, thickness=7.5e-4,
                            fill_properties=PTFE),),
        frame_rate=10.0, frames=120,
        gaussian_sigma=gaussian_sigma,
        fixed_pattern_sigma=fixed_pattern_sigma,
        seed=seed, scene_id=scene_id)


@pytest.fixture(scope="session")
def demo_pair():
    """(ThermalSequence, GroundTruth) of the demo scene, simulated once."""
    return simulate_sequence(demo_scene())


@pytest.fixture()
def demo_store(tmp_path, demo_pair):
    """A fresh store containing the demo sequence and its ground truth."""
    seq, gt = demo_pair
    store = SequenceStore(tmp_path / "store", create=True)
    store.write(seq, gt)
    return store
