"""Volumetric sequence housing: on-disk store, frame budgeting, splits."""

from .store import (  # noqa: F401
    GroundTruth,
    SequenceStore,
    ThermalSequence,
    read_pgm,
    write_pgm,
)
from .sampling import (  # noqa: F401
    DEFAULT_RESIZE,
    DEFAULT_SEQUENCES,
    DEFAULT_SKIP_HEAD,
    DEFAULT_SKIP_TAIL,
    DEFAULT_STRIDE,
    SamplingConfig,
    frame_budget,
    prepare_stack,
    residual_heat_correct,
    residual_tail_mean,
    resize_frame,
    resize_mask,
    sample_frames,
    subtract_tail_mean,
)
from .split import SplitPlan, kfold, split_dataset, build_plan  # noqa: F401
