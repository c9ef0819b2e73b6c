"""Pulsed-thermography defect inspection workbench.

Simulates infrared thermal sequences of defective specimens from first
principles, implements frame budgeting / residual-heat correction /
splitting, provides classical contrast enhancement (PCA, phase images,
log-log polynomial reconstruction), box-prompt defect segmentation, and
evaluation metrics, behind a CLI and an HTTP service.
"""

__version__ = "0.1.0"

from .physics import MaterialProps, PulseSpec, DefectSpec, SimScene  # noqa: F401
from .dataset import SamplingConfig, ThermalSequence, GroundTruth  # noqa: F401
