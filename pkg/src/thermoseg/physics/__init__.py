"""First-principles thermal simulation of pulsed optical excitation."""

from .model import (  # noqa: F401
    AIR,
    CFRP,
    EPOXY,
    PTFE,
    DefectSpec,
    MaterialProps,
    PulseSpec,
    SimScene,
    gradient_illumination,
    uniform_illumination,
    vignette_illumination,
)
from .analytic import (  # noqa: F401
    defect_contrast,
    peak_contrast_time,
    slab_surface_temperature,
    temperature_at_depth,
)
from .solver import simulate_fields, simulate_sequence  # noqa: F401
from .scenefile import parse_scene_config, load_scene_file, scene_to_config  # noqa: F401
