"""Physical parameter types for the pulsed-thermography simulator.

Units are SI throughout: kg/m^3, J/(kg K), W/(m K), m, s, K. Lateral
geometry (defect centers and sizes) is expressed in pixels of the
simulation grid; `SimScene.pixel_pitch` maps pixels to meters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DomainError

_ALPHA_RTOL = 1e-9
_ILLUM_MEAN_RTOL = 1e-6


@dataclass(frozen=True)
class MaterialProps:
    """Homogeneous material: density, heat capacity, conductivity, diffusivity.

    The diffusivity is stored redundantly and must equal k / (rho * c);
    use `MaterialProps.of` to have it filled in.
    """

    density: float
    heat_capacity: float
    conductivity: float
    diffusivity: float

    def __post_init__(self) -> None:
        if self.density <= 0 or self.heat_capacity <= 0 or self.conductivity <= 0:
            raise DomainError("density, heat_capacity and conductivity must be > 0")
        alpha = self.conductivity / (self.density * self.heat_capacity)
        if abs(self.diffusivity - alpha) > _ALPHA_RTOL * alpha:
            raise DomainError(
                f"diffusivity {self.diffusivity!r} inconsistent with k/(rho*c) = {alpha!r}"
            )

    @classmethod
    def of(cls, density: float, heat_capacity: float, conductivity: float) -> "MaterialProps":
        if density <= 0 or heat_capacity <= 0 or conductivity <= 0:
            raise DomainError("density, heat_capacity and conductivity must be > 0")
        return cls(density, heat_capacity, conductivity,
                   conductivity / (density * heat_capacity))

    @property
    def volumetric_heat_capacity(self) -> float:
        """rho * c, J/(m^3 K)."""
        return self.density * self.heat_capacity

    @property
    def effusivity(self) -> float:
        """sqrt(rho * c * k), the front-surface response scale."""
        return float(np.sqrt(self.density * self.heat_capacity * self.conductivity))


# Representative materials; scenes are free to override.
CFRP = MaterialProps.of(1600.0, 1200.0, 0.8)
AIR = MaterialProps.of(1.2, 1005.0, 0.026)
EPOXY = MaterialProps.of(1200.0, 1100.0, 0.2)
PTFE = MaterialProps.of(2200.0, 1000.0, 0.25)


def uniform_illumination(rows: int, cols: int) -> np.ndarray:
    return np.ones((rows, cols))


def gradient_illumination(rows: int, cols: int, low: float, high: float,
                          axis: int = 1) -> np.ndarray:
    """Linear lamp-intensity ramp along an axis, normalized to mean 1."""
    ramp = np.linspace(low, high, cols if axis == 1 else rows)
    f = np.tile(ramp, (rows, 1)) if axis == 1 else np.tile(ramp[:, None], (1, cols))
    return f / f.mean()


def vignette_illumination(rows: int, cols: int, strength: float = 0.3) -> np.ndarray:
    """Radial falloff toward the image corners, normalized to mean 1."""
    r = np.linspace(-1.0, 1.0, rows)[:, None]
    c = np.linspace(-1.0, 1.0, cols)[None, :]
    f = 1.0 - strength * (r * r + c * c) / 2.0
    return f / f.mean()


@dataclass(frozen=True)
class PulseSpec:
    """Optical excitation: deposited energy and its spatial/temporal shape.

    energy is the areal pulse energy in J/m^2; pulse_duration 0 means an
    ideal impulse. illumination_field (rows x cols, mean 1.0, gains in
    (0, 2]) models uneven lamp coverage; None means uniform.
    """

    energy: float
    pulse_duration: float = 0.0
    ambient_temperature: float = 293.15
    illumination_field: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.energy <= 0:
            raise DomainError("pulse energy must be > 0")
        if self.pulse_duration < 0:
            raise DomainError("pulse_duration must be >= 0")
        f = self.illumination_field
        if f is not None:
            f = np.asarray(f, dtype=float)
            if f.ndim != 2:
                raise DomainError("illumination_field must be a 2-D gain map")
            if np.any(f <= 0) or np.any(f > 2.0):
                raise DomainError("illumination gains must lie in (0, 2]")
            if abs(f.mean() - 1.0) > _ILLUM_MEAN_RTOL:
                raise DomainError("illumination_field mean must be 1.0")
            object.__setattr__(self, "illumination_field", f)

    def gain_map(self, rows: int, cols: int) -> np.ndarray:
        if self.illumination_field is None:
            return np.ones((rows, cols))
        if self.illumination_field.shape != (rows, cols):
            raise ConfigurationError(
                f"illumination_field shape {self.illumination_field.shape} "
                f"does not match grid ({rows}, {cols})"
            )
        return self.illumination_field


@dataclass(frozen=True)
class DefectSpec:
    """Subsurface inclusion: lateral footprint plus depth and thickness.

    shape is 'circle' (size = radius, px) or 'rectangle'
    (size = (half_rows, half_cols), px). depth is the distance from the
    heated surface to the top of the inclusion; fill_properties are the
    inclusion material (an air gap, filler, ...).
    """

    shape: str
    center: tuple[float, float]
    size: float | tuple[float, float]
    depth: float
    thickness: float
    fill_properties: MaterialProps

    def __post_init__(self) -> None:
        if self.shape not in ("circle", "rectangle"):
            raise DomainError(f"unknown defect shape {self.shape!r}")
        if self.shape == "circle":
            if not np.isscalar(self.size) or self.size <= 0:
                raise DomainError("circle size must be a positive radius")
        else:
            if np.isscalar(self.size) or len(self.size) != 2 \
                    or self.size[0] <= 0 or self.size[1] <= 0:
                raise DomainError("rectangle size must be positive (half_rows, half_cols)")
        if self.depth < 0:
            raise DomainError("defect depth must be >= 0")
        if self.thickness <= 0:
            raise DomainError("defect thickness must be > 0")

    def footprint(self, rows: int, cols: int) -> np.ndarray:
        """Boolean rows x cols mask of the true lateral extent."""
        r = np.arange(rows)[:, None]
        c = np.arange(cols)[None, :]
        r0, c0 = self.center
        if self.shape == "circle":
            return (r - r0) ** 2 + (c - c0) ** 2 <= float(self.size) ** 2
        hr, hc = self.size
        return (np.abs(r - r0) <= hr) & (np.abs(c - c0) <= hc)

    def _lateral_bounds(self) -> tuple[float, float, float, float]:
        r0, c0 = self.center
        if self.shape == "circle":
            s = float(self.size)
            return r0 - s, r0 + s, c0 - s, c0 + s
        hr, hc = self.size
        return r0 - hr, r0 + hr, c0 - hc, c0 + hc


@dataclass(frozen=True)
class SimScene:
    """Full description of one simulated acquisition.

    The grid is rows x cols lateral pixels by `layers` voxels through the
    specimen thickness. Frames are captured at frame_rate for `frames`
    frames, starting one frame interval after excitation onset.
    """

    rows: int
    cols: int
    pixel_pitch: float
    thickness: float
    layers: int
    material: MaterialProps
    pulse: PulseSpec
    defects: tuple[DefectSpec, ...] = ()
    frame_rate: float = 25.0
    frames: int = 100
    gaussian_sigma: float = 0.0
    fixed_pattern_sigma: float = 0.0
    seed: int = 0
    scene_id: str = ""
    sample_tag: str = "flat"
    system_tag: str = "other"

    def __post_init__(self) -> None:
        if self.rows < 8 or self.cols < 8:
            raise ConfigurationError("lateral grid dims must be >= 8")
        if self.layers < 2:
            raise ConfigurationError("need at least 2 depth layers")
        if self.frames < 3:
            raise ConfigurationError("need at least 3 frames")
        if self.pixel_pitch <= 0 or self.thickness <= 0 or self.frame_rate <= 0:
            raise ConfigurationError("pixel_pitch, thickness, frame_rate must be > 0")
        if self.gaussian_sigma < 0 or self.fixed_pattern_sigma < 0:
            raise ConfigurationError("noise sigmas must be >= 0")
        if not isinstance(self.defects, tuple):
            object.__setattr__(self, "defects", tuple(self.defects))
        for i, d in enumerate(self.defects):
            if d.depth + d.thickness >= self.thickness:
                raise ConfigurationError(
                    f"defect {i}: depth + thickness = {d.depth + d.thickness} "
                    f"must be < specimen thickness {self.thickness}"
                )
            rlo, rhi, clo, chi = d._lateral_bounds()
            if rlo < 0 or clo < 0 or rhi > self.rows - 1 or chi > self.cols - 1:
                raise ConfigurationError(f"defect {i}: footprint leaves the lateral domain")
        # Reject an illumination field of the wrong shape at scene build time.
        self.pulse.gain_map(self.rows, self.cols)
        if not self.scene_id:
            object.__setattr__(self, "scene_id", f"sim-{self.seed:08d}")

    @property
    def dz(self) -> float:
        return self.thickness / self.layers

    @property
    def frame_interval(self) -> float:
        return 1.0 / self.frame_rate

    def frame_times(self) -> np.ndarray:
        """Capture instants, seconds after excitation onset."""
        return (np.arange(self.frames) + 1) / self.frame_rate
