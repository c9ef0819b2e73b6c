"""Plain-text scene configuration.

A scene file is UTF-8 `key = value` lines; `#` starts a comment and blank
lines are ignored.  Keys (defaults in brackets):

    rows, cols            lateral grid size in pixels (required)
    layers                voxels through the thickness (required)
    thickness             specimen thickness in m (required)
    pixel_pitch           lateral pixel size in m (required)
    energy                areal pulse energy in J/m^2 (required)
    frames [100]          captured frames
    frame_rate [25.0]     frames per second
    pulse_duration [0.0]  seconds; 0 = ideal impulse
    ambient [293.15]      ambient temperature in K
    material [cfrp]       cfrp | air | epoxy | ptfe | <rho>,<c>,<k>
    fill [ptfe]           default defect fill, same forms as material
    illumination [uniform]        uniform
                                  gradient <low> <high> [axis]
                                  vignette <strength>
    gaussian_sigma [0.0]  per-frame sensor noise, K
    fixed_pattern_sigma [0.0]     static per-pixel offset noise, K
    seed [0]              noise seed
    scene_id []           store id; empty derives one from the seed
    sample_tag [flat]     flat | curved
    system_tag [other]    acquisition-rig label
    defect                repeatable; one of
                          circle <row> <col> <radius_px> <depth_m> <thickness_m> [fill]
                          rectangle <row> <col> <half_rows> <half_cols> <depth_m> <thickness_m> [fill]
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .model import (AIR, CFRP, EPOXY, PTFE, DefectSpec, MaterialProps,
                    PulseSpec, SimScene, gradient_illumination,
                    vignette_illumination)

_NAMED_MATERIALS = {"cfrp": CFRP, "air": AIR, "epoxy": EPOXY, "ptfe": PTFE}


def _parse_material(token: str, where: str) -> MaterialProps:
    token = token.strip().lower()
    if token in _NAMED_MATERIALS:
        return _NAMED_MATERIALS[token]
    parts = token.split(",")
    if len(parts) != 3:
        raise ConfigurationError(
            f"{where}: material must be one of {sorted(_NAMED_MATERIALS)} "
            f"or '<density>,<heat_capacity>,<conductivity>', got {token!r}")
    try:
        rho, c, k = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigurationError(f"{where}: bad material triple {token!r}") from exc
    return MaterialProps.of(rho, c, k)


def _parse_defect(value: str, where: str, default_fill: MaterialProps) -> DefectSpec:
    parts = value.split()
    if not parts:
        raise ConfigurationError(f"{where}: empty defect line")
    shape = parts[0].lower()
    try:
        if shape == "circle":
            if len(parts) not in (6, 7):
                raise ConfigurationError(
                    f"{where}: circle takes row col radius depth thickness [fill]")
            row, col, radius, depth, thick = (float(p) for p in parts[1:6])
            fill = _parse_material(parts[6], where) if len(parts) == 7 else default_fill
            return DefectSpec("circle", (row, col), radius, depth, thick, fill)
        if shape == "rectangle":
            if len(parts) not in (7, 8):
                raise ConfigurationError(
                    f"{where}: rectangle takes row col half_rows half_cols "
                    f"depth thickness [fill]")
            row, col, hr, hc, depth, thick = (float(p) for p in parts[1:7])
            fill = _parse_material(parts[7], where) if len(parts) == 8 else default_fill
            return DefectSpec("rectangle", (row, col), (hr, hc), depth, thick, fill)
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"{where}: bad defect numbers in {value!r}") from exc
    raise ConfigurationError(f"{where}: unknown defect shape {shape!r}")


def _parse_illumination(value: str, rows: int, cols: int,
                        where: str) -> np.ndarray | None:
    parts = value.split()
    kind = parts[0].lower()
    try:
        if kind == "uniform" and len(parts) == 1:
            return None
        if kind == "gradient" and len(parts) in (3, 4):
            low, high = float(parts[1]), float(parts[2])
            axis = int(parts[3]) if len(parts) == 4 else 1
            return gradient_illumination(rows, cols, low, high, axis=axis)
        if kind == "vignette" and len(parts) == 2:
            return vignette_illumination(rows, cols, float(parts[1]))
    except ValueError as exc:
        raise ConfigurationError(f"{where}: bad illumination {value!r}") from exc
    raise ConfigurationError(
        f"{where}: illumination must be 'uniform', 'gradient <low> <high> "
        f"[axis]', or 'vignette <strength>', got {value!r}")


_REQUIRED = ("rows", "cols", "layers", "thickness", "pixel_pitch", "energy")


def parse_scene_config(text: str, name: str = "<config>") -> SimScene:
    """Parse scene-file text into a validated scene."""
    scalars: dict[str, str] = {}
    defect_lines: list[tuple[str, str]] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{name}:{ln}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "defect":
            defect_lines.append((value, f"{name}:{ln}"))
        elif key in scalars:
            raise ConfigurationError(f"{name}:{ln}: duplicate key {key!r}")
        else:
            scalars[key] = value

    missing = [k for k in _REQUIRED if k not in scalars]
    if missing:
        raise ConfigurationError(f"{name}: missing required keys {missing}")

    known = set(_REQUIRED) | {
        "frames", "frame_rate", "pulse_duration", "ambient", "material",
        "fill", "illumination", "gaussian_sigma", "fixed_pattern_sigma",
        "seed", "scene_id", "sample_tag", "system_tag",
    }
    unknown = sorted(set(scalars) - known)
    if unknown:
        raise ConfigurationError(f"{name}: unknown keys {unknown}")

    try:
        rows = int(scalars["rows"])
        cols = int(scalars["cols"])
        layers = int(scalars["layers"])
        frames = int(scalars.get("frames", "100"))
        seed = int(scalars.get("seed", "0"))
        thickness = float(scalars["thickness"])
        pixel_pitch = float(scalars["pixel_pitch"])
        energy = float(scalars["energy"])
        frame_rate = float(scalars.get("frame_rate", "25.0"))
        pulse_duration = float(scalars.get("pulse_duration", "0.0"))
        ambient = float(scalars.get("ambient", "293.15"))
        gaussian_sigma = float(scalars.get("gaussian_sigma", "0.0"))
        fixed_pattern_sigma = float(scalars.get("fixed_pattern_sigma", "0.0"))
    except ValueError as exc:
        raise ConfigurationError(f"{name}: {exc}") from exc

    material = _parse_material(scalars.get("material", "cfrp"), name)
    fill = _parse_material(scalars.get("fill", "ptfe"), name)
    illum = _parse_illumination(scalars.get("illumination", "uniform"),
                                rows, cols, name)
    defects = tuple(_parse_defect(v, w, fill) for v, w in defect_lines)
    pulse = PulseSpec(energy=energy, pulse_duration=pulse_duration,
                      ambient_temperature=ambient, illumination_field=illum)
    return SimScene(
        rows=rows, cols=cols, pixel_pitch=pixel_pitch, thickness=thickness,
        layers=layers, material=material, pulse=pulse, defects=defects,
        frame_rate=frame_rate, frames=frames, gaussian_sigma=gaussian_sigma,
        fixed_pattern_sigma=fixed_pattern_sigma, seed=seed,
        scene_id=scalars.get("scene_id", ""),
        sample_tag=scalars.get("sample_tag", "flat"),
        system_tag=scalars.get("system_tag", "other"),
    )


def load_scene_file(path: str | Path) -> SimScene:
    p = Path(path)
    return parse_scene_config(p.read_text(encoding="utf-8"), name=str(p))


def _material_token(mat: MaterialProps) -> str:
    for token, preset in _NAMED_MATERIALS.items():
        if preset == mat:
            return token
    return f"{mat.density!r},{mat.heat_capacity!r},{mat.conductivity!r}"


def scene_to_config(scene: SimScene) -> str:
    """Render a scene back to config text (defect fills always explicit)."""
    lines = [
        f"rows = {scene.rows}",
        f"cols = {scene.cols}",
        f"layers = {scene.layers}",
        f"thickness = {scene.thickness!r}",
        f"pixel_pitch = {scene.pixel_pitch!r}",
        f"energy = {scene.pulse.energy!r}",
        f"frames = {scene.frames}",
        f"frame_rate = {scene.frame_rate!r}",
        f"pulse_duration = {scene.pulse.pulse_duration!r}",
        f"ambient = {scene.pulse.ambient_temperature!r}",
        f"material = {_material_token(scene.material)}",
        f"gaussian_sigma = {scene.gaussian_sigma!r}",
        f"fixed_pattern_sigma = {scene.fixed_pattern_sigma!r}",
        f"seed = {scene.seed}",
        f"scene_id = {scene.scene_id}",
        f"sample_tag = {scene.sample_tag}",
        f"system_tag = {scene.system_tag}",
    ]
    if scene.pulse.illumination_field is None:
        lines.append("illumination = uniform")
    else:
        lines.append("# illumination: custom gain map (not serializable here)")
    for d in scene.defects:
        fill = _material_token(d.fill_properties)
        if d.shape == "circle":
            lines.append(f"defect = circle {d.center[0]!r} {d.center[1]!r} "
                         f"{float(d.size)!r} {d.depth!r} {d.thickness!r} {fill}")
        else:
            hr, hc = d.size
            lines.append(f"defect = rectangle {d.center[0]!r} {d.center[1]!r} "
                         f"{hr!r} {hc!r} {d.depth!r} {d.thickness!r} {fill}")
    return "\n".join(lines) + "\n"
