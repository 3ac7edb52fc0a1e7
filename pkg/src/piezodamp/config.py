"""Project configuration: one INI file describing the structure, the patch
material and geometry, the controller, and the analysis settings.

Sections and keys:

    [structure]    source = analytic | finite_element | measured
                   analytic/finite_element: length_m, EI_Nm2, mass_per_length_kgpm,
                     n_modes, damping (optional), n_grid / n_elements (optional)
                   measured: shapes_file, frequencies_hz (comma list),
                     damping (optional comma list), smooth (optional)
    [material]     d31_CpN, s11E_perPa, epsT_FpM
    [patch]        length_m, width_m, thickness_m, x_start_m (optional),
                   z_offset_m or host_thickness_m (exactly one)
    [ppf]          freq_hz, zeta, gains (comma list for sweeps)
    [analysis]     band_hz = lo,hi; n_freq (optional); target_mode (optional);
                   min_prominence_db (optional); placement: step_m,
                   n_patches (optional), min_gap_m (optional),
                   mode_weights (optional "1:1.0,2:0.5")

Every value is validated on load; referenced files must exist.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, InvalidInputError
from .modal import (BeamProperties, ModalModel, analytic_cantilever_modes,
                    fe_beam_modes, load_measured_modes)
from .piezo import PatchGeometry, PiezoMaterial

_STRUCTURE_SOURCES = ("analytic", "finite_element", "measured")


def _section(cp: configparser.ConfigParser, name: str):
    if not cp.has_section(name):
        raise ConfigError(f"missing [{name}] section")
    return cp[name]


def _float(sect, key: str, default=None) -> float:
    if key not in sect:
        if default is not None:
            return default
        raise ConfigError(f"[{sect.name}] is missing key {key!r}")
    try:
        return float(sect[key])
    except ValueError:
        raise ConfigError(
            f"[{sect.name}] {key} = {sect[key]!r} is not a number") from None


def _int(sect, key: str, default=None) -> int:
    if key not in sect:
        if default is not None:
            return default
        raise ConfigError(f"[{sect.name}] is missing key {key!r}")
    try:
        return int(sect[key])
    except ValueError:
        raise ConfigError(
            f"[{sect.name}] {key} = {sect[key]!r} is not an integer") from None


def _bool(sect, key: str, default: bool = False) -> bool:
    if key not in sect:
        return default
    try:
        return sect.getboolean(key)
    except ValueError:
        raise ConfigError(
            f"[{sect.name}] {key} = {sect[key]!r} is not a boolean") from None


def _float_list(sect, key: str) -> list[float]:
    if key not in sect:
        raise ConfigError(f"[{sect.name}] is missing key {key!r}")
    try:
        return [float(t) for t in sect[key].split(",") if t.strip()]
    except ValueError:
        raise ConfigError(
            f"[{sect.name}] {key} = {sect[key]!r} is not a comma list of "
            "numbers") from None


def _weights(sect, key: str) -> dict[int, float] | None:
    if key not in sect:
        return None
    out: dict[int, float] = {}
    for item in sect[key].split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(
                f"[{sect.name}] {key}: entry {item!r} must look like 'mode:weight'")
        mode_s, weight_s = item.split(":", 1)
        try:
            out[int(mode_s)] = float(weight_s)
        except ValueError:
            raise ConfigError(
                f"[{sect.name}] {key}: entry {item!r} must look like "
                "'mode:weight'") from None
    if not out:
        raise ConfigError(f"[{sect.name}] {key} is empty")
    return out


@dataclass
class StructureSpec:
    source: str
    props: BeamProperties | None
    n_modes: int
    n_grid: int
    n_elements: int
    shapes_file: Path | None
    frequencies_hz: list[float]
    damping: list[float] | None
    smooth: bool


@dataclass
class ProjectConfig:
    """Validated contents of one project INI file."""

    structure: StructureSpec
    material: PiezoMaterial
    patch: PatchGeometry
    ppf_freq_hz: float
    ppf_zeta: float
    gains: list[float]
    band_hz: tuple[float, float]
    n_freq: int
    target_mode: int | None
    min_prominence_db: float
    placement_step: float
    n_patches: int
    min_gap: float
    mode_weights: dict[int, float] | None
    base_dir: Path

    def build_model(self) -> ModalModel:
        """Materialize the modal model the config describes."""
        s = self.structure
        if s.source == "analytic":
            return analytic_cantilever_modes(s.props, s.n_modes, s.n_grid)
        if s.source == "finite_element":
            return fe_beam_modes(s.props, s.n_elements, s.n_modes)
        return load_measured_modes(s.shapes_file, s.frequencies_hz,
                                   s.damping, s.smooth)


def load_config(path) -> ProjectConfig:
    """Parse and validate a project INI file.

    All values are checked eagerly, including the module-level invariants of
    the material and patch, so commands start from a known-good state.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    base = path.parent

    st = _section(cp, "structure")
    source = st.get("source", "").strip()
    if source not in _STRUCTURE_SOURCES:
        raise ConfigError(
            f"[structure] source must be one of {', '.join(_STRUCTURE_SOURCES)}; "
            f"got {source!r}")
    props = None
    shapes_file = None
    freqs: list[float] = []
    damping = None
    smooth = False
    n_grid = 201
    n_elements = 64
    if source == "measured":
        if "shapes_file" not in st:
            raise ConfigError("[structure] measured source needs shapes_file")
        shapes_file = base / st["shapes_file"]
        if not shapes_file.is_file():
            raise ConfigError(f"shapes file {shapes_file} does not exist")
        freqs = _float_list(st, "frequencies_hz")
        if "damping" in st:
            damping = _float_list(st, "damping")
            if len(damping) != len(freqs):
                raise ConfigError(
                    "[structure] damping must list one value per frequency")
        smooth = _bool(st, "smooth")
        n_modes = len(freqs)
    else:
        try:
            props = BeamProperties(
                _float(st, "length_m"),
                _float(st, "EI_Nm2"),
                _float(st, "mass_per_length_kgpm"),
                _float(st, "damping", 0.005),
            )
        except InvalidInputError as exc:
            raise ConfigError(f"[structure]: {exc}") from None
        n_modes = _int(st, "n_modes")
        if n_modes < 1:
            raise ConfigError("[structure] n_modes must be >= 1")
        n_grid = _int(st, "n_grid", 201)
        n_elements = _int(st, "n_elements", 64)
    structure = StructureSpec(source, props, n_modes, n_grid, n_elements,
                              shapes_file, freqs, damping, smooth)

    mt = _section(cp, "material")
    try:
        material = PiezoMaterial(_float(mt, "d31_CpN"),
                                 _float(mt, "s11E_perPa"),
                                 _float(mt, "epsT_FpM"))
    except InvalidInputError as exc:
        raise ConfigError(f"[material]: {exc}") from None

    pt = _section(cp, "patch")
    has_z = "z_offset_m" in pt
    has_host = "host_thickness_m" in pt
    if has_z == has_host:
        raise ConfigError(
            "[patch] needs exactly one of z_offset_m or host_thickness_m")
    try:
        if has_z:
            patch = PatchGeometry(_float(pt, "length_m"), _float(pt, "width_m"),
                                  _float(pt, "thickness_m"),
                                  _float(pt, "z_offset_m"),
                                  _float(pt, "x_start_m", 0.0))
        else:
            patch = PatchGeometry.on_host(_float(pt, "length_m"),
                                          _float(pt, "width_m"),
                                          _float(pt, "thickness_m"),
                                          _float(pt, "host_thickness_m"),
                                          _float(pt, "x_start_m", 0.0))
    except InvalidInputError as exc:
        raise ConfigError(f"[patch]: {exc}") from None

    pf = _section(cp, "ppf")
    ppf_freq = _float(pf, "freq_hz")
    ppf_zeta = _float(pf, "zeta")
    if ppf_freq <= 0.0:
        raise ConfigError("[ppf] freq_hz must be positive")
    if not 0.0 < ppf_zeta < 1.0:
        raise ConfigError("[ppf] zeta must lie in (0, 1)")
    gains = _float_list(pf, "gains") if "gains" in pf else []
    if any(g < 0.0 for g in gains):
        raise ConfigError("[ppf] gains must be >= 0")
    if any(b <= a for a, b in zip(gains, gains[1:])):
        raise ConfigError("[ppf] gains must be strictly increasing")

    an = _section(cp, "analysis")
    band = _float_list(an, "band_hz")
    if len(band) != 2 or band[0] >= band[1] or band[0] <= 0.0:
        raise ConfigError("[analysis] band_hz must be 'lo,hi' with 0 < lo < hi")
    n_freq = _int(an, "n_freq", 2001)
    if n_freq < 2:
        raise ConfigError("[analysis] n_freq must be >= 2")
    target_mode = _int(an, "target_mode", 0) if "target_mode" in an else None
    if target_mode is not None and target_mode < 1:
        raise ConfigError("[analysis] target_mode is 1-based")
    min_prom = _float(an, "min_prominence_db", 1.0)
    if min_prom <= 0.0:
        raise ConfigError("[analysis] min_prominence_db must be positive")
    step = _float(an, "step_m", 0.0) if "step_m" in an else 0.0
    if "step_m" in an and step <= 0.0:
        raise ConfigError("[analysis] step_m must be positive")
    n_patches = _int(an, "n_patches", 1)
    if n_patches < 1:
        raise ConfigError("[analysis] n_patches must be >= 1")
    min_gap = _float(an, "min_gap_m", 0.0)
    if min_gap < 0.0:
        raise ConfigError("[analysis] min_gap_m must be >= 0")
    weights = _weights(an, "mode_weights")
    if weights is not None:
        for idx, w in weights.items():
            if idx < 1:
                raise ConfigError("[analysis] mode_weights indices are 1-based")
            if w < 0.0:
                raise ConfigError("[analysis] mode_weights must be >= 0")

    return ProjectConfig(structure, material, patch, ppf_freq, ppf_zeta,
                         gains, (band[0], band[1]), n_freq, target_mode,
                         min_prom, step, n_patches, min_gap, weights, base)
