"""Host-structure modal models: analytic cantilever, finite elements, measured shapes.

Angular frequency in rad/s everywhere inside the package; Hz appears only at
file and command-line boundaries. Mode shapes are sampled on a shared grid
that starts at the clamped end (x = 0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .errors import InvalidInputError, NumericalError, ParseError

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

SOURCE_ANALYTIC = "analytic"
SOURCE_FE = "finite_element"
SOURCE_MEASURED = "measured"
NORM_MASS = "mass_normalized"
NORM_UNIT_PEAK = "unit_peak"

DEFAULT_DAMPING = 0.005


@dataclass
class BeamProperties:
    """Uniform cantilever: length (m), bending stiffness EI (N m^2), mass per
    unit length (kg/m), and one damping ratio applied to every mode."""

    length: float
    bending_stiffness: float
    mass_per_length: float
    structural_damping: float = DEFAULT_DAMPING

    def __post_init__(self):
        if self.length <= 0.0:
            raise InvalidInputError("beam length must be positive")
        if self.bending_stiffness <= 0.0:
            raise InvalidInputError("bending stiffness must be positive")
        if self.mass_per_length <= 0.0:
            raise InvalidInputError("mass per unit length must be positive")
        if not 0.0 <= self.structural_damping < 1.0:
            raise InvalidInputError("structural damping must lie in [0, 1)")


@dataclass
class Mode:
    """One vibration mode sampled on the model grid.

    ``phi`` is the transverse shape, ``theta`` its slope d(phi)/dx in 1/m.
    ``modal_mass`` is in kg for mass-normalized models and pinned to 1 for
    unit-peak measured shapes.
    """

    index: int
    omega: float
    modal_mass: float
    zeta: float
    phi: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        if self.index < 1:
            raise InvalidInputError("mode index is 1-based")
        if self.omega <= 0.0:
            raise InvalidInputError(f"mode {self.index}: omega must be positive")
        if self.modal_mass <= 0.0:
            raise InvalidInputError(f"mode {self.index}: modal mass must be positive")
        if not 0.0 <= self.zeta < 1.0:
            raise InvalidInputError(f"mode {self.index}: zeta must lie in [0, 1)")
        self.phi = np.asarray(self.phi, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)

    @property
    def freq_hz(self) -> float:
        return self.omega / TWO_PI


@dataclass
class ModalModel:
    """A set of modes sharing one sampling line along the structure."""

    grid: np.ndarray
    modes: list[Mode]
    source: str
    normalization: str

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise InvalidInputError("grid must be one-dimensional with at least two points")
        if x[0] != 0.0:
            raise InvalidInputError("grid must start at x = 0")
        if np.any(np.diff(x) <= 0.0):
            raise InvalidInputError("grid must be strictly increasing")
        self.grid = x
        if not self.modes:
            raise InvalidInputError("model must contain at least one mode")
        if self.source not in (SOURCE_ANALYTIC, SOURCE_FE, SOURCE_MEASURED):
            raise InvalidInputError(f"unknown model source {self.source!r}")
        if self.normalization not in (NORM_MASS, NORM_UNIT_PEAK):
            raise InvalidInputError(f"unknown normalization {self.normalization!r}")
        omegas = [m.omega for m in self.modes]
        if any(b <= a for a, b in zip(omegas, omegas[1:])):
            raise InvalidInputError("modes must be sorted by strictly increasing omega")
        for m in self.modes:
            if m.phi.shape != x.shape or m.theta.shape != x.shape:
                raise InvalidInputError(
                    f"mode {m.index}: shape sample count does not match the grid")

    @property
    def length(self) -> float:
        return float(self.grid[-1])

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode(self, index: int) -> Mode:
        """Look up a mode by its 1-based index."""
        if not 1 <= index <= len(self.modes):
            raise InvalidInputError(
                f"mode index {index} outside 1..{len(self.modes)}")
        return self.modes[index - 1]


def cantilever_root(i: int) -> float:
    """i-th root of cosh(x) cos(x) = -1, bracketed in ((i-1) pi, i pi).

    Solved as cos(x) + 1/cosh(x) = 0, which shares the roots but stays
    bounded for large x.
    """
    if i < 1:
        raise InvalidInputError("root index is 1-based")

    def f(x):
        return np.cos(x) + 1.0 / np.cosh(x)

    lo = max((i - 1) * np.pi, 1e-6)
    hi = i * np.pi
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16))


def analytic_cantilever_modes(props: BeamProperties, n_modes: int,
                              n_grid: int = 201) -> ModalModel:
    """Clamped-free Euler-Bernoulli modes, mass normalized.

    Frequencies come from the characteristic equation and are independent of
    the grid; the grid only samples phi and theta. Shapes are evaluated in an
    exponential form that avoids the cosh/sinh cancellation of the textbook
    expression for higher modes.
    """
    if n_modes < 1:
        raise InvalidInputError("n_modes must be >= 1")
    if n_grid < 16:
        raise InvalidInputError("n_grid must be >= 16")
    L = props.length
    x = np.linspace(0.0, L, n_grid)
    scale = np.sqrt(props.bending_stiffness / (props.mass_per_length * L ** 4))
    # Integral of the raw shape squared over the span equals L, so dividing
    # by sqrt(rhoA * L) pins every modal mass to 1 kg.
    norm = 1.0 / np.sqrt(props.mass_per_length * L)
    modes = []
    for i in range(1, n_modes + 1):
        bl = cantilever_root(i)
        beta = bl / L
        omega = bl * bl * scale
        denom = np.sinh(bl) + np.sin(bl)
        sigma = (np.cosh(bl) + np.cos(bl)) / denom
        # 1 - sigma without cancellation: sinh - cosh collapses to -exp(-bl).
        one_minus_sigma = (np.sin(bl) - np.cos(bl) - np.exp(-bl)) / denom
        bx = beta * x
        grow = 0.5 * one_minus_sigma * np.exp(bx)
        decay = 0.5 * (1.0 + sigma) * np.exp(-bx)
        phi = grow + decay - np.cos(bx) + sigma * np.sin(bx)
        theta = beta * (grow - decay + np.sin(bx) + sigma * np.cos(bx))
        phi *= norm
        theta *= norm
        # Clamped end is exact by construction.
        phi[0] = 0.0
        theta[0] = 0.0
        if theta[-1] < 0.0:
            phi = -phi
            theta = -theta
        modes.append(Mode(i, float(omega), 1.0, props.structural_damping,
                          phi, theta))
    return ModalModel(x, modes, SOURCE_ANALYTIC, NORM_MASS)


def beam_element_matrices(EI: float, rhoA: float, le: float):
    """Stiffness and consistent mass of one two-node Hermite bending element."""
    l2 = le * le
    l3 = l2 * le
    k = (EI / l3) * np.array([
        [12.0, 6.0 * le, -12.0, 6.0 * le],
        [6.0 * le, 4.0 * l2, -6.0 * le, 2.0 * l2],
        [-12.0, -6.0 * le, 12.0, -6.0 * le],
        [6.0 * le, 2.0 * l2, -6.0 * le, 4.0 * l2],
    ])
    m = (rhoA * le / 420.0) * np.array([
        [156.0, 22.0 * le, 54.0, -13.0 * le],
        [22.0 * le, 4.0 * l2, 13.0 * le, -3.0 * l2],
        [54.0, 13.0 * le, 156.0, -22.0 * le],
        [-13.0 * le, -3.0 * l2, -22.0 * le, 4.0 * l2],
    ])
    return k, m


def assemble_beam_matrices(props: BeamProperties, n_elements: int):
    """Assembled (K, M) of the uniform cantilever, clamped DOFs included.

    DOF ordering is (w_0, theta_0, w_1, theta_1, ...) along the beam.
    """
    if n_elements < 1:
        raise InvalidInputError("n_elements must be >= 1")
    ndof = 2 * (n_elements + 1)
    K = np.zeros((ndof, ndof))
    M = np.zeros((ndof, ndof))
    le = props.length / n_elements
    ke, me = beam_element_matrices(props.bending_stiffness,
                                   props.mass_per_length, le)
    for e in range(n_elements):
        sl = slice(2 * e, 2 * e + 4)
        K[sl, sl] += ke
        M[sl, sl] += me
    return K, M


def fe_beam_modes(props: BeamProperties, n_elements: int,
                  n_modes: int) -> ModalModel:
    """Finite element cantilever modes from the clamped generalized eigenproblem.

    The eigensolver returns mass-orthonormal vectors, so modal masses are
    exactly 1 kg. Shapes and slopes are read off the nodal DOFs.
    """
    if n_elements < 4:
        raise InvalidInputError("n_elements must be >= 4")
    if not 1 <= n_modes <= n_elements:
        raise InvalidInputError(
            f"n_modes must lie in 1..{n_elements} for {n_elements} elements")
    K, M = assemble_beam_matrices(props, n_elements)
    Kf = K[2:, 2:]
    Mf = M[2:, 2:]
    try:
        vals, vecs = eigh(Kf, Mf, subset_by_index=(0, n_modes - 1))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"beam eigensolve failed for {n_elements} elements: {exc}") from exc
    if not np.all(np.isfinite(vals)) or vals[0] <= 0.0:
        raise NumericalError(
            f"beam eigensolve returned a non-positive eigenvalue {vals[0]:g}")
    x = np.linspace(0.0, props.length, n_elements + 1)
    modes = []
    for i in range(n_modes):
        full = np.zeros(2 * (n_elements + 1))
        full[2:] = vecs[:, i]
        phi = np.ascontiguousarray(full[0::2])
        theta = np.ascontiguousarray(full[1::2])
        if theta[-1] < 0.0:
            phi = -phi
            theta = -theta
        modes.append(Mode(i + 1, float(np.sqrt(vals[i])), 1.0,
                          props.structural_damping, phi, theta))
    return ModalModel(x, modes, SOURCE_FE, NORM_MASS)


def _parse_float(token: str, line_no: int, column: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(
            f"line {line_no}, column {column!r}: cannot parse {token.strip()!r} "
            "as a number") from None
    if not np.isfinite(v):
        raise ParseError(
            f"line {line_no}, column {column!r}: non-finite value {token.strip()!r}")
    return v


def load_measured_modes(path, frequencies_hz, damping=None,
                        smooth: bool = False) -> ModalModel:
    """Read mode shapes measured along a line from a CSV file.

    The file holds a header ``x_m,mode1,mode2,...`` followed by at least 8
    rows; ``#`` starts a comment. One natural frequency (Hz) per shape column
    must be supplied, with optional per-mode damping ratios (default 0.005).
    Shapes are scaled to unit peak and modal mass is pinned to 1, so coupling
    factors computed from this model are comparative only. ``smooth`` applies
    a 3-point moving average before normalization.
    """
    freqs = [float(f) for f in np.atleast_1d(frequencies_hz)]
    if any(f <= 0.0 for f in freqs):
        raise InvalidInputError("measured frequencies must be positive")
    if damping is None:
        zetas = [DEFAULT_DAMPING] * len(freqs)
    else:
        zetas = [float(z) for z in np.atleast_1d(damping)]
        if len(zetas) != len(freqs):
            raise InvalidInputError(
                f"{len(zetas)} damping ratios given for {len(freqs)} frequencies")

    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [t.strip() for t in line.split(",")]
            if header is None:
                header = fields
                continue
            rows.append((line_no, fields))

    if header is None:
        raise ParseError(f"{path}: no header line found")
    if len(header) < 2 or header[0] != "x_m":
        raise ParseError(
            f"{path}: header must be 'x_m,mode1,...', got {','.join(header)!r}")
    n_cols = len(header) - 1
    if n_cols != len(freqs):
        raise InvalidInputError(
            f"{path}: {n_cols} shape columns but {len(freqs)} frequencies given")
    if len(rows) < 8:
        raise ParseError(f"{path}: needs at least 8 data rows, found {len(rows)}")

    x = np.empty(len(rows))
    shapes = np.empty((n_cols, len(rows)))
    for r, (line_no, fields) in enumerate(rows):
        if len(fields) != len(header):
            raise ParseError(
                f"line {line_no}: expected {len(header)} fields, found {len(fields)}")
        x[r] = _parse_float(fields[0], line_no, header[0])
        for c in range(n_cols):
            shapes[c, r] = _parse_float(fields[c + 1], line_no, header[c + 1])

    if x[0] != 0.0:
        raise ParseError(f"{path}: first x_m value must be 0, got {x[0]:g}")
    if np.any(np.diff(x) <= 0.0):
        bad = int(np.flatnonzero(np.diff(x) <= 0.0)[0])
        raise ParseError(
            f"{path}: x_m must be strictly increasing; row {bad + 2} of the data "
            "violates this")

    if smooth:
        log.info("applying 3-point moving average to %d measured shapes", n_cols)
        inner = (shapes[:, :-2] + shapes[:, 1:-1] + shapes[:, 2:]) / 3.0
        shapes[:, 1:-1] = inner

    order = np.argsort(freqs, kind="stable")
    modes = []
    for rank, col in enumerate(order):
        peak = np.max(np.abs(shapes[col]))
        if peak == 0.0:
            raise ParseError(
                f"{path}: column {header[col + 1]!r} is identically zero")
        phi = shapes[col] / peak
        modes.append(Mode(rank + 1, TWO_PI * freqs[col], 1.0, zetas[col],
                          phi, np.zeros_like(phi)))
    model = ModalModel(x, modes, SOURCE_MEASURED, NORM_UNIT_PEAK)
    for m in model.modes:
        slope_profile(model, m.index)
    return model


def slope_profile(model: ModalModel, mode_index: int) -> np.ndarray:
    """Finite-difference slope of one mode shape, stored back into the mode.

    Central differences in the interior and one-sided second-order stencils
    at the ends; exact for quadratics. Needs at least 3 grid points.
    """
    if model.grid.size < 3:
        raise InvalidInputError("slope profile needs at least 3 grid points")
    m = model.mode(mode_index)
    theta = np.gradient(m.phi, model.grid, edge_order=2)
    m.theta = theta
    return theta
