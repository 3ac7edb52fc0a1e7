"""Modal plant, positive position feedback controller, loop closure, stability.

The plant collects the selected modes as second-order sections driven by one
actuation input with influence b_i, sensed collocated as y = sum b_i x_i.
The controller is a damped second-order filter fed by y whose position state
is scaled by the gain and added back onto the plant input (positive feedback).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegeneratePlantError, InvalidInputError, NumericalError
from .modal import ModalModel, TWO_PI
from .piezo import PatchGeometry, PiezoMaterial, coupling_factor

GAIN_SEARCH_LIMIT = 1e6
UNBOUNDED_GAIN = float("inf")


@dataclass
class LinearSystem:
    """Real state-space model (A, B, C, D) with axis labels."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    state_labels: list[str] = field(default_factory=list)
    input_labels: list[str] = field(default_factory=list)
    output_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise InvalidInputError("A must be square")
        m = self.B.shape[1]
        p = self.C.shape[0]
        if self.B.shape != (n, m):
            raise InvalidInputError("B must have one row per state")
        if self.C.shape != (p, n):
            raise InvalidInputError("C must have one column per state")
        if self.D.shape != (p, m):
            raise InvalidInputError("D must be outputs x inputs")
        for name, mat in (("A", self.A), ("B", self.B), ("C", self.C),
                          ("D", self.D)):
            if mat.size and not np.all(np.isfinite(mat)):
                raise InvalidInputError(f"{name} contains non-finite entries")
        if not self.state_labels:
            self.state_labels = [f"x{i}" for i in range(n)]
        if not self.input_labels:
            self.input_labels = [f"u{i}" for i in range(m)]
        if not self.output_labels:
            self.output_labels = [f"y{i}" for i in range(p)]
        if (len(self.state_labels) != n or len(self.input_labels) != m
                or len(self.output_labels) != p):
            raise InvalidInputError("label counts must match matrix sizes")

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]


@dataclass
class ModalPlant:
    """Per-mode frequency (rad/s), damping ratio, and actuation influence."""

    omegas: np.ndarray
    zetas: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        self.zetas = np.atleast_1d(np.asarray(self.zetas, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if not (self.omegas.shape == self.zetas.shape == self.b.shape):
            raise InvalidInputError("omegas, zetas and b must have equal length")
        if self.omegas.size == 0:
            raise InvalidInputError("plant needs at least one mode")
        if np.any(self.omegas <= 0.0):
            raise InvalidInputError("plant frequencies must be positive")
        if np.any((self.zetas < 0.0) | (self.zetas >= 1.0)):
            raise InvalidInputError("plant damping ratios must lie in [0, 1)")
        if not np.all(np.isfinite(self.b)):
            raise InvalidInputError("influence coefficients must be finite")

    @property
    def n_modes(self) -> int:
        return self.omegas.size


@dataclass
class PPFConfig:
    """Filter frequency (rad/s), filter damping ratio, and feedback gain."""

    omega_f: float
    zeta_f: float
    gain: float = 0.0

    def __post_init__(self):
        if self.omega_f <= 0.0:
            raise InvalidInputError("filter frequency must be positive")
        if not 0.0 < self.zeta_f < 1.0:
            raise InvalidInputError("filter damping must lie in (0, 1)")
        if self.gain < 0.0:
            raise InvalidInputError("gain must be >= 0")

    @classmethod
    def from_hz(cls, freq_hz: float, zeta_f: float,
                gain: float = 0.0) -> "PPFConfig":
        return cls(TWO_PI * freq_hz, zeta_f, gain)


def plant_system(plant: ModalPlant) -> LinearSystem:
    """Realize the plant with states (x_i, xdot_i) per mode, input u, and the
    collocated output y = sum b_i x_i."""
    n = plant.n_modes
    A = np.zeros((2 * n, 2 * n))
    B = np.zeros((2 * n, 1))
    C = np.zeros((1, 2 * n))
    states = []
    for i in range(n):
        w = plant.omegas[i]
        A[2 * i, 2 * i + 1] = 1.0
        A[2 * i + 1, 2 * i] = -w * w
        A[2 * i + 1, 2 * i + 1] = -2.0 * plant.zetas[i] * w
        B[2 * i + 1, 0] = plant.b[i]
        C[0, 2 * i] = plant.b[i]
        states += [f"x{i + 1}", f"xdot{i + 1}"]
    return LinearSystem(A, B, C, np.zeros((1, 1)), states, ["u"], ["y"])


def build_plant(model: ModalModel, patch: PatchGeometry, mat: PiezoMaterial,
                selected_modes) -> tuple[ModalPlant, LinearSystem]:
    """Plant over the selected mode indices with influences normalized so the
    strongest-coupled mode has |b| = 1.

    Raises a degenerate-plant error when every selected mode has zero slope
    difference across the patch (nothing is controllable).
    """
    idxs = list(selected_modes)
    if not idxs:
        raise InvalidInputError("selected_modes must not be empty")
    results = [coupling_factor(model, patch, mat, i) for i in idxs]
    dth = np.array([r.delta_theta for r in results])
    peak = float(np.max(np.abs(dth)))
    if peak == 0.0:
        raise DegeneratePlantError(
            "every selected mode has zero slope difference across the patch")
    plant = ModalPlant(
        np.array([model.mode(i).omega for i in idxs]),
        np.array([model.mode(i).zeta for i in idxs]),
        dth / peak,
    )
    return plant, plant_system(plant)


def ppf_controller(cfg: PPFConfig) -> LinearSystem:
    """Second-order filter driven by the plant output; its position state,
    scaled by the gain, is the actuation command. DC gain equals the gain."""
    wf = cfg.omega_f
    A = np.array([[0.0, 1.0], [-wf * wf, -2.0 * cfg.zeta_f * wf]])
    B = np.array([[0.0], [wf * wf]])
    C = np.array([[cfg.gain, 0.0]])
    return LinearSystem(A, B, C, np.zeros((1, 1)),
                        ["eta", "etadot"], ["y"], ["u"])


def close_loop(plant_sys: LinearSystem, ctrl_sys: LinearSystem) -> LinearSystem:
    """Positive feedback interconnection.

    The controller is driven by the plant output; the plant input is the
    controller output plus an external disturbance d. The result maps d to
    the plant output.
    """
    if plant_sys.n_inputs != ctrl_sys.n_outputs:
        raise InvalidInputError("controller outputs must match plant inputs")
    if ctrl_sys.n_inputs != plant_sys.n_outputs:
        raise InvalidInputError("controller inputs must match plant outputs")
    Ap, Bp, Cp, Dp = plant_sys.A, plant_sys.B, plant_sys.C, plant_sys.D
    Ac, Bc, Cc, Dc = ctrl_sys.A, ctrl_sys.B, ctrl_sys.C, ctrl_sys.D
    p = plant_sys.n_outputs
    E = np.eye(p) - Dp @ Dc
    try:
        S = np.linalg.inv(E)
    except np.linalg.LinAlgError:
        raise InvalidInputError(
            "algebraic loop: I - Dp Dc is singular, the interconnection is "
            "ill-posed") from None
    # y = S (Cp xp + Dp Cc xc + Dp d); u = d + Cc xc + Dc y
    DcS = Dc @ S
    A = np.block([
        [Ap + Bp @ DcS @ Cp, Bp @ (Cc + DcS @ Dp @ Cc)],
        [Bc @ S @ Cp, Ac + Bc @ S @ Dp @ Cc],
    ])
    B = np.vstack([Bp @ (np.eye(plant_sys.n_inputs) + DcS @ Dp), Bc @ S @ Dp])
    C = np.hstack([S @ Cp, S @ Dp @ Cc])
    D = S @ Dp
    return LinearSystem(
        A, B, C, D,
        plant_sys.state_labels + ctrl_sys.state_labels,
        ["d"], plant_sys.output_labels,
    )


@dataclass
class StabilityResult:
    stable: bool
    max_real_part: float


def stability(sys: LinearSystem, tol_margin: float | None = None) -> StabilityResult:
    """Classify by the largest eigenvalue real part.

    The default margin 1e-9 * max|A| keeps eigensolver roundoff on lightly
    damped poles from flipping the verdict; pass 0 for a raw comparison.
    """
    A = sys.A
    if A.shape[0] == 0:
        return StabilityResult(True, float("-inf"))
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solve failed: {exc}") from exc
    max_re = float(np.max(ev.real))
    if tol_margin is None:
        tol_margin = 1e-9 * float(np.max(np.abs(A)))
    return StabilityResult(max_re < -tol_margin, max_re)


def critical_gain(plant: ModalPlant, cfg: PPFConfig,
                  rel_tol: float = 1e-6) -> float:
    """Smallest gain that destabilizes the closed loop, found by doubling the
    bracket then bisecting to the given relative tolerance.

    The gain of ``cfg`` is ignored. Returns inf when no gain up to 1e6
    destabilizes the loop. Stability inside the search uses a zero margin so
    the returned gain is not biased by the default roundoff margin.
    """
    if not np.any(plant.b != 0.0):
        raise DegeneratePlantError("plant has no controllable mode")
    psys = plant_system(plant)

    def unstable(g: float) -> bool:
        cl = close_loop(psys, ppf_controller(replace(cfg, gain=g)))
        return not stability(cl, tol_margin=0.0).stable

    lo = 0.0
    hi = 1.0
    while hi <= GAIN_SEARCH_LIMIT and not unstable(hi):
        lo = hi
        hi *= 2.0
    if hi > GAIN_SEARCH_LIMIT:
        if lo >= GAIN_SEARCH_LIMIT or not unstable(GAIN_SEARCH_LIMIT):
            return UNBOUNDED_GAIN
        hi = GAIN_SEARCH_LIMIT
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
