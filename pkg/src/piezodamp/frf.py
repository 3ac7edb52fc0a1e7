"""Frequency responses, measured FRF files, peak picking, half-power damping,
and PPF gain sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from . import _kernels
from .errors import BandwidthError, InvalidInputError, ParseError
from .modal import TWO_PI
from .ppf import (LinearSystem, ModalPlant, PPFConfig, close_loop,
                  plant_system, ppf_controller, stability)

SOURCE_SIMULATED = "simulated"
SOURCE_MEASURED = "measured"

DEFAULT_GRID_POINTS = 2001
DEFAULT_BAND_FACTOR = 0.2


@dataclass
class FRF:
    """Complex response samples on a strictly increasing frequency grid (Hz).

    ``flagged`` marks samples where the underlying solve was singular; those
    hold inf and are excluded from every estimate.
    """

    freqs_hz: np.ndarray
    values: np.ndarray
    input_label: str = "in"
    output_label: str = "out"
    source: str = SOURCE_SIMULATED
    flagged: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.freqs_hz = np.asarray(self.freqs_hz, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        f = self.freqs_hz
        if f.ndim != 1 or f.size < 2:
            raise InvalidInputError("an FRF needs at least two frequency points")
        if f[0] <= 0.0 or np.any(np.diff(f) <= 0.0):
            raise InvalidInputError("frequencies must be positive and strictly increasing")
        if self.values.shape != f.shape:
            raise InvalidInputError("values and frequencies must have equal length")
        if self.flagged is None:
            self.flagged = np.zeros(f.size, dtype=bool)
        else:
            self.flagged = np.asarray(self.flagged, dtype=bool)
            if self.flagged.shape != f.shape:
                raise InvalidInputError("flag array must match the grid length")
        ok = np.isfinite(self.values.real) & np.isfinite(self.values.imag)
        if np.any(~ok & ~self.flagged):
            raise InvalidInputError("non-finite response at an unflagged sample")

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.flagged))


def frf_of(sys: LinearSystem, freqs_hz) -> FRF:
    """Frequency response C (jw I - A)^-1 B + D of a single-input
    single-output system, one linear solve per point.

    A singular point (an exactly undamped resonance hit head-on) is flagged
    and the evaluation continues.
    """
    if sys.n_inputs != 1 or sys.n_outputs != 1:
        raise InvalidInputError("frequency response needs a single-input "
                                "single-output system")
    f = np.asarray(freqs_hz, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise InvalidInputError("need at least two frequency points")
    if f[0] <= 0.0 or np.any(np.diff(f) <= 0.0):
        raise InvalidInputError("frequencies must be positive and strictly increasing")
    if sys.n_states == 0:
        vals = np.full(f.size, complex(sys.D[0, 0]))
        flagged = np.zeros(f.size, dtype=bool)
    else:
        vals, flagged = _kernels.frf_solve(sys.A, sys.B[:, 0], sys.C[0],
                                           sys.D[0, 0], TWO_PI * f)
    return FRF(f, vals, sys.input_labels[0], sys.output_labels[0],
               SOURCE_SIMULATED, flagged)


def load_frf_csv(path) -> FRF:
    """Read a measured FRF from CSV.

    The header selects the format: ``freq_hz,real,imag`` or
    ``freq_hz,mag,phase_deg``. ``#`` starts a comment. Errors name the
    offending row.
    """
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
    if header == ["freq_hz", "real", "imag"]:
        polar = False
    elif header == ["freq_hz", "mag", "phase_deg"]:
        polar = True
    else:
        raise ParseError(
            f"{path}: header must be 'freq_hz,real,imag' or "
            f"'freq_hz,mag,phase_deg', got {','.join(header)!r}")
    if len(rows) < 2:
        raise ParseError(f"{path}: needs at least 2 data rows, found {len(rows)}")
    freqs = np.empty(len(rows))
    vals = np.empty(len(rows), dtype=complex)
    for r, (line_no, fields) in enumerate(rows):
        if len(fields) != 3:
            raise ParseError(
                f"line {line_no}: expected 3 fields, found {len(fields)}")
        nums = []
        for c in range(3):
            try:
                v = float(fields[c])
            except ValueError:
                raise ParseError(
                    f"line {line_no}, column {header[c]!r}: cannot parse "
                    f"{fields[c]!r} as a number") from None
            if not np.isfinite(v):
                raise ParseError(
                    f"line {line_no}, column {header[c]!r}: non-finite value")
            nums.append(v)
        freqs[r] = nums[0]
        if polar:
            vals[r] = nums[1] * np.exp(1j * np.radians(nums[2]))
        else:
            vals[r] = complex(nums[1], nums[2])
    if freqs[0] <= 0.0 or np.any(np.diff(freqs) <= 0.0):
        raise ParseError(
            f"{path}: freq_hz must be positive and strictly increasing")
    return FRF(freqs, vals, source=SOURCE_MEASURED)


def save_frf_csv(frf: FRF, path) -> None:
    """Write freq_hz,real,imag at full precision so a reload round-trips."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq_hz,real,imag\n")
        for f, v in zip(frf.freqs_hz, frf.values):
            fh.write(f"{f:.17g},{v.real:.17g},{v.imag:.17g}\n")


def find_peaks(frf: FRF, band_hz, min_prominence_db: float = 3.0) -> list[int]:
    """Indices of interior local maxima of |H| inside the band whose
    prominence on the dB scale reaches the threshold.

    Record boundaries are never reported as peaks. Flagged samples inside
    the band are rejected; re-run the response on a shifted grid instead.
    """
    lo, hi = float(band_hz[0]), float(band_hz[1])
    f = frf.freqs_hz
    if lo >= hi:
        raise InvalidInputError(f"band [{lo:g}, {hi:g}] Hz is empty")
    if hi < f[0] or lo > f[-1]:
        raise InvalidInputError(
            f"band [{lo:g}, {hi:g}] Hz lies outside the record "
            f"[{f[0]:g}, {f[-1]:g}] Hz")
    in_band = (f >= lo) & (f <= hi)
    if not np.any(in_band):
        raise InvalidInputError(
            f"band [{lo:g}, {hi:g}] Hz contains no grid points")
    if np.any(frf.flagged & in_band):
        raise InvalidInputError(
            "the band contains flagged (singular) samples; re-evaluate the "
            "response on a shifted grid")
    mag = np.abs(frf.values)
    db = 20.0 * np.log10(np.maximum(mag, 1e-300))
    peaks, _ = _scipy_find_peaks(db, prominence=min_prominence_db)
    return [int(i) for i in peaks if in_band[i]]


@dataclass
class DampingEstimate:
    """Half-power metrics of one resonance peak.

    Q is f_peak over the half-power bandwidth; the damping ratio is defined
    as 1/(2 Q) exactly.
    """

    f_peak: float
    peak_mag: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.f_lo < self.f_peak < self.f_hi:
            raise InvalidInputError(
                "half-power frequencies must bracket the peak")
        if self.peak_mag <= 0.0:
            raise InvalidInputError("peak magnitude must be positive")
        if self.q_factor <= 0.5:
            raise InvalidInputError(
                f"Q = {self.q_factor:g} <= 0.5; the peak is not a resonance")

    @property
    def q_factor(self) -> float:
        return self.f_peak / (self.f_hi - self.f_lo)

    @property
    def zeta(self) -> float:
        return 1.0 / (2.0 * self.q_factor)

    @property
    def damping_pct(self) -> float:
        return 100.0 * self.zeta

    @property
    def bandwidth(self) -> float:
        return self.f_hi - self.f_lo


def half_power_damping(frf: FRF, peak_index: int) -> DampingEstimate:
    """Half-power (-3 dB) bandwidth metrics around one interior peak.

    Crossings of |H_peak|/sqrt(2) are located by linear interpolation of the
    magnitude between the bracketing samples on each side.
    """
    mag = np.abs(frf.values)
    f = frf.freqs_hz
    i = int(peak_index)
    if not 0 < i < mag.size - 1:
        raise InvalidInputError("peak index must be interior to the record")
    if frf.flagged[i]:
        raise InvalidInputError(f"sample {i} is flagged as singular")
    if not (mag[i] > mag[i - 1] and mag[i] > mag[i + 1]):
        raise InvalidInputError(f"sample {i} is not a strict local maximum")
    peak = float(mag[i])
    thr = peak / np.sqrt(2.0)
    a = i
    while a > 0 and mag[a] >= thr:
        a -= 1
    if mag[a] >= thr:
        raise BandwidthError(
            "low-frequency half-power crossing lies outside the record")
    f_lo = f[a] + (thr - mag[a]) * (f[a + 1] - f[a]) / (mag[a + 1] - mag[a])
    b = i
    while b < mag.size - 1 and mag[b] >= thr:
        b += 1
    if mag[b] >= thr:
        raise BandwidthError(
            "high-frequency half-power crossing lies outside the record")
    f_hi = f[b - 1] + (thr - mag[b - 1]) * (f[b] - f[b - 1]) / (mag[b] - mag[b - 1])
    return DampingEstimate(float(f[i]), peak, float(f_lo), float(f_hi))


def default_frequency_grid(center_hz: float,
                           n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Uniform grid over [0.8, 1.2] times the target frequency."""
    if center_hz <= 0.0:
        raise InvalidInputError("center frequency must be positive")
    if n_points < 2:
        raise InvalidInputError("grid needs at least two points")
    return np.linspace((1.0 - DEFAULT_BAND_FACTOR) * center_hz,
                       (1.0 + DEFAULT_BAND_FACTOR) * center_hz, n_points)


@dataclass
class SweepRow:
    """One gain of a sweep; the estimate is None for unstable loops."""

    gain: float
    stable: bool
    estimate: DampingEstimate | None


def gain_sweep(plant: ModalPlant, cfg: PPFConfig, gains, freqs_hz=None,
               target_mode: int | None = None,
               min_prominence_db: float = 1.0) -> list[SweepRow]:
    """Close the loop at each gain and track the target resonance.

    Stable rows carry a half-power estimate of the dominant in-band peak;
    unstable rows are flagged and skipped. The target mode defaults to the
    plant mode closest to the filter frequency, and the grid to 2001 points
    over [0.8, 1.2] times that mode's frequency. The gain of ``cfg`` is
    ignored in favour of the swept values.
    """
    gain_list = [float(g) for g in gains]
    if not gain_list:
        raise InvalidInputError("at least one gain is required")
    if any(g < 0.0 for g in gain_list):
        raise InvalidInputError("gains must be >= 0")
    if any(b <= a for a, b in zip(gain_list, gain_list[1:])):
        raise InvalidInputError("gains must be strictly increasing")
    if target_mode is None:
        target = int(np.argmin(np.abs(plant.omegas - cfg.omega_f)))
    else:
        if not 0 <= target_mode < plant.n_modes:
            raise InvalidInputError(
                f"target_mode {target_mode} outside 0..{plant.n_modes - 1}")
        target = target_mode
    if freqs_hz is None:
        freqs_hz = default_frequency_grid(plant.omegas[target] / TWO_PI)
    psys = plant_system(plant)
    rows = []
    for g in gain_list:
        cl = close_loop(psys, ppf_controller(replace(cfg, gain=g)))
        if not stability(cl).stable:
            rows.append(SweepRow(g, False, None))
            continue
        resp = frf_of(cl, freqs_hz)
        peaks = find_peaks(resp, (resp.freqs_hz[0], resp.freqs_hz[-1]),
                           min_prominence_db)
        if not peaks:
            raise InvalidInputError(
                f"no resonance peak found at gain {g:g}; widen the band or "
                "lower the prominence threshold")
        mag = np.abs(resp.values)
        best = max(peaks, key=lambda k: mag[k])
        rows.append(SweepRow(g, True, half_power_damping(resp, best)))
    return rows


def bode_table(frf: FRF):
    """Magnitude (dB) and unwrapped phase (deg) columns for export.

    Flagged samples come back as nan in both columns.
    """
    mag = np.abs(frf.values)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(mag)
    phase = np.degrees(np.unwrap(np.angle(frf.values)))
    if np.any(frf.flagged):
        mag_db = mag_db.copy()
        phase = phase.copy()
        mag_db[frf.flagged] = np.nan
        phase[frf.flagged] = np.nan
    return mag_db, phase
