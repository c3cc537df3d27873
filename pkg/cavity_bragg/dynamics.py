"""Reflected-intensity dynamics, collapse/revival predictions and the lattice closed form."""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.signal import find_peaks
from scipy.special import dawsn

from .constants import DEFAULT_COLLAPSE_THRESHOLD, INTENSITY_TIME_CHUNK
from .errors import DomainError, UnsupportedCombination
from .interfaces import CollapseRevivalPrediction, Spectrum, TimeSeries
from .states import (
    AtomicState, CoherentSuperfluidState, LatticeGeometry, MottState, NumberSuperfluidState,
)

logger = logging.getLogger(__name__)

# Work-array budget (lines x time points) per block of the cosine sum
_MAX_BLOCK_ELEMENTS = 4_000_000


def _as_times(times: Sequence[float]) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise DomainError("times must be a 1-D sequence")
    return times


def time_grid(t_max: float, steps: int) -> np.ndarray:
    """Uniform grid 0..t_max (units of 1/g) with `steps` points."""
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if steps < 2:
        raise DomainError(f"steps must be at least 2, got {steps}")
    return np.linspace(0.0, t_max, int(steps))


def reflected_intensity(spectrum: Spectrum, times: Sequence[float]) -> TimeSeries:
    """Normalized Bragg-reflected intensity 1/2 - 1/2 sum_omega P cos(2 omega t).

    Evaluated as sum_omega P sin^2(omega t), which is the same finite sum and
    vanishes exactly at t = 0. The spectrum is normalized to unit mass first.
    """
    times = _as_times(times)
    weights = spectrum.normalized_probabilities()
    omegas = spectrum.omegas
    values = np.empty(times.size)
    rows = max(1, min(INTENSITY_TIME_CHUNK, _MAX_BLOCK_ELEMENTS // max(omegas.size, 1)))
    for start in range(0, times.size, rows):
        block = times[start:start + rows]
        values[start:start + rows] = np.sin(np.outer(block, omegas)) ** 2 @ weights
    return TimeSeries(times=times, values=np.clip(values, 0.0, 1.0))


def scaled_erfi(x) -> np.ndarray:
    """exp(-x^2) * erfi(x), evaluated through Dawson's integral without overflow."""
    return 2.0 / math.sqrt(math.pi) * dawsn(np.asarray(x, dtype=float))


def closed_form_lattice_intensity(mean_N: float, num_sites: int,
                                  times: Sequence[float]) -> TimeSeries:
    """Large-lattice intensity for a quasi-continuous random-walk spectrum.

    I(t)/n_tot = (<N> sqrt(pi) / (2 sqrt(M))) |t| exp(-<N>^2 t^2 / M) erfi(<N> t / sqrt(M)),
    i.e. b * D(b) with b = <N>|t|/sqrt(M) and D Dawson's integral. Tends to 1/2.
    """
    if not mean_N > 0:
        raise DomainError(f"mean_N must be positive, got {mean_N}")
    if num_sites < 1:
        raise DomainError(f"num_sites must be at least 1, got {num_sites}")
    times = _as_times(times)
    b = mean_N * np.abs(times) / math.sqrt(num_sites)
    values = 0.5 * math.sqrt(math.pi) * b * scaled_erfi(b)
    return TimeSeries(times=times, values=np.clip(values, 0.0, 1.0))


def rayleigh_intensity(mean_N: float, times: Sequence[float]) -> TimeSeries:
    """Exact sin^2 transform of the random-walk frequency law with scale <N>.

    Same functional form as `closed_form_lattice_intensity` with b = sqrt(<N>)|t|;
    the two coincide for <N> = M.
    """
    if not mean_N > 0:
        raise DomainError(f"mean_N must be positive, got {mean_N}")
    times = _as_times(times)
    b = math.sqrt(mean_N) * np.abs(times)
    return TimeSeries(times=times, values=np.clip(b * dawsn(b), 0.0, 1.0))


def _require_homogeneous(means: np.ndarray, cell: str) -> None:
    if not np.allclose(means, means[0], rtol=1e-12, atol=1e-12):
        raise UnsupportedCombination(f"{cell} assumes equal mean occupations on every site")


def predict_collapse_revival(state: AtomicState,
                             geometry: LatticeGeometry) -> CollapseRevivalPrediction:
    """Collapse rate and revival time from the collapse-time table.

    Rates are 1/T_collapse in units of g. `frequency_std` is the spread the
    cell encodes: for two wells the rms fluctuation of n_0 + n_1 exp(i*phi),
    for lattices the std of the frequency law. Revivals at t = pi exist only
    for the integer spectra of d = lambda/2 and d = lambda/4.

    Raises:
        UnsupportedCombination: For combinations outside the table
    """
    if state.num_sites != geometry.num_sites:
        raise UnsupportedCombination("state and geometry disagree on the number of sites")
    two_well = geometry.num_sites == 2
    regime = "two-well" if two_well else "lattice"
    spacing_class = geometry.spacing_class
    revival_time = math.pi if geometry.integer_spectrum else None
    notes = {}
    num_sites = geometry.num_sites
    cos_phi = float(geometry.site_phases()[1].real)

    if isinstance(state, MottState):
        rate, std = 0.0, 0.0
    elif isinstance(state, CoherentSuperfluidState):
        means = state.mean_occupations()
        total = float(means.sum())
        if spacing_class == "lambda/2":
            rate, std = 2.0 * math.sqrt(total), math.sqrt(total)
        elif spacing_class == "lambda/4":
            if two_well:
                rate = math.sqrt(total)
                std = rate
            else:
                _require_homogeneous(means, "lattice SF1 at lambda/4")
                rate = math.sqrt(1.0 - 2.0 / math.pi) * math.sqrt(total)
                std = rate
        elif two_well:
            rate, std = 2.0 * math.sqrt(total), math.sqrt(total)
        else:
            _require_homogeneous(means, "lattice SF1 at general spacing")
            rate = math.sqrt(1.0 - math.pi / 4.0) * total / math.sqrt(num_sites)
            std = rate
    elif isinstance(state, NumberSuperfluidState):
        if not state.is_uniform:
            raise UnsupportedCombination("the table covers the symmetric number-conserving state only")
        n_atoms = state.num_atoms
        if spacing_class == "lambda/2":
            rate, std = 0.0, 0.0
        elif spacing_class == "lambda/4":
            if two_well:
                rate = math.sqrt(n_atoms)
                std = rate
            else:
                rate = math.sqrt(1.0 - 2.0 / math.pi) * math.sqrt(n_atoms)
                std = rate
            if n_atoms % 2 == 0:
                notes["half_revival_time"] = math.pi / 2
            else:
                notes["anti_revival_time"] = math.pi / 2
        elif two_well:
            std = math.sqrt(0.5 * n_atoms * (1.0 - cos_phi))
            rate = 2.0 * std
        else:
            rate = math.sqrt(1.0 - math.pi / 4.0) * n_atoms / math.sqrt(num_sites)
            std = rate
    else:
        raise UnsupportedCombination(f"no collapse prediction for {type(state).__name__}")

    if spacing_class == "general" and not two_well and state.kind != "mott":
        notes["random_walk_scale"] = "rate uses <N>/sqrt(M); equals sqrt(<N>) scale at <N> = M"

    logger.debug(f"Collapse prediction {regime}/{spacing_class}/{state.kind}: rate={rate:.6g}")
    return CollapseRevivalPrediction(
        collapse_rate=rate,
        revival_time=revival_time,
        regime=regime,
        state_kind=state.kind,
        spacing_class=spacing_class,
        frequency_std=std,
        notes=notes,
    )


def measure_collapse_time(series: TimeSeries, mean_frequency: float,
                          threshold: float = DEFAULT_COLLAPSE_THRESHOLD) -> Optional[float]:
    """Earliest time the envelope of |I - 1/2| falls below threshold * 1/2.

    The envelope is built from the local maxima of |I - 1/2|, taken at most
    once per carrier period pi/(2*mean_frequency), and interpolated
    log-linearly between consecutive maxima. Returns None if the envelope
    never drops below the level on the sampled grid.
    """
    if not mean_frequency > 0:
        raise DomainError(f"mean_frequency must be positive, got {mean_frequency}")
    if not 0 < threshold < 1:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")
    times, deviation = series.times, np.abs(series.values - 0.5)
    if times.size < 3:
        raise DomainError("need at least three samples to measure a collapse")
    dt = float(np.median(np.diff(times)))
    window = max(1, int(0.5 * math.pi / (2.0 * mean_frequency) / dt))
    peaks, _ = find_peaks(deviation, distance=window)
    peaks = np.concatenate([[0], peaks[peaks > 0]])
    level = threshold * 0.5
    heights = deviation[peaks]
    below = np.flatnonzero(heights < level)
    if below.size == 0:
        logger.warning("Envelope never drops below the collapse level on this grid")
        return None
    k = int(below[0])
    if k == 0:
        return float(times[0])
    t0, t1 = times[peaks[k - 1]], times[peaks[k]]
    h0, h1 = np.log(heights[k - 1]), np.log(max(heights[k], 1e-300))
    return float(t0 + (math.log(level) - h0) / (h1 - h0) * (t1 - t0))
