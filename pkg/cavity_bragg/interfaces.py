"""Domain data types shared across cavity-bragg modules.

Frequencies are in units of g and times in units of 1/g throughout.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .constants import DEFAULT_BIN_ORIGIN, INTEGER_SPECTRUM_TOLERANCE
from .errors import DomainError
from .serialization import write_csv, write_json


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Configuration:
    """One occupation-number tuple with its probability weight."""
    occupations: Tuple[int, ...]
    probability: float

    @property
    def total_atoms(self) -> int:
        return int(sum(self.occupations))


@dataclass(frozen=True)
class SpectralLine:
    """Eigenfrequency of the mode-coupling operator with its probability."""
    omega: float
    probability: float


@dataclass(frozen=True)
class Binning:
    """Left-closed histogram bins [origin + k*width, origin + (k+1)*width)."""
    bin_width: float
    origin: float = DEFAULT_BIN_ORIGIN

    def __post_init__(self):
        if not self.bin_width > 0:
            raise DomainError(f"bin_width must be positive, got {self.bin_width}")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Probability-weighted eigenfrequencies, sorted ascending in omega.

    When `binning` is set, `omegas` holds the left bin edges and the stored
    probabilities are bin masses; `exact_mass` is the mass before binning.
    """
    omegas: np.ndarray
    probabilities: np.ndarray
    binning: Optional[Binning] = None
    exact_mass: float = 1.0

    def __post_init__(self):
        omegas = _frozen_array(self.omegas)
        probabilities = _frozen_array(self.probabilities)
        if omegas.shape != probabilities.shape or omegas.ndim != 1:
            raise DomainError("omegas and probabilities must be 1-D arrays of equal length")
        if np.any(omegas < 0):
            raise DomainError("spectral lines must have non-negative omega")
        if np.any(probabilities < 0):
            raise DomainError("spectral lines must have non-negative probability")
        if omegas.size > 1 and np.any(np.diff(omegas) <= 0):
            raise DomainError("spectral lines must be strictly ascending in omega")
        object.__setattr__(self, 'omegas', omegas)
        object.__setattr__(self, 'probabilities', probabilities)

    @property
    def lines(self) -> List[SpectralLine]:
        return [SpectralLine(float(w), float(p)) for w, p in zip(self.omegas, self.probabilities)]

    @property
    def total_mass(self) -> float:
        return float(self.probabilities.sum())

    def normalized_probabilities(self) -> np.ndarray:
        mass = self.total_mass
        if mass <= 0:
            raise DomainError("spectrum has zero total mass")
        return self.probabilities / mass

    def mean(self) -> float:
        return float(np.dot(self.omegas, self.normalized_probabilities()))

    def std(self) -> float:
        weights = self.normalized_probabilities()
        mean = np.dot(self.omegas, weights)
        return float(np.sqrt(max(np.dot((self.omegas - mean) ** 2, weights), 0.0)))

    def second_moment(self) -> float:
        return float(np.dot(self.omegas ** 2, self.normalized_probabilities()))

    def has_integer_lines(self, tolerance: float = INTEGER_SPECTRUM_TOLERANCE) -> bool:
        """True when every line sits on an integer, so the intensity revives at t = pi."""
        if self.binning is not None:
            return False
        return bool(np.all(np.abs(self.omegas - np.rint(self.omegas)) <= tolerance))

    def cdf(self, x) -> np.ndarray:
        """P(omega <= x) with the spectrum normalized to unit mass."""
        cumulative = np.cumsum(self.normalized_probabilities())
        index = np.searchsorted(self.omegas, np.asarray(x, dtype=float), side='right')
        padded = np.concatenate([[0.0], cumulative])
        return padded[index]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": self.omegas,
            "probability": self.probabilities,
            "binning": None if self.binning is None else {
                "bin_width": self.binning.bin_width, "origin": self.binning.origin},
            "exact_mass": self.exact_mass,
            "total_mass": self.total_mass,
        }

    def to_csv(self, path: Path) -> Path:
        return write_csv(path, ["omega", "probability"], zip(self.omegas, self.probabilities))

    def to_json(self, path: Path) -> Path:
        return write_json(path, self.to_dict())


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Normalized reflected intensity <n_-k(t)>/n_tot sampled on a time grid."""
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times)
        values = _frozen_array(self.values)
        if times.shape != values.shape or times.ndim != 1:
            raise DomainError("times and values must be 1-D arrays of equal length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise DomainError("times must be strictly increasing")
        if np.any(values < -1e-12) or np.any(values > 1 + 1e-12):
            raise DomainError("normalized intensity must lie in [0, 1]")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.times, "intensity": self.values}

    def to_csv(self, path: Path) -> Path:
        return write_csv(path, ["t", "intensity"], zip(self.times, self.values))

    def to_json(self, path: Path) -> Path:
        return write_json(path, self.to_dict())


@dataclass(frozen=True)
class CollapseRevivalPrediction:
    """Collapse rate (1/T_collapse, units of g) and revival time from the collapse table."""
    collapse_rate: float
    revival_time: Optional[float]
    regime: str  # "two-well" or "lattice"
    state_kind: str
    spacing_class: str  # "lambda/2", "lambda/4" or "general"
    frequency_std: float
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def collapse_time(self) -> Optional[float]:
        return None if self.collapse_rate == 0 else 1.0 / self.collapse_rate

    def to_dict(self) -> Dict[str, Any]:
        return {
            "collapse_rate": self.collapse_rate,
            "collapse_time": self.collapse_time,
            "revival_time": self.revival_time,
            "regime": self.regime,
            "state_kind": self.state_kind,
            "spacing_class": self.spacing_class,
            "frequency_std": self.frequency_std,
            "notes": self.notes,
        }

    def to_json(self, path: Path) -> Path:
        return write_json(path, self.to_dict())


@dataclass(frozen=True, eq=False)
class PhotonStatistics:
    """Time-indexed probabilities P_{n_-k}(t) of finding n_-k reflected photons.

    `table[i, n]` is the probability of n photons in the -k mode at `times[i]`.
    `mean_photons` is n_tot for a Fock input and the (truncated) mean photon
    number for a coherent input.
    """
    times: np.ndarray
    table: np.ndarray
    mean_photons: float
    truncated_mass: float = 0.0

    def __post_init__(self):
        times = _frozen_array(self.times)
        table = _frozen_array(self.table)
        if table.ndim != 2 or table.shape[0] != times.shape[0]:
            raise DomainError("table must have one row per time point")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'table', table)

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.table.shape[1])

    def normalized_intensity(self) -> np.ndarray:
        """First moment of the photon law divided by the mean photon number."""
        if self.mean_photons == 0:
            return np.zeros_like(self.times)
        return self.table @ self.photon_numbers / self.mean_photons

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.times,
            "probabilities": self.table,
            "mean_photons": self.mean_photons,
            "truncated_mass": self.truncated_mass,
        }

    def to_csv(self, path: Path) -> Path:
        rows = ((t, n, self.table[i, n])
                for i, t in enumerate(self.times)
                for n in range(self.table.shape[1]))
        return write_csv(path, ["t", "n_minus_k", "probability"], rows)

    def to_json(self, path: Path) -> Path:
        return write_json(path, self.to_dict())


@dataclass(frozen=True, eq=False)
class JointState:
    """Joint atom-photon amplitudes indexed by (n0, n1, n_-k) at fixed n_tot."""
    amplitudes: np.ndarray
    n_tot: int
    time: float
    truncated_mass: float = 0.0

    def __post_init__(self):
        amplitudes = _frozen_array(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 3 or amplitudes.shape[2] != self.n_tot + 1:
            raise DomainError("amplitudes must be indexed by (n0, n1, n_-k) with n_-k <= n_tot")
        object.__setattr__(self, 'amplitudes', amplitudes)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def photon_probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=(0, 1))

    def atomic_purity(self, photon_number: Optional[int] = None) -> float:
        """Tr(rho^2) of the two-well atomic state, via the photon-space Gram matrix."""
        k0, k1, _ = self.amplitudes.shape
        if photon_number is None:
            flat = self.amplitudes.reshape(k0 * k1, -1)
        else:
            flat = self.amplitudes[:, :, photon_number].reshape(-1, 1)
        gram = flat.conj().T @ flat
        trace = np.real(np.trace(gram))
        if trace <= 0:
            return 0.0
        return float(np.sum(np.abs(gram) ** 2) / trace ** 2)

    def well0_density_matrix(self) -> np.ndarray:
        """Reduced density matrix of well 0 (well 1 and photons traced out)."""
        return np.einsum('ajk,bjk->ab', self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class CatStateDiagnostics:
    """Atomic Q-function of well 0 and photon-conditioned atomic properties."""
    grid: np.ndarray
    q_values: np.ndarray
    q_closed_form: np.ndarray
    photon_projector_weights: Tuple[float, float]  # (P[n_-k = n_tot], P[n_-k = 0])
    unconditional_purity: float
    conditional_purities: Tuple[float, float]
    conditional_odd_difference: Tuple[float, float]
    fock_cutoffs: Tuple[int, int]

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.q_values - self.q_closed_form)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "photon_projector_weights": list(self.photon_projector_weights),
            "unconditional_purity": self.unconditional_purity,
            "conditional_purities": list(self.conditional_purities),
            "conditional_odd_difference": list(self.conditional_odd_difference),
            "q_max_abs_error": self.max_abs_error,
            "fock_cutoffs": list(self.fock_cutoffs),
        }

    def to_csv(self, path: Path) -> Path:
        rows = ((a.real, a.imag, q) for a, q in zip(self.grid.ravel(), self.q_values.ravel()))
        return write_csv(path, ["re", "im", "q"], rows)

    def to_json(self, path: Path) -> Path:
        return write_json(path, self.to_dict())
