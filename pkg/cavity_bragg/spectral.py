"""Eigenfrequencies of the mode-coupling operator G(d) and their spectra.

On a number state the coupling operator is diagonal with eigenvalue
omega/g = |sum_m n_m exp(i*m*phi)|: the length of the polygon obtained by
chaining segments of length n_m, each turned by phi with respect to the
previous one.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    DEFAULT_EPSILON, DEFAULT_MAX_CONFIGURATIONS, DEFAULT_SAMPLE_COUNT, DEFAULT_SEED,
    DEFAULT_WORKERS, ERROR_SITE_MISMATCH, ERROR_TWO_WELLS_REQUIRED, LINE_MERGE_TOLERANCE,
)
from .errors import DomainError
from .interfaces import Binning, Spectrum
from .states import (
    AtomicState, LatticeGeometry, enumerate_configuration_arrays, reduce_to_classes,
    sample_configuration_array,
)

logger = logging.getLogger(__name__)


def configuration_frequencies(occupations: np.ndarray, geometry: LatticeGeometry) -> np.ndarray:
    """Vectorized coupling frequency for occupation rows of shape (k, M)."""
    occupations = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
    if occupations.shape[1] != geometry.num_sites:
        raise DomainError(f"expected {geometry.num_sites} occupations per row, "
                          f"got {occupations.shape[1]}")
    p = geometry.root_order
    if p == 1:
        return occupations.sum(axis=1).astype(float)
    if p == 2:
        even = occupations[:, 0::2].sum(axis=1)
        odd = occupations[:, 1::2].sum(axis=1)
        return np.abs(even - odd).astype(float)
    return np.abs(occupations @ geometry.site_phases())


def configuration_frequency(occupations: Sequence[int], geometry: LatticeGeometry) -> float:
    """Coupling frequency (units of g) of one occupation-number configuration.

    Equals sum(n_m) for d = lambda/2 and |N_even - N_odd| for d = lambda/4.
    """
    return float(configuration_frequencies(np.array([occupations]), geometry)[0])


def merge_lines(omegas: np.ndarray, probabilities: np.ndarray,
                tolerance: float = LINE_MERGE_TOLERANCE) -> Tuple[np.ndarray, np.ndarray]:
    """Sort lines and merge neighbours closer than `tolerance`; zero-mass lines are dropped."""
    omegas = np.asarray(omegas, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    if omegas.size == 0:
        return omegas, probabilities
    order = np.argsort(omegas, kind='stable')
    omegas, probabilities = omegas[order], probabilities[order]
    new_group = np.concatenate([[True], np.diff(omegas) > tolerance])
    group_ids = np.cumsum(new_group) - 1
    merged_omegas = omegas[new_group]
    merged_probabilities = np.bincount(group_ids, weights=probabilities)
    keep = merged_probabilities > 0
    return merged_omegas[keep], merged_probabilities[keep]


def bin_lines(omegas: np.ndarray, probabilities: np.ndarray,
              binning: Binning) -> Tuple[np.ndarray, np.ndarray]:
    """Collect line masses into left-closed bins; returns (left edges, masses)."""
    index = np.floor((np.asarray(omegas) - binning.origin) / binning.bin_width).astype(np.int64)
    unique, inverse = np.unique(index, return_inverse=True)
    edges = binning.origin + unique * binning.bin_width
    if np.any(edges < 0):
        raise DomainError("binning origin must not produce negative bin edges")
    masses = np.bincount(inverse, weights=probabilities, minlength=unique.size)
    return edges, masses


def _build_spectrum(omegas: np.ndarray, probabilities: np.ndarray,
                    binning: Optional[Binning], tolerance: float) -> Spectrum:
    omegas, probabilities = merge_lines(omegas, probabilities, tolerance)
    exact_mass = float(probabilities.sum())
    if binning is not None:
        omegas, probabilities = bin_lines(omegas, probabilities, binning)
    return Spectrum(omegas=omegas, probabilities=probabilities,
                    binning=binning, exact_mass=exact_mass)


def _batched(iterator: Iterable, size: int) -> Iterator[list]:
    iterator = iter(iterator)
    while True:
        batch = list(itertools.islice(iterator, size))
        if not batch:
            return
        yield batch


def _accumulate_lines(chunks: Iterable[Tuple[np.ndarray, np.ndarray]], geometry: LatticeGeometry,
                      tolerance: float, workers: int) -> Tuple[np.ndarray, np.ndarray]:
    """Partial histograms per chunk, merged in chunk order."""

    def partial(chunk):
        occupations, probabilities = chunk
        return merge_lines(configuration_frequencies(occupations, geometry), probabilities, tolerance)

    partials: List[Tuple[np.ndarray, np.ndarray]] = []
    if workers <= 1:
        partials.extend(partial(chunk) for chunk in chunks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for batch in _batched(chunks, workers):
                partials.extend(executor.map(partial, batch))
    if not partials:
        return np.array([]), np.array([])
    omegas = np.concatenate([w for w, _ in partials])
    probabilities = np.concatenate([p for _, p in partials])
    return merge_lines(omegas, probabilities, tolerance)


def spectrum(state: AtomicState, geometry: LatticeGeometry,
             epsilon: float = DEFAULT_EPSILON,
             binning: Optional[Binning] = None,
             max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
             workers: int = DEFAULT_WORKERS,
             tolerance: float = LINE_MERGE_TOLERANCE) -> Spectrum:
    """Exact probability-weighted spectrum of G(d).

    For d = lambda/2 the frequency is the total atom number, so the total
    number law is used directly. For other rational spacings with p < M the
    sites are grouped into their p root-of-unity classes, whose totals carry
    the exact joint law (see `states.reduce_to_classes`). Everything else is
    enumerated configuration by configuration.

    Raises:
        BudgetExceeded: If the enumeration exceeds `max_configurations`
    """
    p = geometry.root_order
    if p == 1:
        if state.num_sites != geometry.num_sites:
            raise DomainError("state and geometry disagree on the number of sites")
        law = state.total_number_distribution(epsilon)
        omegas = np.array(list(law.keys()), dtype=float)
        probabilities = np.array(list(law.values()), dtype=float)
        logger.info(f"Spectrum at d = lambda/2 from total-number law ({len(law)} lines)")
        return _build_spectrum(omegas, probabilities, binning, tolerance)

    if p is not None and p < geometry.num_sites:
        reduced_state, reduced_geometry = reduce_to_classes(state, geometry)
        logger.info(f"Reduced {geometry.num_sites} sites to {p} root-of-unity classes")
        state, geometry = reduced_state, reduced_geometry

    chunks = enumerate_configuration_arrays(state, geometry, epsilon, max_configurations)
    omegas, probabilities = _accumulate_lines(chunks, geometry, tolerance, workers)
    return _build_spectrum(omegas, probabilities, binning, tolerance)


def sampled_spectrum(state: AtomicState, geometry: LatticeGeometry,
                     count: int = DEFAULT_SAMPLE_COUNT, seed: int = DEFAULT_SEED,
                     binning: Optional[Binning] = None,
                     workers: int = DEFAULT_WORKERS,
                     tolerance: float = LINE_MERGE_TOLERANCE) -> Spectrum:
    """Monte-Carlo estimate of the spectrum, each sample weighted 1/count."""
    samples = sample_configuration_array(state, geometry, count, seed, workers)
    omegas = configuration_frequencies(samples, geometry)
    probabilities = np.full(omegas.size, 1.0 / omegas.size)
    logger.info(f"Sampled spectrum from {omegas.size} configurations (seed={seed})")
    return _build_spectrum(omegas, probabilities, binning, tolerance)


def spectrum_sweep(state: AtomicState, spacings: Sequence, binning: Optional[Binning] = None,
                   epsilon: float = DEFAULT_EPSILON,
                   max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
                   workers: int = DEFAULT_WORKERS, method: str = "exact",
                   count: int = DEFAULT_SAMPLE_COUNT,
                   seed: int = DEFAULT_SEED) -> List[Tuple[LatticeGeometry, Spectrum]]:
    """Spectra of one state for a list of lattice spacings (spectra vs d).

    `method` is "exact" (enumeration) or "sampled" (the same seed at every
    spacing).
    """
    if method not in ("exact", "sampled"):
        raise DomainError(f"method must be 'exact' or 'sampled', got {method!r}")
    results = []
    for spacing in spacings:
        geometry = LatticeGeometry.from_spacing(state.num_sites, spacing)
        if method == "sampled":
            result = sampled_spectrum(state, geometry, count, seed, binning, workers)
        else:
            result = spectrum(state, geometry, epsilon, binning, max_configurations, workers)
        results.append((geometry, result))
    logger.info(f"Swept {len(results)} spacings ({method})")
    return results


def mean_square_frequency(state: AtomicState, geometry: LatticeGeometry) -> float:
    """E[omega^2] = |E N(d)|^2 + Var N(d) in closed form, N(d) = sum_m n_m exp(i*m*phi).

    For N atoms spread evenly this is N + N(N-1)/M^2 |sum_m exp(i*m*phi)|^2,
    which is N only when the phase sum vanishes.
    """
    if state.num_sites != geometry.num_sites:
        raise DomainError(ERROR_SITE_MISMATCH)
    phases = geometry.site_phases()
    mean = np.dot(state.mean_occupations(), phases)
    variance = np.real(np.conj(phases) @ state.occupation_covariance() @ phases)
    return float(abs(mean) ** 2 + variance)


def sf2_number_difference_std(num_atoms: int, geometry: LatticeGeometry) -> float:
    """Width of the two-well frequency distribution for the number-conserving superfluid.

    Returns sqrt((N/2)(1 - cos phi)), the rms fluctuation of the coupling
    amplitude n_0 + n_1*exp(i*phi) around its mean. At d = lambda/4 this is the
    standard deviation of n_0 - n_1. The width describes the frequency spread
    only while the mean frequency exceeds the fluctuations; close to
    d = lambda/4 the folded distribution is narrower.

    Raises:
        DomainError: If the geometry does not have exactly two wells
    """
    if geometry.num_sites != 2:
        raise DomainError(ERROR_TWO_WELLS_REQUIRED)
    if num_atoms < 0:
        raise DomainError(f"num_atoms must be non-negative, got {num_atoms}")
    cos_phi = float(geometry.site_phases()[1].real)
    return float(np.sqrt(0.5 * num_atoms * (1.0 - cos_phi)))


def coupling_fluctuation(state: AtomicState, geometry: LatticeGeometry,
                         epsilon: float = DEFAULT_EPSILON,
                         max_configurations: int = DEFAULT_MAX_CONFIGURATIONS) -> float:
    """sqrt(E|N(d) - E N(d)|^2) by enumeration, N(d) = sum_m n_m exp(i*m*phi)."""
    phases = geometry.site_phases()
    mass = 0.0
    first = 0j
    second = 0.0
    for occupations, probabilities in enumerate_configuration_arrays(
            state, geometry, epsilon, max_configurations):
        amplitude = occupations @ phases
        mass += probabilities.sum()
        first += np.dot(probabilities, amplitude)
        second += np.dot(probabilities, np.abs(amplitude) ** 2)
    mean = first / mass
    return float(np.sqrt(max(second / mass - abs(mean) ** 2, 0.0)))
