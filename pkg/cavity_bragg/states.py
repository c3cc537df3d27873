"""Lattice geometry, atomic states and occupation-number configurations.

Three atomic state families are supported: a Mott insulator (Fock product
state), a mean-field superfluid (coherent state in every well) and a
number-conserving superfluid (N atoms delocalized over the lattice). Each one
can enumerate its configurations with exact probabilities or draw i.i.d.
samples from the same law.
"""

import itertools
import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .constants import (
    DEFAULT_EPSILON, DEFAULT_MAX_CONFIGURATIONS, DEFAULT_WORKERS,
    ENUMERATION_CHUNK_SIZE, ERROR_INVALID_EPSILON, ERROR_SITE_MISMATCH,
)
from .errors import BudgetExceeded, DomainError
from .interfaces import Configuration

logger = logging.getLogger(__name__)

Spacing = Union[Fraction, float]
ConfigurationChunk = Tuple[np.ndarray, np.ndarray]


def parse_spacing(spacing: Union[str, int, float, Fraction]) -> Spacing:
    """Parse a lattice spacing given as a fraction of the wavelength.

    "q/r" strings and Fractions stay exact so that integer-spectrum fast
    paths apply; every other input becomes a float.
    """
    if isinstance(spacing, Fraction):
        return spacing
    if isinstance(spacing, int):
        return Fraction(spacing)
    if isinstance(spacing, str):
        text = spacing.strip()
        if "/" in text:
            numerator, denominator = text.split("/", 1)
            try:
                return Fraction(int(numerator), int(denominator))
            except (ValueError, ZeroDivisionError) as e:
                raise DomainError(f"Invalid rational spacing '{spacing}': {e}")
        try:
            return float(text)
        except ValueError:
            raise DomainError(f"Invalid spacing '{spacing}'")
    return float(spacing)


@dataclass(frozen=True)
class LatticeGeometry:
    """One-dimensional lattice of `num_sites` wells spaced d = spacing * lambda.

    The phase picked up between neighbouring wells is phi = 2kd = 4*pi*d/lambda.
    For rational spacings 2d/lambda = q/p (lowest terms) the site phases are
    the p-th roots of unity exp(2*pi*i*(m*q mod p)/p), evaluated exactly.
    """
    num_sites: int
    spacing: Spacing

    def __post_init__(self):
        if int(self.num_sites) != self.num_sites or self.num_sites < 2:
            raise DomainError(f"num_sites must be an integer >= 2, got {self.num_sites}")
        spacing = parse_spacing(self.spacing)
        if not spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, 'num_sites', int(self.num_sites))
        object.__setattr__(self, 'spacing', spacing)

    @classmethod
    def from_spacing(cls, num_sites: int, spacing: Union[str, float, Fraction]) -> 'LatticeGeometry':
        return cls(num_sites=num_sites, spacing=parse_spacing(spacing))

    @property
    def is_rational(self) -> bool:
        return isinstance(self.spacing, Fraction)

    @property
    def phase(self) -> float:
        return 4.0 * math.pi * float(self.spacing)

    @property
    def root_order(self) -> Optional[int]:
        """p in 2d/lambda = q/p, or None for a float spacing."""
        if not self.is_rational:
            return None
        return (2 * self.spacing).denominator

    @property
    def root_numerator(self) -> Optional[int]:
        if not self.is_rational:
            return None
        return (2 * self.spacing).numerator % self.root_order

    @property
    def integer_spectrum(self) -> bool:
        """True for d = lambda/2 and d = lambda/4 type spacings (p = 1 or 2)."""
        return self.root_order in (1, 2)

    @property
    def spacing_class(self) -> str:
        if self.root_order == 1:
            return "lambda/2"
        if self.root_order == 2:
            return "lambda/4"
        return "general"

    def site_phases(self, num_sites: Optional[int] = None) -> np.ndarray:
        """exp(i*m*phi) for m = 0..num_sites-1."""
        m = np.arange(self.num_sites if num_sites is None else num_sites)
        if not self.is_rational:
            return np.exp(1j * m * self.phase)
        p, q = self.root_order, self.root_numerator
        if p == 1:
            return np.ones(m.size, dtype=complex)
        if p == 2:
            return np.where(m % 2 == 0, 1.0, -1.0).astype(complex)
        return np.exp(2j * np.pi * ((m * q) % p) / p)

    def class_sizes(self) -> np.ndarray:
        """Number of sites in each residue class m mod p."""
        p = self.root_order
        if p is None:
            raise DomainError("class decomposition requires a rational spacing")
        return np.bincount(np.arange(self.num_sites) % p, minlength=p)


def _poisson_cutoff(mean: float, tail: float) -> int:
    """Smallest n_max with P(X > n_max) < tail for X ~ Poisson(mean)."""
    if mean == 0:
        return 0
    n_max = int(max(poisson.isf(tail, mean), 0))
    while poisson.sf(n_max, mean) >= tail:
        n_max += 1
    while n_max > 0 and poisson.sf(n_max - 1, mean) < tail:
        n_max -= 1
    return n_max


def _poisson_logpmf_table(mean: float, n_max: int) -> np.ndarray:
    if mean == 0:
        return np.array([0.0])
    return poisson.logpmf(np.arange(n_max + 1), mean)


def _chunked(iterable, chunk_size: int) -> Iterator[list]:
    iterator = iter(iterable)
    while True:
        chunk = list(itertools.islice(iterator, chunk_size))
        if not chunk:
            return
        yield chunk


class AtomicState(ABC):
    """Interface for an atomic many-body state with diagonal number statistics."""

    kind: str = ""

    @property
    @abstractmethod
    def num_sites(self) -> int:
        """Number of lattice sites the state is defined on."""
        pass

    @abstractmethod
    def mean_occupations(self) -> np.ndarray:
        """Mean atom number per site."""
        pass

    @abstractmethod
    def configuration_count(self, epsilon: float) -> int:
        """Number of configurations an enumeration at tolerance epsilon yields."""
        pass

    @abstractmethod
    def iter_configuration_chunks(self, epsilon: float,
                                  chunk_size: int) -> Iterator[ConfigurationChunk]:
        """Yield (occupations[k, M], probabilities[k]) blocks."""
        pass

    @abstractmethod
    def sample_occupations(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw `count` i.i.d. occupation vectors, shape (count, M)."""
        pass

    @abstractmethod
    def total_number_distribution(self, epsilon: float = DEFAULT_EPSILON) -> Dict[int, float]:
        """Exact law of the total atom number."""
        pass

    @abstractmethod
    def reduce_to_classes(self, classes: np.ndarray, num_classes: int) -> 'AtomicState':
        """State over `num_classes` sites whose law is that of the class totals."""
        pass

    @property
    def mean_total(self) -> float:
        return float(np.sum(self.mean_occupations()))

    @abstractmethod
    def occupation_covariance(self) -> np.ndarray:
        """M x M covariance matrix of the site occupations."""
        pass


class MottState(AtomicState):
    """Fock product state |n_0, n_1, ..., n_{M-1}>."""

    kind = "mott"

    def __init__(self, occupations: Sequence[int]):
        occupations = tuple(int(n) for n in occupations)
        if len(occupations) < 1:
            raise DomainError("Mott state needs at least one occupation number")
        if any(n < 0 for n in occupations):
            raise DomainError(f"Mott occupations must be non-negative, got {occupations}")
        if sum(occupations) <= 0:
            raise DomainError("Mott state must contain at least one atom")
        self.occupations = occupations

    @property
    def num_sites(self) -> int:
        return len(self.occupations)

    def mean_occupations(self) -> np.ndarray:
        return np.array(self.occupations, dtype=float)

    def configuration_count(self, epsilon: float) -> int:
        return 1

    def iter_configuration_chunks(self, epsilon, chunk_size):
        yield np.array([self.occupations], dtype=np.int64), np.array([1.0])

    def sample_occupations(self, count, rng):
        return np.tile(np.array(self.occupations, dtype=np.int64), (count, 1))

    def total_number_distribution(self, epsilon=DEFAULT_EPSILON):
        return {sum(self.occupations): 1.0}

    def reduce_to_classes(self, classes, num_classes):
        totals = np.bincount(classes, weights=self.occupations, minlength=num_classes)
        return MottState(totals.astype(np.int64))

    def occupation_covariance(self):
        return np.zeros((self.num_sites, self.num_sites))

    def __repr__(self):
        return f"MottState(occupations={self.occupations})"


class CoherentSuperfluidState(AtomicState):
    """Mean-field superfluid: a coherent state |alpha_m> in every well.

    The number distribution of well m is Poissonian with mean |alpha_m|^2 and
    wells are independent.
    """

    kind = "sf1"

    def __init__(self, alphas: Sequence[complex]):
        alphas = np.array(alphas, dtype=complex)
        if alphas.ndim != 1 or alphas.size < 1:
            raise DomainError("coherent amplitudes must be a non-empty vector")
        if not np.all(np.isfinite(alphas)):
            raise DomainError("coherent amplitudes must be finite")
        alphas.setflags(write=False)
        self.alphas = alphas

    @classmethod
    def uniform(cls, mean_total: float, num_sites: int) -> 'CoherentSuperfluidState':
        """Equal real amplitudes with `mean_total` atoms on average in the lattice."""
        if mean_total < 0:
            raise DomainError(f"mean atom number must be non-negative, got {mean_total}")
        return cls(np.full(num_sites, math.sqrt(mean_total / num_sites)))

    @property
    def num_sites(self) -> int:
        return int(self.alphas.size)

    def mean_occupations(self) -> np.ndarray:
        return np.abs(self.alphas) ** 2

    def cutoffs(self, epsilon: float) -> List[int]:
        """Per-well cutoffs: tail mass below epsilon/M in each well."""
        tail = epsilon / self.num_sites
        return [_poisson_cutoff(mean, tail) for mean in self.mean_occupations()]

    def configuration_count(self, epsilon):
        return math.prod(n_max + 1 for n_max in self.cutoffs(epsilon))

    def iter_configuration_chunks(self, epsilon, chunk_size):
        cutoffs = self.cutoffs(epsilon)
        tables = [_poisson_logpmf_table(mean, n_max)
                  for mean, n_max in zip(self.mean_occupations(), cutoffs)]
        ranges = [range(n_max + 1) for n_max in cutoffs]
        for chunk in _chunked(itertools.product(*ranges), chunk_size):
            occupations = np.array(chunk, dtype=np.int64)
            log_probability = np.zeros(occupations.shape[0])
            for m, table in enumerate(tables):
                log_probability += table[occupations[:, m]]
            yield occupations, np.exp(log_probability)

    def sample_occupations(self, count, rng):
        return rng.poisson(self.mean_occupations(), size=(count, self.num_sites)).astype(np.int64)

    def total_number_distribution(self, epsilon=DEFAULT_EPSILON):
        mean = self.mean_total
        n_max = _poisson_cutoff(mean, epsilon)
        pmf = np.exp(_poisson_logpmf_table(mean, n_max))
        return {n: float(p) for n, p in enumerate(pmf)}

    def reduce_to_classes(self, classes, num_classes):
        class_means = np.bincount(classes, weights=self.mean_occupations(), minlength=num_classes)
        return CoherentSuperfluidState(np.sqrt(class_means))

    def occupation_covariance(self):
        # Independent Poisson wells
        return np.diag(self.mean_occupations())

    def __repr__(self):
        return f"CoherentSuperfluidState(alphas={self.alphas.tolist()})"


class NumberSuperfluidState(AtomicState):
    """Number-conserving superfluid (sum_m sqrt(w_m) c_m^dagger)^N |0>, normalized.

    With uniform weights w_m = 1/M this is the symmetric N-atom state, whose
    configuration law is multinomial: N!/prod(n_m!) * M^-N. Non-uniform weights
    describe the law of class totals after grouping sites.
    """

    kind = "sf2"

    def __init__(self, num_atoms: int, num_sites: int, weights: Optional[Sequence[float]] = None):
        if int(num_atoms) != num_atoms or num_atoms < 1:
            raise DomainError(f"num_atoms must be a positive integer, got {num_atoms}")
        if int(num_sites) != num_sites or num_sites < 1:
            raise DomainError(f"num_sites must be a positive integer, got {num_sites}")
        self.num_atoms = int(num_atoms)
        self._num_sites = int(num_sites)
        if weights is None:
            weights = np.full(self._num_sites, 1.0 / self._num_sites)
        weights = np.array(weights, dtype=float)
        if weights.shape != (self._num_sites,) or np.any(weights <= 0):
            raise DomainError("weights must be positive, one per site")
        self.weights = weights / weights.sum()

    @property
    def num_sites(self) -> int:
        return self._num_sites

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self._num_sites, rtol=0, atol=1e-15))

    def mean_occupations(self) -> np.ndarray:
        return self.num_atoms * self.weights

    def configuration_count(self, epsilon):
        return math.comb(self.num_atoms + self._num_sites - 1, self._num_sites - 1)

    def iter_configuration_chunks(self, epsilon, chunk_size):
        n_atoms, n_sites = self.num_atoms, self._num_sites
        log_factorials = gammaln(np.arange(n_atoms + 1) + 1.0)
        log_weights = np.log(self.weights)
        if n_sites == 1:
            yield np.array([[n_atoms]], dtype=np.int64), np.array([1.0])
            return
        # Stars and bars: bar positions in 0..N+M-2 delimit the M parts.
        bars = itertools.combinations(range(n_atoms + n_sites - 1), n_sites - 1)
        for chunk in _chunked(bars, chunk_size):
            positions = np.array(chunk, dtype=np.int64)
            padded = np.hstack([
                np.full((positions.shape[0], 1), -1, dtype=np.int64),
                positions,
                np.full((positions.shape[0], 1), n_atoms + n_sites - 1, dtype=np.int64),
            ])
            occupations = np.diff(padded, axis=1) - 1
            log_probability = (log_factorials[n_atoms]
                               - log_factorials[occupations].sum(axis=1)
                               + occupations @ log_weights)
            yield occupations, np.exp(log_probability)

    def sample_occupations(self, count, rng):
        return rng.multinomial(self.num_atoms, self.weights, size=count).astype(np.int64)

    def total_number_distribution(self, epsilon=DEFAULT_EPSILON):
        return {self.num_atoms: 1.0}

    def reduce_to_classes(self, classes, num_classes):
        class_weights = np.bincount(classes, weights=self.weights, minlength=num_classes)
        return NumberSuperfluidState(self.num_atoms, num_classes, class_weights)

    def occupation_covariance(self):
        return self.num_atoms * (np.diag(self.weights) - np.outer(self.weights, self.weights))

    def __repr__(self):
        return f"NumberSuperfluidState(num_atoms={self.num_atoms}, num_sites={self._num_sites})"


def _validate(state: AtomicState, geometry: LatticeGeometry) -> None:
    if state.num_sites != geometry.num_sites:
        raise DomainError(f"{ERROR_SITE_MISMATCH}: state has {state.num_sites}, "
                          f"geometry has {geometry.num_sites}")


def _validate_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 1:
        raise DomainError(f"{ERROR_INVALID_EPSILON}, got {epsilon}")


def enumerate_configuration_arrays(state: AtomicState, geometry: LatticeGeometry,
                                   epsilon: float = DEFAULT_EPSILON,
                                   max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
                                   chunk_size: int = ENUMERATION_CHUNK_SIZE
                                   ) -> Iterator[ConfigurationChunk]:
    """Enumerate configurations in numpy blocks.

    Args:
        state: Atomic state to enumerate
        geometry: Lattice the state lives on
        epsilon: Bound on the total truncated probability mass
        max_configurations: Configuration budget
        chunk_size: Rows per yielded block

    Yields:
        (occupations, probabilities) with occupations of shape (k, M)

    Raises:
        DomainError: If epsilon is outside (0, 1) or the site counts differ
        BudgetExceeded: If the enumeration would exceed the budget
    """
    _validate(state, geometry)
    _validate_epsilon(epsilon)
    count = state.configuration_count(epsilon)
    if count > max_configurations:
        raise BudgetExceeded(count, max_configurations)
    logger.info(f"Enumerating {count} configurations of {state.kind} state on {state.num_sites} sites")
    yield from state.iter_configuration_chunks(epsilon, chunk_size)


def enumerate_configurations(state: AtomicState, geometry: LatticeGeometry,
                             epsilon: float = DEFAULT_EPSILON,
                             max_configurations: int = DEFAULT_MAX_CONFIGURATIONS
                             ) -> Iterator[Configuration]:
    """Stream every configuration kept by the truncation scheme with its probability."""
    for occupations, probabilities in enumerate_configuration_arrays(
            state, geometry, epsilon, max_configurations):
        for row, probability in zip(occupations, probabilities):
            yield Configuration(tuple(int(n) for n in row), float(probability))


def spawn_generators(seed: int, workers: int) -> List[np.random.Generator]:
    """Independent PCG64 streams: worker i gets the i-th child of SeedSequence(seed)."""
    children = np.random.SeedSequence(seed).spawn(workers)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def split_count(count: int, workers: int) -> List[int]:
    """Contiguous block sizes, earlier workers take the remainder."""
    base, remainder = divmod(count, workers)
    return [base + (1 if i < remainder else 0) for i in range(workers)]


def sample_configuration_array(state: AtomicState, geometry: LatticeGeometry, count: int,
                               seed: int, workers: int = DEFAULT_WORKERS) -> np.ndarray:
    """Draw `count` i.i.d. occupation vectors, deterministic in (seed, count, workers)."""
    _validate(state, geometry)
    if int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count}")
    if int(workers) != workers or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers}")
    workers = min(int(workers), int(count))
    generators = spawn_generators(seed, workers)
    sizes = split_count(int(count), workers)
    if workers == 1:
        return state.sample_occupations(sizes[0], generators[0])
    with ThreadPoolExecutor(max_workers=workers) as executor:
        blocks = list(executor.map(state.sample_occupations, sizes, generators))
    return np.vstack(blocks)


def sample_configurations(state: AtomicState, geometry: LatticeGeometry, count: int,
                          seed: int, workers: int = DEFAULT_WORKERS) -> Iterator[Configuration]:
    """Stream i.i.d. samples, each carrying the empirical weight 1/count."""
    samples = sample_configuration_array(state, geometry, count, seed, workers)
    weight = 1.0 / samples.shape[0]
    for row in samples:
        yield Configuration(tuple(int(n) for n in row), weight)


def total_number_distribution(state: AtomicState,
                              epsilon: float = DEFAULT_EPSILON) -> Dict[int, float]:
    """Law of the total atom number: a delta for Mott/SF2, Poissonian for SF1."""
    _validate_epsilon(epsilon)
    return state.total_number_distribution(epsilon)


def reduce_to_classes(state: AtomicState,
                      geometry: LatticeGeometry) -> Tuple[AtomicState, LatticeGeometry]:
    """Group sites by the root of unity they carry.

    For 2d/lambda = q/p the coupling frequency only depends on the p class
    totals N_l = sum of n_m over m = l (mod p). The returned state has the
    exact joint law of those totals and the returned geometry places them on
    p sites with the same spacing, so class l carries exp(2*pi*i*l*q/p).
    """
    _validate(state, geometry)
    p = geometry.root_order
    if p is None or p < 2:
        raise DomainError("class reduction needs a rational spacing with p >= 2")
    classes = np.arange(geometry.num_sites) % p
    reduced_state = state.reduce_to_classes(classes, p)
    return reduced_state, LatticeGeometry(num_sites=p, spacing=geometry.spacing)
