"""Large-lattice statistics: central-limit laws and the random-walk frequency law.

For many sites the total atom number and the even/odd-site totals become
Gaussian, the p root-of-unity classes of a rational spacing become
independent Gaussians, and for irrational spacings sum_m n_m exp(i*m*phi)
performs a two-dimensional random walk whose length is Rayleigh distributed.
"""

import logging
import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.stats import norm

from .constants import (
    CLASS_LAW_PRUNE_MASS, DEFAULT_MAX_CONFIGURATIONS, DEFAULT_SAMPLE_COUNT, DEFAULT_SEED,
    DEFAULT_WORKERS, ENUMERATION_CHUNK_SIZE, LAW_TRUNCATION_WIDTH, LINE_MERGE_TOLERANCE,
)
from .errors import BudgetExceeded, DomainError
from .interfaces import Spectrum
from .serialization import write_csv
from .spectral import merge_lines, sampled_spectrum, spectrum
from .states import LatticeGeometry, NumberSuperfluidState, spawn_generators, split_count

logger = logging.getLogger(__name__)

STATE_KINDS = ("sf1", "sf2")
P_CLASS_METHODS = ("exact", "sampled", "independent")


class AnalyticFrequencyLaw(ABC):
    """Normalized frequency (or atom-number difference) law in units of g."""

    kind: str
    params: Dict[str, Any]

    is_discrete: bool = True

    @abstractmethod
    def mean(self) -> float:
        pass

    @abstractmethod
    def std(self) -> float:
        pass

    @abstractmethod
    def cdf(self, x) -> np.ndarray:
        pass

    @abstractmethod
    def to_csv(self, path):
        pass


class DiscreteFrequencyLaw(AnalyticFrequencyLaw):
    """Law on a finite integer support, renormalized to unit mass.

    `pre_normalization_mass` is the mass of the formula on its support
    before renormalization.
    """

    is_discrete = True

    def __init__(self, kind: str, params: Dict[str, Any], support: np.ndarray,
                 weights: np.ndarray):
        support = np.asarray(support, dtype=float)
        weights = np.asarray(weights, dtype=float)
        mass = float(weights.sum())
        if mass <= 0:
            raise DomainError(f"{kind} law has no mass on its support")
        self.kind = kind
        self.params = dict(params)
        self.support = support
        self.probabilities = weights / mass
        self.pre_normalization_mass = mass

    @property
    def total_mass(self) -> float:
        return float(self.probabilities.sum())

    def probability(self, value: float) -> float:
        matches = np.isclose(self.support, value, rtol=0, atol=1e-9)
        return float(self.probabilities[matches].sum())

    def mean(self):
        return float(np.dot(self.support, self.probabilities))

    def second_moment(self) -> float:
        return float(np.dot(self.support ** 2, self.probabilities))

    def std(self):
        return float(math.sqrt(max(self.second_moment() - self.mean() ** 2, 0.0)))

    def cdf(self, x):
        return self.to_spectrum().cdf(x)

    def even_site_variance(self) -> float:
        """Variance of N_e implied by a law of |N_e - N_o|.

        Independent sites: Var(N_e) = Var(N_e - N_o)/2. Fixed total N:
        N_e - N_o = 2 N_e - N, so Var(N_e) = Var(N_e - N_o)/4.
        """
        if self.kind == "folded_gaussian_diff_sf1":
            return self.second_moment() / 2.0
        if self.kind == "constrained_diff_sf2":
            return self.second_moment() / 4.0
        raise DomainError(f"even-site variance is not defined for a {self.kind} law")

    def to_spectrum(self) -> Spectrum:
        return Spectrum(omegas=self.support, probabilities=self.probabilities,
                        exact_mass=self.total_mass)

    def to_csv(self, path):
        return write_csv(path, ["x", "probability"], zip(self.support, self.probabilities),
                         comments=["kind=discrete", f"law={self.kind}"])

    def __repr__(self):
        return f"DiscreteFrequencyLaw(kind={self.kind!r}, params={self.params})"


class RayleighWalkLaw(AnalyticFrequencyLaw):
    """P(omega) = (2 omega / s) exp(-omega^2 / s), omega in units of g.

    The scale s is E[omega^2]. It equals <N> when sum_m exp(i*m*phi)
    vanishes and exceeds it otherwise, see `spectral.mean_square_frequency`.
    """

    is_discrete = False
    kind = "rayleigh_walk"

    def __init__(self, mean_N: float, second_moment: Optional[float] = None):
        if not mean_N > 0:
            raise DomainError(f"mean_N must be positive, got {mean_N}")
        scale = mean_N if second_moment is None else second_moment
        if not scale > 0:
            raise DomainError(f"second_moment must be positive, got {second_moment}")
        self.mean_N = float(mean_N)
        self.scale = float(scale)
        self.params = {"mean_N": self.mean_N, "second_moment": self.scale}

    def density(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        values = 2.0 * omega / self.scale * np.exp(-omega ** 2 / self.scale)
        return np.where(omega >= 0, values, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-np.maximum(x, 0.0) ** 2 / self.scale), 0.0)

    def mode(self) -> float:
        return math.sqrt(self.scale / 2.0)

    def mean(self):
        return math.sqrt(math.pi * self.scale) / 2.0

    def std(self):
        return math.sqrt((1.0 - math.pi / 4.0) * self.scale)

    def grid(self, points: int = 2001) -> np.ndarray:
        return np.linspace(0.0, self.mean() + LAW_TRUNCATION_WIDTH * self.std(), points)

    def to_csv(self, path, points: int = 2001):
        x = self.grid(points)
        return write_csv(path, ["x", "density"], zip(x, self.density(x)),
                         comments=["kind=continuous", f"law={self.kind}"])

    def __repr__(self):
        return f"RayleighWalkLaw(mean_N={self.mean_N}, second_moment={self.scale})"


def _gaussian_window(mean: float, std: float, non_negative: bool = True) -> np.ndarray:
    low = int(math.floor(mean - LAW_TRUNCATION_WIDTH * std))
    if non_negative:
        low = max(0, low)
    high = int(math.ceil(mean + LAW_TRUNCATION_WIDTH * std))
    return np.arange(low, high + 1)


def gaussian_total_law(mean_N: float) -> DiscreteFrequencyLaw:
    """Central-limit law of the total atom number: Gaussian with mean and variance <N>."""
    if not mean_N > 0:
        raise DomainError(f"mean_N must be positive, got {mean_N}")
    std = math.sqrt(mean_N)
    support = _gaussian_window(mean_N, std)
    weights = norm.pdf(support, loc=mean_N, scale=std)
    return DiscreteFrequencyLaw("gaussian_total", {"mean_N": mean_N}, support, weights)


def even_odd_difference_law(state_kind: str,
                            mean_or_exact_N: Union[float, int]) -> DiscreteFrequencyLaw:
    """Law of |N_e - N_o| for a large lattice.

    sf1: (2 - delta_{D,0}) (2 pi <N>)^(-1/2) exp(-D^2 / 2<N>) on D = 0, 1, 2, ...
    sf2: (2 - delta_{D,0}) sqrt(2 / (pi N)) exp(-D^2 / 2N) on D = N mod 2, N mod 2 + 2, ...
    Both are renormalized over their support.
    """
    if state_kind not in STATE_KINDS:
        raise DomainError(f"state_kind must be one of {STATE_KINDS}, got {state_kind!r}")
    if mean_or_exact_N < 0:
        raise DomainError(f"atom number must be non-negative, got {mean_or_exact_N}")
    if mean_or_exact_N == 0:
        raise DomainError("atom number must be positive for a Gaussian law")
    std = math.sqrt(mean_or_exact_N)
    high = int(math.ceil(LAW_TRUNCATION_WIDTH * std))
    if state_kind == "sf1":
        support = np.arange(high + 1)
        weights = (2.0 - (support == 0)) * norm.pdf(support, scale=std)
        return DiscreteFrequencyLaw("folded_gaussian_diff_sf1", {"mean_N": mean_or_exact_N},
                                    support, weights)

    if int(mean_or_exact_N) != mean_or_exact_N:
        raise DomainError(f"sf2 requires an integer atom number, got {mean_or_exact_N}")
    n_atoms = int(mean_or_exact_N)
    support = np.arange(n_atoms % 2, min(n_atoms, high) + 1, 2)
    weights = ((2.0 - (support == 0)) * math.sqrt(2.0 / (math.pi * n_atoms))
               * np.exp(-support.astype(float) ** 2 / (2.0 * n_atoms)))
    law = DiscreteFrequencyLaw("constrained_diff_sf2", {"N": n_atoms}, support, weights)
    logger.debug(f"sf2 difference law for N={n_atoms}: "
                 f"pre-normalization mass {law.pre_normalization_mass:.9f}")
    return law


def _class_gaussian_grids(mean_N: float, p: int) -> Tuple[np.ndarray, np.ndarray]:
    # Integer grid mean +- 8 std, unclipped at zero so E|Z|^2 = <N>
    mean = mean_N / p
    std = math.sqrt(mean)
    grid = _gaussian_window(mean, std, non_negative=False)
    weights = norm.pdf(grid, loc=mean, scale=std)
    return grid, weights / weights.sum()


def _merge_partial_sums(values: np.ndarray, masses: np.ndarray,
                        tolerance: float = LINE_MERGE_TOLERANCE) -> Tuple[np.ndarray, np.ndarray]:
    """Add up the masses of complex partial sums that agree to `tolerance`."""
    keys = np.round(values.real / tolerance) + 1j * np.round(values.imag / tolerance)
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return values[first], np.bincount(inverse.ravel(), weights=masses, minlength=first.size)


def _convolve_classes(grid: np.ndarray, weights: np.ndarray, phases: np.ndarray,
                      max_configurations: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Law of sum_l N_l phases[l] for i.i.d. N_l on `grid`, one class at a time.

    After each class the distinct partial sums are merged and products below
    CLASS_LAW_PRUNE_MASS are dropped. Returns (values, masses, dropped mass).

    Raises:
        BudgetExceeded: If more than `max_configurations` partial sums are retained
    """
    values = np.zeros(1, dtype=complex)
    masses = np.ones(1)
    dropped = 0.0
    rows = max(1, ENUMERATION_CHUNK_SIZE // grid.size)
    for phase in phases:
        steps = grid * phase
        blocks: List[Tuple[np.ndarray, np.ndarray]] = []
        retained = 0
        for start in range(0, values.size, rows):
            block_values = (values[start:start + rows, None] + steps[None, :]).ravel()
            block_masses = (masses[start:start + rows, None] * weights[None, :]).ravel()
            keep = block_masses > CLASS_LAW_PRUNE_MASS
            dropped += float(block_masses[~keep].sum())
            merged = _merge_partial_sums(block_values[keep], block_masses[keep])
            retained += merged[0].size
            if retained > max_configurations:
                raise BudgetExceeded(retained, max_configurations)
            blocks.append(merged)
        values, masses = _merge_partial_sums(np.concatenate([v for v, _ in blocks]),
                                             np.concatenate([m for _, m in blocks]))
    return values, masses, dropped


def _independent_class_law(mean_N: float, p: int, phases: np.ndarray,
                           method: str, count: int, seed: int, workers: int,
                           max_configurations: int) -> Tuple[np.ndarray, np.ndarray]:
    grid, weights = _class_gaussian_grids(mean_N, p)
    if method == "sampled":
        samples = []
        for rng, size in zip(spawn_generators(seed, workers), split_count(count, workers)):
            samples.append(rng.choice(grid, size=(size, p), p=weights))
        omegas = np.abs(np.vstack(samples) @ phases)
        return omegas, np.full(omegas.size, 1.0 / omegas.size)
    values, masses, dropped = _convolve_classes(grid, weights, phases, max_configurations)
    logger.info(f"Convolved {p} class laws into {values.size} partial sums "
                f"(pruned mass {dropped:.3g})")
    return np.abs(values), masses


def p_class_law(state_kind: str, mean_N: float, num_sites: int, p: int, q: int = 1,
                method: str = "exact", count: int = DEFAULT_SAMPLE_COUNT,
                seed: int = DEFAULT_SEED, workers: int = DEFAULT_WORKERS,
                max_configurations: int = DEFAULT_MAX_CONFIGURATIONS) -> Spectrum:
    """Frequency law omega = |sum_l N_l exp(2 pi i l q / p)| of the p class totals.

    sf1: the N_l are independent Gaussians with mean and variance <N>/p,
    discretized on the integers on a mean +- 8 std grid, either convolved
    class by class or sampled. sf2: "exact" enumerates the multinomial class
    totals, "sampled" draws them, "independent" uses the sf1 Gaussian law
    with N atoms; the negative class covariances and the reduced marginal
    variances cancel in E|sum_l N_l exp(2 pi i l q/p)|^2 = N.

    Raises:
        DomainError: If p < 3, M is not a multiple of p, or q is not coprime to p
        BudgetExceeded: If the convolution retains more than `max_configurations`
            partial sums
    """
    if state_kind not in STATE_KINDS:
        raise DomainError(f"state_kind must be one of {STATE_KINDS}, got {state_kind!r}")
    if method not in P_CLASS_METHODS:
        raise DomainError(f"method must be one of {P_CLASS_METHODS}, got {method!r}")
    if p < 3:
        raise DomainError("p_class_law needs p >= 3; use even_odd_difference_law for p = 2")
    if math.gcd(q, p) != 1:
        raise DomainError(f"q={q} and p={p} must be coprime")
    if num_sites % p != 0:
        raise DomainError(f"num_sites={num_sites} must be a multiple of p={p}")
    if mean_N < 0:
        raise DomainError(f"mean_N must be non-negative, got {mean_N}")
    if mean_N == 0:
        return Spectrum(omegas=np.array([0.0]), probabilities=np.array([1.0]))

    phases = np.exp(2j * np.pi * ((np.arange(p) * q) % p) / p)
    if state_kind == "sf2" and method in ("exact", "sampled"):
        if int(mean_N) != mean_N:
            raise DomainError(f"sf2 requires an integer atom number, got {mean_N}")
        classes = NumberSuperfluidState(int(mean_N), p)
        geometry = LatticeGeometry(num_sites=p, spacing=Fraction(q, 2 * p))
        if method == "exact":
            law = spectrum(classes, geometry, max_configurations=max_configurations,
                           workers=workers)
        else:
            law = sampled_spectrum(classes, geometry, count=count, seed=seed, workers=workers)
        return Spectrum(omegas=law.omegas, probabilities=law.normalized_probabilities())

    omegas, probabilities = _independent_class_law(
        mean_N, p, phases, "sampled" if method == "sampled" else "exact",
        count, seed, workers, max_configurations)
    omegas, probabilities = merge_lines(omegas, probabilities, LINE_MERGE_TOLERANCE)
    return Spectrum(omegas=omegas, probabilities=probabilities / probabilities.sum())


def rayleigh_walk_law(mean_N: float, second_moment: Optional[float] = None) -> RayleighWalkLaw:
    """Random-walk frequency law with E[omega^2] = second_moment (default <N>)."""
    return RayleighWalkLaw(mean_N, second_moment)


def matched_rayleigh_walk_law(law: Spectrum, mean_N: float) -> RayleighWalkLaw:
    """Random-walk law with the same E[omega^2] as a computed spectrum."""
    return RayleighWalkLaw(mean_N, law.second_moment())


LawLike = Union[Spectrum, DiscreteFrequencyLaw, RayleighWalkLaw]


def _as_discrete(law: LawLike) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    if isinstance(law, Spectrum):
        return law.omegas, law.normalized_probabilities()
    if isinstance(law, DiscreteFrequencyLaw):
        return law.support, law.probabilities
    return None


def kolmogorov_distance(first: LawLike, second: LawLike) -> float:
    """sup_x |F_1(x) - F_2(x)| for discrete or continuous laws."""
    first_discrete, second_discrete = _as_discrete(first), _as_discrete(second)
    if first_discrete is None and second_discrete is None:
        raise DomainError("at least one law must be discrete")
    if first_discrete is None:
        first, second = second, first
        first_discrete, second_discrete = second_discrete, first_discrete
    support = first_discrete[0]
    if second_discrete is not None:
        points = np.union1d(support, second_discrete[0])
        return float(np.max(np.abs(first.cdf(points) - second.cdf(points))))
    # Continuous partner: compare on both sides of every jump
    right = np.cumsum(first_discrete[1])
    left = np.concatenate([[0.0], right[:-1]])
    continuous = second.cdf(support)
    return float(max(np.max(np.abs(right - continuous)), np.max(np.abs(left - continuous))))


def total_variation_distance(first: LawLike, second: LawLike,
                             tolerance: float = LINE_MERGE_TOLERANCE) -> float:
    """(1/2) sum |p_1 - p_2| over the union of two discrete supports."""
    first_discrete, second_discrete = _as_discrete(first), _as_discrete(second)
    if first_discrete is None or second_discrete is None:
        raise DomainError("total variation distance needs two discrete laws")
    values = np.concatenate([first_discrete[0], second_discrete[0]])
    weights = np.concatenate([first_discrete[1], -second_discrete[1]])
    order = np.argsort(values, kind='stable')
    values, weights = values[order], weights[order]
    groups = np.cumsum(np.concatenate([[True], np.diff(values) > tolerance])) - 1
    return float(0.5 * np.sum(np.abs(np.bincount(groups, weights=weights))))


def describe_law(law: AnalyticFrequencyLaw) -> Dict[str, Any]:
    """Summary used by console output and manifests."""
    summary = {"kind": law.kind, "params": law.params, "mean": law.mean(), "std": law.std(),
               "discrete": law.is_discrete}
    if isinstance(law, DiscreteFrequencyLaw):
        summary["pre_normalization_mass"] = law.pre_normalization_mass
    return summary

