"""Exact joint atom-photon evolution in the double well.

The Hamiltonian conserves n_0, n_1 and n_k + n_-k, so every sector
(n_0, n_1, n_tot) evolves independently in an (n_tot + 1)-dimensional
photon space with a tridiagonal Hamiltonian. Sectors are diagonalized
exactly; there is no time stepping.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln
from scipy.stats import binom, poisson

from .constants import (
    CAT_STATE_TIME, DEFAULT_EPSILON, DEFAULT_MAX_CONFIGURATIONS, DEFAULT_Q_GRID_MARGIN,
    DEFAULT_Q_GRID_SPACING, DEFAULT_WORKERS, ERROR_TWO_WELLS_REQUIRED, FOCK_CUTOFF_WIDTH,
    NORMALIZATION_TOLERANCE,
)
from .errors import DimensionError, DomainError
from .interfaces import CatStateDiagnostics, JointState, PhotonStatistics
from .states import (
    AtomicState, CoherentSuperfluidState, LatticeGeometry, _poisson_cutoff,
    enumerate_configuration_arrays,
)

logger = logging.getLogger(__name__)


def _require_two_wells(geometry: LatticeGeometry) -> None:
    if geometry.num_sites != 2:
        raise DomainError(ERROR_TWO_WELLS_REQUIRED)


def coupling_amplitude(n0: int, n1: int, geometry: LatticeGeometry) -> complex:
    """nu(d) = n_0 + n_1 exp(i*phi)."""
    return complex(n0 + n1 * geometry.site_phases(2)[1])


def evolve_sector(n0: int, n1: int, n_tot: int, geometry: LatticeGeometry,
                  times: Sequence[float], include_number_phase: bool = True) -> np.ndarray:
    """Photon amplitudes of one invariant sector, starting from |n_-k = 0, n_k = n_tot>.

    Returns an array of shape (len(times), n_tot + 1) indexed by n_-k. The
    off-diagonal element <j+1|H|j> = nu * sqrt((j+1)(n_tot-j)) is made real by
    the gauge |j> -> exp(i*j*arg(nu))|j> before calling the tridiagonal
    eigensolver. With `include_number_phase` the diagonal (n_0+n_1)*n_tot
    contributes its global phase; without it the evolution is in the
    interaction picture of that term.

    Raises:
        DimensionError: If n_tot < 0
    """
    if n_tot < 0:
        raise DimensionError(f"n_tot must be non-negative, got {n_tot}")
    if n0 < 0 or n1 < 0:
        raise DomainError(f"well occupations must be non-negative, got ({n0}, {n1})")
    times = np.asarray(times, dtype=float)
    nu = coupling_amplitude(n0, n1, geometry)
    if n_tot == 0:
        amplitudes = np.ones((times.size, 1), dtype=complex)
    else:
        j = np.arange(n_tot)
        off_diagonal = abs(nu) * np.sqrt((j + 1.0) * (n_tot - j))
        energies, vectors = eigh_tridiagonal(np.zeros(n_tot + 1), off_diagonal)
        propagator = np.exp(-1j * np.outer(times, energies)) * vectors[0]
        gauge = np.exp(1j * np.arange(n_tot + 1) * np.angle(nu))
        amplitudes = (propagator @ vectors.T) * gauge
    if include_number_phase:
        amplitudes *= np.exp(-1j * (n0 + n1) * n_tot * times)[:, None]
    return amplitudes


def beam_splitter_photon_law(n_tot: int, coupling: float, times: Sequence[float]) -> np.ndarray:
    """Binomial(n_tot, sin^2(|nu| t)) photon law of a sector, shape (len(times), n_tot + 1)."""
    if n_tot < 0:
        raise DimensionError(f"n_tot must be non-negative, got {n_tot}")
    success = np.sin(abs(coupling) * np.asarray(times, dtype=float)) ** 2
    return binom.pmf(np.arange(n_tot + 1)[None, :], n_tot, success[:, None])


def _weighted_sector_laws(chunk, n_tot: int, geometry: LatticeGeometry,
                          times: np.ndarray) -> np.ndarray:
    occupations, probabilities = chunk
    table = np.zeros((times.size, n_tot + 1))
    for (n0, n1), probability in zip(occupations, probabilities):
        table += probability * np.abs(evolve_sector(int(n0), int(n1), n_tot, geometry, times)) ** 2
    return table


def photon_statistics(state: AtomicState, geometry: LatticeGeometry, n_tot: int,
                      times: Sequence[float], epsilon: float = DEFAULT_EPSILON,
                      max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
                      workers: int = DEFAULT_WORKERS) -> PhotonStatistics:
    """P_{n_-k}(t) = sum over (n_0, n_1) of P(n_0, n_1) times the sector law.

    The mixture is renormalized by the enumerated atomic mass; the missing
    mass is recorded in `truncated_mass`.

    Raises:
        DomainError: If the lattice does not have two wells
        DimensionError: If n_tot < 0
        BudgetExceeded: If the atomic enumeration exceeds the budget
    """
    _require_two_wells(geometry)
    if n_tot < 0:
        raise DimensionError(f"n_tot must be non-negative, got {n_tot}")
    times = np.asarray(times, dtype=float)
    chunks = list(enumerate_configuration_arrays(state, geometry, epsilon, max_configurations))
    mass = float(sum(chunk[1].sum() for chunk in chunks))

    def partial(chunk):
        return _weighted_sector_laws(chunk, n_tot, geometry, times)

    if workers <= 1:
        partials = [partial(chunk) for chunk in chunks]
    else:
        # Row blocks, one share of the sectors per worker
        blocks = []
        for occupations, probabilities in chunks:
            for rows in np.array_split(np.arange(occupations.shape[0]), workers):
                if rows.size:
                    blocks.append((occupations[rows], probabilities[rows]))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            partials = list(executor.map(partial, blocks))
    table = np.sum(partials, axis=0) / mass
    logger.info(f"Photon statistics for n_tot={n_tot} over {len(times)} times "
                f"(atomic mass {mass:.12f})")
    return PhotonStatistics(times=times, table=table, mean_photons=float(n_tot),
                            truncated_mass=max(1.0 - mass, 0.0))


def coherent_input_photon_statistics(state: AtomicState, geometry: LatticeGeometry,
                                     photon_mean: float, times: Sequence[float],
                                     epsilon: float = DEFAULT_EPSILON,
                                     max_configurations: int = DEFAULT_MAX_CONFIGURATIONS,
                                     workers: int = DEFAULT_WORKERS) -> PhotonStatistics:
    """Photon statistics for a coherent +k mode, as a Poisson mixture over n_tot sectors."""
    if not photon_mean > 0:
        raise DomainError(f"photon_mean must be positive, got {photon_mean}")
    times = np.asarray(times, dtype=float)
    n_max = _poisson_cutoff(photon_mean, epsilon)
    weights = poisson.pmf(np.arange(n_max + 1), photon_mean)
    retained = float(weights.sum())
    weights = weights / retained
    table = np.zeros((times.size, n_max + 1))
    for n_tot, weight in enumerate(weights):
        sector = photon_statistics(state, geometry, n_tot, times, epsilon,
                                   max_configurations, workers)
        table[:, :n_tot + 1] += weight * sector.table
    mean_photons = float(np.dot(np.arange(n_max + 1), weights))
    logger.info(f"Coherent input with mean {photon_mean}: mixed {n_max + 1} photon sectors")
    return PhotonStatistics(times=times, table=table, mean_photons=mean_photons,
                            truncated_mass=max(1.0 - retained, 0.0))


def fock_cutoff(mean: float) -> int:
    """Per-well Fock cutoff mean + 8*sqrt(mean)."""
    return int(math.ceil(mean + FOCK_CUTOFF_WIDTH * math.sqrt(mean)))


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """<n|alpha> for n = 0..n_max."""
    n = np.arange(n_max + 1)
    if alpha == 0:
        return (n == 0).astype(complex)
    log_magnitude = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    return np.exp(log_magnitude + 1j * n * np.angle(alpha))


def evolve_joint_state(state: CoherentSuperfluidState, geometry: LatticeGeometry, n_tot: int,
                       time: float, include_number_phase: bool = True) -> JointState:
    """Joint amplitudes (n_0, n_1, n_-k) at `time` for coherent wells and a Fock +k mode."""
    _require_two_wells(geometry)
    if not isinstance(state, CoherentSuperfluidState):
        raise DomainError("joint evolution is defined for the coherent-state superfluid")
    if n_tot < 0:
        raise DimensionError(f"n_tot must be non-negative, got {n_tot}")
    cutoffs = [fock_cutoff(mean) for mean in state.mean_occupations()]
    well0 = coherent_amplitudes(state.alphas[0], cutoffs[0])
    well1 = coherent_amplitudes(state.alphas[1], cutoffs[1])
    raw_mass = float(np.sum(np.abs(well0) ** 2) * np.sum(np.abs(well1) ** 2))
    amplitudes = np.zeros((well0.size, well1.size, n_tot + 1), dtype=complex)
    for n0, c0 in enumerate(well0):
        for n1, c1 in enumerate(well1):
            sector = evolve_sector(n0, n1, n_tot, geometry, [time], include_number_phase)[0]
            amplitudes[n0, n1] = c0 * c1 * sector
    amplitudes /= math.sqrt(raw_mass)
    joint = JointState(amplitudes=amplitudes, n_tot=n_tot, time=float(time),
                       truncated_mass=max(1.0 - raw_mass, 0.0))
    if abs(joint.norm - 1.0) > NORMALIZATION_TOLERANCE:
        logger.warning(f"Joint state norm deviates from 1 by {abs(joint.norm - 1.0):.3e}")
    return joint


def default_q_grid(alpha0: complex, margin: float = DEFAULT_Q_GRID_MARGIN,
                   spacing: float = DEFAULT_Q_GRID_SPACING) -> np.ndarray:
    """Square complex grid [-|alpha0|-margin, |alpha0|+margin]^2."""
    half_width = abs(alpha0) + margin
    points = int(round(2 * half_width / spacing)) + 1
    axis = np.linspace(-half_width, half_width, points)
    real, imag = np.meshgrid(axis, axis)
    return real + 1j * imag


def husimi_q(rho: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Q(alpha) = <alpha|rho|alpha>/pi on a complex grid, for rho in a truncated Fock basis."""
    grid = np.asarray(grid, dtype=complex)
    flat = grid.ravel()[:, None]
    # <n|alpha> built by the recursion c_n = c_{n-1} * alpha / sqrt(n)
    steps = flat / np.sqrt(np.arange(1, rho.shape[0]))
    vectors = np.hstack([np.ones_like(flat), np.cumprod(steps, axis=1)])
    vectors *= np.exp(-0.5 * np.abs(flat) ** 2)
    values = np.einsum('gm,mn,gn->g', vectors.conj(), rho, vectors).real / math.pi
    return values.reshape(grid.shape)


def two_branch_q(grid: np.ndarray, alpha0: complex, n_tot: int) -> np.ndarray:
    """Closed-form Q of well 0 at t = pi/2: equal mixture of |beta> and |-beta>.

    beta = alpha0 for even n_tot and i*alpha0 for odd n_tot (interaction
    picture). For n_tot = 0 nothing is scattered and well 0 stays in |alpha0>.
    """
    grid = np.asarray(grid, dtype=complex)
    if n_tot == 0:
        return np.exp(-np.abs(grid - alpha0) ** 2) / math.pi
    beta = alpha0 * (1j if n_tot % 2 else 1.0)
    return (np.exp(-np.abs(grid - beta) ** 2) + np.exp(-np.abs(grid + beta) ** 2)) / (2 * math.pi)


def cat_state_diagnostics(state: AtomicState, geometry: LatticeGeometry, n_tot: int,
                          grid: Optional[np.ndarray] = None,
                          time: float = CAT_STATE_TIME) -> CatStateDiagnostics:
    """Atomic Q-function of well 0 and photon-conditioned properties at d = lambda/4, t = pi/2.

    Raises:
        DomainError: Outside d = lambda/4, t = pi/2 or M = 2, or for a non-coherent state
    """
    _require_two_wells(geometry)
    if geometry.spacing_class != "lambda/4":
        raise DomainError("cat-state diagnostics require d = lambda/4")
    if abs(time - CAT_STATE_TIME) > 1e-12:
        raise DomainError(f"cat-state diagnostics require t = pi/2, got {time}")
    if not isinstance(state, CoherentSuperfluidState):
        raise DomainError("cat-state diagnostics require the coherent-state superfluid")

    joint = evolve_joint_state(state, geometry, n_tot, time, include_number_phase=False)
    alpha0 = complex(state.alphas[0])
    if grid is None:
        grid = default_q_grid(alpha0)
    rho0 = joint.well0_density_matrix()
    rho0 = rho0 / np.real(np.trace(rho0))
    q_values = husimi_q(rho0, grid)
    q_closed_form = two_branch_q(grid, alpha0, n_tot)

    photon_law = joint.photon_probabilities() / joint.norm
    outcomes = (n_tot, 0)
    n0 = np.arange(joint.amplitudes.shape[0])[:, None]
    n1 = np.arange(joint.amplitudes.shape[1])[None, :]
    odd = ((n0 - n1) % 2 == 1)
    conditional_odd = []
    for outcome in outcomes:
        populations = np.abs(joint.amplitudes[:, :, outcome]) ** 2
        total = populations.sum()
        conditional_odd.append(float(populations[odd].sum() / total) if total > 0 else 0.0)

    diagnostics = CatStateDiagnostics(
        grid=np.asarray(grid, dtype=complex),
        q_values=q_values,
        q_closed_form=q_closed_form,
        photon_projector_weights=(float(photon_law[n_tot]), float(photon_law[0])),
        unconditional_purity=joint.atomic_purity(),
        conditional_purities=tuple(joint.atomic_purity(outcome) for outcome in outcomes),
        conditional_odd_difference=tuple(conditional_odd),
        fock_cutoffs=(joint.amplitudes.shape[0] - 1, joint.amplitudes.shape[1] - 1),
    )
    logger.info(f"Cat-state Q-function on {grid.size} points, "
                f"max deviation from two-branch form {diagnostics.max_abs_error:.3e}")
    return diagnostics
