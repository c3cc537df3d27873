"""cavity-bragg: Bragg scattering of quantized cavity light off ultracold lattice atoms."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    CavityBraggError,
    DimensionError,
    DomainError,
    UnsupportedCombination,
)
from .interfaces import (
    Binning,
    CatStateDiagnostics,
    CollapseRevivalPrediction,
    Configuration,
    JointState,
    PhotonStatistics,
    SpectralLine,
    Spectrum,
    TimeSeries,
)
from .states import (
    AtomicState,
    CoherentSuperfluidState,
    LatticeGeometry,
    MottState,
    NumberSuperfluidState,
    enumerate_configurations,
    sample_configurations,
    total_number_distribution,
)
from .spectral import configuration_frequency, sampled_spectrum, sf2_number_difference_std, spectrum
from .dynamics import (
    closed_form_lattice_intensity,
    measure_collapse_time,
    predict_collapse_revival,
    reflected_intensity,
)
from .twowell_exact import cat_state_diagnostics, evolve_sector, photon_statistics
from .lattice_stats import (
    even_odd_difference_law,
    gaussian_total_law,
    kolmogorov_distance,
    p_class_law,
    rayleigh_walk_law,
    total_variation_distance,
)

__all__ = [
    'BudgetExceeded',
    'CavityBraggError',
    'DimensionError',
    'DomainError',
    'UnsupportedCombination',
    'Binning',
    'CatStateDiagnostics',
    'CollapseRevivalPrediction',
    'Configuration',
    'JointState',
    'PhotonStatistics',
    'SpectralLine',
    'Spectrum',
    'TimeSeries',
    'AtomicState',
    'CoherentSuperfluidState',
    'LatticeGeometry',
    'MottState',
    'NumberSuperfluidState',
    'enumerate_configurations',
    'sample_configurations',
    'total_number_distribution',
    'configuration_frequency',
    'sampled_spectrum',
    'sf2_number_difference_std',
    'spectrum',
    'closed_form_lattice_intensity',
    'measure_collapse_time',
    'predict_collapse_revival',
    'reflected_intensity',
    'cat_state_diagnostics',
    'evolve_sector',
    'photon_statistics',
    'even_odd_difference_law',
    'gaussian_total_law',
    'kolmogorov_distance',
    'p_class_law',
    'rayleigh_walk_law',
    'total_variation_distance',
]
