"""Validated run configuration for the command-line front end."""

import hashlib
import logging
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import (
    DEFAULT_EPSILON, DEFAULT_MAX_CONFIGURATIONS, DEFAULT_SAMPLE_COUNT, DEFAULT_SEED,
    DEFAULT_T_MAX, DEFAULT_TIME_STEPS, DEFAULT_WORKERS,
)
from .dynamics import time_grid
from .errors import DomainError
from .interfaces import Binning
from .states import (
    AtomicState, CoherentSuperfluidState, LatticeGeometry, MottState, NumberSuperfluidState,
    parse_spacing,
)

logger = logging.getLogger(__name__)

Mode = Literal["spectrum", "sweep", "intensity", "photon-stats", "collapse", "laws", "qfunction"]
StateKind = Literal["mott", "sf1", "sf2"]
Method = Literal["exact", "sampled", "analytic"]
LawKind = Literal["gaussian_total", "even_odd_difference", "p_class", "rayleigh_walk"]

# Methods each mode accepts
MODE_METHODS = {
    "spectrum": ("exact", "sampled"),
    "sweep": ("exact", "sampled"),
    "intensity": ("exact", "sampled", "analytic"),
    "photon-stats": ("exact",),
    "collapse": ("exact", "analytic"),
    "laws": ("exact", "sampled", "analytic"),
    "qfunction": ("exact",),
}


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise ValueError(f"alphas: cannot parse '{text}' as a complex amplitude")


class Scenario(BaseModel):
    """One CLI run: state, lattice, photons, time grid, mode and method."""

    model_config = ConfigDict(extra='forbid', frozen=True)

    mode: Mode
    state: StateKind
    occupations: Optional[List[int]] = Field(None, min_length=1, description="Mott occupations per site")
    mean_n: Optional[float] = Field(None, ge=0.0, description="Total mean atom number (sf1)")
    alphas: Optional[List[str]] = Field(None, min_length=1, description="Coherent amplitudes per site (sf1)")
    atoms: Optional[int] = Field(None, ge=1, description="Exact atom number (sf2)")
    sites: Optional[int] = Field(None, ge=2, description="Number of lattice sites M")
    spacing: str = Field("1/2", description="Lattice spacing in units of lambda, 'q/r' or decimal")
    spacings: Optional[List[str]] = Field(None, min_length=1, description="Spacings for a sweep")
    photons: Optional[int] = Field(None, ge=0, description="Fock photon number n_tot")
    photon_mean: Optional[float] = Field(None, gt=0.0, description="Coherent +k photon mean")
    t_max: float = Field(DEFAULT_T_MAX, gt=0.0, description="End of the time grid (units 1/g)")
    steps: int = Field(DEFAULT_TIME_STEPS, ge=2, description="Number of time points")
    method: Method = "exact"
    count: int = Field(DEFAULT_SAMPLE_COUNT, ge=1, description="Monte-Carlo sample count")
    seed: int = Field(DEFAULT_SEED, ge=0)
    epsilon: float = Field(DEFAULT_EPSILON, gt=0.0, lt=1.0)
    bin_width: Optional[float] = Field(None, gt=0.0)
    workers: int = Field(DEFAULT_WORKERS, ge=1)
    max_configurations: int = Field(DEFAULT_MAX_CONFIGURATIONS, ge=1)
    law: Optional[LawKind] = None

    @field_validator('alphas')
    @classmethod
    def validate_alphas(cls, v):
        if v is not None:
            for text in v:
                _parse_complex(text)
        return v

    @field_validator('spacing')
    @classmethod
    def validate_spacing(cls, v):
        try:
            spacing = parse_spacing(v)
        except DomainError as e:
            raise ValueError(f"spacing: {e}")
        if not spacing > 0:
            raise ValueError(f"spacing must be positive, got {v}")
        return v.strip()

    @field_validator('spacings')
    @classmethod
    def validate_spacings(cls, v):
        if v is not None:
            for text in v:
                cls.validate_spacing(text)
        return v

    @model_validator(mode='after')
    def validate_combination(self):
        if self.method not in MODE_METHODS[self.mode]:
            raise ValueError(f"method: '{self.method}' is not available in {self.mode} mode "
                             f"(choose from {', '.join(MODE_METHODS[self.mode])})")
        self._validate_state()
        num_sites = self.num_sites
        if self.mode == "sweep" and not self.spacings:
            raise ValueError("spacings: sweep mode needs at least one spacing")
        if self.mode in ("photon-stats", "qfunction") and num_sites != 2:
            raise ValueError(f"sites: {self.mode} requires exactly two wells, got {num_sites}")
        if self.mode == "photon-stats" and (self.photons is None) == (self.photon_mean is None):
            raise ValueError("photons: photon-stats needs exactly one of --photons or --photon-mean")
        if self.mode == "qfunction":
            if self.state != "sf1":
                raise ValueError("state: qfunction requires the sf1 (coherent) state")
            if self.photons is None:
                raise ValueError("photons: qfunction needs --photons")
            if self.geometry().spacing_class != "lambda/4":
                raise ValueError("spacing: qfunction requires d = 1/4")
        if self.mode == "laws":
            self._validate_law()
        if self.mode == "intensity" and self.method == "analytic" and self.state == "mott":
            raise ValueError("state: the closed-form lattice intensity needs a superfluid state")
        return self

    def _validate_state(self):
        if self.state == "mott":
            if not self.occupations:
                raise ValueError("occupations: the mott state needs --occupations")
            if any(n < 0 for n in self.occupations) or sum(self.occupations) == 0:
                raise ValueError("occupations: must be non-negative with at least one atom")
            if self.sites is not None and self.sites != len(self.occupations):
                raise ValueError(f"sites: {self.sites} does not match {len(self.occupations)} occupations")
            if len(self.occupations) < 2:
                raise ValueError("occupations: at least two sites are required")
        elif self.state == "sf1":
            if self.alphas is None and self.mean_n is None:
                raise ValueError("mean_n: the sf1 state needs --mean-n or --alphas")
            if self.alphas is not None:
                if self.sites is not None and self.sites != len(self.alphas):
                    raise ValueError(f"sites: {self.sites} does not match {len(self.alphas)} alphas")
                if len(self.alphas) < 2:
                    raise ValueError("alphas: at least two sites are required")
            elif self.sites is None:
                raise ValueError("sites: --sites is required with --mean-n")
        else:
            if self.atoms is None:
                raise ValueError("atoms: the sf2 state needs --atoms")
            if self.sites is None:
                raise ValueError("sites: --sites is required for the sf2 state")

    def _validate_law(self):
        if self.law is None:
            raise ValueError("law: laws mode needs --law")
        if self.state == "mott":
            raise ValueError("state: analytic laws describe superfluid states")
        if self.law == "p_class":
            geometry = self.geometry()
            p = geometry.root_order
            if p is None or p < 3:
                raise ValueError("spacing: p_class needs a rational spacing with p >= 3")
            if geometry.num_sites % p != 0:
                raise ValueError(f"sites: {geometry.num_sites} must be a multiple of p={p}")
        elif self.method == "sampled":
            raise ValueError(f"method: only the p_class law can be sampled, not {self.law}")

    @property
    def num_sites(self) -> int:
        if self.state == "mott":
            return len(self.occupations)
        if self.state == "sf1" and self.alphas is not None:
            return len(self.alphas)
        return self.sites

    @property
    def mean_atoms(self) -> float:
        """Mean total atom number of the configured state."""
        if self.state == "sf2":
            return float(self.atoms)
        return self.build_state().mean_total

    def build_state(self) -> AtomicState:
        if self.state == "mott":
            return MottState(self.occupations)
        if self.state == "sf1":
            if self.alphas is not None:
                return CoherentSuperfluidState([_parse_complex(a) for a in self.alphas])
            return CoherentSuperfluidState.uniform(self.mean_n, self.num_sites)
        return NumberSuperfluidState(self.atoms, self.num_sites)

    def geometry(self, spacing: Optional[str] = None) -> LatticeGeometry:
        return LatticeGeometry.from_spacing(self.num_sites, spacing or self.spacing)

    def times(self) -> np.ndarray:
        return time_grid(self.t_max, self.steps)

    def binning(self) -> Optional[Binning]:
        return None if self.bin_width is None else Binning(self.bin_width)

    def digest(self) -> str:
        """Short stable hash of the resolved scenario, used to name the run directory."""
        payload = self.model_dump_json()
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:12]

    def run_name(self) -> str:
        return f"{self.mode}_{self.digest()}"
