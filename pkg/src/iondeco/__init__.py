"""Verified simulator for stochastic-unitary-step (intrinsic) decoherence of a
trapped ion coupled to a cavity mode and a resonant laser, tracking the
probability of generating the tripartite GHZ state."""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError, ValidationError
from .model import (
    DerivedCouplings,
    HamiltonianBlock,
    ModeIndices,
    Spectrum,
    SystemParams,
    build_hamiltonian,
    derived_couplings,
    jacobi_eigh,
    spectrum_analytic,
    spectrum_numeric,
    validate_lamb_dicke,
)
from .engines import (
    DensityMatrix,
    EvolutionRequest,
    MonteCarloResult,
    closed_form_rho,
    evolve_eigenbasis,
    evolve_monte_carlo,
    evolve_ode,
    evolve_poisson,
    evolve_unitary,
    poisson_kick_sum,
)
from .observables import (
    GHZTarget,
    ClosedFormCoefficients,
    clamp_probability,
    closed_form_coefficients,
    closed_form_pghz,
    eigenbasis_coherences,
    ghz_state,
    p_ghz,
    populations,
    published_pghz,
    purity,
)
from .experiments import (
    AuditReport,
    PeakRecord,
    SweepSpec,
    Table1Row,
    TimeSeries,
    UnitReport,
    audit,
    find_peaks,
    physical_units,
    sweep,
    table1,
)
