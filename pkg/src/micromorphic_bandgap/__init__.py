"""Plane-wave dispersion and band gaps in the relaxed linear micromorphic continuum."""

from .bandgap import (
    BandGapReport,
    GapCondition,
    GapInterval,
    SweepCase,
    analytic_gap,
    analyze,
    gap_condition,
    numeric_gaps,
    sweep_mu_c,
    sweep_mu_c_values,
)
from .config import AnalysisConfig, parse_config
from .dispersion import (
    BranchLabel,
    DispersionBranch,
    WaveFamily,
    build_longitudinal_matrix,
    build_transverse_matrix,
    coupled_omegas,
    default_k_grid,
    detect_asymptote,
    sample_branches,
    uncoupled_omega,
)
from .material import (
    CharacteristicScales,
    MacroLame,
    MaterialParameters,
    characteristic_scales,
    macro_from_micro,
    micro_from_macro,
    table1_parameters,
    validate_definiteness,
)
from .output import emit_curves, emit_gap_report

__version__ = "0.1.0"


def example_config_path():
    """Path of the bundled reference configuration (``table1.json``)."""
    from importlib.resources import files

    return files(__name__) / "data" / "table1.json"
