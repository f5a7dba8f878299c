"""Conduction-diffusion irreversible port-Hamiltonian systems on mimetic grids."""

from ._iphs import (
    ConstitutiveModel,
    IphsError,
    MimeticGrid,
    Scenario,
    audit_run,
    co_energy,
    energy_density,
    ibp_residual,
    load_scenario,
    parse_scenario,
    run_scenario,
    skew_defect,
    synthesize_ports,
)

__all__ = [
    "ConstitutiveModel",
    "IphsError",
    "MimeticGrid",
    "Scenario",
    "audit_run",
    "co_energy",
    "energy_density",
    "ibp_residual",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
    "skew_defect",
    "synthesize_ports",
]
