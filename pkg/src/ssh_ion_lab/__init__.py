"""Long-range SSH model of periodically driven trapped-ion chains."""

__version__ = "0.1.0"

from .couplings import (
    CouplingForm,
    CouplingMatrix,
    CouplingModel,
    PHI_TOPOLOGICAL,
    PHI_TRIVIAL,
    bare_coupling,
    bessel_dressing,
    build_coupling_matrix,
    dimerization,
    eta_for_dimerization,
)
from .lattice import (
    EdgeSide,
    EdgeStateReport,
    SpectralDecomposition,
    analyze_edge_states,
    diagonalize,
    find_edge_states,
    fit_localization_length,
)
from .topology import build_bloch, zak_phase
from .continuum import effective_params
from .dynamics import evolve_single_excitation, fit_survival_power_law, long_time_survival
from .manybody import (
    build_truncated_fermion_model,
    correlator_zz,
    exact_ground_state,
    hartree_fock,
    quasiparticle_weight,
)
from .floquet import DrivenModel, effective_model_fidelity, integrate_schrodinger, rotating_frame_hamiltonian
