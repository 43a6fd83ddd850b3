"""Lindblad-generator toolkit for dissipative phase transitions with weak symmetries.

The U(1) laser and the Z2 two-photon Kerr resonator are built in
:mod:`dptlab.models`; generators split into symmetry sectors in
:mod:`dptlab.symmetry`, whose blocks feed the steady-state and spectral
routines of :mod:`dptlab.spectral`.  Time evolution and Wigner functions live
in :mod:`dptlab.dynamics`.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .fock import (  # noqa: E402
    DensityMatrix,
    annihilation,
    coherent_state,
    creation,
    displacement,
    expectation,
    fock_dm,
    number,
    parity,
    phase_rotation,
    raised_number,
)
from .lindblad import (  # noqa: E402
    LindbladModel,
    add_dissipator,
    dissipator_apply,
    liouvillian_apply,
    vectorize,
)
from .symmetry import (  # noqa: E402
    SymmetrySector,
    sector_liouvillian,
    sector_project,
    ssb_removal_check,
    u1_sectors,
    verify_weak_symmetry,
    z2_sectors,
)
from .spectral import (  # noqa: E402
    broken_steady_states,
    criticality_witness,
    gap_trace,
    model_spectrum,
    model_steady_state,
    sector_spectrum,
    steady_state,
)
from .dynamics import evolve, evolve_sectorwise, fit_decay_rate, wigner, wigner_series  # noqa: E402
from .models import (  # noqa: E402
    KerrConfig,
    LaserConfig,
    PRESETS,
    auto_cutoff,
    build,
    kerr_model,
    laser_model,
    preset,
    suggest_cutoff,
)
