"""Few-photon linear-optics simulator: Fock states, splitters, Y junctions, g2."""

from .circuit import Circuit, apply_circuit, apply_element, compose_transfer
from .elements import (
    LinearElement,
    balanced_beam_splitter,
    beam_splitter,
    phase_shifter,
    polarizer,
    polarizing_beam_splitter,
    validate,
    y_junction,
)
from .fock import (
    FockDistribution,
    ModeId,
    Monomial,
    OperatorState,
    Polarization,
    fock_norm,
    mode,
    normalize,
    state_from_photons,
    to_fock,
)
from .observables import (
    DetectorSpec,
    coincidence_probability,
    cross_g2,
    distinguishable_joint,
    forward_two_photon_probability,
    mean_photon,
    single_mode_g2,
)
from .oracle import oracle_amplitude, oracle_distribution, permanent

__version__ = "0.1.0"
