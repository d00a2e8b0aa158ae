"""Hard-core boson quench toolkit: exact Gaussian dynamics, generalized and
conventional Gibbs ensembles, Gaussian-state-preparation circuits, compressed
matchgate Trotter circuits, and a dense statevector simulator."""

__version__ = "0.1.0"

from .circuits import Circuit, Gate, givens_gate, matchgate, x_gate
from .compiler import (auto_compressed_trotter, circuit_unitary, compress,
                       compressed_trotter, fuse, trotter_circuit, turnover)
from .ensembles import (GESpec, GGESpec, ensemble_density_matrix,
                        ensemble_momentum_distribution, ge_fit, gge_from_initial,
                        mode_occupations, single_particle_modes)
from .gaussian import (NaturalOrbitals, SlaterState, centered_block_sites, evolve,
                       fermion_correlations, fock_state, ground_state, hcb_density_matrix,
                       hcb_green, lno_match, momentum_distribution, natural_orbitals)
from .model import (HamiltonianSpec, HoppingMatrix, SuperlatticePotential,
                    build_hopping_matrix, dispersion, momentum_grid, potential_diagonal,
                    superlattice_modes)
from .simulator import (apply_circuit, exact_hcb_reference, expectation,
                        fermion_correlations_from_statevector, init_bitstring,
                        measure_density_matrix, measurement_group_count)
from .stateprep import (GivensRotation, PrepPlan, givens_sequence, plan_to_circuit,
                        prepare_slater_circuit)
