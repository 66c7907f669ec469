"""Second-order SUSY partner potentials and bilayer graphene electrons in
inhomogeneous magnetic fields."""

from .bilayer import (PartnerProfile, SpinorState, WavenumberRelation,
                      degeneracy_census, electron_energy, k_to_kappa,
                      kappa_to_k, level_records, partner_profile,
                      physical_branch, spinor_state, standard_ordering,
                      vector_potential)
from .errors import (ClosedFormUnavailable, ConvergenceFailure, DomainError,
                     InvalidArgument, NoBranch, NoSuchLevel, ParameterPole,
                     RelationInconsistent, SingularPoint, SusyError,
                     TransformSingular)
from .numerics import (Grid, SampledFunction, differentiate, fd_spectrum,
                       integrate, make_grid, wronskian)
from .observables import (DensityProfile, continuity_residual,
                          current_density, density_profile,
                          probability_density)
from .potentials import (HypRosenMorse, ShiftedOscillator, TrigRosenMorse,
                         bound_state_count, eigenfunction0, eigenvalue0,
                         make_model, normalization0, potential_value)
from .special import (gamma_family, gauss_2f1, incomplete_beta, orthopoly,
                      pochhammer)
from .susy import (apply_L2, eta_confluent, eta_consecutive, extra_term_f,
                   gamma_coefficient, make_transform, reconstruct_v0_from_eta,
                   w_closed_form)

__version__ = "0.1.0"
