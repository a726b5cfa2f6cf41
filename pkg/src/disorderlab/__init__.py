"""disorderlab: random Schrödinger operators with island and wavelet
projection potentials — geometry, commutator thresholds, finite-volume
spectral diagnostics, free evolution and Meyer wavelet machinery."""

__version__ = "0.1.0"

from .errors import (ConfigError, DisorderLabError, PreconditionError,
                     ResourceError, SolverError)
from .geometry import (CompactDistribution, DisorderRealization,
                       IslandSet, Violation, build_dyadic_islands,
                       build_example1_islands, greedy_pack_islands,
                       island_density, sample_disorder, validate_island_set)
from .potential import (BumpProfile, E0Result, IslandPotential, compute_E0,
                        eval_commutator_field, eval_double_commutator_field,
                        eval_potential)
from .grid import (DiscreteHamiltonian, GridSpec, apply_dilation_generator,
                   assemble_hamiltonian, boundary_weight, commutator_residual)
from .spectra import (EigenPair, SpectralReport, decay_fit, ids_histogram,
                      ipr, mourre_gap, solve_window, spacing_ratio_stats,
                      virial_residual)
from .evolution import (BandLimitedTestFunction, cook_integrand, decay_slope,
                        evolve_free, geometric_times, grid_norm,
                        make_test_function)
from .meyer import (CookResult, MeyerPair, WaveletFamily, WaveletIndex,
                    admissible_scales, apply_projection_potential, cook_sum,
                    gram_matrix, meyer_scaling_hat, meyer_wavelet_hat,
                    overlap, phi_n_hat, psi_c_hat, smooth_ramp)
