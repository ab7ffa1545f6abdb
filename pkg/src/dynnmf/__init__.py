"""Penalized non-negative matrix factorization for static and dynamic networks."""
from .community import (UNASSIGNED, ConvergenceError, EdgeShares, Membership, Rank1Report,
                        agreement_rate, edge_decomposition, edge_share_matrix, hub_authority,
                        membership_from_edges, membership_from_U, normalize_for_display,
                        rank1_equivalence_check)
from .dynamic import fit_dynamic_nmf, objective_dynamic, smoothness_profile, temporal_term
from .factors import (DegenerateSolutionWarning, FactorPair, FactorSequence, FitConfig,
                      FitReport, NumericalError, WindowSpec)
from .graph import (EdgeListError, GraphSequence, GraphSnapshot, aggregate_cumulative,
                    load_edge_list, log_transform, write_edge_list)
from .kernels import BACKEND
from .selection import CvReport, HoldoutPlan, cv_fold_error, cv_rank_selection, make_holdout
from .static import fit_classical_nmf, fit_sparse_nmf, objective_static
from .synthetic import (PaGrowthConfig, PlantedConfig, fit_power_law_exponent,
                        gen_planted_communities, gen_preferential_attachment, gen_ring, gen_star)

__all__ = [name for name in dir() if not name.startswith("_")]
