"""WNG-constrained adaptive diagonal loading for MPDR and GSC beamformers."""
from .beamform import (BeamformerWeights, BlockingMatrix, blocking_matrix, cox_scaled_weights,
                       gsc_weights, loaded, mpdr_weights, omniscient_capon, quiescent_weights, wng)
from .loading import (InfeasibleConstraintError, LoadingDecision, LoadingMode, WngConstraint,
                      bounds_evd, bounds_gershgorin, bounds_trace, compute_loading,
                      kappa_max_from_wng, required_loading)
from .numerics import (EigenDecomposition, EvdConvergenceError, NotPositiveDefiniteError,
                       SpectralBounds, cholesky_solve, hermitian_evd, rank_one_update, trace)
from .scm import GscTracker, ScmTracker, assemble_partitioned

__version__ = "0.1.0"
