"""Sharp Chernoff-type Bayes-error bounds for product-Bernoulli tests and
minimax community detection in stochastic block models."""

from ._backend import active_backend
from .affinity import (GroupedAffinity, affinity_bruteforce, affinity_grouped,
                       bayes_error, binomial_log_pmf, tv_distance)
from .chernoff import (BoundReport, McAffinity, alpha_divergence,
                       bernoulli_log_partition, c1_span, chernoff_information,
                       expected_log_likelihood_ratio, expfam_alpha_divergence,
                       gaussian_g_expectation, log_shannon_lower_bound,
                       shannon_lower_bound, sigma_bar, theorem1_bounds,
                       tilted_mc_affinity, tilted_probability)
from .detect import (DetectionTrace, detect_communities, estimate_p,
                     lr_classify, match_labels, mis, spectral_cluster)
from .dists import (GroupedPair, HypothesisPair, NaturalParams, expand,
                    from_natural, group, pair_from_csv, to_natural,
                    validate_pair)
from .errors import (AlphaOutOfRange, ChernoffSbmError, ConvergenceFailure,
                     DegeneratePair, DegenerateSplit, GridTooLarge,
                     IndistinguishableCommunities, LengthMismatch, OutOfRange,
                     TooLarge)
from .sbm import (EtaStar, MinimaxRate, PairwiseChernoff, SbmModel,
                  SpaceReport, binomial_chernoff, eta_star, minimax_rate,
                  pairwise_chernoff, read_adjacency, read_labels,
                  row_parameters, sample_adjacency, validate_space,
                  write_adjacency, write_labels)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
