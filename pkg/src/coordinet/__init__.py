"""coordinet: rate bounds and exact small-block protocol simulation for
coordinating two nodes through a relay."""

from .pmf import (Alphabet, AlphabetMismatch, ConditionalPmf, JointPmf,
                  NegativeMass, NotNormalized, PmfError, StateSpaceTooLarge,
                  UndefinedConditional, UnknownVariable, condition, iid_extend,
                  make_joint, marginal, read_pmf, sample, total_variation,
                  write_pmf)
from .information import (InfoQuery, OptimizerFailed, WynerConfig, WynerSolution,
                          conditional_entropy, entropy, markov_slack,
                          mutual_information, wyner_common_information)
from .region import (FrontierPoint, InnerCoupling, OuterCoupling, RateTuple,
                     RegionDecision, SearchConfig, canonical_couplings, frontier,
                     inner_check, inner_membership, inner_rhs, outer_membership,
                     outer_slack)
from .fme import (EquivalenceReport, LinearSystem, binning_constraint_system,
                  fme_eliminate, projection_matches_rate_system, remove_redundant,
                  systems_equivalent, theorem_rate_system)
from .osrb import (NO_CANDIDATE, BinningCode, InducedLaw, ProtocolConfig,
                   SequenceSpace, bins_from_rate, make_binning, osrb_uniformity,
                   run_protocol, sw_decode, sw_success_prob, sweep)

__version__ = "0.1.0"
