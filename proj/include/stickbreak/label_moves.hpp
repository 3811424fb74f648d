#pragma once

#include <vector>

#include "stickbreak/rng.hpp"
#include "stickbreak/stick_prior.hpp"

namespace stickbreak {

/// Per-assignment-draw firing probabilities of the two label moves.
struct MoveSchedule {
  double p_swap = 0.1;
  double p_permute = 0.1;
};

/// A label-mixing proposal: either exchange two labels or permute the labels
/// up to a cutoff.  For permute, sigma[l-1] is the image of label l and is a
/// bijection on 1..cutoff.
struct MoveProposal {
  enum class Kind { swap, permute };
  Kind kind = Kind::swap;
  int i = 0;
  int j = 0;
  int cutoff = 0;
  std::vector<int> sigma;
};

/// Number of labels the truncated proposal may touch: k_max + 1 so one empty
/// label can enter, clamped to the prior's support.
int move_support(const StickPrior& prior, int k_max);

/// Truncated proposal weights over labels 1..move_support(): prior-mean stick
/// weights with no data, renormalized.  Equals gamma_i / gamma restricted to
/// the support for single-parameter families.
std::vector<double> move_proposal_weights(const StickPrior& prior, int k_max);

/// Draw an unordered pair of distinct labels, each marginally proportional to
/// its prior weight, without replacement.  Single-parameter families draw
/// from gamma_i / gamma over their whole label set, which makes the proposal
/// independent of the state; other families fall back to the truncated
/// weights.  Requires at least two labels of support.
MoveProposal propose_swap(const StickPrior& prior, int k_max, Rng& rng);

/// log P(Z_swapped) - log P(Z) for exchanging labels i and j, unclamped.
/// Single-parameter priors use the closed-form ratio of rising factorials in
/// gamma_i and gamma_j; general priors take the log_pz difference.  Labels
/// past counts.size() hold zero data.
double swap_log_ratio(const StickPrior& prior, const std::vector<long>& counts,
                      int i, int j);

/// Log acceptance probability: min(0, swap_log_ratio(...)).
double swap_log_accept(const StickPrior& prior, const std::vector<long>& counts,
                       int i, int j);

/// Draw a cutoff proportional to the proposal weights and a uniformly random
/// permutation of the labels up to it.
MoveProposal propose_permute(const StickPrior& prior, int k_max, Rng& rng);

/// Log acceptance probability of relabeling counts through proposal.sigma.
double permute_log_accept(const StickPrior& prior,
                          const std::vector<long>& counts,
                          const MoveProposal& proposal);

}  // namespace stickbreak
