#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "stickbreak/distributions.hpp"
#include "stickbreak/label_moves.hpp"
#include "stickbreak/rng.hpp"
#include "stickbreak/stick_prior.hpp"

namespace stickbreak {

/// A single infinite mixture mid-sample: data, per-datum labels, and
/// per-cluster sufficient statistics.
///
/// Labels are 1-based; z[n] == 0 means datum n is currently unassigned.
/// `stats` holds only occupied labels, and labels of emptied clusters are
/// retired rather than compacted (relabeling would change P(Z)).  k_max is
/// the highest occupied label.
struct MixtureState {
  Eigen::MatrixXd data;
  std::vector<int> z;
  std::map<int, ClusterStats> stats;
  int k_max = 0;
  // Exact add/remove drifts over ~1e6 updates; a periodic rebuild bounds it.
  long recompute_period = 1000;
  long updates_since_recompute = 0;

  int size() const { return static_cast<int>(data.rows()); }
  int dim() const { return static_cast<int>(data.cols()); }
};

enum class InitMode { all_one, per_datum, random_sqrt };

struct ChainConfig {
  long sweeps = 1000;
  long burn_in = 100;
  long thin = 1;
  std::uint64_t seed = 0;
  InitMode init = InitMode::all_one;
  long recompute_every = 1000;
  MoveSchedule moves;

  void validate() const;
};

/// Per-sweep tallies of fired and accepted label moves.
struct SweepCounters {
  long swap_proposed = 0;
  long swap_accepted = 0;
  long permute_proposed = 0;
  long permute_accepted = 0;
};

struct ChainRecord {
  std::vector<std::vector<int>> samples;  // thinned post-burn-in label vectors
  std::vector<long> sample_iters;         // 1-based sweep of each sample
  std::vector<double> log_joint;          // one entry per sweep
  std::vector<int> k_count;               // occupied clusters per sweep
  std::vector<SweepCounters> moves;       // one entry per sweep
};

MixtureState make_state(Eigen::MatrixXd data);

/// Assign every datum per `mode` (everything in cluster 1; one label per
/// datum; or uniform among the first ceil(sqrt(N)) labels), clamped to the
/// prior's support.
void init_assignments(MixtureState& state, InitMode mode,
                      const StickPrior& prior, Rng& rng);

void stats_add(MixtureState& state, int n, int label);
void stats_remove(MixtureState& state, int n);

/// Rebuild stats and k_max from (data, z); resets the drift counter.
void recompute_stats(MixtureState& state);

/// Occupancy of labels 1..k_max (zeros for retired labels).
std::vector<long> occupancy_counts(const MixtureState& state);

/// Conditional assignment distribution of datum n over labels 1..k_max plus
/// one lumped entry for the infinite tail.  Datum n must currently be
/// unassigned (the counts are the leave-one-out view).
std::vector<double> conditional_assignment_probs(const MixtureState& state,
                                                 int n,
                                                 const StickPrior& prior,
                                                 const NormalWishartPrior& nw);

/// Exchange labels i and j across assignments and stats.
void apply_swap(MixtureState& state, int i, int j);

/// Relabel through a permute proposal's sigma.
void apply_permutation(MixtureState& state, const MoveProposal& proposal);

/// One full pass: resample every datum in index order, firing label moves
/// after each assignment draw per the schedule.
void gibbs_sweep(MixtureState& state, const StickPrior& prior,
                 const NormalWishartPrior& nw, const MoveSchedule& schedule,
                 Rng& rng, SweepCounters* counters = nullptr);

/// log P(X, Z): label-marginal log P(Z) plus per-cluster Gaussian evidence.
double log_joint(const MixtureState& state, const StickPrior& prior,
                 const NormalWishartPrior& nw);

ChainRecord run_chain(const Eigen::MatrixXd& data, const StickPrior& prior,
                      const NormalWishartPrior& nw, const ChainConfig& config);

}  // namespace stickbreak
