#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "stickbreak/distributions.hpp"
#include "stickbreak/mixture_gibbs.hpp"
#include "stickbreak/rng.hpp"
#include "stickbreak/stick_prior.hpp"

namespace stickbreak {

/// Cross-slice coupling of a cluster's mean trajectory: off-diagonal entries
/// a * exp(-beta * |t - t'|^delta), diagonal b, shared across dimensions.
/// m is the common location (typically the pooled sample mean of the data).
struct CouplingKernel {
  double a = 1.0;
  double beta = 0.005;
  double delta = 1.0;
  double b = 1.0;
  int slices = 1;
  Eigen::VectorXd m;

  int dim() const { return static_cast<int>(m.size()); }
  void validate() const;
};

/// T x T mean-trajectory covariance.  Throws std::domain_error with the
/// offending eigenvalues when the kernel parameters make it non-SPD.
Eigen::MatrixXd coupling_matrix(const CouplingKernel& kernel);

/// Kernel with its matrix and per-slice leave-one-out conditionals
/// precomputed: conditioning slice t on the others has variance cond_var[t]
/// and mean m + cond_weights[t] . (others - m), identically per dimension.
struct CouplingCache {
  CouplingKernel kernel;
  Eigen::MatrixXd gamma;
  std::vector<Eigen::VectorXd> cond_weights;
  std::vector<double> cond_var;
};

CouplingCache make_coupling_cache(const CouplingKernel& kernel);

struct InverseWishartPrior {
  Eigen::MatrixXd scale;
  double dof = 0.0;

  void validate() const;
};

/// Coupled mixtures over time slices with explicit per-(label, slice)
/// Gaussian parameters.
///
/// k_max is the largest label occupied in any slice; theta[i-1][t] exists for
/// every label i <= k_max at every slice, occupied there or not.  Labels past
/// k_max are a lumped tail whose parameters are integrated out by Monte Carlo
/// (mc_atoms), so emptied top labels lose their theta.
struct DdpState {
  std::vector<Eigen::MatrixXd> data;           // per slice, N_t x d
  std::vector<std::vector<int>> z;             // per slice, 0 = unassigned
  std::vector<std::vector<long>> counts;       // counts[t][i-1], size k_max
  std::vector<long> total_counts;              // across slices, size k_max
  int k_max = 0;
  std::vector<std::vector<GaussianParams>> theta;  // theta[i-1][t]
  std::vector<GaussianParams> mc_atoms;
  std::vector<std::vector<double>> tail_logpred;   // cached per datum

  int slices() const { return static_cast<int>(data.size()); }
  int dim() const { return data.empty() ? 0 : static_cast<int>(data[0].cols()); }
};

DdpState make_ddp_state(std::vector<Eigen::MatrixXd> slices);

/// Prior parameter draws used to integrate the tail predictive: means from
/// N(m, b I), covariances from the inverse-Wishart prior.
std::vector<GaussianParams> make_mc_atoms(const CouplingKernel& kernel,
                                          const InverseWishartPrior& iw,
                                          int count, Rng& rng);

/// log (1/S) sum_s N(x; atom_s), via log-sum-exp.
double mc_new_cluster_predictive(const Eigen::VectorXd& x,
                                 const std::vector<GaussianParams>& atoms);

/// Same estimate plus its relative Monte Carlo standard error.
std::pair<double, double> mc_new_cluster_predictive_with_se(
    const Eigen::VectorXd& x, const std::vector<GaussianParams>& atoms);

/// Fill tail_logpred for every datum from the state's mc_atoms.
void precompute_tail_predictive(DdpState& state);

/// Instantiate labels k_max+1..label with prior-drawn parameters: mean
/// trajectories from the coupling prior, covariances from the
/// inverse-Wishart prior.
void ddp_grow_to(DdpState& state, int label, const CouplingCache& cache,
                 const InverseWishartPrior& iw, Rng& rng);

/// Drop unoccupied labels above the highest occupied one (with their theta).
void ddp_shrink(DdpState& state);

void ddp_add(DdpState& state, int t, int n, int label);
void ddp_remove(DdpState& state, int t, int n);

/// Assignment distribution of datum (t, n) over labels 1..k_max plus the
/// lumped tail, given explicit parameters.  Datum must be removed; stick
/// weights use slice-t counts only, tail uses the Monte Carlo predictive.
std::vector<double> ddp_assignment_probs(const DdpState& state, int t, int n,
                                         const StickPrior& prior);

/// Gibbs-resample the mean trajectory of one label, slice by slice, from
/// coupling-prior conditional times slice likelihood at known covariance.
void sample_means(DdpState& state, int label, const CouplingCache& cache,
                  Rng& rng);

/// Conjugate inverse-Wishart draw of one label's covariance at one slice.
void sample_covariances(DdpState& state, int label, int t,
                        const InverseWishartPrior& iw, Rng& rng);

enum class SwapStrategy { single_slice, uniform_interval, full_range };

struct IntervalProposal {
  int i = 0;
  int j = 0;
  int t1 = 1;  // 1-based, inclusive
  int t2 = 1;
};

/// Pick two distinct labels as in propose_swap and a slice interval per the
/// strategy (one slice; uniform over ordered pairs; or the whole range).
IntervalProposal propose_interval_swap(SwapStrategy strategy,
                                       const StickPrior& prior, int k_max,
                                       int t_slices, Rng& rng);

/// Log acceptance of exchanging labels i and j together with their
/// parameters inside [t1, t2]: per-slice label-probability terms plus
/// mean-trajectory prior terms (data likelihood and covariance priors
/// cancel).  Both labels must have theta defined (grow first).
double interval_swap_log_accept(const DdpState& state,
                                const IntervalProposal& proposal,
                                const StickPrior& prior,
                                const CouplingCache& cache);

/// Exchange assignments, counts, and theta of labels i and j in [t1, t2].
void apply_interval_swap(DdpState& state, const IntervalProposal& proposal);

/// Full log joint: per-slice label probability and data likelihood, plus
/// mean-trajectory and covariance priors of every instantiated label.
double ddp_log_joint(const DdpState& state, const StickPrior& prior,
                     const CouplingCache& cache,
                     const InverseWishartPrior& iw);

struct DdpConfig {
  long sweeps = 100;
  long burn_in = 50;
  long thin = 1;
  std::uint64_t seed = 0;
  InitMode init = InitMode::random_sqrt;
  double p_swap = 1.0;  // per strategy per iteration
  int mc_atom_count = 10000;

  void validate() const;
};

struct DdpSweepCounters {
  long proposed[3] = {0, 0, 0};  // indexed by SwapStrategy
  long accepted[3] = {0, 0, 0};
};

struct DdpRecord {
  std::vector<std::vector<std::vector<int>>> samples;  // [sample][slice][n]
  std::vector<long> sample_iters;
  std::vector<std::vector<std::vector<GaussianParams>>> theta_samples;
  std::vector<double> log_joint;  // one entry per iteration
  std::vector<int> k_count;       // occupied labels per iteration
  std::vector<DdpSweepCounters> moves;
};

DdpRecord run_ddp_chain(const std::vector<Eigen::MatrixXd>& slices,
                        const StickPrior& prior, const CouplingKernel& kernel,
                        const InverseWishartPrior& iw, const DdpConfig& config);

}  // namespace stickbreak
