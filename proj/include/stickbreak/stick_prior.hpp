#pragma once

#include <utility>
#include <vector>

namespace stickbreak {

/// Stick-breaking prior over cluster labels.
///
/// A prior is a sequence of Beta parameters (a_i, b_i), one per label
/// i = 1, 2, ...; stick i keeps fraction V_i ~ Beta(a_i, b_i) of the mass
/// remaining after sticks 1..i-1.  Families:
///
///   dp(alpha)                 a_i = 1, b_i = alpha
///   pitman_yor(a, b)          a_i = 1 - a, b_i = b + i * a
///   geometric(gamma, r)       gamma_i = gamma * (1 - r) * r^(i-1)
///   constant_beta(a, b)       a_i = a, b_i = b for all i
///   truncated_table(g, tail)  gamma_i = g[i-1] for i <= K, lumped tail after
///
/// geometric and truncated_table are "single-parameter" priors: a_i = gamma_i
/// and b_i = sum of gamma_j over j > i, with finite total mass gamma.  All
/// families guarantee that a draw uses finitely many labels almost surely
/// (the per-family ratio a_i/b_i decays no faster than 1/i, which is checked
/// analytically, so no runtime series test is needed).
///
/// Immutable after construction; all member queries are pure.
class StickPrior {
 public:
  enum class Family { dp, pitman_yor, geometric, constant_beta, table };

  static StickPrior dp(double alpha);
  static StickPrior pitman_yor(double discount, double strength);
  static StickPrior geometric(double gamma, double ratio);
  static StickPrior constant_beta(double a, double b);
  static StickPrior truncated_table(std::vector<double> weights,
                                    double tail_mass);

  Family family() const { return family_; }

  /// True for families defined by per-label masses gamma_i (geometric, table).
  bool single_param() const;

  /// Beta parameters (a_i, b_i) of stick `label` (1-based).
  /// Throws std::domain_error past the support of a truncated table.
  std::pair<double, double> params_at(int label) const;

  /// gamma_i for single-parameter families; throws std::logic_error otherwise.
  double gamma_at(int label) const;

  /// Total mass gamma for single-parameter families.
  double gamma_total() const;

  /// Highest label with positive prior mass; INT_MAX when unbounded.
  int max_label() const;

 private:
  StickPrior() = default;
  Family family_ = Family::dp;
  double p1_ = 0.0;
  double p2_ = 0.0;
  std::vector<double> table_;       // per-label masses, table family
  std::vector<double> table_tail_;  // table_tail_[i] = mass on labels > i+1
  double tail_mass_ = 0.0;
};

/// Per-label Beta parameters of P(V|Z); entry i-1 holds stick i.
struct PosteriorStickParams {
  std::vector<double> a;
  std::vector<double> b;
};

/// Expected weights for labels 1..K plus the mass on everything beyond.
struct ExpectedWeights {
  std::vector<double> weights;
  double tail_mass = 0.0;
};

/// Posterior stick parameters a_i + N_i and b_i + sum of counts above i.
/// counts[i-1] is the occupancy of label i; result covers labels 1..counts.size().
PosteriorStickParams posterior_params(const StickPrior& prior,
                                      const std::vector<long>& counts);

/// E[pi_i | Z] for i = 1..k, with the remaining mass reported as tail_mass.
/// Counts past k still enter the posterior tail sums.  Weights plus tail sum
/// to 1 up to roundoff.
ExpectedWeights expected_weights(const StickPrior& prior,
                                 const std::vector<long>& counts, int k);

/// Prior probability of each label 1..k for a fresh datum given the other
/// assignments, plus a final lumped entry for all labels > k.  Size k+1.
std::vector<double> assignment_prior_probs(const StickPrior& prior,
                                           const std::vector<long>& counts_excluding,
                                           int k);

/// Resolve a tail selection to a concrete label > k by walking labels in
/// order until the cumulative share of the tail mass exceeds u_residual
/// (uniform in [0,1)).  Counts play no role: labels past k are empty, so
/// their relative weights depend on the prior alone.
/// Throws std::runtime_error if the walk passes `cap` labels.
int select_tail_label(const StickPrior& prior, int k, double u_residual,
                      int cap = 1000000);

/// log P(Z) for the label counts, marginalized over stick lengths.
/// Degenerate sticks (b_i = 0, table boundary) contribute nothing unless
/// counts extend past them, which has probability zero.
double log_pz(const StickPrior& prior, const std::vector<long>& counts);

/// Chinese-restaurant prediction rule for a Dirichlet process: probability
/// of each occupied cluster plus one final new-cluster entry, for the n-th
/// datum given the other n_total - 1.
std::vector<double> dp_crp_probs(double alpha,
                                 const std::vector<long>& counts_excluding,
                                 long n_total);

}  // namespace stickbreak
