#include "stickbreak/stick_prior.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "stickbreak/distributions.hpp"

namespace stickbreak {

StickPrior StickPrior::dp(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("StickPrior: alpha must be > 0");
  StickPrior p;
  p.family_ = Family::dp;
  p.p1_ = alpha;
  return p;
}

StickPrior StickPrior::pitman_yor(double discount, double strength) {
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::domain_error("StickPrior: discount must lie in [0, 1)");
  if (!(strength > -discount))
    throw std::domain_error("StickPrior: strength must exceed -discount");
  StickPrior p;
  p.family_ = Family::pitman_yor;
  p.p1_ = discount;
  p.p2_ = strength;
  return p;
}

StickPrior StickPrior::geometric(double gamma, double ratio) {
  if (!(gamma > 0.0)) throw std::domain_error("StickPrior: gamma must be > 0");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::domain_error("StickPrior: ratio must lie in (0, 1)");
  StickPrior p;
  p.family_ = Family::geometric;
  p.p1_ = gamma;
  p.p2_ = ratio;
  return p;
}

StickPrior StickPrior::constant_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("StickPrior: Beta parameters must be > 0");
  StickPrior p;
  p.family_ = Family::constant_beta;
  p.p1_ = a;
  p.p2_ = b;
  return p;
}

StickPrior StickPrior::truncated_table(std::vector<double> weights,
                                       double tail_mass) {
  if (weights.empty())
    throw std::domain_error("StickPrior: table must be nonempty");
  for (double w : weights)
    if (!(w > 0.0))
      throw std::domain_error("StickPrior: table entries must be > 0");
  if (!(tail_mass >= 0.0))
    throw std::domain_error("StickPrior: tail_mass must be >= 0");
  StickPrior p;
  p.family_ = Family::table;
  p.table_ = std::move(weights);
  p.tail_mass_ = tail_mass;
  p.table_tail_.assign(p.table_.size(), 0.0);
  double running = tail_mass;
  for (int i = static_cast<int>(p.table_.size()) - 1; i >= 0; --i) {
    p.table_tail_[i] = running;
    running += p.table_[i];
  }
  p.p1_ = running;  // total mass
  return p;
}

bool StickPrior::single_param() const {
  return family_ == Family::geometric || family_ == Family::table;
}

std::pair<double, double> StickPrior::params_at(int label) const {
  if (label < 1) throw std::domain_error("StickPrior: labels start at 1");
  switch (family_) {
    case Family::dp:
      return {1.0, p1_};
    case Family::pitman_yor:
      return {1.0 - p1_, p2_ + label * p1_};
    case Family::constant_beta:
      return {p1_, p2_};
    case Family::geometric:
      return {gamma_at(label), p1_ * std::pow(p2_, label)};
    case Family::table: {
      const int k = static_cast<int>(table_.size());
      if (label <= k) return {table_[label - 1], table_tail_[label - 1]};
      if (label == k + 1 && tail_mass_ > 0.0) return {tail_mass_, 0.0};
      throw std::domain_error("StickPrior: label beyond table support");
    }
  }
  throw std::logic_error("StickPrior: unknown family");
}

double StickPrior::gamma_at(int label) const {
  if (label < 1) throw std::domain_error("StickPrior: labels start at 1");
  switch (family_) {
    case Family::geometric:
      return p1_ * (1.0 - p2_) * std::pow(p2_, label - 1);
    case Family::table: {
      const int k = static_cast<int>(table_.size());
      if (label <= k) return table_[label - 1];
      if (label == k + 1 && tail_mass_ > 0.0) return tail_mass_;
      throw std::domain_error("StickPrior: label beyond table support");
    }
    default:
      throw std::logic_error("StickPrior: gamma_at needs a single-parameter family");
  }
}

double StickPrior::gamma_total() const {
  switch (family_) {
    case Family::geometric:
      return p1_;
    case Family::table:
      return p1_;
    default:
      throw std::logic_error(
          "StickPrior: gamma_total needs a single-parameter family");
  }
}

int StickPrior::max_label() const {
  if (family_ != Family::table) return std::numeric_limits<int>::max();
  const int k = static_cast<int>(table_.size());
  return tail_mass_ > 0.0 ? k + 1 : k;
}

PosteriorStickParams posterior_params(const StickPrior& prior,
                                      const std::vector<long>& counts) {
  const int k = static_cast<int>(counts.size());
  PosteriorStickParams out;
  out.a.resize(k);
  out.b.resize(k);
  long above = std::accumulate(counts.begin(), counts.end(), 0L);
  for (int i = 0; i < k; ++i) {
    if (counts[i] < 0)
      throw std::domain_error("posterior_params: counts must be nonnegative");
    above -= counts[i];
    const auto [a, b] = prior.params_at(i + 1);
    out.a[i] = a + static_cast<double>(counts[i]);
    out.b[i] = b + static_cast<double>(above);
  }
  return out;
}

ExpectedWeights expected_weights(const StickPrior& prior,
                                 const std::vector<long>& counts, int k) {
  if (k < 0) throw std::domain_error("expected_weights: k must be >= 0");
  ExpectedWeights out;
  out.weights.resize(k);
  long above = std::accumulate(counts.begin(), counts.end(), 0L);
  double remaining = 1.0;
  for (int i = 0; i < k; ++i) {
    const long n_i = i < static_cast<int>(counts.size()) ? counts[i] : 0;
    above -= n_i;
    const auto [a, b] = prior.params_at(i + 1);
    const double as = a + static_cast<double>(n_i);
    const double bs = b + static_cast<double>(above);
    out.weights[i] = remaining * as / (as + bs);
    remaining *= bs / (as + bs);
  }
  out.tail_mass = remaining;
  return out;
}

std::vector<double> assignment_prior_probs(
    const StickPrior& prior, const std::vector<long>& counts_excluding,
    int k) {
  ExpectedWeights ew = expected_weights(prior, counts_excluding, k);
  std::vector<double> probs = std::move(ew.weights);
  probs.push_back(ew.tail_mass);
  return probs;
}

int select_tail_label(const StickPrior& prior, int k, double u_residual,
                      int cap) {
  if (!(u_residual >= 0.0 && u_residual < 1.0))
    throw std::domain_error("select_tail_label: u_residual must be in [0, 1)");
  // Walk shares of the tail: labels past k are empty, so stick i keeps
  // fraction a_i/(a_i+b_i) of whatever tail mass is left before it.
  const int last = prior.max_label();
  double remaining = 1.0;
  double cum = 0.0;
  for (int i = k + 1; i <= last; ++i) {
    if (i - k > cap)
      throw std::runtime_error("select_tail_label: walk exceeded label cap");
    const auto [a, b] = prior.params_at(i);
    cum += remaining * a / (a + b);
    if (u_residual < cum || i == last) return i;
    remaining *= b / (a + b);
  }
  // Unbounded family whose cumulative share never reached u_residual within
  // floating-point resolution; treat like the cap.
  throw std::runtime_error("select_tail_label: walk exceeded label cap");
}

double log_pz(const StickPrior& prior, const std::vector<long>& counts) {
  double lp = 0.0;
  long above = std::accumulate(counts.begin(), counts.end(), 0L);
  for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
    if (counts[i] < 0)
      throw std::domain_error("log_pz: counts must be nonnegative");
    above -= counts[i];
    const auto [a, b] = prior.params_at(i + 1);
    if (b == 0.0) {
      // V_i = 1 almost surely: no mass can sit above this label.
      if (above > 0) return -std::numeric_limits<double>::infinity();
      continue;
    }
    lp += log_beta_fn(a + static_cast<double>(counts[i]),
                      b + static_cast<double>(above)) -
          log_beta_fn(a, b);
  }
  return lp;
}

std::vector<double> dp_crp_probs(double alpha,
                                 const std::vector<long>& counts_excluding,
                                 long n_total) {
  if (!(alpha > 0.0)) throw std::domain_error("dp_crp_probs: alpha must be > 0");
  const double denom = alpha + static_cast<double>(n_total) - 1.0;
  std::vector<double> probs;
  probs.reserve(counts_excluding.size() + 1);
  for (long c : counts_excluding)
    probs.push_back(static_cast<double>(c) / denom);
  probs.push_back(alpha / denom);
  return probs;
}

}  // namespace stickbreak
