#include "stickbreak/label_moves.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stickbreak {

namespace {

// Index into `weights` of the entry containing cumulative position u,
// u uniform in [0, 1) over the normalized weights.
int pick_weighted(const std::vector<double>& weights, double total, double u) {
  double cum = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    cum += weights[i] / total;
    if (u < cum) return i;
  }
  return n - 1;
}

std::vector<long> padded_counts(const std::vector<long>& counts, int upto) {
  std::vector<long> c(counts);
  if (static_cast<int>(c.size()) < upto) c.resize(upto, 0);
  return c;
}

// One label with probability gamma_i / gamma over the prior's whole support.
int pick_by_gamma(const StickPrior& prior, Rng& rng) {
  if (prior.family() == StickPrior::Family::geometric) {
    // Inversion: P(label > i) = r^i.
    const auto [unused, gamma_r] = prior.params_at(1);
    const double r = gamma_r / prior.gamma_total();
    const double u = rng.uniform();
    const double steps = std::log1p(-u) / std::log(r);
    if (steps >= 1e8)
      throw std::runtime_error("propose_swap: label draw out of range");
    return 1 + static_cast<int>(steps);
  }
  const double u = rng.uniform() * prior.gamma_total();
  double cum = 0.0;
  const int last = prior.max_label();
  for (int i = 1; i <= last; ++i) {
    cum += prior.gamma_at(i);
    if (u < cum || i == last) return i;
  }
  return last;
}

}  // namespace

int move_support(const StickPrior& prior, int k_max) {
  const int last = prior.max_label();
  return k_max + 1 < last ? k_max + 1 : last;
}

std::vector<double> move_proposal_weights(const StickPrior& prior, int k_max) {
  const int support = move_support(prior, k_max);
  std::vector<double> w = expected_weights(prior, {}, support).weights;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

MoveProposal propose_swap(const StickPrior& prior, int k_max, Rng& rng) {
  if (prior.max_label() < 2)
    throw std::logic_error("propose_swap: need at least two labels");
  MoveProposal p;
  p.kind = MoveProposal::Kind::swap;
  if (prior.single_param()) {
    p.i = pick_by_gamma(prior, rng);
    do {
      p.j = pick_by_gamma(prior, rng);
    } while (p.j == p.i);
    return p;
  }
  std::vector<double> w = move_proposal_weights(prior, k_max);
  if (w.size() < 2)
    throw std::logic_error("propose_swap: need at least two labels");
  p.i = 1 + pick_weighted(w, 1.0, rng.uniform());
  const double rest = 1.0 - w[p.i - 1];
  w[p.i - 1] = 0.0;
  p.j = 1 + pick_weighted(w, rest, rng.uniform());
  return p;
}

double swap_log_ratio(const StickPrior& prior, const std::vector<long>& counts,
                      int i, int j) {
  if (i == j) throw std::domain_error("swap_log_ratio: labels must differ");
  const int hi = std::max(i, j);
  const long n_i = i <= static_cast<int>(counts.size()) ? counts[i - 1] : 0;
  const long n_j = j <= static_cast<int>(counts.size()) ? counts[j - 1] : 0;

  double lr = 0.0;
  if (prior.single_param()) {
    const double gi = prior.gamma_at(i);
    const double gj = prior.gamma_at(j);
    for (long n = 0; n < n_j; ++n) lr += std::log(gi + n) - std::log(gj + n);
    for (long n = 0; n < n_i; ++n) lr += std::log(gj + n) - std::log(gi + n);
  } else {
    std::vector<long> before = padded_counts(counts, hi);
    std::vector<long> after = before;
    std::swap(after[i - 1], after[j - 1]);
    lr = log_pz(prior, after) - log_pz(prior, before);
  }
  return lr;
}

double swap_log_accept(const StickPrior& prior, const std::vector<long>& counts,
                       int i, int j) {
  return std::min(0.0, swap_log_ratio(prior, counts, i, j));
}

MoveProposal propose_permute(const StickPrior& prior, int k_max, Rng& rng) {
  const std::vector<double> w = move_proposal_weights(prior, k_max);
  MoveProposal p;
  p.kind = MoveProposal::Kind::permute;
  p.cutoff = 1 + pick_weighted(w, 1.0, rng.uniform());
  p.sigma.resize(p.cutoff);
  std::iota(p.sigma.begin(), p.sigma.end(), 1);
  for (int idx = p.cutoff - 1; idx > 0; --idx) {
    const int other = static_cast<int>(rng.below(idx + 1));
    std::swap(p.sigma[idx], p.sigma[other]);
  }
  return p;
}

double permute_log_accept(const StickPrior& prior,
                          const std::vector<long>& counts,
                          const MoveProposal& proposal) {
  const int k = proposal.cutoff;
  if (k < 1 || static_cast<int>(proposal.sigma.size()) != k)
    throw std::domain_error("permute_log_accept: malformed proposal");
  std::vector<bool> seen(k, false);
  for (int image : proposal.sigma) {
    if (image < 1 || image > k || seen[image - 1])
      throw std::domain_error("permute_log_accept: sigma is not a bijection");
    seen[image - 1] = true;
  }
  std::vector<long> before = padded_counts(counts, k);
  std::vector<long> after = before;
  for (int l = 1; l <= k; ++l) after[proposal.sigma[l - 1] - 1] = before[l - 1];
  return std::min(0.0, log_pz(prior, after) - log_pz(prior, before));
}

}  // namespace stickbreak
