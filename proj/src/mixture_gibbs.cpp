#include "stickbreak/mixture_gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stickbreak {

namespace {

int support_cap(const StickPrior& prior, int n) {
  return n < prior.max_label() ? n : prior.max_label();
}

void maybe_fire_moves(MixtureState& state, const StickPrior& prior,
                      const MoveSchedule& schedule, Rng& rng,
                      SweepCounters* counters) {
  const bool swappable = prior.single_param()
                             ? prior.max_label() >= 2
                             : move_support(prior, state.k_max) >= 2;
  if (schedule.p_swap > 0.0 && rng.uniform() < schedule.p_swap && swappable) {
    const MoveProposal p = propose_swap(prior, state.k_max, rng);
    if (counters) ++counters->swap_proposed;
    const double la = swap_log_accept(prior, occupancy_counts(state), p.i, p.j);
    if (la >= 0.0 || std::log(rng.uniform_pos()) < la) {
      apply_swap(state, p.i, p.j);
      if (counters) ++counters->swap_accepted;
    }
  }
  if (schedule.p_permute > 0.0 && rng.uniform() < schedule.p_permute) {
    const MoveProposal p = propose_permute(prior, state.k_max, rng);
    if (counters) ++counters->permute_proposed;
    const double la = permute_log_accept(prior, occupancy_counts(state), p);
    if (la >= 0.0 || std::log(rng.uniform_pos()) < la) {
      apply_permutation(state, p);
      if (counters) ++counters->permute_accepted;
    }
  }
}

}  // namespace

void ChainConfig::validate() const {
  if (sweeps < 1) throw std::domain_error("ChainConfig: sweeps must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps)
    throw std::domain_error("ChainConfig: need 0 <= burn_in < sweeps");
  if (thin < 1) throw std::domain_error("ChainConfig: thin must be >= 1");
  if (recompute_every < 1)
    throw std::domain_error("ChainConfig: recompute_every must be >= 1");
  if (moves.p_swap < 0.0 || moves.p_swap > 1.0 || moves.p_permute < 0.0 ||
      moves.p_permute > 1.0)
    throw std::domain_error("ChainConfig: move probabilities must be in [0,1]");
}

MixtureState make_state(Eigen::MatrixXd data) {
  MixtureState s;
  s.data = std::move(data);
  s.z.assign(s.size(), 0);
  return s;
}

void init_assignments(MixtureState& state, InitMode mode,
                      const StickPrior& prior, Rng& rng) {
  const int n = state.size();
  for (int i = 0; i < n; ++i) {
    if (state.z[i] != 0) stats_remove(state, i);
  }
  const int last = prior.max_label();
  for (int i = 0; i < n; ++i) {
    int label = 1;
    switch (mode) {
      case InitMode::all_one:
        label = 1;
        break;
      case InitMode::per_datum:
        label = support_cap(prior, i + 1);
        break;
      case InitMode::random_sqrt: {
        const int hi =
            support_cap(prior, static_cast<int>(std::ceil(std::sqrt(n))));
        label = 1 + static_cast<int>(rng.below(hi));
        break;
      }
    }
    stats_add(state, i, std::min(label, last));
  }
}

void stats_add(MixtureState& state, int n, int label) {
  if (n < 0 || n >= state.size())
    throw std::logic_error("stats_add: datum index out of range");
  if (label < 1) throw std::logic_error("stats_add: labels start at 1");
  if (state.z[n] != 0) throw std::logic_error("stats_add: datum already assigned");
  auto [it, inserted] = state.stats.try_emplace(label, state.dim());
  it->second.add(state.data.row(n).transpose());
  state.z[n] = label;
  state.k_max = std::max(state.k_max, label);
  ++state.updates_since_recompute;
}

void stats_remove(MixtureState& state, int n) {
  if (n < 0 || n >= state.size())
    throw std::logic_error("stats_remove: datum index out of range");
  const int label = state.z[n];
  if (label == 0) throw std::logic_error("stats_remove: datum not assigned");
  auto it = state.stats.find(label);
  if (it == state.stats.end())
    throw std::logic_error("stats_remove: stats missing for occupied label");
  it->second.remove(state.data.row(n).transpose());
  if (it->second.count == 0) {
    state.stats.erase(it);
    if (label == state.k_max)
      state.k_max = state.stats.empty() ? 0 : state.stats.rbegin()->first;
  }
  state.z[n] = 0;
  ++state.updates_since_recompute;
}

void recompute_stats(MixtureState& state) {
  state.stats.clear();
  state.k_max = 0;
  for (int n = 0; n < state.size(); ++n) {
    const int label = state.z[n];
    if (label == 0) continue;
    auto [it, inserted] = state.stats.try_emplace(label, state.dim());
    it->second.add(state.data.row(n).transpose());
    state.k_max = std::max(state.k_max, label);
  }
  state.updates_since_recompute = 0;
}

std::vector<long> occupancy_counts(const MixtureState& state) {
  std::vector<long> counts(state.k_max, 0);
  for (const auto& [label, cs] : state.stats) counts[label - 1] = cs.count;
  return counts;
}

std::vector<double> conditional_assignment_probs(
    const MixtureState& state, int n, const StickPrior& prior,
    const NormalWishartPrior& nw) {
  if (state.z[n] != 0)
    throw std::logic_error(
        "conditional_assignment_probs: datum must be removed first");
  const int k = state.k_max;
  const std::vector<double> prior_probs =
      assignment_prior_probs(prior, occupancy_counts(state), k);
  const Eigen::VectorXd x = state.data.row(n).transpose();
  const double log_pred_empty = log_studentt_predictive(x, nw);

  std::vector<double> logp(k + 1);
  for (int i = 1; i <= k; ++i) {
    const auto it = state.stats.find(i);
    const double lp = it == state.stats.end()
                          ? log_pred_empty
                          : log_studentt_predictive(x, nw_posterior(nw, it->second));
    logp[i - 1] = prior_probs[i - 1] > 0.0
                      ? std::log(prior_probs[i - 1]) + lp
                      : -std::numeric_limits<double>::infinity();
  }
  logp[k] = prior_probs[k] > 0.0
                ? std::log(prior_probs[k]) + log_pred_empty
                : -std::numeric_limits<double>::infinity();

  const double mx = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  std::vector<double> probs(k + 1, 0.0);
  for (int i = 0; i <= k; ++i) {
    probs[i] = std::exp(logp[i] - mx);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

void apply_swap(MixtureState& state, int i, int j) {
  if (i == j) return;
  for (int& label : state.z) {
    if (label == i)
      label = j;
    else if (label == j)
      label = i;
  }
  auto it_i = state.stats.find(i);
  auto it_j = state.stats.find(j);
  if (it_i != state.stats.end() && it_j != state.stats.end()) {
    std::swap(it_i->second, it_j->second);
  } else if (it_i != state.stats.end()) {
    state.stats.emplace(j, std::move(it_i->second));
    state.stats.erase(it_i);
  } else if (it_j != state.stats.end()) {
    state.stats.emplace(i, std::move(it_j->second));
    state.stats.erase(it_j);
  }
  state.k_max = state.stats.empty() ? 0 : state.stats.rbegin()->first;
}

void apply_permutation(MixtureState& state, const MoveProposal& proposal) {
  const int k = proposal.cutoff;
  for (int& label : state.z) {
    if (label >= 1 && label <= k) label = proposal.sigma[label - 1];
  }
  std::map<int, ClusterStats> remapped;
  for (auto& [label, cs] : state.stats) {
    const int target = label <= k ? proposal.sigma[label - 1] : label;
    remapped.emplace(target, std::move(cs));
  }
  state.stats = std::move(remapped);
  state.k_max = state.stats.empty() ? 0 : state.stats.rbegin()->first;
}

void gibbs_sweep(MixtureState& state, const StickPrior& prior,
                 const NormalWishartPrior& nw, const MoveSchedule& schedule,
                 Rng& rng, SweepCounters* counters) {
  if (state.updates_since_recompute >= state.recompute_period)
    recompute_stats(state);
  const int n_total = state.size();
  for (int n = 0; n < n_total; ++n) {
    stats_remove(state, n);
    const std::vector<double> probs =
        conditional_assignment_probs(state, n, prior, nw);
    const int k = state.k_max;
    const double u = rng.uniform();
    double cum = 0.0;
    int label = 0;
    for (int i = 0; i < k; ++i) {
      cum += probs[i];
      if (u < cum) {
        label = i + 1;
        break;
      }
    }
    if (label == 0) {
      // Tail selected: the residual position within the tail mass picks the
      // concrete empty label.
      double residual = probs[k] > 0.0 ? (u - cum) / probs[k] : 0.0;
      residual = std::clamp(residual, 0.0, 1.0 - 1e-16);
      label = select_tail_label(prior, k, residual);
    }
    stats_add(state, n, label);
    maybe_fire_moves(state, prior, schedule, rng, counters);
  }
}

double log_joint(const MixtureState& state, const StickPrior& prior,
                 const NormalWishartPrior& nw) {
  double lp = log_pz(prior, occupancy_counts(state));
  for (const auto& [label, cs] : state.stats) lp += log_nw_marginal(nw, cs);
  return lp;
}

ChainRecord run_chain(const Eigen::MatrixXd& data, const StickPrior& prior,
                      const NormalWishartPrior& nw, const ChainConfig& config) {
  config.validate();
  nw.validate();
  Rng rng(config.seed);
  MixtureState state = make_state(data);
  state.recompute_period = config.recompute_every;
  init_assignments(state, config.init, prior, rng);

  ChainRecord record;
  record.log_joint.reserve(config.sweeps);
  for (long s = 1; s <= config.sweeps; ++s) {
    SweepCounters counters;
    gibbs_sweep(state, prior, nw, config.moves, rng, &counters);
    record.log_joint.push_back(log_joint(state, prior, nw));
    record.k_count.push_back(static_cast<int>(state.stats.size()));
    record.moves.push_back(counters);
    if (s > config.burn_in && (s - config.burn_in) % config.thin == 0) {
      record.samples.push_back(state.z);
      record.sample_iters.push_back(s);
    }
  }
  return record;
}

}  // namespace stickbreak
