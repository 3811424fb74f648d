#include "stickbreak/ddp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stickbreak/label_moves.hpp"

namespace stickbreak {

namespace {

double logsumexp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Mean trajectory of one label along one dimension, as a T-vector.
Eigen::VectorXd mean_trajectory(const DdpState& state, int label, int dim) {
  const int t_slices = state.slices();
  Eigen::VectorXd traj(t_slices);
  for (int t = 0; t < t_slices; ++t)
    traj[t] = state.theta[label - 1][t].mean[dim];
  return traj;
}

double trajectory_log_prior(const Eigen::VectorXd& traj, double m,
                            const Eigen::MatrixXd& gamma) {
  GaussianParams p;
  p.mean = Eigen::VectorXd::Constant(traj.size(), m);
  p.covariance = gamma;
  return log_mvn_pdf(traj, p);
}

}  // namespace

void CouplingKernel::validate() const {
  if (!(a > 0.0) || !(beta > 0.0) || !(delta > 0.0) || !(b > 0.0))
    throw std::domain_error("CouplingKernel: a, beta, delta, b must be > 0");
  if (slices < 1) throw std::domain_error("CouplingKernel: slices must be >= 1");
  if (m.size() == 0) throw std::domain_error("CouplingKernel: m must be set");
}

Eigen::MatrixXd coupling_matrix(const CouplingKernel& kernel) {
  kernel.validate();
  const int t_slices = kernel.slices;
  Eigen::MatrixXd gamma(t_slices, t_slices);
  for (int s = 0; s < t_slices; ++s) {
    for (int t = 0; t < t_slices; ++t) {
      gamma(s, t) = s == t ? kernel.b
                           : kernel.a * std::exp(-kernel.beta *
                                                 std::pow(std::abs(s - t),
                                                          kernel.delta));
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
  if (es.eigenvalues().minCoeff() <= 1e-10) {
    std::ostringstream msg;
    msg << "coupling_matrix: not positive definite; eigenvalues";
    for (int i = 0; i < t_slices; ++i) msg << ' ' << es.eigenvalues()[i];
    throw std::domain_error(msg.str());
  }
  return gamma;
}

CouplingCache make_coupling_cache(const CouplingKernel& kernel) {
  CouplingCache cache;
  cache.kernel = kernel;
  cache.gamma = coupling_matrix(kernel);
  const int t_slices = kernel.slices;
  cache.cond_weights.resize(t_slices);
  cache.cond_var.resize(t_slices);
  for (int t = 0; t < t_slices; ++t) {
    if (t_slices == 1) {
      cache.cond_weights[t] = Eigen::VectorXd();
      cache.cond_var[t] = kernel.b;
      continue;
    }
    Eigen::MatrixXd others(t_slices - 1, t_slices - 1);
    Eigen::VectorXd cross(t_slices - 1);
    int r = 0;
    for (int s = 0; s < t_slices; ++s) {
      if (s == t) continue;
      cross[r] = cache.gamma(s, t);
      int c = 0;
      for (int q = 0; q < t_slices; ++q) {
        if (q == t) continue;
        others(r, c) = cache.gamma(s, q);
        ++c;
      }
      ++r;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(others);
    if (llt.info() != Eigen::Success)
      throw std::domain_error("make_coupling_cache: conditional block not SPD");
    cache.cond_weights[t] = llt.solve(cross);
    cache.cond_var[t] = kernel.b - cross.dot(cache.cond_weights[t]);
  }
  return cache;
}

void InverseWishartPrior::validate() const {
  const int d = static_cast<int>(scale.rows());
  if (d == 0 || scale.cols() != d)
    throw std::domain_error("InverseWishartPrior: scale must be square");
  if ((scale - scale.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::domain_error("InverseWishartPrior: scale not symmetric");
  if (!(dof > d - 1))
    throw std::domain_error("InverseWishartPrior: dof must exceed dim-1");
  const Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("InverseWishartPrior: scale not SPD");
}

DdpState make_ddp_state(std::vector<Eigen::MatrixXd> slices) {
  if (slices.empty()) throw std::domain_error("make_ddp_state: no slices");
  const int d = static_cast<int>(slices[0].cols());
  for (const auto& s : slices)
    if (s.cols() != d)
      throw std::domain_error("make_ddp_state: slice dimensions differ");
  DdpState state;
  state.data = std::move(slices);
  const int t_slices = state.slices();
  state.z.resize(t_slices);
  state.counts.resize(t_slices);
  for (int t = 0; t < t_slices; ++t)
    state.z[t].assign(state.data[t].rows(), 0);
  return state;
}

std::vector<GaussianParams> make_mc_atoms(const CouplingKernel& kernel,
                                          const InverseWishartPrior& iw,
                                          int count, Rng& rng) {
  if (count < 1)
    throw std::domain_error("make_mc_atoms: need at least one atom");
  kernel.validate();
  iw.validate();
  const int d = kernel.dim();
  const double sd = std::sqrt(kernel.b);
  std::vector<GaussianParams> atoms(count);
  for (auto& atom : atoms) {
    atom.mean.resize(d);
    for (int i = 0; i < d; ++i) atom.mean[i] = kernel.m[i] + sd * rng.normal();
    atom.covariance = sample_inverse_wishart(iw.scale, iw.dof, rng);
  }
  return atoms;
}

double mc_new_cluster_predictive(const Eigen::VectorXd& x,
                                 const std::vector<GaussianParams>& atoms) {
  if (atoms.empty())
    throw std::domain_error("mc_new_cluster_predictive: no atoms");
  std::vector<double> logs(atoms.size());
  for (std::size_t s = 0; s < atoms.size(); ++s)
    logs[s] = log_mvn_pdf(x, atoms[s]);
  return logsumexp(logs) - std::log(static_cast<double>(atoms.size()));
}

std::pair<double, double> mc_new_cluster_predictive_with_se(
    const Eigen::VectorXd& x, const std::vector<GaussianParams>& atoms) {
  if (atoms.empty())
    throw std::domain_error("mc_new_cluster_predictive: no atoms");
  const double n = static_cast<double>(atoms.size());
  std::vector<double> logs(atoms.size());
  for (std::size_t s = 0; s < atoms.size(); ++s)
    logs[s] = log_mvn_pdf(x, atoms[s]);
  const double mx = *std::max_element(logs.begin(), logs.end());
  double s1 = 0.0, s2 = 0.0;
  for (double l : logs) {
    const double e = std::exp(l - mx);
    s1 += e;
    s2 += e * e;
  }
  const double mean = s1 / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  const double rel_se = std::sqrt(var / n) / mean;
  return {mx + std::log(mean), rel_se};
}

void precompute_tail_predictive(DdpState& state) {
  state.tail_logpred.resize(state.slices());
  for (int t = 0; t < state.slices(); ++t) {
    const int n_t = static_cast<int>(state.data[t].rows());
    state.tail_logpred[t].resize(n_t);
    for (int n = 0; n < n_t; ++n)
      state.tail_logpred[t][n] = mc_new_cluster_predictive(
          state.data[t].row(n).transpose(), state.mc_atoms);
  }
}

void ddp_grow_to(DdpState& state, int label, const CouplingCache& cache,
                 const InverseWishartPrior& iw, Rng& rng) {
  if (label <= state.k_max) return;
  const int t_slices = state.slices();
  const int d = state.dim();
  GaussianParams traj_prior;
  traj_prior.covariance = cache.gamma;
  for (int i = state.k_max + 1; i <= label; ++i) {
    std::vector<GaussianParams> traj(t_slices);
    Eigen::MatrixXd means(t_slices, d);
    for (int dim = 0; dim < d; ++dim) {
      traj_prior.mean = Eigen::VectorXd::Constant(t_slices, cache.kernel.m[dim]);
      means.col(dim) = sample_mvn(traj_prior, rng);
    }
    for (int t = 0; t < t_slices; ++t) {
      traj[t].mean = means.row(t).transpose();
      traj[t].covariance = sample_inverse_wishart(iw.scale, iw.dof, rng);
    }
    state.theta.push_back(std::move(traj));
  }
  for (int t = 0; t < t_slices; ++t) state.counts[t].resize(label, 0);
  state.total_counts.resize(label, 0);
  state.k_max = label;
}

void ddp_shrink(DdpState& state) {
  int k = state.k_max;
  while (k > 0 && state.total_counts[k - 1] == 0) --k;
  if (k == state.k_max) return;
  state.theta.resize(k);
  state.total_counts.resize(k);
  for (auto& c : state.counts) c.resize(k);
  state.k_max = k;
}

void ddp_add(DdpState& state, int t, int n, int label) {
  if (label < 1 || label > state.k_max)
    throw std::logic_error("ddp_add: label not instantiated");
  if (state.z[t][n] != 0) throw std::logic_error("ddp_add: datum already assigned");
  state.z[t][n] = label;
  ++state.counts[t][label - 1];
  ++state.total_counts[label - 1];
}

void ddp_remove(DdpState& state, int t, int n) {
  const int label = state.z[t][n];
  if (label == 0) throw std::logic_error("ddp_remove: datum not assigned");
  state.z[t][n] = 0;
  --state.counts[t][label - 1];
  --state.total_counts[label - 1];
  ddp_shrink(state);
}

std::vector<double> ddp_assignment_probs(const DdpState& state, int t, int n,
                                         const StickPrior& prior) {
  if (state.z[t][n] != 0)
    throw std::logic_error("ddp_assignment_probs: datum must be removed first");
  if (state.tail_logpred.empty())
    throw std::logic_error(
        "ddp_assignment_probs: call precompute_tail_predictive first");
  const int k = state.k_max;
  const std::vector<double> prior_probs =
      assignment_prior_probs(prior, state.counts[t], k);
  const Eigen::VectorXd x = state.data[t].row(n).transpose();

  std::vector<double> logp(k + 1);
  for (int i = 1; i <= k; ++i) {
    logp[i - 1] = prior_probs[i - 1] > 0.0
                      ? std::log(prior_probs[i - 1]) +
                            log_mvn_pdf(x, state.theta[i - 1][t])
                      : -std::numeric_limits<double>::infinity();
  }
  logp[k] = prior_probs[k] > 0.0
                ? std::log(prior_probs[k]) + state.tail_logpred[t][n]
                : -std::numeric_limits<double>::infinity();

  const double lse = logsumexp(logp);
  std::vector<double> probs(k + 1);
  for (int i = 0; i <= k; ++i) probs[i] = std::exp(logp[i] - lse);
  return probs;
}

void sample_means(DdpState& state, int label, const CouplingCache& cache,
                  Rng& rng) {
  const int t_slices = state.slices();
  const int d = state.dim();
  for (int t = 0; t < t_slices; ++t) {
    // Leave-one-slice-out prior conditional, per dimension.
    Eigen::VectorXd prior_mean(d);
    for (int dim = 0; dim < d; ++dim) {
      double shift = 0.0;
      int r = 0;
      for (int s = 0; s < t_slices; ++s) {
        if (s == t) continue;
        shift += cache.cond_weights[t][r] *
                 (state.theta[label - 1][s].mean[dim] - cache.kernel.m[dim]);
        ++r;
      }
      prior_mean[dim] = cache.kernel.m[dim] + shift;
    }
    const double v = cache.cond_var[t];

    const long n_assigned = state.counts[t][label - 1];
    GaussianParams& th = state.theta[label - 1][t];
    if (n_assigned == 0) {
      const double sd = std::sqrt(v);
      for (int dim = 0; dim < d; ++dim)
        th.mean[dim] = prior_mean[dim] + sd * rng.normal();
      continue;
    }

    Eigen::VectorXd sum_x = Eigen::VectorXd::Zero(d);
    for (int n = 0; n < static_cast<int>(state.z[t].size()); ++n)
      if (state.z[t][n] == label) sum_x += state.data[t].row(n).transpose();

    const Eigen::LLT<Eigen::MatrixXd> llt_sigma(th.covariance);
    if (llt_sigma.info() != Eigen::Success)
      throw std::domain_error("sample_means: covariance not SPD");
    const Eigen::MatrixXd sigma_inv =
        llt_sigma.solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd precision =
        static_cast<double>(n_assigned) * sigma_inv +
        Eigen::MatrixXd::Identity(d, d) / v;
    const Eigen::VectorXd info = llt_sigma.solve(sum_x) + prior_mean / v;
    const Eigen::LLT<Eigen::MatrixXd> llt_prec(precision);
    const Eigen::VectorXd post_mean = llt_prec.solve(info);
    Eigen::VectorXd zvec(d);
    for (int dim = 0; dim < d; ++dim) zvec[dim] = rng.normal();
    // Covariance = P^-1 = L^-T L^-1, so L^-T z has the right spread.
    th.mean = post_mean + llt_prec.matrixL().transpose().solve(zvec);
  }
}

void sample_covariances(DdpState& state, int label, int t,
                        const InverseWishartPrior& iw, Rng& rng) {
  GaussianParams& th = state.theta[label - 1][t];
  Eigen::MatrixXd scale = iw.scale;
  long n_assigned = 0;
  for (int n = 0; n < static_cast<int>(state.z[t].size()); ++n) {
    if (state.z[t][n] != label) continue;
    const Eigen::VectorXd diff = state.data[t].row(n).transpose() - th.mean;
    scale += diff * diff.transpose();
    ++n_assigned;
  }
  th.covariance =
      sample_inverse_wishart(scale, iw.dof + static_cast<double>(n_assigned), rng);
}

IntervalProposal propose_interval_swap(SwapStrategy strategy,
                                       const StickPrior& prior, int k_max,
                                       int t_slices, Rng& rng) {
  const MoveProposal labels = propose_swap(prior, k_max, rng);
  IntervalProposal p;
  p.i = labels.i;
  p.j = labels.j;
  switch (strategy) {
    case SwapStrategy::single_slice:
      p.t1 = p.t2 = 1 + static_cast<int>(rng.below(t_slices));
      break;
    case SwapStrategy::uniform_interval: {
      long idx = static_cast<long>(
          rng.below(static_cast<std::uint64_t>(t_slices) * (t_slices + 1) / 2));
      for (int t1 = 1; t1 <= t_slices; ++t1) {
        const long span = t_slices - t1 + 1;
        if (idx < span) {
          p.t1 = t1;
          p.t2 = t1 + static_cast<int>(idx);
          break;
        }
        idx -= span;
      }
      break;
    }
    case SwapStrategy::full_range:
      p.t1 = 1;
      p.t2 = t_slices;
      break;
  }
  return p;
}

double interval_swap_log_accept(const DdpState& state,
                                const IntervalProposal& proposal,
                                const StickPrior& prior,
                                const CouplingCache& cache) {
  const int i = proposal.i;
  const int j = proposal.j;
  if (i == j)
    throw std::domain_error("interval_swap_log_accept: labels must differ");
  if (std::max(i, j) > static_cast<int>(state.theta.size()))
    throw std::logic_error("interval_swap_log_accept: label not instantiated");

  double lr = 0.0;
  for (int t = proposal.t1 - 1; t <= proposal.t2 - 1; ++t)
    lr += swap_log_ratio(prior, state.counts[t], i, j);

  const int d = state.dim();
  for (int dim = 0; dim < d; ++dim) {
    const Eigen::VectorXd old_i = mean_trajectory(state, i, dim);
    const Eigen::VectorXd old_j = mean_trajectory(state, j, dim);
    Eigen::VectorXd new_i = old_i;
    Eigen::VectorXd new_j = old_j;
    for (int t = proposal.t1 - 1; t <= proposal.t2 - 1; ++t) {
      new_i[t] = old_j[t];
      new_j[t] = old_i[t];
    }
    const double m = cache.kernel.m[dim];
    lr += trajectory_log_prior(new_i, m, cache.gamma) +
          trajectory_log_prior(new_j, m, cache.gamma) -
          trajectory_log_prior(old_i, m, cache.gamma) -
          trajectory_log_prior(old_j, m, cache.gamma);
  }
  return std::min(0.0, lr);
}

void apply_interval_swap(DdpState& state, const IntervalProposal& proposal) {
  const int i = proposal.i;
  const int j = proposal.j;
  if (std::max(i, j) > state.k_max)
    throw std::logic_error("apply_interval_swap: label not instantiated");
  for (int t = proposal.t1 - 1; t <= proposal.t2 - 1; ++t) {
    for (int& label : state.z[t]) {
      if (label == i)
        label = j;
      else if (label == j)
        label = i;
    }
    const long tmp = state.counts[t][i - 1];
    state.counts[t][i - 1] = state.counts[t][j - 1];
    state.counts[t][j - 1] = tmp;
    std::swap(state.theta[i - 1][t], state.theta[j - 1][t]);
  }
  for (int label : {i, j}) {
    long total = 0;
    for (int t = 0; t < state.slices(); ++t) total += state.counts[t][label - 1];
    state.total_counts[label - 1] = total;
  }
  ddp_shrink(state);
}

double ddp_log_joint(const DdpState& state, const StickPrior& prior,
                     const CouplingCache& cache,
                     const InverseWishartPrior& iw) {
  double lp = 0.0;
  for (int t = 0; t < state.slices(); ++t) {
    lp += log_pz(prior, state.counts[t]);
    for (int n = 0; n < static_cast<int>(state.z[t].size()); ++n) {
      const int label = state.z[t][n];
      if (label == 0)
        throw std::logic_error("ddp_log_joint: unassigned datum");
      lp += log_mvn_pdf(state.data[t].row(n).transpose(),
                        state.theta[label - 1][t]);
    }
  }
  for (int i = 1; i <= state.k_max; ++i) {
    for (int dim = 0; dim < state.dim(); ++dim)
      lp += trajectory_log_prior(mean_trajectory(state, i, dim),
                                 cache.kernel.m[dim], cache.gamma);
    for (int t = 0; t < state.slices(); ++t)
      lp += log_inverse_wishart_pdf(state.theta[i - 1][t].covariance, iw.scale,
                                    iw.dof);
  }
  return lp;
}

void DdpConfig::validate() const {
  if (sweeps < 1) throw std::domain_error("DdpConfig: sweeps must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps)
    throw std::domain_error("DdpConfig: need 0 <= burn_in < sweeps");
  if (thin < 1) throw std::domain_error("DdpConfig: thin must be >= 1");
  if (p_swap < 0.0 || p_swap > 1.0)
    throw std::domain_error("DdpConfig: p_swap must be in [0,1]");
  if (mc_atom_count < 1)
    throw std::domain_error("DdpConfig: mc_atom_count must be >= 1");
}

DdpRecord run_ddp_chain(const std::vector<Eigen::MatrixXd>& slices,
                        const StickPrior& prior, const CouplingKernel& kernel,
                        const InverseWishartPrior& iw,
                        const DdpConfig& config) {
  config.validate();
  iw.validate();
  const CouplingCache cache = make_coupling_cache(kernel);
  Rng rng(config.seed);

  DdpState state = make_ddp_state(slices);
  state.mc_atoms = make_mc_atoms(kernel, iw, config.mc_atom_count, rng);
  precompute_tail_predictive(state);

  // Initial assignments, then one parameter pass so theta reflects them.
  long n_total = 0;
  for (const auto& s : state.data) n_total += s.rows();
  const int init_hi = [&] {
    switch (config.init) {
      case InitMode::all_one:
        return 1;
      case InitMode::per_datum:
        return static_cast<int>(std::min<long>(n_total, prior.max_label()));
      case InitMode::random_sqrt:
        return std::min(
            static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_total)))),
            prior.max_label());
    }
    return 1;
  }();
  ddp_grow_to(state, std::max(init_hi, 1), cache, iw, rng);
  long seq = 0;
  for (int t = 0; t < state.slices(); ++t) {
    for (int n = 0; n < static_cast<int>(state.z[t].size()); ++n) {
      int label = 1;
      switch (config.init) {
        case InitMode::all_one:
          label = 1;
          break;
        case InitMode::per_datum:
          label = static_cast<int>(seq % init_hi) + 1;
          break;
        case InitMode::random_sqrt:
          label = 1 + static_cast<int>(rng.below(init_hi));
          break;
      }
      ddp_add(state, t, n, label);
      ++seq;
    }
  }
  ddp_shrink(state);
  for (int label = 1; label <= state.k_max; ++label) {
    sample_means(state, label, cache, rng);
    for (int t = 0; t < state.slices(); ++t)
      sample_covariances(state, label, t, iw, rng);
  }

  DdpRecord record;
  const SwapStrategy strategies[3] = {SwapStrategy::single_slice,
                                      SwapStrategy::uniform_interval,
                                      SwapStrategy::full_range};
  for (long iter = 1; iter <= config.sweeps; ++iter) {
    for (int t = 0; t < state.slices(); ++t) {
      for (int n = 0; n < static_cast<int>(state.z[t].size()); ++n) {
        ddp_remove(state, t, n);
        const std::vector<double> probs =
            ddp_assignment_probs(state, t, n, prior);
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
          double residual = probs[k] > 0.0 ? (u - cum) / probs[k] : 0.0;
          residual = std::clamp(residual, 0.0, 1.0 - 1e-16);
          label = select_tail_label(prior, k, residual);
          ddp_grow_to(state, label, cache, iw, rng);
        }
        ddp_add(state, t, n, label);
      }
    }

    DdpSweepCounters counters;
    const bool swappable = prior.single_param()
                               ? prior.max_label() >= 2
                               : move_support(prior, state.k_max) >= 2;
    for (int s = 0; s < 3; ++s) {
      if (config.p_swap <= 0.0 || rng.uniform() >= config.p_swap || !swappable)
        continue;
      const IntervalProposal p = propose_interval_swap(
          strategies[s], prior, state.k_max, state.slices(), rng);
      ++counters.proposed[s];
      const int grown_from = state.k_max;
      ddp_grow_to(state, std::max(p.i, p.j), cache, iw, rng);
      const double la = interval_swap_log_accept(state, p, prior, cache);
      if (la >= 0.0 || std::log(rng.uniform_pos()) < la) {
        apply_interval_swap(state, p);
        ++counters.accepted[s];
      } else if (state.k_max > grown_from) {
        ddp_shrink(state);
      }
    }

    for (int label = 1; label <= state.k_max; ++label) {
      sample_means(state, label, cache, rng);
      for (int t = 0; t < state.slices(); ++t)
        sample_covariances(state, label, t, iw, rng);
    }

    record.log_joint.push_back(ddp_log_joint(state, prior, cache, iw));
    int occupied = 0;
    for (long c : state.total_counts)
      if (c > 0) ++occupied;
    record.k_count.push_back(occupied);
    record.moves.push_back(counters);
    if (iter > config.burn_in && (iter - config.burn_in) % config.thin == 0) {
      record.samples.push_back(state.z);
      record.sample_iters.push_back(iter);
      record.theta_samples.push_back(state.theta);
    }
  }
  return record;
}

}  // namespace stickbreak
