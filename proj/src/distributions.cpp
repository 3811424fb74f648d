#include "stickbreak/distributions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stickbreak {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::LLT<Eigen::MatrixXd> cholesky_or_throw(const Eigen::MatrixXd& m,
                                              const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::domain_error(std::string(what) + ": matrix not SPD");
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

void ClusterStats::add(const Eigen::VectorXd& x) {
  ++count;
  sum += x;
  scatter += x * x.transpose();
}

void ClusterStats::remove(const Eigen::VectorXd& x) {
  if (count <= 0) throw std::logic_error("ClusterStats: remove from empty");
  --count;
  sum -= x;
  scatter -= x * x.transpose();
}

void NormalWishartPrior::validate() const {
  const int d = dim();
  if (!(kappa > 0.0))
    throw std::domain_error("NormalWishartPrior: kappa must be > 0");
  if (!(nu > d - 1))
    throw std::domain_error("NormalWishartPrior: nu must exceed dim-1");
  if (scale.rows() != d || scale.cols() != d)
    throw std::domain_error("NormalWishartPrior: scale dimension mismatch");
  if ((scale - scale.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::domain_error("NormalWishartPrior: scale not symmetric");
  cholesky_or_throw(scale, "NormalWishartPrior");
}

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_multigamma(int dim, double a) {
  double r = 0.25 * dim * (dim - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= dim; ++j) r += std::lgamma(a + 0.5 * (1 - j));
  return r;
}

double log_mvn_pdf(const Eigen::VectorXd& x, const GaussianParams& p) {
  const int d = p.dim();
  const auto llt = cholesky_or_throw(p.covariance, "log_mvn_pdf");
  const Eigen::VectorXd w = llt.matrixL().solve(x - p.mean);
  return -0.5 * (d * kLog2Pi + log_det_from_llt(llt) + w.squaredNorm());
}

Eigen::VectorXd sample_mvn(const GaussianParams& p, Rng& rng) {
  const int d = p.dim();
  const auto llt = cholesky_or_throw(p.covariance, "sample_mvn");
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  return p.mean + llt.matrixL() * z;
}

Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& scale,
                                       double dof, Rng& rng) {
  const int d = static_cast<int>(scale.rows());
  if (!(dof > d - 1))
    throw std::domain_error("sample_inverse_wishart: dof must exceed dim-1");
  const auto llt = cholesky_or_throw(scale, "sample_inverse_wishart");

  // Bartlett factor of a Wishart(dof, I) draw
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  // Sigma^-1 = L^-T A A^T L^-1  =>  Sigma = (L A^-T)(L A^-T)^T
  const Eigen::MatrixXd lt = llt.matrixL().toDenseMatrix().transpose();
  const Eigen::MatrixXd mt =
      a.triangularView<Eigen::Lower>().solve(lt);  // M^T = A^-1 L^T
  return mt.transpose() * mt;
}

double log_inverse_wishart_pdf(const Eigen::MatrixXd& sigma,
                               const Eigen::MatrixXd& scale, double dof) {
  const int d = static_cast<int>(sigma.rows());
  const auto llt_sigma = cholesky_or_throw(sigma, "log_inverse_wishart_pdf");
  const auto llt_scale = cholesky_or_throw(scale, "log_inverse_wishart_pdf");
  const double trace_term = llt_sigma.solve(scale).trace();
  return 0.5 * dof * log_det_from_llt(llt_scale) -
         0.5 * dof * d * std::numbers::ln2 - log_multigamma(d, 0.5 * dof) -
         0.5 * (dof + d + 1) * log_det_from_llt(llt_sigma) - 0.5 * trace_term;
}

NormalWishartPrior nw_posterior(const NormalWishartPrior& prior,
                                const ClusterStats& stats) {
  if (stats.count == 0) return prior;
  const double n = static_cast<double>(stats.count);
  const Eigen::VectorXd xbar = stats.mean();
  NormalWishartPrior post;
  post.kappa = prior.kappa + n;
  post.nu = prior.nu + n;
  post.mean = (prior.kappa * prior.mean + stats.sum) / post.kappa;
  const Eigen::MatrixXd centered =
      stats.scatter - stats.sum * xbar.transpose();
  const Eigen::VectorXd shift = xbar - prior.mean;
  post.scale = prior.scale + centered +
               (prior.kappa * n / post.kappa) * shift * shift.transpose();
  return post;
}

double log_studentt_predictive(const Eigen::VectorXd& x,
                               const NormalWishartPrior& p) {
  const int d = p.dim();
  const double dof = p.nu - d + 1;  // > 0 by the prior invariant
  const Eigen::MatrixXd shape =
      p.scale * ((p.kappa + 1.0) / (p.kappa * dof));
  const auto llt = cholesky_or_throw(shape, "log_studentt_predictive");
  const Eigen::VectorXd w = llt.matrixL().solve(x - p.mean);
  const double quad = w.squaredNorm();
  return std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
         0.5 * d * std::log(dof * std::numbers::pi) -
         0.5 * log_det_from_llt(llt) -
         0.5 * (dof + d) * std::log1p(quad / dof);
}

double log_nw_marginal(const NormalWishartPrior& prior,
                       const ClusterStats& stats) {
  if (stats.count == 0) return 0.0;
  const int d = prior.dim();
  const double n = static_cast<double>(stats.count);
  const NormalWishartPrior post = nw_posterior(prior, stats);
  const auto llt0 = cholesky_or_throw(prior.scale, "log_nw_marginal");
  const auto lltn = cholesky_or_throw(post.scale, "log_nw_marginal");
  return -0.5 * n * d * std::log(std::numbers::pi) +
         0.5 * d * (std::log(prior.kappa) - std::log(post.kappa)) +
         0.5 * prior.nu * log_det_from_llt(llt0) -
         0.5 * post.nu * log_det_from_llt(lltn) +
         log_multigamma(d, 0.5 * post.nu) - log_multigamma(d, 0.5 * prior.nu);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> gaussian_conditional(
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
    const std::vector<int>& observed_idx,
    const Eigen::VectorXd& observed_val) {
  const int t = static_cast<int>(mean.size());
  const int no = static_cast<int>(observed_idx.size());
  if (no != observed_val.size())
    throw std::domain_error("gaussian_conditional: index/value size mismatch");
  std::vector<bool> is_obs(t, false);
  for (int i : observed_idx) {
    if (i < 0 || i >= t || is_obs[i])
      throw std::domain_error(
          "gaussian_conditional: observed indices must be distinct and in "
          "range");
    is_obs[i] = true;
  }
  std::vector<int> unobs;
  for (int i = 0; i < t; ++i)
    if (!is_obs[i]) unobs.push_back(i);
  const int nu = static_cast<int>(unobs.size());

  Eigen::MatrixXd k_oo(no, no), k_uo(nu, no), k_uu(nu, nu);
  Eigen::VectorXd m_o(no), m_u(nu), delta(no);
  for (int i = 0; i < no; ++i) {
    m_o[i] = mean[observed_idx[i]];
    delta[i] = observed_val[i] - m_o[i];
    for (int j = 0; j < no; ++j)
      k_oo(i, j) = cov(observed_idx[i], observed_idx[j]);
  }
  for (int i = 0; i < nu; ++i) {
    m_u[i] = mean[unobs[i]];
    for (int j = 0; j < no; ++j) k_uo(i, j) = cov(unobs[i], observed_idx[j]);
    for (int j = 0; j < nu; ++j) k_uu(i, j) = cov(unobs[i], unobs[j]);
  }

  if (no == 0) return {m_u, k_uu};
  Eigen::LLT<Eigen::MatrixXd> llt(k_oo);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("gaussian_conditional: observed block singular");
  const Eigen::MatrixXd gain = llt.solve(k_uo.transpose()).transpose();
  Eigen::VectorXd cond_mean = m_u + gain * delta;
  Eigen::MatrixXd cond_cov = k_uu - gain * k_uo.transpose();
  // symmetrize away the solve's roundoff
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();
  return {std::move(cond_mean), std::move(cond_cov)};
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("sample_beta: parameters must be > 0");
  const double x = rng.gamma(a);
  const double y = rng.gamma(b);
  return x / (x + y);
}

}  // namespace stickbreak
