#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "stickbreak/rng.hpp"

namespace stickbreak {

/// Mean and covariance of one Gaussian component.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Additive sufficient statistics of the points assigned to one cluster:
/// count, sum of x, and sum of x x^T.
struct ClusterStats {
  long count = 0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd scatter;

  ClusterStats() = default;
  explicit ClusterStats(int dim)
      : sum(Eigen::VectorXd::Zero(dim)),
        scatter(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const Eigen::VectorXd& x);
  void remove(const Eigen::VectorXd& x);
  Eigen::VectorXd mean() const { return sum / static_cast<double>(count); }
  int dim() const { return static_cast<int>(sum.size()); }
};

/// Conjugate prior for a Gaussian's mean and covariance: mean pseudo-count
/// kappa, degrees of freedom nu (> d-1), and SPD scale matrix.
struct NormalWishartPrior {
  Eigen::VectorXd mean;     // m0
  double kappa = 1.0;       // mean pseudo-count
  double nu = 1.0;          // degrees of freedom
  Eigen::MatrixXd scale;    // S0

  int dim() const { return static_cast<int>(mean.size()); }
  /// Throws std::domain_error if kappa <= 0, nu <= d-1, or scale is not
  /// symmetric positive-definite.
  void validate() const;
};

double log_beta_fn(double a, double b);
double log_multigamma(int dim, double a);

/// log N(x; mean, covariance). Throws std::domain_error on non-SPD covariance.
double log_mvn_pdf(const Eigen::VectorXd& x, const GaussianParams& p);

Eigen::VectorXd sample_mvn(const GaussianParams& p, Rng& rng);

/// Draw Sigma with Sigma^-1 ~ Wishart(dof, scale^-1), i.e. an inverse-Wishart
/// draw with the given scale matrix; E[Sigma] = scale/(dof-d-1) when that
/// moment exists. Requires dof > d-1.
Eigen::MatrixXd sample_inverse_wishart(const Eigen::MatrixXd& scale,
                                       double dof, Rng& rng);

double log_inverse_wishart_pdf(const Eigen::MatrixXd& sigma,
                               const Eigen::MatrixXd& scale, double dof);

/// Conjugate update of the prior with a cluster's sufficient statistics.
NormalWishartPrior nw_posterior(const NormalWishartPrior& prior,
                                const ClusterStats& stats);

/// log of the posterior predictive density at x: the multivariate student-t
/// obtained by integrating the Gaussian likelihood against the prior.
double log_studentt_predictive(const Eigen::VectorXd& x,
                               const NormalWishartPrior& p);

/// log marginal likelihood of the points summarized by stats under the prior.
/// Equals the chain rule of student-t predictives in any insertion order.
double log_nw_marginal(const NormalWishartPrior& prior,
                       const ClusterStats& stats);

/// Conditional of the unobserved coordinates of N(mean, cov) given the listed
/// observed coordinates, via Schur complement. Returns (mean, covariance) in
/// the order of the unobserved indices (ascending).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> gaussian_conditional(
    const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
    const std::vector<int>& observed_idx, const Eigen::VectorXd& observed_val);

double sample_beta(double a, double b, Rng& rng);

}  // namespace stickbreak
