#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stickbreak/ddp.hpp"
#include "stickbreak/mixture_gibbs.hpp"
#include "stickbreak/stick_prior.hpp"

namespace stickbreak {

/// Bad key, bad value, or unreadable config file; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value text, one pair per line, '#' starts a comment.  Later
/// assignments win.  Keys outside the schema are rejected when resolved.
struct RawConfig {
  std::map<std::string, std::string> kv;
};

RawConfig read_config_file(const std::string& path);

/// Apply one "key=value" override (from a CLI flag).
void apply_override(RawConfig& raw, const std::string& assignment);

/// Typed run settings with every default materialized.  Negative or empty
/// sentinel fields mean "derive from the data or the command" and are filled
/// by materialize().
struct RunConfig {
  std::string prior_family = "dp";
  double prior_alpha = 1.0;
  double prior_a = 0.5;
  double prior_b = 0.5;
  double prior_gamma = 1.0;
  double prior_r = 0.5;
  std::vector<double> prior_table;
  double prior_tail_mass = 0.0;

  std::vector<double> nw_mean;   // empty: zeros(d)
  double nw_kappa = 1.0;
  double nw_nu = -1.0;           // negative: d + 2
  std::vector<double> nw_scale = {1.0};   // scalar spread over the diagonal
  std::vector<double> iw_scale = {0.01};
  double iw_dof = -1.0;          // negative: d + 1

  double coupling_a = 1.0;
  double coupling_beta = 0.005;
  double coupling_delta = 1.0;
  double coupling_b = -1.0;      // negative: a + 1e-6 so the matrix stays SPD
  std::vector<double> coupling_mean;  // empty: pooled sample mean

  double p_swap = -1.0;          // negative: 0.1 single mixture, 1.0 coupled
  double p_permute = -1.0;       // negative: 0.1
  long sweeps = -1;              // negative: 1000 single mixture, 100 coupled
  long burn_in = -1;             // negative: 100 single mixture, 50 coupled
  long thin = 1;
  std::uint64_t seed = 0;
  std::string init;              // empty: all_one single, random_sqrt coupled
  long recompute_every = 1000;
  int mc_atoms = 10000;

  bool materialized = false;
};

/// Parse and type-check the raw pairs; throws ConfigError naming every
/// unknown key.
RunConfig parse_run_config(const RawConfig& raw);

/// Fill the derive-later fields for a dataset of dimension `dim`, for a
/// single-mixture (coupled=false) or coupled run.
void materialize(RunConfig& config, int dim, bool coupled);

/// All keys in schema order with their final values; written to
/// config.resolved.
std::string render_resolved(const RunConfig& config);

StickPrior config_prior(const RunConfig& config);
NormalWishartPrior config_nw(const RunConfig& config, int dim);
InverseWishartPrior config_iw(const RunConfig& config, int dim);
CouplingKernel config_kernel(const RunConfig& config, int slices,
                             const Eigen::VectorXd& pooled_mean);
ChainConfig config_chain(const RunConfig& config, bool no_moves);
DdpConfig config_ddp(const RunConfig& config, bool no_moves);

}  // namespace stickbreak
