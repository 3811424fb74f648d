#include "stickbreak/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace stickbreak {
namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "prior.family", "prior.alpha",     "prior.a",
      "prior.b",      "prior.gamma",     "prior.r",
      "prior.table",  "prior.tail_mass", "nw.mean",
      "nw.kappa",     "nw.nu",           "nw.scale",
      "iw.scale",     "iw.dof",          "coupling.a",
      "coupling.beta", "coupling.delta", "coupling.b",
      "coupling.mean", "moves.p_swap",   "moves.p_permute",
      "chain.sweeps",  "chain.burn_in",  "chain.thin",
      "chain.seed",    "chain.init",     "chain.recompute_every",
      "mc.atoms"};
  return keys;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + value +
                      "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + value +
                      "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" +
                      value + "'");
  }
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      throw ConfigError("config: " + key + " has an empty list entry");
    }
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) {
    throw ConfigError("config: " + key + " expects a comma separated list");
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) os << ",";
    os << v[i];
  }
  return os.str();
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// A scalar spreads over the diagonal; a length-d list is the diagonal.
Eigen::MatrixXd diagonal_from(const std::vector<double>& entries,
                              const std::string& key, int dim) {
  if (entries.size() == 1) {
    return entries[0] * Eigen::MatrixXd::Identity(dim, dim);
  }
  if (static_cast<int>(entries.size()) != dim) {
    throw ConfigError("config: " + key + " has " +
                      std::to_string(entries.size()) +
                      " entries but the data has dimension " +
                      std::to_string(dim));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) m(i, i) = entries[i];
  return m;
}

Eigen::VectorXd vector_from(const std::vector<double>& entries,
                            const std::string& key, int dim) {
  if (entries.size() == 1) {
    return Eigen::VectorXd::Constant(dim, entries[0]);
  }
  if (static_cast<int>(entries.size()) != dim) {
    throw ConfigError("config: " + key + " has " +
                      std::to_string(entries.size()) +
                      " entries but the data has dimension " +
                      std::to_string(dim));
  }
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = entries[i];
  return v;
}

}  // namespace

RawConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  RawConfig raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": empty key");
    }
    raw.kv[key] = value;
  }
  return raw;
}

void apply_override(RawConfig& raw, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("config: override '" + assignment +
                      "' is not key=value");
  }
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  if (key.empty()) {
    throw ConfigError("config: override '" + assignment + "' has an empty key");
  }
  raw.kv[key] = value;
}

RunConfig parse_run_config(const RawConfig& raw) {
  std::vector<std::string> unknown;
  const auto& keys = known_keys();
  for (const auto& [key, value] : raw.kv) {
    bool found = false;
    for (const auto& k : keys) {
      if (k == key) {
        found = true;
        break;
      }
    }
    if (!found) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "config: unknown key";
    if (unknown.size() > 1) msg += "s";
    msg += ":";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  RunConfig c;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = raw.kv.find(key);
    return it == raw.kv.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("prior.family")) {
    if (*v != "dp" && *v != "pitman_yor" && *v != "geometric" && *v != "beta" &&
        *v != "table") {
      throw ConfigError(
          "config: prior.family must be dp, pitman_yor, geometric, beta or "
          "table, got '" + *v + "'");
    }
    c.prior_family = *v;
  }
  if (const auto* v = get("prior.alpha")) c.prior_alpha = parse_double("prior.alpha", *v);
  if (const auto* v = get("prior.a")) c.prior_a = parse_double("prior.a", *v);
  if (const auto* v = get("prior.b")) c.prior_b = parse_double("prior.b", *v);
  if (const auto* v = get("prior.gamma")) c.prior_gamma = parse_double("prior.gamma", *v);
  if (const auto* v = get("prior.r")) c.prior_r = parse_double("prior.r", *v);
  if (const auto* v = get("prior.table")) c.prior_table = parse_list("prior.table", *v);
  if (const auto* v = get("prior.tail_mass")) {
    c.prior_tail_mass = parse_double("prior.tail_mass", *v);
  }
  if (c.prior_family == "table" && c.prior_table.empty()) {
    throw ConfigError("config: prior.family=table requires prior.table");
  }

  if (const auto* v = get("nw.mean")) c.nw_mean = parse_list("nw.mean", *v);
  if (const auto* v = get("nw.kappa")) c.nw_kappa = parse_double("nw.kappa", *v);
  if (const auto* v = get("nw.nu")) c.nw_nu = parse_double("nw.nu", *v);
  if (const auto* v = get("nw.scale")) c.nw_scale = parse_list("nw.scale", *v);
  if (const auto* v = get("iw.scale")) c.iw_scale = parse_list("iw.scale", *v);
  if (const auto* v = get("iw.dof")) c.iw_dof = parse_double("iw.dof", *v);

  if (const auto* v = get("coupling.a")) c.coupling_a = parse_double("coupling.a", *v);
  if (const auto* v = get("coupling.beta")) {
    c.coupling_beta = parse_double("coupling.beta", *v);
  }
  if (const auto* v = get("coupling.delta")) {
    c.coupling_delta = parse_double("coupling.delta", *v);
  }
  if (const auto* v = get("coupling.b")) c.coupling_b = parse_double("coupling.b", *v);
  if (const auto* v = get("coupling.mean")) {
    c.coupling_mean = parse_list("coupling.mean", *v);
  }

  if (const auto* v = get("moves.p_swap")) c.p_swap = parse_double("moves.p_swap", *v);
  if (const auto* v = get("moves.p_permute")) {
    c.p_permute = parse_double("moves.p_permute", *v);
  }
  if (const auto* v = get("chain.sweeps")) c.sweeps = parse_long("chain.sweeps", *v);
  if (const auto* v = get("chain.burn_in")) c.burn_in = parse_long("chain.burn_in", *v);
  if (const auto* v = get("chain.thin")) c.thin = parse_long("chain.thin", *v);
  if (const auto* v = get("chain.seed")) c.seed = parse_u64("chain.seed", *v);
  if (const auto* v = get("chain.init")) {
    if (*v != "all_one" && *v != "per_datum" && *v != "random_sqrt") {
      throw ConfigError(
          "config: chain.init must be all_one, per_datum or random_sqrt, got '" +
          *v + "'");
    }
    c.init = *v;
  }
  if (const auto* v = get("chain.recompute_every")) {
    c.recompute_every = parse_long("chain.recompute_every", *v);
  }
  if (const auto* v = get("mc.atoms")) {
    c.mc_atoms = static_cast<int>(parse_long("mc.atoms", *v));
  }
  return c;
}

void materialize(RunConfig& config, int dim, bool coupled) {
  if (dim < 1) throw ConfigError("config: data dimension must be positive");
  if (config.nw_mean.empty()) config.nw_mean.assign(dim, 0.0);
  if (config.nw_nu < 0.0) config.nw_nu = dim + 2;
  if (config.iw_dof < 0.0) config.iw_dof = dim + 1;
  if (config.coupling_b < 0.0) config.coupling_b = config.coupling_a + 1e-6;
  if (config.p_swap < 0.0) config.p_swap = coupled ? 1.0 : 0.1;
  if (config.p_permute < 0.0) config.p_permute = 0.1;
  if (config.sweeps < 0) config.sweeps = coupled ? 100 : 1000;
  if (config.burn_in < 0) config.burn_in = coupled ? 50 : 100;
  if (config.init.empty()) config.init = coupled ? "random_sqrt" : "all_one";
  config.materialized = true;
}

std::string render_resolved(const RunConfig& config) {
  if (!config.materialized) {
    throw std::logic_error("render_resolved: config not materialized");
  }
  std::ostringstream os;
  os << "prior.family=" << config.prior_family << "\n";
  os << "prior.alpha=" << format_double(config.prior_alpha) << "\n";
  os << "prior.a=" << format_double(config.prior_a) << "\n";
  os << "prior.b=" << format_double(config.prior_b) << "\n";
  os << "prior.gamma=" << format_double(config.prior_gamma) << "\n";
  os << "prior.r=" << format_double(config.prior_r) << "\n";
  if (!config.prior_table.empty()) {
    os << "prior.table=" << join(config.prior_table) << "\n";
  }
  os << "prior.tail_mass=" << format_double(config.prior_tail_mass) << "\n";
  os << "nw.mean=" << join(config.nw_mean) << "\n";
  os << "nw.kappa=" << format_double(config.nw_kappa) << "\n";
  os << "nw.nu=" << format_double(config.nw_nu) << "\n";
  os << "nw.scale=" << join(config.nw_scale) << "\n";
  os << "iw.scale=" << join(config.iw_scale) << "\n";
  os << "iw.dof=" << format_double(config.iw_dof) << "\n";
  os << "coupling.a=" << format_double(config.coupling_a) << "\n";
  os << "coupling.beta=" << format_double(config.coupling_beta) << "\n";
  os << "coupling.delta=" << format_double(config.coupling_delta) << "\n";
  os << "coupling.b=" << format_double(config.coupling_b) << "\n";
  if (!config.coupling_mean.empty()) {
    os << "coupling.mean=" << join(config.coupling_mean) << "\n";
  }
  os << "moves.p_swap=" << format_double(config.p_swap) << "\n";
  os << "moves.p_permute=" << format_double(config.p_permute) << "\n";
  os << "chain.sweeps=" << config.sweeps << "\n";
  os << "chain.burn_in=" << config.burn_in << "\n";
  os << "chain.thin=" << config.thin << "\n";
  os << "chain.seed=" << config.seed << "\n";
  os << "chain.init=" << config.init << "\n";
  os << "chain.recompute_every=" << config.recompute_every << "\n";
  os << "mc.atoms=" << config.mc_atoms << "\n";
  return os.str();
}

StickPrior config_prior(const RunConfig& config) {
  try {
    if (config.prior_family == "dp") {
      return StickPrior::dp(config.prior_alpha);
    }
    if (config.prior_family == "pitman_yor") {
      return StickPrior::pitman_yor(config.prior_a, config.prior_b);
    }
    if (config.prior_family == "geometric") {
      return StickPrior::geometric(config.prior_gamma, config.prior_r);
    }
    if (config.prior_family == "beta") {
      return StickPrior::constant_beta(config.prior_a, config.prior_b);
    }
    return StickPrior::truncated_table(config.prior_table,
                                       config.prior_tail_mass);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

NormalWishartPrior config_nw(const RunConfig& config, int dim) {
  NormalWishartPrior nw;
  nw.mean = vector_from(config.nw_mean, "nw.mean", dim);
  nw.kappa = config.nw_kappa;
  nw.nu = config.nw_nu;
  nw.scale = diagonal_from(config.nw_scale, "nw.scale", dim);
  try {
    nw.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return nw;
}

InverseWishartPrior config_iw(const RunConfig& config, int dim) {
  InverseWishartPrior iw;
  iw.scale = diagonal_from(config.iw_scale, "iw.scale", dim);
  iw.dof = config.iw_dof;
  try {
    iw.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return iw;
}

CouplingKernel config_kernel(const RunConfig& config, int slices,
                             const Eigen::VectorXd& pooled_mean) {
  CouplingKernel kernel;
  kernel.a = config.coupling_a;
  kernel.beta = config.coupling_beta;
  kernel.delta = config.coupling_delta;
  kernel.b = config.coupling_b;
  kernel.slices = slices;
  if (config.coupling_mean.empty()) {
    kernel.m = pooled_mean;
  } else {
    kernel.m = vector_from(config.coupling_mean, "coupling.mean",
                           static_cast<int>(pooled_mean.size()));
  }
  try {
    kernel.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return kernel;
}

ChainConfig config_chain(const RunConfig& config, bool no_moves) {
  ChainConfig chain;
  chain.sweeps = config.sweeps;
  chain.burn_in = config.burn_in;
  chain.thin = config.thin;
  chain.seed = config.seed;
  if (config.init == "all_one") {
    chain.init = InitMode::all_one;
  } else if (config.init == "per_datum") {
    chain.init = InitMode::per_datum;
  } else {
    chain.init = InitMode::random_sqrt;
  }
  chain.recompute_every = config.recompute_every;
  chain.moves.p_swap = no_moves ? 0.0 : config.p_swap;
  chain.moves.p_permute = no_moves ? 0.0 : config.p_permute;
  try {
    chain.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return chain;
}

DdpConfig config_ddp(const RunConfig& config, bool no_moves) {
  DdpConfig ddp;
  ddp.sweeps = config.sweeps;
  ddp.burn_in = config.burn_in;
  ddp.thin = config.thin;
  ddp.seed = config.seed;
  if (config.init == "all_one") {
    ddp.init = InitMode::all_one;
  } else if (config.init == "per_datum") {
    ddp.init = InitMode::per_datum;
  } else {
    ddp.init = InitMode::random_sqrt;
  }
  ddp.p_swap = no_moves ? 0.0 : config.p_swap;
  ddp.mc_atom_count = config.mc_atoms;
  try {
    ddp.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return ddp;
}

}  // namespace stickbreak
