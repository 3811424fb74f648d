// Command line front end: synthetic data generation, single and coupled
// mixture fits, and cross-run diagnostics.  Exit codes: 0 success, 1 setup
// or configuration problem, 2 failure while sampling or writing results.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "stickbreak/config.hpp"
#include "stickbreak/data_io.hpp"
#include "stickbreak/ddp.hpp"
#include "stickbreak/diagnostics.hpp"
#include "stickbreak/mixture_gibbs.hpp"
#include "stickbreak/rng.hpp"

namespace fs = std::filesystem;
using namespace stickbreak;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_samples_csv(const fs::path& path, const ChainRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "iter,datum_index,label\n";
  for (std::size_t s = 0; s < record.samples.size(); ++s) {
    const auto& z = record.samples[s];
    for (std::size_t n = 0; n < z.size(); ++n) {
      out << record.sample_iters[s] << "," << n << "," << z[n] << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_ddp_samples_csv(const fs::path& path, const DdpRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "iter,slice,datum_index,label\n";
  for (std::size_t s = 0; s < record.samples.size(); ++s) {
    const auto& slices = record.samples[s];
    for (std::size_t t = 0; t < slices.size(); ++t) {
      for (std::size_t n = 0; n < slices[t].size(); ++n) {
        out << record.sample_iters[s] << "," << (t + 1) << "," << n << ","
            << slices[t][n] << "\n";
      }
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_theta_csv(const fs::path& path, const DdpRecord& record, int dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17);
  out << "iter,label,slice";
  for (int a = 1; a <= dim; ++a) out << ",mean_" << a;
  for (int a = 1; a <= dim; ++a) {
    for (int b = 1; b <= dim; ++b) out << ",cov_" << a << "_" << b;
  }
  out << "\n";
  for (std::size_t s = 0; s < record.theta_samples.size(); ++s) {
    const auto& labels = record.theta_samples[s];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t t = 0; t < labels[i].size(); ++t) {
        const GaussianParams& p = labels[i][t];
        out << record.sample_iters[s] << "," << (i + 1) << "," << (t + 1);
        for (int a = 0; a < dim; ++a) out << "," << p.mean[a];
        for (int a = 0; a < dim; ++a) {
          for (int b = 0; b < dim; ++b) out << "," << p.covariance(a, b);
        }
        out << "\n";
      }
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::uint64_t run_seed(std::uint64_t base, int run_index) {
  return Rng(base).split(static_cast<std::uint64_t>(run_index)).seed();
}

fs::path run_dir(const fs::path& out, int run_index) {
  std::ostringstream name;
  name << "run_" << std::setw(2) << std::setfill('0') << run_index;
  return out / name.str();
}

/// Launch one job per run, at most hardware_concurrency at a time.  The
/// first failure message is rethrown after all jobs finish.
template <typename Job>
void run_parallel(int runs, Job job) {
  unsigned width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> errors(runs);
  for (int base = 0; base < runs; base += static_cast<int>(width)) {
    int hi = std::min(runs, base + static_cast<int>(width));
    std::vector<std::thread> pool;
    for (int r = base; r < hi; ++r) {
      pool.emplace_back([&errors, &job, r] {
        try {
          job(r);
        } catch (const std::exception& e) {
          errors[r] = e.what();
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int r = 0; r < runs; ++r) {
    if (!errors[r].empty()) {
      throw std::runtime_error("run " + std::to_string(r + 1) + ": " +
                               errors[r]);
    }
  }
}

struct FitOptions {
  std::string data_path;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int runs = 1;
  bool no_moves = false;
};

void add_fit_options(CLI::App* cmd, FitOptions& opt) {
  cmd->add_option("--data", opt.data_path, "input dataset CSV")->required();
  cmd->add_option("--config", opt.config_path, "key=value config file");
  cmd->add_option("--set", opt.overrides,
                  "config override key=value (repeatable)");
  cmd->add_option("--out", opt.out_dir, "output directory")->required();
  cmd->add_option("--runs", opt.runs, "independent chains to run")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-moves", opt.no_moves,
                "disable label swap and permute moves");
}

RunConfig load_run_config(const FitOptions& opt) {
  RawConfig raw;
  if (!opt.config_path.empty()) raw = read_config_file(opt.config_path);
  for (const auto& assignment : opt.overrides) apply_override(raw, assignment);
  return parse_run_config(raw);
}

int cmd_fit(const FitOptions& opt) {
  Dataset dataset;
  RunConfig run_config;
  StickPrior prior = StickPrior::dp(1.0);
  NormalWishartPrior nw;
  ChainConfig chain;
  try {
    run_config = load_run_config(opt);
    dataset = read_dataset_csv(opt.data_path);
    if (!dataset.slice.empty()) {
      throw ConfigError(opt.data_path +
                        " has a slice column; use fit-ddp for sliced data");
    }
    if (dataset.size() == 0) throw ConfigError(opt.data_path + " is empty");
    materialize(run_config, dataset.dim(), false);
    prior = config_prior(run_config);
    nw = config_nw(run_config, dataset.dim());
    chain = config_chain(run_config, opt.no_moves);
    fs::create_directories(opt.out_dir);
    write_text(fs::path(opt.out_dir) / "config.resolved",
               render_resolved(run_config));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    run_parallel(opt.runs, [&](int r) {
      fs::path dir = run_dir(opt.out_dir, r + 1);
      fs::create_directories(dir);
      ChainConfig chain_r = chain;
      chain_r.seed = opt.runs == 1 ? chain.seed : run_seed(chain.seed, r + 1);
      RunConfig resolved_r = run_config;
      resolved_r.seed = chain_r.seed;
      write_text(dir / "config.resolved", render_resolved(resolved_r));
      ChainRecord record = run_chain(dataset.points, prior, nw, chain_r);
      write_samples_csv(dir / "samples.csv", record);
      write_trace_csv((dir / "trace.csv").string(), trace_stats(record));
      write_matrix_csv((dir / "mean_association.csv").string(),
                       mean_association(record.samples));
    });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_fit_ddp(const FitOptions& opt) {
  Dataset dataset;
  std::vector<Eigen::MatrixXd> slices;
  RunConfig run_config;
  StickPrior prior = StickPrior::dp(1.0);
  CouplingKernel kernel;
  InverseWishartPrior iw;
  DdpConfig ddp;
  try {
    run_config = load_run_config(opt);
    dataset = read_dataset_csv(opt.data_path);
    if (dataset.slice.empty()) {
      throw ConfigError(opt.data_path +
                        " has no slice column; fit-ddp needs sliced data");
    }
    if (dataset.size() == 0) throw ConfigError(opt.data_path + " is empty");
    slices = split_slices(dataset);
    materialize(run_config, dataset.dim(), true);
    prior = config_prior(run_config);
    Eigen::VectorXd pooled = dataset.points.colwise().mean();
    kernel = config_kernel(run_config, static_cast<int>(slices.size()), pooled);
    iw = config_iw(run_config, dataset.dim());
    ddp = config_ddp(run_config, opt.no_moves);
    fs::create_directories(opt.out_dir);
    RunConfig resolved = run_config;
    if (resolved.coupling_mean.empty()) {
      resolved.coupling_mean.assign(pooled.data(), pooled.data() + pooled.size());
    }
    run_config = resolved;
    write_text(fs::path(opt.out_dir) / "config.resolved",
               render_resolved(resolved));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::vector<int> slice_sizes;
    for (const auto& s : slices) {
      slice_sizes.push_back(static_cast<int>(s.rows()));
    }
    run_parallel(opt.runs, [&](int r) {
      fs::path dir = run_dir(opt.out_dir, r + 1);
      fs::create_directories(dir);
      DdpConfig ddp_r = ddp;
      ddp_r.seed = opt.runs == 1 ? ddp.seed : run_seed(ddp.seed, r + 1);
      RunConfig resolved_r = run_config;
      resolved_r.seed = ddp_r.seed;
      write_text(dir / "config.resolved", render_resolved(resolved_r));
      DdpRecord record = run_ddp_chain(slices, prior, kernel, iw, ddp_r);
      write_ddp_samples_csv(dir / "samples.csv", record);
      write_theta_csv(dir / "theta.csv", record, dataset.dim());
      write_trace_csv((dir / "trace.csv").string(), trace_stats(record));
      std::vector<std::vector<int>> flat;
      flat.reserve(record.samples.size());
      for (const auto& sample : record.samples) {
        flat.push_back(flatten_slices(sample));
      }
      Eigen::MatrixXd assoc = mean_association(flat);
      write_matrix_csv((dir / "mean_association.csv").string(), assoc);
      write_matrix_csv((dir / "mean_association_blockdiag.csv").string(),
                       block_diagonal_only(assoc, slice_sizes));
    });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

struct DiagnoseOptions {
  std::vector<std::string> run_dirs;
  std::string out_dir;
  std::string input_name = "mean_association.csv";
  bool sample_variance = false;
  int bins = 30;
};

int cmd_diagnose(const DiagnoseOptions& opt) {
  Eigen::MatrixXd variance;
  try {
    std::vector<Eigen::MatrixXd> runs;
    for (const auto& dir : opt.run_dirs) {
      runs.push_back(read_matrix_csv((fs::path(dir) / opt.input_name).string()));
    }
    variance = association_variance(runs, opt.sample_variance);
    fs::create_directories(opt.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    write_matrix_csv((fs::path(opt.out_dir) / "variance.csv").string(),
                     variance);
    Histogram h = upper_triangle_histogram(
        variance, log_spaced_edges(1e-6, 0.25, opt.bins));
    write_histogram_csv((fs::path(opt.out_dir) / "variance_hist.csv").string(),
                        h);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

struct SymmetricOptions {
  int n_side = 25;
  double offset = 2.0;
  double spread = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth_symmetric(const SymmetricOptions& opt) {
  Dataset dataset;
  try {
    dataset = synth_symmetric(opt.n_side, opt.offset, opt.spread, opt.seed);
    fs::path parent = fs::path(opt.out).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    write_dataset_csv(opt.out, dataset);
    std::ostringstream os;
    os << std::setprecision(17);
    os << "synth.kind=symmetric\n";
    os << "synth.n_side=" << opt.n_side << "\n";
    os << "synth.offset=" << opt.offset << "\n";
    os << "synth.spread=" << opt.spread << "\n";
    os << "synth.seed=" << opt.seed << "\n";
    fs::path parent = fs::path(opt.out).parent_path();
    if (parent.empty()) parent = ".";
    write_text(parent / "config.resolved", os.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

struct MovingOptions {
  int slices = 5;
  int clusters = 3;
  int per_slice = 40;
  double separation = 0.4;
  double speed = 0.05;
  double spread = 0.05;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth_moving(const MovingOptions& opt) {
  Dataset dataset;
  try {
    // Cluster starts sit on a circle of radius `separation`; each moves
    // tangentially at `speed` per slice.
    std::vector<MovingCluster> clusters;
    for (int k = 0; k < opt.clusters; ++k) {
      double angle = 2.0 * M_PI * k / opt.clusters;
      MovingCluster c;
      c.start = Eigen::Vector2d(opt.separation * std::cos(angle),
                                opt.separation * std::sin(angle));
      c.velocity = Eigen::Vector2d(-opt.speed * std::sin(angle),
                                   opt.speed * std::cos(angle));
      c.covariance = opt.spread * opt.spread * Eigen::Matrix2d::Identity();
      c.per_slice_count = opt.per_slice;
      clusters.push_back(c);
    }
    dataset = synth_moving_clusters(opt.slices, clusters, opt.seed);
    fs::path parent = fs::path(opt.out).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    write_dataset_csv(opt.out, dataset);
    std::ostringstream os;
    os << std::setprecision(17);
    os << "synth.kind=moving_clusters\n";
    os << "synth.slices=" << opt.slices << "\n";
    os << "synth.clusters=" << opt.clusters << "\n";
    os << "synth.per_slice=" << opt.per_slice << "\n";
    os << "synth.separation=" << opt.separation << "\n";
    os << "synth.speed=" << opt.speed << "\n";
    os << "synth.spread=" << opt.spread << "\n";
    os << "synth.seed=" << opt.seed << "\n";
    fs::path parent = fs::path(opt.out).parent_path();
    if (parent.empty()) parent = ".";
    write_text(parent / "config.resolved", os.str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stick-breaking mixture sampler"};
  app.require_subcommand(1);

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic datasets");
  synth->require_subcommand(1);

  SymmetricOptions sym_opt;
  CLI::App* sym = synth->add_subcommand(
      "symmetric", "two mirror-image clusters plus a center point");
  sym->add_option("--n-side", sym_opt.n_side, "points per side")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sym->add_option("--offset", sym_opt.offset, "cluster center offset")
      ->capture_default_str();
  sym->add_option("--spread", sym_opt.spread, "within-cluster deviation")
      ->capture_default_str();
  sym->add_option("--seed", sym_opt.seed, "generator seed")
      ->capture_default_str();
  sym->add_option("--out", sym_opt.out, "output CSV path")->required();

  MovingOptions mov_opt;
  CLI::App* mov = synth->add_subcommand(
      "moving_clusters", "clusters drifting across time slices");
  mov->add_option("--slices", mov_opt.slices, "time slices")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mov->add_option("--clusters", mov_opt.clusters, "cluster count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mov->add_option("--per-slice", mov_opt.per_slice, "points per cluster per slice")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mov->add_option("--separation", mov_opt.separation,
                  "radius of the circle of cluster starts")
      ->capture_default_str();
  mov->add_option("--speed", mov_opt.speed, "drift per slice")
      ->capture_default_str();
  mov->add_option("--spread", mov_opt.spread, "within-cluster deviation")
      ->capture_default_str();
  mov->add_option("--seed", mov_opt.seed, "generator seed")
      ->capture_default_str();
  mov->add_option("--out", mov_opt.out, "output CSV path")->required();

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "sample a single infinite mixture");
  add_fit_options(fit, fit_opt);

  FitOptions ddp_opt;
  CLI::App* fit_ddp =
      app.add_subcommand("fit-ddp", "sample coupled mixtures over time slices");
  add_fit_options(fit_ddp, ddp_opt);

  DiagnoseOptions diag_opt;
  CLI::App* diag = app.add_subcommand(
      "diagnose", "cross-run variance of mean association matrices");
  diag->add_option("dirs", diag_opt.run_dirs, "run directories (two or more)")
      ->required()
      ->expected(2, -1);
  diag->add_option("--out", diag_opt.out_dir, "output directory")->required();
  diag->add_option("--input", diag_opt.input_name,
                   "matrix file name inside each run directory")
      ->capture_default_str();
  diag->add_flag("--sample-variance", diag_opt.sample_variance,
                 "divide by R-1 instead of R");
  diag->add_option("--bins", diag_opt.bins, "histogram bin count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (sym->parsed()) return cmd_synth_symmetric(sym_opt);
  if (mov->parsed()) return cmd_synth_moving(mov_opt);
  if (fit->parsed()) return cmd_fit(fit_opt);
  if (fit_ddp->parsed()) return cmd_fit_ddp(ddp_opt);
  if (diag->parsed()) return cmd_diagnose(diag_opt);
  return 1;
}
