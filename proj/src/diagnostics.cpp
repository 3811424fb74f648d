#include "stickbreak/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace stickbreak {

Eigen::MatrixXd association_matrix(const std::vector<int>& z) {
  const int n = static_cast<int>(z.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = z[i] == z[j] ? 1.0 : 0.0;
  return m;
}

Eigen::MatrixXd mean_association(const std::vector<std::vector<int>>& samples) {
  if (samples.empty())
    throw std::invalid_argument("mean_association: no samples");
  const std::size_t n = samples[0].size();
  for (const auto& s : samples)
    if (s.size() != n)
      throw std::invalid_argument("mean_association: sample lengths differ");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : samples) sum += association_matrix(s);
  return sum / static_cast<double>(samples.size());
}

Eigen::MatrixXd association_variance(const std::vector<Eigen::MatrixXd>& runs,
                                     bool sample_variance) {
  const int r = static_cast<int>(runs.size());
  if (r < 2) throw std::invalid_argument("association_variance: need >= 2 runs");
  const auto rows = runs[0].rows();
  const auto cols = runs[0].cols();
  for (const auto& m : runs)
    if (m.rows() != rows || m.cols() != cols)
      throw std::invalid_argument("association_variance: dimensions differ");
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& m : runs) mean += m;
  mean /= static_cast<double>(r);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& m : runs) var += (m - mean).cwiseProduct(m - mean);
  var /= static_cast<double>(sample_variance ? r - 1 : r);
  return var;
}

std::vector<double> log_spaced_edges(double lo, double hi, int bins) {
  if (!(lo > 0.0) || !(hi > lo) || bins < 1)
    throw std::invalid_argument("log_spaced_edges: need 0 < lo < hi, bins >= 1");
  std::vector<double> edges(bins + 1);
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / bins;
  for (int i = 0; i <= bins; ++i) edges[i] = std::exp(llo + i * step);
  edges.back() = hi;
  return edges;
}

Histogram upper_triangle_histogram(const Eigen::MatrixXd& m,
                                   std::vector<double> edges) {
  if (edges.empty()) edges = log_spaced_edges(1e-6, 0.25, 30);
  if (edges.size() < 2)
    throw std::invalid_argument("upper_triangle_histogram: need >= 2 edges");
  const int bins = static_cast<int>(edges.size()) - 1;
  Histogram h;
  h.lo.resize(bins + 1);
  h.hi.resize(bins + 1);
  h.count.assign(bins + 1, 0);
  h.lo[0] = 0.0;
  h.hi[0] = edges[0];
  for (int b = 0; b < bins; ++b) {
    h.lo[b + 1] = edges[b];
    h.hi[b + 1] = edges[b + 1];
  }
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = i + 1; j < m.cols(); ++j) {
      const double v = m(i, j);
      int b = bins;  // clamp overflow into the last bin
      if (v <= edges[0]) {
        b = 0;
      } else {
        for (int c = 0; c < bins; ++c) {
          if (v <= edges[c + 1]) {
            b = c + 1;
            break;
          }
        }
      }
      ++h.count[b];
    }
  }
  return h;
}

std::vector<int> flatten_slices(const std::vector<std::vector<int>>& z) {
  std::vector<int> flat;
  for (const auto& slice : z) flat.insert(flat.end(), slice.begin(), slice.end());
  return flat;
}

Eigen::MatrixXd block_diagonal_only(const Eigen::MatrixXd& assoc,
                                    const std::vector<int>& slice_sizes) {
  long total = 0;
  for (int s : slice_sizes) total += s;
  if (total != assoc.rows() || assoc.rows() != assoc.cols())
    throw std::invalid_argument("block_diagonal_only: size mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(assoc.rows(), assoc.cols());
  long off = 0;
  for (int s : slice_sizes) {
    out.block(off, off, s, s) = assoc.block(off, off, s, s);
    off += s;
  }
  return out;
}

TraceTable trace_stats(const ChainRecord& record) {
  TraceTable t;
  t.move_names = {"swap", "permute"};
  t.rows.reserve(record.log_joint.size());
  for (std::size_t s = 0; s < record.log_joint.size(); ++s) {
    TraceRow row;
    row.iter = static_cast<long>(s) + 1;
    row.log_joint = record.log_joint[s];
    row.k = record.k_count[s];
    row.proposed = {record.moves[s].swap_proposed, record.moves[s].permute_proposed};
    row.accepted = {record.moves[s].swap_accepted, record.moves[s].permute_accepted};
    t.rows.push_back(std::move(row));
  }
  return t;
}

TraceTable trace_stats(const DdpRecord& record) {
  TraceTable t;
  t.move_names = {"single_slice", "uniform_interval", "full_range"};
  t.rows.reserve(record.log_joint.size());
  for (std::size_t s = 0; s < record.log_joint.size(); ++s) {
    TraceRow row;
    row.iter = static_cast<long>(s) + 1;
    row.log_joint = record.log_joint[s];
    row.k = record.k_count[s];
    for (int m = 0; m < 3; ++m) {
      row.proposed.push_back(record.moves[s].proposed[m]);
      row.accepted.push_back(record.moves[s].accepted[m]);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  out << std::setprecision(17);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_matrix_csv: write failed: " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows[0].size())
      throw std::runtime_error("read_matrix_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_matrix_csv: empty " + path);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_histogram_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.count.size(); ++b)
    out << h.lo[b] << ',' << h.hi[b] << ',' << h.count[b] << '\n';
  if (!out)
    throw std::runtime_error("write_histogram_csv: write failed: " + path);
}

void write_trace_csv(const std::string& path, const TraceTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "iter,log_joint,k";
  for (const auto& name : table.move_names)
    out << ',' << name << "_proposed," << name << "_accepted";
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.iter << ',' << row.log_joint << ',' << row.k;
    for (std::size_t m = 0; m < table.move_names.size(); ++m)
      out << ',' << row.proposed[m] << ',' << row.accepted[m];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_trace_csv: write failed: " + path);
}

}  // namespace stickbreak
