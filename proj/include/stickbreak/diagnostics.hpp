#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stickbreak/ddp.hpp"
#include "stickbreak/mixture_gibbs.hpp"

namespace stickbreak {

/// N x N same-cluster indicator: entry (i, j) is 1 iff z[i] == z[j].
Eigen::MatrixXd association_matrix(const std::vector<int>& z);

/// Element-wise mean of the samples' association matrices; estimates the
/// posterior probability that two data share a cluster.
Eigen::MatrixXd mean_association(const std::vector<std::vector<int>>& samples);

/// Element-wise variance of per-run mean-association matrices.  Population
/// variance (divide by R) by default; sample_variance switches to R-1.
Eigen::MatrixXd association_variance(const std::vector<Eigen::MatrixXd>& runs,
                                     bool sample_variance = false);

struct Histogram {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<long> count;
};

/// Log-spaced bin edges over (lo, hi], `bins` of them.
std::vector<double> log_spaced_edges(double lo, double hi, int bins);

/// Histogram of the strict upper triangle of a symmetric matrix.  The first
/// bin is an underflow bin [0, edges.front()]; values above edges.back() are
/// clamped into the last bin.  Default edges: log_spaced_edges(1e-6, 0.25, 30).
Histogram upper_triangle_histogram(const Eigen::MatrixXd& m,
                                   std::vector<double> edges = {});

/// Concatenated per-sample label vector of a time-sliced sample, slice by
/// slice; cross-slice association is then label identity.
std::vector<int> flatten_slices(const std::vector<std::vector<int>>& z);

/// Zero all cross-slice entries of a flattened association matrix, leaving
/// the per-slice diagonal blocks.
Eigen::MatrixXd block_diagonal_only(const Eigen::MatrixXd& assoc,
                                    const std::vector<int>& slice_sizes);

struct TraceRow {
  long iter = 0;
  double log_joint = 0.0;
  int k = 0;
  std::vector<long> proposed;
  std::vector<long> accepted;
};

struct TraceTable {
  std::vector<std::string> move_names;
  std::vector<TraceRow> rows;
};

TraceTable trace_stats(const ChainRecord& record);
TraceTable trace_stats(const DdpRecord& record);

/// Dense matrix CSV, no header, full precision.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/// Rows bin_lo,bin_hi,count with that header.
void write_histogram_csv(const std::string& path, const Histogram& h);

/// Rows iter,log_joint,k then per-move proposed/accepted columns.
void write_trace_csv(const std::string& path, const TraceTable& table);

}  // namespace stickbreak
