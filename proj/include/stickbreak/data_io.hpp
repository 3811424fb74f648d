#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "stickbreak/rng.hpp"

namespace stickbreak {

/// Points with an optional time-slice index per point (1..T, contiguous;
/// empty slices allowed).  slice is empty for single-mixture data.
struct Dataset {
  Eigen::MatrixXd points;
  std::vector<int> slice;

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  /// Highest slice index, 0 when there is no slice column.
  int num_slices() const;
};

/// Two mirror-image blocks of n_side points around (-offset, 0) and
/// (+offset, 0) plus one point at the origin; the right block is the left
/// block reflected through the origin coordinate-for-coordinate, so the
/// point set is exactly invariant under x -> -x.  The origin point is the
/// last row.
Dataset synth_symmetric(int n_side, double offset, double spread,
                        std::uint64_t seed);

struct MovingCluster {
  Eigen::VectorXd start;
  Eigen::VectorXd velocity;
  Eigen::MatrixXd covariance;
  int per_slice_count = 0;
};

/// T slices; in slice t each cluster emits per_slice_count Gaussian points
/// around start + (t-1) * velocity.
Dataset synth_moving_clusters(int t_slices,
                              const std::vector<MovingCluster>& clusters,
                              std::uint64_t seed);

/// 8-bit grayscale PGM (P2 or P5) raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<int> pixels;

  int at(int row, int col) const { return pixels[row * width + col]; }
};

GrayImage read_pgm(const std::string& path);

/// Pixel (r, c) with intensity v > threshold emits round(v /
/// intensity_per_point) points at the pixel center, coordinates normalized
/// to [0, 1].  With jitter, points spread uniformly within their pixel
/// instead of stacking at its center.
Dataset ingest_grayscale_image(const GrayImage& image,
                               double intensity_per_point, int threshold,
                               int slice_index, bool jitter = false,
                               std::uint64_t seed = 0);

/// CSV with header `slice,x1,...,xd` (slice column only when present).
void write_dataset_csv(const std::string& path, const Dataset& dataset);
Dataset read_dataset_csv(const std::string& path);

/// Per-slice point matrices, 1..num_slices.  Requires a slice column.
std::vector<Eigen::MatrixXd> split_slices(const Dataset& dataset);

}  // namespace stickbreak
