#include "stickbreak/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace stickbreak {

int Dataset::num_slices() const {
  if (slice.empty()) return 0;
  return *std::max_element(slice.begin(), slice.end());
}

Dataset synth_symmetric(int n_side, double offset, double spread,
                        std::uint64_t seed) {
  if (n_side < 1) throw std::domain_error("synth_symmetric: n_side must be >= 1");
  if (!(offset > 0.0) || !(spread > 0.0))
    throw std::domain_error("synth_symmetric: offset and spread must be > 0");
  Rng rng(seed);
  Dataset d;
  d.points.resize(2 * n_side + 1, 2);
  for (int i = 0; i < n_side; ++i) {
    d.points(i, 0) = -offset + spread * rng.normal();
    d.points(i, 1) = spread * rng.normal();
    // Mirror through the origin, coordinate-exact.
    d.points(n_side + i, 0) = -d.points(i, 0);
    d.points(n_side + i, 1) = -d.points(i, 1);
  }
  d.points(2 * n_side, 0) = 0.0;
  d.points(2 * n_side, 1) = 0.0;
  return d;
}

Dataset synth_moving_clusters(int t_slices,
                              const std::vector<MovingCluster>& clusters,
                              std::uint64_t seed) {
  if (t_slices < 1)
    throw std::domain_error("synth_moving_clusters: need >= 1 slice");
  if (clusters.empty())
    throw std::domain_error("synth_moving_clusters: no clusters");
  const int d = static_cast<int>(clusters[0].start.size());
  long n_total = 0;
  for (const auto& c : clusters) {
    if (c.start.size() != d || c.velocity.size() != d ||
        c.covariance.rows() != d || c.covariance.cols() != d)
      throw std::domain_error("synth_moving_clusters: dimension mismatch");
    if (c.per_slice_count < 0)
      throw std::domain_error("synth_moving_clusters: negative count");
    n_total += static_cast<long>(c.per_slice_count) * t_slices;
  }
  Rng rng(seed);
  Dataset out;
  out.points.resize(n_total, d);
  out.slice.resize(n_total);
  long row = 0;
  for (int t = 1; t <= t_slices; ++t) {
    for (const auto& c : clusters) {
      const Eigen::VectorXd center = c.start + (t - 1) * c.velocity;
      const Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
      if (llt.info() != Eigen::Success)
        throw std::domain_error("synth_moving_clusters: covariance not SPD");
      for (int n = 0; n < c.per_slice_count; ++n) {
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z[i] = rng.normal();
        out.points.row(row) = (center + llt.matrixL() * z).transpose();
        out.slice[row] = t;
        ++row;
      }
    }
  }
  return out;
}

namespace {

// Next token in a PGM header, skipping whitespace and # comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("read_pgm: " + path + " is not P2/P5");
  GrayImage img;
  int maxval = 0;
  try {
    img.width = std::stoi(pgm_token(in));
    img.height = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error("read_pgm: malformed header in " + path);
  }
  if (img.width < 1 || img.height < 1)
    throw std::runtime_error("read_pgm: empty raster in " + path);
  if (maxval < 1 || maxval > 255)
    throw std::runtime_error("read_pgm: only 8-bit rasters supported: " + path);
  const long n = static_cast<long>(img.width) * img.height;
  img.pixels.resize(n);
  if (magic == "P2") {
    for (long i = 0; i < n; ++i) {
      const std::string tok = pgm_token(in);
      if (tok.empty())
        throw std::runtime_error("read_pgm: truncated pixel data in " + path);
      img.pixels[i] = std::stoi(tok);
    }
  } else {
    // P5: exactly one whitespace byte after maxval, then raw bytes.
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), n);
    if (in.gcount() != n)
      throw std::runtime_error("read_pgm: truncated pixel data in " + path);
    for (long i = 0; i < n; ++i) img.pixels[i] = raw[i];
  }
  for (int v : img.pixels)
    if (v < 0 || v > maxval)
      throw std::runtime_error("read_pgm: pixel out of range in " + path);
  return img;
}

Dataset ingest_grayscale_image(const GrayImage& image,
                               double intensity_per_point, int threshold,
                               int slice_index, bool jitter,
                               std::uint64_t seed) {
  if (image.width < 1 || image.height < 1)
    throw std::domain_error("ingest_grayscale_image: empty raster");
  if (!(intensity_per_point > 0.0))
    throw std::domain_error(
        "ingest_grayscale_image: intensity_per_point must be > 0");
  long total = 0;
  for (int r = 0; r < image.height; ++r)
    for (int c = 0; c < image.width; ++c)
      if (image.at(r, c) > threshold)
        total += std::lround(image.at(r, c) / intensity_per_point);
  Rng rng(seed);
  Dataset d;
  d.points.resize(total, 2);
  d.slice.assign(total, slice_index);
  long row = 0;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const int v = image.at(r, c);
      if (v <= threshold) continue;
      const long count = std::lround(v / intensity_per_point);
      for (long n = 0; n < count; ++n) {
        const double jx = jitter ? rng.uniform() - 0.5 : 0.0;
        const double jy = jitter ? rng.uniform() - 0.5 : 0.0;
        d.points(row, 0) = (c + 0.5 + jx) / image.width;
        d.points(row, 1) = (r + 0.5 + jy) / image.height;
        ++row;
      }
    }
  }
  return d;
}

void write_dataset_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  out << std::setprecision(17);
  const bool sliced = !dataset.slice.empty();
  if (sliced) out << "slice,";
  for (int j = 0; j < dataset.dim(); ++j) {
    if (j) out << ',';
    out << 'x' << j + 1;
  }
  out << '\n';
  for (int i = 0; i < dataset.size(); ++i) {
    if (sliced) out << dataset.slice[i] << ',';
    for (int j = 0; j < dataset.dim(); ++j) {
      if (j) out << ',';
      out << dataset.points(i, j);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_dataset_csv: write failed: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_dataset_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> headers;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) headers.push_back(cell);
  }
  if (headers.empty())
    throw std::runtime_error("read_dataset_csv: missing header in " + path);
  const bool sliced = headers[0] == "slice";
  const int d = static_cast<int>(headers.size()) - (sliced ? 1 : 0);
  if (d < 1)
    throw std::runtime_error("read_dataset_csv: no coordinate columns in " +
                             path);

  std::vector<int> slices;
  std::vector<double> values;
  long rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != static_cast<int>(headers.size()))
      throw std::runtime_error("read_dataset_csv: ragged row in " + path);
    try {
      int col = 0;
      if (sliced) slices.push_back(std::stoi(cells[col++]));
      for (int j = 0; j < d; ++j) values.push_back(std::stod(cells[col++]));
    } catch (const std::exception&) {
      throw std::runtime_error("read_dataset_csv: bad number in " + path);
    }
    ++rows;
  }
  Dataset out;
  out.points.resize(rows, d);
  for (long i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) out.points(i, j) = values[i * d + j];
  if (sliced) {
    out.slice = std::move(slices);
    for (int s : out.slice)
      if (s < 1)
        throw std::runtime_error("read_dataset_csv: slice indices start at 1");
  }
  return out;
}

std::vector<Eigen::MatrixXd> split_slices(const Dataset& dataset) {
  const int t_slices = dataset.num_slices();
  if (t_slices == 0)
    throw std::invalid_argument("split_slices: dataset has no slice column");
  std::vector<long> counts(t_slices, 0);
  for (int s : dataset.slice) ++counts[s - 1];
  std::vector<Eigen::MatrixXd> out(t_slices);
  for (int t = 0; t < t_slices; ++t)
    out[t].resize(counts[t], dataset.dim());
  std::vector<long> next(t_slices, 0);
  for (int i = 0; i < dataset.size(); ++i) {
    const int t = dataset.slice[i] - 1;
    out[t].row(next[t]++) = dataset.points.row(i);
  }
  return out;
}

}  // namespace stickbreak
