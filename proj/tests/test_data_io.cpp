#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stickbreak/data_io.hpp"

using namespace stickbreak;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

}  // namespace

TEST_CASE("symmetric synthetic data mirrors exactly around the origin") {
  Dataset d = synth_symmetric(25, 2.0, 0.5, 7);
  REQUIRE(d.size() == 51);
  CHECK(d.dim() == 2);
  CHECK(d.slice.empty());
  CHECK(d.num_slices() == 0);

  // Last row is the origin point; right block negates the left block
  // coordinate for coordinate.
  CHECK(d.points(50, 0) == 0.0);
  CHECK(d.points(50, 1) == 0.0);
  for (int i = 0; i < 25; ++i) {
    CHECK(d.points(25 + i, 0) == -d.points(i, 0));
    CHECK(d.points(25 + i, 1) == -d.points(i, 1));
  }
  // Left block sits around (-offset, 0).
  double mx = d.points.block(0, 0, 25, 1).mean();
  CHECK(std::abs(mx + 2.0) < 0.5);

  Dataset again = synth_symmetric(25, 2.0, 0.5, 7);
  CHECK((again.points - d.points).norm() == 0.0);
  Dataset other = synth_symmetric(25, 2.0, 0.5, 8);
  CHECK((other.points - d.points).norm() > 0.0);

  CHECK_THROWS_AS(synth_symmetric(0, 2.0, 0.5, 7), std::domain_error);
}

TEST_CASE("moving clusters emit slice-major points around drifting centers") {
  MovingCluster c1;
  c1.start = (VectorXd(2) << 0.0, 0.0).finished();
  c1.velocity = (VectorXd(2) << 1.0, 0.0).finished();
  c1.covariance = 1e-8 * MatrixXd::Identity(2, 2);
  c1.per_slice_count = 3;
  MovingCluster c2 = c1;
  c2.start = (VectorXd(2) << 0.0, 5.0).finished();

  Dataset d = synth_moving_clusters(4, {c1, c2}, 11);
  REQUIRE(d.size() == 24);
  CHECK(d.num_slices() == 4);
  // Slice t occupies a contiguous block with slice index t.
  for (int i = 0; i < 24; ++i) CHECK(d.slice[i] == i / 6 + 1);
  // With negligible noise each point sits on its center.
  for (int t = 1; t <= 4; ++t) {
    int base = (t - 1) * 6;
    for (int p = 0; p < 3; ++p) {
      CHECK(std::abs(d.points(base + p, 0) - (t - 1.0)) < 1e-3);
      CHECK(std::abs(d.points(base + p, 1)) < 1e-3);
      CHECK(std::abs(d.points(base + 3 + p, 1) - 5.0) < 1e-3);
    }
  }

  MovingCluster bad = c1;
  bad.per_slice_count = -1;
  CHECK_THROWS_AS(synth_moving_clusters(4, {bad}, 11), std::domain_error);
  bad = c1;
  bad.velocity = VectorXd::Zero(3);
  CHECK_THROWS_AS(synth_moving_clusters(4, {bad}, 11), std::domain_error);
  CHECK_THROWS_AS(synth_moving_clusters(0, {c1}, 11), std::domain_error);
}

TEST_CASE("pgm reader handles both text and binary rasters") {
  auto p2 = temp_file("sb_img.p2.pgm");
  write_file(p2,
             "P2\n# a comment\n3 2\n255\n"
             "0 10 20\n30 40 250\n");
  GrayImage a = read_pgm(p2.string());
  CHECK(a.width == 3);
  CHECK(a.height == 2);
  CHECK(a.at(0, 0) == 0);
  CHECK(a.at(0, 2) == 20);
  CHECK(a.at(1, 2) == 250);

  auto p5 = temp_file("sb_img.p5.pgm");
  std::string raw = "P5\n3 2\n255\n";
  raw += std::string({char(0), char(10), char(20), char(30), char(40),
                      char(250)});
  write_file(p5, raw);
  GrayImage b = read_pgm(p5.string());
  CHECK(b.pixels == a.pixels);

  auto bad_magic = temp_file("sb_img.bad.pgm");
  write_file(bad_magic, "P6\n1 1\n255\n x");
  CHECK_THROWS_AS(read_pgm(bad_magic.string()), std::runtime_error);

  auto truncated = temp_file("sb_img.trunc.pgm");
  write_file(truncated, "P5\n2 2\n255\nab");
  CHECK_THROWS_AS(read_pgm(truncated.string()), std::runtime_error);

  std::filesystem::remove(p2);
  std::filesystem::remove(p5);
  std::filesystem::remove(bad_magic);
  std::filesystem::remove(truncated);
}

TEST_CASE("image ingestion emits points proportional to intensity") {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.pixels = {200, 40, 0, 90};

  Dataset d = ingest_grayscale_image(img, 100.0, 50, 3);
  // 200 -> 2 points, 40 under threshold, 0 skipped, 90 -> 1 point.
  REQUIRE(d.size() == 3);
  CHECK(d.dim() == 2);
  for (int s : d.slice) CHECK(s == 3);
  // Pixel (0,0) center is (0.25, 0.25); pixel (1,1) center (0.75, 0.75).
  CHECK(d.points(0, 0) == doctest::Approx(0.25));
  CHECK(d.points(0, 1) == doctest::Approx(0.25));
  CHECK(d.points(1, 0) == doctest::Approx(0.25));
  CHECK(d.points(2, 0) == doctest::Approx(0.75));
  CHECK(d.points(2, 1) == doctest::Approx(0.75));

  // Jitter keeps each point inside its own pixel.
  Dataset j = ingest_grayscale_image(img, 100.0, 50, 1, true, 5);
  REQUIRE(j.size() == 3);
  for (int i = 0; i < 2; ++i) {
    CHECK(j.points(i, 0) > 0.0);
    CHECK(j.points(i, 0) < 0.5);
    CHECK(j.points(i, 1) > 0.0);
    CHECK(j.points(i, 1) < 0.5);
  }
  CHECK(j.points(2, 0) > 0.5);
  CHECK(j.points(2, 1) > 0.5);
}

TEST_CASE("dataset csv round trips, with and without slices") {
  Dataset d;
  d.points = (MatrixXd(3, 2) << 0.1, 1.0 / 3.0, -2.5, 4e-16, 7.0, -0.25)
                 .finished();
  auto plain = temp_file("sb_data_plain.csv");
  write_dataset_csv(plain.string(), d);
  Dataset back = read_dataset_csv(plain.string());
  CHECK(back.slice.empty());
  REQUIRE(back.size() == 3);
  CHECK((back.points - d.points).cwiseAbs().maxCoeff() == 0.0);

  d.slice = {1, 1, 2};
  auto sliced = temp_file("sb_data_sliced.csv");
  write_dataset_csv(sliced.string(), d);
  Dataset back2 = read_dataset_csv(sliced.string());
  CHECK(back2.slice == d.slice);
  CHECK(back2.num_slices() == 2);
  CHECK((back2.points - d.points).cwiseAbs().maxCoeff() == 0.0);

  std::filesystem::remove(plain);
  std::filesystem::remove(sliced);
}

TEST_CASE("dataset csv rejects malformed input") {
  auto ragged = temp_file("sb_data_ragged.csv");
  write_file(ragged, "x1,x2\n1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(read_dataset_csv(ragged.string()), std::runtime_error);

  auto text = temp_file("sb_data_text.csv");
  write_file(text, "x1\n1.0\npotato\n");
  CHECK_THROWS_AS(read_dataset_csv(text.string()), std::runtime_error);

  auto zero_slice = temp_file("sb_data_zeroslice.csv");
  write_file(zero_slice, "slice,x1\n0,1.0\n");
  CHECK_THROWS_AS(read_dataset_csv(zero_slice.string()), std::runtime_error);

  CHECK_THROWS_AS(read_dataset_csv("/nonexistent/sb_nope.csv"),
                  std::runtime_error);

  std::filesystem::remove(ragged);
  std::filesystem::remove(text);
  std::filesystem::remove(zero_slice);
}

TEST_CASE("splitting slices preserves order within each slice") {
  Dataset d;
  d.points = (MatrixXd(5, 1) << 1, 2, 3, 4, 5).finished();
  d.slice = {2, 1, 2, 3, 1};
  std::vector<MatrixXd> slices = split_slices(d);
  REQUIRE(slices.size() == 3);
  REQUIRE(slices[0].rows() == 2);
  CHECK(slices[0](0, 0) == 2.0);
  CHECK(slices[0](1, 0) == 5.0);
  CHECK(slices[1](0, 0) == 1.0);
  CHECK(slices[1](1, 0) == 3.0);
  CHECK(slices[2](0, 0) == 4.0);

  Dataset no_slice;
  no_slice.points = MatrixXd::Zero(2, 1);
  CHECK_THROWS_AS(split_slices(no_slice), std::invalid_argument);
}
