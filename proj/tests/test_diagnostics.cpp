#include "doctest.h"

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stickbreak/diagnostics.hpp"

using namespace stickbreak;
using Eigen::MatrixXd;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

}  // namespace

TEST_CASE("association matrix marks shared labels") {
  MatrixXd a = association_matrix({1, 2, 1});
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, 1) == 0.0);
  CHECK(a(0, 2) == 1.0);
  CHECK(a(1, 2) == 0.0);
  CHECK((a - a.transpose()).norm() == 0.0);
}

TEST_CASE("mean association averages sample matrices") {
  std::vector<std::vector<int>> samples = {{1, 1, 2}, {1, 2, 2}};
  MatrixXd m = mean_association(samples);
  CHECK(m(0, 1) == doctest::Approx(0.5));
  CHECK(m(1, 2) == doctest::Approx(0.5));
  CHECK(m(0, 2) == doctest::Approx(0.0));
  CHECK(m(0, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(mean_association({}), std::invalid_argument);
  CHECK_THROWS_AS(mean_association({{1, 2}, {1}}), std::invalid_argument);
}

TEST_CASE("association variance divides by R or R-1") {
  MatrixXd r1 = (MatrixXd(2, 2) << 1, 0.2, 0.2, 1).finished();
  MatrixXd r2 = (MatrixXd(2, 2) << 1, 0.8, 0.8, 1).finished();
  MatrixXd pop = association_variance({r1, r2});
  CHECK(pop(0, 1) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(pop(0, 0) == doctest::Approx(0.0));
  MatrixXd samp = association_variance({r1, r2}, true);
  CHECK(samp(0, 1) == doctest::Approx(0.18).epsilon(1e-12));

  CHECK_THROWS_AS(association_variance({r1}), std::invalid_argument);
  MatrixXd r3 = MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(association_variance({r1, r3}), std::invalid_argument);
}

TEST_CASE("log spaced edges cover the range monotonically") {
  std::vector<double> edges = log_spaced_edges(1e-6, 0.25, 30);
  REQUIRE(edges.size() == 31);  // 30 bins need 31 fence posts
  CHECK(edges.front() == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(edges.back() == 0.25);
  for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);
  CHECK_THROWS_AS(log_spaced_edges(0.0, 0.25, 30), std::invalid_argument);
  CHECK_THROWS_AS(log_spaced_edges(1e-6, 0.25, 0), std::invalid_argument);
}

TEST_CASE("upper triangle histogram counts every pair once") {
  MatrixXd m = MatrixXd::Zero(4, 4);
  m(0, 1) = m(1, 0) = 0.005;
  m(0, 2) = m(2, 0) = 0.04;
  m(0, 3) = m(3, 0) = 0.9;   // above the last edge, clamped in
  m(1, 2) = m(2, 1) = 0.0;   // lands in the underflow bin
  m(1, 3) = m(3, 1) = 0.012;
  m(2, 3) = m(3, 2) = 0.24;

  // Three edges make two regular bins plus the underflow bin in front.
  std::vector<double> edges = {0.01, 0.1, 0.25};
  Histogram h = upper_triangle_histogram(m, edges);
  REQUIRE(h.count.size() == 3);
  REQUIRE(h.lo.size() == 3);
  CHECK(h.lo[0] == 0.0);
  CHECK(h.hi[0] == doctest::Approx(0.01));
  long total = 0;
  for (long c : h.count) total += c;
  CHECK(total == 6);
  CHECK(h.count[0] == 2);  // 0.005 and 0.0
  CHECK(h.count[1] == 2);  // 0.04 and 0.012
  CHECK(h.count[2] == 2);  // 0.24 and the clamped 0.9
}

TEST_CASE("flattening slices concatenates in slice order") {
  std::vector<int> flat = flatten_slices({{1, 2}, {3}, {4, 5}});
  CHECK(flat == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("block diagonal filter zeroes cross-slice entries") {
  MatrixXd assoc = MatrixXd::Constant(5, 5, 1.0);
  MatrixXd blocks = block_diagonal_only(assoc, {2, 3});
  CHECK(blocks(0, 1) == 1.0);
  CHECK(blocks(2, 4) == 1.0);
  CHECK(blocks(0, 2) == 0.0);
  CHECK(blocks(1, 4) == 0.0);
}

TEST_CASE("trace stats name the move kinds") {
  ChainRecord rec;
  rec.log_joint = {-10.0, -9.5};
  rec.k_count = {2, 3};
  SweepCounters c;
  c.swap_proposed = 4;
  c.swap_accepted = 1;
  c.permute_proposed = 2;
  c.permute_accepted = 2;
  rec.moves = {SweepCounters{}, c};
  TraceTable t = trace_stats(rec);
  CHECK(t.move_names == std::vector<std::string>{"swap", "permute"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].iter == 1);
  CHECK(t.rows[1].iter == 2);
  CHECK(t.rows[1].log_joint == doctest::Approx(-9.5));
  CHECK(t.rows[1].k == 3);
  CHECK(t.rows[1].proposed == std::vector<long>{4, 2});
  CHECK(t.rows[1].accepted == std::vector<long>{1, 2});

  DdpRecord drec;
  drec.log_joint = {-5.0};
  drec.k_count = {2};
  drec.moves = {DdpSweepCounters{}};
  TraceTable dt = trace_stats(drec);
  CHECK(dt.move_names ==
        std::vector<std::string>{"single_slice", "uniform_interval",
                                 "full_range"});
}

TEST_CASE("matrix csv round trips at full precision") {
  MatrixXd m(2, 3);
  m << 0.1, -2.0, 1.0 / 3.0, 4e-17, 100.0, -0.125;
  auto path = temp_file("sb_matrix_roundtrip.csv");
  write_matrix_csv(path.string(), m);
  MatrixXd back = read_matrix_csv(path.string());
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("histogram csv carries a header and one row per bin") {
  Histogram h;
  h.lo = {0.0, 0.01};
  h.hi = {0.01, 0.1};
  h.count = {3, 4};
  auto path = temp_file("sb_hist.csv");
  write_histogram_csv(path.string(), h);
  std::string content = slurp(path);
  CHECK(content.find("bin_lo,bin_hi,count") == 0);
  CHECK(content.find("3") != std::string::npos);
  CHECK(content.find("4") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("trace csv lists per-move proposal columns") {
  TraceTable t;
  t.move_names = {"swap", "permute"};
  TraceRow r;
  r.iter = 1;
  r.log_joint = -3.5;
  r.k = 2;
  r.proposed = {5, 1};
  r.accepted = {2, 0};
  t.rows = {r};
  auto path = temp_file("sb_trace.csv");
  write_trace_csv(path.string(), t);
  std::string content = slurp(path);
  CHECK(content.find(
            "iter,log_joint,k,swap_proposed,swap_accepted,permute_proposed,"
            "permute_accepted") == 0);
  CHECK(content.find("1,-3.5,2,5,2,1,0") != std::string::npos);
  std::filesystem::remove(path);
}
