#pragma once

#include <cstdint>
#include <random>

namespace stickbreak {

/// Seedable random stream. All samplers take one of these explicitly so a run
/// is a pure function of its seed. Independent streams for parallel chains
/// come from split(), which derives a child seed deterministically; the child
/// sequence does not overlap the parent's draws in any way we rely on.
///
/// The transformations (Box-Muller, Marsaglia-Tsang) are implemented here
/// rather than taken from <random> so that a given seed produces the same
/// draw sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos();
  /// Standard normal.
  double normal();
  /// Gamma with given shape, unit scale.
  double gamma(double shape);
  /// Chi-squared with (possibly fractional) dof.
  double chi_squared(double dof);
  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t next_u64();

  /// Deterministic child stream; distinct `stream` ids give independent
  /// children. Depends only on the construction seed, not on draws made.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace stickbreak
