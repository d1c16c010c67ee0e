#ifndef SNVRG_SAMPLING_HPP
#define SNVRG_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "snvrg/objectives.hpp"

namespace snvrg {

/// Counter-based splittable random stream.
///
/// A stream is identified by (master_seed, path). The key is a SplitMix64
/// hash chain over the path, and the i-th output is SplitMix64 applied to
/// key + i * golden. Output depends only on the identity and the number of
/// draws, so two consumers holding equal streams see equal sequences.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});

  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  RngStream child(std::uint64_t label) const;
  RngStream child(std::initializer_list<std::uint64_t> labels) const;

  std::uint64_t next_u64();
  /// Uniform on {0, ..., bound - 1}; exact (rejection on the low product).
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double normal();

 private:
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// m distinct indices from {0, ..., n-1}, every m-subset equally likely.
/// Partial Fisher-Yates over a sparse swap table.
IndexSet sample_without_replacement(RngStream& rng, std::size_t n, std::size_t m);

/// E || (1/m) sum_{j in J} a_j ||^2 over all C(N, m) subsets J, by enumeration.
/// Requires sum_j a_j = 0 and N <= 12.
double subset_mean_sqnorm_exact(std::span<const Vector> a, std::size_t m);

/// (N - m) / (m N (N - 1)) * sum_j ||a_j||^2, zero when m = N.
double subset_mean_sqnorm_closed_form(std::span<const Vector> a, std::size_t m);

/// 1(m < N) / (m N) * sum_j ||a_j||^2.
double subset_mean_sqnorm_bound(std::span<const Vector> a, std::size_t m);

}  // namespace snvrg

#endif  // SNVRG_SAMPLING_HPP
