#include "snvrg/sampling.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

namespace snvrg {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::size_t kMaxEnumeration = 12;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t key, std::uint64_t label) {
  return mix64(mix64(key + kGolden) ^ (label + 0x632BE59BD9B4E019ULL));
}

double sum_sqnorm(std::span<const Vector> a) {
  double total = 0.0;
  for (const auto& v : a) total += v.squaredNorm();
  return total;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : master_seed_(master_seed), path_(std::move(path)), key_(mix64(master_seed)) {
  for (auto label : path_) key_ = derive_key(key_, label);
}

RngStream RngStream::child(std::uint64_t label) const {
  auto path = path_;
  path.push_back(label);
  return RngStream(master_seed_, std::move(path));
}

RngStream RngStream::child(std::initializer_list<std::uint64_t> labels) const {
  auto path = path_;
  path.insert(path.end(), labels);
  return RngStream(master_seed_, std::move(path));
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw InputError("uniform_below: bound must be positive");
  // Lemire's multiply-shift with rejection of the biased low products.
  unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

IndexSet sample_without_replacement(RngStream& rng, std::size_t n, std::size_t m) {
  if (m == 0 || m > n) {
    throw InputError("sample_without_replacement: need 1 <= m <= n, got m=" +
                     std::to_string(m) + ", n=" + std::to_string(n));
  }
  // Virtual array perm[k] = k; only displaced entries are stored.
  std::unordered_map<std::size_t, std::size_t> displaced;
  displaced.reserve(2 * m);
  auto at = [&](std::size_t k) {
    auto it = displaced.find(k);
    return it == displaced.end() ? k : it->second;
  };
  IndexSet out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
    const std::size_t picked = at(j);
    displaced[j] = at(i);
    out[i] = picked;
  }
  return out;
}

double subset_mean_sqnorm_exact(std::span<const Vector> a, std::size_t m) {
  const std::size_t big_n = a.size();
  if (big_n == 0 || m == 0 || m > big_n) {
    throw InputError("subset_mean_sqnorm_exact: need 1 <= m <= N");
  }
  if (big_n > kMaxEnumeration) {
    throw InputError("subset_mean_sqnorm_exact: N=" + std::to_string(big_n) +
                     " exceeds the enumeration limit of 12");
  }
  Vector total = Vector::Zero(a.front().size());
  double scale = 1.0;
  for (const auto& v : a) {
    total += v;
    scale = std::max(scale, v.norm());
  }
  if (total.norm() > 1e-12 * scale) {
    throw InputError("subset_mean_sqnorm_exact: vectors must sum to zero");
  }

  // Walk all m-subsets as bitmasks (Gosper's hack).
  double acc = 0.0;
  std::uint64_t subsets = 0;
  Vector mean(a.front().size());
  std::uint32_t mask = (1u << m) - 1u;
  const std::uint32_t limit = 1u << big_n;
  while (mask < limit) {
    mean.setZero();
    for (std::size_t j = 0; j < big_n; ++j) {
      if (mask & (1u << j)) mean += a[j];
    }
    mean /= static_cast<double>(m);
    acc += mean.squaredNorm();
    ++subsets;
    const std::uint32_t c = mask & (0u - mask);
    const std::uint32_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  return acc / static_cast<double>(subsets);
}

double subset_mean_sqnorm_closed_form(std::span<const Vector> a, std::size_t m) {
  const auto big_n = static_cast<double>(a.size());
  if (m >= a.size()) return 0.0;
  const auto mm = static_cast<double>(m);
  return (big_n - mm) / (mm * big_n * (big_n - 1.0)) * sum_sqnorm(a);
}

double subset_mean_sqnorm_bound(std::span<const Vector> a, std::size_t m) {
  if (m >= a.size()) return 0.0;
  return sum_sqnorm(a) / (static_cast<double>(m) * static_cast<double>(a.size()));
}

}  // namespace snvrg
