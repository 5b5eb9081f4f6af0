#pragma once

// Small brute-force reference implementations shared by the tests. None of
// them call into the library code they are compared against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace oracle {

inline double norm_diff(const std::vector<double>& a, const std::vector<double>& b, double p, double cell) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p) * cell;
  return std::pow(s, 1.0 / p);
}

struct Best {
  double value = 0;
  std::vector<std::size_t> witness;
};

/// Exhaustive rho-variation over every subset of positions with >= 1 element.
template <class Dist>
Best variation(std::size_t n, double rho, Dist dist) {
  Best best;
  best.witness = {0};
  for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
    std::vector<std::size_t> sub;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1ul) sub.push_back(i);
    double s = 0;
    for (std::size_t a = 1; a < sub.size(); ++a) s += std::pow(dist(sub[a - 1], sub[a]), rho);
    const double v = std::pow(s, 1.0 / rho);
    if (v > best.value) {
      best.value = v;
      best.witness = sub;
    }
  }
  return best;
}

/// Maximum number of disjoint pairs m_1 < n_1 <= m_2 < n_2 ... with dist >= eps.
template <class Dist>
std::size_t max_jumps(std::size_t n, double eps, Dist dist, std::size_t from = 0) {
  std::size_t best = 0;
  for (std::size_t m = from; m < n; ++m)
    for (std::size_t k = m + 1; k < n; ++k)
      if (dist(m, k) >= eps) best = std::max(best, 1 + max_jumps(n, eps, dist, k));
  return best;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cubevar_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
