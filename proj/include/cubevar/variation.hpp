#pragma once

// Exact rho-variation of finite sequences and epsilon-jump counting.

#include <functional>
#include <ostream>
#include <vector>

#include "cubevar/core.hpp"
#include "cubevar/ergodic.hpp"

namespace cubevar {

/// Cached pairwise distances ||a_j - a_i|| for i < j.
class DistanceTable {
 public:
  DistanceTable() = default;
  DistanceTable(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist);
  /// Distances of scalar frames |a_j - a_i|.
  static DistanceTable scalars(const std::vector<double>& a);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;  // packed upper triangle
};

DistanceTable distance_table(const AverageSequence& seq, Exponent p);
DistanceTable distance_table(const SystemSequence& seq, const FiniteSystem& sys, Exponent p);

struct VariationResult {
  double value = 0;
  /// Positions (into the sequence) of the maximising subsequence.
  std::vector<std::size_t> witness;
};

/// max over increasing subsequences of (sum ||a_{n_j} - a_{n_{j-1}}||^rho)^{1/rho},
/// by longest-path dynamic programming on the complete DAG.
VariationResult rho_variation(const DistanceTable& dist, double rho);
VariationResult rho_variation(const AverageSequence& seq, double rho, Exponent p);
VariationResult rho_variation(const SystemSequence& seq, const FiniteSystem& sys, double rho, Exponent p);

/// (sum over consecutive witness pairs of dist^rho)^{1/rho}.
double witness_value(const DistanceTable& dist, const std::vector<std::size_t>& witness, double rho);

struct JumpPair {
  std::size_t m, n;  // positions, m < n
};

struct JumpCount {
  std::size_t count = 0;
  std::vector<JumpPair> pairs;
};

/// Greedy earliest-finishing selection of disjoint pairs m_1 < n_1 <= m_2 < ...
/// with dist(m_j, n_j) >= eps; maximal by the interval-scheduling exchange
/// argument.
JumpCount count_eps_jumps(const DistanceTable& dist, double eps);

struct LongJump {
  std::size_t pair;  // position in the input list
  int k, l;          // 2^k <= m < 2^{k+1}, 2^l < n <= 2^{l+1}
  bool degenerate() const { return k == l; }
};

struct DyadicSplit {
  std::vector<std::size_t> short_jumps;  // [m, n] inside one [2^k, 2^{k+1})
  std::vector<LongJump> long_jumps;      // m < 2^k <= n for some k
};

/// Split index pairs (m_j, n_j) (positive integers, increasing and disjoint)
/// into short and long jumps.
DyadicSplit dyadic_split(const std::vector<std::pair<long, long>>& pairs);

/// CSV row "rho,p,value,witness" with the witness as ';'-separated indices.
void write_variation_csv(std::ostream& os, double rho, Exponent p, const VariationResult& v,
                         const std::vector<long>& indices, bool header = true);

}  // namespace cubevar
