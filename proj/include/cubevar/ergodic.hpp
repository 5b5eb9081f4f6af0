#pragma once

// Cubic ergodic averages on finite systems, their Z^d counterparts, and the
// lifts that carry functions from X to Z^d (along a trajectory) and from Z^d
// to R^d (constant on unit cells).

#include <span>
#include <vector>

#include "cubevar/core.hpp"

namespace cubevar {

/// A sequence of averages indexed by strictly increasing positive n.
struct AverageSequence {
  std::vector<long> indices;
  std::vector<GridFunction> frames;
};

/// The same for functions on a finite system.
struct SystemSequence {
  std::vector<long> indices;
  std::vector<SystemFunction> frames;
};

/// Iterated maps T_l^i for 0 <= i < n, one table per axis.
class IterateTable {
 public:
  IterateTable(const FiniteSystem& sys, long n);
  long length() const { return n_; }
  /// Index of T_l^i x.
  std::uint32_t operator()(int l, long i, std::size_t x) const {
    return table_[static_cast<std::size_t>(l)][static_cast<std::size_t>(i) * size_ + x];
  }

 private:
  long n_;
  std::size_t size_;
  std::vector<std::vector<std::uint32_t>> table_;
};

/// M_n(f)(x) = n^{-d} sum_{i in [0,n)^d} prod_j f_j(prod_l T_l^{j_l i_l} x).
SystemFunction cubic_average(const FiniteSystem& sys, const SystemTuple& f, long n);
SystemFunction cubic_average(const FiniteSystem& sys, const SystemTuple& f, long n,
                             const IterateTable& table);
SystemSequence cubic_average_sequence(const FiniteSystem& sys, const SystemTuple& f,
                                      std::span<const long> ns);

/// A~_n(F)(k) = n^{-d} sum_{i in [0,n)^d} prod_j F_j(k + j.i) on integer
/// grids (h = 1, integer origin). The output covers the full support.
GridFunction discrete_cube_average(const FunctionTuple& F, long n);

/// F~_j^{x,N}(k) = f_j(T_1^{k_1} ... T_d^{k_d} x) on [0, 2N)^d.
FunctionTuple trajectory_lift(const FiniteSystem& sys, const SystemTuple& f, std::size_t x, long N);

/// F_j(x) = F~_j(floor(x)): same values on unit cells, each unit cell split
/// into `subdivision`^d cells.
FunctionTuple floor_lift(const FunctionTuple& F, int subdivision = 1);

/// ||A_n(F) - A_m(F)||_{L^q(R^d)} for F the floor lift of an integer tuple.
/// On each unit cell both averages are multilinear in the position inside
/// the cell, so they are recovered from the 2^d corner evaluations and
/// |.|^q is integrated by composite Gauss-Legendre.
double lifted_difference_norm(const FunctionTuple& F_int, long n, long m, Exponent q);

}  // namespace cubevar
