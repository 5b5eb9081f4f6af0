#pragma once

// Shared domain types: cube indices, finite dynamical systems, grid
// functions on uniform d-dimensional grids, tuples of grid functions, and
// L^p norms.

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cubevar {

constexpr int kMaxDim = 3;

// ---------------------------------------------------------------------------
// errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CommutationViolation : public Error {
 public:
  CommutationViolation(int i, int j, std::size_t x);
  int first, second;
  std::size_t point;
};

class MeasureViolation : public Error {
 public:
  MeasureViolation(int l, std::size_t y);
  int map;
  std::size_t point;
};

#define CUBEVAR_ERROR(Name)            \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

CUBEVAR_ERROR(WeightError);
CUBEVAR_ERROR(DimensionMismatch);
CUBEVAR_ERROR(FormatError);
CUBEVAR_ERROR(InvalidArgument);
CUBEVAR_ERROR(ResolutionTooCoarse);
CUBEVAR_ERROR(NotDifferentiable);
CUBEVAR_ERROR(ScaleOutOfRange);
CUBEVAR_ERROR(EmptySequence);
CUBEVAR_ERROR(InvalidPairs);
CUBEVAR_ERROR(ConfigError);

#undef CUBEVAR_ERROR

class InvalidN : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidR : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// ---------------------------------------------------------------------------
// cube indices

/// A vertex j of {0,1}^d; bit l holds j_{l+1}.
struct CubeIndex {
  unsigned bits = 0;
  int d = 1;

  bool operator[](int axis) const { return (bits >> axis) & 1u; }
  bool is_zero() const { return bits == 0; }
  friend bool operator==(const CubeIndex&, const CubeIndex&) = default;
};

/// Nonzero cube vertices in ascending bitmask order (2^d - 1 of them).
std::vector<CubeIndex> nonzero_indices(int d);

inline std::size_t tuple_size(int d) { return (std::size_t{1} << d) - 1; }

// ---------------------------------------------------------------------------
// exponents and norms

/// An L^p exponent. Stored as a rational num/den so that the dual exponent
/// 2^d/(2^d-1) is carried exactly; value() is the floating-point p.
class Exponent {
 public:
  static Exponent finite(double p);
  static Exponent rational(long num, long den);
  static Exponent infinity();
  /// q = 2^d / (2^d - 1), the conjugate of 2^d.
  static Exponent cube_dual(int d);
  /// 2^d.
  static Exponent cube(int d);

  bool is_infinite() const { return infinite_; }
  double value() const;
  double num() const { return num_; }
  double den() const { return den_; }
  std::string str() const;

 private:
  Exponent(double num, double den, bool infinite) : num_(num), den_(den), infinite_(infinite) {}
  double num_ = 1, den_ = 1;
  bool infinite_ = false;
};

struct MeasuredNorm {
  Exponent p;
  double value;
};

// ---------------------------------------------------------------------------
// finite measure-preserving systems

/// A finite probability space with d commuting measure-preserving maps.
class FiniteSystem {
 public:
  std::size_t size() const { return weights_.size(); }
  int d() const { return static_cast<int>(maps_.size()); }
  std::span<const double> weights() const { return weights_; }
  /// maps()[l][x] is the index of T_{l+1} x.
  const std::vector<std::vector<std::uint32_t>>& maps() const { return maps_; }

 private:
  friend FiniteSystem make_finite_system(std::size_t, std::vector<double>,
                                         std::vector<std::vector<std::uint32_t>>);
  std::vector<double> weights_;
  std::vector<std::vector<std::uint32_t>> maps_;
};

/// Validates weights, commutation (exact) and measure preservation (1e-12).
FiniteSystem make_finite_system(std::size_t size, std::vector<double> weights,
                                std::vector<std::vector<std::uint32_t>> maps);

/// X = Z_{m_1} x ... x Z_{m_k} with uniform measure and T_l x = x + shift_l.
FiniteSystem make_rotation_system(std::span<const std::size_t> moduli,
                                  const std::vector<std::vector<long>>& shifts);

/// A real function on X, indexed by point.
using SystemFunction = std::vector<double>;

/// 2^d - 1 functions on X, ordered like nonzero_indices(d).
struct SystemTuple {
  int d = 1;
  std::vector<SystemFunction> entries;

  const SystemFunction& operator[](CubeIndex j) const { return entries.at(j.bits - 1); }
};

void check_tuple(const FiniteSystem& sys, const SystemTuple& f);

// ---------------------------------------------------------------------------
// grids

using Index = std::array<long, kMaxDim>;

/// Geometry of a uniform grid. Cell m covers [origin + m h, origin + (m+1) h)
/// along each axis; unused axes have extent 1. Row-major, axis d-1 fastest.
struct GridSpec {
  int d = 1;
  std::array<std::size_t, kMaxDim> dims{1, 1, 1};
  double h = 1.0;
  std::array<double, kMaxDim> origin{0.0, 0.0, 0.0};

  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
  std::array<std::size_t, kMaxDim> strides() const { return {dims[1] * dims[2], dims[2], 1}; }
  bool contains(const Index& k) const;
  std::size_t flat(const Index& k) const;
  Index unflat(std::size_t flat) const;
  double cell_volume() const;
  /// Same d, dims, h, origin (exact comparison).
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cubic grid with `cells` per axis.
GridSpec cubic_grid(int d, std::size_t cells, double h, double origin = 0.0);

/// True when b's cells line up with a's (same d and h, origin offset is an
/// integer number of cells). Returns the offset through `cell_offset`.
bool aligned(const GridSpec& a, const GridSpec& b, Index* cell_offset = nullptr);

/// A real function that is constant on the cells of a uniform grid and zero
/// outside the grid box.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(GridSpec spec);
  GridFunction(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  int d() const { return spec_.d; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  /// Value on cell k, or 0 if k lies outside the grid.
  double at(const Index& k) const;
  /// Value at a physical point (zero extension outside the box).
  double evaluate(std::span<const double> x) const;

  GridFunction scaled(double c) const;
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator+(const GridFunction& a, const GridFunction& b);

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// 2^d - 1 grid functions on a common grid, indexed by nonzero cube vertex.
class FunctionTuple {
 public:
  FunctionTuple() = default;
  FunctionTuple(int d, std::vector<GridFunction> entries);

  int d() const { return d_; }
  const GridSpec& spec() const { return entries_.front().spec(); }
  const GridFunction& operator[](CubeIndex j) const { return entries_.at(j.bits - 1); }
  const GridFunction& entry(unsigned bits) const { return entries_.at(bits - 1); }
  const std::vector<GridFunction>& entries() const { return entries_; }

  /// Copy with entry `bits` replaced.
  FunctionTuple with_entry(unsigned bits, GridFunction f) const;

 private:
  int d_ = 0;
  std::vector<GridFunction> entries_;
};

// ---------------------------------------------------------------------------
// norms

/// Grid mode: (sum |v|^p h^d)^{1/p}; p = inf gives max |v|.
MeasuredNorm lp_norm(const GridFunction& f, Exponent p);
/// Probability mode: (sum |f(x)|^p mu(x))^{1/p}.
MeasuredNorm lp_norm(std::span<const double> f, Exponent p, const FiniteSystem& sys);
/// Grid-mode norm of a - b without materialising the difference.
double lp_distance(const GridFunction& a, const GridFunction& b, Exponent p);
double lp_distance(std::span<const double> a, std::span<const double> b, Exponent p,
                   const FiniteSystem& sys);

/// Product over the tuple of ||F_j||_{2^d}.
double product_of_norms(const FunctionTuple& F, Exponent p);
/// Product over the tuple of ||f_j||_inf.
double product_of_sup_norms(const SystemTuple& f);

// ---------------------------------------------------------------------------
// random numbers

/// Per-stream generator derived from (seed, stream) so that results do not
/// depend on scheduling.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);
/// Uniform double in [0,1) built from the top 53 bits (portable across
/// standard libraries, unlike std::uniform_real_distribution).
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
/// Uniform integer in [lo, hi].
long uniform_int(std::mt19937_64& rng, long lo, long hi);

}  // namespace cubevar
