#include "cubevar/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cubevar {

CommutationViolation::CommutationViolation(int i, int j, std::size_t x)
    : Error("maps " + std::to_string(i) + " and " + std::to_string(j) +
            " do not commute at point " + std::to_string(x)),
      first(i),
      second(j),
      point(x) {}

MeasureViolation::MeasureViolation(int l, std::size_t y)
    : Error("map " + std::to_string(l) + " does not preserve the measure at point " +
            std::to_string(y)),
      map(l),
      point(y) {}

std::vector<CubeIndex> nonzero_indices(int d) {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("dimension must be in [1,3]");
  std::vector<CubeIndex> out;
  for (unsigned b = 1; b < (1u << d); ++b) out.push_back({b, d});
  return out;
}

// ---------------------------------------------------------------------------

Exponent Exponent::finite(double p) {
  if (std::isinf(p)) return infinity();
  if (!(p >= 1.0)) throw InvalidArgument("exponent must be >= 1");
  return Exponent(p, 1.0, false);
}

Exponent Exponent::rational(long num, long den) {
  if (den <= 0 || num < den) throw InvalidArgument("exponent must be >= 1");
  return Exponent(static_cast<double>(num), static_cast<double>(den), false);
}

Exponent Exponent::infinity() { return Exponent(1.0, 0.0, true); }

Exponent Exponent::cube_dual(int d) { return rational(1L << d, (1L << d) - 1); }

Exponent Exponent::cube(int d) { return rational(1L << d, 1); }

double Exponent::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : num_ / den_;
}

std::string Exponent::str() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  if (den_ == 1.0)
    os << num_;
  else
    os << num_ << "/" << den_;
  return os.str();
}

// ---------------------------------------------------------------------------

FiniteSystem make_finite_system(std::size_t size, std::vector<double> weights,
                                std::vector<std::vector<std::uint32_t>> maps) {
  if (size < 1) throw WeightError("system must have at least one point");
  if (weights.size() != size) throw WeightError("weights length differs from size");
  if (maps.empty() || maps.size() > kMaxDim) throw InvalidArgument("need 1 to 3 maps");
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw WeightError("weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw WeightError("weights do not sum to 1");
  for (const auto& m : maps) {
    if (m.size() != size) throw InvalidArgument("map length differs from size");
    for (auto y : m)
      if (y >= size) throw InvalidArgument("map value out of range");
  }
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (std::size_t j = i + 1; j < maps.size(); ++j)
      for (std::size_t x = 0; x < size; ++x)
        if (maps[i][maps[j][x]] != maps[j][maps[i][x]])
          throw CommutationViolation(static_cast<int>(i), static_cast<int>(j), x);
  std::vector<double> pre(size);
  for (std::size_t l = 0; l < maps.size(); ++l) {
    std::fill(pre.begin(), pre.end(), 0.0);
    for (std::size_t x = 0; x < size; ++x) pre[maps[l][x]] += weights[x];
    for (std::size_t y = 0; y < size; ++y)
      if (std::abs(pre[y] - weights[y]) > 1e-12) throw MeasureViolation(static_cast<int>(l), y);
  }
  FiniteSystem sys;
  sys.weights_ = std::move(weights);
  sys.maps_ = std::move(maps);
  return sys;
}

FiniteSystem make_rotation_system(std::span<const std::size_t> moduli,
                                  const std::vector<std::vector<long>>& shifts) {
  std::size_t size = 1;
  for (auto m : moduli) {
    if (m == 0) throw InvalidArgument("modulus must be positive");
    size *= m;
  }
  std::vector<std::vector<std::uint32_t>> maps;
  for (const auto& a : shifts) {
    if (a.size() != moduli.size()) throw InvalidArgument("shift length differs from moduli");
    std::vector<std::uint32_t> m(size);
    for (std::size_t x = 0; x < size; ++x) {
      // mixed-radix digits, first modulus slowest
      std::size_t rest = x, y = 0;
      std::vector<long> digit(moduli.size());
      for (std::size_t c = moduli.size(); c-- > 0;) {
        digit[c] = static_cast<long>(rest % moduli[c]);
        rest /= moduli[c];
      }
      for (std::size_t c = 0; c < moduli.size(); ++c) {
        const long mod = static_cast<long>(moduli[c]);
        const long v = ((digit[c] + a[c]) % mod + mod) % mod;
        y = y * moduli[c] + static_cast<std::size_t>(v);
      }
      m[x] = static_cast<std::uint32_t>(y);
    }
    maps.push_back(std::move(m));
  }
  std::vector<double> w(size, 1.0 / static_cast<double>(size));
  // uniform weights may miss 1 by a few ulps; renormalise the last entry
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  return make_finite_system(size, std::move(w), std::move(maps));
}

void check_tuple(const FiniteSystem& sys, const SystemTuple& f) {
  if (f.d != sys.d()) throw DimensionMismatch("tuple dimension differs from number of maps");
  if (f.entries.size() != tuple_size(f.d)) throw DimensionMismatch("tuple must have 2^d-1 entries");
  for (const auto& e : f.entries)
    if (e.size() != sys.size()) throw DimensionMismatch("function length differs from system size");
}

// ---------------------------------------------------------------------------

bool GridSpec::contains(const Index& k) const {
  for (int a = 0; a < kMaxDim; ++a)
    if (k[a] < 0 || k[a] >= static_cast<long>(dims[a])) return false;
  return true;
}

std::size_t GridSpec::flat(const Index& k) const {
  return (static_cast<std::size_t>(k[0]) * dims[1] + static_cast<std::size_t>(k[1])) * dims[2] +
         static_cast<std::size_t>(k[2]);
}

Index GridSpec::unflat(std::size_t i) const {
  Index k{};
  k[2] = static_cast<long>(i % dims[2]);
  i /= dims[2];
  k[1] = static_cast<long>(i % dims[1]);
  k[0] = static_cast<long>(i / dims[1]);
  return k;
}

double GridSpec::cell_volume() const { return std::pow(h, d); }

GridSpec cubic_grid(int d, std::size_t cells, double h, double origin) {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("dimension must be in [1,3]");
  GridSpec s;
  s.d = d;
  s.h = h;
  for (int a = 0; a < d; ++a) {
    s.dims[a] = cells;
    s.origin[a] = origin;
  }
  return s;
}

bool aligned(const GridSpec& a, const GridSpec& b, Index* cell_offset) {
  if (a.d != b.d || a.h != b.h) return false;
  Index off{};
  for (int l = 0; l < a.d; ++l) {
    const double cells = (b.origin[l] - a.origin[l]) / a.h;
    const double r = std::round(cells);
    if (std::abs(cells - r) > 1e-9) return false;
    off[l] = static_cast<long>(r);
  }
  if (cell_offset) *cell_offset = off;
  return true;
}

GridFunction::GridFunction(GridSpec spec) : spec_(spec), values_(spec.size(), 0.0) {}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  if (spec_.d < 1 || spec_.d > kMaxDim) throw DimensionMismatch("dimension must be in [1,3]");
  for (int a = spec_.d; a < kMaxDim; ++a)
    if (spec_.dims[a] != 1) throw DimensionMismatch("unused axes must have extent 1");
  if (!(spec_.h > 0.0)) throw InvalidArgument("cell width must be positive");
  if (values_.size() != spec_.size()) throw DimensionMismatch("values length differs from dims");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("grid values must be finite");
}

double GridFunction::at(const Index& k) const {
  return spec_.contains(k) ? values_[spec_.flat(k)] : 0.0;
}

double GridFunction::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != spec_.d) throw DimensionMismatch("point dimension");
  Index k{};
  for (int a = 0; a < spec_.d; ++a) k[a] = static_cast<long>(std::floor((x[a] - spec_.origin[a]) / spec_.h));
  return at(k);
}

GridFunction GridFunction::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return GridFunction(spec_, std::move(v));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec_ == b.spec_)) throw DimensionMismatch("grid mismatch in difference");
  std::vector<double> v(a.values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] - b.values_[i];
  return GridFunction(a.spec_, std::move(v));
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec_ == b.spec_)) throw DimensionMismatch("grid mismatch in sum");
  std::vector<double> v(a.values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] + b.values_[i];
  return GridFunction(a.spec_, std::move(v));
}

FunctionTuple::FunctionTuple(int d, std::vector<GridFunction> entries)
    : d_(d), entries_(std::move(entries)) {
  if (d < 1 || d > kMaxDim) throw DimensionMismatch("dimension must be in [1,3]");
  if (entries_.size() != tuple_size(d)) throw DimensionMismatch("tuple must have 2^d-1 entries");
  for (const auto& e : entries_) {
    if (e.d() != d) throw DimensionMismatch("tuple entry has wrong dimension");
    if (!(e.spec() == entries_.front().spec())) throw DimensionMismatch("tuple entries must share a grid");
  }
}

FunctionTuple FunctionTuple::with_entry(unsigned bits, GridFunction f) const {
  auto e = entries_;
  e.at(bits - 1) = std::move(f);
  return FunctionTuple(d_, std::move(e));
}

// ---------------------------------------------------------------------------

namespace {

double finish(double sum, double p) { return std::pow(sum, 1.0 / p); }

}  // namespace

MeasuredNorm lp_norm(const GridFunction& f, Exponent p) {
  auto v = f.values();
  if (p.is_infinite()) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return {p, m};
  }
  const double pv = p.value();
  double s = 0;
  for (double x : v) s += std::pow(std::abs(x), pv);
  return {p, finish(s * f.spec().cell_volume(), pv)};
}

MeasuredNorm lp_norm(std::span<const double> f, Exponent p, const FiniteSystem& sys) {
  if (f.size() != sys.size()) throw DimensionMismatch("function length differs from system size");
  auto w = sys.weights();
  if (p.is_infinite()) {
    double m = 0;
    for (std::size_t x = 0; x < f.size(); ++x)
      if (w[x] > 0) m = std::max(m, std::abs(f[x]));
    return {p, m};
  }
  const double pv = p.value();
  double s = 0;
  for (std::size_t x = 0; x < f.size(); ++x) s += std::pow(std::abs(f[x]), pv) * w[x];
  return {p, finish(s, pv)};
}

double lp_distance(const GridFunction& a, const GridFunction& b, Exponent p) {
  if (!(a.spec() == b.spec())) throw DimensionMismatch("grid mismatch in distance");
  auto u = a.values(), v = b.values();
  if (p.is_infinite()) {
    double m = 0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
    return m;
  }
  const double pv = p.value();
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i] - v[i]), pv);
  return finish(s * a.spec().cell_volume(), pv);
}

double lp_distance(std::span<const double> a, std::span<const double> b, Exponent p,
                   const FiniteSystem& sys) {
  if (a.size() != sys.size() || b.size() != sys.size())
    throw DimensionMismatch("function length differs from system size");
  auto w = sys.weights();
  if (p.is_infinite()) {
    double m = 0;
    for (std::size_t x = 0; x < a.size(); ++x)
      if (w[x] > 0) m = std::max(m, std::abs(a[x] - b[x]));
    return m;
  }
  const double pv = p.value();
  double s = 0;
  for (std::size_t x = 0; x < a.size(); ++x) s += std::pow(std::abs(a[x] - b[x]), pv) * w[x];
  return finish(s, pv);
}

double product_of_norms(const FunctionTuple& F, Exponent p) {
  double prod = 1;
  for (const auto& e : F.entries()) prod *= lp_norm(e, p).value;
  return prod;
}

double product_of_sup_norms(const SystemTuple& f) {
  double prod = 1;
  for (const auto& e : f.entries) {
    double m = 0;
    for (double v : e) m = std::max(m, std::abs(v));
    prod *= m;
  }
  return prod;
}

// ---------------------------------------------------------------------------

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

long uniform_int(std::mt19937_64& rng, long lo, long hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return lo + static_cast<long>(x % span);
}

}  // namespace cubevar
