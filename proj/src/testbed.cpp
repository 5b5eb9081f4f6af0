#include <algorithm>
#include <cmath>
#include <numeric>

#include "cubevar/harness.hpp"

namespace cubevar {

double RandomField::operator()(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& b : bumps) {
    double r2 = 0.0;
    for (int l = 0; l < d; ++l) {
      const double t = (x[l] - b.center[l]) / b.radius;
      r2 += t * t;
    }
    if (r2 < 1.0) v += b.amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
  }
  if (!step_values.empty()) {
    std::size_t flat = 0;
    for (int l = 0; l < d; ++l) {
      if (x[l] < lo[l] || x[l] >= hi[l]) return v;
      const auto c = static_cast<std::size_t>(std::floor((x[l] - lo[l]) / (hi[l] - lo[l]) * coarse));
      flat = flat * static_cast<std::size_t>(coarse) + std::min(c, static_cast<std::size_t>(coarse - 1));
    }
    v += step_values[flat];
  }
  return v;
}

RandomField random_field(std::mt19937_64& rng, int d, std::array<double, kMaxDim> lo,
                         std::array<double, kMaxDim> hi, const FieldOptions& opt) {
  RandomField f;
  f.d = d;
  f.lo = lo;
  f.hi = hi;
  double width = std::numeric_limits<double>::infinity();
  for (int l = 0; l < d; ++l) width = std::min(width, hi[l] - lo[l]);
  if (opt.bumps) {
    const long count = uniform_int(rng, 3, 6);
    for (long b = 0; b < count; ++b) {
      RandomField::Bump bump;
      bump.radius = uniform(rng, 0.15, 0.35) * width;
      for (int l = 0; l < d; ++l) bump.center[l] = uniform(rng, lo[l] + bump.radius, hi[l] - bump.radius);
      bump.amplitude = uniform(rng, 0.5, 1.5) * (uniform01(rng) < 0.5 ? -1.0 : 1.0);
      f.bumps.push_back(bump);
    }
  }
  if (opt.steps) {
    std::size_t cells = 1;
    for (int l = 0; l < d; ++l) cells *= static_cast<std::size_t>(f.coarse);
    f.step_values.resize(cells);
    for (double& s : f.step_values)
      s = uniform01(rng) < 0.5 ? 0.0 : uniform(rng, 0.5, 1.0) * (uniform01(rng) < 0.5 ? -1.0 : 1.0);
  }
  return f;
}

GridFunction sample_field(const RandomField& f, const GridSpec& spec) {
  if (spec.d != f.d) throw DimensionMismatch("field and grid dimensions differ");
  std::vector<double> v(spec.size());
  std::array<double, kMaxDim> x{};
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    const Index k = spec.unflat(flat);
    for (int l = 0; l < spec.d; ++l) x[l] = spec.origin[l] + (static_cast<double>(k[l]) + 0.5) * spec.h;
    v[flat] = f(x);
  }
  return GridFunction(spec, std::move(v));
}

std::vector<RandomField> random_fields(std::mt19937_64& rng, const GridSpec& spec, const FieldOptions& opt) {
  std::array<double, kMaxDim> lo{}, hi{};
  for (int l = 0; l < spec.d; ++l) {
    const double len = static_cast<double>(spec.dims[l]) * spec.h;
    lo[l] = spec.origin[l] + 0.25 * len;
    hi[l] = spec.origin[l] + 0.75 * len;
  }
  std::vector<RandomField> out;
  for (std::size_t e = 0; e < tuple_size(spec.d); ++e) out.push_back(random_field(rng, spec.d, lo, hi, opt));
  return out;
}

FunctionTuple sample_tuple(const std::vector<RandomField>& fields, const GridSpec& spec) {
  std::vector<GridFunction> entries;
  for (const auto& f : fields) entries.push_back(sample_field(f, spec));
  return FunctionTuple(spec.d, std::move(entries));
}

FunctionTuple random_tuple(std::mt19937_64& rng, const GridSpec& spec, const FieldOptions& opt) {
  return sample_tuple(random_fields(rng, spec, opt), spec);
}

FunctionTuple random_integer_tuple(std::mt19937_64& rng, int d, std::size_t L) {
  const GridSpec spec = cubic_grid(d, L, 1.0, 0.0);
  std::vector<GridFunction> entries;
  for (std::size_t e = 0; e < tuple_size(d); ++e) {
    std::vector<double> v(spec.size());
    for (double& x : v) x = uniform(rng, -1.0, 1.0);
    entries.emplace_back(spec, std::move(v));
  }
  return FunctionTuple(d, std::move(entries));
}

FiniteSystem random_torus_rotation(std::mt19937_64& rng, int d, std::size_t M) {
  std::vector<std::size_t> moduli(static_cast<std::size_t>(d), M);
  std::vector<std::vector<long>> shifts(static_cast<std::size_t>(d));
  for (auto& s : shifts)
    for (int c = 0; c < d; ++c) s.push_back(uniform_int(rng, 0, static_cast<long>(M) - 1));
  return make_rotation_system(moduli, shifts);
}

FiniteSystem random_system(std::mt19937_64& rng, int d, std::size_t max_size, SystemKind kind) {
  if (max_size < 2) throw InvalidArgument("system needs at least two points");
  if (kind == SystemKind::rotation) {
    std::vector<std::size_t> moduli;
    std::size_t size = 1;
    const long factors = uniform_int(rng, 1, 2);
    for (long c = 0; c < factors; ++c) {
      const long hi = static_cast<long>(max_size / size);
      if (hi < 2) break;
      const auto m = static_cast<std::size_t>(uniform_int(rng, 2, std::min(hi, 16L)));
      moduli.push_back(m);
      size *= m;
    }
    std::vector<std::vector<long>> shifts(static_cast<std::size_t>(d));
    for (auto& s : shifts)
      for (auto m : moduli) s.push_back(uniform_int(rng, 0, static_cast<long>(m) - 1));
    return make_rotation_system(moduli, shifts);
  }
  const auto size = static_cast<std::size_t>(uniform_int(rng, 2, static_cast<long>(max_size)));
  std::vector<std::uint32_t> sigma(size);
  std::iota(sigma.begin(), sigma.end(), 0u);
  for (std::size_t i = size - 1; i > 0; --i)
    std::swap(sigma[i], sigma[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(i)))]);
  // cycle weights
  std::vector<double> weights(size, 0.0);
  std::vector<bool> seen(size, false);
  double total = 0.0;
  for (std::size_t x = 0; x < size; ++x) {
    if (seen[x]) continue;
    std::vector<std::size_t> cycle;
    for (std::size_t y = x; !seen[y]; y = sigma[y]) {
      seen[y] = true;
      cycle.push_back(y);
    }
    const double w = uniform(rng, 0.2, 1.0);
    for (auto y : cycle) weights[y] = w;
    total += w * static_cast<double>(cycle.size());
  }
  for (double& w : weights) w /= total;
  std::vector<std::vector<std::uint32_t>> maps;
  for (int l = 0; l < d; ++l) {
    const long a = uniform_int(rng, 0, static_cast<long>(size) - 1);
    std::vector<std::uint32_t> m(size);
    for (std::size_t x = 0; x < size; ++x) {
      std::uint32_t y = static_cast<std::uint32_t>(x);
      for (long s = 0; s < a; ++s) y = sigma[y];
      m[x] = y;
    }
    maps.push_back(std::move(m));
  }
  return make_finite_system(size, std::move(weights), std::move(maps));
}

SystemTuple random_system_tuple(std::mt19937_64& rng, const FiniteSystem& sys) {
  SystemTuple f;
  f.d = sys.d();
  for (std::size_t e = 0; e < tuple_size(f.d); ++e) {
    SystemFunction v(sys.size());
    for (double& x : v) x = uniform(rng, -1.0, 1.0);
    f.entries.push_back(std::move(v));
  }
  return f;
}

}  // namespace cubevar
