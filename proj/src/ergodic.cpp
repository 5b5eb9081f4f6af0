#include "cubevar/ergodic.hpp"

#include <array>
#include <cmath>

#include "cubevar/analytic.hpp"

namespace cubevar {

IterateTable::IterateTable(const FiniteSystem& sys, long n) : n_(n), size_(sys.size()) {
  if (n < 1) throw InvalidN("n must be >= 1");
  for (const auto& map : sys.maps()) {
    std::vector<std::uint32_t> t(static_cast<std::size_t>(n) * size_);
    for (std::size_t x = 0; x < size_; ++x) t[x] = static_cast<std::uint32_t>(x);
    for (long i = 1; i < n; ++i)
      for (std::size_t x = 0; x < size_; ++x)
        t[static_cast<std::size_t>(i) * size_ + x] = map[t[static_cast<std::size_t>(i - 1) * size_ + x]];
    table_.push_back(std::move(t));
  }
}

SystemFunction cubic_average(const FiniteSystem& sys, const SystemTuple& f, long n) {
  if (n < 1) throw InvalidN("n must be >= 1");
  return cubic_average(sys, f, n, IterateTable(sys, n));
}

SystemFunction cubic_average(const FiniteSystem& sys, const SystemTuple& f, long n,
                             const IterateTable& table) {
  if (n < 1) throw InvalidN("n must be >= 1");
  if (table.length() < n) throw InvalidArgument("iterate table too short");
  check_tuple(sys, f);
  const int d = f.d;
  const unsigned J = (1u << d) - 1;
  const double norm = 1.0 / std::pow(static_cast<double>(n), d);
  SystemFunction out(sys.size());
  std::array<std::uint32_t, 8> pt{};
  std::array<long, kMaxDim> i{};
  for (std::size_t x = 0; x < sys.size(); ++x) {
    double acc = 0.0;
    i.fill(0);
    pt[0] = static_cast<std::uint32_t>(x);
    while (true) {
      double prod = 1.0;
      for (unsigned b = 1; b <= J; ++b) {
        const int top = 31 - __builtin_clz(b);
        pt[b] = table(top, i[static_cast<std::size_t>(top)], pt[b ^ (1u << top)]);
        prod *= f.entries[b - 1][pt[b]];
      }
      acc += prod;
      // lexicographic odometer, last axis fastest
      int l = d - 1;
      while (l >= 0 && ++i[static_cast<std::size_t>(l)] == n) i[static_cast<std::size_t>(l--)] = 0;
      if (l < 0) break;
    }
    out[x] = acc * norm;
  }
  return out;
}

SystemSequence cubic_average_sequence(const FiniteSystem& sys, const SystemTuple& f,
                                      std::span<const long> ns) {
  SystemSequence seq;
  if (ns.empty()) return seq;
  long nmax = 0;
  for (std::size_t a = 0; a < ns.size(); ++a) {
    if (ns[a] < 1) throw InvalidN("n must be >= 1");
    if (a > 0 && ns[a] <= ns[a - 1]) throw InvalidArgument("indices must be strictly increasing");
    nmax = std::max(nmax, ns[a]);
  }
  const IterateTable table(sys, nmax);
  for (long n : ns) {
    seq.indices.push_back(n);
    seq.frames.push_back(cubic_average(sys, f, n, table));
  }
  return seq;
}

GridFunction discrete_cube_average(const FunctionTuple& F, long n) {
  if (n < 1) throw InvalidN("n must be >= 1");
  const GridSpec& in = F.spec();
  if (in.h != 1.0) throw InvalidArgument("discrete averages need unit cells");
  for (int l = 0; l < in.d; ++l)
    if (in.origin[l] != std::floor(in.origin[l])) throw InvalidArgument("origin must be integral");
  const int d = F.d();
  GridSpec out = in;
  if (d == 1) {
    out.dims[0] = in.dims[0] + static_cast<std::size_t>(n - 1);
    out.origin[0] = in.origin[0] - static_cast<double>(n - 1);
  }
  Index off{};
  aligned(in, out, &off);
  const auto js = nonzero_indices(d);
  const double norm = 1.0 / std::pow(static_cast<double>(n), d);
  std::vector<double> v(out.size());
  std::array<long, kMaxDim> count{1, 1, 1};
  for (int l = 0; l < d; ++l) count[l] = n;
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const Index k = out.unflat(flat);
    double acc = 0.0;
    for (long a = 0; a < count[0]; ++a)
      for (long b = 0; b < count[1]; ++b)
        for (long c = 0; c < count[2]; ++c) {
          const std::array<long, kMaxDim> i{a, b, c};
          double prod = 1.0;
          for (const auto& j : js) {
            Index p{};
            for (int l = 0; l < d; ++l) p[l] = k[l] + off[l] + (j[l] ? i[l] : 0);
            prod *= F[j].at(p);
            if (prod == 0.0) break;
          }
          acc += prod;
        }
    v[flat] = acc * norm;
  }
  return GridFunction(out, std::move(v));
}

FunctionTuple trajectory_lift(const FiniteSystem& sys, const SystemTuple& f, std::size_t x, long N) {
  if (N < 1) throw InvalidN("N must be >= 1");
  check_tuple(sys, f);
  if (x >= sys.size()) throw InvalidArgument("point out of range");
  const int d = f.d;
  const IterateTable table(sys, 2 * N);
  const GridSpec spec = cubic_grid(d, static_cast<std::size_t>(2 * N), 1.0, 0.0);
  std::vector<std::vector<double>> vals(tuple_size(d), std::vector<double>(spec.size()));
  for (std::size_t flat = 0; flat < spec.size(); ++flat) {
    const Index k = spec.unflat(flat);
    std::uint32_t y = static_cast<std::uint32_t>(x);
    for (int l = 0; l < d; ++l) y = table(l, k[l], y);
    for (std::size_t e = 0; e < vals.size(); ++e) vals[e][flat] = f.entries[e][y];
  }
  std::vector<GridFunction> entries;
  for (auto& v : vals) entries.emplace_back(spec, std::move(v));
  return FunctionTuple(d, std::move(entries));
}

FunctionTuple floor_lift(const FunctionTuple& F, int subdivision) {
  if (subdivision < 1) throw InvalidArgument("subdivision must be >= 1");
  const GridSpec& in = F.spec();
  GridSpec out = in;
  out.h = in.h / subdivision;
  for (int l = 0; l < in.d; ++l) out.dims[l] = in.dims[l] * static_cast<std::size_t>(subdivision);
  std::vector<GridFunction> entries;
  for (const auto& e : F.entries()) {
    std::vector<double> v(out.size());
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
      Index k = out.unflat(flat);
      for (int l = 0; l < in.d; ++l) k[l] /= subdivision;
      v[flat] = e.at(k);
    }
    entries.emplace_back(out, std::move(v));
  }
  return FunctionTuple(F.d(), std::move(entries));
}

namespace {

constexpr std::array<double, 10> kGaussX = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
    -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
    0.8650633666889845,  0.9739065285171717};
constexpr std::array<double, 10> kGaussW = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
    0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};

}  // namespace

double lifted_difference_norm(const FunctionTuple& F_int, long n, long m, Exponent q) {
  if (n < 1 || m < 1) throw InvalidN("n and m must be >= 1");
  if (q.is_infinite()) throw InvalidArgument("finite exponent required");
  const GridSpec& in = F_int.spec();
  if (in.h != 1.0) throw InvalidArgument("integer tuple must have unit cells");
  const int d = F_int.d();
  const GridSpec out = average_output_grid(in, 0, std::max(n, m));

  // corner evaluations: offset t_l in {0,1} per axis
  const unsigned corners = 1u << d;
  std::vector<GridFunction> diff;
  for (unsigned e = 0; e < corners; ++e) {
    AverageOptions opt;
    opt.output = out;
    for (int l = 0; l < d; ++l) opt.offset.t[l] = ((e >> l) & 1u) ? 1.0 : 0.0;
    diff.push_back(box_average(F_int, static_cast<double>(n), opt) -
                   box_average(F_int, static_cast<double>(m), opt));
  }

  const int panels = d == 3 ? 2 : 4;
  std::vector<double> node, weight;
  for (int p = 0; p < panels; ++p)
    for (std::size_t g = 0; g < kGaussX.size(); ++g) {
      node.push_back((p + 0.5 + 0.5 * kGaussX[g]) / panels);
      weight.push_back(0.5 * kGaussW[g] / panels);
    }
  const std::size_t P = node.size();
  std::array<std::size_t, kMaxDim> count{1, 1, 1};
  for (int l = 0; l < d; ++l) count[l] = P;

  const double qv = q.value();
  double total = 0.0;
  std::vector<double> c(corners);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    bool any = false;
    for (unsigned e = 0; e < corners; ++e) {
      c[e] = diff[e][flat];
      any = any || c[e] != 0.0;
    }
    if (!any) continue;
    double cell = 0.0;
    for (std::size_t a = 0; a < count[0]; ++a)
      for (std::size_t b = 0; b < count[1]; ++b)
        for (std::size_t g = 0; g < count[2]; ++g) {
          const std::array<std::size_t, kMaxDim> ix{a, b, g};
          double w = 1.0;
          std::array<double, kMaxDim> t{};
          for (int l = 0; l < d; ++l) {
            t[l] = node[ix[l]];
            w *= weight[ix[l]];
          }
          double v = 0.0;
          for (unsigned e = 0; e < corners; ++e) {
            double basis = 1.0;
            for (int l = 0; l < d; ++l) basis *= ((e >> l) & 1u) ? t[l] : 1.0 - t[l];
            v += c[e] * basis;
          }
          cell += w * std::pow(std::abs(v), qv);
        }
    total += cell;
  }
  return std::pow(total, 1.0 / qv);
}

}  // namespace cubevar
