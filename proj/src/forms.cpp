#include "cubevar/forms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

namespace cubevar {

Index Kernel::first_shift() const {
  Index s{};
  const auto& g = grid.spec();
  for (int l = 0; l < g.d; ++l) s[l] = static_cast<long>(std::lround(g.origin[l] / g.h + 0.5));
  return s;
}

namespace {

double box_extent(const GridSpec& box) {
  double e = 0.0;
  for (int l = 0; l < box.d; ++l) e = std::max(e, static_cast<double>(box.dims[l]) * box.h);
  return e;
}

void check_scale(const Profile& p, double r, const GridSpec& box) {
  auto [lo, hi] = p.support();
  const double len = (hi - lo) * r;
  if (len < 2.0 * box.h)
    throw ScaleOutOfRange("scale " + std::to_string(r) + " is below the grid resolution");
  if (len > box_extent(box))
    throw ScaleOutOfRange("scale " + std::to_string(r) + " exceeds the grid box");
}

// Empty kernel grid spanning shifts [first, last] on every axis.
GridFunction kernel_grid(int d, double h, long first, long last) {
  GridSpec s;
  s.d = d;
  s.h = h;
  for (int l = 0; l < d; ++l) {
    s.dims[l] = static_cast<std::size_t>(last - first + 1);
    s.origin[l] = (static_cast<double>(first) - 0.5) * h;
  }
  return GridFunction(s);
}

// values[i] += c * prod_l axes[l](i_l) / h^d
void add_tensor(std::vector<double>& values, const GridSpec& spec, long first,
                const std::vector<const AxisWeights*>& axes, double c) {
  const double inv_vol = 1.0 / spec.cell_volume();
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    const Index k = spec.unflat(flat);
    double p = c * inv_vol;
    for (int l = 0; l < spec.d && p != 0.0; ++l) p *= axes[static_cast<std::size_t>(l)]->at(first + k[l]);
    values[flat] += p;
  }
}

struct Span {
  long first = 0, last = -1;
  void include(const AxisWeights& w) {
    if (last < first) {
      first = w.first;
      last = w.last();
    } else {
      first = std::min(first, w.first);
      last = std::max(last, w.last());
    }
  }
};

}  // namespace

Kernel build_k1(const Profile& phi, std::span<const double> signs, int k_lo, int k_hi, const GridSpec& box) {
  if (k_hi <= k_lo) throw InvalidArgument("need k_lo < k_hi");
  if (signs.size() != static_cast<std::size_t>(k_hi - k_lo))
    throw InvalidArgument("need one sign per scale k_lo+1 .. k_hi");
  for (double e : signs)
    if (!(std::abs(e) <= 1.0)) throw InvalidArgument("signs must satisfy |eps| <= 1");
  const double h = box.h;
  std::vector<AxisWeights> w;  // w[k - k_lo] = weights of phi_{2^k}
  Span span;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double r = std::ldexp(1.0, k);
    check_scale(phi, r, box);
    w.push_back(cell_weights(phi, r, h, 0.5));
    span.include(w.back());
  }
  GridFunction g = kernel_grid(box.d, h, span.first, span.last);
  std::vector<double> v(g.values().begin(), g.values().end());
  for (int k = k_lo + 1; k <= k_hi; ++k) {
    const double eps = signs[static_cast<std::size_t>(k - k_lo - 1)];
    if (eps == 0.0) continue;
    std::vector<const AxisWeights*> coarse(box.d, &w[static_cast<std::size_t>(k - k_lo - 1)]);
    std::vector<const AxisWeights*> fine(box.d, &w[static_cast<std::size_t>(k - k_lo)]);
    add_tensor(v, g.spec(), span.first, coarse, eps);
    add_tensor(v, g.spec(), span.first, fine, -eps);
  }
  Kernel K{GridFunction(g.spec(), std::move(v)), {}};
  K.provenance.kind = KernelKind::k1;
  K.provenance.signs.assign(signs.begin(), signs.end());
  K.provenance.k_lo = k_lo;
  K.provenance.k_hi = k_hi;
  K.provenance.delta = phi.delta();
  return K;
}

GridFunction k1_psi_decomposition(const Profile& phi, std::span<const double> signs, int k_lo, int k_hi,
                                  const GridSpec& box) {
  if (k_hi <= k_lo || signs.size() != static_cast<std::size_t>(k_hi - k_lo))
    throw InvalidArgument("need one sign per scale k_lo+1 .. k_hi");
  const Profile psi = make_psi(phi);
  const double h = box.h;
  std::vector<AxisWeights> wphi, wpsi;
  Span span;
  for (int k = k_lo + 1; k <= k_hi; ++k) {
    const double r = std::ldexp(1.0, k);
    wphi.push_back(cell_weights(phi, r, h, 0.5));
    wpsi.push_back(cell_weights(psi, r, h, 0.5));
    span.include(wphi.back());
    span.include(wpsi.back());
  }
  // match the grid build_k1 produces (it also covers phi_{2^{k_lo}})
  span.include(cell_weights(phi, std::ldexp(1.0, k_lo), h, 0.5));
  GridFunction g = kernel_grid(box.d, h, span.first, span.last);
  std::vector<double> v(g.values().begin(), g.values().end());
  for (const auto& j : nonzero_indices(box.d))
    for (int k = k_lo + 1; k <= k_hi; ++k) {
      const auto a = static_cast<std::size_t>(k - k_lo - 1);
      std::vector<const AxisWeights*> axes;
      for (int l = 0; l < box.d; ++l) axes.push_back(j[l] ? &wpsi[a] : &wphi[a]);
      add_tensor(v, g.spec(), span.first, axes, signs[a]);
    }
  return GridFunction(g.spec(), std::move(v));
}

Kernel build_k2(const Profile& phi, const Profile& theta, std::span<const double> signs,
                std::span<const int> scale_set, double r, const GridSpec& box) {
  if (!(r >= 1.0 && r <= 2.0)) throw InvalidArgument("K2 needs r in [1,2]");
  if (signs.size() != scale_set.size()) throw InvalidArgument("need one sign per scale");
  if (theta.kind() != ProfileKind::derived_theta) throw InvalidArgument("theta profile required");
  for (double e : signs)
    if (!(std::abs(e) <= 1.0)) throw InvalidArgument("signs must satisfy |eps| <= 1");
  const double h = box.h;
  std::vector<AxisWeights> wphi, wtheta;
  Span span;
  for (int j : scale_set) {
    const double s = std::ldexp(r, j);
    check_scale(phi, s, box);
    wphi.push_back(cell_weights(phi, s, h, 0.5));
    wtheta.push_back(cell_weights(theta, s, h, 0.5));
    span.include(wphi.back());
    span.include(wtheta.back());
  }
  if (scale_set.empty()) span = Span{0, 0};
  GridFunction g = kernel_grid(box.d, h, span.first, span.last);
  std::vector<double> v(g.values().begin(), g.values().end());
  for (std::size_t a = 0; a < scale_set.size(); ++a)
    for (int i = 0; i < box.d; ++i) {
      std::vector<const AxisWeights*> axes;
      for (int l = 0; l < box.d; ++l) axes.push_back(l == i ? &wtheta[a] : &wphi[a]);
      add_tensor(v, g.spec(), span.first, axes, signs[a]);
    }
  Kernel K{GridFunction(g.spec(), std::move(v)), {}};
  K.provenance.kind = KernelKind::k2;
  K.provenance.signs.assign(signs.begin(), signs.end());
  K.provenance.scale_set.assign(scale_set.begin(), scale_set.end());
  K.provenance.r = r;
  K.provenance.delta = phi.delta();
  return K;
}

double kernel_mass(const Kernel& K) {
  double s = 0.0;
  for (double v : K.grid.values()) s += v;
  return s * K.grid.spec().cell_volume();
}

double evaluate_lambda(const Kernel& K, const FunctionTuple& F, const GridFunction& F0) {
  const int d = F.d();
  if (F0.d() != d || K.grid.d() != d) throw DimensionMismatch("dimension mismatch in Lambda");
  if (!(F0.spec() == F.spec())) throw DimensionMismatch("F0 must share the tuple grid");
  if (K.grid.spec().h != F.spec().h) throw DimensionMismatch("kernel and functions need the same h");
  const auto js = nonzero_indices(d);
  const GridSpec& xs = F0.spec();
  const GridSpec& ks = K.grid.spec();
  const Index first = K.first_shift();
  const double vol = xs.cell_volume();
  double total = 0.0;
  for (std::size_t xf = 0; xf < xs.size(); ++xf) {
    const double f0 = F0[xf];
    if (f0 == 0.0) continue;
    const Index x = xs.unflat(xf);
    double inner = 0.0;
    for (std::size_t sf = 0; sf < ks.size(); ++sf) {
      const double kv = K.grid[sf];
      if (kv == 0.0) continue;
      const Index m = ks.unflat(sf);
      double prod = kv;
      for (const auto& j : js) {
        Index p{};
        for (int l = 0; l < d; ++l) p[l] = x[l] + (j[l] ? first[l] + m[l] : 0);
        prod *= F[j].at(p);
        if (prod == 0.0) break;
      }
      inner += prod;
    }
    // kernel cell mass = value * h^d
    total += f0 * inner * vol;
  }
  return total * vol;
}

double pairing(const GridFunction& g, const GridFunction& F0) {
  if (!(g.spec() == F0.spec())) throw DimensionMismatch("pairing needs a common grid");
  double s = 0.0;
  for (std::size_t i = 0; i < g.values().size(); ++i) s += g[i] * F0[i];
  return s * g.spec().cell_volume();
}

// ---------------------------------------------------------------------------

namespace {

using cplx = std::complex<double>;

// DFT along one axis of a row-major array with extents `shape`; axis length
// becomes `n_out`. Sample i sits at s = (first + i) h, output m at
// xi = (m - n_out/2) / (n_out h).
std::vector<cplx> dft_axis(const std::vector<cplx>& in, std::array<std::size_t, kMaxDim>& shape, int axis,
                           std::size_t n_out, long first, double h) {
  const std::size_t n_in = shape[axis];
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= shape[a];
  for (int a = axis + 1; a < kMaxDim; ++a) inner *= shape[a];
  std::vector<cplx> tw(n_in * n_out);
  for (std::size_t m = 0; m < n_out; ++m) {
    const double xi = (static_cast<double>(m) - static_cast<double>(n_out / 2)) / (static_cast<double>(n_out) * h);
    for (std::size_t i = 0; i < n_in; ++i) {
      const double s = (static_cast<double>(first) + static_cast<double>(i)) * h;
      tw[m * n_in + i] = std::polar(1.0, -2.0 * std::numbers::pi * s * xi);
    }
  }
  std::vector<cplx> out(outer * n_out * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t m = 0; m < n_out; ++m)
      for (std::size_t in_i = 0; in_i < inner; ++in_i) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < n_in; ++i) acc += tw[m * n_in + i] * in[(o * n_in + i) * inner + in_i];
        out[(o * n_out + m) * inner + in_i] = acc;
      }
  shape[axis] = n_out;
  return out;
}

void enumerate_alphas(int d, int max_order, std::vector<std::array<int, kMaxDim>>& out) {
  std::array<int, kMaxDim> a{};
  for (a[0] = 0; a[0] <= max_order; ++a[0])
    for (a[1] = 0; a[1] <= (d > 1 ? max_order : 0); ++a[1])
      for (a[2] = 0; a[2] <= (d > 2 ? max_order : 0); ++a[2])
        if (a[0] + a[1] + a[2] <= max_order) out.push_back(a);
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x[0] + x[1] + x[2] < y[0] + y[1] + y[2];
  });
}

}  // namespace

std::vector<SymbolShell> symbol_decay_check(const Kernel& K, int max_order, int padding) {
  if (max_order < 0 || max_order > 2) throw InvalidArgument("max_order must be in [0,2]");
  if (padding < 1) throw InvalidArgument("padding must be >= 1");
  const GridSpec& ks = K.grid.spec();
  const int d = ks.d;
  const double h = ks.h;
  const Index first = K.first_shift();
  std::array<std::size_t, kMaxDim> n_out{1, 1, 1};
  double xi_min = std::numeric_limits<double>::infinity();
  for (int l = 0; l < d; ++l) {
    n_out[l] = ks.dims[l] * static_cast<std::size_t>(padding);
    xi_min = std::min(xi_min, 1.0 / (static_cast<double>(n_out[l]) * h));
  }
  std::vector<std::array<int, kMaxDim>> alphas;
  enumerate_alphas(d, max_order, alphas);

  std::vector<SymbolShell> rows;
  for (const auto& alpha : alphas) {
    std::vector<cplx> data(ks.size());
    for (std::size_t f = 0; f < ks.size(); ++f) {
      const Index m = ks.unflat(f);
      cplx v = K.grid[f] * std::pow(h, d);
      for (int l = 0; l < d; ++l) {
        const double s = static_cast<double>(first[l] + m[l]) * h;
        for (int p = 0; p < alpha[l]; ++p) v *= cplx(0.0, -2.0 * std::numbers::pi * s);
      }
      data[f] = v;
    }
    std::array<std::size_t, kMaxDim> shape = ks.dims;
    for (int l = 0; l < d; ++l) data = dft_axis(data, shape, l, n_out[l], first[l], h);

    const int order = alpha[0] + alpha[1] + alpha[2];
    std::map<int, double> shell_max;
    GridSpec fs;
    fs.d = d;
    fs.dims = shape;
    for (std::size_t f = 0; f < data.size(); ++f) {
      const Index m = fs.unflat(f);
      double r2 = 0.0;
      for (int l = 0; l < d; ++l) {
        const double xi = (static_cast<double>(m[l]) - static_cast<double>(n_out[l] / 2)) /
                          (static_cast<double>(n_out[l]) * h);
        r2 += xi * xi;
      }
      if (r2 == 0.0) continue;
      const double rad = std::sqrt(r2);
      const int shell = static_cast<int>(std::floor(std::log2(rad / xi_min) + 1e-12));
      const double val = std::pow(rad, order) * std::abs(data[f]);
      auto [it, inserted] = shell_max.emplace(shell, val);
      if (!inserted) it->second = std::max(it->second, val);
    }
    std::string a;
    for (int l = 0; l < d; ++l) a += (l ? "," : "") + std::to_string(alpha[l]);
    for (const auto& [shell, v] : shell_max) rows.push_back({shell, a, v});
  }
  return rows;
}

void write_symbol_csv(std::ostream& os, const std::vector<SymbolShell>& rows, bool header) {
  if (header) os << "shell_index,alpha,shell_max\n";
  os.precision(17);
  for (const auto& r : rows) os << r.shell << ",\"" << r.alpha << "\"," << r.shell_max << '\n';
}

// ---------------------------------------------------------------------------

GridFunction square_function(std::span<const GridFunction> family) {
  if (family.empty()) throw InvalidArgument("empty family");
  const GridSpec& spec = family.front().spec();
  std::vector<double> v(spec.size(), 0.0);
  for (const auto& f : family) {
    if (!(f.spec() == spec)) throw DimensionMismatch("family members must share a grid");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += f[i] * f[i];
  }
  for (double& x : v) x = std::sqrt(x);
  return GridFunction(spec, std::move(v));
}

KhintchineSample khintchine_sample(std::span<const GridFunction> family, std::size_t trials,
                                   std::uint64_t seed, Exponent q, std::size_t exhaustive_limit) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  KhintchineSample out;
  out.square_norm = lp_norm(square_function(family), q).value;
  const GridSpec& spec = family.front().spec();
  const std::size_t K = family.size();
  std::vector<double> sum(spec.size());
  auto signed_norm = [&](auto sign_of) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const double e = sign_of(k);
      auto v = family[k].values();
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += e * v[i];
    }
    return lp_norm(GridFunction(spec, sum), q).value;
  };
  double total = 0.0;
  if (K <= exhaustive_limit) {
    out.exhaustive = true;
    out.samples = std::size_t{1} << K;
    for (std::size_t mask = 0; mask < out.samples; ++mask)
      total += signed_norm([&](std::size_t k) { return ((mask >> k) & 1u) ? -1.0 : 1.0; });
  } else {
    out.samples = trials;
    std::vector<double> signs(K);
    for (std::size_t t = 0; t < trials; ++t) {
      auto rng = make_rng(seed, t);
      for (auto& e : signs) e = (rng() >> 63) ? -1.0 : 1.0;
      total += signed_norm([&](std::size_t k) { return signs[k]; });
    }
  }
  out.signed_mean = total / static_cast<double>(out.samples);
  out.ratio = out.square_norm > 0.0 ? out.signed_mean / out.square_norm : 0.0;
  return out;
}

}  // namespace cubevar
