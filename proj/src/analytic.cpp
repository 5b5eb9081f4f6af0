#include <algorithm>
#include <cmath>

#include "cubevar/analytic.hpp"

namespace cubevar {

AxisWeights cell_weights(const Profile& p, double r, double h, double t) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidR("scale r must be positive");
  auto [lo, hi] = p.support();
  // cell i covers s in [(i - t) h, (i + 1 - t) h)
  const long first = static_cast<long>(std::floor(lo * r / h + t)) - 1;
  const long last = static_cast<long>(std::floor(hi * r / h + t)) + 1;
  AxisWeights out;
  out.first = first;
  out.w.resize(static_cast<std::size_t>(last - first + 1));
  double prev = p.cumulative_scaled((first - t) * h, r);
  for (long i = first; i <= last; ++i) {
    const double next = p.cumulative_scaled((i + 1 - t) * h, r);
    out.w[static_cast<std::size_t>(i - first)] = next - prev;
    prev = next;
  }
  // trim exact zeros at both ends
  std::size_t a = 0, b = out.w.size();
  while (a < b && out.w[a] == 0.0) ++a;
  while (b > a && out.w[b - 1] == 0.0) --b;
  if (a == b) return {0, {0.0}};
  out.w = std::vector<double>(out.w.begin() + static_cast<long>(a), out.w.begin() + static_cast<long>(b));
  out.first += static_cast<long>(a);
  return out;
}

GridSpec average_output_grid(const GridSpec& in, long first, long last) {
  if (in.d >= 2) return in;
  // d = 1: out(k) is nonzero only if k + i hits [0, n) for some i in [first, last]
  GridSpec out = in;
  const long n = static_cast<long>(in.dims[0]);
  const long lo = -last, hi = n - 1 - first;
  out.dims[0] = static_cast<std::size_t>(std::max(1L, hi - lo + 1));
  out.origin[0] = in.origin[0] + static_cast<double>(lo) * in.h;
  return out;
}

namespace {

GridSpec resolve_output(const FunctionTuple& F, std::span<const AxisWeights> axes,
                        const std::optional<GridSpec>& output, Index& off) {
  const int d = F.d();
  if (static_cast<int>(axes.size()) != d) throw DimensionMismatch("need one weight set per axis");
  GridSpec out;
  if (output) {
    out = *output;
  } else {
    long first = axes[0].first, last = axes[0].last();
    out = average_output_grid(F.spec(), first, last);
  }
  // off = position of output cell 0 in input-cell coordinates
  if (!aligned(F.spec(), out, &off)) throw DimensionMismatch("output grid not aligned with input grid");
  return out;
}

template <int R>
inline double row_dot(const double* w, const std::array<const double*, 4>& rows, long lo, long hi) {
  double acc = 0.0;
  for (long i = lo; i <= hi; ++i) {
    double p = w[i];
    for (int r = 0; r < R; ++r) p *= rows[r][i];
    acc += p;
  }
  return acc;
}

template <int D>
void entangled_impl(const FunctionTuple& F, std::span<const AxisWeights> axes, const GridSpec& out,
                    const Index& off, std::vector<double>& result) {
  constexpr int J = (1 << D) - 1;
  constexpr int L = D - 1;  // contiguous axis
  constexpr int R = 1 << (D - 1);
  const GridSpec& in = F.spec();
  const auto stride = in.strides();
  std::array<long, kMaxDim> n{};
  for (int l = 0; l < kMaxDim; ++l) n[l] = static_cast<long>(in.dims[l]);

  std::array<unsigned, J> row_bits{}, scalar_bits{};
  int nr = 0, ns = 0;
  for (unsigned b = 1; b <= static_cast<unsigned>(J); ++b) {
    if ((b >> L) & 1u)
      row_bits[nr++] = b;
    else
      scalar_bits[ns++] = b;
  }
  std::array<const double*, J> data{};
  for (unsigned b = 1; b <= static_cast<unsigned>(J); ++b) data[b - 1] = F.entry(b).values().data();

  const double* wl = axes[L].w.data() - axes[L].first;
  const long wl_first = axes[L].first, wl_last = axes[L].last();

  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const Index k = out.unflat(flat);
    Index ks{};
    for (int l = 0; l < D; ++l) ks[l] = k[l] + off[l];
    double acc = 0.0;
    // every non-contiguous axis carries some factor with j_l = 0 when D >= 2
    bool inside = true;
    if constexpr (D >= 2)
      for (int l = 0; l < D; ++l)
        if (ks[l] < 0 || ks[l] >= n[l]) inside = false;
    const long lo = std::max(wl_first, -ks[L]);
    const long hi = std::min(wl_last, n[L] - 1 - ks[L]);
    if (!inside || lo > hi) {
      result[flat] = 0.0;
      continue;
    }

    auto accumulate = [&](const std::array<long, kMaxDim>& i, double wprod) {
      double sprod = wprod;
      for (int s = 0; s < ns; ++s) {
        const unsigned b = scalar_bits[s];
        std::size_t idx = static_cast<std::size_t>(ks[L]);
        for (int l = 0; l < L; ++l) idx += static_cast<std::size_t>(ks[l] + (((b >> l) & 1u) ? i[l] : 0)) * stride[l];
        sprod *= data[b - 1][idx];
        if (sprod == 0.0) return;
      }
      std::array<const double*, 4> rows{};
      for (int r = 0; r < nr; ++r) {
        const unsigned b = row_bits[r];
        long base = ks[L];
        for (int l = 0; l < L; ++l) base += (ks[l] + (((b >> l) & 1u) ? i[l] : 0)) * static_cast<long>(stride[l]);
        rows[r] = data[b - 1] + base;
      }
      acc += sprod * row_dot<R>(wl, rows, lo, hi);
    };

    if constexpr (D == 1) {
      accumulate({0, 0, 0}, 1.0);
    } else {
      // outer shifts must keep every shifted factor inside the grid
      std::array<long, kMaxDim> ilo{}, ihi{};
      for (int l = 0; l < L; ++l) {
        ilo[l] = std::max(axes[l].first, -ks[l]);
        ihi[l] = std::min(axes[l].last(), n[l] - 1 - ks[l]);
      }
      if constexpr (D == 2) {
        for (long i0 = ilo[0]; i0 <= ihi[0]; ++i0) {
          const double w0 = axes[0].w[static_cast<std::size_t>(i0 - axes[0].first)];
          if (w0 != 0.0) accumulate({i0, 0, 0}, w0);
        }
      } else {
        for (long i0 = ilo[0]; i0 <= ihi[0]; ++i0) {
          const double w0 = axes[0].w[static_cast<std::size_t>(i0 - axes[0].first)];
          if (w0 == 0.0) continue;
          for (long i1 = ilo[1]; i1 <= ihi[1]; ++i1) {
            const double w1 = axes[1].w[static_cast<std::size_t>(i1 - axes[1].first)];
            if (w1 != 0.0) accumulate({i0, i1, 0}, w0 * w1);
          }
        }
      }
    }
    result[flat] = acc;
  }
}

}  // namespace

GridFunction entangled_average(const FunctionTuple& F, std::span<const AxisWeights> axes,
                               const std::optional<GridSpec>& output) {
  Index off{};
  const GridSpec out = resolve_output(F, axes, output, off);
  std::vector<double> result(out.size(), 0.0);
  switch (F.d()) {
    case 1:
      entangled_impl<1>(F, axes, out, off, result);
      break;
    case 2:
      entangled_impl<2>(F, axes, out, off, result);
      break;
    case 3:
      entangled_impl<3>(F, axes, out, off, result);
      break;
    default:
      throw DimensionMismatch("dimension must be in [1,3]");
  }
  return GridFunction(out, std::move(result));
}

GridFunction entangled_average_reference(const FunctionTuple& F, std::span<const AxisWeights> axes,
                                         const std::optional<GridSpec>& output) {
  Index off{};
  const GridSpec out = resolve_output(F, axes, output, off);
  const int d = F.d();
  const auto js = nonzero_indices(d);
  std::vector<double> result(out.size(), 0.0);
  std::array<long, kMaxDim> first{}, count{1, 1, 1};
  for (int l = 0; l < d; ++l) {
    first[l] = axes[l].first;
    count[l] = static_cast<long>(axes[l].w.size());
  }
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const Index k = out.unflat(flat);
    double acc = 0.0;
    for (long a = 0; a < count[0]; ++a)
      for (long b = 0; b < count[1]; ++b)
        for (long c = 0; c < count[2]; ++c) {
          const std::array<long, kMaxDim> i{first[0] + a, first[1] + b, first[2] + c};
          double w = 1.0;
          for (int l = 0; l < d; ++l) w *= axes[l].w[static_cast<std::size_t>(i[l] - first[l])];
          double prod = w;
          for (const auto& j : js) {
            Index p{};
            for (int l = 0; l < d; ++l) p[l] = k[l] + off[l] + (j[l] ? i[l] : 0);
            prod *= F[j].at(p);
          }
          acc += prod;
        }
    result[flat] = acc;
  }
  return GridFunction(out, std::move(result));
}

namespace {

std::vector<AxisWeights> profile_axes(const Profile& p, double r, double h, const Offset& off, int d) {
  std::vector<AxisWeights> axes;
  for (int l = 0; l < d; ++l) axes.push_back(cell_weights(p, r, h, off.t[l]));
  return axes;
}

// common first/last across axes so d = 1 default grids agree between terms
std::optional<GridSpec> default_output(const FunctionTuple& F, const std::vector<AxisWeights>& axes,
                                       const AverageOptions& opt) {
  if (opt.output) return opt.output;
  if (F.d() >= 2) return F.spec();
  return average_output_grid(F.spec(), axes[0].first, axes[0].last());
}

}  // namespace

GridFunction smooth_average(const FunctionTuple& F, const Profile& phi, double r, const AverageOptions& opt) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidR("scale r must be positive");
  const auto axes = profile_axes(phi, r, F.spec().h, opt.offset, F.d());
  return entangled_average(F, axes, default_output(F, axes, opt));
}

GridFunction box_average(const FunctionTuple& F, double r, const AverageOptions& opt) {
  static const Profile indicator = make_indicator(1.0);
  return smooth_average(F, indicator, r, opt);
}

GridFunction b_average(const FunctionTuple& F, const Profile& phi, const Profile& theta, double r,
                       const AverageOptions& opt) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidR("scale r must be positive");
  if (theta.kind() != ProfileKind::derived_theta || theta.delta() != phi.delta())
    throw InvalidArgument("theta must be derived from phi");
  const int d = F.d();
  const double h = F.spec().h;
  const auto phi_axes = profile_axes(phi, r, h, opt.offset, d);
  const auto theta_axes = profile_axes(theta, r, h, opt.offset, d);
  // one output grid wide enough for both weight families
  std::optional<GridSpec> out = opt.output;
  if (!out) {
    if (d >= 2) {
      out = F.spec();
    } else {
      out = average_output_grid(F.spec(), std::min(phi_axes[0].first, theta_axes[0].first),
                                std::max(phi_axes[0].last(), theta_axes[0].last()));
    }
  }
  GridFunction total(*out);
  for (int i = 0; i < d; ++i) {
    auto axes = phi_axes;
    axes[i] = theta_axes[i];
    total = total + entangled_average(F, axes, out);
  }
  return total;
}

bool resolution_warning(const Profile& phi, double r, double h) {
  auto [lo, hi] = phi.support();
  return (hi - lo) * r / h < 4.0;
}

}  // namespace cubevar
