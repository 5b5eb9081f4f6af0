#include <algorithm>
#include <array>
#include <cmath>

#include "cubevar/analytic.hpp"

namespace cubevar {

namespace {

// 10-point Gauss-Legendre on [-1,1]
constexpr std::array<double, 10> kGaussX = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
    -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
    0.8650633666889845,  0.9739065285171717};
constexpr std::array<double, 10> kGaussW = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
    0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};

double raw_bump(double z) {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - z * z));
}

// Integrals of raw_bump and z * raw_bump over [-1, z], composite Gauss with
// panels no wider than 1/32.
std::pair<double, double> raw_moments(double z) {
  z = std::clamp(z, -1.0, 1.0);
  const double len = z + 1.0;
  if (len <= 0.0) return {0.0, 0.0};
  const int panels = std::max(1, static_cast<int>(std::ceil(len * 32.0)));
  const double w = len / panels;
  double m0 = 0, m1 = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = -1.0 + (p + 0.5) * w;
    for (std::size_t g = 0; g < kGaussX.size(); ++g) {
      const double x = mid + 0.5 * w * kGaussX[g];
      const double f = raw_bump(x) * kGaussW[g] * 0.5 * w;
      m0 += f;
      m1 += x * f;
    }
  }
  return {m0, m1};
}

double bump_mass() {
  static const double mass = raw_moments(1.0).first;
  return mass;
}

// integral of bump_cdf over (-inf, z]
double bump_cdf_integral(double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return z;
  auto [m0, m1] = raw_moments(z);
  const double c = 1.0 / bump_mass();
  return z * m0 * c - m1 * c;
}

// phi = 1_[0,1) * m_w with w = delta / 2
double phi_value(double delta, double t) {
  if (delta == 0.0) return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
  const double w = 0.5 * delta;
  return bump_cdf(t / w) - bump_cdf((t - 1.0) / w);
}

double phi_derivative(double delta, double t) {
  const double w = 0.5 * delta;
  return (bump(t / w) - bump((t - 1.0) / w)) / w;
}

double phi_cumulative(double delta, double u) {
  if (delta == 0.0) return std::clamp(u, 0.0, 1.0);
  const double w = 0.5 * delta;
  return w * (bump_cdf_integral(u / w) - bump_cdf_integral((u - 1.0) / w));
}

}  // namespace

double bump(double z) { return raw_bump(z) / bump_mass(); }

double bump_derivative(double z) {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  const double s = 1.0 - z * z;
  return bump(z) * (-2.0 * z / (s * s));
}

double bump_cdf(double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  return raw_moments(z).first / bump_mass();
}

const char* to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::indicator:
      return "indicator";
    case ProfileKind::smoothed_indicator:
      return "smoothed-indicator";
    case ProfileKind::derived_psi:
      return "derived-psi";
    case ProfileKind::derived_theta:
      return "derived-theta";
  }
  return "?";
}

double Profile::value(double t) const {
  switch (kind_) {
    case ProfileKind::indicator:
    case ProfileKind::smoothed_indicator:
      return phi_value(delta_, t);
    case ProfileKind::derived_psi:
      return 2.0 * phi_value(delta_, 2.0 * t) - phi_value(delta_, t);
    case ProfileKind::derived_theta:
      return phi_value(delta_, t) + t * phi_derivative(delta_, t);
  }
  return 0.0;
}

double Profile::cumulative(double u) const {
  switch (kind_) {
    case ProfileKind::indicator:
    case ProfileKind::smoothed_indicator:
      return phi_cumulative(delta_, u);
    case ProfileKind::derived_psi:
      return phi_cumulative(delta_, 2.0 * u) - phi_cumulative(delta_, u);
    case ProfileKind::derived_theta:
      // antiderivative of (s phi(s))' is s phi(s)
      return u * phi_value(delta_, u);
  }
  return 0.0;
}

void Profile::sample() {
  const double h = 1.0 / resolution_;
  const long lo = static_cast<long>(std::floor(support_.first * resolution_));
  const long hi = static_cast<long>(std::ceil(support_.second * resolution_));
  GridSpec spec;
  spec.d = 1;
  spec.h = h;
  spec.dims[0] = static_cast<std::size_t>(hi - lo);
  spec.origin[0] = lo * h;
  std::vector<double> v(spec.dims[0]);
  double integral = 0, l1 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = spec.origin[0] + (static_cast<double>(i) + 0.5) * h;
    v[i] = value(c);
    integral += v[i] * h;
    const double ind = (c >= 0.0 && c < 1.0) ? 1.0 : 0.0;
    l1 += std::abs(v[i] - ind) * h;
  }
  samples_ = GridFunction(spec, std::move(v));
  integral_ = integral;
  l1_dist_ = l1;
}

Profile make_indicator(double resolution) {
  if (!(resolution >= 1.0)) throw InvalidArgument("resolution must be >= 1");
  Profile p;
  p.kind_ = ProfileKind::indicator;
  p.resolution_ = resolution;
  p.support_ = {0.0, 1.0};
  p.sample();
  // the cell-centred sum of an indicator on an aligned grid is exact
  p.integral_ = 1.0;
  p.l1_dist_ = 0.0;
  return p;
}

Profile make_phi(double delta, double resolution) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must be in (0,1)");
  if (!(resolution >= 1.0)) throw InvalidArgument("resolution must be >= 1");
  Profile p;
  p.kind_ = ProfileKind::smoothed_indicator;
  p.delta_ = delta;
  p.resolution_ = resolution;
  p.support_ = {-0.5 * delta, 1.0 + 0.5 * delta};
  p.sample();
  // each transition layer must hold at least 4 samples for the sums to mean anything
  if (delta * resolution < 4.0 || std::abs(p.integral_ - 1.0) > 1e-10 || p.l1_dist_ > delta)
    throw ResolutionTooCoarse("cannot certify the mollified indicator at resolution " +
                              std::to_string(resolution));
  return p;
}

Profile make_psi(const Profile& phi) {
  if (phi.kind() != ProfileKind::indicator && phi.kind() != ProfileKind::smoothed_indicator)
    throw InvalidArgument("psi needs a unit-integral phi profile");
  Profile p = phi;
  p.kind_ = ProfileKind::derived_psi;
  p.sample();
  return p;
}

Profile make_theta(const Profile& phi) {
  if (phi.kind() == ProfileKind::indicator)
    throw NotDifferentiable("theta = (s phi(s))' needs a smooth phi");
  if (phi.kind() != ProfileKind::smoothed_indicator)
    throw InvalidArgument("theta needs a phi profile");
  Profile p = phi;
  p.kind_ = ProfileKind::derived_theta;
  p.sample();
  return p;
}

Profile restore_profile(ProfileKind kind, double delta, double resolution) {
  switch (kind) {
    case ProfileKind::indicator:
      return make_indicator(resolution);
    case ProfileKind::smoothed_indicator:
      return make_phi(delta, resolution);
    case ProfileKind::derived_psi:
      return make_psi(delta == 0.0 ? make_indicator(resolution) : make_phi(delta, resolution));
    case ProfileKind::derived_theta:
      return make_theta(make_phi(delta, resolution));
  }
  throw FormatError("unknown profile kind");
}

}  // namespace cubevar
