#pragma once

// Profiles (the mollified indicator phi, psi(t) = 2 phi(2t) - phi(t) and
// theta(s) = (s phi(s))') and the entangled averages built from them.
//
// All averages act on step functions (GridFunction) and are exact at the
// requested sample point inside each output cell: along every axis the
// profile is integrated over the s-interval that maps the sample point into
// one input cell, so the inner s-integral is a finite sum of cumulative
// differences. The only quadrature left is whatever the caller does with
// the output (usually a midpoint-rule norm).

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cubevar/core.hpp"

namespace cubevar {

// ---------------------------------------------------------------------------
// standard bump

/// Unit-mass bump c exp(-1/(1-z^2)) on (-1,1).
double bump(double z);
double bump_derivative(double z);
/// Integral of bump over (-inf, z].
double bump_cdf(double z);

// ---------------------------------------------------------------------------
// profiles

enum class ProfileKind { indicator, smoothed_indicator, derived_psi, derived_theta };

const char* to_string(ProfileKind k);

class Profile {
 public:
  ProfileKind kind() const { return kind_; }
  /// Mollifier parameter of the underlying phi (0 for the raw indicator).
  double delta() const { return delta_; }
  double resolution() const { return resolution_; }

  double value(double t) const;
  /// Integral of the profile over (-inf, u].
  double cumulative(double u) const;
  /// phi_r(s) = r^{-1} phi(s / r).
  double value_scaled(double s, double r) const { return value(s / r) / r; }
  double cumulative_scaled(double u, double r) const { return cumulative(u / r); }
  /// Closed interval outside of which the profile vanishes.
  std::pair<double, double> support() const { return support_; }

  /// Cell-centred samples at `resolution` cells per unit.
  const GridFunction& samples() const { return samples_; }
  double integral() const { return integral_; }
  /// ||profile - 1_[0,1)||_1 from the samples (meaningful for phi kinds).
  double l1_dist_to_indicator() const { return l1_dist_; }

 private:
  friend Profile make_indicator(double);
  friend Profile make_phi(double, double);
  friend Profile make_psi(const Profile&);
  friend Profile make_theta(const Profile&);
  friend Profile restore_profile(ProfileKind, double, double);
  void sample();

  ProfileKind kind_ = ProfileKind::indicator;
  double delta_ = 0;
  double resolution_ = 1;
  std::pair<double, double> support_{0, 1};
  GridFunction samples_;
  double integral_ = 0;
  double l1_dist_ = 0;
};

Profile make_indicator(double resolution = 64);
/// 1_[0,1) convolved with the bump of half-width delta/2. Certifies
/// integral = 1 (1e-10) and ||phi - 1_[0,1)||_1 <= delta from its samples;
/// throws ResolutionTooCoarse otherwise.
Profile make_phi(double delta, double resolution);
Profile make_psi(const Profile& phi);
/// Throws NotDifferentiable for the raw indicator.
Profile make_theta(const Profile& phi);
/// Rebuild a profile from its kind tag and parameters (used by file I/O).
Profile restore_profile(ProfileKind kind, double delta, double resolution);

// ---------------------------------------------------------------------------
// entangled averages

/// One-dimensional weights w[i - first] for integer shifts i in
/// [first, first + w.size()).
struct AxisWeights {
  long first = 0;
  std::vector<double> w;

  long last() const { return first + static_cast<long>(w.size()) - 1; }
  double at(long i) const { return (i < first || i > last()) ? 0.0 : w[i - first]; }
};

/// w(i) = integral of profile_r over [(i - t) h, (i + 1 - t) h).
AxisWeights cell_weights(const Profile& p, double r, double h, double t);

/// Position of the sample point inside each output cell, per axis, as a
/// fraction of the cell width (0.5 = midpoint, 0 = lower node).
struct Offset {
  std::array<double, kMaxDim> t{0.5, 0.5, 0.5};

  static Offset center() { return {}; }
  static Offset node() { return {{0.0, 0.0, 0.0}}; }
  static Offset uniform(double s) { return {{s, s, s}}; }
};

struct AverageOptions {
  Offset offset = Offset::center();
  /// Output grid; must be aligned with the input grid. Defaults to the
  /// input grid for d >= 2 (the output support cannot leave it) and to the
  /// input grid widened by the profile reach for d = 1.
  std::optional<GridSpec> output;
};

/// Output grid that holds the full support of an average whose shifts lie
/// in [first, last] along every axis.
GridSpec average_output_grid(const GridSpec& in, long first, long last);

/// out(k) = sum_i prod_l w_l(i_l) prod_j F_j[k + j.i], in input-cell
/// coordinates. Row-vectorised along the last axis.
GridFunction entangled_average(const FunctionTuple& F, std::span<const AxisWeights> axes,
                               const std::optional<GridSpec>& output = std::nullopt);
/// Plain enumeration of the same sum, used to cross-check the fast path.
GridFunction entangled_average_reference(const FunctionTuple& F, std::span<const AxisWeights> axes,
                                         const std::optional<GridSpec>& output = std::nullopt);

/// A_r^phi(F)(x) = int prod_j F_j(x + j.s) phi_r(s_1)...phi_r(s_d) ds.
GridFunction smooth_average(const FunctionTuple& F, const Profile& phi, double r,
                            const AverageOptions& opt = {});
/// A_r(F): smooth_average with phi = 1_[0,1).
GridFunction box_average(const FunctionTuple& F, double r, const AverageOptions& opt = {});
/// B_r(F)(x) = int prod_j F_j(x + j.s) sum_i theta_r(s_i) prod_{k != i} phi_r(s_k) ds,
/// which equals -r d/dr A_r^phi(F)(x).
GridFunction b_average(const FunctionTuple& F, const Profile& phi, const Profile& theta, double r,
                       const AverageOptions& opt = {});

/// True when the support of phi_r spans fewer than 4 cells of width h.
bool resolution_warning(const Profile& phi, double r, double h);

}  // namespace cubevar
