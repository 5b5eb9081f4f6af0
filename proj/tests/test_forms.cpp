#include <sstream>

#include "cubevar/forms.hpp"
#include "cubevar/harness.hpp"
#include "doctest.h"

using namespace cubevar;

namespace {

// Kernel of cell averages of profile^{(x)d} at scale 1, cell i centred at i h
Kernel profile_kernel(const Profile& p, int d, double h) {
  const AxisWeights w = cell_weights(p, 1.0, h, 0.5);
  GridSpec s;
  s.d = d;
  s.h = h;
  for (int l = 0; l < d; ++l) {
    s.dims[l] = w.w.size();
    s.origin[l] = (static_cast<double>(w.first) - 0.5) * h;
  }
  std::vector<double> v(s.size());
  for (std::size_t f = 0; f < v.size(); ++f) {
    const Index k = s.unflat(f);
    double x = 1.0 / s.cell_volume();
    for (int l = 0; l < d; ++l) x *= w.at(w.first + k[l]);
    v[f] = x;
  }
  return Kernel{GridFunction(s, v), {}};
}

double cell_average(const Profile& p, double r, double centre, double h) {
  return (p.cumulative_scaled(centre + 0.5 * h, r) - p.cumulative_scaled(centre - 0.5 * h, r)) / h;
}

double max_abs(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("K1 with zero signs is zero") {
  const Profile phi = make_phi(0.1, 512);
  const std::vector<double> s(3, 0.0);
  const Kernel K = build_k1(phi, s, 0, 3, cubic_grid(2, 64, 0.25));
  CHECK(max_abs(K.grid.values()) == 0);
  CHECK(K.provenance.kind == KernelKind::k1);
}

TEST_CASE("single-scale K1 in d = 1 is psi") {
  const Profile phi = make_phi(0.1, 512), psi = make_psi(phi);
  const double h = 0.125;
  for (int k = 1; k <= 3; ++k) {
    const std::vector<double> s = {1.0};
    const Kernel K = build_k1(phi, s, k - 1, k, cubic_grid(1, 128, h));
    const double r = std::ldexp(1.0, k);
    for (std::size_t i = 0; i < K.grid.values().size(); ++i) {
      const double c = static_cast<double>(K.first_shift()[0] + static_cast<long>(i)) * h;
      REQUIRE(std::abs(K.grid[i] - cell_average(psi, r, c, h)) <= 1e-9);
    }
    CHECK(std::abs(kernel_mass(K)) <= 1e-9);
  }
}

TEST_CASE("K1 mean zero and psi decomposition") {
  const Profile phi = make_phi(0.2, 512);
  const GridSpec box = cubic_grid(2, 64, 0.25);
  for (auto signs : {std::vector<double>{1, -1}, std::vector<double>{0.3, 1, -0.7}}) {
    const int k_hi = static_cast<int>(signs.size());
    const Kernel K = build_k1(phi, signs, 0, k_hi, box);
    CHECK(std::abs(kernel_mass(K)) <= 1e-9);
    const GridFunction alt = k1_psi_decomposition(phi, signs, 0, k_hi, box);
    REQUIRE(alt.spec() == K.grid.spec());
    for (std::size_t i = 0; i < alt.values().size(); ++i) REQUIRE(std::abs(alt[i] - K.grid[i]) <= 1e-9);
  }
}

TEST_CASE("K1 argument checks") {
  const Profile phi = make_phi(0.1, 512);
  const GridSpec box = cubic_grid(2, 16, 0.25);
  const std::vector<double> one = {1.0}, big = {1.5};
  CHECK_THROWS_AS(build_k1(phi, one, 4, 5, box), ScaleOutOfRange);
  CHECK_THROWS_AS(build_k1(phi, one, -4, -3, box), ScaleOutOfRange);
  CHECK_THROWS(build_k1(phi, big, 0, 1, box));
  CHECK_THROWS(build_k1(phi, one, 1, 1, box));
  CHECK_THROWS(build_k1(phi, one, 0, 2, box));
}

TEST_CASE("K2 examples") {
  const Profile phi = make_phi(0.1, 512), theta = make_theta(phi);
  const GridSpec box = cubic_grid(2, 32, 0.125);
  const std::vector<double> none_s;
  const std::vector<int> none_j;
  const Kernel Z = build_k2(phi, theta, none_s, none_j, 1.0, box);
  CHECK(max_abs(Z.grid.values()) == 0);

  const std::vector<double> s = {1.0};
  const std::vector<int> J = {0};
  const Kernel K = build_k2(phi, theta, s, J, 1.0, box);
  CHECK(std::abs(kernel_mass(K)) <= 1e-9);
  const double h = box.h;
  for (std::size_t f = 0; f < K.grid.values().size(); ++f) {
    const Index k = K.grid.spec().unflat(f);
    const double c0 = static_cast<double>(K.first_shift()[0] + k[0]) * h;
    const double c1 = static_cast<double>(K.first_shift()[1] + k[1]) * h;
    const double ref = cell_average(theta, 1, c0, h) * cell_average(phi, 1, c1, h) +
                       cell_average(phi, 1, c0, h) * cell_average(theta, 1, c1, h);
    REQUIRE(std::abs(K.grid[f] - ref) <= 1e-10);
  }
  CHECK_THROWS(build_k2(phi, theta, s, J, 2.5, box));
  CHECK_THROWS(build_k2(phi, phi, s, J, 1.0, box));
}

TEST_CASE("lambda of the zero kernel") {
  auto rng = make_rng(80);
  const GridSpec g = cubic_grid(2, 12, 0.25);
  const FunctionTuple F = random_tuple(rng, g);
  const std::vector<double> s = {0.0};
  const Kernel K = build_k1(make_phi(0.1, 512), s, 0, 1, g);
  CHECK(evaluate_lambda(K, F, F.entry(1)) == 0);
}

TEST_CASE("lambda in d = 1 against a quadrature oracle") {
  const Profile phi = make_phi(0.1, 512);
  const double h = 1.0 / 64;
  const GridSpec g = cubic_grid(1, 256, h, -1.0);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = -1 + (static_cast<double>(i) + 0.5) * h;
    v[i] = (x >= 0 && x < 2) ? 1 : 0;
  }
  const GridFunction F0(g, v);
  const FunctionTuple F(1, {F0});
  // overlap of [0,2) with [-s, 2-s) is 2 - |s|
  const auto [a, b] = phi.support();
  double ref = 0;
  const long n = 200000;
  const double hs = (b - a) / n;
  for (long k = 0; k < n; ++k) {
    const double s = a + (static_cast<double>(k) + 0.5) * hs;
    ref += phi.value(s) * (2 - std::abs(s)) * hs;
  }
  CHECK(evaluate_lambda(profile_kernel(phi, 1, h), F, F0) == doctest::Approx(ref).epsilon(2e-5));
}

TEST_CASE("lambda reproduces the averages") {
  const Profile phi = make_phi(0.1, 512), theta = make_theta(phi);
  const GridSpec box = cubic_grid(2, 24, 0.25);
  AverageOptions opt;
  opt.output = box;
  for (std::uint64_t t = 0; t < 3; ++t) {
    auto rng = make_rng(81, t);
    const FunctionTuple F = random_tuple(rng, box);
    const GridFunction F0 = random_tuple(rng, box).entry(1);

    const std::vector<double> s1 = {1, -0.5};
    const Kernel K1 = build_k1(phi, s1, 0, 2, box);
    double dual1 = 0;
    for (int k = 1; k <= 2; ++k)
      dual1 += s1[k - 1] * pairing(smooth_average(F, phi, std::ldexp(1.0, k - 1), opt) -
                                        smooth_average(F, phi, std::ldexp(1.0, k), opt), F0);
    CHECK(evaluate_lambda(K1, F, F0) == doctest::Approx(dual1).epsilon(1e-8));

    const std::vector<double> s2 = {-1, 0.25};
    const std::vector<int> J = {0, 1};
    const double r = 1.3;
    const Kernel K2 = build_k2(phi, theta, s2, J, r, box);
    double dual2 = 0;
    for (std::size_t a = 0; a < J.size(); ++a)
      dual2 += s2[a] * pairing(b_average(F, phi, theta, std::ldexp(r, J[a]), opt), F0);
    CHECK(evaluate_lambda(K2, F, F0) == doctest::Approx(dual2).epsilon(1e-8));
  }
}

TEST_CASE("lambda is multilinear") {
  const Profile phi = make_phi(0.1, 512);
  const GridSpec box = cubic_grid(2, 16, 0.25);
  auto rng = make_rng(82);
  const FunctionTuple F = random_tuple(rng, box), G = random_tuple(rng, box);
  const GridFunction F0 = G.entry(3), G0 = G.entry(2);
  const std::vector<double> s = {1.0};
  const Kernel K = build_k1(phi, s, 0, 1, box);
  const double L = evaluate_lambda(K, F, F0);
  CHECK(evaluate_lambda(K, F, F0.scaled(-2)) == doctest::Approx(-2 * L).epsilon(1e-10));
  CHECK(evaluate_lambda(K, F, F0 + G0) == doctest::Approx(L + evaluate_lambda(K, F, G0)).epsilon(1e-10));
  for (unsigned b = 1; b <= 3; ++b) {
    const double Lg = evaluate_lambda(K, F.with_entry(b, G.entry(b)), F0);
    CHECK(evaluate_lambda(K, F.with_entry(b, F.entry(b) + G.entry(b)), F0) == doctest::Approx(L + Lg).epsilon(1e-10));
    CHECK(evaluate_lambda(K, F.with_entry(b, F.entry(b).scaled(3)), F0) == doctest::Approx(3 * L).epsilon(1e-10));
  }
  CHECK_THROWS_AS(evaluate_lambda(K, F, GridFunction(cubic_grid(2, 8, 0.25))), DimensionMismatch);
}

TEST_CASE("duality and the extremal F0") {
  const Profile phi = make_phi(0.1, 512);
  const GridSpec box = cubic_grid(2, 24, 0.25);
  const Exponent q = Exponent::cube_dual(2), P = Exponent::cube(2);
  AverageOptions opt;
  opt.output = box;
  for (std::uint64_t t = 0; t < 3; ++t) {
    auto rng = make_rng(83, t);
    const FunctionTuple F = random_tuple(rng, box);
    const GridFunction g = smooth_average(F, phi, 1.0, opt) - smooth_average(F, phi, 2.0, opt);
    const GridFunction F0 = random_tuple(rng, box).entry(2);
    CHECK(std::abs(pairing(g, F0)) <= lp_norm(g, q).value * lp_norm(F0, P).value * (1 + 1e-12));
    std::vector<double> ext(g.values().size());
    for (std::size_t i = 0; i < ext.size(); ++i) ext[i] = std::pow(std::abs(g[i]), q.value() - 1) * (g[i] < 0 ? -1 : 1);
    GridFunction E(box, ext);
    E = E.scaled(1.0 / lp_norm(E, P).value);
    CHECK(pairing(g, E) == doctest::Approx(lp_norm(g, q).value).epsilon(0.01));
  }
}

TEST_CASE("symbol decay diagnostics") {
  const Profile phi = make_phi(0.1, 512);
  const GridSpec box = cubic_grid(2, 32, 0.25);
  const std::vector<double> zero = {0.0}, one = {1.0};
  for (const auto& row : symbol_decay_check(build_k1(phi, zero, 0, 1, box), 2)) CHECK(row.shell_max == 0);

  const auto psi_rows = symbol_decay_check(build_k1(phi, one, 1, 2, box), 2);
  const auto ind_rows = symbol_decay_check(profile_kernel(make_indicator(512), 2, 0.25), 2);
  for (const auto* rows : {&psi_rows, &ind_rows}) {
    REQUIRE(!rows->empty());
    for (const auto& r : *rows) REQUIRE(std::isfinite(r.shell_max));
  }
  std::size_t orders = 0;
  for (const auto& r : psi_rows) orders += r.alpha == "2,0" || r.alpha == "1,1" || r.alpha == "0,2";
  CHECK(orders > 0);
  CHECK_THROWS(symbol_decay_check(build_k1(phi, one, 1, 2, box), 3));

  const auto d1 = build_k1(phi, one, 1, 2, cubic_grid(1, 64, 0.125));
  CHECK(std::abs(kernel_mass(d1)) <= 1e-9);

  std::ostringstream os;
  write_symbol_csv(os, {{0, "1,0", 0.5}});
  CHECK(os.str() == "shell_index,alpha,shell_max\n0,\"1,0\",0.5\n");
}

TEST_CASE("khintchine examples") {
  auto rng = make_rng(84);
  const GridSpec g = cubic_grid(2, 8, 0.5);
  std::vector<double> v(g.size(), 0.0), w(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size() / 2; ++i) {
    v[i] = uniform(rng, -1, 1);
    w[i + g.size() / 2] = v[i];
  }
  const Exponent q = Exponent::cube_dual(2);
  const GridFunction D(g, v), Dw(g, w);

  const std::vector<GridFunction> single = {D};
  const auto s = khintchine_sample(single, 10, 1, q);
  CHECK(s.exhaustive);
  CHECK(s.signed_mean == doctest::Approx(lp_norm(D, q).value).epsilon(1e-14));
  CHECK(s.ratio == doctest::Approx(1.0).epsilon(1e-14));

  const std::vector<GridFunction> disjoint = {D, Dw};
  CHECK(khintchine_sample(disjoint, 10, 1, q).ratio == doctest::Approx(1.0).epsilon(1e-13));

  const std::vector<GridFunction> equal = {D, D};
  CHECK(khintchine_sample(equal, 10, 1, q).ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("khintchine Monte Carlo stability") {
  const GridSpec g = cubic_grid(2, 8, 0.5);
  const Exponent q = Exponent::cube_dual(2);
  for (std::uint64_t seed : {1, 2}) {
    auto rng = make_rng(85, seed);
    std::vector<GridFunction> fam;
    for (int k = 0; k < 14; ++k) {
      std::vector<double> v(g.size());
      for (double& x : v) x = uniform(rng, -1, 1);
      fam.emplace_back(g, v);
    }
    const auto a = khintchine_sample(fam, 2000, seed, q), b = khintchine_sample(fam, 4000, seed, q);
    CHECK(!a.exhaustive);
    CHECK(a.samples == 2000);
    CHECK(std::abs(a.signed_mean - b.signed_mean) / b.signed_mean < 0.02);
    const auto again = khintchine_sample(fam, 2000, seed, q);
    CHECK(again.signed_mean == a.signed_mean);
  }
}

TEST_CASE("square function") {
  const GridSpec g = cubic_grid(1, 3, 1.0);
  const std::vector<GridFunction> fam = {GridFunction(g, {3, 0, -1}), GridFunction(g, {4, 2, 0})};
  const GridFunction S = square_function(fam);
  CHECK(S[0] == 5);
  CHECK(S[1] == 2);
  CHECK(S[2] == 1);
}
