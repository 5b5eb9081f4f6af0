// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cubevar/analytic.hpp"
#include "cubevar/ergodic.hpp"
#include "cubevar/forms.hpp"
#include "cubevar/harness.hpp"
#include "cubevar/variation.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace cubevar;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0 && secs > time_limit) {
    o.pass = false;
    o.detail += "; over time limit " + std::to_string(time_limit) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string csv(const ExperimentReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  return os.str();
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  if (!(a.spec() == b.spec())) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ExperimentReport e5_report() {
  ExperimentConfig c = default_config("E5");
  c.trials = 50;
  c.system_size = 256;
  c.horizon = 8;
  c.points = 256;
  return run_experiment(c);
}

}  // namespace

int main() {
  ExperimentReport e5;
  double e5_secs = 0;

  criterion("transference identity", 60, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    e5 = e5_report();
    e5_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double err = 0;
    std::size_t systems = 0, comparisons = 0, max_size = 0;
    long max_n = 0;
    bool ok = true;
    for (const auto& r : e5.rows) {
      const json p = json::parse(r.param_json);
      if (p["check"] != "identity") continue;
      ++systems;
      err = std::max(err, r.lhs);
      comparisons += p["comparisons"].get<std::size_t>();
      max_size = std::max(max_size, p["M"].get<std::size_t>());
      max_n = std::max(max_n, p["N"].get<long>());
      ok = ok && r.lhs <= 1e-12;
    }
    ok = ok && systems == 50 && max_size <= 256 && max_n <= 8;
    return Outcome{ok, fmt("%zu systems, M <= %zu, N <= %ld, %zu comparisons, max error %.3g <= 1e-12", systems,
                           max_size, max_n, comparisons, err)};
  });

  criterion("step-function bridge", 0, [] {
    double err = 0;
    std::size_t points = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
      auto rng = make_rng(1001, t);
      const auto L = static_cast<std::size_t>(uniform_int(rng, 2, 8));
      const FunctionTuple Fi = random_integer_tuple(rng, 2, L);
      const long n = uniform_int(rng, 1, static_cast<long>(L));
      AverageOptions opt;
      opt.offset = Offset::node();
      const GridFunction A = box_average(floor_lift(Fi), static_cast<double>(n), opt);
      const GridFunction D = discrete_cube_average(Fi, n);
      for (std::size_t f = 0; f < D.values().size(); ++f) {
        const Index k = D.spec().unflat(f);
        const double pt[2] = {D.spec().origin[0] + static_cast<double>(k[0]) + 1e-9,
                              D.spec().origin[1] + static_cast<double>(k[1]) + 1e-9};
        err = std::max(err, std::abs(A.evaluate(pt) - D[f]));
        ++points;
      }
    }
    return Outcome{err <= 1e-12, fmt("20 cases, %zu integer points, max error %.3g <= 1e-12", points, err)};
  });

  criterion("variation DP vs exhaustive", 60, [] {
    const Exponent q = Exponent::cube_dual(2);
    const GridSpec g = cubic_grid(2, 8, 0.125);
    double worst = 0;
    std::size_t bad_witness = 0;
    for (std::uint64_t t = 0; t < 200; ++t) {
      auto rng = make_rng(1002, t);
      const std::size_t n = 1 + static_cast<std::size_t>(uniform_int(rng, 0, 9));
      const double rho = uniform(rng, 1.0, 4.0);
      std::vector<std::vector<double>> raw(n);
      for (auto& v : raw) {
        v.resize(t % 2 == 0 ? 1 : g.size());
        for (double& x : v) x = uniform(rng, -1, 1);
      }
      DistanceTable dist;
      std::function<double(std::size_t, std::size_t)> ref_dist;
      if (t % 2 == 0) {
        std::vector<double> a;
        for (const auto& v : raw) a.push_back(v[0]);
        dist = DistanceTable::scalars(a);
        ref_dist = [a](std::size_t i, std::size_t j) { return std::abs(a[j] - a[i]); };
      } else {
        AverageSequence seq;
        for (std::size_t i = 0; i < n; ++i) {
          seq.indices.push_back(static_cast<long>(i + 1));
          seq.frames.emplace_back(g, raw[i]);
        }
        dist = distance_table(seq, q);
        ref_dist = [&raw, &g, &q](std::size_t i, std::size_t j) {
          return oracle::norm_diff(raw[i], raw[j], q.value(), g.cell_volume());
        };
      }
      const auto got = rho_variation(dist, rho);
      const auto ref = oracle::variation(n, rho, ref_dist);
      const double scale = std::max(1.0, ref.value);
      worst = std::max(worst, std::abs(got.value - ref.value) / scale);
      bool valid = !got.witness.empty() && got.witness.back() < n;
      for (std::size_t i = 1; i < got.witness.size(); ++i) valid = valid && got.witness[i - 1] < got.witness[i];
      valid = valid && std::abs(witness_value(dist, got.witness, rho) - got.value) <= 1e-12 * scale;
      if (!valid) ++bad_witness;
    }
    return Outcome{worst <= 1e-12 && bad_witness == 0,
                   fmt("200 cases (100 scalar, 100 8x8), max relative gap %.3g, invalid witnesses %zu", worst,
                       bad_witness)};
  });

  criterion("comparison bound", 300, [] {
    ExperimentConfig c = default_config("E3");
    c.d = 2;
    c.grid = 64;
    c.deltas = {0.05, 0.1, 0.2};
    c.radii = {1, 2, 4};
    c.trials = 20;
    c.slack = 0.05;
    const auto rep = run_experiment(c);
    std::size_t bad = 0, not_decreasing = 0;
    double worst_ratio = 0;
    for (const auto& r : rep.rows) {
      const json p = json::parse(r.param_json);
      if (!(r.lhs <= r.rhs * 1.05)) ++bad;
      if (!(p["slack_refined"].get<double>() < r.slack)) ++not_decreasing;
      worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
    }
    const bool ok = rep.rows.size() == 180 && bad == 0 && not_decreasing == 0;
    return Outcome{ok, fmt("%zu rows, max lhs/rhs %.4f <= 1.05, violations %zu, slack not decreasing at G=128: %zu",
                           rep.rows.size(), worst_ratio, bad, not_decreasing)};
  });

  criterion("derivative identity", 0, [] {
    const Profile phi = make_phi(0.1, 512), theta = make_theta(phi);
    FieldOptions smooth;
    smooth.steps = false;
    const double r = 1.5, e = 1e-3;
    double err = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
      auto rng = make_rng(1005, t);
      const FunctionTuple F = random_tuple(rng, cubic_grid(2, 32, 0.25), smooth);
      const GridFunction B = b_average(F, phi, theta, r);
      const GridFunction D = (smooth_average(F, phi, r + e) - smooth_average(F, phi, r - e)).scaled(-r / (2 * e));
      err = std::max(err, max_abs_diff(B, D));
    }
    return Outcome{err <= 1e-4, fmt("10 smooth tuples, G=32, r=1.5, eps=1e-3, max error %.3g <= 1e-4", err)};
  });

  criterion("short-jump inequality", 0, [] {
    ExperimentConfig c = default_config("E7");
    c.d = 2;
    c.grid = 32;
    c.trials = 10;
    c.partition = 8;
    c.r_points = 64;
    c.slack = 0.05;
    const auto rep = run_experiment(c);
    std::size_t rows = 0, bad = 0, not_decreasing = 0;
    double worst_ratio = 0;
    for (const auto& r : rep.rows) {
      const json p = json::parse(r.param_json);
      if (!p.contains("partition")) continue;
      ++rows;
      if (!(r.lhs <= r.rhs * 1.05)) ++bad;
      if (!p.value("slack_decreases", false)) ++not_decreasing;
      worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
    }
    const bool ok = rows > 0 && bad == 0 && not_decreasing == 0;
    return Outcome{ok, fmt("%zu partitions (m=8), max lhs/rhs %.4f <= 1.05, violations %zu, slack not decreasing "
                           "at 128 points: %zu",
                           rows, worst_ratio, bad, not_decreasing)};
  });

  criterion("lambda reproduction", 300, [] {
    const Profile phi = make_phi(0.1, 512), theta = make_theta(phi);
    const GridSpec box = cubic_grid(2, 24, 0.25);
    AverageOptions opt;
    opt.output = box;
    double worst1 = 0, worst2 = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
      auto rng = make_rng(1007, t);
      const FunctionTuple F = random_tuple(rng, box);
      const GridFunction F0 = random_tuple(rng, box).entry(1);

      const int k_hi = static_cast<int>(uniform_int(rng, 1, 2));
      std::vector<double> s1;
      for (int k = 0; k < k_hi; ++k) s1.push_back(uniform(rng, -1, 1));
      const Kernel K1 = build_k1(phi, s1, 0, k_hi, box);
      double dual1 = 0;
      for (int k = 1; k <= k_hi; ++k)
        dual1 += s1[static_cast<std::size_t>(k - 1)] *
                 pairing(smooth_average(F, phi, std::ldexp(1.0, k - 1), opt) -
                             smooth_average(F, phi, std::ldexp(1.0, k), opt),
                         F0);
      worst1 = std::max(worst1, std::abs(evaluate_lambda(K1, F, F0) - dual1) / std::abs(dual1));

      const double r = uniform(rng, 1.0, 2.0);
      std::vector<int> J = {0};
      if (uniform01(rng) < 0.5) J.push_back(1);
      std::vector<double> s2;
      for (std::size_t a = 0; a < J.size(); ++a) s2.push_back(uniform(rng, -1, 1));
      const Kernel K2 = build_k2(phi, theta, s2, J, r, box);
      double dual2 = 0;
      for (std::size_t a = 0; a < J.size(); ++a)
        dual2 += s2[a] * pairing(b_average(F, phi, theta, std::ldexp(r, J[a]), opt), F0);
      worst2 = std::max(worst2, std::abs(evaluate_lambda(K2, F, F0) - dual2) / std::abs(dual2));
    }
    const bool ok = worst1 <= 1e-8 && worst2 <= 1e-8;
    return Outcome{ok, fmt("10 cases each, G=24, max relative error K1 %.3g, K2 %.3g <= 1e-8", worst1, worst2)};
  });

  criterion("transfer bound", 0, [&] {
    std::size_t rows = 0, bad = 0;
    std::vector<long> ms;
    double worst = 0;
    for (const auto& r : e5.rows) {
      const json p = json::parse(r.param_json);
      if (p["check"] != "transfer") continue;
      ++rows;
      const long m = p["m"].get<long>();
      if (std::find(ms.begin(), ms.end(), m) == ms.end()) ms.push_back(m);
      if (!(r.lhs <= r.rhs)) ++bad;
      worst = std::max(worst, r.lhs / r.rhs);
    }
    const bool ok = rows > 0 && bad == 0 && ms == std::vector<long>{1, 2, 4, 8, 16};
    return Outcome{ok, fmt("50 integer tuples, %zu (m,n) pairs over m in {1,2,4,8,16}, max lhs/bound %.4f <= 1 exact, "
                           "violations %zu (shares the %.2f s E5 run)",
                           rows, worst, bad, e5_secs)};
  });

  criterion("exact chain steps", 0, [] {
    ExperimentConfig c = default_config("E6");
    c.trials = 20;
    const auto rep = run_experiment(c);
    std::size_t pm = 0, bad = 0;
    for (const auto& r : rep.rows) {
      const std::string step = json::parse(r.param_json)["step"];
      if (step.rfind("power-mean", 0) != 0) continue;
      ++pm;
      if (!r.pass) ++bad;
    }
    const Profile phi = make_phi(0.1, 512), psi = make_psi(phi), theta = make_theta(phi);
    const GridSpec box = cubic_grid(2, 64, 0.25);
    const double m1 = std::abs(kernel_mass(build_k1(phi, std::vector<double>{1, -0.5, 0.7}, 0, 3, box)));
    const double m2 =
        std::abs(kernel_mass(build_k2(phi, theta, std::vector<double>{1, -0.3}, std::vector<int>{0, 1}, 1.3, box)));
    auto mass = [](const Profile& p) {
      const auto [a, b] = p.support();
      return std::abs(p.cumulative(b + 1) - p.cumulative(a - 1));
    };
    const double mpsi = mass(psi), mtheta = mass(theta);
    const double worst = std::max({m1, m2, mpsi, mtheta});
    const bool ok = pm > 0 && bad == 0 && worst <= 1e-9;
    return Outcome{ok, fmt("power-mean rows %zu over 20 E6 trials, failures %zu; |mass| K1 %.2g, K2 %.2g, psi %.2g, "
                           "theta %.2g <= 1e-9",
                           pm, bad, m1, m2, mpsi, mtheta)};
  });

  criterion("empirical-constant stability", 0, [] {
    std::string detail;
    bool ok = true;
    for (const char* id : {"E1", "E2"}) {
      std::vector<double> means;
      for (std::uint64_t seed : {1, 2, 3}) {
        ExperimentConfig c = default_config(id);
        c.seed = seed;
        const auto a = run_experiment(c), b = run_experiment(c);
        ok = ok && csv(a) == csv(b);
        double sum = 0;
        std::size_t cnt = 0;
        for (const auto& r : a.rows) {
          if (std::string(id) == "E2" && json::parse(r.param_json)["path"] != "theorem") continue;
          ok = ok && std::isfinite(r.lhs) && std::isfinite(r.empirical_constant);
          sum += r.empirical_constant;
          ++cnt;
        }
        means.push_back(sum / static_cast<double>(cnt));
      }
      const double hi = *std::max_element(means.begin(), means.end());
      const double lo = *std::min_element(means.begin(), means.end());
      const double spread = (hi - lo) / hi;
      ok = ok && spread < 0.25;
      detail += fmt("%s mean constant %.4f/%.4f/%.4f spread %.1f%%; ", id, means[0], means[1], means[2], 100 * spread);
    }
    const auto e4 = run_experiment(default_config("E4"));
    std::size_t bad = 0;
    double jmax = 0;
    for (const auto& r : e4.rows) {
      if (!(r.lhs <= r.rhs)) ++bad;
      jmax = std::max(jmax, r.empirical_constant);
    }
    ok = ok && bad == 0 && !e4.rows.empty();
    detail += fmt("bitwise reproducible; E4 monotonicity violations %zu, max J*eps^2 %.4f", bad, jmax);
    return Outcome{ok, detail};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
