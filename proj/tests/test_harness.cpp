#include <sstream>

#include "cubevar/harness.hpp"
#include "cubevar/variation.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cubevar;

namespace {

std::string csv(const ExperimentReport& r) {
  std::ostringstream os;
  write_report_csv(os, r);
  return os.str();
}

ExperimentConfig small(const std::string& id) {
  ExperimentConfig c = default_config(id);
  c.trials = 2;
  return c;
}

}  // namespace

TEST_CASE("random fields live in the central half of the box") {
  auto rng = make_rng(100);
  const GridSpec g = cubic_grid(2, 32, 0.25);
  const auto fields = random_fields(rng, g);
  REQUIRE(fields.size() == 3);
  const FunctionTuple F = sample_tuple(fields, g);
  for (const auto& f : F.entries()) {
    bool nonzero = false;
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      const Index k = g.unflat(i);
      const bool inside = k[0] >= 8 && k[0] < 24 && k[1] >= 8 && k[1] < 24;
      if (!inside) REQUIRE(f[i] == 0);
      REQUIRE(std::isfinite(f[i]));
      nonzero |= f[i] != 0;
    }
    CHECK(nonzero);
  }
  for (const auto& fd : fields) {
    CHECK(fd.bumps.size() >= 3);
    CHECK(fd.bumps.size() <= 6);
  }
  FieldOptions none;
  none.bumps = false;
  none.steps = false;
  const FunctionTuple Z = random_tuple(rng, g, none);
  for (const auto& f : Z.entries())
    for (double v : f.values()) CHECK(v == 0);
}

TEST_CASE("integer tuples and torus rotations") {
  auto rng = make_rng(101);
  const FunctionTuple F = random_integer_tuple(rng, 3, 4);
  CHECK(F.spec() == cubic_grid(3, 4, 1.0));
  for (const auto& f : F.entries())
    for (double v : f.values()) CHECK(std::abs(v) <= 1);
  const FiniteSystem T = random_torus_rotation(rng, 2, 7);
  CHECK(T.size() == 49);
  CHECK_THROWS(random_system(rng, 2, 1, SystemKind::rotation));
}

TEST_CASE("config validation") {
  for (const char* id : {"E1", "E2", "E3", "E4", "E5", "E6", "E7"}) CHECK_NOTHROW(validate(default_config(id)));
  CHECK_THROWS_AS(default_config("E9"), ConfigError);
  ExperimentConfig c = default_config("E2");
  c.rho = 3.0;  // needs rho > p (2^d - 1) / 2^{d-1} = 3 at p = 2, d = 2
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = default_config("E1");
  c.rho = 2.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = default_config("E3");
  c.grid = 60;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = default_config("E3");
  c.deltas = {1.5};
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = default_config("E1");
  c.d = 4;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("experiments are pure functions of their config") {
  for (const char* id : {"E1", "E2", "E3", "E4", "E5", "E6", "E7"}) {
    const ExperimentConfig c = small(id);
    const auto a = run_experiment(c), b = run_experiment(c);
    CHECK(csv(a) == csv(b));
    CHECK(a.all_pass());
    for (std::size_t i = 1; i < a.rows.size(); ++i) CHECK(a.rows[i - 1].trial <= a.rows[i].trial);
    for (const auto& r : a.rows) {
      CHECK(r.experiment == id);
      CHECK(std::isfinite(r.empirical_constant));
      CHECK(nlohmann::json::parse(r.param_json).is_object());
    }
    ExperimentConfig other = c;
    other.seed += 1;
    CHECK(csv(run_experiment(other)) != csv(a));
  }
}

TEST_CASE("empirical constants are homogeneous") {
  auto rng = make_rng(102);
  const GridSpec g = cubic_grid(2, 16, 1.0);
  const FunctionTuple F = random_tuple(rng, g);
  const FunctionTuple G = F.with_entry(2, F.entry(2).scaled(10));
  const Exponent q = Exponent::cube_dual(2), P = Exponent::cube(2);
  auto constant = [&](const FunctionTuple& T) {
    AverageSequence seq;
    AverageOptions opt;
    opt.output = average_output_grid(g, -1, 10);
    for (long n = 1; n <= 8; ++n) {
      seq.indices.push_back(n);
      seq.frames.push_back(box_average(T, static_cast<double>(n), opt));
    }
    return rho_variation(seq, 2.5, q).value / product_of_norms(T, P);
  };
  CHECK(constant(G) == doctest::Approx(constant(F)).epsilon(1e-12));
}

TEST_CASE("E2 degenerate systems have zero variation") {
  std::vector<std::uint32_t> id(5);
  for (std::uint32_t x = 0; x < 5; ++x) id[x] = x;
  const FiniteSystem sys = make_finite_system(5, std::vector<double>(5, 0.2), {id, id});
  auto rng = make_rng(103);
  const SystemTuple f = random_system_tuple(rng, sys);
  const std::vector<long> ns = {1, 2, 3, 4, 5, 6};
  CHECK(rho_variation(cubic_average_sequence(sys, f, ns), sys, 3.5, Exponent::finite(2)).value <= 1e-14);
  const FiniteSystem rot = random_torus_rotation(rng, 2, 5);
  const SystemTuple ones{2, std::vector<SystemFunction>(3, SystemFunction(25, 1.0))};
  CHECK(rho_variation(cubic_average_sequence(rot, ones, ns), rot, 3.5, Exponent::finite(2)).value <= 1e-14);
}

TEST_CASE("E3 with the indicator profile has lhs 0") {
  auto rng = make_rng(104);
  const FunctionTuple F = random_tuple(rng, cubic_grid(2, 32, 0.125));
  const GridFunction a = box_average(F, 1.5), b = smooth_average(F, make_indicator(512), 1.5);
  CHECK(lp_distance(a, b, Exponent::cube_dual(2)) == 0);
}

TEST_CASE("E4 normalisation is enforced") {
  ExperimentConfig c = default_config("E4");
  auto rng = make_rng(105);
  const FunctionTuple raw = random_tuple(rng, cubic_grid(2, 32, 1.0));
  std::vector<GridFunction> e;
  for (const auto& f : raw.entries()) e.push_back(f.scaled(1.0 / lp_norm(f, Exponent::cube(2)).value));
  const FunctionTuple F(2, e);
  const auto rep = run_e4(c, F);
  CHECK(rep.all_pass());
  CHECK(rep.rows.size() == c.eps.size());
  std::vector<GridFunction> twice;
  for (const auto& f : F.entries()) twice.push_back(f.scaled(2));
  CHECK_THROWS_AS(run_e4(c, FunctionTuple(2, twice)), ConfigError);

  c.eps = {1e6};
  for (const auto& r : run_e4(c, F).rows) CHECK(r.lhs == 0);
}

TEST_CASE("E4 rows encode monotone jump counts") {
  const auto rep = run_experiment(small("E4"));
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto p = nlohmann::json::parse(rep.rows[i].param_json);
    CHECK(rep.rows[i].lhs <= rep.rows[i].rhs);
    CHECK(rep.rows[i].empirical_constant == doctest::Approx(rep.rows[i].lhs * p["eps"].get<double>() * p["eps"].get<double>()));
  }
}

TEST_CASE("E6 with a single pair has power-mean equality") {
  ExperimentConfig c = small("E6");
  c.k_lo = 1;
  c.k_hi = 2;
  for (const auto& r : run_experiment(c).rows) {
    const auto p = nlohmann::json::parse(r.param_json);
    CHECK(p["J"] == 1);
    if (p["step"] == "power-mean-pointwise") CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-12));
    if (p["step"] == "power-mean") CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-12));
  }
}

TEST_CASE("E7 with one partition interval") {
  ExperimentConfig c = small("E7");
  c.partition = 1;
  const auto rep = run_experiment(c);
  CHECK(rep.all_pass());
  for (const auto& r : rep.rows) {
    const auto p = nlohmann::json::parse(r.param_json);
    if (p.contains("partition")) CHECK(p["partition"].size() == 2);
  }
}

TEST_CASE("report writers") {
  ExperimentReport rep;
  ReportRow r;
  r.experiment = "E3";
  r.trial = 1;
  r.grid = 64;
  r.param_json = R"({"delta":0.1})";
  r.lhs = 0.5;
  r.rhs = std::numeric_limits<double>::infinity();
  r.pass = false;
  r.empirical_constant = 0.25;
  rep.rows.push_back(r);
  CHECK(!rep.all_pass());
  CHECK(csv(rep) == "experiment,trial,d,G,param_json,lhs,rhs,slack,pass,empirical_constant\n"
                    "E3,1,2,64,\"{\"\"delta\"\":0.1}\",0.5,inf,0,false,0.25\n");
  std::ostringstream os;
  write_report_json(os, rep);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j.size() == 1);
  CHECK(j[0]["params"]["delta"] == 0.1);
  CHECK(j[0]["rhs"] == "inf");
  CHECK(j[0]["pass"] == false);
}
