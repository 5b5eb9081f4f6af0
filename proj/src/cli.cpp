#include "cubevar/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "cubevar/forms.hpp"
#include "cubevar/harness.hpp"
#include "cubevar/io.hpp"
#include "cubevar/variation.hpp"

namespace cubevar {

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::uint64_t seed = 1;
  std::string out, format = "csv";
  bool no_timestamp = false;

  int d = 2;
  std::size_t grid = 32;
  double h = 0;
  std::vector<double> deltas, radii, eps, signs, values;
  std::vector<int> scales;
  double rho = 2.5;
  std::string p = "q";
  std::size_t trials = 0;
  long n = 0, n_max = 0;
  int k_lo = 0, k_hi = 0;
  std::size_t partition = 0, r_points = 0;
  double slack = -1;
  bool no_refine = false;
  double resolution = 512;
  std::size_t system_size = 0, lattice = 0, points = 0;
  long horizon = 0;
  std::string system, funcs, f0, kernel, kind, sequence, offset = "center";
  int max_order = 2, padding = 2;
  bool b = false, smooth = false, integer = false;
  std::string experiment;
  std::vector<std::string> experiments;
  std::vector<std::uint64_t> seeds;
};

Exponent parse_exponent(const std::string& s, int d) {
  if (s == "inf") return Exponent::infinity();
  if (s == "q") return Exponent::cube_dual(d);
  if (const auto slash = s.find('/'); slash != std::string::npos)
    return Exponent::rational(std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1)));
  double v;
  try {
    v = std::stod(s);
  } catch (const std::exception&) {
    throw UsageError("--p: cannot parse exponent '" + s + "'");
  }
  if (!(v >= 1.0)) throw UsageError("--p: exponent must be >= 1");
  return Exponent::finite(v);
}

class Output {
 public:
  explicit Output(const Options& o) {
    if (!o.out.empty()) {
      file_.open(o.out, std::ios::binary);
      if (!file_) throw UsageError("--out: cannot write " + o.out);
    }
    if (!o.no_timestamp && o.format == "csv") {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::tm tm{};
      gmtime_r(&now, &tm);
      char buf[64];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      stream() << "# generated " << buf << '\n';
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

const std::string& need(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
  return value;
}

void csv_only(const Options& o) {
  if (o.format != "csv") throw UsageError("--format json is only available for verify and sweep");
}

using Given = std::function<bool(const char*)>;

ExperimentConfig experiment_config(const Options& o, const Given& given, const std::string& id, std::uint64_t seed) {
  ExperimentConfig c = default_config(id);
  c.seed = seed;
  if (given("--d")) c.d = o.d;
  if (given("--grid")) c.grid = o.grid;
  if (given("--h")) c.h = o.h;
  if (given("--delta")) c.deltas = o.deltas;
  if (given("--r")) c.radii = o.radii;
  if (given("--eps")) c.eps = o.eps;
  if (given("--scales")) c.scale_set = o.scales;
  if (given("--rho")) c.rho = o.rho;
  if (given("--p")) c.p = parse_exponent(o.p, c.d).value();
  if (given("--trials")) c.trials = o.trials;
  if (given("--n-max")) c.n_max = o.n_max;
  if (given("--k-lo")) c.k_lo = o.k_lo;
  if (given("--k-hi")) c.k_hi = o.k_hi;
  if (given("--partition")) c.partition = o.partition;
  if (given("--r-points")) c.r_points = o.r_points;
  if (given("--slack")) c.slack = o.slack;
  if (given("--no-refine")) c.refine = false;
  if (given("--resolution")) c.resolution = o.resolution;
  if (given("--system-size")) c.system_size = o.system_size;
  if (given("--horizon")) c.horizon = o.horizon;
  if (given("--lattice")) c.lattice = o.lattice;
  if (given("--points")) c.points = o.points;
  return c;
}

int emit_report(const Options& o, const ExperimentReport& rep) {
  Output out(o);
  if (o.format == "json")
    write_report_json(out.stream(), rep);
  else
    write_report_csv(out.stream(), rep);
  return rep.all_pass() ? 0 : 2;
}

DistanceTable input_distances(const Options& o, Exponent p, std::vector<long>& indices) {
  if (!o.values.empty()) {
    for (std::size_t a = 0; a < o.values.size(); ++a) indices.push_back(static_cast<long>(a));
    return DistanceTable::scalars(o.values);
  }
  AverageSequence seq;
  if (!o.sequence.empty()) {
    seq = load_sequence(o.sequence);
  } else if (!o.funcs.empty() && o.n_max > 0) {
    const FunctionTuple F = load_tuple(o.funcs);
    for (long n = 1; n <= o.n_max; ++n) {
      seq.indices.push_back(n);
      AverageOptions opt;
      opt.output = average_output_grid(F.spec(), -1, static_cast<long>(std::ceil(o.n_max / F.spec().h)) + 1);
      seq.frames.push_back(box_average(F, static_cast<double>(n), opt));
    }
  } else {
    throw UsageError("need --values, --sequence, or --funcs with --n-max");
  }
  if (seq.frames.empty()) throw EmptySequence("empty sequence");
  indices = seq.indices;
  return distance_table(seq, p);
}

Kernel input_kernel(const Options& o, const GridSpec& box, const Profile& phi) {
  if (!o.kernel.empty()) return load_kernel(o.kernel);
  if (o.kind == "k1") {
    std::vector<double> signs = o.signs;
    if (signs.empty()) signs.assign(static_cast<std::size_t>(std::max(0, o.k_hi - o.k_lo)), 1.0);
    return build_k1(phi, signs, o.k_lo, o.k_hi, box);
  }
  if (o.kind == "k2") {
    std::vector<int> scales = o.scales.empty() ? std::vector<int>{0} : o.scales;
    std::vector<double> signs = o.signs;
    if (signs.empty()) signs.assign(scales.size(), 1.0);
    const double r = o.radii.empty() ? 1.0 : o.radii.front();
    return build_k2(phi, make_theta(phi), signs, scales, r, box);
  }
  if (o.kind == "indicator") {
    // raw box kernel 1_[0,1)^d, no cancellation
    const Profile ind = make_indicator(o.resolution);
    const AxisWeights w = cell_weights(ind, 1.0, box.h, 0.5);
    GridSpec s;
    s.d = box.d;
    s.h = box.h;
    for (int l = 0; l < box.d; ++l) {
      s.dims[l] = w.w.size();
      s.origin[l] = (static_cast<double>(w.first) - 0.5) * box.h;
    }
    std::vector<double> v(s.size());
    for (std::size_t f = 0; f < v.size(); ++f) {
      const Index k = s.unflat(f);
      double p = 1.0 / s.cell_volume();
      for (int l = 0; l < box.d; ++l) p *= w.at(w.first + k[l]);
      v[f] = p;
    }
    return Kernel{GridFunction(s, std::move(v)), {}};
  }
  throw UsageError("need --kernel or --kind k1|k2|indicator");
}

int dispatch(const std::string& cmd, Options& o, const Given& given) {
  if (cmd == "gen-system") {
    csv_only(o);
    auto rng = make_rng(o.seed, 0);
    const std::size_t size = o.system_size > 0 ? o.system_size : 16;
    FiniteSystem sys = o.kind == "permutation" ? random_system(rng, o.d, size, SystemKind::permutation)
                       : o.kind == "rotation"  ? random_system(rng, o.d, size, SystemKind::rotation)
                                               : random_torus_rotation(rng, o.d, size);
    store_system(sys, need(o.out, "--out"));
    return 0;
  }
  if (cmd == "gen-funcs") {
    csv_only(o);
    auto rng = make_rng(o.seed, 0);
    need(o.out, "--out");
    if (!o.system.empty()) {
      const FiniteSystem sys = load_system(o.system);
      store_system_tuple(random_system_tuple(rng, sys), o.out);
    } else if (o.integer) {
      store_tuple(random_integer_tuple(rng, o.d, o.lattice > 0 ? o.lattice : o.grid), o.out);
    } else {
      FieldOptions fo;
      fo.steps = !o.smooth;
      store_tuple(random_tuple(rng, cubic_grid(o.d, o.grid, o.h > 0 ? o.h : 1.0), fo), o.out);
    }
    return 0;
  }
  if (cmd == "avg") {
    csv_only(o);
    if (!o.system.empty()) {
      const FiniteSystem sys = load_system(o.system);
      const SystemTuple f = load_system_tuple(need(o.funcs, "--funcs"));
      const long lo = o.n > 0 ? o.n : 1, hi = o.n > 0 ? o.n : o.n_max;
      if (hi < 1) throw UsageError("--n or --n-max must be >= 1");
      Output out(o);
      out.stream() << "n,x,value\n";
      out.stream().precision(17);
      const IterateTable table(sys, hi);
      for (long n = lo; n <= hi; ++n) {
        const SystemFunction M = cubic_average(sys, f, n, table);
        for (std::size_t x = 0; x < M.size(); ++x) out.stream() << n << ',' << x << ',' << M[x] << '\n';
      }
      return 0;
    }
    if (o.n < 1) throw UsageError("--n must be >= 1");
    store_grid(discrete_cube_average(load_tuple(need(o.funcs, "--funcs")), o.n), need(o.out, "--out"));
    return 0;
  }
  if (cmd == "box-avg" || cmd == "smooth-avg") {
    csv_only(o);
    const FunctionTuple F = load_tuple(need(o.funcs, "--funcs"));
    if (o.radii.size() != 1) throw UsageError("--r needs exactly one value");
    const double r = o.radii.front();
    AverageOptions opt;
    if (o.offset == "node") opt.offset = Offset::node();
    GridFunction g;
    if (cmd == "box-avg") {
      g = box_average(F, r, opt);
    } else {
      const Profile phi = make_phi(o.deltas.empty() ? 0.1 : o.deltas.front(), o.resolution);
      if (resolution_warning(phi, r, F.spec().h))
        std::cerr << "warning: profile support spans fewer than 4 cells at r = " << r << '\n';
      g = o.b ? b_average(F, phi, make_theta(phi), r, opt) : smooth_average(F, phi, r, opt);
    }
    store_grid(g, need(o.out, "--out"));
    return 0;
  }
  if (cmd == "variation" || cmd == "jumps") {
    csv_only(o);
    const int d = o.funcs.empty() ? o.d : load_tuple(o.funcs).d();
    const Exponent p = parse_exponent(o.p, d);
    std::vector<long> indices;
    const DistanceTable dist = input_distances(o, p, indices);
    Output out(o);
    if (cmd == "variation") {
      write_variation_csv(out.stream(), o.rho, p, rho_variation(dist, o.rho), indices);
      return 0;
    }
    if (o.eps.empty()) throw UsageError("--eps is required");
    out.stream() << "eps,p,count,pairs\n";
    out.stream().precision(17);
    for (double e : o.eps) {
      const JumpCount J = count_eps_jumps(dist, e);
      out.stream() << e << ',' << p.str() << ',' << J.count << ',';
      for (std::size_t a = 0; a < J.pairs.size(); ++a)
        out.stream() << (a ? ";" : "") << indices[J.pairs[a].m] << '-' << indices[J.pairs[a].n];
      out.stream() << '\n';
    }
    return 0;
  }
  if (cmd == "lambda") {
    csv_only(o);
    const FunctionTuple F = load_tuple(need(o.funcs, "--funcs"));
    const GridFunction F0 = load_grid(need(o.f0, "--f0"));
    const Profile phi = make_phi(o.deltas.empty() ? 0.1 : o.deltas.front(), o.resolution);
    const Kernel K = input_kernel(o, F.spec(), phi);
    Output out(o);
    out.stream().precision(17);
    out.stream() << "lambda\n" << evaluate_lambda(K, F, F0) << '\n';
    return 0;
  }
  if (cmd == "symbol-check") {
    csv_only(o);
    const GridSpec box = cubic_grid(o.d, o.grid, o.h > 0 ? o.h : 0.25);
    const Profile phi = make_phi(o.deltas.empty() ? 0.1 : o.deltas.front(), o.resolution);
    const Kernel K = input_kernel(o, box, phi);
    Output out(o);
    write_symbol_csv(out.stream(), symbol_decay_check(K, o.max_order, o.padding));
    return 0;
  }
  if (cmd == "verify") {
    const ExperimentConfig c =
        experiment_config(o, given, o.experiment, given("--seed") ? o.seed : default_config(o.experiment).seed);
    return emit_report(o, run_experiment(c));
  }
  if (cmd == "sweep") {
    if (o.experiments.empty()) throw UsageError("--experiments is required");
    ExperimentReport all;
    for (const auto& id : o.experiments) {
      std::vector<std::uint64_t> seeds = o.seeds;
      if (seeds.empty()) seeds.push_back(given("--seed") ? o.seed : default_config(id).seed);
      for (auto s : seeds) {
        ExperimentConfig c = experiment_config(o, given, id, s);
        auto rep = run_experiment(c);
        for (auto& r : rep.rows) all.rows.push_back(std::move(r));
      }
    }
    return emit_report(o, all);
  }
  throw UsageError("a subcommand is required");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"cubevar: cubic averages, variation norms and entangled forms"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key = value file with option defaults");
  Options o;

  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--out", o.out, "output file (stdout if omitted for CSV)");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp header line");
  app.add_option("--d", o.d, "dimension")->check(CLI::Range(1, 3));
  app.add_option("--grid", o.grid, "cells per axis")->check(CLI::PositiveNumber);
  app.add_option("--h", o.h, "cell width")->check(CLI::PositiveNumber);
  app.add_option("--delta", o.deltas, "mollifier parameter(s)")->check(CLI::Range(0.0, 1.0));
  app.add_option("--r", o.radii, "scale(s) r")->check(CLI::PositiveNumber);
  app.add_option("--rho", o.rho, "variation exponent")->check(CLI::Range(1.0, std::numeric_limits<double>::max()));
  app.add_option("--p", o.p, "norm exponent: number, a/b, q or inf");
  app.add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  app.add_option("--n", o.n, "average index")->check(CLI::PositiveNumber);
  app.add_option("--n-max", o.n_max, "largest index")->check(CLI::PositiveNumber);
  app.add_option("--eps", o.eps, "jump size(s)")->check(CLI::PositiveNumber);
  app.add_option("--k-lo", o.k_lo);
  app.add_option("--k-hi", o.k_hi);
  app.add_option("--signs", o.signs, "kernel signs")->check(CLI::Range(-1.0, 1.0));
  app.add_option("--scales", o.scales, "scale set J");
  app.add_option("--partition", o.partition)->check(CLI::PositiveNumber);
  app.add_option("--r-points", o.r_points)->check(CLI::Range(2, 1 << 20));
  app.add_option("--slack", o.slack)->check(CLI::NonNegativeNumber);
  app.add_flag("--no-refine", o.no_refine);
  app.add_option("--resolution", o.resolution, "profile samples per unit")->check(CLI::Range(1.0, 1e7));
  app.add_option("--system-size", o.system_size)->check(CLI::PositiveNumber);
  app.add_option("--horizon", o.horizon)->check(CLI::PositiveNumber);
  app.add_option("--lattice", o.lattice)->check(CLI::PositiveNumber);
  app.add_option("--points", o.points)->check(CLI::PositiveNumber);
  app.add_option("--system", o.system, "system file");
  app.add_option("--funcs", o.funcs, "tuple manifest or system tuple file");
  app.add_option("--f0", o.f0, "grid file for F_0");
  app.add_option("--kernel", o.kernel, "kernel manifest");
  app.add_option("--kind", o.kind, "system kind or kernel kind");
  app.add_option("--values", o.values, "scalar sequence");
  app.add_option("--sequence", o.sequence, "sequence manifest");
  app.add_option("--offset", o.offset)->check(CLI::IsMember({"center", "node"}));
  app.add_option("--max-order", o.max_order)->check(CLI::Range(0, 2));
  app.add_option("--padding", o.padding)->check(CLI::Range(1, 16));
  app.add_flag("--b", o.b, "smooth-avg: compute B_r instead of A_r^phi");
  app.add_flag("--smooth", o.smooth, "gen-funcs: bumps only");
  app.add_flag("--integer", o.integer, "gen-funcs: integer lattice tuple");
  app.add_option("--experiments", o.experiments)->delimiter(',');
  app.add_option("--seeds", o.seeds)->delimiter(',');

  for (const char* name : {"gen-system", "gen-funcs", "avg", "box-avg", "smooth-avg", "variation", "jumps",
                           "lambda", "symbol-check", "sweep"})
    app.add_subcommand(name);
  auto* verify = app.add_subcommand("verify", "run one experiment");
  verify->add_option("experiment", o.experiment)
      ->required()
      ->check(CLI::IsMember({"E1", "E2", "E3", "E4", "E5", "E6", "E7"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  const Given given = [&app](const char* name) { return app.count(name) > 0; };
  try {
    return dispatch(app.get_subcommands().front()->get_name(), o, given);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> store = {"cubevar"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : store) argv.push_back(s.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cubevar
