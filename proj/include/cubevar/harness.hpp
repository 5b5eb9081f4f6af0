#pragma once

// Randomised test bed and the experiment suite E1..E7. Every experiment is
// a pure function of its config; trial t draws from stream (seed, t).

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "cubevar/analytic.hpp"
#include "cubevar/core.hpp"
#include "cubevar/ergodic.hpp"

namespace cubevar {

// ---------------------------------------------------------------------------
// test bed

struct FieldOptions {
  bool bumps = true;
  bool steps = true;
};

/// A compactly supported function on R^d: 3-6 smooth bumps plus random-sign
/// steps on a coarse lattice, all inside the box [lo, hi).
struct RandomField {
  struct Bump {
    std::array<double, kMaxDim> center{};
    double radius = 1;
    double amplitude = 0;
  };
  int d = 1;
  std::array<double, kMaxDim> lo{}, hi{};
  std::vector<Bump> bumps;
  int coarse = 4;                   // step lattice cells per axis
  std::vector<double> step_values;  // coarse^d, row-major

  double operator()(std::span<const double> x) const;
};

RandomField random_field(std::mt19937_64& rng, int d, std::array<double, kMaxDim> lo,
                         std::array<double, kMaxDim> hi, const FieldOptions& opt = {});
/// Cell-centre samples of the field.
GridFunction sample_field(const RandomField& f, const GridSpec& spec);

/// 2^d - 1 random fields supported in the central half of the grid box.
std::vector<RandomField> random_fields(std::mt19937_64& rng, const GridSpec& spec,
                                       const FieldOptions& opt = {});
FunctionTuple sample_tuple(const std::vector<RandomField>& fields, const GridSpec& spec);
FunctionTuple random_tuple(std::mt19937_64& rng, const GridSpec& spec, const FieldOptions& opt = {});

/// Integer-lattice tuple with independent values in [-1,1] on [0, L)^d (h = 1).
FunctionTuple random_integer_tuple(std::mt19937_64& rng, int d, std::size_t L);

enum class SystemKind { rotation, permutation };

/// Rotation: X = Z_{m_1} x .. x Z_{m_k} with random shifts, uniform weights.
/// Permutation: T_l = sigma^{a_l} for one random permutation sigma, weights
/// constant on the cycles of sigma but otherwise random.
FiniteSystem random_system(std::mt19937_64& rng, int d, std::size_t max_size, SystemKind kind);
/// Z_M^d with T_l x = x + v_l for random v_l.
FiniteSystem random_torus_rotation(std::mt19937_64& rng, int d, std::size_t M);
SystemTuple random_system_tuple(std::mt19937_64& rng, const FiniteSystem& sys);

// ---------------------------------------------------------------------------
// experiments

struct ExperimentConfig {
  std::string experiment = "E1";
  int d = 2;
  std::size_t grid = 32;            // G, cells per axis
  double h = 0;                     // cell width; 0 selects the experiment default
  std::vector<double> deltas;       // mollifier parameters
  std::vector<double> radii;        // r values (E3)
  double rho = 2.5;
  double p = 2;                     // L^p(X) exponent (E2)
  std::size_t trials = 5;
  std::uint64_t seed = 1;
  long n_max = 16;                  // sequence indices 1..n_max
  std::vector<double> eps;          // jump sizes (E4)
  int k_lo = 0, k_hi = 4;           // dyadic scale range (E6)
  std::vector<int> scale_set;       // J (E7)
  std::size_t partition = 8;        // m, partition intervals (E7)
  std::size_t r_points = 64;        // r-quadrature points (E7)
  double slack = 0.05;              // discretisation slack for asserted bounds
  bool refine = true;               // also run the refined discretisation
  double resolution = 512;          // profile sample resolution
  std::size_t system_size = 32;     // M per axis (E2), max size (E5)
  long horizon = 8;                 // N (E5)
  std::size_t lattice = 8;          // L (E5)
  std::size_t points = 32;          // sampled x per system (E5)
};

/// Defaults for E1..E7; throws ConfigError for an unknown id.
ExperimentConfig default_config(const std::string& id);
/// Throws ConfigError on inconsistent settings.
void validate(const ExperimentConfig& c);

struct ReportRow {
  std::string experiment;
  std::size_t trial = 0;
  int d = 2;
  std::size_t grid = 0;
  std::string param_json;
  double lhs = 0, rhs = 0, slack = 0;
  bool pass = true;
  double empirical_constant = 0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  bool all_pass() const;
};

ExperimentReport run_experiment(const ExperimentConfig& c);

/// Theorem 2: rho-variation of (A_n) in L^q over the product of L^{2^d} norms.
ExperimentReport run_e1(const ExperimentConfig& c);
/// Theorem 1: rho-variation of (M_n) in L^p(X) over the product of sup norms,
/// plus the exact p <= q and p > q comparison steps.
ExperimentReport run_e2(const ExperimentConfig& c);
/// ||A_r^phi - A_r||_q <= d delta prod ||F_j||_{2^d}.
ExperimentReport run_e3(const ExperimentConfig& c);
/// Jump counts J(eps) of (A_n) for normalised tuples.
ExperimentReport run_e4(const ExperimentConfig& c);
/// The same on a caller-supplied tuple; ConfigError unless every
/// ||F_j||_{2^d} = 1 within 1e-12.
ExperimentReport run_e4(const ExperimentConfig& c, const FunctionTuple& F);
/// Transference identity and the explicit 2^{d+1}/m transfer bound.
ExperimentReport run_e5(const ExperimentConfig& c);
/// Long jumps: power-mean and square-function steps, Khintchine ratio.
ExperimentReport run_e6(const ExperimentConfig& c);
/// Short jumps: sum ||A_{r_i} - A_{r_{i-1}}||_q^q <= int_1^2 ||B_r||_q^q dr.
ExperimentReport run_e7(const ExperimentConfig& c);

void write_report_csv(std::ostream& os, const ExperimentReport& r, bool header = true);
void write_report_json(std::ostream& os, const ExperimentReport& r);

}  // namespace cubevar
