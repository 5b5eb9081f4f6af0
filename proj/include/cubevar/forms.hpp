#pragma once

// Kernels K1 (dyadic differences of phi) and K2 (theta/phi scale sums), the
// entangled multilinear form Lambda, Fourier-symbol diagnostics and random
// sign sampling of square functions.

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cubevar/analytic.hpp"
#include "cubevar/core.hpp"

namespace cubevar {

enum class KernelKind { k1, k2, custom };

struct KernelProvenance {
  KernelKind kind = KernelKind::custom;
  std::vector<double> signs;
  int k_lo = 0, k_hi = 0;      // K1: k runs over k_lo+1 .. k_hi
  std::vector<int> scale_set;  // K2: the set of j
  double r = 1.0;              // K2 base scale
  double delta = 0.0;
};

/// Kernel sampled as cell averages; cell i is centred at s = i h, so the
/// grid origin is (i_min - 1/2) h along each axis.
struct Kernel {
  GridFunction grid;
  KernelProvenance provenance;

  /// Integer shift of the first cell along each axis.
  Index first_shift() const;
};

/// K1(s) = sum_{k=k_lo+1}^{k_hi} eps_k (phi_{2^{k-1}}^{(x)d} - phi_{2^k}^{(x)d}).
/// `box` is the grid the kernel will act on; its h is used and its extent
/// bounds the largest admissible scale.
Kernel build_k1(const Profile& phi, std::span<const double> signs, int k_lo, int k_hi, const GridSpec& box);
/// The same kernel assembled from the psi decomposition
/// sum_{j != 0} sum_k eps_k prod_l phi^{(j_l)}_{2^k}(s_l), phi^{(1)} = psi.
GridFunction k1_psi_decomposition(const Profile& phi, std::span<const double> signs, int k_lo, int k_hi,
                                  const GridSpec& box);

/// K2(s) = sum_{j in J} eps_j sum_i theta_{2^j r}(s_i) prod_{k != i} phi_{2^j r}(s_k).
Kernel build_k2(const Profile& phi, const Profile& theta, std::span<const double> signs,
                std::span<const int> scale_set, double r, const GridSpec& box);

/// Integral of the kernel.
double kernel_mass(const Kernel& K);

/// Lambda = int int K(s) prod_{j in {0,1}^d} F_j(x + j.s) ds dx, midpoint in
/// x over the cells of F0, exact in s for step functions.
double evaluate_lambda(const Kernel& K, const FunctionTuple& F, const GridFunction& F0);

/// int g F0 dx (midpoint), the dual pairing.
double pairing(const GridFunction& g, const GridFunction& F0);

struct SymbolShell {
  int shell;           // 2^shell <= |xi| / xi_min < 2^{shell+1}
  std::string alpha;   // multi-index, comma separated
  double shell_max;    // max |xi|^{|alpha|} |d^alpha K^(xi)| over the shell
};

/// Discrete Fourier transform of the kernel samples on a zero-padded grid;
/// derivatives by multiplying samples with (-2 pi i s)^alpha. Reports the
/// dyadic-shell maxima for every |alpha| <= max_order.
std::vector<SymbolShell> symbol_decay_check(const Kernel& K, int max_order, int padding = 2);
void write_symbol_csv(std::ostream& os, const std::vector<SymbolShell>& rows, bool header = true);

struct KhintchineSample {
  double signed_mean = 0;  // E_eps || sum eps_k D_k ||_q
  double square_norm = 0;  // || (sum |D_k|^2)^{1/2} ||_q
  double ratio = 0;        // signed_mean / square_norm
  bool exhaustive = false;
  std::size_t samples = 0;
};

/// Exhaustive over all 2^K sign patterns when K <= exhaustive_limit,
/// otherwise `trials` Monte Carlo draws, trial t using stream (seed, t).
KhintchineSample khintchine_sample(std::span<const GridFunction> family, std::size_t trials,
                                   std::uint64_t seed, Exponent q, std::size_t exhaustive_limit = 10);

/// Pointwise (sum |D_k|^2)^{1/2}.
GridFunction square_function(std::span<const GridFunction> family);

}  // namespace cubevar
