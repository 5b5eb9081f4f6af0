#include "cubevar/variation.hpp"

#include <cmath>

namespace cubevar {

DistanceTable::DistanceTable(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist)
    : n_(n), d_(n * (n > 0 ? n - 1 : 0) / 2) {
  std::size_t at = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d_[at++] = dist(i, j);
}

DistanceTable DistanceTable::scalars(const std::vector<double>& a) {
  return DistanceTable(a.size(), [&](std::size_t i, std::size_t j) { return std::abs(a[j] - a[i]); });
}

double DistanceTable::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  // row i starts after sum_{r<i} (n - 1 - r) entries
  const std::size_t row = i * (2 * n_ - i - 1) / 2;
  return d_[row + (j - i - 1)];
}

DistanceTable distance_table(const AverageSequence& seq, Exponent p) {
  return DistanceTable(seq.frames.size(), [&](std::size_t i, std::size_t j) {
    return lp_distance(seq.frames[i], seq.frames[j], p);
  });
}

DistanceTable distance_table(const SystemSequence& seq, const FiniteSystem& sys, Exponent p) {
  return DistanceTable(seq.frames.size(), [&](std::size_t i, std::size_t j) {
    return lp_distance(seq.frames[i], seq.frames[j], p, sys);
  });
}

VariationResult rho_variation(const DistanceTable& dist, double rho) {
  if (!(rho >= 1.0)) throw InvalidArgument("rho must be >= 1");
  const std::size_t n = dist.size();
  if (n == 0) throw EmptySequence("variation of an empty sequence");
  // best[j]: largest sum of dist^rho over paths ending at j
  std::vector<double> best(n, 0.0);
  std::vector<std::size_t> prev(n, n);
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = best[i] + std::pow(dist(i, j), rho);
      if (cand > best[j]) {
        best[j] = cand;
        prev[j] = i;
      }
    }
  std::size_t end = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (best[j] > best[end]) end = j;
  VariationResult out;
  for (std::size_t at = end; at != n; at = prev[at]) out.witness.insert(out.witness.begin(), at);
  out.value = std::pow(best[end], 1.0 / rho);
  return out;
}

VariationResult rho_variation(const AverageSequence& seq, double rho, Exponent p) {
  if (seq.frames.empty()) throw EmptySequence("variation of an empty sequence");
  return rho_variation(distance_table(seq, p), rho);
}

VariationResult rho_variation(const SystemSequence& seq, const FiniteSystem& sys, double rho, Exponent p) {
  if (seq.frames.empty()) throw EmptySequence("variation of an empty sequence");
  return rho_variation(distance_table(seq, sys, p), rho);
}

double witness_value(const DistanceTable& dist, const std::vector<std::size_t>& witness, double rho) {
  double s = 0.0;
  for (std::size_t a = 1; a < witness.size(); ++a) s += std::pow(dist(witness[a - 1], witness[a]), rho);
  return std::pow(s, 1.0 / rho);
}

JumpCount count_eps_jumps(const DistanceTable& dist, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  JumpCount out;
  std::size_t start = 0;
  const std::size_t n = dist.size();
  for (std::size_t j = start + 1; j < n; ++j) {
    for (std::size_t i = start; i < j; ++i) {
      if (dist(i, j) >= eps) {
        out.pairs.push_back({i, j});
        start = j;
        break;
      }
    }
  }
  out.count = out.pairs.size();
  return out;
}

namespace {

int floor_log2(long v) { return 63 - __builtin_clzl(static_cast<unsigned long>(v)); }

}  // namespace

DyadicSplit dyadic_split(const std::vector<std::pair<long, long>>& pairs) {
  DyadicSplit out;
  long prev_n = 0;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const auto [m, n] = pairs[a];
    if (m < 1 || n <= m || m < prev_n) throw InvalidPairs("pairs must satisfy 1 <= m_1 < n_1 <= m_2 < ...");
    prev_n = n;
    const int km = floor_log2(m), kn = floor_log2(n);
    if (km == kn) {
      out.short_jumps.push_back(a);
    } else {
      // l with 2^l < n <= 2^{l+1}
      const int l = floor_log2(n - 1);
      out.long_jumps.push_back({a, km, l});
    }
  }
  return out;
}

void write_variation_csv(std::ostream& os, double rho, Exponent p, const VariationResult& v,
                         const std::vector<long>& indices, bool header) {
  if (header) os << "rho,p,value,witness\n";
  os.precision(17);
  os << rho << ',' << p.str() << ',' << v.value << ',';
  for (std::size_t a = 0; a < v.witness.size(); ++a) {
    if (a) os << ';';
    os << (indices.empty() ? static_cast<long>(v.witness[a]) : indices[v.witness[a]]);
  }
  os << '\n';
}

}  // namespace cubevar
