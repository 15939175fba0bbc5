#pragma once

// Gauge-invariant quasi-free states: Wick correlators from the two-point
// operator s, and the many-body spectrum of a restricted state, which is the
// product of independent two-level modes diag(lambda_j, 1 - lambda_j).

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "embz/core.hpp"

namespace embz {

struct ModeSpectrum {
  std::vector<double> values;  // ascending, each in [0, 1]
  std::string source;

  std::size_t size() const { return values.size(); }
};

inline void validate(const ModeSpectrum& modes) {
  for (std::size_t i = 0; i < modes.values.size(); ++i) {
    const double v = modes.values[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("mode spectrum: value " + std::to_string(v) + " outside [0,1]");
    }
    if (i > 0 && v < modes.values[i - 1]) throw ValidationError("mode spectrum: values not ascending");
  }
}

struct TruncatedSpectrum {
  std::vector<double> entries;  // descending, each in (0, 1]
  double discarded_mass = 0.0;  // 1 - sum(entries)
};

/// omega_s(a(xi_1)...a(xi_m) a^dag(eta_n)...a^dag(eta_1)) = delta_mn det[<xi_j|s|eta_k>].
inline cdouble wick_correlator(const Matrix& s, std::span<const Vector> xi, std::span<const Vector> eta) {
  for (auto group : {xi, eta}) {
    for (const auto& v : group) {
      if (v.size() != s.rows()) {
        throw ValidationError("wick_correlator: vector of dimension " + std::to_string(v.size()) +
                              " does not match s of dimension " + std::to_string(s.rows()));
      }
    }
  }
  if (xi.size() != eta.size()) return {0.0, 0.0};
  const auto m = static_cast<Eigen::Index>(xi.size());
  if (m == 0) return {1.0, 0.0};
  Matrix gram(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector sxi = s.adjoint() * xi[j];  // <xi_j| s = (s^dag xi_j)^dag
    for (Eigen::Index k = 0; k < m; ++k) gram(j, k) = sxi.dot(eta[k]);
  }
  return gram.partialPivLu().determinant();
}

/// Modes this close to 0 or 1 are collapsed before the search.
inline constexpr double kModeCollapseTol = 1e-14;

/// The K largest products prod_j mu_j, mu_j in {lambda_j, 1 - lambda_j}.
///
/// Lazy best-first enumeration: sort the per-mode ratios
/// r_j = min(lambda_j, 1-lambda_j) / max(...) descending. A node is a subset
/// of flipped modes identified by its last flipped index j; its two children
/// append j+1 or replace j by j+1. Each subset is reached exactly once, and
/// children never exceed their parent, so heap pops come out sorted.
inline TruncatedSpectrum product_spectrum_topk(const ModeSpectrum& modes, std::size_t K,
                                               double mass_floor = 0.0) {
  if (K < 1) throw ValidationError("product_spectrum_topk: K must be >= 1");
  if (modes.values.empty()) throw ValidationError("product_spectrum_topk: empty mode spectrum");
  if (!(mass_floor >= 0.0 && mass_floor < 1.0)) {
    throw ValidationError("product_spectrum_topk: mass_floor must lie in [0, 1)");
  }
  validate(modes);

  double base = 1.0;
  std::vector<double> ratios;
  for (double lam : modes.values) {
    const double hi = std::max(lam, 1.0 - lam);
    const double lo = std::min(lam, 1.0 - lam);
    base *= hi;
    if (lo >= kModeCollapseTol) ratios.push_back(lo / hi);
  }
  std::sort(ratios.begin(), ratios.end(), std::greater<>());

  TruncatedSpectrum out;
  out.entries.reserve(std::min<std::size_t>(K, std::size_t{1} << std::min<std::size_t>(ratios.size(), 20)));
  // Kahan sum keeps the discarded-mass bookkeeping at rounding level
  double mass = 0.0, carry = 0.0;
  auto push = [&](double v) {
    out.entries.push_back(v);
    const double y = v - carry;
    const double t = mass + y;
    carry = (t - mass) - y;
    mass = t;
  };

  using Node = std::pair<double, std::size_t>;  // (value, last flipped index)
  std::priority_queue<Node> heap;
  push(base);
  if (!ratios.empty()) heap.emplace(base * ratios[0], 0);
  while (!heap.empty() && out.entries.size() < K && mass < 1.0 - mass_floor) {
    const auto [v, j] = heap.top();
    heap.pop();
    if (!(v > 0.0)) break;
    push(v);
    if (j + 1 < ratios.size()) {
      heap.emplace(v * ratios[j + 1], j + 1);
      heap.emplace(v / ratios[j] * ratios[j + 1], j + 1);
    }
  }
  out.discarded_mass = std::max(0.0, 1.0 - mass);
  return out;
}

inline double binary_entropy_bits(double p) {
  auto term = [](double x) { return x > 0.0 ? -x * std::log2(x) : 0.0; };
  return term(p) + term(1.0 - p);
}

/// Von Neumann entropy of the product state, in bits.
inline double entanglement_entropy(const ModeSpectrum& modes) {
  double s = 0.0;
  for (double lam : modes.values) s += binary_entropy_bits(lam);
  return s;
}

}  // namespace embz
