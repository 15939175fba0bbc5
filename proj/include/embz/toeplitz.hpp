#pragma once

// Finite sections of the half-chain correlation operator q* p q as block
// Toeplitz matrices, their spectra, and the Hilbert-Schmidt mass of q p q^perp.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <Eigen/Eigenvalues>

#include "embz/quasifree.hpp"
#include "embz/spectral.hpp"

namespace embz {

inline constexpr int kMaxSectionBlocks = 4096;

namespace detail {

inline constexpr int kGaussOrder = 20;
/// Panel width times the largest frequency; keeps 20-point Gauss-Legendre
/// at rounding level for e^{ikm}.
inline constexpr double kPanelPhaseBudget = 8.0;

struct QuadratureNode {
  double k;
  double weight;  // includes the 1/2pi normalization
};

/// Composite Gauss-Legendre rule on the circle, split at the breakpoints so
/// that no panel straddles a jump.
inline std::vector<QuadratureNode> piecewise_rule(const std::vector<double>& breakpoints, int max_offset,
                                                  int min_nodes) {
  using Rule = boost::math::quadrature::gauss<double, kGaussOrder>;
  std::vector<double> cuts = breakpoints;
  if (cuts.empty()) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());

  const double width_by_phase = kPanelPhaseBudget / std::max(1, max_offset);
  const double width_by_count = kTwoPi * kGaussOrder / std::max(min_nodes, kGaussOrder);
  const double max_width = std::min(width_by_phase, width_by_count);

  std::vector<QuadratureNode> nodes;
  const auto& absc = Rule::abscissa();
  const auto& wts = Rule::weights();
  for (std::size_t p = 0; p < cuts.size(); ++p) {
    const double lo = cuts[p];
    const double hi = (p + 1 < cuts.size()) ? cuts[p + 1] : cuts[0] + kTwoPi;
    if (hi - lo <= 0.0) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width)));
    const double h = (hi - lo) / panels;
    for (int q = 0; q < panels; ++q) {
      const double mid = lo + (q + 0.5) * h;
      const double half = 0.5 * h;
      // boost stores the non-negative half of the symmetric rule
      for (std::size_t i = 0; i < absc.size(); ++i) {
        const double w = wts[i] * half / kTwoPi;
        if (absc[i] == 0.0) {
          nodes.push_back({mid, w});
        } else {
          nodes.push_back({mid - half * absc[i], w});
          nodes.push_back({mid + half * absc[i], w});
        }
      }
    }
  }
  return nodes;
}

}  // namespace detail

/// Fourier coefficients Phihat_m = (1/2pi) int e^{ikm} p(k) dk for
/// m = 0..max_offset (negative offsets are the adjoints). Integrates
/// piecewise between the symbol's jumps with at least min_nodes nodes. The
/// rule resolves every offset up to kMaxSectionBlocks, so the node set does
/// not depend on max_offset below that.
inline std::vector<Matrix> symbol_fourier_coefficients(const ProjectorSymbol& psym, int max_offset,
                                                       int min_nodes = 4096) {
  if (max_offset < 0) throw ValidationError("symbol_fourier_coefficients: negative max_offset");
  const auto nodes =
      detail::piecewise_rule(psym.breakpoints(), std::max(max_offset, kMaxSectionBlocks), min_nodes);
  const int b = psym.bands();
  const std::size_t bb = static_cast<std::size_t>(b) * b;
  std::vector<cdouble> flat((static_cast<std::size_t>(max_offset) + 1) * bb, cdouble{0.0, 0.0});
  std::vector<cdouble> carry(flat.size(), cdouble{0.0, 0.0});  // Kahan compensation
  std::vector<cdouble> pk(bb);
  for (const auto& node : nodes) {
    const Matrix p = psym.raw()(node.k);
    for (int c = 0; c < b; ++c)
      for (int r = 0; r < b; ++r) pk[static_cast<std::size_t>(c) * b + r] = p(r, c) * node.weight;
    const cdouble step = std::polar(1.0, node.k);
    cdouble phase = 1.0;
    cdouble* out = flat.data();
    cdouble* c = carry.data();
    for (int m = 0; m <= max_offset; ++m, out += bb, c += bb) {
      for (std::size_t e = 0; e < bb; ++e) {
        const cdouble y = phase * pk[e] - c[e];
        const cdouble t = out[e] + y;
        c[e] = (t - out[e]) - y;
        out[e] = t;
      }
      // refresh the recurrence periodically to bound drift
      phase = ((m + 1) % 256 == 0) ? std::polar(1.0, node.k * (m + 1)) : phase * step;
    }
  }
  std::vector<Matrix> coeffs;
  coeffs.reserve(static_cast<std::size_t>(max_offset) + 1);
  for (int m = 0; m <= max_offset; ++m) {
    coeffs.emplace_back(Eigen::Map<const Matrix>(flat.data() + static_cast<std::size_t>(m) * bb, b, b));
  }
  return coeffs;
}

struct FiniteSection {
  int blocks = 0;
  int bands = 0;
  Matrix matrix;  // (blocks*bands)^2, block (x,y) = Phihat_{x-y}
};

/// Top-left N blocks of q* p q.
inline FiniteSection finite_section(const ProjectorSymbol& psym, int N, int grid_size = 4096) {
  if (N < 1) throw ValidationError("finite_section: N must be >= 1");
  if (N > kMaxSectionBlocks) {
    throw ValidationError("finite_section: N = " + std::to_string(N) + " exceeds the cap of " +
                          std::to_string(kMaxSectionBlocks) + " blocks");
  }
  if (grid_size < 4 * N) throw ValidationError("finite_section: grid_size must be >= 4N");
  const int b = psym.bands();
  const auto coeffs = symbol_fourier_coefficients(psym, N - 1, grid_size);
  FiniteSection out{N, b, Matrix(N * b, N * b)};
  for (int x = 0; x < N; ++x) {
    for (int y = 0; y < N; ++y) {
      const int m = x - y;
      out.matrix.block(x * b, y * b, b, b) = m >= 0 ? coeffs[m] : Matrix(coeffs[-m].adjoint());
    }
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

/// Finite section built directly from offset coefficients Phihat_0..Phihat_{N-1}.
inline FiniteSection section_from_coefficients(const std::vector<Matrix>& coeffs, int N) {
  if (N < 1 || static_cast<int>(coeffs.size()) < N) {
    throw ValidationError("section_from_coefficients: need N >= 1 coefficients");
  }
  const int b = static_cast<int>(coeffs[0].rows());
  FiniteSection out{N, b, Matrix(N * b, N * b)};
  for (int x = 0; x < N; ++x) {
    for (int y = 0; y < N; ++y) {
      const int m = x - y;
      out.matrix.block(x * b, y * b, b, b) = m >= 0 ? coeffs[m] : Matrix(coeffs[-m].adjoint());
    }
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

/// Sorted eigenvalues of a section whose spectrum must lie in [0,1] up to
/// clip_tol; throws NumericalError otherwise.
inline ModeSpectrum clipped_spectrum(const Matrix& hermitian, double clip_tol, const std::string& source) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed for " + source);
  ModeSpectrum out{{}, source};
  out.values.reserve(static_cast<std::size_t>(es.eigenvalues().size()));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v < -clip_tol || v > 1.0 + clip_tol) {
      throw NumericalError(source + ": eigenvalue " + std::to_string(v) +
                           " outside [0,1] (input is not a projection)");
    }
    out.values.push_back(std::clamp(v, 0.0, 1.0));
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

inline ModeSpectrum correlation_spectrum(const FiniteSection& section, double clip_tol = 1e-8) {
  if (!(clip_tol >= 0.0 && clip_tol <= 1e-6)) {
    throw ValidationError("correlation_spectrum: clip_tol must lie in [0, 1e-6]");
  }
  return clipped_spectrum(section.matrix, clip_tol, "finite section N=" + std::to_string(section.blocks));
}

/// S_m = sum_{j=1}^m j ||Phihat_j||_F^2 for m = 1..M, from ||Phihat_j||_F^2
/// with j = 1..M (index 0 of the input is j = 1).
inline std::vector<double> hs_partial_sums_from_norms(const std::vector<double>& squared_norms) {
  std::vector<double> sums(squared_norms.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < squared_norms.size(); ++i) {
    acc += static_cast<double>(i + 1) * squared_norms[i];
    sums[i] = acc;
  }
  return sums;
}

/// Coefficients with ||Phihat_j||_F below this are quadrature noise and count as 0.
inline constexpr double kCoefficientNoiseFloor = 1e-13;

/// Half-plane Hilbert-Schmidt mass of q p q^perp truncated at offset m,
/// regrouped as sum_j j ||Phihat_j||^2.
inline std::vector<double> hs_offdiagonal_partial_sums(const ProjectorSymbol& psym, int M, int min_nodes = 4096) {
  if (M < 16) throw ValidationError("hs_offdiagonal_partial_sums: M must be >= 16");
  const auto coeffs = symbol_fourier_coefficients(psym, M, min_nodes);
  std::vector<double> norms(static_cast<std::size_t>(M));
  for (int j = 1; j <= M; ++j) {
    const double n2 = coeffs[j].squaredNorm();
    norms[j - 1] = n2 < kCoefficientNoiseFloor * kCoefficientNoiseFloor ? 0.0 : n2;
  }
  return hs_partial_sums_from_norms(norms);
}

enum class HsVerdictKind { Convergent, LogDivergent, Inconclusive };

inline const char* to_string(HsVerdictKind k) {
  switch (k) {
    case HsVerdictKind::Convergent: return "convergent";
    case HsVerdictKind::LogDivergent: return "log_divergent";
    case HsVerdictKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct HsVerdict {
  HsVerdictKind kind = HsVerdictKind::Inconclusive;
  double slope = 0.0;      // c in a + c ln m
  double intercept = 0.0;  // a
  double r_squared = 0.0;
  double tail_increment = 0.0;  // S_M - S_{M/2}
  std::vector<int> checkpoints;
  std::string note;
};

inline constexpr double kHsMinSlope = 0.01;
inline constexpr double kHsMinRSquared = 0.99;
inline constexpr double kHsConvergenceTol = 1e-6;

/// Fits S_m ~ a + c ln m on the dyadic checkpoints m = 16, 32, ..., <= M.
inline HsVerdict hs_divergence_verdict(const std::vector<double>& sums) {
  HsVerdict v;
  const int M = static_cast<int>(sums.size());
  for (int m = 16; m <= M; m *= 2) v.checkpoints.push_back(m);
  if (v.checkpoints.size() < 4) {
    v.note = "fewer than 4 dyadic checkpoints (need M >= 128)";
    return v;
  }
  auto S = [&](int m) { return sums[static_cast<std::size_t>(m) - 1]; };
  const int top = v.checkpoints.back();
  v.tail_increment = S(top) - S(top / 2);

  const double n = static_cast<double>(v.checkpoints.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int m : v.checkpoints) {
    const double x = std::log(static_cast<double>(m));
    const double y = S(m);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  v.slope = (n * sxy - sx * sy) / denom;
  v.intercept = (sy - v.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (int m : v.checkpoints) {
    const double y = S(m);
    const double f = v.intercept + v.slope * std::log(static_cast<double>(m));
    ss_res += (y - f) * (y - f);
    ss_tot += (y - ybar) * (y - ybar);
  }
  v.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;

  if (v.tail_increment <= kHsConvergenceTol * std::max(1.0, S(top))) {
    v.kind = HsVerdictKind::Convergent;
    v.note = "tail increment below tolerance";
  } else if (v.slope > kHsMinSlope && v.r_squared >= kHsMinRSquared) {
    v.kind = HsVerdictKind::LogDivergent;
    v.note = "logarithmic growth";
  } else {
    v.kind = HsVerdictKind::Inconclusive;
    v.note = v.slope > kHsMinSlope ? "growing, but poor logarithmic fit" : "slow growth without convergence";
  }
  return v;
}

}  // namespace embz
