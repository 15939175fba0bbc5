#pragma once

// Positive spectral projector symbol p_+(k) = chi_(0,inf)(hhat(k)), its jump
// points, and the criticality test (a Hamiltonian is critical iff p_+ jumps).

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "embz/hopping.hpp"

namespace embz {

using MatrixFunction = std::function<Matrix(double)>;

struct SpectralTolerances {
  double zero_tol = 1e-10;
  int grid_size = 4096;
  double jump_threshold = 1e-3;
  int max_jumps = 64;
};

/// Offset used to sample the one-sided limits around a located jump.
inline constexpr double kLimitOffset = 1e-6;
/// Two refined candidates closer than this are the same jump.
inline constexpr double kJumpMergeTol = 1e-9;

struct Discontinuity {
  double location = 0.0;  // k0 in [0, 2pi)
  Matrix left_limit;      // p(k0) = p(k0-)
  Matrix right_limit;     // p(k0+)
  double jump_size = 0.0; // ||left - right||_F
};

struct BandRanks {
  int positive = 0;
  int kernel = 0;
  int negative = 0;
};

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eig(const Matrix& m, double k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) {
    throw NumericalError("hermitian eigensolver failed at k = " + std::to_string(k));
  }
  return es;
}

inline void check_zero_tol(double zero_tol) {
  if (!(zero_tol > 0.0 && zero_tol <= 1e-3)) {
    throw ValidationError("zero_tol must lie in (0, 1e-3], got " + std::to_string(zero_tol));
  }
}

/// Projector onto eigenvectors whose eigenvalue passes `keep`.
template <class Pred>
Matrix spectral_projector(const Eigen::SelfAdjointEigenSolver<Matrix>& es, Pred keep) {
  const auto& w = es.eigenvalues();
  const auto& v = es.eigenvectors();
  Matrix p = Matrix::Zero(v.rows(), v.rows());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (keep(w(j))) p += v.col(j) * v.col(j).adjoint();
  }
  return p;
}

}  // namespace detail

inline Matrix positive_projector_at(const BlockSymbol& symbol, double k, double zero_tol = 1e-10) {
  detail::check_zero_tol(zero_tol);
  const auto es = detail::hermitian_eig(symbol(k), k);
  return detail::spectral_projector(es, [&](double w) { return w > zero_tol; });
}

inline Matrix kernel_projector_at(const BlockSymbol& symbol, double k, double zero_tol = 1e-10) {
  detail::check_zero_tol(zero_tol);
  const auto es = detail::hermitian_eig(symbol(k), k);
  return detail::spectral_projector(es, [&](double w) { return std::fabs(w) <= zero_tol; });
}

inline BandRanks band_ranks_at(const BlockSymbol& symbol, double k, double zero_tol = 1e-10) {
  detail::check_zero_tol(zero_tol);
  const auto es = detail::hermitian_eig(symbol(k), k);
  BandRanks r;
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    const double w = es.eigenvalues()(j);
    if (w > zero_tol) ++r.positive;
    else if (w < -zero_tol) ++r.negative;
    else ++r.kernel;
  }
  return r;
}

/// Optional crossing refinement: `gap` (e.g. min |eigenvalue|) is minimized
/// around each bisected edge and the minimizer replaces the edge when
/// gap <= gap_tol there. This undoes the shift of a simple crossing by the
/// kernel threshold.
struct JumpRefinement {
  std::function<double(double)> gap;
  double gap_tol = 0.0;
};

namespace detail {

/// Golden-section minimizer on [a, b]; interior result or std::nullopt.
inline std::optional<double> refine_crossing(const JumpRefinement& ref, double a, double b) {
  const double lo = a, hi = b;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = ref.gap(c), fd = ref.gap(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = ref.gap(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = ref.gap(d);
    }
  }
  const double k = 0.5 * (a + b);
  const double margin = 0.01 * (hi - lo);
  if (k - lo < margin || hi - k < margin || ref.gap(k) > ref.gap_tol) return std::nullopt;
  return k;
}

}  // namespace detail

/// Grid scan plus bisection. Every jump whose one-sided limits differ by more
/// than jump_threshold is found if the evaluator is continuous elsewhere at
/// the grid scale. Sorted by location.
inline std::vector<Discontinuity> detect_discontinuities(const MatrixFunction& eval, int grid_size,
                                                         double jump_threshold,
                                                         int max_jumps = 64,
                                                         const JumpRefinement& refine = {}) {
  if (grid_size < 256) throw ValidationError("detect_discontinuities: grid_size must be >= 256");
  if (!(jump_threshold > 0.0 && jump_threshold < 1.0)) {
    throw ValidationError("detect_discontinuities: jump_threshold must lie in (0, 1)");
  }
  std::vector<Matrix> samples(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) samples[i] = eval(kTwoPi * i / grid_size);

  std::vector<int> candidates;
  for (int i = 0; i < grid_size; ++i) {
    const Matrix& next = samples[(i + 1) % grid_size];
    if (frobenius_distance(samples[i], next) > jump_threshold) candidates.push_back(i);
  }
  if (static_cast<int>(candidates.size()) > max_jumps) {
    throw NumericalError("detect_discontinuities: " + std::to_string(candidates.size()) +
                         " jump candidates exceed max_jumps = " + std::to_string(max_jumps) +
                         "; the projector symbol does not look piecewise continuous");
  }

  std::vector<double> located;
  for (int i : candidates) {
    double a = kTwoPi * i / grid_size;
    double b = kTwoPi * (i + 1) / grid_size;
    const Matrix pa = samples[i];
    const Matrix pb = samples[(i + 1) % grid_size];
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      const Matrix pm = eval(mid);
      if (frobenius_distance(pm, pa) <= frobenius_distance(pm, pb)) a = mid;
      else b = mid;
    }
    double k = 0.5 * (a + b);
    if (refine.gap) {
      const double w = 0.5 * kLimitOffset;
      if (auto r = detail::refine_crossing(refine, k - w, k + w)) k = *r;
    }
    located.push_back(wrap_angle(k));
  }
  std::sort(located.begin(), located.end());

  std::vector<Discontinuity> out;
  for (double k0 : located) {
    if (!out.empty() && circular_distance(out.back().location, k0) <= kJumpMergeTol) continue;
    if (!out.empty() && circular_distance(out.front().location, k0) <= kJumpMergeTol) continue;
    Discontinuity d;
    d.location = k0;
    d.left_limit = eval(k0 - kLimitOffset);
    d.right_limit = eval(k0 + kLimitOffset);
    d.jump_size = frobenius_distance(d.left_limit, d.right_limit);
    // isolated-point defects (e.g. a band touching zero) have equal limits
    if (d.jump_size > jump_threshold) out.push_back(std::move(d));
  }

  // An isolated zero thickened by zero_tol shows up as two close edges with
  // the same projector outside them; drop such pairs.
  const double pair_width = 2.0 * kTwoPi / grid_size;
  for (bool changed = true; changed && out.size() >= 2;) {
    changed = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t j = (i + 1) % out.size();
      if (i == j) break;
      if (circular_distance(out[i].location, out[j].location) > pair_width) continue;
      if (frobenius_distance(out[i].left_limit, out[j].right_limit) > jump_threshold) continue;
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
      changed = true;
      break;
    }
  }
  return out;
}

/// Projector-valued symbol; the evaluator is the left-continuous
/// representative (returns the left limit at a stored jump point).
class ProjectorSymbol {
 public:
  ProjectorSymbol(int bands, MatrixFunction raw, std::vector<Discontinuity> jumps)
      : bands_(bands), raw_(std::move(raw)), jumps_(std::move(jumps)) {
    std::sort(jumps_.begin(), jumps_.end(),
              [](const Discontinuity& x, const Discontinuity& y) { return x.location < y.location; });
  }

  /// Builds the symbol and populates its discontinuities by grid scan.
  static ProjectorSymbol detect(int bands, MatrixFunction raw, const SpectralTolerances& tol = {},
                                const JumpRefinement& refine = {}) {
    auto jumps = detect_discontinuities(raw, tol.grid_size, tol.jump_threshold, tol.max_jumps, refine);
    return ProjectorSymbol(bands, std::move(raw), std::move(jumps));
  }

  int bands() const { return bands_; }
  const std::vector<Discontinuity>& discontinuities() const { return jumps_; }

  /// Evaluator without the jump-point override; use strictly inside pieces.
  const MatrixFunction& raw() const { return raw_; }

  Matrix operator()(double k) const {
    for (const auto& d : jumps_) {
      if (circular_distance(d.location, k) <= 1e-13) return d.left_limit;
    }
    return raw_(k);
  }

  /// Jump locations, sorted, in [0, 2pi).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    out.reserve(jumps_.size());
    for (const auto& d : jumps_) out.push_back(d.location);
    return out;
  }

 private:
  int bands_;
  MatrixFunction raw_;
  std::vector<Discontinuity> jumps_;
};

enum class KernelPolicy { Empty, Full };

inline ProjectorSymbol ground_state_symbol(const BlockSymbol& symbol, KernelPolicy policy = KernelPolicy::Empty,
                                           const SpectralTolerances& tol = {}) {
  detail::check_zero_tol(tol.zero_tol);
  const double zt = tol.zero_tol;
  MatrixFunction raw;
  if (policy == KernelPolicy::Empty) {
    raw = [symbol, zt](double k) { return positive_projector_at(symbol, k, zt); };
  } else {
    raw = [symbol, zt](double k) {
      const auto es = detail::hermitian_eig(symbol(k), k);
      return detail::spectral_projector(es, [&](double w) { return w >= -zt; });
    };
  }
  JumpRefinement refine{[symbol](double k) { return detail::hermitian_eig(symbol(k), k).eigenvalues().cwiseAbs().minCoeff(); },
                        zt};
  return ProjectorSymbol::detect(symbol.bands(), std::move(raw), tol, refine);
}

/// Constant projector symbol (no jumps).
inline ProjectorSymbol constant_projector_symbol(const Matrix& p) {
  return ProjectorSymbol(static_cast<int>(p.rows()), [p](double) { return p; }, {});
}

struct CriticalityReport {
  bool critical = false;
  std::vector<Discontinuity> evidence;
};

inline CriticalityReport is_critical(const HoppingModel& model, const SpectralTolerances& tol = {}) {
  const auto psym = ground_state_symbol(build_symbol(model), KernelPolicy::Empty, tol);
  return {!psym.discontinuities().empty(), psym.discontinuities()};
}

}  // namespace embz
