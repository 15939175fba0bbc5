#pragma once

// Essential spectrum of q* p q for a piecewise continuous projector symbol:
// the union of spec(p(k)) over k and, at each jump, of the spectra of the
// interpolation mu p(k0) + (1 - mu) p(k0+). A non-trivial interval in it puts
// the half-chain factor in type III_1.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "embz/toeplitz.hpp"

namespace embz {

inline constexpr double kSeparationTol = 1e-7;
inline constexpr double kIntervalMergeSlack = 1e-12;

struct TwoProjectionData {
  bool commuting_difference = false;
  std::vector<double> cosines;  // chi_j of the generic part, ascending
};

namespace detail {

/// Eigenvalues (ascending) of B^dag A B compressed to ran(B), with B the
/// orthonormal range basis of projector `onto`.
inline std::vector<double> compressed_spectrum(const Matrix& a, const Matrix& onto) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(onto);
  if (es.info() != Eigen::Success) throw NumericalError("two-projection: eigensolver failed");
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
    if (es.eigenvalues()(j) > 0.5) cols.push_back(j);
  }
  if (cols.empty()) return {};
  Matrix basis(onto.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(cols[i]);
  const Matrix c = basis.adjoint() * a * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> inner(0.5 * (c + c.adjoint()), Eigen::EigenvaluesOnly);
  if (inner.info() != Eigen::Success) throw NumericalError("two-projection: eigensolver failed");
  std::vector<double> out(inner.eigenvalues().data(), inner.eigenvalues().data() + inner.eigenvalues().size());
  return out;
}

}  // namespace detail

/// Halmos decomposition of a projector pair. Eigenvalues of Q compressed to
/// ran(P) are the squared cosines of the principal angles; those within tol
/// of 0 (and likewise for P compressed to ran(Q)) are commuting directions
/// where P and Q differ, those inside (tol, 1 - tol) form the generic part.
inline TwoProjectionData two_projection_analysis(const Matrix& P, const Matrix& Q, double tol = kSeparationTol) {
  if (P.rows() != Q.rows() || P.cols() != Q.cols()) {
    throw ValidationError("two_projection_analysis: projectors of different dimension");
  }
  if (!is_projector(P) || !is_projector(Q)) {
    throw ValidationError("two_projection_analysis: inputs must be Hermitian idempotents (1e-9)");
  }
  TwoProjectionData out;
  const auto qp = detail::compressed_spectrum(Q, P);  // on ran P
  const auto pq = detail::compressed_spectrum(P, Q);  // on ran Q
  for (double w : qp) {
    if (w <= tol) out.commuting_difference = true;
    else if (w < 1.0 - tol) out.cosines.push_back(std::sqrt(w));
  }
  for (double w : pq) {
    if (w <= tol) out.commuting_difference = true;
  }
  std::sort(out.cosines.begin(), out.cosines.end());
  return out;
}

/// Eigenvalues of mu p + (1 - mu) q on one generic 2x2 block with cosine chi.
/// The radicand 4(chi^2-1)(mu-mu^2)+1 is evaluated as 4 chi^2 mu(1-mu) + (1-2mu)^2,
/// which is exactly chi^2 at mu = 1/2.
namespace detail {
inline double lambda_root(double mu, double chi) {
  const double d = 1.0 - 2.0 * mu;
  return std::sqrt(std::max(0.0, 4.0 * chi * chi * mu * (1.0 - mu) + d * d));
}
}  // namespace detail

inline double lambda_plus(double mu, double chi) { return 0.5 * (1.0 + detail::lambda_root(mu, chi)); }
inline double lambda_minus(double mu, double chi) { return 0.5 * (1.0 - detail::lambda_root(mu, chi)); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Ranges of lambda_- and lambda_+ over mu in [0,1]: [0,(1-chi)/2] and [(1+chi)/2,1].
inline std::pair<Interval, Interval> interpolation_eigencurves(double chi) {
  if (!(chi > 0.0 && chi < 1.0)) {
    throw ValidationError("interpolation_eigencurves: chi must lie in (0,1), got " + std::to_string(chi));
  }
  return {Interval{0.0, 0.5 * (1.0 - chi)}, Interval{0.5 * (1.0 + chi), 1.0}};
}

struct EssentialSpectrumSet {
  std::vector<Interval> intervals;  // disjoint, sorted, lo < hi
  std::vector<double> points;       // subset of {0, 1} not covered by intervals

  bool has_interval() const { return !intervals.empty(); }

  bool contains(double x, double slack = kIntervalMergeSlack) const {
    for (const auto& iv : intervals)
      if (x >= iv.lo - slack && x <= iv.hi + slack) return true;
    for (double p : points)
      if (std::fabs(p - x) <= slack) return true;
    return false;
  }
};

/// Closed-interval union with slack; points inside an interval are dropped.
inline EssentialSpectrumSet normalize(std::vector<Interval> intervals, std::vector<double> points) {
  EssentialSpectrumSet out;
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const auto& iv : intervals) {
    if (!(iv.hi > iv.lo)) {
      points.push_back(iv.lo);
      continue;
    }
    if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi + kIntervalMergeSlack) {
      out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
    } else {
      out.intervals.push_back(iv);
    }
  }
  std::sort(points.begin(), points.end());
  for (double p : points) {
    bool covered = false;
    for (const auto& iv : out.intervals)
      covered = covered || (p >= iv.lo - kIntervalMergeSlack && p <= iv.hi + kIntervalMergeSlack);
    if (!covered && (out.points.empty() || std::fabs(out.points.back() - p) > kIntervalMergeSlack)) {
      out.points.push_back(p);
    }
  }
  return out;
}

/// Grid size used to sample spec(p(k)) on the continuous part.
inline constexpr int kEssSampleGrid = 1024;

inline EssentialSpectrumSet essential_spectrum(const ProjectorSymbol& psym, double tol = kSeparationTol) {
  std::vector<Interval> intervals;
  bool has_zero = false, has_one = false;
  for (int i = 0; i < kEssSampleGrid; ++i) {
    const Matrix p = psym(kTwoPi * i / kEssSampleGrid);
    const double rank = p.trace().real();
    has_one = has_one || rank > 0.5;
    has_zero = has_zero || rank < psym.bands() - 0.5;
  }
  for (const auto& d : psym.discontinuities()) {
    has_one = has_one || d.left_limit.trace().real() > 0.5 || d.right_limit.trace().real() > 0.5;
    has_zero = has_zero || d.left_limit.trace().real() < psym.bands() - 0.5 ||
               d.right_limit.trace().real() < psym.bands() - 0.5;
    const auto tp = two_projection_analysis(d.left_limit, d.right_limit, tol);
    if (tp.commuting_difference) intervals.push_back({0.0, 1.0});
    for (double chi : tp.cosines) {
      const auto [lower, upper] = interpolation_eigencurves(chi);
      intervals.push_back(lower);
      intervals.push_back(upper);
    }
  }
  std::vector<double> points;
  if (has_zero) points.push_back(0.0);
  if (has_one) points.push_back(1.0);
  return normalize(std::move(intervals), std::move(points));
}

/// Trace-class evidence: sum_j min(lambda_j, 1 - lambda_j) over finite
/// sections of doubling size.
struct SectionDecayEvidence {
  std::vector<std::pair<int, double>> sums;  // (N, sum)
  double drift = 0.0;                        // (max - min) / max
  bool bounded = false;
};

inline constexpr double kDecayDriftTol = 0.05;

inline SectionDecayEvidence evidence_from_spectra(const std::vector<ModeSpectrum>& spectra,
                                                  const std::vector<int>& sizes) {
  SectionDecayEvidence ev;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    double s = 0.0;
    for (double v : spectra[i].values) s += std::min(v, 1.0 - v);
    ev.sums.emplace_back(sizes[i], s);
  }
  double lo = INFINITY, hi = 0.0;
  for (const auto& [_, s] : ev.sums) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  ev.drift = hi > 0.0 ? (hi - lo) / hi : 0.0;
  // absolute floor keeps rounding-level sums (exact projections) bounded
  ev.bounded = !ev.sums.empty() && (hi - lo) <= kDecayDriftTol * hi + 1e-9;
  return ev;
}

inline SectionDecayEvidence section_decay_evidence(const ProjectorSymbol& psym,
                                                   const std::vector<int>& sizes = {128, 256, 512, 1024},
                                                   int grid_size = 8192) {
  std::vector<ModeSpectrum> spectra;
  for (int n : sizes) spectra.push_back(correlation_spectrum(finite_section(psym, n, std::max(grid_size, 4 * n))));
  return evidence_from_spectra(spectra, sizes);
}

enum class FactorType { TypeIII1, TypeI_candidate, Indeterminate };

inline const char* to_string(FactorType t) {
  switch (t) {
    case FactorType::TypeIII1: return "TypeIII1";
    case FactorType::TypeI_candidate: return "TypeI_candidate";
    case FactorType::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct FactorVerdict {
  FactorType verdict = FactorType::Indeterminate;
  std::vector<std::string> justification;
};

/// Interval in the essential spectrum => type III_1. Otherwise a type I
/// candidate needs ess within {0,1}, a convergent Hilbert-Schmidt test and
/// bounded section decay; this is evidence, never a proof.
inline FactorVerdict classify_factor_type(const EssentialSpectrumSet& ess, const HsVerdict& hs,
                                          const std::optional<SectionDecayEvidence>& decay) {
  FactorVerdict v;
  for (const auto& iv : ess.intervals) {
    if (iv.lo < iv.hi) {
      v.verdict = FactorType::TypeIII1;
      v.justification.push_back("essential spectrum contains [" + std::to_string(iv.lo) + ", " +
                                std::to_string(iv.hi) + "] with a < b: type III_1 by the quasi-free classification rule");
      return v;
    }
  }
  v.justification.push_back("no interval in the essential spectrum: III_1 criterion not met");
  bool ok = true;
  const bool ess_in_01 = std::all_of(ess.points.begin(), ess.points.end(),
                                     [](double p) { return p == 0.0 || p == 1.0; });
  if (!ess_in_01) {
    ok = false;
    v.justification.push_back("essential spectrum not contained in {0,1}");
  } else {
    v.justification.push_back("essential spectrum contained in {0,1}");
  }
  if (hs.kind != HsVerdictKind::Convergent) {
    ok = false;
    v.justification.push_back(std::string("Hilbert-Schmidt test is ") + to_string(hs.kind) +
                              ": q p q^perp not shown Hilbert-Schmidt, so not type I");
  } else {
    v.justification.push_back("Hilbert-Schmidt test convergent");
  }
  if (!decay) {
    ok = false;
    v.justification.push_back("no finite-section decay evidence supplied");
  } else if (!decay->bounded) {
    ok = false;
    v.justification.push_back("sum of min(lambda, 1-lambda) drifts by " + std::to_string(100 * decay->drift) +
                              "% across N: trace-class decay not supported");
  } else {
    v.justification.push_back("sum of min(lambda, 1-lambda) bounded across N (trace-class evidence)");
  }
  v.verdict = ok ? FactorType::TypeI_candidate : FactorType::Indeterminate;
  return v;
}

}  // namespace embz
