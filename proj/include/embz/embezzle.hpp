#pragma once

// Monopartite embezzlement errors
//   eps = min_u || omega (x) psi - u (omega (x) |0><0|) u* ||_1
// for spectra of finite half-chain states, a brute-force unitary search that
// cross-checks the closed form, the bipartite lift sqrt(eps), and scans over
// chain lengths that expose embezzling families.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "embz/finchain.hpp"
#include "embz/quasifree.hpp"

namespace embz {

inline constexpr const char* kNormConvention =
    "trace-norm distance ||rho_1 - rho_2||_1 of density operators; errors range in [0,2]";

struct TargetState {
  std::vector<double> schmidt_squares;  // descending, sums to 1

  int dimension() const { return static_cast<int>(schmidt_squares.size()); }
};

inline void validate(const TargetState& psi) {
  if (psi.schmidt_squares.empty()) throw ValidationError("target state: empty Schmidt spectrum");
  double sum = 0.0;
  for (std::size_t i = 0; i < psi.schmidt_squares.size(); ++i) {
    const double v = psi.schmidt_squares[i];
    if (v < 0.0) throw ValidationError("target state: negative Schmidt coefficient");
    if (i > 0 && v > psi.schmidt_squares[i - 1]) throw ValidationError("target state: not sorted descending");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw ValidationError("target state: Schmidt squares do not sum to 1");
}

inline TargetState maximally_entangled(int d) {
  if (d < 1) throw ValidationError("maximally_entangled: d must be >= 1");
  return {std::vector<double>(static_cast<std::size_t>(d), 1.0 / d)};
}

/// l1 distance of the two vectors after sorting descending and zero padding.
/// Equals the minimal trace distance between the unitary orbits of the two
/// (commuting) density operators.
inline double spectrum_distance(std::span<const double> a, std::span<const double> b) {
  for (auto v : {a, b}) {
    double sum = 0.0;
    for (double x : v) {
      if (x < 0.0) throw ValidationError("spectrum_distance: negative entry");
      sum += x;
    }
    if (sum > 1.0 + 1e-9) throw ValidationError("spectrum_distance: mass exceeds 1");
  }
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end(), std::greater<>());
  std::sort(y.begin(), y.end(), std::greater<>());
  const std::size_t n = std::max(x.size(), y.size());
  x.resize(n, 0.0);
  y.resize(n, 0.0);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d += std::fabs(x[i] - y[i]);
  return d;
}

struct ErrorEstimate {
  double value = 0.0;
  double uncertainty = 0.0;  // 2 * discarded mass
};

/// Products rho_i s_k against rho padded to K*d entries.
inline ErrorEstimate monopartite_error(const TruncatedSpectrum& rho, const TargetState& psi) {
  std::vector<double> products;
  products.reserve(rho.entries.size() * psi.schmidt_squares.size());
  for (double r : rho.entries)
    for (double s : psi.schmidt_squares) products.push_back(r * s);
  return {spectrum_distance(products, rho.entries), 2.0 * rho.discarded_mass};
}

/// sqrt(eps): bound on the bipartite vector-norm error given a monopartite
/// trace-norm error eps.
inline double bipartite_bound(double epsilon_mono) {
  if (epsilon_mono < 0.0) throw ValidationError("bipartite_bound: negative epsilon");
  return std::sqrt(epsilon_mono);
}

inline constexpr int kOracleMaxDim = 8;
inline constexpr double kOracleMinStep = 1e-7;
inline constexpr double kOracleSmoothing = 0.1;

namespace detail {

inline double trace_norm(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// Trace norm and its smoothing sum_i sqrt(lambda_i^2 + delta^2).
inline std::pair<double, double> trace_norm_smoothed(const Matrix& hermitian, double delta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  double exact = 0.0, smooth = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    exact += std::fabs(l);
    smooth += std::sqrt(l * l + delta * delta);
  }
  return {exact, smooth};
}

inline Matrix haar_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix z(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) z(r, c) = cdouble(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const cdouble d = rmat(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

}  // namespace detail

/// Direct numerical minimization of ||D1 - u D2 u*||_1 over u in U(dim) with
/// D1 = diag(rho (x) psi), D2 = diag(rho (x) e_1). Random Haar starts, then
/// accept-if-better rotations in random coordinate 2-planes with a step that
/// halves after repeated failures. Deterministic for a given seed.
inline double bruteforce_unitary_oracle(std::span<const double> rho, const TargetState& psi, std::uint64_t seed,
                                        int iterations = 20000, int restarts = 2) {
  const int r = static_cast<int>(rho.size());
  const int d = psi.dimension();
  const int dim = r * d;
  if (r < 1 || dim > kOracleMaxDim) {
    throw ValidationError("bruteforce_unitary_oracle: total dimension " + std::to_string(dim) +
                          " outside [1, " + std::to_string(kOracleMaxDim) + "]");
  }
  if (iterations < 1000) throw ValidationError("bruteforce_unitary_oracle: need >= 1000 iterations");

  Matrix target = Matrix::Zero(dim, dim);
  Matrix start = Matrix::Zero(dim, dim);
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < d; ++k) target(i * d + k, i * d + k) = rho[i] * psi.schmidt_squares[k];
    start(i * d, i * d) = rho[i];
  }
  if (dim == 1) return detail::trace_norm(target - start);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, dim - 1);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double best = INFINITY;
  for (int restart = 0; restart < restarts; ++restart) {
    const Matrix u0 = detail::haar_unitary(dim, rng);
    Matrix m = u0 * start * u0.adjoint();
    double step = 1.0;
    auto [f, fs] = detail::trace_norm_smoothed(target - m, kOracleSmoothing * step);
    best = std::min(best, f);
    int fails = 0;
    for (int it = 0; it < iterations && step > kOracleMinStep; ++it) {
      const int i = pick(rng);
      int j = pick(rng);
      while (j == i) j = pick(rng);
      const double theta = step * gauss(rng);
      const cdouble e = std::polar(1.0, phase(rng));
      const double c = std::cos(theta), sn = std::sin(theta);
      // trial = G m G^dag with G the rotation in the (i, j) plane
      Matrix trial = m;
      for (int col = 0; col < dim; ++col) {
        const cdouble mi = trial(i, col), mj = trial(j, col);
        trial(i, col) = c * mi - sn * e * mj;
        trial(j, col) = sn * std::conj(e) * mi + c * mj;
      }
      for (int row = 0; row < dim; ++row) {
        const cdouble mi = trial(row, i), mj = trial(row, j);
        trial(row, i) = c * mi - sn * std::conj(e) * mj;
        trial(row, j) = sn * e * mi + c * mj;
      }
      const auto [ft, fts] = detail::trace_norm_smoothed(target - trial, kOracleSmoothing * step);
      best = std::min(best, ft);
      if (fts < fs) {
        m = trial;
        f = ft;
        fs = fts;
        fails = 0;
      } else if (++fails >= 2 * dim * dim) {
        step *= 0.5;
        fails = 0;
        fs = detail::trace_norm_smoothed(target - m, kOracleSmoothing * step).second;
      }
    }
  }
  return best;
}

/// Descending probability vectors on the grid (1/L) Z^d, L = ceil(d / mesh);
/// every sorted probability vector lies within l1 distance mesh of one.
inline std::vector<TargetState> epsilon_cover(int d, double mesh) {
  if (d < 1) throw ValidationError("epsilon_cover: d must be >= 1");
  if (!(mesh > 0.0)) throw ValidationError("epsilon_cover: mesh must be positive");
  const int L = static_cast<int>(std::ceil(d / mesh));
  std::vector<TargetState> out;
  std::vector<int> parts;
  std::function<void(int, int)> rec = [&](int remaining, int cap) {
    if (static_cast<int>(parts.size()) == d) {
      if (remaining == 0) {
        TargetState t;
        for (int p : parts) t.schmidt_squares.push_back(static_cast<double>(p) / L);
        out.push_back(std::move(t));
      }
      return;
    }
    const int slots = d - static_cast<int>(parts.size());
    for (int v = std::min(cap, remaining); v >= 0; --v) {
      if (static_cast<long long>(v) * slots < remaining) break;
      parts.push_back(v);
      rec(remaining - v, v);
      parts.pop_back();
    }
  };
  rec(L, L);
  return out;
}

enum class TargetPolicy { MaximallyEntangled, WorstCaseCover };

inline const char* to_string(TargetPolicy p) {
  return p == TargetPolicy::MaximallyEntangled ? "max-ent" : "cover";
}

struct ScanConfig {
  std::vector<int> lengths;
  std::vector<int> dims;
  std::vector<double> eps_grid;
  TargetPolicy policy = TargetPolicy::MaximallyEntangled;
  std::size_t topk = 4096;
  double mass_floor = 1e-6;
  FiniteKernelPolicy kernel_policy = FiniteKernelPolicy::Empty;
  int jobs = 1;
};

struct EmbezzleRow {
  int n = 0;
  int d = 0;
  TargetPolicy policy = TargetPolicy::MaximallyEntangled;
  double epsilon = 0.0;
  double uncertainty = 0.0;
  double bipartite_bound = 0.0;  // sqrt(epsilon + uncertainty)
  int kernel_dimension = 0;
};

struct Threshold {
  double eps = 0.0;
  int d = 0;
  std::optional<int> n;  // smallest scanned n with epsilon + uncertainty < eps
};

struct EmbezzleReport {
  std::vector<EmbezzleRow> rows;  // sorted by n, then d
  std::vector<Threshold> thresholds;
  std::vector<std::pair<int, int>> non_monotone;  // (n, d) where epsilon increased
  double cover_mesh = 0.0;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline EmbezzleReport family_scan(const HoppingModel& model, const ScanConfig& cfg) {
  if (cfg.lengths.empty() || cfg.dims.empty()) throw ValidationError("family_scan: lengths and dims must be nonempty");
  for (std::size_t i = 0; i < cfg.lengths.size(); ++i) {
    if (cfg.lengths[i] % 2 != 0) throw ValidationError("family_scan: chain lengths must be even");
    if (i > 0 && cfg.lengths[i] <= cfg.lengths[i - 1]) throw ValidationError("family_scan: lengths must ascend");
  }
  for (int d : cfg.dims)
    if (d < 1) throw ValidationError("family_scan: dims must be >= 1");

  EmbezzleReport report;
  std::vector<std::vector<TargetState>> targets;
  if (cfg.policy == TargetPolicy::WorstCaseCover) {
    if (cfg.eps_grid.empty()) throw ValidationError("family_scan: cover policy needs an eps grid");
    report.cover_mesh = *std::min_element(cfg.eps_grid.begin(), cfg.eps_grid.end()) / 4.0;
  }
  for (int d : cfg.dims) {
    targets.push_back(cfg.policy == TargetPolicy::MaximallyEntangled
                          ? std::vector<TargetState>{maximally_entangled(d)}
                          : epsilon_cover(d, report.cover_mesh));
  }

  const std::size_t nd = cfg.dims.size();
  report.rows.resize(cfg.lengths.size() * nd);
  parallel_for(cfg.lengths.size(), cfg.jobs, [&](std::size_t li) {
    const int n = cfg.lengths[li];
    const auto chain = open_chain_hamiltonian(model, n, n / 2);
    const auto ground = finite_ground_projection(chain, cfg.kernel_policy);
    const auto modes = halfchain_modes(chain, ground.projector);
    const auto rho = product_spectrum_topk(modes, cfg.topk, cfg.mass_floor);
    for (std::size_t di = 0; di < nd; ++di) {
      ErrorEstimate worst{-1.0, 0.0};
      for (const auto& psi : targets[di]) {
        const auto e = monopartite_error(rho, psi);
        if (e.value > worst.value) worst = e;
      }
      EmbezzleRow row{n, cfg.dims[di], cfg.policy, worst.value, worst.uncertainty,
                      bipartite_bound(worst.value + worst.uncertainty), ground.kernel_dimension};
      report.rows[li * nd + di] = row;
    }
  });

  for (std::size_t di = 0; di < nd; ++di) {
    for (std::size_t li = 1; li < cfg.lengths.size(); ++li) {
      if (report.rows[li * nd + di].epsilon > report.rows[(li - 1) * nd + di].epsilon + 1e-12) {
        report.non_monotone.emplace_back(cfg.lengths[li], cfg.dims[di]);
      }
    }
    for (double eps : cfg.eps_grid) {
      Threshold t{eps, cfg.dims[di], std::nullopt};
      for (std::size_t li = 0; li < cfg.lengths.size(); ++li) {
        const auto& row = report.rows[li * nd + di];
        if (row.epsilon + row.uncertainty < eps) {
          t.n = row.n;
          break;
        }
      }
      report.thresholds.push_back(t);
    }
  }
  return report;
}

struct OracleInstance {
  std::vector<double> rho;  // descending probability vector
  TargetState psi;
};

/// Seeded random instances with len(rho) * d <= kOracleMaxDim.
inline std::vector<OracleInstance> random_oracle_instances(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  auto probs = [&](int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : v) sum += (x = ex(rng));
    for (auto& x : v) x /= sum;
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
  };
  std::vector<OracleInstance> out;
  for (int i = 0; i < count; ++i) {
    const int r = 1 + static_cast<int>(rng() % 4);
    const int d = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(kOracleMaxDim / r));
    auto rho = probs(r);
    auto psi = probs(d);
    // renormalize in descending order so the target sums to 1 at rounding level
    double sum = 0.0;
    for (double x : psi) sum += x;
    for (auto& x : psi) x /= sum;
    out.push_back({std::move(rho), TargetState{std::move(psi)}});
  }
  return out;
}

struct OracleComparison {
  double closed_form = 0.0;
  double oracle = 0.0;
};

inline constexpr double kOracleAgreementTol = 1e-3;
inline constexpr double kOracleUndercutTol = 1e-6;

/// Closed form vs brute force on seeded instances; instance i uses seed + i.
inline std::vector<OracleComparison> compare_with_oracle(const std::vector<OracleInstance>& instances,
                                                         std::uint64_t seed, int iterations = 20000,
                                                         int jobs = 1) {
  std::vector<OracleComparison> out(instances.size());
  parallel_for(instances.size(), jobs, [&](std::size_t i) {
    const auto& inst = instances[i];
    std::vector<double> products;
    for (double r : inst.rho)
      for (double s : inst.psi.schmidt_squares) products.push_back(r * s);
    out[i].closed_form = spectrum_distance(products, inst.rho);
    out[i].oracle = bruteforce_unitary_oracle(inst.rho, inst.psi, seed + i, iterations);
  });
  return out;
}

}  // namespace embz
