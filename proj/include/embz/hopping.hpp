#pragma once

// Translation-invariant single-particle Hamiltonians on a 1D lattice with b
// orbitals per site, stored by their hopping coefficients h(x), and the
// momentum-space symbol hhat(k) = sum_x e^{-ikx} h(x).

#include <bit>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "embz/core.hpp"

namespace embz {

inline constexpr double kHermiticityTol = 1e-12;

struct HoppingModel {
  int bands = 1;
  std::map<int, Matrix> coefficients;  // offset x -> h(x), b x b
  std::string name;

  /// Largest |x| with a stored coefficient (0 for an empty map).
  int radius() const {
    int r = 0;
    for (const auto& [x, _] : coefficients) r = std::max(r, std::abs(x));
    return r;
  }

  /// h(x), or the zero matrix outside the support.
  Matrix at(int x) const {
    auto it = coefficients.find(x);
    if (it == coefficients.end()) return Matrix::Zero(bands, bands);
    return it->second;
  }
};

/// Throws ValidationError naming the first offending offset.
inline void validate(const HoppingModel& model) {
  if (model.bands < 1) throw ValidationError("hopping model: bands must be a positive integer");
  for (const auto& [x, hx] : model.coefficients) {
    if (hx.rows() != model.bands || hx.cols() != model.bands) {
      throw ValidationError("hopping model: coefficient at offset " + std::to_string(x) +
                            " is not " + std::to_string(model.bands) + "x" +
                            std::to_string(model.bands));
    }
  }
  for (const auto& [x, hx] : model.coefficients) {
    const Matrix mirror = model.at(-x);
    const double defect = (mirror - hx.adjoint()).cwiseAbs().maxCoeff();
    if (defect > kHermiticityTol) {
      throw ValidationError("hopping model: non-hermitian hopping at offset " + std::to_string(x) +
                            " (h(" + std::to_string(-x) + ") != h(" + std::to_string(x) +
                            ")^dagger, defect " + std::to_string(defect) + ")");
    }
  }
}

/// hhat(k) as a trigonometric polynomial; periodic by construction.
class BlockSymbol {
 public:
  BlockSymbol(int bands, std::vector<std::pair<int, Matrix>> terms)
      : bands_(bands), terms_(std::move(terms)) {}

  int bands() const { return bands_; }
  const std::vector<std::pair<int, Matrix>>& terms() const { return terms_; }

  Matrix operator()(double k) const {
    Matrix out = Matrix::Zero(bands_, bands_);
    for (const auto& [x, hx] : terms_) out += std::polar(1.0, -k * x) * hx;
    return out;
  }

 private:
  int bands_;
  std::vector<std::pair<int, Matrix>> terms_;
};

inline BlockSymbol build_symbol(const HoppingModel& model) {
  validate(model);
  std::vector<std::pair<int, Matrix>> terms(model.coefficients.begin(), model.coefficients.end());
  return BlockSymbol(model.bands, std::move(terms));
}

/// Entrywise sum of two models with equal band count.
inline HoppingModel operator+(const HoppingModel& a, const HoppingModel& b) {
  if (a.bands != b.bands) throw ValidationError("cannot add hopping models with different band counts");
  HoppingModel out{a.bands, a.coefficients, a.name + "+" + b.name};
  for (const auto& [x, hx] : b.coefficients) {
    auto [it, inserted] = out.coefficients.try_emplace(x, hx);
    if (!inserted) it->second += hx;
  }
  return out;
}

enum class ZooModel { XX, SSH, GappedShiftedXX, Custom };

struct ZooParams {
  double mu = 3.0;  // on-site shift for GappedShiftedXX, |mu| > 2
  int bands = 1;    // Custom only
  std::optional<std::map<int, Matrix>> coefficients;  // Custom only
  std::string name;                                   // Custom only
};

inline ZooModel parse_zoo_name(std::string_view name) {
  if (name == "XX" || name == "xx") return ZooModel::XX;
  if (name == "SSH" || name == "ssh") return ZooModel::SSH;
  if (name == "gapped_shifted_XX" || name == "gapped") return ZooModel::GappedShiftedXX;
  if (name == "custom") return ZooModel::Custom;
  throw ValidationError("unknown model name '" + std::string(name) + "'");
}

inline HoppingModel model_zoo(ZooModel which, const ZooParams& params = {}) {
  auto one = [](int b, int r, int c) {
    Matrix m = Matrix::Zero(b, b);
    m(r, c) = 1.0;
    return m;
  };
  HoppingModel m;
  switch (which) {
    case ZooModel::XX:
      m.bands = 1;
      m.name = "XX";
      m.coefficients = {{-1, one(1, 0, 0)}, {1, one(1, 0, 0)}};
      break;
    case ZooModel::SSH:
      // a_1^dag(x) a_2(x+1) sits at offset x-y = -1 in h_lm(x-y).
      m.bands = 2;
      m.name = "SSH";
      m.coefficients = {{0, one(2, 0, 1) + one(2, 1, 0)}, {-1, one(2, 0, 1)}, {1, one(2, 1, 0)}};
      break;
    case ZooModel::GappedShiftedXX:
      if (!(std::fabs(params.mu) > 2.0)) {
        throw ValidationError("gapped_shifted_XX requires |mu| > 2, got mu = " +
                              std::to_string(params.mu));
      }
      m.bands = 1;
      m.name = "gapped_shifted_XX";
      m.coefficients = {{-1, one(1, 0, 0)}, {0, params.mu * one(1, 0, 0)}, {1, one(1, 0, 0)}};
      break;
    case ZooModel::Custom:
      if (!params.coefficients) throw ValidationError("custom model requires an explicit coefficient map");
      m.bands = params.bands;
      m.name = params.name.empty() ? "custom" : params.name;
      m.coefficients = *params.coefficients;
      break;
  }
  validate(m);
  return m;
}

/// (1/2pi) int e^{ikx} f(k) dk by the uniform trapezoidal rule on grid_size
/// nodes. Exact for trigonometric polynomials of degree < grid_size / 2.
template <class Fn>
Matrix fourier_coefficient(Fn&& f, int x, int grid_size) {
  if (grid_size < 4 * (std::abs(x) + 1) || !std::has_single_bit(static_cast<unsigned>(grid_size))) {
    throw ValidationError("fourier_coefficient: grid_size must be a power of two >= 4(|x|+1), got " +
                          std::to_string(grid_size) + " for x = " + std::to_string(x));
  }
  Matrix acc;
  for (int i = 0; i < grid_size; ++i) {
    const double k = kTwoPi * i / grid_size;
    const Matrix fk = f(k);
    if (i == 0) acc = Matrix::Zero(fk.rows(), fk.cols());
    // reduce the phase exactly on the grid instead of forming k*x
    const long long phase = (static_cast<long long>(i) * x) % grid_size;
    acc += std::polar(1.0, kTwoPi * phase / grid_size) * fk;
  }
  return acc / static_cast<double>(grid_size);
}

}  // namespace embz
