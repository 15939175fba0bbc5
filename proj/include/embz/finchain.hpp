#pragma once

// Open-boundary finite chains: the local terms of H inside n sites, the
// quasi-free ground state projection and the mode spectrum of the left block.

#include <string>

#include <Eigen/Eigenvalues>

#include "embz/hopping.hpp"
#include "embz/toeplitz.hpp"

namespace embz {

struct FiniteChain {
  int sites = 0;
  int bands = 0;
  Matrix single_particle_h;  // (sites*bands)^2, Hermitian
  int cut = 1;               // A = {0..cut-1}, B = {cut..sites-1}
  std::string source;
};

inline FiniteChain open_chain_hamiltonian(const HoppingModel& model, int n, int cut) {
  validate(model);
  if (n < 2) throw ValidationError("open chain: need n >= 2 sites, got " + std::to_string(n));
  if (model.radius() >= n) {
    throw ValidationError("open chain: support radius " + std::to_string(model.radius()) +
                          " does not fit in n = " + std::to_string(n) + " sites");
  }
  if (cut < 1 || cut > n - 1) {
    throw ValidationError("open chain: cut must lie in [1, n-1], got " + std::to_string(cut));
  }
  const int b = model.bands;
  FiniteChain chain{n, b, Matrix::Zero(n * b, n * b), cut,
                    model.name + " n=" + std::to_string(n) + " cut=" + std::to_string(cut)};
  for (const auto& [offset, hx] : model.coefficients) {
    for (int y = 0; y < n; ++y) {
      const int x = y + offset;
      if (x < 0 || x >= n) continue;
      chain.single_particle_h.block(x * b, y * b, b, b) = hx;
    }
  }
  return chain;
}

enum class FiniteKernelPolicy { Empty, Full, Half };

struct GroundProjection {
  Matrix projector;           // p_n
  int kernel_dimension = 0;   // eigenvalues within zero_tol of 0
};

inline GroundProjection finite_ground_projection(const FiniteChain& chain,
                                                 FiniteKernelPolicy policy = FiniteKernelPolicy::Empty,
                                                 double zero_tol = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(chain.single_particle_h);
  if (es.info() != Eigen::Success) throw NumericalError("finite_ground_projection: eigensolver failed");
  const auto& w = es.eigenvalues();
  const auto& v = es.eigenvectors();
  const Eigen::Index dim = w.size();

  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (w(j) > zero_tol) keep.push_back(j);
    else if (w(j) >= -zero_tol) kernel.push_back(j);
  }
  std::size_t take = 0;
  switch (policy) {
    case FiniteKernelPolicy::Empty: take = 0; break;
    case FiniteKernelPolicy::Full: take = kernel.size(); break;
    case FiniteKernelPolicy::Half: take = (kernel.size() + 1) / 2; break;
  }
  keep.insert(keep.end(), kernel.begin(), kernel.begin() + static_cast<std::ptrdiff_t>(take));

  GroundProjection out{Matrix::Zero(dim, dim), static_cast<int>(kernel.size())};
  if (!keep.empty()) {
    Matrix basis(dim, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = v.col(keep[i]);
    out.projector = projector_onto(basis);
  }
  return out;
}

inline constexpr double kHalfchainClipTol = 1e-8;

/// Eigenvalues of the top-left (cut*bands) block of p_n.
inline ModeSpectrum halfchain_modes(const FiniteChain& chain, const Matrix& p_n) {
  const Eigen::Index dim = static_cast<Eigen::Index>(chain.sites) * chain.bands;
  if (p_n.rows() != dim || p_n.cols() != dim) {
    throw ValidationError("halfchain_modes: projection does not match the chain dimension");
  }
  const Eigen::Index a = static_cast<Eigen::Index>(chain.cut) * chain.bands;
  return clipped_spectrum(p_n.topLeftCorner(a, a), kHalfchainClipTol, chain.source);
}

}  // namespace embz
