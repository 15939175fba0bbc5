#include <gtest/gtest.h>

#include "embz/finchain.hpp"
#include "embz/quasifree.hpp"
#include "embz/toeplitz.hpp"
#include "oracles.hpp"

using namespace embz;

namespace {

ModeSpectrum xx_modes(int n, int cut) {
  const auto chain = open_chain_hamiltonian(model_zoo(ZooModel::XX), n, cut);
  return halfchain_modes(chain, finite_ground_projection(chain).projector);
}

}  // namespace

TEST(FinChain, XXSmallHamiltonians) {
  const auto c2 = open_chain_hamiltonian(model_zoo(ZooModel::XX), 2, 1);
  Matrix want2(2, 2);
  want2 << 0, 1, 1, 0;
  EXPECT_EQ(c2.single_particle_h, want2);

  const auto c3 = open_chain_hamiltonian(model_zoo(ZooModel::XX), 3, 1);
  Matrix want3 = Matrix::Zero(3, 3);
  want3(0, 1) = want3(1, 0) = want3(1, 2) = want3(2, 1) = 1.0;
  EXPECT_EQ(c3.single_particle_h, want3);
}

TEST(FinChain, SSHTwoCells) {
  const auto c = open_chain_hamiltonian(model_zoo(ZooModel::SSH), 2, 1);
  // sites (cell, band): 0=(0,1) 1=(0,2) 2=(1,1) 3=(1,2)
  Matrix want = Matrix::Zero(4, 4);
  want(0, 1) = want(1, 0) = 1.0;
  want(2, 3) = want(3, 2) = 1.0;
  // h(-1) couples cell 0 band 1 to cell 1 band 2
  const Matrix hm1 = model_zoo(ZooModel::SSH).at(-1);
  want.block(0, 2, 2, 2) += hm1;
  want.block(2, 0, 2, 2) += hm1.adjoint();
  EXPECT_EQ(c.single_particle_h, want);
  EXPECT_LE(hermiticity_defect(c.single_particle_h), 1e-12);
  // exactly one inter-cell bond, no wraparound
  int inter = 0;
  for (int r = 0; r < 2; ++r)
    for (int col = 2; col < 4; ++col) inter += std::abs(c.single_particle_h(r, col)) > 0 ? 1 : 0;
  EXPECT_EQ(inter, 1);
}

TEST(FinChain, OpenChainPreconditions) {
  const auto xx = model_zoo(ZooModel::XX);
  EXPECT_THROW(open_chain_hamiltonian(xx, 1, 1), ValidationError);
  EXPECT_THROW(open_chain_hamiltonian(xx, 4, 0), ValidationError);
  EXPECT_THROW(open_chain_hamiltonian(xx, 4, 4), ValidationError);
  HoppingModel wide{1, {{3, Matrix::Identity(1, 1)}, {-3, Matrix::Identity(1, 1)}}, "wide"};
  EXPECT_THROW(open_chain_hamiltonian(wide, 3, 1), ValidationError);
  EXPECT_NO_THROW(open_chain_hamiltonian(wide, 4, 2));
}

TEST(FinChain, GroundProjectionExamples) {
  const auto c2 = open_chain_hamiltonian(model_zoo(ZooModel::XX), 2, 1);
  const auto g = finite_ground_projection(c2);
  Matrix want = Matrix::Constant(2, 2, 0.5);
  EXPECT_LT(frobenius_distance(g.projector, want), 1e-12);
  EXPECT_EQ(g.kernel_dimension, 0);

  for (int n : {3, 10, 33}) {
    const auto gc = open_chain_hamiltonian(model_zoo(ZooModel::GappedShiftedXX), n, 1);
    EXPECT_LT(frobenius_distance(finite_ground_projection(gc).projector, Matrix::Identity(n, n)), 1e-10);
  }

  const HoppingModel zero{1, {}, "zero"};
  const auto z = open_chain_hamiltonian(zero, 4, 2);
  EXPECT_EQ(finite_ground_projection(z).projector.norm(), 0.0);
  EXPECT_EQ(finite_ground_projection(z).kernel_dimension, 4);
}

TEST(FinChain, KernelPolicies) {
  const HoppingModel zero{1, {}, "zero"};
  const auto z = open_chain_hamiltonian(zero, 5, 2);
  const auto full = finite_ground_projection(z, FiniteKernelPolicy::Full);
  EXPECT_LT(frobenius_distance(full.projector, Matrix::Identity(5, 5)), 1e-12);
  const auto half = finite_ground_projection(z, FiniteKernelPolicy::Half);
  EXPECT_NEAR(half.projector.trace().real(), 3.0, 1e-12);
  EXPECT_TRUE(is_projector(half.projector));
  // odd XX chain has a single zero mode
  const auto odd = open_chain_hamiltonian(model_zoo(ZooModel::XX), 5, 2);
  EXPECT_EQ(finite_ground_projection(odd).kernel_dimension, 1);
  EXPECT_NEAR(finite_ground_projection(odd, FiniteKernelPolicy::Full).projector.trace().real(), 3.0, 1e-12);
}

TEST(FinChain, HalfChainModeExamples) {
  const auto m = xx_modes(2, 1);
  ASSERT_EQ(m.values.size(), 1u);
  EXPECT_NEAR(m.values[0], 0.5, 1e-12);

  const auto chain = open_chain_hamiltonian(model_zoo(ZooModel::SSH), 6, 3);
  const auto ones = halfchain_modes(chain, Matrix::Identity(12, 12));
  ASSERT_EQ(ones.values.size(), 6u);
  for (double v : ones.values) EXPECT_EQ(v, 1.0);
  const auto zeros = halfchain_modes(chain, Matrix::Zero(12, 12));
  for (double v : zeros.values) EXPECT_EQ(v, 0.0);
}

TEST(FinChain, HalfChainModeErrors) {
  const auto chain = open_chain_hamiltonian(model_zoo(ZooModel::XX), 4, 2);
  EXPECT_THROW(halfchain_modes(chain, Matrix::Identity(3, 3)), ValidationError);
  EXPECT_THROW(halfchain_modes(chain, 1.5 * Matrix::Identity(4, 4)), NumericalError);
}

TEST(FinChain, XXParticleHoleSymmetry) {
  for (int n : {8, 32, 100}) {
    const auto m = xx_modes(n, n / 2);
    const std::size_t k = m.values.size();
    for (std::size_t i = 0; i < k; ++i) ASSERT_NEAR(m.values[i], 1.0 - m.values[k - 1 - i], 1e-9) << "n = " << n;
  }
}

TEST(FinChain, XXEntropyGrowsLogarithmically) {
  std::vector<double> x, y;
  for (int n = 16; n <= 512; n *= 2) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(entanglement_entropy(xx_modes(n, n / 2)));
  }
  const auto fit = oracle::fit_line(x, y);
  EXPECT_GT(fit.slope, 0.0);
  EXPECT_GE(fit.r2, 0.98);
}

TEST(FinChain, ProjectorMatchesDirectOccupation) {
  // sine modes of the open XX chain with positive energy
  const int n = 12;
  const auto chain = open_chain_hamiltonian(model_zoo(ZooModel::XX), n, n / 2);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int q = 1; q <= n; ++q) {
    const double e = 2.0 * std::cos(oracle::pi * q / (n + 1));
    if (e <= 1e-10) continue;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        p(x, y) += 2.0 / (n + 1) * std::sin(oracle::pi * q * (x + 1) / (n + 1)) * std::sin(oracle::pi * q * (y + 1) / (n + 1));
  }
  const auto g = finite_ground_projection(chain);
  EXPECT_LT((g.projector.real() - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FinChain, TranslationConsistencyWithSections) {
  // n = 4m chain cut at m versus the infinite-chain section of size m
  const auto psym = ground_state_symbol(build_symbol(model_zoo(ZooModel::XX)));
  for (int m : {8, 16, 32}) {
    const auto chain_modes = xx_modes(4 * m, m);
    const auto section = correlation_spectrum(finite_section(psym, m));
    ASSERT_EQ(chain_modes.values.size(), section.values.size());
    double dev = 0.0;
    for (std::size_t i = 0; i < section.values.size(); ++i)
      dev = std::max(dev, std::fabs(chain_modes.values[i] - section.values[i]));
    EXPECT_LE(dev, 0.05) << "m = " << m;
  }
}
