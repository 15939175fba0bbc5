#include <gtest/gtest.h>

#include "embz/spectral.hpp"
#include "oracles.hpp"

using namespace embz;

namespace {

HoppingModel gapless_noncritical() {
  Matrix d0(2, 2), d1(2, 2);
  d0 << 1, 0, 0, -1;
  d1 << 0.5, 0, 0, -0.5;
  return HoppingModel{2, {{0, d0}, {1, d1}, {-1, d1}}, "diag(1+cos k, -(1+cos k))"};
}

Matrix ket_projector(cdouble a, cdouble b) {
  Eigen::VectorXcd v(2);
  v << a, b;
  return oracle::rank_one(v);
}

HoppingModel shifted(const HoppingModel& m, double c) {
  HoppingModel out = m;
  Matrix id = Matrix::Identity(m.bands, m.bands) * c;
  auto [it, inserted] = out.coefficients.try_emplace(0, id);
  if (!inserted) it->second += id;
  return out;
}

}  // namespace

TEST(Spectral, PositiveProjectorScalarCases) {
  const auto s = build_symbol(model_zoo(ZooModel::XX));
  EXPECT_EQ(positive_projector_at(s, 0.0)(0, 0), cdouble(1, 0));
  EXPECT_EQ(positive_projector_at(s, kPi)(0, 0), cdouble(0, 0));
}

TEST(Spectral, SSHProjectorAtQuarterTurn) {
  const auto s = build_symbol(model_zoo(ZooModel::SSH));
  const Matrix p = positive_projector_at(s, kPi / 2);
  const Matrix want = ket_projector(std::polar(1.0, kPi / 4), 1.0);
  EXPECT_LT(frobenius_distance(p, want), 1e-12);
}

TEST(Spectral, ZeroTolRange) {
  const auto s = build_symbol(model_zoo(ZooModel::XX));
  EXPECT_THROW(positive_projector_at(s, 0.0, 0.0), ValidationError);
  EXPECT_THROW(positive_projector_at(s, 0.0, 2e-3), ValidationError);
  EXPECT_NO_THROW(positive_projector_at(s, 0.0, 1e-3));
}

TEST(Spectral, KernelBandGoesToKernel) {
  // exact zero of the symbol at k = pi/2 lands in the kernel, not in p+
  const auto s = build_symbol(model_zoo(ZooModel::XX));
  EXPECT_EQ(positive_projector_at(s, kPi / 2)(0, 0), cdouble(0, 0));
  EXPECT_EQ(kernel_projector_at(s, kPi / 2)(0, 0), cdouble(1, 0));
  const auto r = band_ranks_at(s, kPi / 2);
  EXPECT_EQ(r.kernel, 1);
}

TEST(Spectral, XXGroundStateSymbolIsIndicator) {
  const auto psym = ground_state_symbol(build_symbol(model_zoo(ZooModel::XX)));
  for (int i = 0; i < 400; ++i) {
    const double k = kTwoPi * (i + 0.37) / 400;
    const double want = std::cos(k) > 0 ? 1.0 : 0.0;
    EXPECT_EQ(psym(k)(0, 0).real(), want) << "k = " << k;
  }
}

TEST(Spectral, XXDiscontinuities) {
  const auto psym = ground_state_symbol(build_symbol(model_zoo(ZooModel::XX)));
  const auto& jumps = psym.discontinuities();
  ASSERT_EQ(jumps.size(), 2u);
  EXPECT_NEAR(jumps[0].location, kPi / 2, 1e-8);
  EXPECT_NEAR(jumps[1].location, 3 * kPi / 2, 1e-8);
  EXPECT_NEAR(jumps[0].left_limit(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(jumps[0].right_limit(0, 0).real(), 0.0, 1e-12);
  EXPECT_NEAR(jumps[1].left_limit(0, 0).real(), 0.0, 1e-12);
  EXPECT_NEAR(jumps[1].right_limit(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(jumps[0].jump_size, 1.0, 1e-12);
}

TEST(Spectral, SSHSingleDiscontinuityWithLimits) {
  const auto psym = ground_state_symbol(build_symbol(model_zoo(ZooModel::SSH)));
  const auto& jumps = psym.discontinuities();
  ASSERT_EQ(jumps.size(), 1u);
  EXPECT_NEAR(jumps[0].location, kPi, 1e-8);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_LT(frobenius_distance(jumps[0].left_limit, ket_projector(cdouble(0, s), s)), 1e-6);
  EXPECT_LT(frobenius_distance(jumps[0].right_limit, ket_projector(cdouble(0, -s), s)), 1e-6);
}

TEST(Spectral, ConstantSymbolHasNoJumps) {
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  auto f = [p](double) { return p; };
  EXPECT_TRUE(detect_discontinuities(f, 512, 1e-3).empty());
}

TEST(Spectral, NoncriticalControls) {
  EXPECT_FALSE(is_critical(gapless_noncritical()).critical);
  EXPECT_FALSE(is_critical(model_zoo(ZooModel::GappedShiftedXX)).critical);
  EXPECT_TRUE(is_critical(model_zoo(ZooModel::XX)).critical);
  EXPECT_TRUE(is_critical(model_zoo(ZooModel::SSH)).critical);
}

TEST(Spectral, GaplessNoncriticalSymbolIsConstantDiag) {
  const auto psym = ground_state_symbol(build_symbol(gapless_noncritical()));
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 1.0;
  for (int i = 0; i < 256; ++i) {
    const double k = kTwoPi * (i + 0.5) / 256;
    EXPECT_LT(frobenius_distance(psym(k), want), 1e-12);
  }
}

TEST(Spectral, GappedControlIsIdentity) {
  const auto psym = ground_state_symbol(build_symbol(model_zoo(ZooModel::GappedShiftedXX)));
  EXPECT_TRUE(psym.discontinuities().empty());
  for (double k : {0.0, 1.0, kPi, 5.0}) EXPECT_EQ(psym(k)(0, 0), cdouble(1, 0));
}

TEST(Spectral, FullKernelPolicyAddsKernel) {
  const auto s = build_symbol(HoppingModel{2, {}, "zero"});
  const auto empty = ground_state_symbol(s, KernelPolicy::Empty);
  const auto full = ground_state_symbol(s, KernelPolicy::Full);
  EXPECT_EQ(empty(0.3).norm(), 0.0);
  EXPECT_LT(frobenius_distance(full(0.3), Matrix::Identity(2, 2)), 1e-12);
}

TEST(Spectral, DetectorPreconditions) {
  auto f = [](double) { return Matrix::Identity(1, 1); };
  EXPECT_THROW(detect_discontinuities(f, 128, 1e-3), ValidationError);
  EXPECT_THROW(detect_discontinuities(f, 512, 0.0), ValidationError);
  EXPECT_THROW(detect_discontinuities(f, 512, 1.0), ValidationError);
}

TEST(Spectral, TooManyJumpsIsNumericalError) {
  auto comb = [](double k) {
    return Matrix::Constant(1, 1, std::sin(200.0 * k) > 0 ? 1.0 : 0.0);
  };
  EXPECT_THROW(detect_discontinuities(comb, 4096, 1e-3, 64), NumericalError);
}

TEST(Spectral, ReturnedProjectorsAreProjectors) {
  for (auto m : {model_zoo(ZooModel::XX), model_zoo(ZooModel::SSH), gapless_noncritical()}) {
    const auto psym = ground_state_symbol(build_symbol(m));
    for (int i = 0; i < 512; ++i) {
      const Matrix p = psym(kTwoPi * i / 512);
      ASSERT_LE(idempotency_defect(p), 1e-9);
      Eigen::SelfAdjointEigenSolver<Matrix> es(p);
      for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        const double w = es.eigenvalues()(j);
        ASSERT_LE(std::min(std::fabs(w), std::fabs(w - 1.0)), 1e-9);
      }
    }
    for (const auto& d : psym.discontinuities()) {
      EXPECT_TRUE(is_projector(d.left_limit));
      EXPECT_TRUE(is_projector(d.right_limit));
    }
  }
}

TEST(Spectral, ContinuityAwayFromJumps) {
  for (auto m : {model_zoo(ZooModel::XX), model_zoo(ZooModel::SSH)}) {
    SpectralTolerances tol;
    const auto psym = ground_state_symbol(build_symbol(m), KernelPolicy::Empty, tol);
    const int n = tol.grid_size;
    for (int i = 0; i < n; ++i) {
      const double a = kTwoPi * i / n, b = kTwoPi * (i + 1) / n;
      bool flagged = false;
      for (double k0 : psym.breakpoints())
        if (k0 >= a - kJumpMergeTol && k0 <= b + kJumpMergeTol) flagged = true;
      if (flagged) continue;
      ASSERT_LE(frobenius_distance(psym.raw()(a), psym.raw()(b)), tol.jump_threshold) << "i = " << i;
    }
  }
}

TEST(Spectral, RanksSumToBands) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const int b = 2 + trial % 3;
    HoppingModel m{b, {}, "random"};
    const Matrix h1 = oracle::random_hermitian(b, rng) + cdouble(0, 1) * oracle::random_hermitian(b, rng);
    m.coefficients[1] = h1;
    m.coefficients[-1] = h1.adjoint();
    m.coefficients[0] = oracle::random_hermitian(b, rng);
    const auto s = build_symbol(m);
    for (int i = 0; i < 256; ++i) {
      const auto r = band_ranks_at(s, kTwoPi * i / 256);
      ASSERT_EQ(r.positive + r.kernel + r.negative, b);
    }
  }
}

TEST(Spectral, IdentityShiftInsideGapKeepsJumpList) {
  // gapped spectra: any shift smaller than the gap keeps the (empty) list
  const auto g = model_zoo(ZooModel::GappedShiftedXX);
  for (double c : {-0.9, -0.5, 0.5, 0.9}) EXPECT_TRUE(is_critical(shifted(g, c)).evidence.empty());
  // gapless: a shift far below the resolvable scale leaves jumps in place
  const auto base = is_critical(model_zoo(ZooModel::XX)).evidence;
  const auto moved = is_critical(shifted(model_zoo(ZooModel::XX), 1e-13)).evidence;
  ASSERT_EQ(base.size(), moved.size());
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(base[i].location, moved[i].location, 1e-8);
  const auto ssh = is_critical(model_zoo(ZooModel::SSH)).evidence;
  const auto ssh_moved = is_critical(shifted(model_zoo(ZooModel::SSH), 1e-13)).evidence;
  ASSERT_EQ(ssh.size(), ssh_moved.size());
  EXPECT_NEAR(ssh[0].location, ssh_moved[0].location, 1e-8);
}

TEST(Spectral, EvaluatorIsLeftContinuousAtJumps) {
  const auto psym = ground_state_symbol(build_symbol(model_zoo(ZooModel::XX)));
  for (const auto& d : psym.discontinuities()) EXPECT_EQ(psym(d.location), d.left_limit);
}
