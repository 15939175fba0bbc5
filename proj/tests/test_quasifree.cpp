#include <gtest/gtest.h>

#include <random>

#include "embz/quasifree.hpp"
#include "oracles.hpp"

using namespace embz;

namespace {

std::vector<Vector> random_vectors(int count, int dim, std::mt19937_64& rng) {
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) out.push_back(oracle::random_vector(dim, rng));
  return out;
}

ModeSpectrum random_modes(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModeSpectrum m{{}, "random"};
  for (int i = 0; i < n; ++i) m.values.push_back(u(rng));
  std::sort(m.values.begin(), m.values.end());
  return m;
}

}  // namespace

TEST(QuasiFree, WickSingleFactorIsMatrixElement) {
  std::mt19937_64 rng(4);
  const Matrix s = oracle::random_density(4, rng);
  const auto xi = random_vectors(1, 4, rng), eta = random_vectors(1, 4, rng);
  const cdouble want = xi[0].dot(s * eta[0]);
  EXPECT_LT(std::abs(wick_correlator(s, xi, eta) - want), 1e-13);
}

TEST(QuasiFree, WickLengthMismatchVanishes) {
  std::mt19937_64 rng(5);
  const Matrix s = oracle::random_density(3, rng);
  const auto xi = random_vectors(1, 3, rng), eta = random_vectors(2, 3, rng);
  EXPECT_EQ(wick_correlator(s, xi, eta), cdouble(0, 0));
  EXPECT_EQ(wick_correlator(s, {}, {}), cdouble(1, 0));
}

TEST(QuasiFree, WickDiagonalExample) {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 0.7;
  s(1, 1) = 0.2;
  std::vector<Vector> e{Vector::Unit(2, 0), Vector::Unit(2, 1)};
  EXPECT_LT(std::abs(wick_correlator(s, e, e) - 0.14), 1e-15);
}

TEST(QuasiFree, WickDimensionMismatchRejected) {
  const Matrix s = Matrix::Identity(3, 3);
  std::vector<Vector> bad{Vector::Zero(2)};
  std::vector<Vector> ok{Vector::Zero(3)};
  EXPECT_THROW(wick_correlator(s, bad, ok), ValidationError);
  EXPECT_THROW(wick_correlator(s, ok, bad), ValidationError);
}

TEST(QuasiFree, WickAntisymmetricUnderSwap) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 3 + trial % 4, m = 2 + trial % 3;
    const Matrix s = oracle::random_density(dim, rng);
    auto xi = random_vectors(m, dim, rng);
    const auto eta = random_vectors(m, dim, rng);
    const cdouble before = wick_correlator(s, xi, eta);
    std::swap(xi[0], xi[m - 1]);
    const cdouble after = wick_correlator(s, xi, eta);
    ASSERT_LT(std::abs(before + after), 1e-12 * std::max(1.0, std::abs(before)));
  }
}

TEST(QuasiFree, WickMatchesPermutationExpansion) {
  // Leibniz expansion of the 3x3 determinant, written out by hand
  std::mt19937_64 rng(7);
  const Matrix s = oracle::random_density(4, rng);
  const auto xi = random_vectors(3, 4, rng), eta = random_vectors(3, 4, rng);
  auto g = [&](int j, int k) { return xi[j].dot(s * eta[k]); };
  const cdouble det = g(0, 0) * g(1, 1) * g(2, 2) + g(0, 1) * g(1, 2) * g(2, 0) + g(0, 2) * g(1, 0) * g(2, 1) -
                      g(0, 2) * g(1, 1) * g(2, 0) - g(0, 0) * g(1, 2) * g(2, 1) - g(0, 1) * g(1, 0) * g(2, 2);
  EXPECT_LT(std::abs(wick_correlator(s, xi, eta) - det), 1e-12);
}

TEST(QuasiFree, TopKTwoModes) {
  const auto t = product_spectrum_topk(ModeSpectrum{{0.8, 0.9}, ""}, 4);
  ASSERT_EQ(t.entries.size(), 4u);
  const std::vector<double> want{0.72, 0.18, 0.08, 0.02};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(t.entries[i], want[i], 1e-15);
  EXPECT_NEAR(t.discarded_mass, 0.0, 1e-15);
}

TEST(QuasiFree, TopKFlatSpectrum) {
  for (int n : {1, 4, 9}) {
    ModeSpectrum m{std::vector<double>(n, 0.5), ""};
    const auto t = product_spectrum_topk(m, std::size_t{1} << n);
    ASSERT_EQ(t.entries.size(), std::size_t{1} << n);
    for (double v : t.entries) EXPECT_EQ(v, std::ldexp(1.0, -n));
    EXPECT_NEAR(t.discarded_mass, 0.0, 1e-12);
  }
}

TEST(QuasiFree, TopKCollapsesPureModes) {
  const auto t = product_spectrum_topk(ModeSpectrum{{0.6, 1.0}, ""}, 2);
  ASSERT_EQ(t.entries.size(), 2u);
  EXPECT_NEAR(t.entries[0], 0.6, 1e-15);
  EXPECT_NEAR(t.entries[1], 0.4, 1e-15);
  // K beyond 2^(#non-pure modes) returns everything
  const auto all = product_spectrum_topk(ModeSpectrum{{0.0, 0.3, 1.0}, ""}, 100);
  EXPECT_EQ(all.entries.size(), 2u);
}

TEST(QuasiFree, TopKPreconditions) {
  EXPECT_THROW(product_spectrum_topk(ModeSpectrum{{0.5}, ""}, 0), ValidationError);
  EXPECT_THROW(product_spectrum_topk(ModeSpectrum{{}, ""}, 4), ValidationError);
  EXPECT_THROW(product_spectrum_topk(ModeSpectrum{{0.5}, ""}, 4, 1.0), ValidationError);
  EXPECT_THROW(product_spectrum_topk(ModeSpectrum{{0.5, 1.2}, ""}, 4), ValidationError);
  EXPECT_THROW(product_spectrum_topk(ModeSpectrum{{0.6, 0.5}, ""}, 4), ValidationError);
}

TEST(QuasiFree, TopKMatchesBruteForce) {
  std::mt19937_64 rng(10);
  for (int n = 1; n <= 12; ++n) {
    const auto modes = random_modes(n, rng);
    const auto all = oracle::all_products(modes.values);
    const auto t = product_spectrum_topk(modes, all.size());
    ASSERT_EQ(t.entries.size(), all.size()) << "n = " << n;
    double sum = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      ASSERT_NEAR(t.entries[i], all[i], 1e-14) << "n = " << n << " i = " << i;
      sum += t.entries[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(t.discarded_mass, 0.0, 1e-12);
    // a truncated call returns the same prefix
    const std::size_t K = std::max<std::size_t>(1, all.size() / 3);
    const auto part = product_spectrum_topk(modes, K);
    ASSERT_EQ(part.entries.size(), K);
    double kept = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      ASSERT_NEAR(part.entries[i], all[i], 1e-14);
      kept += all[i];
    }
    EXPECT_NEAR(part.discarded_mass, 1.0 - kept, 1e-12);
  }
}

TEST(QuasiFree, TopKInvariantsOnLargeInput) {
  std::mt19937_64 rng(12);
  const auto modes = random_modes(40, rng);
  const auto t = product_spectrum_topk(modes, 4096, 1e-6);
  double sum = 0.0;
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    ASSERT_GT(t.entries[i], 0.0);
    ASSERT_LE(t.entries[i], 1.0);
    if (i > 0) ASSERT_LE(t.entries[i], t.entries[i - 1]);
    sum += t.entries[i];
  }
  EXPECT_GE(t.discarded_mass, 0.0);
  EXPECT_NEAR(sum + t.discarded_mass, 1.0, 1e-12);
}

TEST(QuasiFree, TopKMassFloorStopsEarly) {
  ModeSpectrum m{{0.01, 0.02, 0.03}, ""};
  const auto t = product_spectrum_topk(m, 8, 0.1);
  EXPECT_LT(t.entries.size(), 8u);
  EXPECT_LE(t.discarded_mass, 0.1);
}

TEST(QuasiFree, EntropyExamples) {
  EXPECT_NEAR(entanglement_entropy(ModeSpectrum{{0.5}, ""}), 1.0, 1e-15);
  EXPECT_EQ(entanglement_entropy(ModeSpectrum{{0.0, 0.0, 1.0}, ""}), 0.0);
  const double h = entanglement_entropy(ModeSpectrum{{0.8, 0.9}, ""});
  EXPECT_NEAR(h, 1.1909, 5e-5);
  EXPECT_NEAR(h, oracle::h2(0.8) + oracle::h2(0.9), 1e-14);
}

TEST(QuasiFree, EntropyMatchesFullSpectrum) {
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 12; ++n) {
    const auto modes = random_modes(n, rng);
    double full = 0.0;
    for (double p : oracle::all_products(modes.values))
      if (p > 0) full -= p * std::log2(p);
    ASSERT_NEAR(entanglement_entropy(modes), full, 1e-9) << "n = " << n;
  }
}

TEST(QuasiFree, EntropyInvariantUnderMirror) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    auto modes = random_modes(10, rng);
    auto mirrored = modes;
    std::uniform_int_distribution<int> coin(0, 1);
    for (double& v : mirrored.values)
      if (coin(rng)) v = 1.0 - v;
    std::sort(mirrored.values.begin(), mirrored.values.end());
    ASSERT_NEAR(entanglement_entropy(modes), entanglement_entropy(mirrored), 1e-12);
  }
}
