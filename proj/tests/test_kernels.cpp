#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "cgolab/kernels.hpp"

namespace kn = cgolab::kernels;
using kn::cplx;

namespace {

std::vector<cplx> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

double rel_diff(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Lengths straddle the 2-wide AVX2 lane and its unrolled multiples.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 101, 1000};

#if defined(CGOLAB_HAVE_AVX2)
class Avx2Kernels : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!kn::avx2_available()) GTEST_SKIP() << "no AVX2 on this host";
  }
  void TearDown() override { kn::force_isa(kn::avx2_available() ? kn::Isa::avx2 : kn::Isa::scalar); }
};

#endif

}  // namespace

TEST(ScalarKernels, MatchNaiveLoops) {
  auto x = random_vector(37, 1), y = random_vector(37, 2);
  cplx dot = 0.0;
  double n2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    n2 += std::norm(x[i]);
  }
  EXPECT_LT(rel_diff(kn::scalar::cdotu(x.data(), y.data(), x.size()), dot), 1e-14);
  EXPECT_NEAR(kn::scalar::cnorm2(x.data(), x.size()), n2, 1e-12 * n2);

  auto z = y;
  const cplx alpha{0.3, -1.7};
  kn::scalar::caxpy(alpha, x.data(), z.data(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(z[i], y[i] + alpha * x[i]);
}

#if defined(CGOLAB_HAVE_AVX2)
TEST_F(Avx2Kernels, CaxpyMatchesScalar) {
  for (std::size_t n : kLengths) {
    auto x = random_vector(n, 3), y1 = random_vector(n, 4);
    auto y2 = y1;
    const cplx alpha{-0.25, 2.5};
    kn::scalar::caxpy(alpha, x.data(), y1.data(), n);
    kn::avx2::caxpy(alpha, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(rel_diff(y2[i], y1[i]), 1e-15) << "n=" << n << " i=" << i;
  }
}

TEST_F(Avx2Kernels, CdotuMatchesScalar) {
  for (std::size_t n : kLengths) {
    auto x = random_vector(n, 5), y = random_vector(n, 6);
    const cplx a = kn::scalar::cdotu(x.data(), y.data(), n);
    const cplx b = kn::avx2::cdotu(x.data(), y.data(), n);
    EXPECT_LT(std::abs(a - b), 1e-13 * (1.0 + n)) << "n=" << n;
  }
}

TEST_F(Avx2Kernels, CmulMatchesScalarIncludingAliasing) {
  for (std::size_t n : kLengths) {
    auto x = random_vector(n, 7), y = random_vector(n, 8);
    std::vector<cplx> o1(n), o2(n);
    kn::scalar::cmul(x.data(), y.data(), o1.data(), n);
    kn::avx2::cmul(x.data(), y.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(rel_diff(o2[i], o1[i]), 1e-15);
    auto alias = x;
    kn::avx2::cmul(alias.data(), y.data(), alias.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(rel_diff(alias[i], o1[i]), 1e-15);
  }
}

TEST_F(Avx2Kernels, Cnorm2MatchesScalar) {
  for (std::size_t n : kLengths) {
    auto x = random_vector(n, 9);
    const double a = kn::scalar::cnorm2(x.data(), n);
    const double b = kn::avx2::cnorm2(x.data(), n);
    EXPECT_NEAR(a, b, 1e-13 * (1.0 + a)) << "n=" << n;
  }
}

TEST_F(Avx2Kernels, CompositeKernelsAgreeAcrossIsa) {
  const std::size_t n = 13;
  auto f = random_vector(n * n * n, 10);
  auto ax = random_vector(n, 11), ay = random_vector(n, 12), az = random_vector(n, 13);

  auto run = [&](kn::Isa isa) {
    kn::force_isa(isa);
    std::vector<cplx> plane(n * n), acc(n * n * n, 0.0);
    kn::contract_z(f, n, az, plane);
    const cplx s2 = kn::separable_sum_2d(plane, n, ax, ay);
    const cplx s3 = kn::separable_sum(f, n, ax, ay, az);
    kn::rank1_accumulate({0.5, -0.5}, ax, ay, az, acc);
    return std::tuple{plane, s2, s3, acc};
  };
  auto [p1, a1, b1, c1] = run(kn::Isa::scalar);
  auto [p2, a2, b2, c2] = run(kn::Isa::avx2);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_LT(std::abs(p1[i] - p2[i]), 1e-12);
  EXPECT_LT(std::abs(a1 - a2), 1e-11 * (1.0 + std::abs(a1)));
  EXPECT_LT(std::abs(b1 - b2), 1e-11 * (1.0 + std::abs(b1)));
  EXPECT_LT(std::abs(a1 - b1), 1e-11 * (1.0 + std::abs(a1)));
  for (std::size_t i = 0; i < c1.size(); ++i) EXPECT_LT(std::abs(c1[i] - c2[i]), 1e-14);
}

#endif

TEST(KernelDispatch, SeparableSumMatchesTripleLoop) {
  const std::size_t n = 6;
  auto f = random_vector(n * n * n, 14);
  auto ax = random_vector(n, 15), ay = random_vector(n, 16), az = random_vector(n, 17);
  cplx ref = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) ref += f[i + n * (j + n * l)] * ax[i] * ay[j] * az[l];
  EXPECT_LT(std::abs(kn::separable_sum(f, n, ax, ay, az) - ref), 1e-12);
}

TEST(KernelDispatch, SizeMismatchThrows) {
  std::vector<cplx> x(4), y(5);
  EXPECT_ANY_THROW(kn::caxpy(1.0, x, y));
  EXPECT_ANY_THROW(kn::cdotu(x, y));
}

TEST(KernelDispatch, IsaNames) {
  EXPECT_EQ(kn::isa_name(kn::Isa::scalar), "scalar");
  EXPECT_EQ(kn::isa_name(kn::Isa::avx2), "avx2");
  if (!kn::avx2_available()) {
    EXPECT_EQ(kn::active_isa(), kn::Isa::scalar);
  }
}
