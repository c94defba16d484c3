#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cgolab/cgo.hpp"
#include "cgolab/errors.hpp"

using namespace cgolab;

namespace {

const Vec3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};

Potential standard_gaussian(const Grid& grid, double amplitude = 1.0) {
  return sample_potential(PotentialDescriptor::gaussian({0, 0, 0}, 0.3, amplitude), grid, 2.0);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return normalized(Vec3{g(rng), g(rng), g(rng)});
}

ScalarField random_field(const Grid& grid, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ScalarField f(grid, FieldKind::periodic);
  for (auto& v : f.mutable_values()) v = {g(rng), g(rng)};
  return f;
}

double rel_l2(const ScalarField& a, const ScalarField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    num += std::norm(a.values()[i] - b.values()[i]);
    den += std::norm(b.values()[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(Zeta, ClosedFormExamples) {
  auto p = make_zeta_pair(1.0, 0.0, e1, 2.0);
  EXPECT_NEAR(norm(p.zeta1.xi - Vec3{0, 2, 0}), 0.0, 1e-15);
  EXPECT_NEAR(norm(p.zeta1.eta - Vec3{0, 0, std::sqrt(5.0)}), 0.0, 1e-15);
  EXPECT_NEAR(norm(p.zeta2.xi - Vec3{0, -2, 0}), 0.0, 1e-15);
  EXPECT_NEAR(norm(p.zeta2.eta - Vec3{0, 0, -std::sqrt(5.0)}), 0.0, 1e-15);

  auto q = make_zeta_pair(2.0, 2.0, e1, 3.0);
  EXPECT_NEAR(norm(q.zeta1.eta - Vec3{-1, 0, std::sqrt(12.0)}), 0.0, 1e-14);
  EXPECT_NEAR(dot(q.zeta1.eta, q.zeta1.eta), 13.0, 1e-12);
}

TEST(Zeta, Errors) {
  EXPECT_THROW(make_zeta_pair(1.0, 10.0, e1, 1.0), InvalidFrequencyRange);
  EXPECT_THROW(make_zeta_pair(1.0, 0.0, Vec3{1, 1, 0}, 1.0), ConfigError);
  EXPECT_THROW(make_zeta_pair(0.5, 0.0, e1, 1.0), ConfigError);
  EXPECT_THROW(make_zeta_pair(1.0, 0.0, e1, 0.0), ConfigError);
}

TEST(Zeta, RandomAlgebra) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uk(1.0, 20.0), ua(0.1, 50.0), ur(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double k = uk(rng), a = ua(rng);
    const double r = ur(rng) * 1.999 * std::sqrt(k * k + a * a);
    const Vec3 omega = random_unit(rng);
    const auto p = make_zeta_pair(k, r, omega, a, trial % 2 ? std::optional<Vec3>(random_unit(rng)) : std::nullopt);
    for (const auto* z : {&p.zeta1, &p.zeta2}) {
      const cplx sd = z->self_dot();
      EXPECT_LE(std::abs(sd.real() - k * k), 1e-10 * k * k);
      EXPECT_LE(std::abs(sd.imag()), 1e-10 * k * k);
      EXPECT_NEAR(norm(z->xi), a, 1e-12 * a);
    }
    EXPECT_LE(norm(p.zeta1.eta + p.zeta2.eta + r * omega), 1e-12 * (1 + r));
    EXPECT_LE(norm(p.zeta1.xi + p.zeta2.xi), 1e-12 * (1 + r));
    EXPECT_NEAR(dot(p.frame[0], omega), 0.0, 1e-12);
    EXPECT_NEAR(dot(p.frame[1], omega), 0.0, 1e-12);
    EXPECT_NEAR(dot(p.frame[0], p.frame[1]), 0.0, 1e-12);
  }
}

TEST(Zeta, FrameFallbackIsDeterministic) {
  const auto f = orthonormal_frame(e1);
  EXPECT_NEAR(norm(f[0] - e2), 0.0, 1e-15);
  EXPECT_NEAR(norm(f[1] - e3), 0.0, 1e-15);
  const auto g = orthonormal_frame(e1, e1);
  EXPECT_NEAR(norm(g[0] - e2), 0.0, 1e-15);
}

TEST(Faddeev, ShiftAxisAvoidsZeroSymbol) {
  EXPECT_EQ(faddeev_shift_axis({0, 2, 0}), 1);
  EXPECT_EQ(faddeev_shift_axis({0, 0, -3}), 2);
  // (2, 1, 0): the odd component wins over the larger even one.
  EXPECT_EQ(faddeev_shift_axis({2, 1, 0}), 1);
}

TEST(Faddeev, SingleShiftedModeIsDiagonal) {
  const Grid grid = build_grid(1.0, 16);
  const auto zeta = make_zeta_pair(2.0, 1.0, normalized(Vec3{1, 2, 2}), 3.0).zeta1;
  const Vec3 tau = faddeev_shift(zeta, grid);
  const double step = grid.frequency_step();
  const Vec3 mu = Vec3{3 * step, -2 * step, 1 * step} + tau;
  auto mode = ScalarField::sample(grid, [&](const Vec3& x) { return std::exp(cplx(0, dot(mu, x))); },
                                  FieldKind::periodic);
  const cplx symbol = -(dot(mu, mu) + 2.0 * zeta.dot(mu));
  const ScalarField w = faddeev_invert(zeta, mode);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(std::abs(w.values()[i] - mode.values()[i] / symbol), 1e-12);
  const ScalarField zero = faddeev_invert(zeta, ScalarField(grid, FieldKind::periodic));
  EXPECT_EQ(max_abs(zero), 0.0);
}

TEST(Faddeev, RoundTripOnRandomFields) {
  const Grid grid = build_grid(1.1, 24);
  std::mt19937_64 rng(7);
  for (unsigned trial = 0; trial < 4; ++trial) {
    const auto zeta = make_zeta_pair(1.0 + trial, 0.5 * trial, random_unit(rng), 4.0 + trial).zeta1;
    const ScalarField f = random_field(grid, trial);
    EXPECT_LE(rel_l2(faddeev_apply(zeta, faddeev_invert(zeta, f)), f), 1e-10);
    EXPECT_LE(rel_l2(faddeev_invert(zeta, faddeev_apply(zeta, f)), f), 1e-10);
  }
}

TEST(Cgo, ZeroPotential) {
  const Grid grid = build_grid(1.0, 16);
  const auto zeta = make_zeta_pair(1.0, 0.0, e1, 2.0).zeta1;
  const CGOSolution sol = build_cgo(sample_potential(PotentialDescriptor::zero(), grid, 2.0), zeta);
  EXPECT_EQ(sol.iterations, 1);
  EXPECT_EQ(max_abs(sol.psi), 0.0);
  const ScalarField u = cgo_field(sol, grid);
  // |u(x)| = e^{-xi.x}
  for (int i : {0, 5, 15}) {
    const Vec3 x = grid.position(i, i, 3);
    EXPECT_NEAR(std::abs(u(i, i, 3)), std::exp(-dot(zeta.xi, x)), 1e-12 * std::exp(-dot(zeta.xi, x)));
  }
}

TEST(Cgo, FixedPointEquationHolds) {
  const Grid grid = build_grid(1.1, 24);
  const Potential q = standard_gaussian(grid, 5.0);
  const auto zeta = make_zeta_pair(2.0, 1.0, e3, 8.0).zeta1;
  const CGOSolution sol = build_cgo(q, zeta, 1e-12);
  EXPECT_LE(sol.residual, 1e-12);
  EXPECT_TRUE(sol.monotone);
  // (Delta + 2i zeta.grad) psi = -q (1 + psi)
  const ScalarField lhs = faddeev_apply(zeta, sol.psi);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx rhs = -q.field().values()[i] * (1.0 + sol.psi.values()[i]);
    worst = std::max(worst, std::abs(lhs.values()[i] - rhs));
  }
  EXPECT_LT(worst, 1e-8 * q.max_abs());
}

TEST(Cgo, StrongPotentialDoesNotContract) {
  const Grid grid = build_grid(1.0, 16);
  const Potential q = standard_gaussian(grid, 2000.0);
  EXPECT_THROW(build_cgo(q, make_zeta_pair(1.0, 0.0, e1, 1.0).zeta1), NoContraction);
  EXPECT_THROW(build_cgo(q, make_zeta_pair(1.0, 0.0, e1, 1.0).zeta1, 1e-13), ConfigError);
}

TEST(Cgo, PsiDecaysLikeOneOverA) {
  const Grid grid = build_grid(1.1, 24);
  const Potential q = standard_gaussian(grid);
  std::vector<double> la, lp;
  for (double a : {8.0, 16.0, 32.0, 64.0}) {
    const CGOSolution sol = build_cgo(q, make_zeta_pair(1.0, 0.0, e3, a).zeta1);
    la.push_back(std::log(a));
    lp.push_back(std::log(sol.psi_h_s_norm));
    EXPECT_LE(sol.psi_h_s_norm, 1.0);
  }
  const double mx = (la[0] + la[1] + la[2] + la[3]) / 4, my = (lp[0] + lp[1] + lp[2] + lp[3]) / 4;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (la[i] - mx) * (lp[i] - my);
    sxx += (la[i] - mx) * (la[i] - mx);
  }
  const double slope = sxy / sxx;
  EXPECT_GE(slope, -1.3);
  EXPECT_LE(slope, -0.7);
}

TEST(Cgo, NormRoughlyIndependentOfK) {
  const Grid grid = build_grid(1.1, 24);
  const Potential q = standard_gaussian(grid);
  double lo = 1e300, hi = 0.0;
  for (double k : {1.0, 2.0, 4.0, 8.0}) {
    const double v = build_cgo(q, make_zeta_pair(k, 0.0, e3, 32.0).zeta1).psi_h_s_norm;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LE(hi / lo, 2.0);
}

TEST(Cgo, ThresholdScalesWithAmplitude) {
  const Grid grid = build_grid(1.0, 24);
  EXPECT_EQ(estimate_cstar(sample_potential(PotentialDescriptor::zero(), grid, 2.0), 1.0), 0.0);
  const Potential q1 = standard_gaussian(grid, 640.0);
  const Potential q2 = standard_gaussian(grid, 1280.0);
  const double a1 = estimate_cstar(q1, 1.0) * q1.h_s_norm();
  const double a2 = estimate_cstar(q2, 1.0) * q2.h_s_norm();
  ASSERT_TRUE(std::isfinite(a1) && std::isfinite(a2));
  EXPECT_NEAR(a2 / a1, 2.0, 0.5);
  const double c4 = estimate_cstar(q1, 4.0);
  EXPECT_LE(std::max(c4, a1 / q1.h_s_norm()) / std::min(c4, a1 / q1.h_s_norm()), 2.0);
}

TEST(Cgo, TraceMatchesFieldExtrapolation) {
  const Grid grid = build_grid(1.1, 24);
  // q = 0: the trace is the exponential itself at the face centres.
  const auto zeta = make_zeta_pair(1.0, 0.5, e1, 6.0).zeta1;
  const BoundaryField free = cgo_trace(build_cgo(sample_potential(PotentialDescriptor::zero(), grid, 2.0), zeta));
  for (Face f : kAllFaces)
    for (int v = 0; v < 24; v += 5)
      for (int u = 0; u < 24; u += 7) {
        const cplx expected = std::exp(cplx(0.0, 1.0) * zeta.dot(free.position(f, u, v)));
        EXPECT_LT(std::abs(free.at(f, u, v) - expected), 1e-12 * std::abs(expected));
      }
  // A mild exponential is resolved well enough for face extrapolation of the
  // whole field to agree.
  const Potential q = standard_gaussian(grid, 3.0);
  const CGOSolution sol = build_cgo(q, make_zeta_pair(1.0, 0.5, e1, 2.0).zeta1);
  const BoundaryField a = cgo_trace(sol);
  const BoundaryField b = boundary_trace(cgo_field(sol, grid));
  double num = 0.0, den = 0.0;
  for (Face f : kAllFaces)
    for (std::size_t i = 0; i < a.face(f).size(); ++i) {
      num += std::norm(a.face(f)[i] - b.face(f)[i]);
      den += std::norm(a.face(f)[i]);
    }
  EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(Cgo, SerializationRoundTrip) {
  const Grid grid = build_grid(1.1, 16);
  const Potential q = standard_gaussian(grid, 2.0);
  const CGOSolution sol = build_cgo(q, make_zeta_pair(2.0, 1.0, e2, 8.0).zeta1);
  std::stringstream ss;
  write_cgo_solution(ss, sol);
  const CGOSolution back = read_cgo_solution(ss, 2.0);
  EXPECT_EQ(back.iterations, sol.iterations);
  EXPECT_EQ(back.residual, sol.residual);
  EXPECT_EQ(back.zeta.eta, sol.zeta.eta);
  EXPECT_EQ(back.zeta.xi, sol.zeta.xi);
  EXPECT_EQ(back.zeta.k, sol.zeta.k);
  EXPECT_NEAR(back.psi_h_s_norm, sol.psi_h_s_norm, 1e-14 * sol.psi_h_s_norm);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(back.psi.values()[i], sol.psi.values()[i]);
}
