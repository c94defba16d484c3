#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cgolab/errors.hpp"
#include "cgolab/grid.hpp"

using namespace cgolab;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField random_interior(const Grid& grid, unsigned seed, int margin = 2) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ScalarField f(grid, FieldKind::interior);
  const int n = grid.points_per_axis();
  for (int l = margin; l < n - margin; ++l)
    for (int j = margin; j < n - margin; ++j)
      for (int i = margin; i < n - margin; ++i) f.mutable_values()[grid.index(i, j, l)] = {g(rng), g(rng)};
  return f;
}

}  // namespace

TEST(Grid, BuildValidation) {
  EXPECT_THROW(build_grid(1.0, 7), ConfigError);
  EXPECT_THROW(build_grid(1.0, 6), ConfigError);
  EXPECT_THROW(build_grid(0.0, 16), ConfigError);
  const Grid g = build_grid(2.0, 16);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
  EXPECT_DOUBLE_EQ(g.coordinate(0), -2.0 + 0.125);
  EXPECT_DOUBLE_EQ(g.coordinate(15), 2.0 - 0.125);
  EXPECT_EQ(g.index(1, 2, 3), 1u + 16u * (2u + 16u * 3u));
  EXPECT_EQ(g.frequency_index(7), 7);
  EXPECT_EQ(g.frequency_index(8), -8);
}

// A single torus mode has one nonzero coefficient of modulus (2L)^{3/2}.
TEST(Sobolev, SingleModeClosedForm) {
  const Grid grid = build_grid(1.3, 16);
  const double step = kPi / grid.extent();
  const Vec3 mu{step * 2, step * -3, step * 1};
  auto f = ScalarField::sample(grid, [&](const Vec3& x) { return std::exp(cplx(0, dot(mu, x))); },
                               FieldKind::periodic);
  for (double s : {0.0, 1.0, 2.0, 2.5}) {
    const double expected = std::pow(1.0 + dot(mu, mu), s / 2) * std::pow(2 * grid.extent(), 1.5);
    EXPECT_NEAR(sobolev_norm(f, s), expected, 1e-10 * expected) << "s=" << s;
  }
}

TEST(Sobolev, ParsevalAtOrderZero) {
  const Grid grid = build_grid(1.0, 16);
  auto f = random_interior(grid, 3);
  EXPECT_NEAR(sobolev_norm(f, 0.0), l2_norm(f), 1e-12 * l2_norm(f));
}

TEST(Sobolev, DualityPairingBound) {
  const Grid grid = build_grid(1.0, 16);
  for (unsigned seed = 0; seed < 5; ++seed) {
    auto f = random_interior(grid, 10 + seed), g = random_interior(grid, 20 + seed);
    cplx pairing = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) pairing += f.values()[i] * std::conj(g.values()[i]);
    pairing *= grid.cell_volume();
    EXPECT_LE(std::abs(pairing), sobolev_norm(f, -2.0) * sobolev_norm(g, 2.0) * (1 + 1e-12));
  }
}

TEST(Sobolev, NegativeOrderNeedsInterior) {
  const Grid grid = build_grid(1.0, 8);
  ScalarField f(grid, FieldKind::periodic);
  EXPECT_THROW(sobolev_norm(f, -1.0), ConfigError);
}

TEST(Sobolev, MonotoneInOrder) {
  const Grid grid = build_grid(1.0, 16);
  auto f = random_interior(grid, 4);
  EXPECT_LT(sobolev_norm(f, -1.0), sobolev_norm(f, 0.0));
  EXPECT_LT(sobolev_norm(f, 0.0), sobolev_norm(f, 1.0));
}

TEST(Potential, GaussianSupportAndReality) {
  const Grid grid = build_grid(1.1, 24);
  auto desc = PotentialDescriptor::gaussian({0.1, 0.0, -0.1}, 0.2, 2.0);
  const Potential q = sample_potential(desc, grid, 2.0);
  EXPECT_GT(q.h_s_norm(), 0.0);
  EXPECT_LE(q.max_abs(), 2.0);
  for (int l = 0; l < 24; ++l)
    for (int j = 0; j < 24; ++j)
      for (int i = 0; i < 24; ++i) {
        const Vec3 x = grid.position(i, j, l);
        const cplx v = q.field()(i, j, l);
        EXPECT_EQ(v.imag(), 0.0);
        if (!q.support_box().contains(x)) {
          EXPECT_EQ(v, cplx(0.0));
        }
      }
  EXPECT_TRUE(sample_potential(PotentialDescriptor::zero(), grid, 2.0).is_zero());
  EXPECT_THROW(sample_potential(PotentialDescriptor::gaussian({0.9, 0, 0}, 0.3, 1.0), grid, 2.0), ConfigError);
}

TEST(Potential, DifferenceIsLinear) {
  const Grid grid = build_grid(1.1, 16);
  const Potential q1 = sample_potential(PotentialDescriptor::gaussian({0, 0, 0}, 0.2, 1.0), grid, 2.0);
  const Potential q2 = sample_potential(PotentialDescriptor::gaussian({0.1, 0, 0}, 0.2, 0.5), grid, 2.0);
  const Potential d = potential_difference(q1, q2);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_EQ(d.field().values()[i], q1.field().values()[i] - q2.field().values()[i]);
  EXPECT_NEAR(potential_difference(q1, q1).h_s_norm(), 0.0, 0.0);
}

TEST(SmoothCutoff, Plateaus) {
  EXPECT_EQ(smooth_cutoff(0.0), 1.0);
  EXPECT_EQ(smooth_cutoff(0.6), 1.0);
  EXPECT_EQ(smooth_cutoff(1.0), 0.0);
  EXPECT_EQ(smooth_cutoff(3.0), 0.0);
  double prev = 1.0;
  for (double t = 0.6; t <= 1.0; t += 0.01) {
    EXPECT_LE(smooth_cutoff(t), prev + 1e-15);
    prev = smooth_cutoff(t);
  }
}

TEST(Boundary, StencilWeightsReproducePolynomials) {
  // Nodes sit at k + 1/2; the value rule extrapolates to 0, the derivative
  // rule returns p'(0).
  for (int count : {3, 4, 5}) {
    const auto w0 = face_stencil_weights(count, 0);
    const auto w1 = face_stencil_weights(count, 1);
    for (int deg = 0; deg < count; ++deg) {
      double v = 0.0, d = 0.0;
      for (int k = 0; k < count; ++k) {
        const double t = k + 0.5;
        v += w0[k] * std::pow(t + 0.3, deg);
        d += w1[k] * std::pow(t + 0.3, deg);
      }
      EXPECT_NEAR(v, std::pow(0.3, deg), 1e-11) << count << " " << deg;
      EXPECT_NEAR(d, deg == 0 ? 0.0 : deg * std::pow(0.3, deg - 1), 1e-11) << count << " " << deg;
    }
  }
}

TEST(Boundary, TraceAndNormalDerivativeExactForCubics) {
  const Grid grid = build_grid(1.0, 12);
  auto p = [](const Vec3& x) { return 1.0 + x[0] - 2 * x[1] * x[1] + 0.5 * x[2] * x[2] * x[2] + x[0] * x[1] * x[2]; };
  auto grad = [](const Vec3& x) {
    return Vec3{1.0 + x[1] * x[2], -4 * x[1] + x[0] * x[2], 1.5 * x[2] * x[2] + x[0] * x[1]};
  };
  auto u = ScalarField::sample(grid, [&](const Vec3& x) { return cplx(p(x), 0); }, FieldKind::interior);
  const BoundaryField f = boundary_trace(u);
  const BoundaryField g4 = normal_derivative(u, StencilOrder::fourth);
  for (Face face : kAllFaces)
    for (int v = 0; v < 12; ++v)
      for (int w = 0; w < 12; ++w) {
        const Vec3 x = f.position(face, w, v);
        EXPECT_NEAR(f.at(face, w, v).real(), p(x), 1e-11);
        const double dn = face_normal_sign(face) * grad(x)[face_normal_axis(face)];
        EXPECT_NEAR(g4.at(face, w, v).real(), dn, 1e-9);
      }
}

TEST(Boundary, FacePositionsLieOnFaces) {
  const Grid grid = build_grid(1.5, 8);
  BoundaryField b(grid);
  for (Face face : kAllFaces) {
    const Vec3 x = b.position(face, 2, 5);
    EXPECT_DOUBLE_EQ(x[face_normal_axis(face)], face_normal_sign(face) * 1.5);
    const auto t = face_tangent_axes(face);
    EXPECT_DOUBLE_EQ(x[t[0]], grid.coordinate(2));
    EXPECT_DOUBLE_EQ(x[t[1]], grid.coordinate(5));
  }
}

TEST(Boundary, CosineCoefficientsMatchDirectSum) {
  const Grid grid = build_grid(1.0, 8);
  const int n = 8;
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  BoundaryField b(grid);
  for (Face face : kAllFaces)
    for (auto& z : b.mutable_face(face)) z = {g(rng), g(rng)};
  const auto c = face_cosine_coefficients(b, Face::ymax);
  auto basis = [&](int m, int j) {
    return (m == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n)) * std::cos(kPi * m * (j + 0.5) / n);
  };
  for (int q = 0; q < n; ++q)
    for (int m = 0; m < n; ++m) {
      cplx ref = 0.0;
      for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) ref += b.at(Face::ymax, u, v) * basis(m, u) * basis(q, v);
      ref *= grid.spacing();
      EXPECT_LT(std::abs(c[m + n * q] - ref), 1e-12);
    }
  double e_coef = 0.0, e_face = 0.0;
  for (auto z : c) e_coef += std::norm(z);
  for (auto z : b.face(Face::ymax)) e_face += std::norm(z);
  EXPECT_NEAR(e_coef, grid.spacing() * grid.spacing() * e_face, 1e-12 * e_coef);

  BoundaryField back(grid);
  set_face_from_cosine_coefficients(back, Face::ymax, c);
  for (int i = 0; i < n * n; ++i) EXPECT_LT(std::abs(back.face(Face::ymax)[i] - b.face(Face::ymax)[i]), 1e-12);
  EXPECT_NEAR(boundary_sobolev_norm(b, 0.0), b.l2_norm(), 1e-12 * b.l2_norm());
  EXPECT_DOUBLE_EQ(face_mode_wavenumber(grid, 3, 4), kPi / 2.0 * 5.0);
}

TEST(FieldIo, RoundTripAndBadMagic) {
  const Grid grid = build_grid(0.7, 8);
  auto f = random_interior(grid, 9, 0);
  std::stringstream ss;
  write_field(ss, f);
  EXPECT_EQ(ss.str().size(), 8u + 8u + 4u + grid.size() * 16u);
  const ScalarField back = read_field(ss);
  EXPECT_EQ(back.grid(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(back.values()[i], f.values()[i]);

  std::stringstream bad("CGOLABXX0000000000000000");
  EXPECT_THROW(read_field(bad), IoError);
  std::stringstream truncated(ss.str().substr(0, 40));
  EXPECT_THROW(read_field(truncated), IoError);
  EXPECT_THROW(read_field_file("/nonexistent/dir/f.field"), IoError);
}
