#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "cgolab/errors.hpp"
#include "cgolab/fft.hpp"
#include "cgolab/reconstruction.hpp"

using namespace cgolab;

namespace {

constexpr double kPi = std::numbers::pi;

Potential bump(const Grid& grid, double amplitude, double width = 0.3) {
  return sample_potential(PotentialDescriptor::gaussian({0, 0, 0}, width, amplitude), grid, 2.0);
}

// Polar sample set whose values are the exact grid transform of f.
FourierSampleSet exact_samples(const ScalarField& f, double T, int radial_count, const std::string& design_name) {
  FourierSampleSet set;
  set.radial = gauss_legendre(radial_count, 0.0, T);
  set.design = make_sphere_design(design_name);
  set.T = T;
  for (double r : set.radial.nodes)
    for (const Vec3& w : set.design.directions) {
      FourierSample s;
      s.r = r;
      s.omega = w;
      s.value = fourier_oracle(f, r * w);
      set.samples.push_back(s);
    }
  return set;
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

TEST(ChooseA, Branches) {
  EXPECT_EQ(choose_a(0.0, 1.0, 5.0), 5.0);
  EXPECT_EQ(choose_a(10.0, 1.0, 5.0), 10.0);
  EXPECT_EQ(choose_a(6.0, 1.0, 5.0), 5.0);
  EXPECT_THROW(choose_a(1.0, 1.0, 0.0), ConfigError);
  for (double k : {1.0, 3.0, 20.0})
    for (double R : {0.5, 4.0, 30.0})
      for (double r = 0.0; r < 200.0; r += 0.37) {
        const double a = choose_a(r, k, R);
        EXPECT_GT(k * k + a * a, r * r / 4);
      }
}

TEST(ChooseCutoff, WorkedExamples) {
  const CutoffPolicy c1 = choose_cutoff(1.0, 1e-6, 5.0, 1.0);
  EXPECT_EQ(c1.regime, Regime::case_i);
  EXPECT_NEAR(c1.T, 12.0 * std::log(10.0), 1e-12);
  EXPECT_NEAR(c1.T, 27.63, 5e-3);
  EXPECT_NEAR(c1.A, 1e-12, 1e-24);

  const CutoffPolicy c2 = choose_cutoff(20.0, 1e-2, 5.0, 1.0);
  EXPECT_EQ(c2.regime, Regime::case_ii);
  EXPECT_EQ(c2.T, 25.0);

  EXPECT_THROW(choose_cutoff(1.0, 0.5, 5.0, 1.0), ConfigError);
  EXPECT_THROW(choose_cutoff(1.0, 0.0, 5.0, 1.0), ConfigError);
  EXPECT_NO_THROW(choose_cutoff(1.0, std::exp(-1.0), 5.0, 1.0));
}

TEST(ChooseCutoff, MonotoneAndContinuousAtTheSwitch) {
  const double k = 2.0, R = 4.0, p = 0.5;
  double previous = 1e300;
  for (double d = 1e-12; d < 0.3; d *= 1.7) {
    const CutoffPolicy c = choose_cutoff(k, d, R, p);
    EXPECT_LE(c.T, previous);
    EXPECT_GE(c.T, k + R);
    previous = c.T;
  }
  // p log(1/d^2) = k + R at d*
  const double d_star = std::exp(-(k + R) / (2 * p));
  const CutoffPolicy at = choose_cutoff(k, d_star, R, p);
  const CutoffPolicy below = choose_cutoff(k, d_star * (1 - 1e-12), R, p);
  EXPECT_EQ(at.regime, Regime::case_ii);
  EXPECT_EQ(below.regime, Regime::case_i);
  EXPECT_NEAR(at.T, below.T, 1e-10);
}

TEST(ChooseCutoff, SelectorAndExactPath) {
  const CutoffPolicy a = choose_cutoff(1.0, 1e-4, 1.0, 1.0, CutoffSelector::dist);
  EXPECT_NEAR(a.A, 1e-4, 1e-18);
  EXPECT_NEAR(a.T, std::log(1e4), 1e-12);
  EXPECT_EQ(exact_cutoff(3.0, 4.0, 0.25).T, 11.0);
  EXPECT_EQ(exact_cutoff(3.0, 4.0, 0.25, 6.5).T, 6.5);
  EXPECT_EQ(exact_cutoff(3.0, 4.0, 0.25).regime, Regime::exact);
}

TEST(Lowpass, ZeroSamplesGiveZero) {
  const Grid grid = build_grid(1.0, 12);
  FourierSampleSet set = exact_samples(ScalarField(grid, FieldKind::interior), 4.0, 4, "octahedral");
  EXPECT_EQ(max_abs(lowpass_invert(set, grid)), 0.0);
  set.samples.pop_back();
  EXPECT_THROW(lowpass_invert(set, grid), ConfigError);
  EXPECT_THROW(lowpass_invert(exact_samples(ScalarField(grid, FieldKind::interior), 4.0, 3, "octahedral"), grid),
               ConfigError);
}

TEST(Lowpass, SingleSampleIsOneWeightedPlaneWave) {
  const Grid grid = build_grid(1.0, 12);
  FourierSampleSet set = exact_samples(ScalarField(grid, FieldKind::interior), 5.0, 4, "lebedev14");
  const std::size_t ir = 2, id = 9;
  const cplx v{0.7, -0.3};
  set.samples[ir * set.design.directions.size() + id].value = v;
  const ScalarField q = lowpass_invert(set, grid);
  const double r = set.radial.nodes[ir];
  const Vec3 kappa = r * set.design.directions[id];
  const cplx c = v * set.radial.weights[ir] * r * r * set.design.weights[id] / std::pow(2 * kPi, 3);
  for (int l = 0; l < 12; l += 5)
    for (int j = 0; j < 12; j += 3)
      for (int i = 0; i < 12; ++i) {
        const double expected = (c * std::exp(cplx(0, dot(kappa, grid.position(i, j, l))))).real();
        EXPECT_NEAR(q(i, j, l).real(), expected, 1e-14);
        EXPECT_EQ(q(i, j, l).imag(), 0.0);
      }
}

// Radii on the frequency lattice and axis directions keep every synthesised
// wave a torus mode, so the band limit is exact on the grid spectrum.
TEST(Lowpass, BandLimitOnLatticeFrequencies) {
  const Grid grid = build_grid(1.0, 16);
  const double step = grid.frequency_step();
  FourierSampleSet set;
  set.design = make_sphere_design("octahedral");
  set.radial.nodes = {step, 2 * step, 3 * step, 4 * step};
  set.radial.weights = {0.4, 0.3, 0.2, 0.1};
  set.T = 4 * step + 1e-9;
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (double r : set.radial.nodes)
    for (const Vec3& w : set.design.directions) {
      FourierSample s;
      s.r = r;
      s.omega = w;
      s.value = {g(rng), g(rng)};
      set.samples.push_back(s);
    }
  const ScalarField q = lowpass_invert(set, grid);
  std::vector<cplx> spec(q.values().begin(), q.values().end());
  fft::forward_3d(spec, 16);
  double inside = 0.0, outside = 0.0;
  for (int l = 0; l < 16; ++l)
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) {
        const Vec3 mu = step * Vec3{double(grid.frequency_index(i)), double(grid.frequency_index(j)),
                                    double(grid.frequency_index(l))};
        (norm(mu) <= set.T ? inside : outside) += std::norm(spec[grid.index(i, j, l)]);
      }
  EXPECT_GT(inside, 0.0);
  EXPECT_LE(outside, 1e-10 * (inside + outside));
}

TEST(Lowpass, ConvergesToBallTruncation) {
  const Grid grid = build_grid(1.1, 16);
  const Potential q = bump(grid, 1.0);
  const double T = 6.0;
  const ScalarField oracle = ball_truncation(q.field(), T);
  const double e8 = rel_l2(lowpass_invert(exact_samples(q.field(), T, 8, "product:12x24"), grid), oracle);
  const double e16 = rel_l2(lowpass_invert(exact_samples(q.field(), T, 16, "product:12x24"), grid), oracle);
  EXPECT_LT(e16, e8);
  EXPECT_LT(e16, 1e-2);
}

TEST(BallTruncation, LargeCutoffIsIdentity) {
  const Grid grid = build_grid(1.1, 16);
  const Potential q = bump(grid, 1.0, 0.35);
  // T plus the bump bandwidth stays below the sampling rate 2 pi / h
  const ScalarField full = ball_truncation(q.field(), 15.0);
  EXPECT_LT(rel_l2(full, q.field()), 2e-2);
  EXPECT_GT(rel_l2(ball_truncation(q.field(), 2.0), q.field()), 0.1);
}

TEST(ErrorNorm, ZeroReconstructionMatchesSurrogate) {
  const Grid grid = build_grid(1.1, 24);
  const Potential q = bump(grid, 1.0);
  const ErrorReport r = error_h_minus_s(q, ScalarField(grid, FieldKind::periodic), 2.0);
  EXPECT_GT(r.polar, 0.0);
  EXPECT_NEAR(r.polar / r.torus, 1.0, 0.1);
  EXPECT_FALSE(r.I2.has_value());
  EXPECT_NEAR(r.polar * r.polar, r.I1, 1e-12 * r.I1);
}

TEST(ErrorNorm, ExactReconstructionAndHomogeneity) {
  const Grid grid = build_grid(1.1, 16);
  const Potential q1 = bump(grid, 1.0), q2 = bump(grid, -2.5);
  EXPECT_EQ(error_h_minus_s(q1, q1.field(), 2.0).polar, 0.0);
  const ScalarField zero(grid, FieldKind::periodic);
  const double a = error_h_minus_s(q1, zero, 2.0).polar, b = error_h_minus_s(q2, zero, 2.0).polar;
  EXPECT_NEAR(b / a, 2.5, 1e-10);
  EXPECT_THROW(error_h_minus_s(q1, zero, 1.5), ConfigError);
}

TEST(ErrorNorm, BandsPartitionTheIntegral) {
  const Grid grid = build_grid(1.1, 16);
  const Potential q = bump(grid, 1.0);
  const ScalarField zero(grid, FieldKind::periodic);
  const ErrorReport split = error_h_minus_s(q, zero, 2.0, 3.0, 7.0);
  ASSERT_TRUE(split.I2.has_value());
  EXPECT_NEAR(split.I1 + *split.I2 + split.I3, split.polar * split.polar, 1e-14);
  const ErrorReport no_band = error_h_minus_s(q, zero, 2.0, 3.0, 3.0);
  EXPECT_FALSE(no_band.I2.has_value());
}

TEST(ErrorNorm, PaddedNormAgreesWithPlainAtPaddingOne) {
  const Grid grid = build_grid(1.0, 12);
  const Potential q = bump(grid, 1.0, 0.25);
  EXPECT_EQ(padded_sobolev_norm(q.field(), -2.0, 1), sobolev_norm(q.field(), -2.0));
  EXPECT_NEAR(padded_sobolev_norm(q.field(), 0.0, 3), l2_norm(q.field()), 1e-12 * l2_norm(q.field()));
  EXPECT_THROW(padded_sobolev_norm(q.field(), 0.0, 0), ConfigError);
}

TEST(Reconstruct, IdenticalPotentialsExactData) {
  const Grid grid = build_grid(1.1, 12);
  const Potential q = bump(grid, 1.0);
  ReconstructOptions opt;
  opt.sphere_design = "octahedral";
  opt.radial_count = 4;
  const ReconstructionResult r = reconstruct(q, q, 1.0, 4.0, 0.25, 0.0, ProbeMode::oracle, opt);
  EXPECT_EQ(r.cutoff.regime, Regime::exact);
  EXPECT_EQ(r.cutoff.T, 9.0);
  EXPECT_LE(r.error_h_minus_s, 1e-12);
  EXPECT_EQ(r.m, 1.0);
}

TEST(Reconstruct, RegimeBookkeeping) {
  const Grid grid = build_grid(1.1, 12);
  const Potential q1 = bump(grid, 1.0), q2 = bump(grid, 0.0);
  ReconstructOptions opt;
  opt.sphere_design = "octahedral";
  opt.radial_count = 4;
  const auto r2 = reconstruct(q1, q2, 8.0, 4.0, 0.25, 1e-2, ProbeMode::oracle, opt);
  EXPECT_EQ(r2.cutoff.regime, Regime::case_ii);
  EXPECT_FALSE(r2.I2.has_value());
  EXPECT_EQ(r2.cutoff.T, 12.0);
  const auto r1 = reconstruct(q1, q2, 1.0, 1.0, 0.5, 1e-6, ProbeMode::oracle, opt);
  EXPECT_EQ(r1.cutoff.regime, Regime::case_i);
  ASSERT_TRUE(r1.I2.has_value());
  EXPECT_NEAR(r1.term_lipschitz, 1e-6, 1e-18);
  EXPECT_NEAR(r1.term_log, 1.0 / (1.0 + std::log(1e6)), 1e-12);
  EXPECT_THROW(reconstruct(q1, q2, 1.0, 1.0, 0.5, 0.5, ProbeMode::oracle, opt), ConfigError);
  EXPECT_THROW(reconstruct(q1, q2, 0.5, 1.0, 0.5, 1e-3, ProbeMode::oracle, opt), ConfigError);
}

TEST(Reconstruct, BoundaryModeWithBundle) {
  const Grid grid = build_grid(1.1, 12);
  const Potential q1 = bump(grid, 1.0), q2 = bump(grid, 0.0);
  ReconstructOptions opt;
  opt.sphere_design = "octahedral";
  opt.radial_count = 4;
  opt.degree_cap = 3;
  const DtNBundle bundle = boundary_data(q1, q2, 1.0, opt);
  const auto a = reconstruct(q1, q2, 1.0, 2.0, 0.25, 1e-3, ProbeMode::boundary, opt, &bundle);
  const auto b = reconstruct(q1, q2, 1.0, 2.0, 0.25, 1e-3, ProbeMode::boundary, opt);
  EXPECT_EQ(a.error_h_minus_s, b.error_h_minus_s);
  EXPECT_NEAR(a.dist_proxy, 1e-3, 1e-3 * 0.05);
  EXPECT_GT(a.signal_dist, 0.0);
  ReconstructOptions other = opt;
  other.degree_cap = 2;
  EXPECT_THROW(reconstruct(q1, q2, 1.0, 2.0, 0.25, 1e-3, ProbeMode::boundary, other, &bundle), ConfigError);
}

TEST(Reconstruct, PersistsFieldAndMetadata) {
  const Grid grid = build_grid(1.1, 12);
  const Potential q1 = bump(grid, 1.0), q2 = bump(grid, 0.0);
  ReconstructOptions opt;
  opt.sphere_design = "octahedral";
  opt.radial_count = 4;
  const auto r = reconstruct(q1, q2, 2.0, 2.0, 0.25, 1e-2, ProbeMode::oracle, opt);
  const auto dir = std::filesystem::temp_directory_path() / "cgolab_test_reconstruct";
  std::filesystem::create_directories(dir);
  const std::string stem = (dir / "cell").string();
  write_reconstruction(stem, r);
  const ScalarField back = read_field_file(stem + ".field");
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(back.values()[i], r.q_hat.values()[i]);
  std::ifstream in(stem + ".json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["regime"], "case_ii");
  EXPECT_EQ(j["T"].get<double>(), r.cutoff.T);
  EXPECT_EQ(j["error_h_minus_s"].get<double>(), r.error_h_minus_s);
  EXPECT_TRUE(j["diagnostics"]["I2"].is_null());
  std::filesystem::remove_all(dir);
}
