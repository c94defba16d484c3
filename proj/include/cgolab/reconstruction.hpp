#pragma once

// Frequency splitting, low-pass Fourier synthesis of the potential
// difference, and H^{-s} error evaluation.

#include <optional>
#include <string>

#include "cgolab/alessandrini.hpp"

namespace cgolab {

// a = R for r <= k + R, a = r beyond.
double choose_a(double r, double k, double R);

enum class Regime { case_i, case_ii, exact };
std::string to_string(Regime regime);

// Which noise scale sets the cutoff: A = dist^2 (default) or A = dist.
enum class CutoffSelector { dist_squared, dist };

struct CutoffPolicy {
  double R = 0.0;
  double p = 0.0;
  Regime regime = Regime::case_ii;
  double T = 0.0;
  double A = 0.0;
};

// case_i when k + R < p log(1/A) (T = p log(1/A)), otherwise case_ii with
// T = k + R. Throws ConfigError unless 0 < dist_proxy <= 1/e.
CutoffPolicy choose_cutoff(double k, double dist_proxy, double R, double p,
                           CutoffSelector selector = CutoffSelector::dist_squared);
// Noise-free data: T = t_max (default k + 8).
CutoffPolicy exact_cutoff(double k, double R, double p, std::optional<double> t_max = std::nullopt);

struct LowpassDiagnostics {
  double imag_ratio = 0.0;  // max |Im| / max |Re| of the synthesis
};

// q_hat(x) = Re (2 pi)^{-3} sum w_r r^2 w_omega value e^{i r omega.x}.
// Throws ConfigError for fewer than 4 radii or 6 directions.
ScalarField lowpass_invert(const FourierSampleSet& samples, const Grid& grid, LowpassDiagnostics* diag = nullptr);

// (q~ * K_T)(x) with the ball kernel K_T, the inverse transform of the
// indicator of |xi| <= T applied to the grid transform of q~.
ScalarField ball_truncation(const ScalarField& field, double T);

struct ErrorOptions {
  double panel_width = 1.0;   // radial Gauss-Legendre panels
  int panel_points = 6;
  double angular_factor = 0.5;  // polar nodes per unit of r * rho
  int min_polar = 6;
  int max_polar = 160;
  std::optional<double> r_max;  // default pi / h
  int torus_padding = 4;        // surrogate torus period 2 L * padding
};

struct ErrorReport {
  double polar = 0.0;   // polar quadrature of the continuous H^{-s} integral
  double torus = 0.0;   // torus spectral surrogate on the zero-padded grid
  double I1 = 0.0;      // band r <= k + R
  std::optional<double> I2;  // band k + R < r <= T (case_i only)
  double I3 = 0.0;      // band r > T
};

// Sobolev norm of the zero extension of an interior field onto a grid that is
// `padding` times wider with the same spacing.
double padded_sobolev_norm(const ScalarField& field, double s, int padding);

// H^{-s} norm of difference - q_hat. Bands for I1..I3 use `k_plus_R` and `T`
// when given; otherwise everything lands in I1.
ErrorReport error_h_minus_s(const Potential& difference, const ScalarField& q_hat, double s,
                            std::optional<double> k_plus_R = std::nullopt, std::optional<double> T = std::nullopt,
                            const ErrorOptions& options = {});

struct ReconstructOptions {
  int degree_cap = 7;
  int radial_count = 16;
  std::string sphere_design = "lebedev26";
  std::uint64_t seed = 1;
  NoiseModel noise_model = NoiseModel::dense;
  CutoffSelector selector = CutoffSelector::dist_squared;
  std::optional<double> t_max;
  double c_emp = 1.0;
  int workers = 1;
  ForwardOptions forward;
  ErrorOptions error;
  double cgo_tol = 1e-10;
  int cgo_max_iter = 200;
};

struct ReconstructionResult {
  ScalarField q_hat;
  CutoffPolicy cutoff;
  double k = 1.0;
  double noise = 0.0;
  double dist_proxy = 0.0;   // measurement-noise distance used for the cutoff
  double signal_dist = 0.0;  // dist_proxy between the clean data of q1 and q2 (boundary mode)
  double error_h_minus_s = 0.0;
  double torus_error = 0.0;
  double m = 1.0;            // 2s - 3
  double I1 = 0.0;
  std::optional<double> I2;
  double I3 = 0.0;
  double term_lipschitz = 0.0;  // k^4 dist_proxy
  double term_log = 0.0;        // (k + log(1/dist_proxy))^{-m}
  double imag_ratio = 0.0;
  std::size_t sample_count = 0;
  std::size_t sample_failures = 0;
  std::size_t truncation_warnings = 0;
  ProbeMode mode = ProbeMode::boundary;
};

// Clean DtN matrices of q1, q2 and the free potential at one wave number.
struct DtNBundle {
  DtNMatrix l1;
  DtNMatrix l2;
  DtNMatrix l0;
};
DtNBundle boundary_data(const Potential& q1, const Potential& q2, double k, const ReconstructOptions& options = {});

// choose_cutoff -> acquire_samples -> lowpass_invert -> error_h_minus_s.
// Boundary mode measures dist_proxy between the clean and noisy DtN matrices
// of q2; oracle mode takes the nominal noise level as dist_proxy. A bundle
// computed for the same (q1, q2, k, options) may be passed to skip the solves.
ReconstructionResult reconstruct(const Potential& q1, const Potential& q2, double k, double R, double p, double noise,
                                 ProbeMode mode, const ReconstructOptions& options = {},
                                 const DtNBundle* data = nullptr);

// Writes <stem>.field (binary field) and <stem>.json (metadata).
void write_reconstruction(const std::string& stem, const ReconstructionResult& result);

}  // namespace cgolab
