#pragma once

// Alessandrini pairing and Fourier probing of the potential difference
// q~ = q1 - q2 with pairs of CGO solutions: either by volume quadrature
// against the constructed corrections (oracle mode) or through the DtN
// matrices of both potentials (boundary mode).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cgolab/cgo.hpp"
#include "cgolab/forward.hpp"
#include "cgolab/quadrature.hpp"

namespace cgolab {

// sum h^3 (q2 - q1) u1 u2
cplx alessandrini_lhs(const Potential& q1, const Potential& q2, const ScalarField& u1, const ScalarField& u2);

// ||(f1, g1)|| ||(f2, g2)|| dist_value in the surrogate norms.
double alessandrini_bound(const CauchyPair& c1, const CauchyPair& c2, double dist_value);

// sum h^3 f(x) e^{-i kappa.x}
cplx fourier_oracle(const ScalarField& f, const Vec3& kappa);

enum class ProbeMode { oracle, boundary };
std::string to_string(ProbeMode mode);
ProbeMode parse_probe_mode(const std::string& text);

struct FourierSample {
  double r = 0.0;
  Vec3 omega{1.0, 0.0, 0.0};
  double a = 0.0;
  cplx value{0.0, 0.0};
  ProbeMode mode = ProbeMode::oracle;
  std::optional<double> error_estimate;
  bool basis_truncation = false;  // CGO traces lost > 10% of boundary energy
  double truncation_loss = 0.0;
};

struct ProbeContext {
  // Boundary mode: DtN matrices of q1 and (possibly noisy) q2 on one basis.
  const DtNMatrix* dtn1 = nullptr;
  const DtNMatrix* dtn2 = nullptr;
  double c_emp = 1.0;
  double cgo_tol = 1e-10;
  int cgo_max_iter = 200;
};

FourierSample fourier_probe(const Potential& q1, const Potential& q2, double k, double r, const Vec3& omega, double a,
                            ProbeMode mode, const ProbeContext& context = {});

// Worst a |probe - fourier_oracle| / ||q~||_{H^s} over the given a values at
// (r, e1) in oracle mode.
double calibrate_c_emp(const Potential& q1, const Potential& q2, double k, double r, const std::vector<double>& a_values,
                       const ProbeContext& context = {});

struct FourierSampleSet {
  std::vector<FourierSample> samples;  // radius-major, direction-minor
  RadialRule radial;
  SphereDesign design;
  double T = 0.0;
  double k = 1.0;
  double R = 0.0;
  double noise = 0.0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;

  const FourierSample& at(std::size_t radius, std::size_t direction) const {
    return samples[radius * design.directions.size() + direction];
  }
};

// One probe per (Gauss-Legendre radius in [0, T], design direction) with
// a = choose_a(r, k, R). Failed probes are recorded as zero samples; more than
// 20% failures raise AcquisitionFailure.
FourierSampleSet acquire_samples(const Potential& q1, const Potential& q2, double k, double R, double T,
                                 int radial_count, const SphereDesign& design, ProbeMode mode,
                                 const ProbeContext& context = {}, int workers = 1);

// Table columns r, omega1, omega2, omega3, a, re, im, mode, error_estimate.
void write_samples_csv(std::ostream& out, const FourierSampleSet& set);
// "CGOSMP01", count (i64), then per sample r, omega, a, re, im (f64), mode
// (i32), error_estimate (f64, NaN when absent).
void write_samples_binary(std::ostream& out, const FourierSampleSet& set);
std::vector<FourierSample> read_samples_binary(std::istream& in);

}  // namespace cgolab
