#include "cgolab/alessandrini.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "cgolab/binary_io.hpp"
#include "cgolab/errors.hpp"
#include "cgolab/kernels.hpp"
#include "cgolab/parallel.hpp"
#include "cgolab/reconstruction.hpp"

namespace cgolab {

cplx alessandrini_lhs(const Potential& q1, const Potential& q2, const ScalarField& u1, const ScalarField& u2) {
  const Grid& grid = q1.grid();
  if (!(grid == q2.grid()) || !(grid == u1.grid()) || !(grid == u2.grid())) {
    throw ConfigError("grid mismatch in alessandrini_lhs");
  }
  const auto a = q1.field().values();
  const auto b = q2.field().values();
  const auto x = u1.values();
  const auto y = u2.values();
  cplx total(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx dq = b[i] - a[i];
    if (dq != 0.0) total += dq * x[i] * y[i];
  }
  return total * grid.cell_volume();
}

double alessandrini_bound(const CauchyPair& c1, const CauchyPair& c2, double dist_value) {
  return c1.norm_cache * c2.norm_cache * dist_value;
}

namespace {

std::array<std::vector<cplx>, 3> plane_wave_factors(const Grid& grid, const Vec3& kappa) {
  const int n = grid.points_per_axis();
  std::array<std::vector<cplx>, 3> out;
  for (int d = 0; d < 3; ++d) {
    out[d].resize(n);
    for (int i = 0; i < n; ++i) out[d][i] = std::polar(1.0, -kappa[d] * grid.coordinate(i));
  }
  return out;
}

}  // namespace

cplx fourier_oracle(const ScalarField& f, const Vec3& kappa) {
  const Grid& grid = f.grid();
  const auto w = plane_wave_factors(grid, kappa);
  return kernels::separable_sum(f.values(), grid.points_per_axis(), w[0], w[1], w[2]) * grid.cell_volume();
}

std::string to_string(ProbeMode mode) { return mode == ProbeMode::oracle ? "oracle" : "boundary"; }

ProbeMode parse_probe_mode(const std::string& text) {
  if (text == "oracle") return ProbeMode::oracle;
  if (text == "boundary") return ProbeMode::boundary;
  throw ConfigError("probe mode must be 'oracle' or 'boundary', got '" + text + "'");
}

namespace {

double projection_loss(const BoundaryField& f, const Eigen::VectorXcd& c) {
  const double total = f.l2_norm();
  if (total == 0.0) return 0.0;
  return std::max(0.0, 1.0 - c.squaredNorm() / (total * total));
}

}  // namespace

FourierSample fourier_probe(const Potential& q1, const Potential& q2, double k, double r, const Vec3& omega, double a,
                            ProbeMode mode, const ProbeContext& context) {
  if (!(q1.grid() == q2.grid())) throw ConfigError("potentials live on different grids");
  const ZetaPair pair = make_zeta_pair(k, r, omega, a);
  FourierSample sample;
  sample.r = r;
  sample.omega = omega;
  sample.a = a;
  sample.mode = mode;

  const Potential diff = potential_difference(q1, q2);
  const CGOSolution s1 = build_cgo(q1, pair.zeta1, context.cgo_tol, context.cgo_max_iter);
  const CGOSolution s2 = build_cgo(q2, pair.zeta2, context.cgo_tol, context.cgo_max_iter);

  if (mode == ProbeMode::oracle) {
    const Grid& grid = q1.grid();
    const auto d = diff.field().values();
    const auto p1 = s1.psi.values();
    const auto p2 = s2.psi.values();
    std::vector<cplx> integrand(grid.size());
    for (std::size_t i = 0; i < integrand.size(); ++i) {
      integrand[i] = d[i] == 0.0 ? cplx(0.0, 0.0) : d[i] * (1.0 + p1[i]) * (1.0 + p2[i]);
    }
    sample.value = fourier_oracle(ScalarField(grid, std::move(integrand), FieldKind::interior), r * omega);
    sample.error_estimate = context.c_emp / a * diff.h_s_norm();
    return sample;
  }

  if (context.dtn1 == nullptr || context.dtn2 == nullptr) {
    throw ConfigError("boundary-mode probing needs the DtN matrices of both potentials");
  }
  if (context.dtn1->entries.rows() != context.dtn2->entries.rows()) throw ConfigError("DtN matrices differ in size");
  const BoundaryBasis basis(q1.grid(), context.dtn1->degree_cap);
  if (basis.size() != context.dtn1->dimension()) throw ConfigError("DtN matrix does not match the grid's basis");
  const BoundaryField f1 = cgo_trace(s1);
  const BoundaryField f2 = cgo_trace(s2);
  const Eigen::VectorXcd c1 = basis.project(f1);
  const Eigen::VectorXcd c2 = basis.project(f2);
  sample.truncation_loss = std::max(projection_loss(f1, c1), projection_loss(f2, c2));
  sample.basis_truncation = sample.truncation_loss > 0.1;
  const Eigen::MatrixXcd delta = context.dtn2->entries - context.dtn1->entries;
  sample.value = c2.transpose() * (delta * c1);
  return sample;
}

double calibrate_c_emp(const Potential& q1, const Potential& q2, double k, double r, const std::vector<double>& a_values,
                       const ProbeContext& context) {
  const Potential diff = potential_difference(q1, q2);
  if (diff.is_zero()) return 0.0;
  const Vec3 omega{1.0, 0.0, 0.0};
  const cplx exact = fourier_oracle(diff.field(), r * omega);
  double worst = 0.0;
  for (double a : a_values) {
    const FourierSample s = fourier_probe(q1, q2, k, r, omega, a, ProbeMode::oracle, context);
    worst = std::max(worst, a * std::abs(s.value - exact) / diff.h_s_norm());
  }
  return worst;
}

FourierSampleSet acquire_samples(const Potential& q1, const Potential& q2, double k, double R, double T,
                                 int radial_count, const SphereDesign& design, ProbeMode mode,
                                 const ProbeContext& context, int workers) {
  if (!(T > 0.0)) throw ConfigError("cutoff T must be positive");
  if (radial_count < 1) throw ConfigError("radial count must be positive");
  FourierSampleSet set;
  set.radial = gauss_legendre(radial_count, 0.0, T);
  set.design = design;
  set.T = T;
  set.k = k;
  set.R = R;
  const std::size_t dirs = design.directions.size();
  const std::size_t total = set.radial.nodes.size() * dirs;
  set.samples.resize(total);
  std::vector<std::string> errors(total);
  parallel_for(total, workers, [&](std::size_t idx) {
    const double r = set.radial.nodes[idx / dirs];
    const Vec3& omega = design.directions[idx % dirs];
    const double a = choose_a(r, k, R);
    try {
      set.samples[idx] = fourier_probe(q1, q2, k, r, omega, a, mode, context);
    } catch (const LabError& e) {
      FourierSample failed;
      failed.r = r;
      failed.omega = omega;
      failed.a = a;
      failed.mode = mode;
      failed.value = cplx(0.0, 0.0);
      set.samples[idx] = failed;
      errors[idx] = e.what();
    }
  });
  for (auto& e : errors)
    if (!e.empty()) {
      ++set.failures;
      set.failure_messages.push_back(std::move(e));
    }
  if (set.failures * 5 > total) {
    throw AcquisitionFailure(std::to_string(set.failures) + " of " + std::to_string(total) +
                             " probes failed; first: " + set.failure_messages.front());
  }
  return set;
}

void write_samples_csv(std::ostream& out, const FourierSampleSet& set) {
  out << "r,omega1,omega2,omega3,a,re,im,mode,error_estimate\n";
  out << std::setprecision(17);
  for (const auto& s : set.samples) {
    out << s.r << ',' << s.omega[0] << ',' << s.omega[1] << ',' << s.omega[2] << ',' << s.a << ',' << s.value.real()
        << ',' << s.value.imag() << ',' << to_string(s.mode) << ',';
    if (s.error_estimate) out << *s.error_estimate;
    out << '\n';
  }
  if (!out) throw IoError("failed to write sample table");
}

void write_samples_binary(std::ostream& out, const FourierSampleSet& set) {
  io::write_magic(out, "CGOSMP01");
  io::write_le<std::int64_t>(out, static_cast<std::int64_t>(set.samples.size()));
  for (const auto& s : set.samples) {
    io::write_le<double>(out, s.r);
    for (double w : s.omega) io::write_le<double>(out, w);
    io::write_le<double>(out, s.a);
    io::write_complex(out, s.value);
    io::write_le<std::int32_t>(out, s.mode == ProbeMode::oracle ? 0 : 1);
    io::write_le<double>(out, s.error_estimate.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
}

std::vector<FourierSample> read_samples_binary(std::istream& in) {
  io::expect_magic(in, "CGOSMP01");
  const auto count = io::read_le<std::int64_t>(in);
  if (count < 0) throw IoError("negative sample count");
  std::vector<FourierSample> out(static_cast<std::size_t>(count));
  for (auto& s : out) {
    s.r = io::read_le<double>(in);
    for (double& w : s.omega) w = io::read_le<double>(in);
    s.a = io::read_le<double>(in);
    s.value = io::read_complex(in);
    s.mode = io::read_le<std::int32_t>(in) == 0 ? ProbeMode::oracle : ProbeMode::boundary;
    const double e = io::read_le<double>(in);
    if (!std::isnan(e)) s.error_estimate = e;
  }
  return out;
}

}  // namespace cgolab
