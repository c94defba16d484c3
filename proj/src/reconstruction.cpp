#include "cgolab/reconstruction.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "cgolab/errors.hpp"
#include "cgolab/fft.hpp"
#include "cgolab/kernels.hpp"
#include "cgolab/parallel.hpp"

namespace cgolab {

double choose_a(double r, double k, double R) {
  if (!(R > 0.0)) throw ConfigError("R must be positive");
  return r <= k + R ? R : r;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::case_i: return "case_i";
    case Regime::case_ii: return "case_ii";
    default: return "exact";
  }
}

CutoffPolicy choose_cutoff(double k, double dist_proxy, double R, double p, CutoffSelector selector) {
  if (!(dist_proxy > 0.0)) throw ConfigError("dist_proxy must be positive; use the exact-data cutoff for noise-free data");
  if (dist_proxy > std::exp(-1.0)) throw ConfigError("dist_proxy exceeds 1/e");
  if (!(p > 0.0)) throw ConfigError("p must be positive");
  if (!(R > 0.0)) throw ConfigError("R must be positive");
  CutoffPolicy policy;
  policy.R = R;
  policy.p = p;
  policy.A = selector == CutoffSelector::dist_squared ? dist_proxy * dist_proxy : dist_proxy;
  const double t_noise = p * std::log(1.0 / policy.A);
  if (k + R < t_noise) {
    policy.regime = Regime::case_i;
    policy.T = t_noise;
  } else {
    policy.regime = Regime::case_ii;
    policy.T = k + R;
  }
  return policy;
}

CutoffPolicy exact_cutoff(double k, double R, double p, std::optional<double> t_max) {
  CutoffPolicy policy;
  policy.R = R;
  policy.p = p;
  policy.regime = Regime::exact;
  policy.T = t_max.value_or(k + 8.0);
  if (!(policy.T > 0.0)) throw ConfigError("exact-data cutoff must be positive");
  return policy;
}

namespace {

std::array<std::vector<cplx>, 3> wave_factors(const Grid& grid, const Vec3& kappa, double sign) {
  const int n = grid.points_per_axis();
  std::array<std::vector<cplx>, 3> out;
  for (int d = 0; d < 3; ++d) {
    out[d].resize(n);
    for (int i = 0; i < n; ++i) out[d][i] = std::polar(1.0, sign * kappa[d] * grid.coordinate(i));
  }
  return out;
}

}  // namespace

ScalarField lowpass_invert(const FourierSampleSet& samples, const Grid& grid, LowpassDiagnostics* diag) {
  const std::size_t radii = samples.radial.nodes.size();
  const std::size_t dirs = samples.design.directions.size();
  if (radii < 4 || dirs < 6) throw ConfigError("sample design too sparse: need at least 4 radii and 6 directions");
  if (samples.samples.size() != radii * dirs) throw ConfigError("sample set does not match its polar design");
  const double norm = 1.0 / std::pow(2.0 * std::numbers::pi, 3);
  std::vector<cplx> acc(grid.size(), cplx(0.0, 0.0));
  for (std::size_t ir = 0; ir < radii; ++ir) {
    const double r = samples.radial.nodes[ir];
    const double wr = samples.radial.weights[ir] * r * r;
    for (std::size_t id = 0; id < dirs; ++id) {
      const FourierSample& s = samples.at(ir, id);
      if (s.value == 0.0) continue;
      const cplx c = norm * wr * samples.design.weights[id] * s.value;
      const auto w = wave_factors(grid, r * samples.design.directions[id], 1.0);
      kernels::rank1_accumulate(c, w[0], w[1], w[2], acc);
    }
  }
  double max_re = 0.0;
  double max_im = 0.0;
  for (cplx& v : acc) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
    v = cplx(v.real(), 0.0);
  }
  if (diag != nullptr) diag->imag_ratio = max_re > 0.0 ? max_im / max_re : (max_im > 0.0 ? 1.0 : 0.0);
  return ScalarField(grid, std::move(acc), FieldKind::periodic);
}

namespace {

double ball_kernel(double z, double T) {
  const double tz = T * z;
  if (tz < 1e-3) {
    const double t2 = tz * tz;
    return T * T * T / (6.0 * std::numbers::pi * std::numbers::pi) * (1.0 - t2 / 10.0 + t2 * t2 / 280.0);
  }
  return (std::sin(tz) - tz * std::cos(tz)) / (2.0 * std::numbers::pi * std::numbers::pi * z * z * z);
}

}  // namespace

ScalarField ball_truncation(const ScalarField& field, double T) {
  const Grid& grid = field.grid();
  const int n = grid.points_per_axis();
  const int m = 2 * n;
  const double h = grid.spacing();
  const std::size_t total = static_cast<std::size_t>(m) * m * m;
  auto at = [m](int i, int j, int l) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * l); };
  std::vector<cplx> data(total, cplx(0.0, 0.0));
  std::vector<cplx> kernel(total);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) data[at(i, j, l)] = field(i, j, l);
  auto offset = [m](int i) { return i < m / 2 ? i : i - m; };
  for (int l = 0; l < m; ++l)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double dx = offset(i) * h, dy = offset(j) * h, dz = offset(l) * h;
        kernel[at(i, j, l)] = ball_kernel(std::sqrt(dx * dx + dy * dy + dz * dz), T) * grid.cell_volume();
      }
  fft::forward_3d(data, m);
  fft::forward_3d(kernel, m);
  const double inv = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i) data[i] *= kernel[i] * inv;
  fft::backward_3d(data, m);
  std::vector<cplx> out(grid.size());
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out[grid.index(i, j, l)] = data[at(i, j, l)];
  return ScalarField(grid, std::move(out), FieldKind::periodic);
}

namespace {

struct Band {
  double lo;
  double hi;
  double* sink;
};

// Integral over the sphere of |F f(r omega)|^2 by a Gauss-Legendre x uniform
// product rule sharing the z factor across each polar ring.
double sphere_energy(const ScalarField& f, double r, int n_polar) {
  const Grid& grid = f.grid();
  const std::size_t n = static_cast<std::size_t>(grid.points_per_axis());
  if (r == 0.0) {
    const cplx v = integrate(f);
    return 4.0 * std::numbers::pi * std::norm(v);
  }
  const RadialRule polar = gauss_legendre(n_polar, -1.0, 1.0);
  const int n_phi = 2 * n_polar;
  std::vector<cplx> plane(n * n);
  std::vector<cplx> az(n), ax(n), ay(n);
  double total = 0.0;
  for (int t = 0; t < n_polar; ++t) {
    const double c = polar.nodes[t];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (std::size_t i = 0; i < n; ++i) az[i] = std::polar(1.0, -r * c * grid.coordinate(static_cast<int>(i)));
    kernels::contract_z(f.values(), n, az, plane);
    double ring = 0.0;
    for (int p = 0; p < n_phi; ++p) {
      const double phi = 2.0 * std::numbers::pi * (p + 0.5) / n_phi;
      const double kx = r * s * std::cos(phi), ky = r * s * std::sin(phi);
      for (std::size_t i = 0; i < n; ++i) {
        ax[i] = std::polar(1.0, -kx * grid.coordinate(static_cast<int>(i)));
        ay[i] = std::polar(1.0, -ky * grid.coordinate(static_cast<int>(i)));
      }
      ring += std::norm(kernels::separable_sum_2d(plane, n, ax, ay));
    }
    total += polar.weights[t] * ring * (2.0 * std::numbers::pi / n_phi);
  }
  const double h3 = grid.cell_volume();
  return total * h3 * h3;
}

}  // namespace

double padded_sobolev_norm(const ScalarField& field, double s, int padding) {
  if (padding < 1) throw ConfigError("torus padding must be at least 1");
  if (padding == 1) return sobolev_norm(field, s);
  const Grid& grid = field.grid();
  const int n = grid.points_per_axis();
  const Grid wide = build_grid(grid.extent() * padding, n * padding);
  const int off = (n * padding - n) / 2;
  std::vector<cplx> values(wide.size(), cplx(0.0, 0.0));
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) values[wide.index(i + off, j + off, l + off)] = field(i, j, l);
  return sobolev_norm(ScalarField(wide, std::move(values), FieldKind::interior), s);
}

ErrorReport error_h_minus_s(const Potential& difference, const ScalarField& q_hat, double s,
                            std::optional<double> k_plus_R, std::optional<double> T, const ErrorOptions& options) {
  const Grid& grid = difference.grid();
  if (!(grid == q_hat.grid())) throw ConfigError("reconstruction and potential live on different grids");
  if (!(s > 1.5)) throw ConfigError("error norm needs s > 3/2");
  std::vector<cplx> values(difference.field().values().begin(), difference.field().values().end());
  const auto qh = q_hat.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= qh[i];
  const ScalarField err(grid, std::move(values), FieldKind::interior);

  ErrorReport report;
  report.torus = padded_sobolev_norm(err, -s, options.torus_padding);

  const double r_max = options.r_max.value_or(std::numbers::pi / grid.spacing());
  const double rho = std::sqrt(3.0) * grid.extent();
  double i2 = 0.0;
  std::vector<Band> bands;
  const double b1 = std::min(r_max, k_plus_R.value_or(r_max));
  const double b2 = std::min(r_max, std::max(b1, T.value_or(b1)));
  bands.push_back({0.0, b1, &report.I1});
  if (b2 > b1) bands.push_back({b1, b2, &i2});
  if (r_max > b2) bands.push_back({b2, r_max, &report.I3});

  const double norm = 1.0 / std::pow(2.0 * std::numbers::pi, 3);
  for (const Band& band : bands) {
    const int panels = std::max(1, static_cast<int>(std::ceil((band.hi - band.lo) / options.panel_width)));
    const double width = (band.hi - band.lo) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
      const RadialRule rule = gauss_legendre(options.panel_points, band.lo + p * width, band.lo + (p + 1) * width);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double r = rule.nodes[i];
        const int n_polar = std::clamp(static_cast<int>(std::ceil(options.angular_factor * r * rho)) + options.min_polar,
                                       options.min_polar, options.max_polar);
        sum += rule.weights[i] * r * r * std::pow(1.0 + r * r, -s) * sphere_energy(err, r, n_polar);
      }
    }
    *band.sink = sum * norm;
  }
  if (T && k_plus_R && *T > *k_plus_R) report.I2 = i2;
  report.polar = std::sqrt(report.I1 + i2 + report.I3);
  return report;
}

DtNBundle boundary_data(const Potential& q1, const Potential& q2, double k, const ReconstructOptions& options) {
  if (!(q1.grid() == q2.grid())) throw ConfigError("potentials live on different grids");
  ForwardOptions forward = options.forward;
  forward.workers = options.workers;
  DtNMatrix l1 = dtn_matrix(q1, k, options.degree_cap, forward);
  DtNMatrix l2 = dtn_matrix(q2, k, options.degree_cap, forward);
  DtNMatrix l0 = q2.is_zero()   ? l2
                 : q1.is_zero() ? l1
                                : dtn_matrix(sample_potential(PotentialDescriptor::zero(), q1.grid(), q1.s()), k,
                                             options.degree_cap, forward);
  return {std::move(l1), std::move(l2), std::move(l0)};
}

ReconstructionResult reconstruct(const Potential& q1, const Potential& q2, double k, double R, double p, double noise,
                                 ProbeMode mode, const ReconstructOptions& options, const DtNBundle* data) {
  if (!(q1.grid() == q2.grid())) throw ConfigError("potentials live on different grids");
  if (!(k >= 1.0)) throw ConfigError("wave number must be at least 1");
  if (!(noise >= 0.0) || noise > std::exp(-1.0)) throw ConfigError("noise level must lie in [0, 1/e]");
  const Grid& grid = q1.grid();
  const Potential diff = potential_difference(q1, q2);

  ReconstructionResult result{.q_hat = ScalarField(grid, FieldKind::periodic), .cutoff = {}, .I2 = std::nullopt};
  result.k = k;
  result.noise = noise;
  result.mode = mode;
  result.m = 2.0 * q1.s() - 3.0;

  std::optional<DtNBundle> own;
  std::optional<DtNMatrix> l2_noisy;
  if (mode == ProbeMode::boundary) {
    if (data == nullptr) {
      own = boundary_data(q1, q2, k, options);
      data = &*own;
    } else if (data->l1.k != k || data->l1.degree_cap != options.degree_cap) {
      throw ConfigError("precomputed DtN matrices do not match the requested k and degree cap");
    }
    l2_noisy = add_noise(data->l2, noise, options.seed, options.noise_model);
    result.dist_proxy = dtn_distance(data->l2, *l2_noisy, data->l0);
    result.signal_dist = dtn_distance(data->l1, data->l2, data->l0);
  } else {
    result.dist_proxy = noise;
  }

  result.cutoff = result.dist_proxy > 0.0 ? choose_cutoff(k, result.dist_proxy, R, p, options.selector)
                                          : exact_cutoff(k, R, p, options.t_max);
  ProbeContext context;
  context.c_emp = options.c_emp;
  context.cgo_tol = options.cgo_tol;
  context.cgo_max_iter = options.cgo_max_iter;
  if (mode == ProbeMode::boundary) {
    context.dtn1 = &data->l1;
    context.dtn2 = &*l2_noisy;
  }
  const SphereDesign design = make_sphere_design(options.sphere_design);
  const FourierSampleSet samples = acquire_samples(q1, q2, k, R, result.cutoff.T, options.radial_count, design, mode,
                                                   context, options.workers);
  result.sample_count = samples.samples.size();
  result.sample_failures = samples.failures;
  for (const auto& s : samples.samples)
    if (s.basis_truncation) ++result.truncation_warnings;

  LowpassDiagnostics diag;
  result.q_hat = lowpass_invert(samples, grid, &diag);
  result.imag_ratio = diag.imag_ratio;

  const ErrorReport err = error_h_minus_s(diff, result.q_hat, q1.s(), k + R, result.cutoff.T, options.error);
  result.error_h_minus_s = err.polar;
  result.torus_error = err.torus;
  result.I1 = err.I1;
  result.I2 = err.I2;
  result.I3 = err.I3;
  if (result.dist_proxy > 0.0) {
    result.term_lipschitz = std::pow(k, 4) * result.dist_proxy;
    result.term_log = std::pow(k + std::log(1.0 / result.dist_proxy), -result.m);
  }
  return result;
}

void write_reconstruction(const std::string& stem, const ReconstructionResult& result) {
  write_field_file(stem + ".field", result.q_hat);
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["k"] = result.k;
  j["R"] = result.cutoff.R;
  j["p"] = result.cutoff.p;
  j["T"] = result.cutoff.T;
  j["regime"] = to_string(result.cutoff.regime);
  j["noise"] = result.noise;
  j["dist_proxy"] = result.dist_proxy;
  j["A"] = result.cutoff.A;
  j["signal_dist_proxy"] = result.signal_dist;
  j["error_h_minus_s"] = result.error_h_minus_s;
  j["torus_error_h_minus_s"] = result.torus_error;
  j["m"] = result.m;
  j["mode"] = to_string(result.mode);
  nlohmann::ordered_json d;
  d["I1"] = result.I1;
  d["I2"] = result.I2 ? nlohmann::ordered_json(*result.I2) : nlohmann::ordered_json(nullptr);
  d["I3"] = result.I3;
  d["term_lipschitz"] = result.term_lipschitz;
  d["term_log"] = result.term_log;
  d["imag_ratio"] = result.imag_ratio;
  d["samples"] = result.sample_count;
  d["sample_failures"] = result.sample_failures;
  d["truncation_warnings"] = result.truncation_warnings;
  j["diagnostics"] = d;
  std::ofstream out(stem + ".json");
  if (!out) throw IoError("cannot open " + stem + ".json");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed to write " + stem + ".json");
}

}  // namespace cgolab
