// cgolab: command-line front end for the CGO reconstruction laboratory.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "cgolab/errors.hpp"
#include "cgolab/lab.hpp"
#include "cgolab/parallel.hpp"

using namespace cgolab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec3 parse_vec3(const std::string& text) {
  std::stringstream ss(text);
  Vec3 v{};
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ',')) throw ConfigError("expected three comma-separated numbers, got '" + text + "'");
    v[static_cast<std::size_t>(i)] = std::stod(part);
  }
  return v;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

struct CgoCheckArgs {
  double extent = 1.1;
  int points = 48;
  double width = 0.3;
  double amplitude = 1.0;
  double s = 2.0;
  std::vector<double> k_list{1, 2, 4, 8};
  std::vector<double> a_list{8, 16, 32, 64};
};

int cgo_check(const CgoCheckArgs& args) {
  const Grid grid = build_grid(args.extent, args.points);
  const Potential q = sample_potential(PotentialDescriptor::gaussian({0, 0, 0}, args.width, args.amplitude), grid, args.s);
  std::printf("# ||q||_{H^s} = %.6e (s = %g, N = %d, L = %g)\n", q.h_s_norm(), args.s, args.points, args.extent);
  std::printf("%8s %8s %14s %14s %6s %10s\n", "k", "a", "psi_norm", "a*psi/q", "iters", "seconds");
  for (double k : args.k_list) {
    std::vector<double> la, ln;
    for (double a : args.a_list) {
      const auto t0 = std::chrono::steady_clock::now();
      const ZetaPair pair = make_zeta_pair(k, 0.0, Vec3{0.0, 0.0, 1.0}, a);
      const CGOSolution sol = build_cgo(q, pair.zeta1);
      std::printf("%8g %8g %14.6e %14.6e %6d %10.3f\n", k, a, sol.psi_h_s_norm, a * sol.psi_h_s_norm / q.h_s_norm(),
                  sol.iterations, seconds_since(t0));
      la.push_back(std::log(a));
      ln.push_back(std::log(sol.psi_h_s_norm));
    }
    std::printf("# k = %g: log-log slope of ||psi|| vs a = %.4f\n", k, slope(la, ln));
  }
  return 0;
}

struct ForwardCheckArgs {
  double extent = 1.1;
  double k = 2.0;
  std::vector<int> points{32, 64};
  std::string direction = "1,2,2";
  std::string scheme = "second";
};

int forward_check(const ForwardCheckArgs& args) {
  const Vec3 d = normalized(parse_vec3(args.direction));
  ForwardOptions options;
  options.scheme = args.scheme == "fourth" ? StencilOrder::fourth : StencilOrder::second;
  if (args.scheme != "second" && args.scheme != "fourth") throw ConfigError("scheme must be second or fourth");
  std::printf("%6s %14s %8s %6s %10s\n", "N", "max_error", "order", "iters", "seconds");
  double previous = 0.0;
  int previous_n = 0;
  for (int n : args.points) {
    const Grid grid = build_grid(args.extent, n);
    auto wave = [&](const Vec3& x) { return std::exp(cplx(0.0, args.k * dot(d, x))); };
    const BoundaryField f = BoundaryField::sample(grid, [&](const Vec3& x, Face) { return wave(x); });
    const Potential zero = sample_potential(PotentialDescriptor::zero(), grid, 2.0);
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    const ScalarField u = solve_dirichlet(zero, args.k, f, options, &report);
    const double elapsed = seconds_since(t0);
    double err = 0.0;
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(u.values()[grid.index(i, j, l)] - wave(grid.position(i, j, l))));
    const double order = previous_n > 0 ? std::log(previous / err) / std::log(static_cast<double>(n) / previous_n) : 0.0;
    std::printf("%6d %14.6e %8.3f %6d %10.3f\n", n, err, order, report.iterations, elapsed);
    previous = err;
    previous_n = n;
  }
  return 0;
}

struct ProbeArgs {
  std::string config;
  double k = 1.0;
  double r = 0.0;
  double a = 4.0;
  std::string omega = "0,0,1";
  std::string mode;
};

int probe(const ProbeArgs& args) {
  const SweepConfig c = load_sweep_config(args.config);
  const Grid grid = build_grid(c.extent, c.points);
  const Potential q1 = sample_potential(c.q1, grid, c.s);
  const Potential q2 = sample_potential(c.q2, grid, c.s);
  const ProbeMode mode = args.mode.empty() ? c.mode : parse_probe_mode(args.mode);
  const Vec3 omega = normalized(parse_vec3(args.omega));
  ProbeContext context;
  context.c_emp = c.c_emp;
  std::optional<DtNMatrix> l1, l2;
  if (mode == ProbeMode::boundary) {
    ForwardOptions forward;
    forward.scheme = c.scheme;
    forward.workers = c.workers;
    l1 = dtn_matrix(q1, args.k, c.degree_cap, forward);
    l2 = dtn_matrix(q2, args.k, c.degree_cap, forward);
    context.dtn1 = &*l1;
    context.dtn2 = &*l2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const FourierSample s = fourier_probe(q1, q2, args.k, args.r, omega, args.a, mode, context);
  const Potential diff = potential_difference(q1, q2);
  const cplx exact = fourier_oracle(diff.field(), Vec3{args.r * omega[0], args.r * omega[1], args.r * omega[2]});
  std::printf("mode            %s\n", to_string(mode).c_str());
  std::printf("value           %.12e %+.12ei\n", s.value.real(), s.value.imag());
  std::printf("fft_oracle      %.12e %+.12ei\n", exact.real(), exact.imag());
  std::printf("abs_error       %.6e\n", std::abs(s.value - exact));
  if (s.error_estimate) std::printf("error_estimate  %.6e\n", *s.error_estimate);
  if (mode == ProbeMode::boundary) std::printf("truncation_loss %.6f%s\n", s.truncation_loss, s.basis_truncation ? " (warning)" : "");
  std::printf("seconds         %.3f\n", seconds_since(t0));
  return 0;
}

struct ReconstructArgs {
  std::string config;
  double k = 1.0;
  double noise = 1e-3;
  std::string out = "reconstruction";
};

int reconstruct_cell(const ReconstructArgs& args) {
  const SweepConfig c = load_sweep_config(args.config);
  const Grid grid = build_grid(c.extent, c.points);
  const Potential q1 = sample_potential(c.q1, grid, c.s);
  const Potential q2 = sample_potential(c.q2, grid, c.s);
  ReconstructOptions o = reconstruct_options(c, c.seed);
  o.workers = c.workers;
  const auto t0 = std::chrono::steady_clock::now();
  const ReconstructionResult r = reconstruct(q1, q2, args.k, c.R, c.p, args.noise, c.mode, o);
  write_reconstruction(args.out, r);
  std::printf("regime %s  T %.6g  dist_proxy %.6e  error_h_minus_s %.6e  torus %.6e  (%.1f s)\n",
              to_string(r.cutoff.regime).c_str(), r.cutoff.T, r.dist_proxy, r.error_h_minus_s, r.torus_error,
              seconds_since(t0));
  std::printf("wrote %s.field and %s.json\n", args.out.c_str(), args.out.c_str());
  return r.sample_failures > 0 ? kExitPartial : 0;
}

int sweep(const std::string& config_path, const std::string& output, std::optional<int> workers) {
  SweepConfig c = load_sweep_config(config_path);
  if (!output.empty()) c.output_dir = output;
  if (workers) c.workers = *workers;
  std::printf("# config hash %s, %zu cells\n", hash_hex(config_hash(c)).c_str(), c.k_list.size() * c.noise_list.size());
  const SweepOutcome outcome = run_sweep(c, [](const StabilityRecord& r) {
    std::printf("k %-6g eps %-8g %-8s T %-8.4g error %.6e  %.1f s\n", r.k, r.noise, r.status.c_str(), r.T,
                r.error_h_minus_s, r.wall_time);
    std::fflush(stdout);
  });
  std::printf("# %zu resumed, %zu failed; wrote %s\n", outcome.resumed, outcome.failed, outcome.csv.string().c_str());
  return outcome.failed > 0 ? kExitPartial : 0;
}

void print_fit(const FitReport& f) {
  std::printf("lipschitz   slope %+.4f  (k = %g, %zu points, rms %.3g) %s\n", f.lipschitz.slope, f.lipschitz.fixed,
              f.lipschitz.points, f.lipschitz.residual, f.lipschitz.conforming ? "conforming" : "non-conforming");
  std::printf("logarithmic slope %+.4f  (eps = %g, %zu points, rms %.3g) %s\n", f.logarithmic.slope,
              f.logarithmic.fixed, f.logarithmic.points, f.logarithmic.residual,
              f.logarithmic.conforming ? "conforming" : "non-conforming");
  std::printf("noise-log   slope %+.4f  (k = %g, %zu points, rms %.3g) %s\n", f.noise_log.slope, f.noise_log.fixed,
              f.noise_log.points, f.noise_log.residual, f.noise_log.conforming ? "conforming" : "non-conforming");
  std::printf("C_emp %.4g, error decreasing in k: %s\n", f.c_emp, f.k_monotone ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Increasing-stability laboratory for the Schroedinger inverse boundary problem"};
  app.require_subcommand(1);

  CgoCheckArgs cgo_args;
  auto* cgo_cmd = app.add_subcommand("cgo-check", "psi-decay battery for a gaussian potential");
  cgo_cmd->add_option("--extent", cgo_args.extent, "half-width L of the cube");
  cgo_cmd->add_option("--points", cgo_args.points, "grid points per axis");
  cgo_cmd->add_option("--width", cgo_args.width, "gaussian width");
  cgo_cmd->add_option("--amplitude", cgo_args.amplitude, "gaussian amplitude");
  cgo_cmd->add_option("--s", cgo_args.s, "Sobolev exponent");
  cgo_cmd->add_option("--k", cgo_args.k_list, "wave numbers")->delimiter(',');
  cgo_cmd->add_option("--a", cgo_args.a_list, "|xi| values")->delimiter(',');

  ForwardCheckArgs fwd_args;
  auto* fwd_cmd = app.add_subcommand("forward-check", "plane-wave manufactured solution for the Dirichlet solver");
  fwd_cmd->add_option("--extent", fwd_args.extent, "half-width L of the cube");
  fwd_cmd->add_option("--k", fwd_args.k, "wave number");
  fwd_cmd->add_option("--points", fwd_args.points, "grid sizes")->delimiter(',');
  fwd_cmd->add_option("--direction", fwd_args.direction, "propagation direction x,y,z");
  fwd_cmd->add_option("--scheme", fwd_args.scheme, "second or fourth");

  ProbeArgs probe_args;
  auto* probe_cmd = app.add_subcommand("probe", "one Fourier probe of q1 - q2");
  probe_cmd->add_option("--config", probe_args.config, "sweep config (potentials, grid, basis)")->required();
  probe_cmd->add_option("--k", probe_args.k, "wave number");
  probe_cmd->add_option("--r", probe_args.r, "frequency radius");
  probe_cmd->add_option("--a", probe_args.a, "|xi_l|");
  probe_cmd->add_option("--omega", probe_args.omega, "unit direction x,y,z");
  probe_cmd->add_option("--mode", probe_args.mode, "oracle or boundary (default from config)");

  ReconstructArgs rec_args;
  auto* rec_cmd = app.add_subcommand("reconstruct", "one reconstruction cell");
  rec_cmd->add_option("--config", rec_args.config, "sweep config")->required();
  rec_cmd->add_option("--k", rec_args.k, "wave number");
  rec_cmd->add_option("--noise", rec_args.noise, "noise level eps");
  rec_cmd->add_option("--out", rec_args.out, "output stem for .field and .json");

  std::string sweep_config, sweep_output;
  std::optional<int> sweep_workers;
  auto* sweep_cmd = app.add_subcommand("sweep", "full (k, noise) sweep with resumable progress");
  sweep_cmd->add_option("--config", sweep_config, "sweep config")->required();
  sweep_cmd->add_option("--output", sweep_output, "override output_dir");
  sweep_cmd->add_option("--workers", sweep_workers, "worker threads (default CGOLAB_WORKERS)");

  std::string fit_csv, fit_out;
  double fit_s = 2.0;
  auto* fit_cmd = app.add_subcommand("fit", "stability fits over a sweep CSV");
  fit_cmd->add_option("--csv", fit_csv, "sweep.csv")->required();
  fit_cmd->add_option("--s", fit_s, "Sobolev exponent");
  fit_cmd->add_option("--out", fit_out, "write the fit as JSON");

  std::string report_csv, report_dir = "report";
  double report_s = 2.0;
  auto* report_cmd = app.add_subcommand("report", "CSV, fit JSON and SVG plots for a sweep");
  report_cmd->add_option("--csv", report_csv, "sweep.csv")->required();
  report_cmd->add_option("--out", report_dir, "output directory");
  report_cmd->add_option("--s", report_s, "Sobolev exponent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cgo_cmd) return cgo_check(cgo_args);
    if (*fwd_cmd) return forward_check(fwd_args);
    if (*probe_cmd) return probe(probe_args);
    if (*rec_cmd) return reconstruct_cell(rec_args);
    if (*sweep_cmd) {
      if (!sweep_workers && std::getenv("CGOLAB_WORKERS") != nullptr) sweep_workers = default_workers();
      return sweep(sweep_config, sweep_output, sweep_workers);
    }
    if (*fit_cmd) {
      const FitReport fit = fit_stability(read_records_csv(fit_csv), fit_s);
      print_fit(fit);
      if (!fit_out.empty()) write_fit_json(fit_out, fit);
      return 0;
    }
    if (*report_cmd) {
      const auto records = read_records_csv(report_csv);
      std::optional<FitReport> fit;
      try {
        fit = fit_stability(records, report_s);
        print_fit(*fit);
      } catch (const InsufficientData& e) {
        std::fprintf(stderr, "note: %s; plots only\n", e.what());
      }
      const ReportPaths paths = render_report(records, fit, report_dir);
      std::printf("wrote %s, %s, %s%s%s\n", paths.csv.string().c_str(), paths.noise_plot.string().c_str(),
                  paths.k_plot.string().c_str(), fit ? ", " : "", fit ? paths.fit.string().c_str() : "");
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
