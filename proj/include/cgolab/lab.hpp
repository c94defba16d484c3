#pragma once

// Sweep configuration, orchestration over (k, noise) cells with resumable
// progress, stability fits and report emission.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgolab/reconstruction.hpp"

namespace cgolab {

struct SweepConfig {
  PotentialDescriptor q1;
  PotentialDescriptor q2;
  double extent = 1.1;
  int points = 32;
  std::vector<double> k_list;
  std::vector<double> noise_list;
  double R = 4.0;
  double p = 0.25;
  double s = 2.0;
  ProbeMode mode = ProbeMode::boundary;
  std::string sphere_design = "lebedev26";
  int radial_count = 16;
  int degree_cap = 7;
  StencilOrder scheme = StencilOrder::second;
  NoiseModel noise_model = NoiseModel::dense;
  CutoffSelector selector = CutoffSelector::dist_squared;
  std::optional<double> t_max;
  double c_emp = 1.0;
  std::uint64_t seed = 1;
  std::string output_dir = "sweep_out";
  int workers = 1;  // not part of the physics hash
};

// Throws ConfigError on s <= 1.5, any k < 1, noise outside {0} U (0, 1/e],
// empty lists, or an invalid grid or design.
void validate(const SweepConfig& config);
SweepConfig parse_sweep_config(const std::string& yaml_text);
SweepConfig load_sweep_config(const std::filesystem::path& path);

// Reconstruction options of one cell; workers stays 1 (cells run in parallel).
ReconstructOptions reconstruct_options(const SweepConfig& config, std::uint64_t seed);

// 64-bit FNV-1a over a canonical rendering of every physics field.
std::uint64_t config_hash(const SweepConfig& config);
std::string hash_hex(std::uint64_t hash);

// Seed for cell (ik, ie) derived from the sweep seed.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t k_index, std::size_t noise_index);

struct StabilityRecord {
  double k = 1.0;
  double noise = 0.0;
  double dist_proxy = 0.0;
  double A = 0.0;
  Regime regime = Regime::case_ii;
  double T = 0.0;
  double error_h_minus_s = 0.0;
  double torus_error = 0.0;
  double signal_dist = 0.0;
  double I1 = 0.0;
  double I2 = 0.0;  // NaN when the band is absent
  double I3 = 0.0;
  double psi_a = 0.0;         // a of the diagnostic CGO (r = 0, a = R)
  double psi_norm = 0.0;      // ||psi||_{H^s} of that CGO
  double psi_decay = 0.0;     // a ||psi|| / ||q1||
  int psi_iterations = 0;
  std::size_t sample_failures = 0;
  std::string status = "ok";  // ok | error tag
  double wall_time = 0.0;     // seconds, reported outside the deterministic CSV
};

// Frozen column order of sweep.csv.
const std::vector<std::string>& record_columns();
void write_records_csv(const std::filesystem::path& path, const std::vector<StabilityRecord>& records);
std::vector<StabilityRecord> read_records_csv(const std::filesystem::path& path);

struct SweepOutcome {
  std::vector<StabilityRecord> records;  // k-major, noise-minor
  std::size_t resumed = 0;
  std::size_t failed = 0;
  std::filesystem::path csv;
};

// Runs every (k, noise) cell, appending each finished cell to
// progress.csv in the output directory. A progress file written under the same
// config hash is resumed; any other is discarded. Writes sweep.csv and
// timings.csv at the end.
SweepOutcome run_sweep(const SweepConfig& config,
                       const std::function<void(const StabilityRecord&)>& on_record = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log residuals
  std::size_t points = 0;
  double fixed = 0.0;     // the k or noise level held fixed
  bool conforming = false;
};

struct FitReport {
  double m = 1.0;
  SlopeFit lipschitz;   // log err vs log eps at the largest k; expect 1
  SlopeFit logarithmic; // log err vs log(k + log(1/eps)) at the smallest eps; expect -m
  SlopeFit noise_log;   // same abscissa over eps at the smallest k
  double c_emp = 0.0;   // smallest C with err <= C (k^4 dist + (k + log 1/dist)^{-m})
  bool k_monotone = false;  // error strictly decreasing in k at the smallest eps
};

// Throws InsufficientData unless the successful records hold at least three
// positive noise levels at each of at least two k values.
FitReport fit_stability(const std::vector<StabilityRecord>& records, double s = 2.0);
// Slope of log error against log(k + log(1/eps)) over the noise levels at one
// k. Throws InsufficientData below three positive noise levels.
SlopeFit fit_log_regime(const std::vector<StabilityRecord>& records, double k, double s = 2.0);
void write_fit_json(const std::filesystem::path& path, const FitReport& fit);

struct ReportPaths {
  std::filesystem::path csv;
  std::filesystem::path fit;
  std::filesystem::path noise_plot;
  std::filesystem::path k_plot;
};

// CSV of all records, fit.json (when a fit is given), error_vs_noise.svg and
// error_vs_k.svg. Throws ConfigError for empty records.
ReportPaths render_report(const std::vector<StabilityRecord>& records, const std::optional<FitReport>& fit,
                          const std::filesystem::path& directory);

}  // namespace cgolab
