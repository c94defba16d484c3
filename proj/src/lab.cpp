#include "cgolab/lab.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cgolab/errors.hpp"
#include "cgolab/parallel.hpp"

namespace cgolab {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key, T fallback) {
  const YAML::Node n = node[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  const YAML::Node n = node[key];
  if (!n || !n.IsSequence()) throw ConfigError("config key '" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : n) {
    try {
      out.push_back(v.as<double>());
    } catch (const YAML::Exception&) {
      throw ConfigError("config key '" + key + "' holds a non-numeric entry");
    }
  }
  return out;
}

Vec3 vec3(const YAML::Node& n, const std::string& what) {
  if (!n || !n.IsSequence() || n.size() != 3) throw ConfigError(what + " must be a list of three numbers");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

GaussianBump parse_bump(const YAML::Node& n) {
  GaussianBump b;
  b.center = n["center"] ? vec3(n["center"], "bump center") : Vec3{0.0, 0.0, 0.0};
  b.width = scalar<double>(n, "width", 0.3);
  b.amplitude = scalar<double>(n, "amplitude", 1.0);
  return b;
}

PotentialDescriptor parse_potential(const YAML::Node& n, const std::string& name) {
  if (!n) return PotentialDescriptor::zero();
  const auto kind = scalar<std::string>(n, "kind", "zero");
  if (kind == "zero") return PotentialDescriptor::zero();
  if (kind == "gaussian") return {{parse_bump(n)}};
  if (kind == "sum") {
    PotentialDescriptor d;
    const YAML::Node bumps = n["bumps"];
    if (!bumps || !bumps.IsSequence()) throw ConfigError(name + ": kind 'sum' needs a 'bumps' list");
    for (const auto& b : bumps) d.bumps.push_back(parse_bump(b));
    return d;
  }
  throw ConfigError(name + ": unknown potential kind '" + kind + "'");
}

StencilOrder parse_scheme(const std::string& text) {
  if (text == "second") return StencilOrder::second;
  if (text == "fourth") return StencilOrder::fourth;
  throw ConfigError("forward scheme must be 'second' or 'fourth', got '" + text + "'");
}

NoiseModel parse_noise_model(const std::string& text) {
  if (text == "dense") return NoiseModel::dense;
  if (text == "relative") return NoiseModel::relative;
  throw ConfigError("noise model must be 'dense' or 'relative', got '" + text + "'");
}

CutoffSelector parse_selector(const std::string& text) {
  if (text == "dist_squared") return CutoffSelector::dist_squared;
  if (text == "dist") return CutoffSelector::dist;
  throw ConfigError("cutoff selector must be 'dist_squared' or 'dist', got '" + text + "'");
}

std::string scheme_name(StencilOrder o) { return o == StencilOrder::fourth ? "fourth" : "second"; }
std::string noise_model_name(NoiseModel m) { return m == NoiseModel::relative ? "relative" : "dense"; }
std::string selector_name(CutoffSelector c) { return c == CutoffSelector::dist ? "dist" : "dist_squared"; }

Regime parse_regime(const std::string& text) {
  if (text == "case_i") return Regime::case_i;
  if (text == "case_ii") return Regime::case_ii;
  if (text == "exact") return Regime::exact;
  throw IoError("unknown regime '" + text + "' in record file");
}

std::string canonical(const PotentialDescriptor& d) {
  std::string out = "[";
  for (const auto& b : d.bumps) {
    out += "(" + format_double(b.center[0]) + "," + format_double(b.center[1]) + "," + format_double(b.center[2]) +
           ";" + format_double(b.width) + ";" + format_double(b.amplitude) + ")";
  }
  return out + "]";
}

std::string canonical_list(const std::vector<double>& v) {
  std::string out = "[";
  for (double x : v) out += format_double(x) + ",";
  return out + "]";
}

std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const ResonantFrequency*>(&e)) return "resonant_frequency";
  if (dynamic_cast<const NoContraction*>(&e)) return "no_contraction";
  if (dynamic_cast<const AcquisitionFailure*>(&e)) return "acquisition_failure";
  if (dynamic_cast<const DegenerateSymbol*>(&e)) return "degenerate_symbol";
  if (dynamic_cast<const InvalidFrequencyRange*>(&e)) return "invalid_frequency_range";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  return "error";
}

std::string record_row(const StabilityRecord& r) {
  std::ostringstream os;
  os << format_double(r.k) << ',' << format_double(r.noise) << ',' << format_double(r.dist_proxy) << ','
     << format_double(r.A) << ',' << to_string(r.regime) << ',' << format_double(r.T) << ','
     << format_double(r.error_h_minus_s) << ',' << format_double(r.torus_error) << ','
     << format_double(r.signal_dist) << ',' << format_double(r.I1) << ',' << format_double(r.I2) << ','
     << format_double(r.I3) << ',' << format_double(r.psi_a) << ',' << format_double(r.psi_norm) << ','
     << format_double(r.psi_decay) << ',' << r.psi_iterations << ',' << r.sample_failures << ',' << r.status;
  return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw IoError("malformed number '" + text + "' in record file");
  return v;
}

StabilityRecord parse_row(const std::string& line) {
  const auto c = split(line, ',');
  if (c.size() != record_columns().size()) throw IoError("record row has " + std::to_string(c.size()) + " columns");
  StabilityRecord r;
  r.k = parse_number(c[0]);
  r.noise = parse_number(c[1]);
  r.dist_proxy = parse_number(c[2]);
  r.A = parse_number(c[3]);
  r.regime = parse_regime(c[4]);
  r.T = parse_number(c[5]);
  r.error_h_minus_s = parse_number(c[6]);
  r.torus_error = parse_number(c[7]);
  r.signal_dist = parse_number(c[8]);
  r.I1 = parse_number(c[9]);
  r.I2 = parse_number(c[10]);
  r.I3 = parse_number(c[11]);
  r.psi_a = parse_number(c[12]);
  r.psi_norm = parse_number(c[13]);
  r.psi_decay = parse_number(c[14]);
  r.psi_iterations = static_cast<int>(parse_number(c[15]));
  r.sample_failures = static_cast<std::size_t>(parse_number(c[16]));
  r.status = c[17];
  return r;
}

std::string header_line() {
  std::string out;
  for (const auto& c : record_columns()) out += (out.empty() ? "" : ",") + c;
  return out;
}

StabilityRecord run_cell(const SweepConfig& config, const Potential& q1, const Potential& q2, double k, double noise,
                         std::uint64_t seed, const DtNBundle* bundle) {
  const auto start = std::chrono::steady_clock::now();
  StabilityRecord rec;
  rec.k = k;
  rec.noise = noise;
  rec.I2 = std::nan("");
  try {
    const ReconstructionResult r = reconstruct(q1, q2, k, config.R, config.p, noise, config.mode,
                                               reconstruct_options(config, seed), bundle);
    rec.dist_proxy = r.dist_proxy;
    rec.A = r.dist_proxy * r.dist_proxy;
    rec.regime = r.cutoff.regime;
    rec.T = r.cutoff.T;
    rec.error_h_minus_s = r.error_h_minus_s;
    rec.torus_error = r.torus_error;
    rec.signal_dist = r.signal_dist;
    rec.I1 = r.I1;
    rec.I2 = r.I2.value_or(std::nan(""));
    rec.I3 = r.I3;
    rec.sample_failures = r.sample_failures;

    rec.psi_a = choose_a(0.0, k, config.R);
    try {
      const ZetaPair pair = make_zeta_pair(k, 0.0, Vec3{0.0, 0.0, 1.0}, rec.psi_a);
      const CGOSolution sol = build_cgo(q1, pair.zeta1);
      rec.psi_norm = sol.psi_h_s_norm;
      rec.psi_iterations = sol.iterations;
      rec.psi_decay = q1.is_zero() ? 0.0 : rec.psi_a * sol.psi_h_s_norm / q1.h_s_norm();
    } catch (const NoContraction&) {
      rec.psi_norm = std::nan("");
      rec.psi_decay = std::nan("");
      rec.psi_iterations = -1;
    }
  } catch (const LabError& e) {
    rec.status = error_tag(e);
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

struct Progress {
  std::filesystem::path path;
  std::map<std::pair<double, double>, StabilityRecord> done;
};

Progress load_progress(const std::filesystem::path& dir, const std::string& hash) {
  Progress p{dir / "progress.csv", {}};
  std::ifstream in(p.path);
  if (!in) return p;
  std::string line;
  if (!std::getline(in, line) || line != "# config_hash " + hash) return p;
  if (!std::getline(in, line) || line != header_line()) return p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (in.eof()) break;  // no trailing newline: a torn final line from an interrupted run
    const auto cut = line.rfind(',');
    try {
      StabilityRecord r = parse_row(line.substr(0, cut));
      r.wall_time = parse_number(line.substr(cut + 1));
      p.done[{r.k, r.noise}] = r;
    } catch (const IoError&) {
      break;
    }
  }
  return p;
}

// ---- SVG helpers -----------------------------------------------------------

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2a9d8f", "#e9a03b", "#6a4c93", "#3d405b", "#8ab17d", "#c44536"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0.0)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) lo = hi = 1.0;
  if (log) {
    ax.lo = std::pow(10.0, std::floor(std::log10(lo)));
    ax.hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (ax.hi <= ax.lo) ax.hi = ax.lo * 10.0;
  } else {
    const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5;
    ax.lo = lo - pad;
    ax.hi = hi + pad;
  }
  return ax;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

void write_svg(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const Axis& x, const Axis& y, const std::vector<Series>& series) {
  const double W = 640, H = 440, left = 80, right = 150, top = 40, bottom = 60;
  const double x0 = left, x1 = W - right, y0 = H - bottom, y1 = top;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [](const Axis& ax) {
    std::vector<double> t;
    if (ax.log) {
      for (double e = std::log10(ax.lo); e <= std::log10(ax.hi) + 1e-9; e += 1.0) t.push_back(std::pow(10.0, e));
    } else {
      const double span = ax.hi - ax.lo;
      const double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
      const double unit = span / step > 25 ? 5 * step : span / step > 10 ? 2 * step : step;
      for (double v = std::ceil(ax.lo / unit) * unit; v <= ax.hi + 1e-12; v += unit) t.push_back(v);
    }
    return t;
  };
  auto label = [](double v, bool log) {
    char buf[32];
    if (log) {
      std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(std::log10(v))));
    } else {
      std::snprintf(buf, sizeof buf, "%g", v);
    }
    return std::string(buf);
  };
  for (double t : ticks(x)) {
    const double px = x.map(t, x0, x1);
    os << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\"" << y1
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << label(t, x.log) << "</text>\n";
  }
  for (double t : ticks(y)) {
    const double py = y.map(t, y0, y1);
    os << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\"" << x1 << "\" y2=\"" << py
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << label(t, y.log) << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [vx, vy] : series[i].points) {
      if (!std::isfinite(vx) || !std::isfinite(vy) || (x.log && vx <= 0) || (y.log && vy <= 0)) continue;
      const double px = x.map(vx, x0, x1), py = y.map(vy, y0, y1);
      pts += format_double(px) + "," + format_double(py) + " ";
      os << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    if (!pts.empty())
      os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = y1 + 16 + 18 * static_cast<double>(i);
    os << "<line x1=\"" << x1 + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << x1 + 32 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << x1 + 38 << "\" y=\"" << ly << "\">" << series[i].label << "</text>\n";
  }
  os << "</svg>\n";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << os.str();
  if (!out) throw IoError("failed to write " + path.string());
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeFit fit;
  fit.points = x.size();
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

bool usable(const StabilityRecord& r) {
  return r.status == "ok" && r.noise > 0.0 && r.error_h_minus_s > 0.0 && std::isfinite(r.error_h_minus_s);
}

}  // namespace

ReconstructOptions reconstruct_options(const SweepConfig& config, std::uint64_t seed) {
  ReconstructOptions o;
  o.degree_cap = config.degree_cap;
  o.radial_count = config.radial_count;
  o.sphere_design = config.sphere_design;
  o.seed = seed;
  o.noise_model = config.noise_model;
  o.selector = config.selector;
  o.t_max = config.t_max;
  o.c_emp = config.c_emp;
  o.forward.scheme = config.scheme;
  return o;
}

void validate(const SweepConfig& c) {
  if (!(c.s > 1.5)) throw ConfigError("s must exceed 3/2");
  if (c.k_list.empty()) throw ConfigError("k_list is empty");
  if (c.noise_list.empty()) throw ConfigError("noise_list is empty");
  for (double k : c.k_list)
    if (!(k >= 1.0)) throw ConfigError("every k must be at least 1, got " + format_double(k));
  for (double e : c.noise_list)
    if (!(e >= 0.0) || e > std::exp(-1.0)) throw ConfigError("noise levels must be 0 or lie in (0, 1/e]");
  if (!(c.R > 0.0) || !(c.p > 0.0)) throw ConfigError("R and p must be positive");
  if (c.points < 8 || c.points % 2 != 0 || !(c.extent > 0.0)) throw ConfigError("grid needs an even N >= 8 and L > 0");
  if (c.radial_count < 4) throw ConfigError("radial_count must be at least 4");
  if (c.degree_cap < 1 || c.degree_cap >= c.points) throw ConfigError("degree_cap must lie in [1, N-1]");
  if (c.workers < 1) throw ConfigError("workers must be positive");
  if (make_sphere_design(c.sphere_design).directions.size() < 6) throw ConfigError("sphere design has fewer than 6 directions");
  if (c.t_max && !(*c.t_max > 0.0)) throw ConfigError("t_max must be positive");
  std::set<double> ks(c.k_list.begin(), c.k_list.end()), es(c.noise_list.begin(), c.noise_list.end());
  if (ks.size() != c.k_list.size() || es.size() != c.noise_list.size()) throw ConfigError("duplicate k or noise entries");
}

SweepConfig parse_sweep_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config must be a key-value map");
  SweepConfig c;
  if (const auto g = root["grid"]) {
    c.extent = scalar<double>(g, "extent", c.extent);
    c.points = scalar<int>(g, "points", c.points);
  }
  if (const auto pots = root["potentials"]) {
    c.q1 = parse_potential(pots["q1"], "q1");
    c.q2 = parse_potential(pots["q2"], "q2");
  }
  c.k_list = number_list(root, "k_list");
  c.noise_list = number_list(root, "noise_list");
  c.R = scalar<double>(root, "R", c.R);
  c.p = scalar<double>(root, "p", c.p);
  c.s = scalar<double>(root, "s", c.s);
  c.mode = parse_probe_mode(scalar<std::string>(root, "mode", to_string(c.mode)));
  if (const auto d = root["design"]) {
    c.sphere_design = scalar<std::string>(d, "sphere", c.sphere_design);
    c.radial_count = scalar<int>(d, "radial_count", c.radial_count);
  }
  if (const auto f = root["forward"]) {
    c.degree_cap = scalar<int>(f, "degree_cap", c.degree_cap);
    c.scheme = parse_scheme(scalar<std::string>(f, "scheme", scheme_name(c.scheme)));
  }
  c.noise_model = parse_noise_model(scalar<std::string>(root, "noise_model", noise_model_name(c.noise_model)));
  c.selector = parse_selector(scalar<std::string>(root, "cutoff_selector", selector_name(c.selector)));
  if (root["t_max"] && !root["t_max"].IsNull()) c.t_max = scalar<double>(root, "t_max", 0.0);
  c.c_emp = scalar<double>(root, "c_emp", c.c_emp);
  c.seed = scalar<std::uint64_t>(root, "seed", c.seed);
  c.output_dir = scalar<std::string>(root, "output_dir", c.output_dir);
  c.workers = scalar<int>(root, "workers", c.workers);
  validate(c);
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_config(buf.str());
}

std::uint64_t config_hash(const SweepConfig& c) {
  std::string text;
  text += "q1=" + canonical(c.q1) + ";q2=" + canonical(c.q2);
  text += ";L=" + format_double(c.extent) + ";N=" + std::to_string(c.points);
  text += ";k=" + canonical_list(c.k_list) + ";eps=" + canonical_list(c.noise_list);
  text += ";R=" + format_double(c.R) + ";p=" + format_double(c.p) + ";s=" + format_double(c.s);
  text += ";mode=" + to_string(c.mode) + ";design=" + c.sphere_design + ";radial=" + std::to_string(c.radial_count);
  text += ";cap=" + std::to_string(c.degree_cap) + ";scheme=" + scheme_name(c.scheme);
  text += ";noise_model=" + noise_model_name(c.noise_model) + ";selector=" + selector_name(c.selector);
  text += ";t_max=" + (c.t_max ? format_double(*c.t_max) : std::string("none"));
  text += ";c_emp=" + format_double(c.c_emp) + ";seed=" + std::to_string(c.seed);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t k_index, std::size_t noise_index) {
  // splitmix64 finaliser over the packed indices
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (1 + (static_cast<std::uint64_t>(k_index) << 32) + noise_index);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "k",  "noise", "dist_proxy", "A",  "regime", "T",     "error_h_minus_s", "torus_error", "signal_dist",
      "I1", "I2",    "I3",         "psi_a", "psi_norm", "psi_decay", "psi_iterations", "sample_failures", "status"};
  return cols;
}

void write_records_csv(const std::filesystem::path& path, const std::vector<StabilityRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << header_line() << '\n';
  for (const auto& r : records) out << record_row(r) << '\n';
  if (!out) throw IoError("failed to write " + path.string());
}

std::vector<StabilityRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header_line()) throw IoError(path.string() + " does not have the sweep header");
  std::vector<StabilityRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_row(line));
  return out;
}

SweepOutcome run_sweep(const SweepConfig& config, const std::function<void(const StabilityRecord&)>& on_record) {
  validate(config);
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const std::string hash = hash_hex(config_hash(config));
  Progress progress = load_progress(dir, hash);
  {
    // rewrite the progress file so it holds exactly the resumed cells
    std::ofstream out(progress.path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + progress.path.string());
    out << "# config_hash " << hash << '\n' << header_line() << '\n';
    for (const auto& [key, r] : progress.done) out << record_row(r) << ',' << format_double(r.wall_time) << '\n';
  }
  std::mutex mutex;
  std::ofstream log(progress.path, std::ios::binary | std::ios::app);

  const Grid grid = build_grid(config.extent, config.points);
  const Potential q1 = sample_potential(config.q1, grid, config.s);
  const Potential q2 = sample_potential(config.q2, grid, config.s);

  SweepOutcome outcome;
  std::vector<StabilityRecord> records(config.k_list.size() * config.noise_list.size());
  for (std::size_t ik = 0; ik < config.k_list.size(); ++ik) {
    const double k = config.k_list[ik];
    std::vector<std::size_t> pending;
    for (std::size_t ie = 0; ie < config.noise_list.size(); ++ie) {
      const auto it = progress.done.find({k, config.noise_list[ie]});
      if (it != progress.done.end()) {
        records[ik * config.noise_list.size() + ie] = it->second;
        ++outcome.resumed;
      } else {
        pending.push_back(ie);
      }
    }
    if (pending.empty()) continue;

    std::optional<DtNBundle> bundle;
    std::string bundle_error;
    if (config.mode == ProbeMode::boundary) {
      try {
        ReconstructOptions o = reconstruct_options(config, config.seed);
        o.workers = config.workers;
        bundle = boundary_data(q1, q2, k, o);
      } catch (const LabError& e) {
        bundle_error = error_tag(e);
      }
    }
    parallel_for(pending.size(), config.workers, [&](std::size_t j) {
      const std::size_t ie = pending[j];
      const double noise = config.noise_list[ie];
      StabilityRecord rec;
      if (!bundle_error.empty()) {
        rec.k = k;
        rec.noise = noise;
        rec.I2 = std::nan("");
        rec.status = bundle_error;
      } else {
        rec = run_cell(config, q1, q2, k, noise, cell_seed(config.seed, ik, ie), bundle ? &*bundle : nullptr);
      }
      std::lock_guard<std::mutex> lock(mutex);
      records[ik * config.noise_list.size() + ie] = rec;
      log << record_row(rec) << ',' << format_double(rec.wall_time) << '\n';
      log.flush();
      if (on_record) on_record(rec);
    });
  }

  for (const auto& r : records)
    if (r.status != "ok") ++outcome.failed;
  outcome.csv = dir / "sweep.csv";
  write_records_csv(outcome.csv, records);
  std::ofstream timings(dir / "timings.csv", std::ios::binary);
  timings << "k,noise,wall_time\n";
  for (const auto& r : records) timings << format_double(r.k) << ',' << format_double(r.noise) << ',' << format_double(r.wall_time) << '\n';
  outcome.records = std::move(records);
  return outcome;
}

FitReport fit_stability(const std::vector<StabilityRecord>& records, double s) {
  FitReport fit;
  fit.m = 2.0 * s - 3.0;
  std::map<double, std::map<double, double>> by_k;  // k -> noise -> error
  for (const auto& r : records)
    if (usable(r)) by_k[r.k][r.noise] = r.error_h_minus_s;
  std::vector<double> rich;
  for (const auto& [k, row] : by_k)
    if (row.size() >= 3) rich.push_back(k);
  if (rich.size() < 2) throw InsufficientData("fit needs at least three noise levels at two or more k values");

  {
    const double k = rich.back();
    std::vector<double> x, y;
    for (const auto& [eps, err] : by_k[k]) {
      x.push_back(std::log(eps));
      y.push_back(std::log(err));
    }
    fit.lipschitz = least_squares(x, y);
    fit.lipschitz.fixed = k;
    fit.lipschitz.conforming = fit.lipschitz.slope >= 0.5 && fit.lipschitz.slope <= 1.5;
  }
  {
    std::map<double, int> count;
    for (const auto& [k, row] : by_k)
      for (const auto& [eps, err] : row) ++count[eps];
    double eps = 0.0;
    for (const auto& [e, c] : count)
      if (c >= 2) {
        eps = e;
        break;
      }
    std::vector<double> x, y;
    std::vector<double> errs;
    for (const auto& [k, row] : by_k) {
      const auto it = row.find(eps);
      if (it == row.end()) continue;
      x.push_back(std::log(k + std::log(1.0 / eps)));
      y.push_back(std::log(it->second));
      errs.push_back(it->second);
    }
    fit.logarithmic = least_squares(x, y);
    fit.logarithmic.fixed = eps;
    fit.logarithmic.conforming = fit.logarithmic.slope <= -0.5 * fit.m && fit.logarithmic.slope >= -2.0 * fit.m;
    fit.k_monotone = std::adjacent_find(errs.begin(), errs.end(), std::less_equal<double>()) == errs.end();
  }
  fit.noise_log = fit_log_regime(records, rich.front(), s);
  for (const auto& r : records) {
    if (!usable(r) || !(r.dist_proxy > 0.0)) continue;
    const double model = std::pow(r.k, 4) * r.dist_proxy + std::pow(r.k + std::log(1.0 / r.dist_proxy), -fit.m);
    fit.c_emp = std::max(fit.c_emp, r.error_h_minus_s / model);
  }
  return fit;
}

SlopeFit fit_log_regime(const std::vector<StabilityRecord>& records, double k, double s) {
  const double m = 2.0 * s - 3.0;
  std::map<double, double> row;
  for (const auto& r : records)
    if (usable(r) && r.k == k) row[r.noise] = r.error_h_minus_s;
  if (row.size() < 3) throw InsufficientData("log-regime fit needs three noise levels at k = " + format_double(k));
  std::vector<double> x, y;
  for (const auto& [eps, err] : row) {
    x.push_back(std::log(k + std::log(1.0 / eps)));
    y.push_back(std::log(err));
  }
  SlopeFit fit = least_squares(x, y);
  fit.fixed = k;
  fit.conforming = fit.slope <= -0.5 * m && fit.slope >= -2.0 * m;
  return fit;
}

void write_fit_json(const std::filesystem::path& path, const FitReport& fit) {
  auto slope = [](const SlopeFit& f, const char* fixed_name) {
    nlohmann::ordered_json j;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["residual_rms"] = f.residual;
    j["points"] = f.points;
    j[fixed_name] = f.fixed;
    j["conforming"] = f.conforming;
    return j;
  };
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["m"] = fit.m;
  j["lipschitz"] = slope(fit.lipschitz, "k");
  j["logarithmic"] = slope(fit.logarithmic, "noise");
  j["noise_logarithmic"] = slope(fit.noise_log, "k");
  j["c_emp"] = fit.c_emp;
  j["k_monotone"] = fit.k_monotone;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed to write " + path.string());
}

ReportPaths render_report(const std::vector<StabilityRecord>& records, const std::optional<FitReport>& fit,
                          const std::filesystem::path& directory) {
  if (records.empty()) throw ConfigError("no records to report");
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  ReportPaths paths{directory / "records.csv", {}, directory / "error_vs_noise.svg", directory / "error_vs_k.svg"};
  write_records_csv(paths.csv, records);
  if (fit) {
    paths.fit = directory / "fit.json";
    write_fit_json(paths.fit, *fit);
  }

  std::map<double, Series> per_k, per_eps;
  std::vector<double> xs_eps, xs_k, ys;
  for (const auto& r : records) {
    if (r.status != "ok") continue;
    auto& sk = per_k[r.k];
    sk.label = "k = " + short_number(r.k);
    sk.points.emplace_back(r.noise, r.error_h_minus_s);
    auto& se = per_eps[r.noise];
    se.label = "eps = " + short_number(r.noise);
    se.points.emplace_back(r.k, r.error_h_minus_s);
    xs_eps.push_back(r.noise);
    xs_k.push_back(r.k);
    ys.push_back(r.error_h_minus_s);
  }
  std::vector<Series> a, b;
  for (auto& [k, s] : per_k) a.push_back(std::move(s));
  for (auto& [e, s] : per_eps) b.push_back(std::move(s));
  const Axis yaxis = make_axis(ys, true);
  write_svg(paths.noise_plot, "H^-s error vs noise", "noise eps", "error", make_axis(xs_eps, true), yaxis, a);
  write_svg(paths.k_plot, "H^-s error vs wave number", "k", "error", make_axis(xs_k, false), yaxis, b);
  return paths;
}

}  // namespace cgolab
