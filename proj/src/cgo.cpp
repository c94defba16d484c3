#include "cgolab/cgo.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "cgolab/binary_io.hpp"
#include "cgolab/errors.hpp"
#include "cgolab/fft.hpp"
#include "cgolab/kernels.hpp"

namespace cgolab {

cplx ZetaVector::self_dot() const {
  return {cgolab::dot(eta, eta) - cgolab::dot(xi, xi), 2.0 * cgolab::dot(eta, xi)};
}

cplx ZetaVector::dot(const Vec3& x) const { return {cgolab::dot(eta, x), cgolab::dot(xi, x)}; }

std::array<Vec3, 2> orthonormal_frame(const Vec3& omega, std::optional<Vec3> seed) {
  Vec3 perp{};
  bool have = false;
  if (seed) {
    const Vec3 candidate = *seed - cgolab::dot(*seed, omega) * omega;
    if (norm(candidate) > 1e-8 * norm(*seed)) {
      perp = normalized(candidate);
      have = true;
    }
  }
  if (!have) {
    int axis = 0;
    for (int d = 1; d < 3; ++d)
      if (std::abs(omega[d]) < std::abs(omega[axis])) axis = d;
    Vec3 e{0.0, 0.0, 0.0};
    e[axis] = 1.0;
    perp = normalized(e - omega[axis] * omega);
  }
  return {perp, cross(omega, perp)};
}

ZetaPair make_zeta_pair(double k, double r, const Vec3& omega, double a, std::optional<Vec3> frame_seed) {
  if (!(k >= 1.0)) throw ConfigError("wave number must be at least 1");
  if (!(r >= 0.0)) throw ConfigError("probe radius must be non-negative");
  if (!(a > 0.0)) throw ConfigError("probe parameter a must be positive");
  if (std::abs(norm(omega) - 1.0) > 1e-12) throw ConfigError("omega must be a unit vector");
  const double disc = k * k + a * a - 0.25 * r * r;
  if (!(disc > 0.0)) throw InvalidFrequencyRange("k^2 + a^2 must exceed r^2/4");

  ZetaPair pair;
  pair.omega = omega;
  pair.frame = orthonormal_frame(omega, frame_seed);
  pair.r = r;
  pair.a = a;
  const auto& [perp, perp_tilde] = pair.frame;
  pair.zeta1.k = k;
  pair.zeta1.xi = a * perp;
  pair.zeta1.eta = (-0.5 * r) * omega + std::sqrt(disc) * perp_tilde;
  pair.zeta2.k = k;
  pair.zeta2.xi = -pair.zeta1.xi;
  pair.zeta2.eta = (-r) * omega - pair.zeta1.eta;
  return pair;
}

int faddeev_shift_axis(const Vec3& xi) {
  int dominant = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(xi[d]) > std::abs(xi[dominant])) dominant = d;
  const double top = std::abs(xi[dominant]);
  if (top == 0.0) return 0;
  for (int denom = 1; denom <= 64; ++denom) {
    std::array<long, 3> v{};
    bool integral = true;
    for (int d = 0; d < 3; ++d) {
      const double scaled = xi[d] / top * denom;
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > 1e-9 * denom) {
        integral = false;
        break;
      }
      v[d] = static_cast<long>(rounded);
    }
    if (!integral) continue;
    const long g = std::gcd(std::gcd(std::labs(v[0]), std::labs(v[1])), std::labs(v[2]));
    int best = -1;
    for (int d = 0; d < 3; ++d) {
      const long c = v[d] / g;
      if (c % 2 != 0 && (best < 0 || std::labs(c) > std::labs(v[best] / g))) best = d;
    }
    return best;
  }
  return dominant;
}

Vec3 faddeev_shift(const ZetaVector& zeta, const Grid& grid) {
  Vec3 tau{0.0, 0.0, 0.0};
  tau[faddeev_shift_axis(zeta.xi)] = 0.5 * grid.frequency_step();
  return tau;
}

namespace {

// Per-axis phases e^{sign i tau_d x_d}, expanded to the full grid.
std::vector<cplx> phase_table(const Grid& grid, const Vec3& tau, double sign) {
  const int n = grid.points_per_axis();
  std::array<std::vector<cplx>, 3> phase;
  for (int d = 0; d < 3; ++d) {
    phase[d].resize(n);
    for (int i = 0; i < n; ++i) phase[d][i] = std::polar(1.0, sign * tau[d] * grid.coordinate(i));
  }
  std::vector<cplx> out(grid.size());
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      const cplx pjl = phase[1][j] * phase[2][l];
      for (int i = 0; i < n; ++i) out[grid.index(i, j, l)] = phase[0][i] * pjl;
    }
  return out;
}

// Applies a function of the shifted frequency mu to every Fourier coefficient.
template <class F>
void for_each_shifted_mode(const Grid& grid, const Vec3& tau, F&& f) {
  const int n = grid.points_per_axis();
  const double step = grid.frequency_step();
  std::array<std::vector<double>, 3> mu;
  for (int d = 0; d < 3; ++d) {
    mu[d].resize(n);
    for (int b = 0; b < n; ++b) mu[d][b] = step * grid.frequency_index(b) + tau[d];
  }
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) f(grid.index(i, j, l), Vec3{mu[0][i], mu[1][j], mu[2][l]});
}

cplx faddeev_symbol(const ZetaVector& zeta, const Vec3& mu) {
  return -(cplx(dot(mu, mu), 0.0) + 2.0 * zeta.dot(mu));
}

double sobolev_weight(double mu2, double s) {
  if (s == std::round(s) && std::abs(s) <= 8.0) {
    const double base = s >= 0.0 ? 1.0 + mu2 : 1.0 / (1.0 + mu2);
    double w = 1.0;
    for (int i = 0; i < static_cast<int>(std::abs(s)); ++i) w *= base;
    return w;
  }
  return std::pow(1.0 + mu2, s);
}

// Diagonal operator in the shifted Fourier basis with precomputed tables.
class ShiftedMultiplier {
 public:
  ShiftedMultiplier(const ZetaVector& zeta, const Grid& grid, bool invert)
      : grid_(grid), down_(phase_table(grid, faddeev_shift(zeta, grid), -1.0)), multiplier_(grid.size()) {
    const Vec3 tau = faddeev_shift(zeta, grid);
    up_ = down_;
    for (cplx& v : up_) v = std::conj(v);
    const double floor = 1e-12 * (1.0 + norm(zeta.xi));
    const double inv_size = 1.0 / static_cast<double>(grid.size());
    for_each_shifted_mode(grid, tau, [&](std::size_t idx, const Vec3& mu) {
      const cplx sym = faddeev_symbol(zeta, mu);
      if (invert) {
        if (std::abs(sym) < floor) throw DegenerateSymbol("Faddeev symbol vanishes on the shifted lattice");
        multiplier_[idx] = inv_size / sym;
      } else {
        multiplier_[idx] = inv_size * sym;
      }
    });
  }

  void apply(std::span<cplx> data) const {
    const int n = grid_.points_per_axis();
    kernels::cmul(data, down_, data);
    fft::forward_3d(data, n);
    kernels::cmul(data, multiplier_, data);
    fft::backward_3d(data, n);
    kernels::cmul(data, up_, data);
  }

 private:
  Grid grid_;
  std::vector<cplx> down_;
  std::vector<cplx> up_;
  std::vector<cplx> multiplier_;
};

}  // namespace

ScalarField faddeev_invert(const ZetaVector& zeta, const ScalarField& rhs) {
  std::vector<cplx> work(rhs.values().begin(), rhs.values().end());
  ShiftedMultiplier(zeta, rhs.grid(), true).apply(work);
  return ScalarField(rhs.grid(), std::move(work), FieldKind::periodic);
}

ScalarField faddeev_apply(const ZetaVector& zeta, const ScalarField& w) {
  std::vector<cplx> work(w.values().begin(), w.values().end());
  ShiftedMultiplier(zeta, w.grid(), false).apply(work);
  return ScalarField(w.grid(), std::move(work), FieldKind::periodic);
}

double shifted_sobolev_norm(const ScalarField& field, const Vec3& shift, double s) {
  const Grid& grid = field.grid();
  std::vector<cplx> work(field.values().begin(), field.values().end());
  kernels::cmul(work, phase_table(grid, shift, -1.0), work);
  fft::forward_3d(work, grid.points_per_axis());
  double total = 0.0;
  for_each_shifted_mode(grid, shift, [&](std::size_t idx, const Vec3& mu) {
    total += sobolev_weight(dot(mu, mu), s) * std::norm(work[idx]);
  });
  return std::sqrt(total) * grid.cell_volume() / std::pow(grid.period(), 1.5);
}

CGOSolution build_cgo(const Potential& q, const ZetaVector& zeta, double tol, int max_iter) {
  if (!(tol >= 1e-12)) throw ConfigError("CGO tolerance must be at least 1e-12");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");
  const Grid& grid = q.grid();
  const auto qv = q.field().values();
  const std::size_t size = grid.size();
  const double cell = grid.cell_volume();

  CGOSolution sol{zeta, ScalarField(grid, FieldKind::periodic)};
  sol.lattice_shift = faddeev_shift(zeta, grid);
  if (q.is_zero()) {
    // q (1 + 0) = 0, so the first step already returns psi = 0.
    sol.iterations = 1;
    return sol;
  }
  const ShiftedMultiplier green(zeta, grid, true);

  std::vector<cplx> psi(size, cplx(0.0, 0.0));
  std::vector<cplx> next(size);
  double previous = std::numeric_limits<double>::quiet_NaN();
  bool contracted = false;
  int strikes = 0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < size; ++i) next[i] = -qv[i] * (1.0 + psi[i]);
    green.apply(next);
    double diff = 0.0;
    for (std::size_t i = 0; i < size; ++i) diff += std::norm(next[i] - psi[i]);
    diff = std::sqrt(diff * cell);
    psi.swap(next);

    if (diff <= tol) {
      sol.psi = ScalarField(grid, std::move(psi), FieldKind::periodic);
      sol.residual = diff;
      sol.iterations = it;
      sol.psi_h_s_norm = shifted_sobolev_norm(sol.psi, sol.lattice_shift, q.s());
      return sol;
    }
    if (!std::isfinite(diff)) throw NoContraction("CGO fixed point diverged");
    if (std::isfinite(previous) && previous > 0.0) {
      const double ratio = diff / previous;
      if (ratio > 0.9) {
        if (++strikes >= 5) throw NoContraction("CGO fixed point is not contracting; |xi| too small for ||q||");
      } else {
        strikes = 0;
        contracted = true;
      }
      if (contracted && ratio > 1.0) sol.monotone = false;
    }
    previous = diff;
  }
  throw NoContraction("CGO fixed point did not reach tolerance within max_iter");
}

ScalarField cgo_field(const CGOSolution& sol, const Grid& grid) {
  if (!(grid == sol.psi.grid())) throw ConfigError("CGO solution lives on a different grid");
  const auto psi = sol.psi.values();
  const int n = grid.points_per_axis();
  std::array<std::vector<cplx>, 3> phase;
  for (int d = 0; d < 3; ++d) {
    phase[d].resize(n);
    for (int i = 0; i < n; ++i) {
      const double x = grid.coordinate(i);
      phase[d][i] = std::exp(cplx(-sol.zeta.xi[d] * x, sol.zeta.eta[d] * x));
    }
  }
  std::vector<cplx> out(grid.size());
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      const cplx pjl = phase[1][j] * phase[2][l];
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = grid.index(i, j, l);
        out[idx] = phase[0][i] * pjl * (1.0 + psi[idx]);
      }
    }
  return ScalarField(grid, std::move(out), FieldKind::periodic);
}

BoundaryField cgo_trace(const CGOSolution& sol) {
  const Grid& grid = sol.psi.grid();
  std::vector<cplx> one_plus(sol.psi.values().begin(), sol.psi.values().end());
  for (cplx& v : one_plus) v += 1.0;
  BoundaryField out = boundary_trace(ScalarField(grid, std::move(one_plus), FieldKind::periodic));
  const int n = grid.points_per_axis();
  for (Face face : kAllFaces)
    for (int v = 0; v < n; ++v)
      for (int u = 0; u < n; ++u) out.at(face, u, v) *= std::exp(cplx(0.0, 1.0) * sol.zeta.dot(out.position(face, u, v)));
  return out;
}

double estimate_cstar(const Potential& q, double k, const CstarOptions& options) {
  if (q.is_zero()) return 0.0;
  if (!(options.a_min > 0.0) || !(options.a_max > options.a_min)) throw ConfigError("bad a range for C* bisection");
  const Vec3 e1{1.0, 0.0, 0.0};
  auto contracts = [&](double a) {
    try {
      build_cgo(q, make_zeta_pair(k, 0.0, e1, a).zeta1, options.tol, options.max_iter);
      return true;
    } catch (const NoContraction&) {
      return false;
    }
  };
  if (!contracts(options.a_max)) return std::numeric_limits<double>::infinity();
  if (contracts(options.a_min)) return options.a_min / q.h_s_norm();
  double lo = std::log(options.a_min);
  double hi = std::log(options.a_max);
  for (int step = 0; step < options.bisection_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    (contracts(std::exp(mid)) ? hi : lo) = mid;
  }
  return std::exp(hi) / q.h_s_norm();
}

void write_cgo_solution(std::ostream& out, const CGOSolution& sol) {
  io::write_magic(out, "CGOSOL01");
  for (double v : sol.zeta.eta) io::write_le<double>(out, v);
  for (double v : sol.zeta.xi) io::write_le<double>(out, v);
  io::write_le<double>(out, sol.zeta.k);
  io::write_le<double>(out, sol.residual);
  io::write_le<double>(out, static_cast<double>(sol.iterations));
  write_field(out, sol.psi);
}

CGOSolution read_cgo_solution(std::istream& in, double s) {
  io::expect_magic(in, "CGOSOL01");
  ZetaVector zeta;
  for (double& v : zeta.eta) v = io::read_le<double>(in);
  for (double& v : zeta.xi) v = io::read_le<double>(in);
  zeta.k = io::read_le<double>(in);
  const double residual = io::read_le<double>(in);
  const int iterations = static_cast<int>(io::read_le<double>(in));
  ScalarField psi = read_field(in, FieldKind::periodic);
  CGOSolution sol{zeta, psi};
  sol.residual = residual;
  sol.iterations = iterations;
  sol.lattice_shift = faddeev_shift(zeta, psi.grid());
  sol.psi_h_s_norm = shifted_sobolev_norm(sol.psi, sol.lattice_shift, s);
  return sol;
}

}  // namespace cgolab
