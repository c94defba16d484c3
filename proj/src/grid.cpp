#include "cgolab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cgolab/binary_io.hpp"
#include "cgolab/errors.hpp"
#include "cgolab/fft.hpp"
#include "cgolab/kernels.hpp"

namespace cgolab {

double Grid::frequency_step() const { return std::numbers::pi / extent_; }

Grid build_grid(double extent, int n) {
  if (!(extent > 0.0) || !std::isfinite(extent)) throw ConfigError("grid extent must be positive");
  if (n < 8 || n % 2 != 0) throw ConfigError("points per axis must be even and at least 8, got " + std::to_string(n));
  return Grid(extent, n);
}

ScalarField::ScalarField(const Grid& grid, FieldKind kind) : grid_(grid), values_(grid.size()), kind_(kind) {}

ScalarField::ScalarField(const Grid& grid, std::vector<cplx> values, FieldKind kind)
    : grid_(grid), values_(std::move(values)), kind_(kind) {
  if (values_.size() != grid_.size()) throw ConfigError("field value count does not match grid");
}

double l2_norm(const ScalarField& field) {
  return std::sqrt(kernels::cnorm2(field.values()) * field.grid().cell_volume());
}

double max_abs(const ScalarField& field) {
  double m = 0.0;
  for (const cplx& v : field.values()) m = std::max(m, std::abs(v));
  return m;
}

cplx integrate(const ScalarField& field) {
  cplx total(0.0, 0.0);
  for (const cplx& v : field.values()) total += v;
  return total * field.grid().cell_volume();
}

bool Box::contains(const Vec3& x) const {
  for (int d = 0; d < 3; ++d)
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  return true;
}

bool Box::empty() const {
  for (int d = 0; d < 3; ++d)
    if (!(hi[d] > lo[d])) return true;
  return false;
}

Box Box::bounding(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Box out;
  for (int d = 0; d < 3; ++d) {
    out.lo[d] = std::min(a.lo[d], b.lo[d]);
    out.hi[d] = std::max(a.hi[d], b.hi[d]);
  }
  return out;
}

bool PotentialDescriptor::is_zero() const {
  return std::all_of(bumps.begin(), bumps.end(), [](const GaussianBump& b) { return b.amplitude == 0.0; });
}

std::string PotentialDescriptor::id() const {
  if (is_zero()) return "zero";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    const auto& b = bumps[i];
    if (i > 0) os << '+';
    os << "gauss(" << b.center[0] << ',' << b.center[1] << ',' << b.center[2] << ";w=" << b.width
       << ";A=" << b.amplitude << ')';
  }
  return os.str();
}

double bump_support_radius(double width) { return 3.0 * width; }

double smooth_cutoff(double t) {
  constexpr double inner = 0.6;
  if (t <= inner) return 1.0;
  if (t >= 1.0) return 0.0;
  const double u = (t - inner) / (1.0 - inner);
  const double a = std::exp(-1.0 / (1.0 - u));
  const double b = std::exp(-1.0 / u);
  return a / (a + b);
}

Potential::Potential(ScalarField field, double s, const Box& support, std::string id)
    : field_(std::move(field)), s_(s), h_s_norm_(0.0), support_(support), id_(std::move(id)) {
  const Grid& g = field_.grid();
  const double L = g.extent();
  if (!support_.empty()) {
    for (int d = 0; d < 3; ++d) {
      if (!(support_.lo[d] > -L && support_.hi[d] < L)) {
        throw ConfigError("potential support box must lie strictly inside the grid cube");
      }
    }
  }
  const int n = g.points_per_axis();
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const cplx v = field_(i, j, l);
        if (v.imag() != 0.0) throw ConfigError("potential must be real-valued");
        if (v.real() != 0.0 && (support_.empty() || !support_.contains(g.position(i, j, l)))) {
          throw ConfigError("potential is nonzero outside its support box");
        }
      }
  field_ = field_.with_kind(FieldKind::interior);
  h_s_norm_ = sobolev_norm(field_, s_);
}

double Potential::max_abs() const { return cgolab::max_abs(field_); }

Potential sample_potential(const PotentialDescriptor& descriptor, const Grid& grid, double s) {
  const double L = grid.extent();
  Box support;
  for (const auto& bump : descriptor.bumps) {
    if (!(bump.width > 0.0)) throw ConfigError("gaussian width must be positive");
    if (bump.amplitude == 0.0) continue;
    const double rho = bump_support_radius(bump.width);
    Box ball;
    for (int d = 0; d < 3; ++d) {
      ball.lo[d] = bump.center[d] - rho;
      ball.hi[d] = bump.center[d] + rho;
      if (!(ball.lo[d] > -L && ball.hi[d] < L)) {
        throw ConfigError("gaussian bump cutoff support leaves the grid cube");
      }
    }
    support = Box::bounding(support, ball);
  }
  auto field = ScalarField::sample(
      grid,
      [&](const Vec3& x) {
        double q = 0.0;
        for (const auto& bump : descriptor.bumps) {
          if (bump.amplitude == 0.0) continue;
          const Vec3 d = x - bump.center;
          const double r2 = dot(d, d);
          const double rho = bump_support_radius(bump.width);
          const double chi = smooth_cutoff(std::sqrt(r2) / rho);
          if (chi == 0.0) continue;
          q += bump.amplitude * std::exp(-r2 / (2.0 * bump.width * bump.width)) * chi;
        }
        return cplx(q, 0.0);
      },
      FieldKind::interior);
  return Potential(std::move(field), s, support, descriptor.id());
}

Potential potential_difference(const Potential& q1, const Potential& q2) {
  if (!(q1.grid() == q2.grid())) throw ConfigError("potentials live on different grids");
  std::vector<cplx> values(q1.field().values().begin(), q1.field().values().end());
  const auto other = q2.field().values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other[i];
  return Potential(ScalarField(q1.grid(), std::move(values), FieldKind::interior), q1.s(),
                   Box::bounding(q1.support_box(), q2.support_box()), "(" + q1.id() + ")-(" + q2.id() + ")");
}

double sobolev_norm(const ScalarField& field, double s) {
  if (s < 0.0 && field.kind() != FieldKind::interior) {
    throw ConfigError("negative-order Sobolev norm needs a compactly supported (interior) field");
  }
  const Grid& g = field.grid();
  const int n = g.points_per_axis();
  std::vector<cplx> work(field.values().begin(), field.values().end());
  fft::forward_3d(work, n);
  const double scale = g.cell_volume() / std::pow(g.period(), 1.5);
  const double step = g.frequency_step();
  double total = 0.0;
  for (int l = 0; l < n; ++l) {
    const double mz = step * g.frequency_index(l);
    for (int j = 0; j < n; ++j) {
      const double my = step * g.frequency_index(j);
      for (int i = 0; i < n; ++i) {
        const double mx = step * g.frequency_index(i);
        const double weight = std::pow(1.0 + mx * mx + my * my + mz * mz, s);
        total += weight * std::norm(work[g.index(i, j, l)]);
      }
    }
  }
  return std::sqrt(total) * scale;
}

int face_normal_axis(Face face) { return static_cast<int>(face) / 2; }
double face_normal_sign(Face face) { return static_cast<int>(face) % 2 == 0 ? -1.0 : 1.0; }

std::array<int, 2> face_tangent_axes(Face face) {
  switch (face_normal_axis(face)) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

BoundaryField::BoundaryField(const Grid& grid) : grid_(grid) {
  const std::size_t per_face = static_cast<std::size_t>(grid.points_per_axis()) * grid.points_per_axis();
  for (auto& f : faces_) f.assign(per_face, cplx(0.0, 0.0));
}

Vec3 BoundaryField::position(Face f, int u, int v) const {
  Vec3 x{};
  const auto t = face_tangent_axes(f);
  x[face_normal_axis(f)] = face_normal_sign(f) * grid_.extent();
  x[t[0]] = grid_.coordinate(u);
  x[t[1]] = grid_.coordinate(v);
  return x;
}

cplx BoundaryField::pairing(const BoundaryField& other) const {
  if (!(grid_ == other.grid_)) throw ConfigError("boundary fields live on different grids");
  cplx total(0.0, 0.0);
  for (int f = 0; f < 6; ++f) total += kernels::cdotu(faces_[f], other.faces_[f]);
  return total * grid_.spacing() * grid_.spacing();
}

double BoundaryField::l2_norm() const {
  double total = 0.0;
  for (const auto& f : faces_) total += kernels::cnorm2(f);
  return std::sqrt(total) * grid_.spacing();
}

std::vector<double> face_stencil_weights(int count, int derivative_order) {
  if (count < 2 || derivative_order < 0 || derivative_order > 1) throw ConfigError("bad stencil request");
  std::vector<double> nodes(count);
  for (int k = 0; k < count; ++k) nodes[k] = k + 0.5;
  std::vector<double> w(count, 0.0);
  for (int k = 0; k < count; ++k) {
    double denom = 1.0;
    for (int m = 0; m < count; ++m)
      if (m != k) denom *= nodes[k] - nodes[m];
    if (derivative_order == 0) {
      double num = 1.0;
      for (int m = 0; m < count; ++m)
        if (m != k) num *= -nodes[m];
      w[k] = num / denom;
    } else {
      // d/dt prod_{m != k} (t - t_m) at t = 0
      double num = 0.0;
      for (int skip = 0; skip < count; ++skip) {
        if (skip == k) continue;
        double term = 1.0;
        for (int m = 0; m < count; ++m)
          if (m != k && m != skip) term *= -nodes[m];
        num += term;
      }
      w[k] = num / denom;
    }
  }
  return w;
}

namespace {

// Cell index along the normal of the k-th cell inward from the face.
int inward_cell(Face face, int k, int n) { return face_normal_sign(face) < 0 ? k : n - 1 - k; }

cplx field_at_face_offset(const ScalarField& field, Face face, int u, int v, int k) {
  const int n = field.grid().points_per_axis();
  std::array<int, 3> idx{};
  const auto t = face_tangent_axes(face);
  idx[face_normal_axis(face)] = inward_cell(face, k, n);
  idx[t[0]] = u;
  idx[t[1]] = v;
  return field(idx[0], idx[1], idx[2]);
}

BoundaryField apply_face_stencil(const ScalarField& field, const std::vector<double>& w, double scale) {
  BoundaryField out(field.grid());
  const int n = field.grid().points_per_axis();
  for (Face face : kAllFaces)
    for (int v = 0; v < n; ++v)
      for (int u = 0; u < n; ++u) {
        cplx acc(0.0, 0.0);
        for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * field_at_face_offset(field, face, u, v, static_cast<int>(k));
        out.at(face, u, v) = scale * acc;
      }
  return out;
}

}  // namespace

BoundaryField boundary_trace(const ScalarField& field) {
  static const std::vector<double> weights = face_stencil_weights(4, 0);
  return apply_face_stencil(field, weights, 1.0);
}

BoundaryField normal_derivative(const ScalarField& field, StencilOrder order) {
  static const std::vector<double> fourth = face_stencil_weights(5, 1);
  static const std::vector<double> second = face_stencil_weights(3, 1);
  // stencil gives the inward derivative; outward is its negative
  return apply_face_stencil(field, order == StencilOrder::fourth ? fourth : second, -1.0 / field.grid().spacing());
}

namespace {

double dct_factor(int m, int n) {
  return m == 0 ? std::sqrt(1.0 / (4.0 * n)) : std::sqrt(1.0 / (2.0 * n));
}

}  // namespace

std::vector<cplx> face_cosine_coefficients(const BoundaryField& field, Face face) {
  const int n = field.face_size();
  std::vector<cplx> c(field.face(face).begin(), field.face(face).end());
  fft::dct2_2d(c, n);
  const double h = field.grid().spacing();
  for (int q = 0; q < n; ++q)
    for (int m = 0; m < n; ++m) c[m + n * q] *= h * dct_factor(m, n) * dct_factor(q, n);
  return c;
}

void set_face_from_cosine_coefficients(BoundaryField& field, Face face, std::span<const cplx> coeffs) {
  const int n = field.face_size();
  if (coeffs.size() != static_cast<std::size_t>(n) * n) throw ConfigError("face coefficient block has the wrong size");
  std::vector<cplx> x(coeffs.begin(), coeffs.end());
  const double h = field.grid().spacing();
  // x_j = sum_m c_m phi_m(j) / h with phi_0 = s_0, phi_m = s_m cos(..) and DCT-III's doubling
  for (int q = 0; q < n; ++q)
    for (int m = 0; m < n; ++m) {
      const double fm = m == 0 ? std::sqrt(1.0 / n) : 0.5 * std::sqrt(2.0 / n);
      const double fq = q == 0 ? std::sqrt(1.0 / n) : 0.5 * std::sqrt(2.0 / n);
      x[m + n * q] *= fm * fq / h;
    }
  fft::dct3_2d(x, n);
  auto dst = field.mutable_face(face);
  std::copy(x.begin(), x.end(), dst.begin());
}

double face_mode_wavenumber(const Grid& grid, int m, int n) {
  return std::numbers::pi / (2.0 * grid.extent()) * std::sqrt(static_cast<double>(m) * m + static_cast<double>(n) * n);
}

double boundary_sobolev_norm(const BoundaryField& field, double order) {
  const int n = field.face_size();
  double total = 0.0;
  for (Face face : kAllFaces) {
    const auto c = face_cosine_coefficients(field, face);
    for (int q = 0; q < n; ++q)
      for (int m = 0; m < n; ++m) {
        const double kappa = face_mode_wavenumber(field.grid(), m, q);
        total += std::pow(1.0 + kappa * kappa, order) * std::norm(c[m + n * q]);
      }
  }
  return std::sqrt(total);
}

void write_field(std::ostream& out, const ScalarField& field) {
  io::write_magic(out, "CGOLAB01");
  io::write_le<double>(out, field.grid().extent());
  io::write_le<std::int32_t>(out, field.grid().points_per_axis());
  for (const cplx& v : field.values()) io::write_complex(out, v);
}

ScalarField read_field(std::istream& in, FieldKind kind) {
  io::expect_magic(in, "CGOLAB01");
  const double extent = io::read_le<double>(in);
  const int n = io::read_le<std::int32_t>(in);
  const Grid grid = build_grid(extent, n);
  std::vector<cplx> values(grid.size());
  for (auto& v : values) v = io::read_complex(in);
  return ScalarField(grid, std::move(values), kind);
}

void write_field_file(const std::string& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  write_field(out, field);
}

ScalarField read_field_file(const std::string& path, FieldKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_field(in, kind);
}

}  // namespace cgolab
