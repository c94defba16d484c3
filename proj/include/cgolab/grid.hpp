#pragma once

// Uniform cell-centred grids on the cube [-L, L]^3, complex fields on them,
// compactly supported potentials, spectral Sobolev norms and cube-boundary
// traces.
//
// Conventions fixed across the library:
//   * node i along an axis sits at x_i = -L + (i + 1/2) h, h = 2L/N;
//   * field storage is x-fastest: index = i + N*(j + N*l);
//   * spectral operations use the torus of period 2L, frequencies
//     mu = (pi/L) n with n in [-N/2, N/2);
//   * boundary fields are sampled at face centres, N x N per face.

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cgolab/vec3.hpp"

namespace cgolab {

using cplx = std::complex<double>;

class Grid {
 public:
  double extent() const { return extent_; }
  int points_per_axis() const { return n_; }
  double spacing() const { return spacing_; }
  double period() const { return 2.0 * extent_; }
  double cell_volume() const { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  double coordinate(int i) const { return -extent_ + (i + 0.5) * spacing_; }
  Vec3 position(int i, int j, int l) const { return {coordinate(i), coordinate(j), coordinate(l)}; }
  std::size_t index(int i, int j, int l) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * (j + static_cast<std::size_t>(n_) * l);
  }
  // Signed integer frequency for FFT bin b: b for b < N/2, b - N otherwise.
  int frequency_index(int bin) const { return bin < n_ / 2 ? bin : bin - n_; }
  double frequency_step() const;  // pi / L

  bool operator==(const Grid& other) const { return extent_ == other.extent_ && n_ == other.n_; }

 private:
  friend Grid build_grid(double extent, int n);
  Grid(double extent, int n) : extent_(extent), n_(n), spacing_(2.0 * extent / n) {}

  double extent_;
  int n_;
  double spacing_;
};

// Throws ConfigError unless n is even, n >= 8 and extent > 0.
Grid build_grid(double extent, int n);

enum class FieldKind { interior, periodic };

class ScalarField {
 public:
  ScalarField(const Grid& grid, FieldKind kind);
  ScalarField(const Grid& grid, std::vector<cplx> values, FieldKind kind);

  template <class F>
  static ScalarField sample(const Grid& grid, F&& f, FieldKind kind) {
    std::vector<cplx> values(grid.size());
    const int n = grid.points_per_axis();
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) values[grid.index(i, j, l)] = f(grid.position(i, j, l));
    return ScalarField(grid, std::move(values), kind);
  }

  const Grid& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> mutable_values() { return values_; }
  cplx operator()(int i, int j, int l) const { return values_[grid_.index(i, j, l)]; }

  ScalarField with_kind(FieldKind kind) const { return ScalarField(grid_, values_, kind); }

 private:
  Grid grid_;
  std::vector<cplx> values_;
  FieldKind kind_;
};

// Grid L2 norm (sum |v|^2 h^3)^{1/2}.
double l2_norm(const ScalarField& field);
double max_abs(const ScalarField& field);
// Midpoint-rule integral of the field.
cplx integrate(const ScalarField& field);

struct Box {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{0.0, 0.0, 0.0};

  bool contains(const Vec3& x) const;
  bool empty() const;
  static Box bounding(const Box& a, const Box& b);
};

struct GaussianBump {
  Vec3 center{0.0, 0.0, 0.0};
  double width = 0.3;
  double amplitude = 1.0;
};

// A compactly supported test potential: zero (no bumps), one gaussian, or a
// sum of gaussians. Each gaussian is multiplied by a smooth cutoff supported
// in the ball of radius bump_support_radius(width) about its centre.
struct PotentialDescriptor {
  std::vector<GaussianBump> bumps;

  static PotentialDescriptor zero() { return {}; }
  static PotentialDescriptor gaussian(const Vec3& center, double width, double amplitude) {
    return {{GaussianBump{center, width, amplitude}}};
  }
  bool is_zero() const;
  std::string id() const;
};

double bump_support_radius(double width);
// C-infinity cutoff: 1 on [0, 0.6], 0 on [1, inf).
double smooth_cutoff(double t);

class Potential {
 public:
  // Validates reality, vanishing outside the support box, and caches ||q||_{H^s}.
  Potential(ScalarField field, double s, const Box& support, std::string id = "custom");

  const ScalarField& field() const { return field_; }
  const Grid& grid() const { return field_.grid(); }
  double s() const { return s_; }
  double h_s_norm() const { return h_s_norm_; }
  const Box& support_box() const { return support_; }
  const std::string& id() const { return id_; }
  bool is_zero() const { return h_s_norm_ == 0.0; }
  double max_abs() const;

 private:
  ScalarField field_;
  double s_;
  double h_s_norm_;
  Box support_;
  std::string id_;
};

Potential sample_potential(const PotentialDescriptor& descriptor, const Grid& grid, double s);
// Zero extension of q1 - q2, supported on the union of both boxes.
Potential potential_difference(const Potential& q1, const Potential& q2);

// (sum_mu (1+|mu|^2)^s |q^(mu)|^2)^{1/2} on the torus lattice, with
// q^(mu) = (2L)^{-3/2} h^3 sum_x q(x) e^{-i mu.x}. Negative s requires an
// interior (compactly supported) field.
double sobolev_norm(const ScalarField& field, double s);

enum class Face : int { xmin = 0, xmax = 1, ymin = 2, ymax = 3, zmin = 4, zmax = 5 };
inline constexpr std::array<Face, 6> kAllFaces{Face::xmin, Face::xmax, Face::ymin,
                                               Face::ymax, Face::zmin, Face::zmax};

int face_normal_axis(Face face);
double face_normal_sign(Face face);
// In-face axes (u, v): x-faces (y, z), y-faces (x, z), z-faces (x, y).
std::array<int, 2> face_tangent_axes(Face face);

class BoundaryField {
 public:
  explicit BoundaryField(const Grid& grid);

  const Grid& grid() const { return grid_; }
  int face_size() const { return grid_.points_per_axis(); }
  std::span<const cplx> face(Face f) const { return faces_[static_cast<int>(f)]; }
  std::span<cplx> mutable_face(Face f) { return faces_[static_cast<int>(f)]; }
  cplx at(Face f, int u, int v) const { return faces_[static_cast<int>(f)][u + face_size() * v]; }
  cplx& at(Face f, int u, int v) { return faces_[static_cast<int>(f)][u + face_size() * v]; }
  // Physical location of face sample (u, v).
  Vec3 position(Face f, int u, int v) const;
  // Discrete L2(dOmega) pairing sum h^2 a b (bilinear, no conjugation).
  cplx pairing(const BoundaryField& other) const;
  double l2_norm() const;

  template <class F>
  static BoundaryField sample(const Grid& grid, F&& f) {
    BoundaryField out(grid);
    const int n = grid.points_per_axis();
    for (Face face : kAllFaces)
      for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) out.at(face, u, v) = f(out.position(face, u, v), face);
    return out;
  }

 private:
  Grid grid_;
  std::array<std::vector<cplx>, 6> faces_;
};

enum class StencilOrder { second, fourth };

// Cubic extrapolation of the cell-centred field onto the faces.
BoundaryField boundary_trace(const ScalarField& field);
// Outward normal derivative from one-sided stencils (5 cells for fourth order,
// 3 cells for second order).
BoundaryField normal_derivative(const ScalarField& field, StencilOrder order = StencilOrder::fourth);

// One-sided extrapolation weights onto the face from cell centres at distances
// (k + 1/2) h, k = 0..count-1: value (derivative_order 0) or inward derivative
// times h (derivative_order 1).
std::vector<double> face_stencil_weights(int count, int derivative_order);

// Orthonormal cosine (DCT-II) coefficients of one face, normalised so that
// sum |c|^2 = h^2 sum |f|^2. Coefficient (m, n) sits at index m + N*n and
// carries wavenumber (pi m / 2L, pi n / 2L).
std::vector<cplx> face_cosine_coefficients(const BoundaryField& field, Face face);
void set_face_from_cosine_coefficients(BoundaryField& field, Face face, std::span<const cplx> coeffs);
double face_mode_wavenumber(const Grid& grid, int m, int n);

// (sum_faces sum_modes (1 + kappa^2)^{order} |c|^2)^{1/2}, order = +1/2 or -1/2.
double boundary_sobolev_norm(const BoundaryField& field, double order);

// Binary field format: "CGOLAB01", extent (f64), N (i32), then N^3 complex
// values as (re, im) f64 pairs, little-endian, x-fastest.
void write_field(std::ostream& out, const ScalarField& field);
ScalarField read_field(std::istream& in, FieldKind kind = FieldKind::interior);
void write_field_file(const std::string& path, const ScalarField& field);
ScalarField read_field_file(const std::string& path, FieldKind kind = FieldKind::interior);

}  // namespace cgolab
