#include "cgolab/forward.hpp"

#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>

#include "cgolab/binary_io.hpp"
#include "cgolab/errors.hpp"
#include "cgolab/fft.hpp"
#include "cgolab/parallel.hpp"

namespace cgolab {
namespace {

// 1D eigenvalues of the cell-centred Dirichlet second difference, DST-II order.
// The odd reflection about the faces diagonalises both stencils.
std::vector<double> axis_eigenvalues(const Grid& grid, StencilOrder order) {
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  std::vector<double> lam(n);
  for (int m = 0; m < n; ++m) {
    const double s2 = std::pow(std::sin(std::numbers::pi * (m + 1) / (2.0 * n)), 2);
    lam[m] = -4.0 / (h * h) * (order == StencilOrder::fourth ? s2 + s2 * s2 / 3.0 : s2);
  }
  return lam;
}

// (Delta_h^D + shift)^{-1} by a 3D DST diagonalisation.
class FastDirichletSolver {
 public:
  FastDirichletSolver(const Grid& grid, double shift, StencilOrder order)
      : grid_(grid), lam_(axis_eigenvalues(grid, order)), shift_(shift) {}

  void apply(std::span<cplx> data) const {
    const int n = grid_.points_per_axis();
    fft::dst2_3d(data, n);
    const double scale = 1.0 / std::pow(2.0 * n, 3);
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) data[grid_.index(i, j, l)] *= scale / (lam_[i] + lam_[j] + lam_[l] + shift_);
    fft::dst3_3d(data, n);
  }

 private:
  Grid grid_;
  std::vector<double> lam_;
  double shift_;
};

// Smallest |k^2 - lambda| over the discrete Dirichlet spectrum, relative to k^2.
double relative_spectral_gap(const Grid& grid, double k2, StencilOrder order) {
  const auto lam = axis_eigenvalues(grid, order);
  const int n = grid.points_per_axis();
  double gap = std::numeric_limits<double>::infinity();
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      const double rest = k2 + lam[j] + lam[l];
      if (rest + lam[0] < -gap * k2) break;  // lam decreases with the index
      for (int i = 0; i < n; ++i) {
        const double v = rest + lam[i];
        gap = std::min(gap, std::abs(v) / k2);
        if (v < 0.0) break;
      }
    }
  return gap;
}

// Homogeneous Dirichlet 7-point Laplacian (ghost value -u_0).
void laplacian_second(const Grid& grid, std::span<const cplx> u, std::span<cplx> out) {
  const int n = grid.points_per_axis();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const std::size_t sx = 1, sy = n, sz = static_cast<std::size_t>(n) * n;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid.index(i, j, l);
        const cplx uc = u[c];
        cplx acc = -6.0 * uc;
        acc += i > 0 ? u[c - sx] : -uc;
        acc += i < n - 1 ? u[c + sx] : -uc;
        acc += j > 0 ? u[c - sy] : -uc;
        acc += j < n - 1 ? u[c + sy] : -uc;
        acc += l > 0 ? u[c - sz] : -uc;
        acc += l < n - 1 ? u[c + sz] : -uc;
        out[c] = acc * inv_h2;
      }
}

// Homogeneous Dirichlet 13-point fourth-order Laplacian; ghosts are the odd
// reflection of the interior about the face.
void laplacian_fourth(const Grid& grid, std::span<const cplx> u, std::span<cplx> out) {
  const int n = grid.points_per_axis();
  const double scale = 1.0 / (12.0 * grid.spacing() * grid.spacing());
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n), static_cast<std::size_t>(n) * n};
  auto value = [&](std::size_t base, int pos, std::size_t st) {
    if (pos < 0) return -u[base + static_cast<std::size_t>(-1 - pos) * st];
    if (pos >= n) return -u[base + static_cast<std::size_t>(2 * n - 1 - pos) * st];
    return u[base + static_cast<std::size_t>(pos) * st];
  };
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t c = grid.index(i, j, l);
        const int pos[3] = {i, j, l};
        cplx acc = -90.0 * u[c];
        for (int axis = 0; axis < 3; ++axis) {
          const std::size_t base = c - static_cast<std::size_t>(pos[axis]) * stride[axis];
          const int p = pos[axis];
          acc += 16.0 * (value(base, p - 1, stride[axis]) + value(base, p + 1, stride[axis]));
          acc -= value(base, p - 2, stride[axis]) + value(base, p + 2, stride[axis]);
        }
        out[c] = acc * scale;
      }
}

void laplacian_dirichlet(const Grid& grid, std::span<const cplx> u, std::span<cplx> out, StencilOrder order) {
  if (order == StencilOrder::fourth) {
    laplacian_fourth(grid, u, out);
  } else {
    laplacian_second(grid, u, out);
  }
}

std::size_t adjacent_cell(const Grid& grid, Face face, int u, int v) {
  const int n = grid.points_per_axis();
  std::array<int, 3> idx{};
  const auto t = face_tangent_axes(face);
  idx[face_normal_axis(face)] = face_normal_sign(face) < 0 ? 0 : n - 1;
  idx[t[0]] = u;
  idx[t[1]] = v;
  return grid.index(idx[0], idx[1], idx[2]);
}

std::size_t inner_cell(const Grid& grid, Face face, int u, int v) {
  const std::size_t c = adjacent_cell(grid, face, u, v);
  const int axis = face_normal_axis(face);
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? grid.points_per_axis() : grid.size() / grid.points_per_axis();
  return face_normal_sign(face) < 0 ? c + stride : c - stride;
}

// Face Laplacian: central second differences inside the face, one-sided
// four-point differences in the rows next to the face edges.
std::vector<cplx> tangential_laplacian(const BoundaryField& f, Face face) {
  const int n = f.grid().points_per_axis();
  const double inv_h2 = 1.0 / (f.grid().spacing() * f.grid().spacing());
  auto second = [&](auto&& at, int i) {
    if (i == 0) return 2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3);
    if (i == n - 1) return 2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4);
    return at(i - 1) - 2.0 * at(i) + at(i + 1);
  };
  std::vector<cplx> out(static_cast<std::size_t>(n) * n);
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) {
      const cplx duu = second([&](int i) { return f.at(face, i, v); }, u);
      const cplx dvv = second([&](int i) { return f.at(face, u, i); }, v);
      out[static_cast<std::size_t>(u) + static_cast<std::size_t>(n) * v] = (duu + dvv) * inv_h2;
    }
  return out;
}

// Boundary term B f of the Dirichlet problem: the part of the stencil that
// reaches the ghost values, written into `out` with the given sign.
//
// Fourth order uses the ghosts u(-h/2) = 2 f - u_0 + (h^2/4) s and
// u(-3h/2) = 2 f - u_1 + (9 h^2/4) s with s = u_nn = -(k^2 f + Delta_T f),
// valid where q vanishes at the boundary.
void add_boundary_source(const BoundaryField& f, double k, StencilOrder order, double sign, std::span<cplx> out) {
  const Grid& grid = f.grid();
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  if (order == StencilOrder::second) {
    const double scale = sign * 2.0 / (h * h);
    for (Face face : kAllFaces)
      for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) out[adjacent_cell(grid, face, u, v)] += scale * f.at(face, u, v);
    return;
  }
  const double scale = sign / (12.0 * h * h);
  for (Face face : kAllFaces) {
    const auto lap = tangential_laplacian(f, face);
    for (int v = 0; v < n; ++v)
      for (int u = 0; u < n; ++u) {
        const cplx fv = f.at(face, u, v);
        const cplx s = -(k * k * fv + lap[static_cast<std::size_t>(u) + static_cast<std::size_t>(n) * v]);
        out[adjacent_cell(grid, face, u, v)] += scale * (30.0 * fv + 1.75 * h * h * s);
        out[inner_cell(grid, face, u, v)] += scale * (-2.0 * fv - 0.25 * h * h * s);
      }
  }
}

}  // namespace
}  // namespace cgolab

// Matrix-free operator x -> x + P (delta + q) x for Eigen's GMRES.
namespace cgolab::detail {
class PreconditionedHelmholtz;
}

namespace Eigen::internal {
template <>
struct traits<cgolab::detail::PreconditionedHelmholtz>
    : public Eigen::internal::traits<Eigen::SparseMatrix<std::complex<double>>> {};
}  // namespace Eigen::internal

namespace cgolab::detail {

class PreconditionedHelmholtz : public Eigen::EigenBase<PreconditionedHelmholtz> {
 public:
  using Scalar = std::complex<double>;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  PreconditionedHelmholtz(const FastDirichletSolver& solver, std::span<const cplx> q, double delta)
      : solver_(solver), q_(q), delta_(delta) {}

  Eigen::Index rows() const { return static_cast<Eigen::Index>(q_.size()); }
  Eigen::Index cols() const { return rows(); }

  template <class Rhs>
  Eigen::Product<PreconditionedHelmholtz, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<PreconditionedHelmholtz, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    std::vector<cplx> work(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i) work[i] = (delta_ + q_[i]) * x[static_cast<Eigen::Index>(i)];
    solver_.apply(work);
    y = x;
    for (std::size_t i = 0; i < q_.size(); ++i) y[static_cast<Eigen::Index>(i)] += work[i];
  }

 private:
  const FastDirichletSolver& solver_;
  std::span<const cplx> q_;
  double delta_;
};

}  // namespace cgolab::detail

namespace Eigen::internal {
template <class Rhs>
struct generic_product_impl<cgolab::detail::PreconditionedHelmholtz, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<cgolab::detail::PreconditionedHelmholtz, Rhs,
                                generic_product_impl<cgolab::detail::PreconditionedHelmholtz, Rhs>> {
  using Scalar = typename Product<cgolab::detail::PreconditionedHelmholtz, Rhs>::Scalar;

  template <class Dest>
  static void scaleAndAddTo(Dest& dst, const cgolab::detail::PreconditionedHelmholtz& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    Eigen::VectorXcd x = rhs;
    Eigen::VectorXcd y;
    lhs.apply(x, y);
    dst += alpha * y;
  }
};
}  // namespace Eigen::internal

namespace cgolab {

ScalarField apply_helmholtz(const Potential& q, double k, const ScalarField& u, const BoundaryField& f,
                            StencilOrder order) {
  const Grid& grid = u.grid();
  if (!(grid == q.grid()) || !(grid == f.grid())) throw ConfigError("grid mismatch in apply_helmholtz");
  std::vector<cplx> out(grid.size());
  laplacian_dirichlet(grid, u.values(), out, order);
  const auto qv = q.field().values();
  const auto uv = u.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += (k * k + qv[i]) * uv[i];
  add_boundary_source(f, k, order, 1.0, out);
  return ScalarField(grid, std::move(out), FieldKind::interior);
}

std::vector<double> dirichlet_eigenvalues(const Grid& grid, double lo, double hi, StencilOrder order) {
  const auto lam = axis_eigenvalues(grid, order);
  const int n = grid.points_per_axis();
  std::vector<double> out;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double v = -(lam[i] + lam[j] + lam[l]);
        if (v > hi) break;
        if (v >= lo) out.push_back(v);
      }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(a); }),
            out.end());
  return out;
}

ScalarField solve_dirichlet(const Potential& q, double k, const BoundaryField& f, const ForwardOptions& options,
                            SolveReport* report) {
  const Grid& grid = q.grid();
  if (!(grid == f.grid())) throw ConfigError("Dirichlet data and potential live on different grids");
  if (!(k > 0.0)) throw ConfigError("wave number must be positive");
  const double k2 = k * k;

  std::vector<cplx> b(grid.size(), cplx(0.0, 0.0));
  add_boundary_source(f, k, options.scheme, -1.0, b);

  const auto gap = [&](double value) { return relative_spectral_gap(grid, value, options.scheme); };
  double shift = k2;
  if (gap(k2) < options.resonance_margin) {
    if (q.is_zero()) throw ResonantFrequency("k^2 is within the resonance margin of a discrete Dirichlet eigenvalue; perturb k by 0.5%");
    // The free operator is singular here but the perturbed one need not be:
    // precondition with a nearby regular shift instead.
    shift = k2 * (1.0 + 4.0 * options.resonance_margin);
    if (gap(shift) < options.resonance_margin) shift = k2 * (1.0 - 4.0 * options.resonance_margin);
  }
  const FastDirichletSolver solver(grid, shift, options.scheme);

  std::vector<cplx> u = b;
  solver.apply(u);
  SolveReport local;
  if (!q.is_zero() || shift != k2) {
    const detail::PreconditionedHelmholtz op(solver, q.field().values(), k2 - shift);
    Eigen::GMRES<detail::PreconditionedHelmholtz, Eigen::IdentityPreconditioner> gmres(op);
    gmres.setTolerance(options.tol);
    gmres.setMaxIterations(options.max_iter);
    gmres.set_restart(options.restart);
    const Eigen::Map<const Eigen::VectorXcd> pb(u.data(), static_cast<Eigen::Index>(u.size()));
    Eigen::VectorXcd x = gmres.solve(pb);
    if (gmres.info() != Eigen::Success || !x.allFinite()) {
      throw ResonantFrequency("GMRES stagnated; k^2 is likely near a Dirichlet eigenvalue of -Delta - q (perturb k by 0.5%)");
    }
    local.iterations = static_cast<int>(gmres.iterations());
    std::copy(x.data(), x.data() + x.size(), u.begin());
  }
  ScalarField result(grid, std::move(u), FieldKind::interior);
  const ScalarField residual = apply_helmholtz(q, k, result, f, options.scheme);
  double bnorm = 0.0;
  for (const cplx& v : b) bnorm += std::norm(v);
  const double rnorm = l2_norm(residual) / std::sqrt(grid.cell_volume());
  local.residual = bnorm > 0.0 ? rnorm / std::sqrt(bnorm) : rnorm;
  if (report != nullptr) *report = local;
  return result;
}

BoundaryField discrete_flux(const ScalarField& u, const BoundaryField& f, double k, StencilOrder order) {
  const Grid& grid = u.grid();
  if (!(grid == f.grid())) throw ConfigError("grid mismatch in discrete_flux");
  BoundaryField g(grid);
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  const auto uv = u.values();
  if (order == StencilOrder::second) {
    for (Face face : kAllFaces)
      for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w)
          g.at(face, w, v) = 2.0 / h * (f.at(face, w, v) - uv[adjacent_cell(grid, face, w, v)]);
    return g;
  }
  // g = C f - G(u), with G the face form of the boundary term and C the
  // symmetric part that makes g consistent with the outward derivative.
  BoundaryField inner(grid);
  for (Face face : kAllFaces)
    for (int v = 0; v < n; ++v)
      for (int w = 0; w < n; ++w) {
        const cplx u0 = uv[adjacent_cell(grid, face, w, v)];
        const cplx u1 = uv[inner_cell(grid, face, w, v)];
        inner.at(face, w, v) = 1.75 * u0 - 0.25 * u1 - 3.0 * f.at(face, w, v);
      }
  for (Face face : kAllFaces) {
    const auto lap = tangential_laplacian(inner, face);
    for (int v = 0; v < n; ++v)
      for (int w = 0; w < n; ++w) {
        const cplx u0 = uv[adjacent_cell(grid, face, w, v)];
        const cplx u1 = uv[inner_cell(grid, face, w, v)];
        const std::size_t at = static_cast<std::size_t>(w) + static_cast<std::size_t>(n) * v;
        const cplx s_inner = -(k * k * inner.at(face, w, v) + lap[at]);
        g.at(face, w, v) = (28.0 * f.at(face, w, v) - 30.0 * u0 + 2.0 * u1) / (12.0 * h) - h / 12.0 * s_inner;
      }
  }
  return g;
}

double cauchy_norm(const BoundaryField& f, const BoundaryField& g) {
  const double a = boundary_sobolev_norm(f, 0.5);
  const double b = boundary_sobolev_norm(g, -0.5);
  return std::sqrt(a * a + b * b);
}

CauchyPair cauchy_data(const ScalarField& u, double k, StencilOrder order) {
  CauchyPair pair{boundary_trace(u), normal_derivative(u, order), k};
  pair.norm_cache = cauchy_norm(pair.f, pair.g);
  return pair;
}

CauchyPair cauchy_data(const ScalarField& u, const BoundaryField& f, double k, StencilOrder order) {
  CauchyPair pair{f, discrete_flux(u, f, k, order), k};
  pair.norm_cache = cauchy_norm(pair.f, pair.g);
  return pair;
}

BoundaryBasis::BoundaryBasis(const Grid& grid, int degree_cap) : grid_(grid), degree_cap_(degree_cap) {
  if (degree_cap < 1 || degree_cap >= grid.points_per_axis()) {
    throw ConfigError("degree cap must lie in [1, N-1], got " + std::to_string(degree_cap));
  }
  for (Face face : kAllFaces)
    for (int n = 0; n <= degree_cap; ++n)
      for (int m = 0; m <= degree_cap; ++m) modes_.push_back({face, m, n, face_mode_wavenumber(grid, m, n)});
}

BoundaryField BoundaryBasis::element(std::size_t i) const {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(size()));
  c[static_cast<Eigen::Index>(i)] = 1.0;
  return synthesize(c);
}

Eigen::VectorXcd BoundaryBasis::project(const BoundaryField& field) const {
  if (!(field.grid() == grid_)) throw ConfigError("boundary field and basis live on different grids");
  const int n = grid_.points_per_axis();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(size()));
  Eigen::Index pos = 0;
  for (Face face : kAllFaces) {
    const auto c = face_cosine_coefficients(field, face);
    for (int q = 0; q <= degree_cap_; ++q)
      for (int m = 0; m <= degree_cap_; ++m) out[pos++] = c[m + n * q];
  }
  return out;
}

BoundaryField BoundaryBasis::synthesize(const Eigen::VectorXcd& coeffs) const {
  if (coeffs.size() != static_cast<Eigen::Index>(size())) throw ConfigError("coefficient vector has the wrong size");
  const int n = grid_.points_per_axis();
  BoundaryField out(grid_);
  Eigen::Index pos = 0;
  std::vector<cplx> block(static_cast<std::size_t>(n) * n);
  for (Face face : kAllFaces) {
    std::fill(block.begin(), block.end(), cplx(0.0, 0.0));
    for (int q = 0; q <= degree_cap_; ++q)
      for (int m = 0; m <= degree_cap_; ++m) block[m + n * q] = coeffs[pos++];
    set_face_from_cosine_coefficients(out, face, block);
  }
  return out;
}

Eigen::VectorXd BoundaryBasis::weights(double order) const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    w[static_cast<Eigen::Index>(i)] = std::pow(1.0 + modes_[i].kappa * modes_[i].kappa, 0.5 * order);
  }
  return w;
}

namespace {

Eigen::VectorXd mode_weights(const std::vector<BasisMode>& basis, double order) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) w[static_cast<Eigen::Index>(i)] = std::pow(1.0 + basis[i].kappa * basis[i].kappa, 0.5 * order);
  return w;
}

}  // namespace

Eigen::MatrixXcd DtNMatrix::weighted() const {
  const Eigen::VectorXd w = mode_weights(basis, -0.5);
  return w.asDiagonal() * entries * w.asDiagonal();
}

double DtNMatrix::weighted_norm() const { return spectral_norm(weighted()); }

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

DtNMatrix dtn_matrix(const Potential& q, double k, int degree_cap, const ForwardOptions& options) {
  const BoundaryBasis basis(q.grid(), degree_cap);
  DtNMatrix out;
  out.basis = basis.modes();
  out.k = k;
  out.degree_cap = degree_cap;
  out.q_id = q.id();
  const auto dim = static_cast<Eigen::Index>(basis.size());
  out.entries.resize(dim, dim);
  parallel_for(basis.size(), options.workers, [&](std::size_t j) {
    const BoundaryField f = basis.element(j);
    const ScalarField u = solve_dirichlet(q, k, f, options);
    out.entries.col(static_cast<Eigen::Index>(j)) = basis.project(discrete_flux(u, f, k, options.scheme));
  });
  return out;
}

DtNMatrix add_noise(const DtNMatrix& m, double epsilon, std::uint64_t seed, NoiseModel model) {
  if (!(epsilon >= 0.0)) throw ConfigError("noise level must be non-negative");
  DtNMatrix out = m;
  if (epsilon == 0.0) return out;
  const Eigen::Index dim = m.entries.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXcd weighted = m.weighted();
  Eigen::MatrixXcd noise(dim, dim);
  // column-major fill order is part of the reproducibility contract
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      noise(i, j) = cplx(re, im) * (model == NoiseModel::relative ? weighted(i, j) : cplx(1.0, 0.0));
    }
  const double target = epsilon * spectral_norm(weighted);
  const double current = spectral_norm(noise);
  if (current > 0.0) noise *= target / current;
  const Eigen::VectorXd w_plus = mode_weights(m.basis, 0.5);
  out.entries += w_plus.asDiagonal() * noise * w_plus.asDiagonal();
  return out;
}

double dtn_distance(const DtNMatrix& l1, const DtNMatrix& l2, const DtNMatrix& free_dtn) {
  if (l1.entries.rows() != l2.entries.rows() || l1.entries.rows() != free_dtn.entries.rows()) {
    throw ConfigError("DtN matrices have different dimensions");
  }
  const Eigen::VectorXd w = mode_weights(l1.basis, -0.5);
  const Eigen::MatrixXcd diff = w.asDiagonal() * (l1.entries - l2.entries) * w.asDiagonal();
  return spectral_norm(diff) / free_dtn.weighted_norm();
}

double cauchy_dist(const Potential& q1, const Potential& q2, double k, int degree_cap,
                   const std::optional<NoiseSpec>& noise, const ForwardOptions& options) {
  if (!(q1.grid() == q2.grid())) throw ConfigError("potentials live on different grids");
  const DtNMatrix l1 = dtn_matrix(q1, k, degree_cap, options);
  DtNMatrix l2 = dtn_matrix(q2, k, degree_cap, options);
  if (noise) l2 = add_noise(l2, noise->epsilon, noise->seed, noise->model);
  const Potential zero = sample_potential(PotentialDescriptor::zero(), q1.grid(), q1.s());
  const DtNMatrix l0 = dtn_matrix(zero, k, degree_cap, options);
  return dtn_distance(l1, l2, l0);
}

void write_dtn(std::ostream& out, const DtNMatrix& m) {
  io::write_magic(out, "CGODTN01");
  io::write_le<std::int32_t>(out, static_cast<std::int32_t>(m.dimension()));
  io::write_le<double>(out, m.k);
  io::write_le<std::int32_t>(out, m.degree_cap);
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j) io::write_complex(out, m.entries(i, j));
}

DtNMatrix read_dtn(std::istream& in, const Grid& grid) {
  io::expect_magic(in, "CGODTN01");
  const int dim = io::read_le<std::int32_t>(in);
  DtNMatrix m;
  m.k = io::read_le<double>(in);
  m.degree_cap = io::read_le<std::int32_t>(in);
  const BoundaryBasis basis(grid, m.degree_cap);
  if (static_cast<std::size_t>(dim) != basis.size()) throw IoError("DtN block dimension does not match its degree cap");
  m.basis = basis.modes();
  m.entries.resize(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m.entries(i, j) = io::read_complex(in);
  return m;
}

}  // namespace cgolab
